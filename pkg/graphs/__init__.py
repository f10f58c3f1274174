# Graph package for landmark heuristic toolkit
