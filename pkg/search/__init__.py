# Search package for landmark heuristic toolkit
