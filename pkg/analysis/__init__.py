# Analysis package for landmark heuristic toolkit
