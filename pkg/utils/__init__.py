# Utility package for landmark heuristic toolkit
