# Heuristic package for landmark heuristic toolkit
