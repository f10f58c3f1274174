# Landmark package for landmark heuristic toolkit
