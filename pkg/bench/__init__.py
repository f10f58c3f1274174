# Benchmark package for landmark heuristic toolkit
