"""
Numerical core: instances, recourse evaluation, bounds, cuts and the branch-and-cut engine.
"""
