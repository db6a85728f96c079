"""
Test package for dlshaped-vrpsd
"""