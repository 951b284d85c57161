"""
Test package for owc-alloc
"""
