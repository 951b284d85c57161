"""
Gaussian-beam channel model for VCSEL access points
"""
