"""
Experiments and report plots
"""
