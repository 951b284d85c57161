"""
Neural surrogate of the allocation solver
"""
