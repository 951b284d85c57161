"""
Scenario sampling and solver-labeled datasets
"""
