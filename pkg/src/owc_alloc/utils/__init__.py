"""
Shared configuration, tool base classes, errors and execution helpers
"""
