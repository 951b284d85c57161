"""
owc-alloc: VCSEL optical wireless downlink simulator with BIA rates,
utility-maximizing resource allocation and a neural surrogate allocator
"""

__version__ = "0.1.0"
