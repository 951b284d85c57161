"""
Utility-maximizing resource allocation across APs and users
"""
