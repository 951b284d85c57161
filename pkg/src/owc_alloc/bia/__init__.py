"""
Blind interference alignment: supersymbol plans, decoding and rates
"""
