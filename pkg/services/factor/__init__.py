"""
Factor maps between zoo systems and preservation checks.
"""
