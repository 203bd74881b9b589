"""
Core module - Windowed sets, Furstenberg families and sweep orchestration.
"""
