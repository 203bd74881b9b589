"""
furdyn - Furstenberg-family dynamics toolkit.

This package provides:
- Windowed subsets of the integers and family membership verdicts
- A zoo of compact metric systems with exact orbit arithmetic
- Sampled classification of equicontinuity, sensitivity and mean notions
- Factor maps and the preservation check
- Batch sweeps with JSON / CSV reports
"""

__version__ = "0.1.0"
