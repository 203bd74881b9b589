"""
Empirical verdicts for equicontinuity, sensitivity and their mean variants.
"""
