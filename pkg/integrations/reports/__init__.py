"""
JSON reports, CSV summaries and their published schema.
"""
