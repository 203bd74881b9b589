"""
Output integrations.
Handles report files and their published schemas.
"""
