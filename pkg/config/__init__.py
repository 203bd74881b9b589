"""
Configuration management.
YAML defaults, environment overrides and the typed settings models.
"""
