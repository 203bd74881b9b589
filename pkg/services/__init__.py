"""
Dynamics services.
Handles the system zoo, orbits, classification and factors.
"""
