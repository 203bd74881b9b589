"""
Dynamical systems: the system zoo, shift sequence rules and orbit traces.
"""
