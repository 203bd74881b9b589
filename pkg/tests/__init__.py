"""
Test suite for furdyn.

Includes:
- Unit tests for windowed sets, families and the system zoo
- Classification tests on exactly solvable systems
- End-to-end CLI runs with report checks
"""
