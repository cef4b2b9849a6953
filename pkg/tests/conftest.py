"""Shared pytest configuration.

Keeping this file (and no __init__.py) makes pytest put tests/ on
sys.path, so the suites can import the generators module directly.
"""
