# Kept apart from __init__.py so setup.py can read it without importing lark or numpy

__version__ = '0.1.0'
