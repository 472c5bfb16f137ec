"""
Floquet analysis of linear dynamic systems on time scales periodic in shifts.
"""

__version__ = '0.3.0'

# Bumped whenever the report JSON layout changes.
SCHEMA_VERSION = '1.3'
