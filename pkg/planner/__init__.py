"""SRBD trajectory planning for legged robots with force polytopes and leg-terrain clearance"""

__version__ = "0.1.0"
