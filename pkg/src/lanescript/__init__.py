"""Lane-based traffic scenario scripting and simulation."""

__version__ = "0.1.0"
