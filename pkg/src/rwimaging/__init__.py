"""Mode coherence, surrogate array data and adaptive coherent imaging in random waveguides."""

__version__ = "0.1.0"
