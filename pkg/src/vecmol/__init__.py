"""Parse born-digital molecular diagrams from vector primitives."""

__version__ = "0.1.0"
