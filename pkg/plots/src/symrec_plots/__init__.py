from .render import FIGURES, SchemaError, render

__all__ = ["render", "FIGURES", "SchemaError"]
__version__ = "0.1.0"
