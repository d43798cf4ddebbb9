"""geckit: grammatical error correction toolkit with mixed-grained weighted training."""

__version__ = "0.1.0"
