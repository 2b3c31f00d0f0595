"""Land-cover QA generation, counting-aware training, and evaluation."""

__version__ = "0.1.0"
