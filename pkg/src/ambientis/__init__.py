"""Privacy-preserving behavioural monitoring: frames in, anonymized features out."""

__version__ = "0.1.0"
