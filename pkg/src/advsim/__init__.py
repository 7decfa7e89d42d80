"""Deterministic synthetic scene simulator with in-pipeline adversarial patches."""

__version__ = "0.1.0"
