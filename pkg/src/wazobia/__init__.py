"""Multilingual named-entity recognition for Hausa, Igbo, and Yoruba."""

__version__ = "0.1.0"
