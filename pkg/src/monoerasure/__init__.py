"""Erasure codes for monotone access structures and a dispersal protocol
built on them."""

__version__ = "0.1.0"
