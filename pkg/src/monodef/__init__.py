"""Finite workbench for creatures, gadget coding and monotone definability."""

__version__ = "0.1.0"
