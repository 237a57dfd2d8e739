"""Symbolic engine for the inductive Bergman-projector construction on
(0, even)-forms twisted by a non-holomorphic bundle."""

__version__ = "0.1.0"
