"""Exact p-adic Mazur-Tate elements and Iwasawa invariants for modular forms."""

__version__ = "0.1.0"
