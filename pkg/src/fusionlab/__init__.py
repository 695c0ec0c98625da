"""Exact formal-calculus workbench for P(z)- and Q(z)-tensor products of modules."""
__version__ = "0.1.0"
