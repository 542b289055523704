"""Automated program repair for MiniLang programs via multi-objective genetic programming."""

__version__ = "0.1.0"
