"""Quantum sequential circuits: stored gates activated by measurement."""

__version__ = "0.1.0"

from . import algos, core, oracle, parser, qconv, seqexec, transistor

__all__ = ["algos", "core", "oracle", "parser", "qconv", "seqexec",
           "transistor", "__version__"]
