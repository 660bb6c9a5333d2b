"""Interpreter and static analysis toolkit for a depth-stratified lambda
calculus with region-based effects and threads."""

__version__ = "0.1.0"
