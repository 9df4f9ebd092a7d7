"""Turning point identification in plot synopses and screenplay scenes."""

__version__ = "0.1.0"
