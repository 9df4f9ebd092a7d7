"""Offline tool that runs sentence encoders over a corpus and writes the
binary embedding-store files the turning point pipeline consumes."""

__version__ = "0.1.0"


class ExportError(Exception):
    """Bad inputs or an encoder that cannot be loaded."""
