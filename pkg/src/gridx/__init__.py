"""Grid capacity expansion planning toolkit."""

__version__ = "0.1.0"
