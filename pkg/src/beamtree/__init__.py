"""Interactive beam-search tree engine over pluggable language models."""

__version__ = "0.1.0"
