"""Attention-guided subgraph sampling and serialization order selection for graph prompts."""
from .infrastructure.cli import main

__all__ = ["main"]
