"""Multimodal age-suitability classification toolkit."""

__version__ = "0.1.0"
