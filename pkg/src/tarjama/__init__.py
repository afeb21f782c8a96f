"""Ensemble translation curation pipeline for multi-turn SFT corpora."""

__version__ = "0.1.0"
