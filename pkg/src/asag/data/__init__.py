"""Bundled data files (frozen English stop-word list)."""
