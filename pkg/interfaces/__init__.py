"""Interface layer for user interaction."""
