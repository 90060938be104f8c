"""Report rendering (text and JSON)."""
