"""Model file format: parser, printer and the built-in registry."""
