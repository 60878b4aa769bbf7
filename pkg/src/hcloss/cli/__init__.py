"""Command-line interface for hcloss."""
