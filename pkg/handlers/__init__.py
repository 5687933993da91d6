"""Typer subcommand handlers and their shared exit-code plumbing."""
