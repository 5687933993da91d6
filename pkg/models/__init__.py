"""Experiments run by each subcommand."""
