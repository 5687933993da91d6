"""
Global options shared by every subcommand.
"""

import typer

ConfigOption = typer.Option(None, "--config", help="Run-config file (JSON, manifest, or key=value lines)")
OutOption = typer.Option(None, "--out", help="Output directory (default: $OUTPUT_DIR/<command> or runs/<command>)")
WorkersOption = typer.Option(None, "--workers", min=1, help="Worker threads for corpus-parallel suites")
SeedOption = typer.Option(None, "--seed", min=0, max=2**64 - 1, help="Run seed (overrides the config)")
