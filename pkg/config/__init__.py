"""Process settings and run-config file parsing."""
