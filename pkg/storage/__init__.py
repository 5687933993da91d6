"""Snapshots, norm tables, JSON reports and run manifests on disk."""
