"""Pydantic schemas for run configs, reports and manifests."""
