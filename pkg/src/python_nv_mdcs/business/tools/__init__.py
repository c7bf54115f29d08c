"""Logging helpers shared by the pipeline modules."""
