"""Fits, analyses, file formats and command line for Python NV MDCS."""
