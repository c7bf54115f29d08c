"""Core numerics for Python NV MDCS: physics, forward model, spectra and least squares."""
