"""Enumerations shared by the spectra and fitting modules."""

from enum import Enum


class Window(Enum):
    """Apodization applied along each delay axis before the 2D transform."""

    NONE = "none"
    COS2 = "cos2"  # half cos^2 taper, 1 at zero delay and 0 at the last sample


class SliceDirection(Enum):
    """Directions along which a one-quantum spectrum is sliced."""

    DIAGONAL = "diagonal"  # |omega_tau| = |omega_t|, images the inhomogeneous distribution
    CROSS_DIAGONAL = "cross_diagonal"  # orthogonal, carries the homogeneous lineshape


class FitFlag(Enum):
    """Conditions a fit reports instead of raising."""

    SINGULAR = "singular_jacobian"  # normal equations rank deficient at the optimum
    MAX_ITERATIONS = "max_iterations"
    AT_BOUND = "at_bound"  # see FitResult.pinned for the parameter names
    DEGENERATE = "degenerate"  # e.g. colliding bimodal centers
    SHORT_SEGMENT = "short_segment"  # echo segment with fewer than 4 points
    STALLED = "stalled"  # stopped on step or cost change with the gradient above tolerance
