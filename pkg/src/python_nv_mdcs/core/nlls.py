"""Bounded nonlinear least-squares engine shared by every model fit."""

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import least_squares

from src.python_nv_mdcs.core.enums import FitFlag
from src.python_nv_mdcs.core.errors import FitError

logger = logging.getLogger(__name__)

ModelFn = Callable[[np.ndarray, np.ndarray], np.ndarray]
JacobianFn = Callable[[np.ndarray, np.ndarray], np.ndarray]

SINGULAR_RTOL = 1e-10
EXACT_FIT_RTOL = 1e-6  # residual norm relative to the (weighted) data norm


@dataclass(frozen=True)
class Tolerances:
    """Stopping rules: relative step, relative cost change, gradient, iteration cap.

    ``gradient_cosine`` is the convergence certificate checked after the solver
    stops: the largest cosine between the residual vector and a free Jacobian
    column.
    """

    xtol: float = 1e-10
    ftol: float = 1e-12
    gtol: float = 1e-10
    max_iterations: int = 500
    gradient_cosine: float = 1e-3


DEFAULT_TOLERANCES = Tolerances()


@dataclass(frozen=True)
class FitResult:
    """Outcome of a fit; non-convergence is reported here rather than raised."""

    params: Dict[str, float]
    sigma: Dict[str, float]
    residual_norm: float  # sum of squared (weighted) residuals
    iterations: int
    converged: bool
    flags: Tuple[FitFlag, ...] = ()
    pinned: Tuple[str, ...] = ()
    gradient_norm: float = 0.0  # scale-free, see Tolerances.gradient_cosine
    covariance: Optional[np.ndarray] = field(default=None, compare=False, repr=False)
    extras: Dict[str, float] = field(default_factory=dict, compare=False)  # settings needed to redraw the model

    def __getitem__(self, name: str) -> float:
        return self.params[name]

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(self.params)

    def has_flag(self, flag: FitFlag) -> bool:
        return flag in self.flags

    def with_flags(self, *flags: FitFlag, converged: Optional[bool] = None) -> "FitResult":
        merged = self.flags + tuple(f for f in flags if f not in self.flags)
        return replace(self, flags=merged, converged=self.converged if converged is None else converged)

    def rescaled(self, factor: float, names: Iterable[str], residual_factor: Optional[float] = None) -> "FitResult":
        """Multiply the named (amplitude-like) parameters and their errors by ``factor``."""
        names = tuple(names)
        params = {k: v * factor if k in names else v for k, v in self.params.items()}
        sigma = {k: v * abs(factor) if k in names else v for k, v in self.sigma.items()}
        residual = self.residual_norm if residual_factor is None else self.residual_norm * residual_factor
        return replace(self, params=params, sigma=sigma, residual_norm=residual, covariance=None)

    def with_extras(self, **extras: float) -> "FitResult":
        return replace(self, extras={**self.extras, **extras})


def _parameter_covariance(jacobian: np.ndarray, variance: float) -> Tuple[np.ndarray, bool]:
    """(J^T J)^+ * variance and whether J is numerically rank deficient."""
    _, singular_values, vt = np.linalg.svd(jacobian, full_matrices=False)
    if singular_values.size == 0 or singular_values[0] == 0:
        return np.full((jacobian.shape[1],) * 2, np.inf), True
    keep = singular_values > SINGULAR_RTOL * singular_values[0]
    singular = not bool(np.all(keep))
    inverse_sq = np.zeros_like(singular_values)
    inverse_sq[keep] = 1.0 / singular_values[keep] ** 2
    covariance = (vt.T * inverse_sq) @ vt * variance
    return covariance, singular


def _gradient_cosine(jacobian: np.ndarray, residuals: np.ndarray, free: np.ndarray, data_norm: float) -> float:
    """Largest |J_j . r| / (|J_j| |r|) over the free parameters; 0 for an exact fit."""
    residual_norm = float(np.linalg.norm(residuals))
    if residual_norm <= EXACT_FIT_RTOL * data_norm:
        return 0.0
    column_norms = np.linalg.norm(jacobian, axis=0)
    usable = free & (column_norms > 0)
    if not usable.any():
        return 0.0
    gradient = jacobian[:, usable].T @ residuals
    return float(np.max(np.abs(gradient) / (column_norms[usable] * residual_norm)))


def nlls_fit(
    residual_model: ModelFn,
    data: Tuple[Sequence[float], Sequence[float]],
    init: Sequence[float],
    bounds: Optional[Tuple[Sequence[float], Sequence[float]]] = None,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    *,
    names: Optional[Sequence[str]] = None,
    jac: Optional[JacobianFn] = None,
    y_err: Optional[Sequence[float]] = None,
) -> FitResult:
    """Fit ``residual_model(x, p)`` to ``data = (x, y)`` by damped Gauss-Newton descent.

    The trust-region reflective variant of scipy handles the bounds. With
    ``y_err`` the residuals are weighted by 1/y_err and the reported errors are
    absolute; otherwise they are scaled by the reduced residual variance.
    Rank-deficient normal equations mark the result as not converged and the
    best point found is returned. A solver stop on step or cost change only
    counts as converged when the gradient of the free parameters is below
    ``tolerances.gradient_cosine``; otherwise the result is flagged STALLED.

    :param residual_model: model evaluated as ``residual_model(x, params)``
    :param data: abscissa and ordinate arrays
    :param init: starting parameters, inside ``bounds``
    :param bounds: lower and upper arrays, unbounded when omitted
    :param tolerances: stopping rules and the convergence certificate
    :param names: parameter names, ``p0``, ``p1``... by default
    :param jac: analytic Jacobian ``jac(x, params)``, finite differences when omitted
    :param y_err: per-point standard errors for weighting
    :return: FitResult; trouble is reported in ``flags`` and never raised
    """
    x = np.asarray(data[0], dtype=float)
    y = np.asarray(data[1], dtype=float)
    p0 = np.asarray(init, dtype=float)
    n_params = p0.size
    names = tuple(names) if names is not None else tuple(f"p{i}" for i in range(n_params))
    if len(names) != n_params:
        raise FitError(f"{len(names)} parameter names for {n_params} parameters")
    if y.size < n_params:
        raise FitError(f"Need at least {n_params} data points, got {y.size}")
    if not np.all(np.isfinite(y)) or not np.all(np.isfinite(p0)):
        raise FitError("Data and initial values must be finite")

    if bounds is None:
        lower = np.full(n_params, -np.inf)
        upper = np.full(n_params, np.inf)
    else:
        lower = np.broadcast_to(np.asarray(bounds[0], dtype=float), p0.shape).copy()
        upper = np.broadcast_to(np.asarray(bounds[1], dtype=float), p0.shape).copy()
    if np.any(p0 < lower) or np.any(p0 > upper):
        raise FitError(f"Initial values {p0} outside bounds [{lower}, {upper}]")
    # the reflective trust region needs a strictly interior start
    nudge = 1e-10 * np.maximum(1.0, np.abs(p0))
    with np.errstate(invalid="ignore"):
        middle = 0.5 * (lower + upper)
        p0 = np.where(p0 == lower, np.minimum(lower + nudge, middle), p0)
        p0 = np.where(p0 == upper, np.maximum(upper - nudge, middle), p0)

    if y_err is None:
        weights = np.ones_like(y)
    else:
        errors = np.asarray(y_err, dtype=float)
        if errors.shape != y.shape or np.any(errors <= 0) or not np.all(np.isfinite(errors)):
            raise FitError("y_err must be finite, positive and match the data")
        weights = 1.0 / errors

    def residuals(p: np.ndarray) -> np.ndarray:
        return (residual_model(x, p) - y) * weights

    jacobian = "2-point"
    if jac is not None:

        def jacobian(p: np.ndarray) -> np.ndarray:
            return jac(x, p) * weights[:, np.newaxis]

    result = least_squares(
        residuals,
        p0,
        jac=jacobian,
        bounds=(lower, upper),
        method="trf",
        x_scale="jac",
        xtol=tolerances.xtol,
        ftol=tolerances.ftol,
        gtol=tolerances.gtol,
        max_nfev=tolerances.max_iterations,
    )

    residual_norm = float(np.sum(result.fun**2))
    dof = y.size - n_params
    variance = 1.0 if y_err is not None else (residual_norm / dof if dof > 0 else 1.0)
    jacobian_at_optimum = np.atleast_2d(result.jac)
    covariance, singular = _parameter_covariance(jacobian_at_optimum, variance)
    sigma_values = np.sqrt(np.clip(np.diag(covariance), 0.0, None))

    span = np.maximum(1.0, np.abs(result.x))
    on_bound = (np.asarray(result.active_mask) != 0) | np.isclose(result.x, lower, rtol=0.0, atol=1e-9 * span)
    on_bound |= np.isclose(result.x, upper, rtol=0.0, atol=1e-9 * span)
    pinned = tuple(name for name, hit in zip(names, on_bound) if hit)

    cosine = _gradient_cosine(jacobian_at_optimum, result.fun, ~on_bound, float(np.linalg.norm(y * weights)))

    flags = []
    if result.status == 0:
        flags.append(FitFlag.MAX_ITERATIONS)
    if singular:
        flags.append(FitFlag.SINGULAR)
    if pinned:
        flags.append(FitFlag.AT_BOUND)
    # status 1 is the solver's own gradient stop
    stalled = result.status > 1 and cosine > tolerances.gradient_cosine
    if stalled:
        flags.append(FitFlag.STALLED)
    converged = bool(result.status > 0) and not singular and not stalled
    iterations = int(result.njev if result.njev is not None else result.nfev)

    logger.debug(
        "nlls_fit status=%d iterations=%d cost=%.6g flags=%s", result.status, iterations, residual_norm, flags
    )
    return FitResult(
        params={name: float(value) for name, value in zip(names, result.x)},
        sigma={name: float(value) for name, value in zip(names, sigma_values)},
        residual_norm=residual_norm,
        iterations=iterations,
        converged=converged,
        flags=tuple(flags),
        pinned=pinned,
        gradient_norm=cosine,
        covariance=covariance,
    )
