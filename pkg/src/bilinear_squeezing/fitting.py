from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ZERO_SLOPE_SCALE = 1e-4


@dataclass
class SlopeResult:
    """Linear coefficient of xi^2(x) - 1 = s x + c x^2 near x = 0, with the theory value."""

    slope_estimate: float
    slope_stderr: float
    predicted_slope: float
    t_grid: np.ndarray
    xi2_values: np.ndarray
    relative_error: float
    quadratic_coeff: float = 0.0
    reliable: bool = True
    notes: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def within(self, tol: float) -> bool:
        return self.relative_error < tol


def relative_error(estimate: float, predicted: float) -> float:
    return abs(estimate - predicted) / max(abs(predicted), ZERO_SLOPE_SCALE)


def fit_linear_quadratic(x, y) -> tuple[float, float, float, float]:
    """Least squares y = s x + c x^2 (no intercept).  Returns (s, c, stderr(s), rms residual)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 3:
        raise ValueError("need at least three grid points for the quadratic fit")
    # column scaling keeps the normal equations well conditioned
    xs = np.max(np.abs(x))
    a = np.stack([x / xs, (x / xs) ** 2], axis=1)
    coef, *_ = np.linalg.lstsq(a, y, rcond=None)
    resid = y - a @ coef
    dof = x.size - 2
    sigma2 = float(resid @ resid) / dof if dof > 0 else 0.0
    cov = sigma2 * np.linalg.inv(a.T @ a)
    s, c = coef[0] / xs, coef[1] / xs**2
    return float(s), float(c), float(np.sqrt(cov[0, 0]) / xs), float(np.sqrt(np.mean(resid**2)))


def make_slope_result(grid, xi2, predicted, *, max_quadratic_fraction=0.1) -> SlopeResult:
    grid = np.asarray(grid, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    if np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be positive and strictly increasing")
    s, c, se, rms = fit_linear_quadratic(grid, xi2 - 1.0)
    res = SlopeResult(s, se, predicted, grid, xi2, relative_error(s, predicted), c)
    if abs(s) > 1e-8:
        frac = abs(c) * grid[-1] / abs(s)
        if frac > max_quadratic_fraction:
            res.reliable = False
            res.notes.append(
                f"quadratic term is {frac:.1%} of the linear term at the largest grid point; "
                "grid may be outside the linear regime"
            )
    scale = max(np.max(np.abs(xi2 - 1.0)), 1e-300)
    if rms > 1e-3 * scale and rms > 1e-13:
        res.reliable = False
        res.notes.append(f"fit residual {rms:.2e} is large relative to the signal {scale:.2e}")
    return res
