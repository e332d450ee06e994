"""Squeezing of the ground state of  lambda H - h sum_i S_i^z  at small lambda.

First-order prediction:  xi^2(lambda) = 1 - 2 R_max lambda / (h N).
"""

from __future__ import annotations

import numpy as np

from .dynamics import energy_scale, transverse_operator
from .fitting import SlopeResult, make_slope_result
from .kernel import maximize_R, squeezes
from .model import CouplingSpec, site_operator
from .squeezing import squeezing_report
from .statevec import StateVector, css_state, ground_state

GAP_FLOOR = 1e-8


class GapCollapseError(RuntimeError):
    pass


def perturbative_state(
    spec: CouplingSpec, dlambda: float, field_h: float, *, normalize: bool = True
) -> StateVector:
    """|CSS> - (dlambda / 2h) sum_{i != j} conj(K_ij) S_i^- S_j^- |CSS>.

    The expression is only normalized to first order; by default the result is
    renormalized.
    """
    if not field_h > 0:
        raise ValueError(f"field_h must be positive, got {field_h}")
    n = spec.n_sites
    a = css_state(n).amplitudes.copy()
    full = 2**n - 1
    k = spec.k_matrix
    for i in range(n):
        for j in range(n):
            if i != j and k[i, j] != 0:
                a[full ^ (1 << i) ^ (1 << j)] -= dlambda / (2 * field_h) * np.conj(k[i, j])
    psi = StateVector(n, a)
    return psi.normalized() if normalize else psi


def infidelity(a: StateVector, b: StateVector) -> float:
    """1 - |<a|b>|^2 for normalized states."""
    return 1.0 - abs(a.overlap(b)) ** 2


def state_distance(a: StateVector, b: StateVector) -> float:
    """sqrt(1 - |<a|b>|^2), computed as the norm of the part of b orthogonal to a.

    Phase independent; first order in the error amplitude, so a first-order
    correct perturbative state sits at distance O(dlambda^2) from the exact one.
    """
    ov = a.overlap(b)
    return float(np.linalg.norm(b.amplitudes - ov * a.amplitudes))


def default_lambda_grid(spec: CouplingSpec, field_h: float, lo=1e-4, hi=1e-2, npts=12) -> np.ndarray:
    return np.geomspace(lo, hi, npts) * field_h / energy_scale(spec)


def predicted_t2_slope(spec: CouplingSpec, field_h: float, *, seed: int = 0):
    rmax = maximize_R(spec, include_diagonal=False, seed=seed)
    return -2 * rmax.value / (field_h * spec.n_sites) + 0.0, rmax


def ground_states_along(spec, lambda_grid, field_h, *, field_signs=None):
    out = []
    for lam in lambda_grid:
        gs = ground_state(spec, float(lam), field_h, field_signs=field_signs)
        if gs.gap < GAP_FLOOR * field_h:
            raise GapCollapseError(
                f"gap {gs.gap:.3e} below {GAP_FLOOR:g} h at lambda={lam:.4g}; "
                "the lambda grid reaches a level crossing, shrink it"
            )
        out.append(gs)
    return out


def adiabatic_slope(
    spec: CouplingSpec,
    field_h: float = 1.0,
    which_xi: str = "local",
    lambda_grid=None,
    *,
    seed: int = 0,
    n_restarts: int = 16,
    field_signs=None,
    weights=None,
    kernel_spec: CouplingSpec | None = None,
) -> SlopeResult:
    """Fit d xi^2 / d lambda of the exact ground state and compare with -2 R_max / (h N)."""
    if which_xi not in ("local", "uniform"):
        raise ValueError(f"which_xi must be 'local' or 'uniform', got {which_xi!r}")
    if not field_h > 0:
        raise ValueError(f"field_h must be positive, got {field_h}")
    grid = default_lambda_grid(spec, field_h) if lambda_grid is None else np.asarray(lambda_grid, dtype=float)
    predicted, rmax = predicted_t2_slope(kernel_spec or spec, field_h, seed=seed)
    states = ground_states_along(spec, grid, field_h, field_signs=field_signs)
    reports = [
        squeezing_report(gs.state, weights, seeds=[rmax.angles], n_restarts=n_restarts, seed=seed)
        for gs in states
    ]
    xl = np.array([r.xi2_local for r in reports])
    xu = np.array([r.xi2_uniform for r in reports])
    res = make_slope_result(grid, xl if which_xi == "local" else xu, predicted)
    other = make_slope_result(grid, xu if which_xi == "local" else xl, predicted)
    res.extra.update(
        which_xi=which_xi,
        r_max=rmax.value,
        r_max_angles=rmax.angles.tolist(),
        other_slope=other.slope_estimate,
        other_relative_error=other.relative_error,
        squeezes=squeezes(rmax, kernel_spec or spec),
        reports=reports,
        min_gap=float(min(gs.gap for gs in states)),
        field_h=field_h,
        seed=seed,
    )
    return res


def perturbed_jz_check(spec: CouplingSpec, dlambda: float, field_h: float) -> float:
    """|<J^z> - N/2| on the exact ground state at lambda = dlambda."""
    n = spec.n_sites
    if dlambda == 0:
        return 0.0
    a = ground_state(spec, dlambda, field_h).state.amplitudes
    ups = np.array([bin(x).count("1") for x in range(a.size)])
    return abs(float(np.sum(np.abs(a) ** 2 * (ups - n / 2))) - n / 2)


def matrix_element_oracle(thetas, i: int, j: int, n: int) -> complex:
    """<CSS_ij| J_perp(theta)^2 |CSS> by dense matrices, with |CSS_ij> = S_i^- S_j^- |CSS>."""
    if i == j:
        raise ValueError("i == j gives the null vector S_i^- S_i^- |CSS>")
    if n > 6:
        raise ValueError("dense oracle limited to n <= 6")
    css = np.zeros(2**n, dtype=complex)
    css[-1] = 1.0
    css_ij = site_operator("-", i, n) @ (site_operator("-", j, n) @ css)
    jp = transverse_operator(thetas, n)
    return complex(css_ij.conj() @ (jp @ (jp @ css)))


def matrix_element_prediction(thetas, i: int, j: int) -> complex:
    return np.exp(1j * (thetas[i] + thetas[j])) / 2
