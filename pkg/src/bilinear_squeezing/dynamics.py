"""Short-time squeezing under unitary evolution from the all-up state.

The first-order prediction is  xi^2(t) = 1 - 4 I_max t / N,  where I_max is the
maximum of the imaginary kernel over site angles.  Only couplings that act on
spin 1/2 enter, so the prediction uses the kernel without its K_ii diagonal.
"""

from __future__ import annotations

import itertools
import logging

import numpy as np

from .fitting import SlopeResult, make_slope_result
from .kernel import eval_kernel, maximize_I, squeezes
from .model import CouplingSpec, dense_hamiltonian, site_operator
from .squeezing import squeezing_report
from .statevec import css_state, evolve

log = logging.getLogger(__name__)


def energy_scale(spec: CouplingSpec) -> float:
    """Largest per-site sum of |flip| and |zz| couplings; sets the default grid units."""
    k = np.abs(spec.active_k)
    j = np.abs(spec.j_matrix.copy())
    np.fill_diagonal(j, 0.0)
    rows = (2 * k + 2 * j + np.abs(spec.zz_matrix)).sum(axis=1)
    s = float(np.max(rows, initial=0.0))
    return s if s > 0 else 1.0


def default_grid(spec: CouplingSpec, lo=1e-4, hi=1e-2, npts=12) -> np.ndarray:
    return np.geomspace(lo, hi, npts) / energy_scale(spec)


def predicted_t1_slope(spec: CouplingSpec, *, seed: int = 0):
    imax = maximize_I(spec, include_diagonal=False, seed=seed)
    return -4 * imax.value / spec.n_sites + 0.0, imax


def short_time_slope(
    spec: CouplingSpec,
    which_xi: str = "local",
    t_grid=None,
    *,
    seed: int = 0,
    n_restarts: int = 16,
    psi0=None,
    weights=None,
    kernel_spec: CouplingSpec | None = None,
) -> SlopeResult:
    """Fit the t -> 0 slope of xi^2 along exact evolution and compare with -4 I_max / N.

    ``psi0`` and ``weights`` let the generalized harness start from a flipped
    product state and measure the sigma-weighted collective spin; the
    prediction then comes from ``kernel_spec`` (the spin-flipped couplings).
    """
    if which_xi not in ("local", "uniform"):
        raise ValueError(f"which_xi must be 'local' or 'uniform', got {which_xi!r}")
    grid = default_grid(spec) if t_grid is None else np.asarray(t_grid, dtype=float)
    predicted, imax = predicted_t1_slope(kernel_spec or spec, seed=seed)
    start = css_state(spec.n_sites) if psi0 is None else psi0
    # optimal kernel angles are the natural seed for the local minimization
    kernel_seed = imax.angles
    reports = []
    for t in grid:
        psi = evolve(spec, start, float(t))
        reports.append(
            squeezing_report(psi, weights, seeds=[kernel_seed], n_restarts=n_restarts, seed=seed)
        )
    xl = np.array([r.xi2_local for r in reports])
    xu = np.array([r.xi2_uniform for r in reports])
    res = make_slope_result(grid, xl if which_xi == "local" else xu, predicted)
    other = make_slope_result(grid, xu if which_xi == "local" else xl, predicted)
    res.extra.update(
        which_xi=which_xi,
        i_max=imax.value,
        i_max_angles=imax.angles.tolist(),
        other_slope=other.slope_estimate,
        other_relative_error=other.relative_error,
        squeezes=squeezes(imax, kernel_spec or spec),
        reports=reports,
        seed=seed,
    )
    return res


def slope_verdict(slope: float, threshold: float = 1e-6) -> bool:
    """True when the fitted slope signals first-order squeezing."""
    return slope < -threshold


# ---------------------------------------------------------------------------
# dense oracles for the identities used in the first-order argument


def _css_vector(n):
    v = np.zeros(2**n, dtype=complex)
    v[-1] = 1.0
    return v


def transverse_operator(thetas, n: int) -> np.ndarray:
    """Dense J_perp(theta) = sum_i (cos theta_i S_i^x + sin theta_i S_i^y)."""
    out = 0
    for i, t in enumerate(thetas):
        out = out + np.cos(t) * site_operator("x", i, n) + np.sin(t) * site_operator("y", i, n)
    return out.toarray()


def commutator_oracle(spec: CouplingSpec, thetas, n_max: int = 6) -> complex:
    """<CSS| [J_perp(theta)^2, H] |CSS> from dense matrices."""
    n = spec.n_sites
    if n > n_max:
        raise ValueError(f"dense oracle limited to {n_max} sites")
    h = dense_hamiltonian(spec)
    jp = transverse_operator(thetas, n)
    jp2 = jp @ jp
    v = _css_vector(n)
    return complex(v.conj() @ (jp2 @ h - h @ jp2) @ v)


def commutator_prediction(spec: CouplingSpec, thetas) -> complex:
    return -1j * eval_kernel(spec, thetas, include_diagonal=False).imag


def pair_commutator_table(n: int) -> dict:
    """<CSS|[A_lm, B_ij]|CSS> for every pair-operator type and every ordered site tuple.

    A and B range over S+S+, S-S-, S+S-, S-S+ on distinct sites.  Keys are
    (type_a, type_b, l, m, i, j).
    """
    if n > 4:
        raise ValueError("exhaustive pair table limited to n <= 4")
    ops = {c: [site_operator(c, s, n) for s in range(n)] for c in "+-"}
    kinds = {"++": ("+", "+"), "--": ("-", "-"), "+-": ("+", "-"), "-+": ("-", "+")}
    pair = {}
    for name, (a, b) in kinds.items():
        for l, m in itertools.permutations(range(n), 2):
            pair[name, l, m] = (ops[a][l] @ ops[b][m]).toarray()
    v = _css_vector(n)
    table = {}
    for (ka, l, m), a_op in pair.items():
        for (kb, i, j), b_op in pair.items():
            table[ka, kb, l, m, i, j] = complex(v.conj() @ (a_op @ b_op - b_op @ a_op) @ v)
    return table


def pair_commutator_check(n: int, tol: float = 1e-12) -> bool:
    """Checks <[S+_l S+_m, S-_i S-_j]> = d_il d_jm + d_im d_jl, its negative for the
    reversed pair, and zero for every other combination."""
    table = pair_commutator_table(n)
    ok = True
    for (ka, kb, l, m, i, j), val in table.items():
        delta = float((i == l and j == m) + (i == m and j == l))
        if (ka, kb) == ("++", "--"):
            expected = delta
        elif (ka, kb) == ("--", "++"):
            expected = -delta
        else:
            expected = 0.0
        if abs(val - expected) > tol:
            log.error("pair commutator mismatch %s: %s vs %s", (ka, kb, l, m, i, j), val, expected)
            ok = False
    return ok


def jz_first_order_check(spec: CouplingSpec, dt: float) -> float:
    """|<J^z>(dt) - N/2| after exact evolution from the all-up state."""
    n = spec.n_sites
    if dt == 0:
        return 0.0
    psi = evolve(spec, css_state(n), dt)
    a = psi.amplitudes
    idx = np.arange(a.size)
    ups = np.array([bin(x).count("1") for x in idx])
    jz = float(np.sum(np.abs(a) ** 2 * (ups - n / 2)))
    return abs(jz - n / 2)
