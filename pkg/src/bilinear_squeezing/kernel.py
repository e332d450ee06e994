"""Phase-weighted coupling sum  Kern(theta) = sum_ij exp(i(theta_i + theta_j)) K_ij = R + iI.

Its maxima over the angle torus set the first-order squeezing rates: the
imaginary part for unitary dynamics, the real part for the adiabatically
perturbed ground state.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .model import CouplingSpec

TWO_PI = 2 * np.pi


def canonical_angles(thetas) -> np.ndarray:
    t = np.mod(np.asarray(thetas, dtype=float), TWO_PI)
    t[t >= TWO_PI] = 0.0
    return t


def _check_angles(spec: CouplingSpec, thetas) -> np.ndarray:
    t = np.asarray(thetas, dtype=float)
    if t.shape != (spec.n_sites,):
        raise ValueError(f"expected {spec.n_sites} angles, got shape {t.shape}")
    if not np.all(np.isfinite(t)):
        raise ValueError("angles must be finite")
    return t


def eval_kernel(spec: CouplingSpec, thetas, include_diagonal: bool | None = None) -> complex:
    t = _check_angles(spec, thetas)
    u = np.exp(1j * t)
    return complex(u @ spec.kernel_matrix(include_diagonal) @ u)


def kernel_gradient(spec: CouplingSpec, thetas, include_diagonal: bool | None = None) -> np.ndarray:
    """d Kern / d theta_l = 2i exp(i theta_l) sum_j K_lj exp(i theta_j)  (K symmetric)."""
    t = _check_angles(spec, thetas)
    u = np.exp(1j * t)
    return 2j * u * (spec.kernel_matrix(include_diagonal) @ u)


# ---------------------------------------------------------------------------
# gradient ascent on the torus


@dataclass
class AscentResult:
    x: np.ndarray
    value: float
    converged: bool
    n_iter: int


def gradient_ascent(
    fun_grad: Callable[[np.ndarray], tuple[float, np.ndarray]],
    x0: np.ndarray,
    *,
    gtol: float = 1e-10,
    max_iter: int = 10_000,
) -> AscentResult:
    """Maximize a smooth periodic function.

    Trial steps use the Barzilai-Borwein length, then backtrack until the Armijo
    condition holds.  Stops when max|grad| < gtol.
    """
    x = np.array(x0, dtype=float)
    f, g = fun_grad(x)
    step = 1.0
    x_prev = g_prev = None
    for it in range(max_iter):
        if np.max(np.abs(g), initial=0.0) < gtol:
            return AscentResult(canonical_angles(x), f, True, it)
        if x_prev is not None:
            s, y = x - x_prev, g - g_prev
            sy = float(s @ y)
            if sy < 0:
                step = float(s @ s) / -sy
            else:
                step = max(step * 2.0, 1e-3)
        gg = float(g @ g)
        # allowance for roundoff in f: near the optimum the Armijo gain drops below it
        noise = 1e-14 * max(1.0, abs(f))
        while True:
            x_new = x + step * g
            f_new, g_new = fun_grad(x_new)
            if f_new >= f + 1e-4 * step * gg - noise:
                break
            step *= 0.5
            if step < 1e-18:
                # no ascent possible at working precision
                return AscentResult(canonical_angles(x), f, np.max(np.abs(g)) < 1e-6, it)
        x_prev, g_prev = x, g
        x, f, g = x_new, f_new, g_new
    return AscentResult(canonical_angles(x), f, bool(np.max(np.abs(g)) < gtol), max_iter)


def multistart_ascent(
    fun_grad: Callable[[np.ndarray], tuple[float, np.ndarray]],
    n: int,
    *,
    seeds: Sequence[np.ndarray] = (),
    n_restarts: int = 32,
    rng: np.random.Generator | None = None,
    gtol: float = 1e-10,
    max_iter: int = 10_000,
) -> tuple[AscentResult, int]:
    """Best ascent over explicit seeds followed by random starts.

    Ties keep the earliest start, so a fixed ``rng`` seed gives a reproducible
    result.  Returns the best result and the number of starts run.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    starts = [np.asarray(s, dtype=float) for s in seeds]
    starts += [rng.uniform(0, TWO_PI, size=n) for _ in range(n_restarts)]
    best = None
    for x0 in starts:
        res = gradient_ascent(fun_grad, x0, gtol=gtol, max_iter=max_iter)
        if best is None or res.value > best.value:
            best = res
    return best, len(starts)


# ---------------------------------------------------------------------------
# kernel maximization


@dataclass
class KernelMaxResult:
    value: float
    angles: np.ndarray
    analytic_lower_bound: float
    converged: bool
    n_restarts_used: int
    part: str = "imag"


def kernel_at_zero(spec: CouplingSpec, include_diagonal: bool | None = None) -> complex:
    """R0 + i I0, the plain sum of K."""
    return complex(np.sum(spec.kernel_matrix(include_diagonal)))


def _maximize(spec, part, include_diagonal, n_restarts, seed):
    n = spec.n_sites
    k = spec.kernel_matrix(include_diagonal)
    k0 = complex(np.sum(k))
    r0, i0 = k0.real, k0.imag
    sgn = lambda v: 1.0 if v > 0 else -1.0  # noqa: E731

    seeds = []
    if part == "imag":
        if r0 != 0:
            seeds.append(np.full(n, np.pi / 4 * sgn(r0)))
        if i0 != 0:
            seeds.append(np.full(n, 0.0 if i0 > 0 else np.pi / 2))
    else:
        if r0 != 0:
            seeds.append(np.full(n, 0.0 if r0 > 0 else np.pi / 2))
        if i0 != 0:
            seeds.append(np.full(n, -np.pi / 4 * sgn(i0)))
    # uniform angles that rotate Kern(0) onto the target axis reach |Kern(0)|
    if k0 != 0:
        target = np.pi / 2 if part == "imag" else 0.0
        seeds.append(np.full(n, (target - np.angle(k0)) / 2))
    bound = max(abs(r0), abs(i0))

    if not np.any(k):
        return KernelMaxResult(0.0, np.zeros(n), 0.0, True, 0, part)

    def fun_grad(t):
        u = np.exp(1j * t)
        ku = k @ u
        val = u @ ku
        grad = 2j * u * ku
        if part == "imag":
            return val.imag, grad.imag
        return val.real, grad.real

    best, used = multistart_ascent(
        fun_grad, n, seeds=seeds, n_restarts=n_restarts, rng=np.random.default_rng(seed)
    )
    return KernelMaxResult(float(best.value), best.x, bound, best.converged, used, part)


def maximize_I(
    spec: CouplingSpec, *, include_diagonal: bool | None = None, n_restarts: int = 32, seed: int = 0
) -> KernelMaxResult:
    return _maximize(spec, "imag", include_diagonal, n_restarts, seed)


def maximize_R(
    spec: CouplingSpec, *, include_diagonal: bool | None = None, n_restarts: int = 32, seed: int = 0
) -> KernelMaxResult:
    return _maximize(spec, "real", include_diagonal, n_restarts, seed)


def squeezing_threshold(spec: CouplingSpec) -> float:
    kinf = float(np.max(np.abs(spec.k_matrix), initial=0.0))
    return 1e-9 * max(1.0, kinf * spec.n_sites**2)


def squeezes(result: KernelMaxResult, spec: CouplingSpec) -> bool:
    return result.value > squeezing_threshold(spec)


def grid_maximum(spec: CouplingSpec, part: str = "imag", points: int = 96, include_diagonal=None):
    """Exhaustive search over {2 pi k / points}^N; for N <= 3 only."""
    n = spec.n_sites
    if n > 3:
        raise ValueError("grid search is limited to N <= 3")
    k = spec.kernel_matrix(include_diagonal)
    axes = np.meshgrid(*[np.arange(points) * TWO_PI / points] * n, indexing="ij")
    u = np.stack([np.exp(1j * a.ravel()) for a in axes], axis=1)
    vals = np.einsum("pi,ij,pj->p", u, k, u)
    vals = vals.imag if part == "imag" else vals.real
    best = int(np.argmax(vals))
    return float(vals[best]), np.array([a.ravel()[best] for a in axes])
