"""Collective-spin moments and the squeezing parameter.

Two minimizations of the transverse variance are provided:

* ``xi2_uniform``: one transverse direction for the whole collective spin,
  chosen in the plane perpendicular to <J>.
* ``xi2_local``: site-local axes  J_perp(theta) = sum_i (cos theta_i S_i^x +
  sin theta_i S_i^y), minimized over all angle sets.

Both accept per-site weights so the sigma-weighted collective spin of a flipped
product state reuses the same code (see ``generalize``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernel import canonical_angles, multistart_ascent
from .statevec import StateVector

MEAN_TOL = 1e-12


def _site_vectors(psi: StateVector) -> np.ndarray:
    """Columns S_i^a |psi> for a = x, y, z and i = 0..N-1 (shape 2^N x 3N)."""
    n = psi.n_sites
    a = psi.amplitudes
    idx = np.arange(a.size)
    out = np.empty((a.size, 3 * n), dtype=complex)
    for i in range(n):
        flipped = a[idx ^ (1 << i)]
        b = (idx >> i) & 1
        out[:, i] = 0.5 * flipped
        out[:, n + i] = -0.5j * (2 * b - 1) * flipped
        out[:, 2 * n + i] = (b - 0.5) * a
    return out


def site_correlations(psi: StateVector) -> tuple[np.ndarray, np.ndarray]:
    """Single-site means (3N,) and symmetrized pair correlations Re<S_i^a S_j^b> (3N x 3N).

    Ordering of the 3N axis: all x components, then all y, then all z.
    """
    v = _site_vectors(psi)
    a = psi.amplitudes
    means = (a.conj() @ v).real
    corr = (v.conj().T @ v).real
    return means, corr


def _weights(n, weights):
    if weights is None:
        return np.ones((3, n))
    w = np.asarray(weights, dtype=float)
    if w.shape != (3, n):
        raise ValueError(f"weights must have shape (3, {n}), got {w.shape}")
    return w


def collective_moments(psi: StateVector, weights=None) -> tuple[np.ndarray, np.ndarray]:
    """<J^a> and symmetrized <J^a J^b> for J^a = sum_i w_ai S_i^a."""
    n = psi.n_sites
    w = _weights(n, weights).ravel()
    means, corr = site_correlations(psi)
    wm = w * means
    mean = wm.reshape(3, n).sum(axis=1)
    wc = corr * np.outer(w, w)
    second = wc.reshape(3, n, 3, n).sum(axis=(1, 3))
    return mean, second


def _transverse_frame(mean: np.ndarray) -> np.ndarray:
    """Two unit vectors spanning the plane perpendicular to ``mean``."""
    r = np.linalg.norm(mean)
    nx, ny, nz = mean / r
    if abs(nx) < MEAN_TOL and abs(ny) < MEAN_TOL:
        e1, e2 = np.array([1.0, 0, 0]), np.array([0, np.sign(nz) or 1.0, 0])
        return np.stack([e1, e2])
    theta = np.arccos(np.clip(nz, -1, 1))
    phi = np.arctan2(ny, nx)
    e1 = np.array([np.cos(theta) * np.cos(phi), np.cos(theta) * np.sin(phi), -np.sin(theta)])
    e2 = np.array([-np.sin(phi), np.cos(phi), 0.0])
    return np.stack([e1, e2])


def xi2_uniform(psi: StateVector, weights=None) -> tuple[float, float, float]:
    """(xi^2, angle of the squeezed axis in the transverse frame, minimal variance)."""
    mean, second = collective_moments(psi, weights)
    r2 = float(mean @ mean)
    if r2 < MEAN_TOL**2:
        raise ValueError("mean collective spin vanishes; squeezing parameter undefined")
    cov = second - np.outer(mean, mean)
    frame = _transverse_frame(mean)
    c2 = frame @ cov @ frame.T
    evals, evecs = np.linalg.eigh(c2)
    v = evecs[:, 0]
    angle = float(np.mod(np.arctan2(v[1], v[0]), np.pi))
    return psi.n_sites * float(evals[0]) / r2, angle, float(evals[0])


def local_covariance(psi: StateVector, weights=None) -> tuple[np.ndarray, float]:
    """Covariance of the weighted (S_i^x, S_i^y) block (2N x 2N) and the weighted <J^z>."""
    n = psi.n_sites
    w = _weights(n, weights)
    means, corr = site_correlations(psi)
    wf = w.ravel()
    mean_w = wf * means
    cov = corr * np.outer(wf, wf) - np.outer(mean_w, mean_w)
    return cov[: 2 * n, : 2 * n], float(mean_w[2 * n :].sum())


def transverse_variance(cov_xy: np.ndarray, thetas) -> float:
    """Var(J_perp(theta)) from the (S^x, S^y) covariance block: c^T M c with c = (cos, sin)."""
    t = np.asarray(thetas, dtype=float)
    c = np.concatenate([np.cos(t), np.sin(t)])
    return float(c @ cov_xy @ c)


def xi2_local(
    psi: StateVector,
    weights=None,
    *,
    seeds=(),
    n_restarts: int = 16,
    seed: int = 0,
) -> tuple[float, np.ndarray, float]:
    """(xi^2, optimal site angles, minimal variance) with xi^2 = N min Var / <J^z>^2."""
    n = psi.n_sites
    cov, jz = local_covariance(psi, weights)
    if abs(jz) < MEAN_TOL:
        raise ValueError("<J^z> vanishes; local-angle squeezing parameter undefined")
    nn = n

    def fun_grad(t):
        c = np.concatenate([np.cos(t), np.sin(t)])
        mc = cov @ c
        grad = 2 * (-np.sin(t) * mc[:nn] + np.cos(t) * mc[nn:])
        return -float(c @ mc), -grad

    # uniform angles along the principal axes of the summed xy block
    cxx = cov[:n, :n].sum()
    cyy = cov[n:, n:].sum()
    cxy = cov[:n, n:].sum()
    phi = 0.5 * np.arctan2(2 * cxy, cxx - cyy) + np.pi / 2
    all_seeds = [np.full(n, phi)] + [np.asarray(s, dtype=float) for s in seeds]
    best, _ = multistart_ascent(
        fun_grad, n, seeds=all_seeds, n_restarts=n_restarts, rng=np.random.default_rng(seed)
    )
    var = -best.value
    return n * var / jz**2, canonical_angles(best.x), var


@dataclass
class SqueezingReport:
    mean_spin: np.ndarray
    var_min_uniform: float
    xi2_uniform: float
    var_min_local: float
    xi2_local: float
    optimal_local_angles: np.ndarray
    optimal_uniform_angle: float

    @property
    def jz(self) -> float:
        return float(self.mean_spin[2])

    def csv_row(self, t_or_lambda: float) -> list[float]:
        return [t_or_lambda, self.xi2_local, self.xi2_uniform, self.jz, self.var_min_local, self.var_min_uniform]


CSV_COLUMNS = ["t_or_lambda", "xi2_local", "xi2_uniform", "jz", "var_local", "var_uniform"]


def squeezing_report(psi: StateVector, weights=None, *, seeds=(), n_restarts: int = 16, seed: int = 0) -> SqueezingReport:
    mean, _ = collective_moments(psi, weights)
    xu, ang, vu = xi2_uniform(psi, weights)
    xl, angles, vl = xi2_local(psi, weights, seeds=seeds, n_restarts=n_restarts, seed=seed)
    return SqueezingReport(mean, vu, xu, vl, xl, angles, ang)
