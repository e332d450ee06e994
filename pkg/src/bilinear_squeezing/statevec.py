"""Exact 2^N state-vector engine.

Basis index bit i is site i; a set bit is spin up.  The Hamiltonian acts via
bit tests on basis indices, never through a dense 2^N x 2^N matrix (except in
the small-N ground-state path, where dense diagonalization is the point).
"""

from __future__ import annotations

import logging
import struct
import weakref
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .model import CouplingSpec, SpinConfig

log = logging.getLogger(__name__)

N_CAP = 16
DENSE_GROUND_CAP = 10
NORM_TOL = 1e-10


class EvolutionError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class StateVector:
    n_sites: int
    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex)
        if a.shape != (2**self.n_sites,):
            raise ValueError(f"need {2**self.n_sites} amplitudes for {self.n_sites} sites, got {a.shape}")
        object.__setattr__(self, "amplitudes", a)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        nrm = self.norm
        if nrm == 0:
            raise ValueError("cannot normalize the zero vector")
        return StateVector(self.n_sites, self.amplitudes / nrm)

    def overlap(self, other: "StateVector") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def expectation(self, spec: CouplingSpec) -> float:
        return float(np.vdot(self.amplitudes, apply_hamiltonian(spec, self).amplitudes).real)


def _check_n(n):
    if not 1 <= n <= N_CAP:
        raise ValueError(f"number of sites must be in [1, {N_CAP}], got {n}")


def css_state(n: int) -> StateVector:
    """All spins up: amplitude 1 on index 2^n - 1."""
    _check_n(n)
    a = np.zeros(2**n, dtype=complex)
    a[-1] = 1.0
    return StateVector(n, a)


def product_state(config: SpinConfig) -> StateVector:
    n = config.n_sites
    _check_n(n)
    idx = sum(1 << i for i, s in enumerate(config.sigmas) if s > 0)
    a = np.zeros(2**n, dtype=complex)
    a[idx] = 1.0
    return StateVector(n, a)


# ---------------------------------------------------------------------------
# Hamiltonian action


def _bit_arrays(n):
    idx = np.arange(2**n, dtype=np.int64)
    bits = [(idx >> i) & 1 for i in range(n)]
    return idx, bits


def diagonal_energies(spec: CouplingSpec) -> np.ndarray:
    n = spec.n_sites
    _, bits = _bit_arrays(n)
    s = [b - 0.5 for b in bits]  # S^z eigenvalue per site
    e = np.full(2**n, spec.offset, dtype=float)
    for i in range(n):
        e += spec.z_fields[i] * s[i]
        # J_ii S_i^+ S_i^- + h.c. = 2 Re(J_ii) n_i
        e += 2 * spec.j_matrix[i, i].real * bits[i]
        for j in range(n):
            if i != j and spec.zz_matrix[i, j] != 0:
                e += spec.zz_matrix[i, j] * s[i] * s[j]
    return e


def _offdiagonal_triplets(spec: CouplingSpec):
    """(rows, cols, vals) of the flip terms, derived by bit tests on every ordered pair."""
    n = spec.n_sites
    idx, bits = _bit_arrays(n)
    rows, cols, vals = [], [], []

    def add(src_mask, flip, coeff):
        src = idx[src_mask]
        rows.append(src ^ flip)
        cols.append(src)
        vals.append(np.full(src.size, coeff, dtype=complex))

    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            flip = (1 << i) | (1 << j)
            kij, jij = spec.k_matrix[i, j], spec.j_matrix[i, j]
            if kij != 0:
                both_down = (bits[i] == 0) & (bits[j] == 0)
                both_up = (bits[i] == 1) & (bits[j] == 1)
                add(both_down, flip, kij)  # K S_i^+ S_j^+
                add(both_up, flip, np.conj(kij))  # K* S_i^- S_j^-
            if jij != 0:
                add((bits[i] == 0) & (bits[j] == 1), flip, jij)  # J S_i^+ S_j^-
                add((bits[j] == 0) & (bits[i] == 1), flip, np.conj(jij))  # J* S_j^+ S_i^-
    if not rows:
        return np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros(0, complex)
    return np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)


_operator_cache: "weakref.WeakKeyDictionary[CouplingSpec, tuple]" = weakref.WeakKeyDictionary()


def _operator_parts(spec: CouplingSpec):
    parts = _operator_cache.get(spec)
    if parts is None:
        _check_n(spec.n_sites)
        dim = 2**spec.n_sites
        r, c, v = _offdiagonal_triplets(spec)
        off = sp.csr_matrix((v, (r, c)), shape=(dim, dim))
        parts = (diagonal_energies(spec), off)
        _operator_cache[spec] = parts
    return parts


def apply_hamiltonian(spec: CouplingSpec, psi: StateVector) -> StateVector:
    """H|psi>, unnormalized."""
    if psi.n_sites != spec.n_sites:
        raise ValueError(f"state has {psi.n_sites} sites, spec has {spec.n_sites}")
    diag, off = _operator_parts(spec)
    a = psi.amplitudes
    return StateVector(spec.n_sites, diag * a + off @ a)


def hamiltonian_matvec(spec: CouplingSpec, *, scale: float = 1.0, field_h: float = 0.0, field_signs=None):
    """Matvec closure for  scale * H - field_h * sum_i s_i S_i^z."""
    diag, off = _operator_parts(spec)
    d = scale * diag
    if field_h:
        d = d - field_h * _field_diagonal(spec.n_sites, field_signs)
    if scale != 1.0:
        off = scale * off

    def matvec(a):
        return d * a + off @ a

    return matvec, d, off


def _field_diagonal(n, field_signs=None):
    """Diagonal of sum_i s_i S_i^z, s_i = +1 unless ``field_signs`` says otherwise."""
    _, bits = _bit_arrays(n)
    signs = np.ones(n) if field_signs is None else np.asarray(field_signs, dtype=float)
    return sum(signs[i] * (bits[i] - 0.5) for i in range(n))


# ---------------------------------------------------------------------------
# time evolution


def _lanczos(matvec, v0, m_max):
    """Lanczos with full reorthogonalization.  Returns basis V (dim x m), T (m x m), beta_next."""
    dim = v0.size
    m_max = min(m_max, dim)
    V = np.zeros((dim, m_max), dtype=complex)
    alpha = np.zeros(m_max)
    beta = np.zeros(m_max)
    V[:, 0] = v0
    m = m_max
    beta_next = 0.0
    for j in range(m_max):
        w = matvec(V[:, j])
        alpha[j] = np.vdot(V[:, j], w).real
        w = w - V[:, : j + 1] @ (V[:, : j + 1].conj().T @ w)
        w = w - V[:, : j + 1] @ (V[:, : j + 1].conj().T @ w)
        b = np.linalg.norm(w)
        if j + 1 == m_max:
            beta_next = b
            break
        if b < 1e-13:
            m = j + 1
            beta_next = 0.0
            break
        beta[j] = b
        V[:, j + 1] = w / b
    T = np.diag(alpha[:m]) + np.diag(beta[: m - 1], 1) + np.diag(beta[: m - 1], -1)
    return V[:, :m], T, beta_next


def krylov_expm_multiply(matvec, v, t, *, tol=1e-10, m_max=30, min_step=1e-14):
    """exp(-i t A) v for Hermitian A given only through ``matvec``.

    Each outer step builds a Krylov space of dimension <= m_max and picks the
    longest sub-step whose a-posteriori error estimate
    beta_{m+1} |e_m^T exp(-i tau T) e_1| stays below tol * tau / |t|.
    """
    v = np.array(v, dtype=complex)
    if t == 0:
        return v
    nrm = np.linalg.norm(v)
    if nrm == 0:
        return v
    w = v / nrm
    total = abs(t)
    sign = np.sign(t)
    done = 0.0
    n_steps = 0
    while done < total * (1 - 1e-15):
        V, T, beta_next = _lanczos(matvec, w, m_max)
        evals, evecs = la.eigh(T)
        c1 = evecs[0, :].conj()
        remaining = total - done
        tau = remaining
        while True:
            small = evecs @ (np.exp(-1j * sign * tau * evals) * c1)
            err = beta_next * abs(small[-1])
            if err <= tol * tau / total or beta_next == 0.0:
                break
            tau *= 0.5
            if tau < min_step * total:
                raise EvolutionError(
                    f"Krylov step underflow at t={done:.3e} of {total:.3e}: "
                    f"error estimate {err:.2e}, subspace dim {T.shape[0]}"
                )
        w = V @ small
        w /= np.linalg.norm(w)
        done += tau
        n_steps += 1
    log.debug("krylov evolution: %d steps to t=%g", n_steps, t)
    return nrm * w


def evolve(spec: CouplingSpec, psi0: StateVector, t: float, *, tol: float = 1e-10, m_max: int = 30) -> StateVector:
    if not np.isfinite(t):
        raise ValueError("evolution time must be finite")
    if psi0.n_sites != spec.n_sites:
        raise ValueError("state and spec sizes differ")
    matvec, _, _ = hamiltonian_matvec(spec)
    out = krylov_expm_multiply(matvec, psi0.amplitudes, t, tol=tol, m_max=m_max)
    return StateVector(spec.n_sites, out)


# ---------------------------------------------------------------------------
# ground state of  lambda H - h sum_i S_i^z


@dataclass
class GroundStateResult:
    state: StateVector
    energy: float
    gap: float
    lam: float
    field_h: float
    degenerate: bool = False
    residual: float = 0.0


def fix_phase(a: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude amplitude real and positive."""
    k = int(np.argmax(np.abs(a)))
    return a * (abs(a[k]) / a[k])


def ground_state(
    spec: CouplingSpec, lam: float, field_h: float, *, field_signs=None, dense_cap: int = DENSE_GROUND_CAP
) -> GroundStateResult:
    """Lowest eigenvector of lam * H - field_h * sum_i s_i S_i^z (s_i = 1 by default)."""
    if not field_h > 0:
        raise ValueError(f"field_h must be positive, got {field_h}")
    n = spec.n_sites
    matvec, d, off = hamiltonian_matvec(spec, scale=lam, field_h=field_h, field_signs=field_signs)
    if n <= dense_cap:
        h = off.toarray()
        h[np.diag_indices_from(h)] += d
        evals, evecs = la.eigh(h, subset_by_index=[0, min(1, h.shape[0] - 1)])
        e0, vec = evals[0], evecs[:, 0]
        gap = float(evals[1] - evals[0]) if evals.size > 1 else np.inf
    else:
        dim = 2**n
        op = spla.LinearOperator((dim, dim), matvec=matvec, dtype=complex)
        if field_signs is None:
            v0 = css_state(n).amplitudes
        else:
            v0 = product_state(SpinConfig(tuple(int(s) for s in field_signs))).amplitudes
        v0 = v0 + 1e-3 * np.random.default_rng(0).normal(size=dim)
        evals, evecs = spla.eigsh(op, k=2, which="SA", v0=v0, tol=1e-13)
        order = np.argsort(evals)
        evals, evecs = evals[order], evecs[:, order]
        e0, vec = evals[0], evecs[:, 0]
        gap = float(evals[1] - evals[0])
    vec = fix_phase(vec / np.linalg.norm(vec))
    res = float(np.linalg.norm(matvec(vec) - e0 * vec))
    degenerate = gap < 1e-10
    if degenerate:
        log.warning("ground level degenerate at lambda=%g (gap %.2e)", lam, gap)
    return GroundStateResult(StateVector(n, vec), float(e0), gap, float(lam), float(field_h), degenerate, res)


# ---------------------------------------------------------------------------
# state dump (test-only binary format)

_MAGIC = b"SQZV1\0"


def dump_state(psi: StateVector, path) -> None:
    header = _MAGIC + struct.pack("<I", psi.n_sites)
    header += b"\0" * (16 - len(header))
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(psi.amplitudes.astype("<c16").tobytes())


def load_state(path) -> StateVector:
    with open(path, "rb") as fh:
        header = fh.read(16)
        if header[:6] != _MAGIC:
            raise ValueError(f"{path}: not a state dump (bad magic)")
        (n,) = struct.unpack("<I", header[6:10])
        data = np.frombuffer(fh.read(), dtype="<c16")
    if data.size != 2**n:
        raise ValueError(f"{path}: expected {2**n} amplitudes, found {data.size}")
    return StateVector(n, data.astype(complex))
