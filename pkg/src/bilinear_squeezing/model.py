"""Parity-conserving bilinear spin-1/2 Hamiltonians.

The Hamiltonian is

    H = sum_ij ( K_ij S_i^+ S_j^+ + J_ij S_i^+ S_j^- + h.c. )
        + sum_ij Jz_ij S_i^z S_j^z + sum_i h_i S_i^z + offset

with the sums running over ordered pairs.  Basis convention used throughout the
package: site ``i`` is bit ``i`` of the basis index (little-endian) and a set
bit means spin up along z.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

HERMITIAN_TOL = 1e-12
DENSE_CAP = 12


@dataclass(frozen=True, eq=False)
class CouplingSpec:
    n_sites: int
    k_matrix: np.ndarray
    j_matrix: np.ndarray
    zz_matrix: np.ndarray
    z_fields: np.ndarray
    offset: float = 0.0
    include_diagonal_in_kernel: bool = True
    name: str = field(default="explicit", compare=False)

    def __post_init__(self):
        n = int(self.n_sites)
        if n < 1:
            raise ValueError(f"n_sites must be positive, got {self.n_sites}")
        k = np.array(self.k_matrix, dtype=complex)
        j = np.array(self.j_matrix, dtype=complex)
        zz = np.array(self.zz_matrix, dtype=complex)
        h = np.array(self.z_fields, dtype=complex)
        for label, m in (("k_matrix", k), ("j_matrix", j), ("zz_matrix", zz)):
            if m.shape != (n, n):
                raise ValueError(f"{label} has shape {m.shape}, expected {(n, n)}")
        if h.shape != (n,):
            raise ValueError(f"z_fields has shape {h.shape}, expected {(n,)}")
        for label, m in (("k_matrix", k), ("j_matrix", j), ("zz_matrix", zz), ("z_fields", h)):
            if not np.all(np.isfinite(m)):
                raise ValueError(f"{label} has non-finite entries")
        if np.max(np.abs(zz.imag), initial=0.0) > 0 or np.max(np.abs(h.imag), initial=0.0) > 0:
            raise ValueError("zz_matrix and z_fields must be real")
        zz, h = zz.real, h.real
        if not np.allclose(zz, zz.T, rtol=0, atol=HERMITIAN_TOL):
            raise ValueError("zz_matrix must be symmetric")
        if np.any(np.diag(zz) != 0):
            raise ValueError("zz_matrix must have zero diagonal")
        if not np.allclose(j, j.conj().T, rtol=0, atol=HERMITIAN_TOL):
            raise ValueError("j_matrix must be Hermitian")
        j = 0.5 * (j + j.conj().T)
        if not np.allclose(k, k.T, rtol=0, atol=HERMITIAN_TOL):
            warnings.warn(
                "k_matrix is not symmetric; only its symmetric part couples to S+S+, "
                "storing (K + K^T)/2",
                stacklevel=3,
            )
        k = 0.5 * (k + k.T)
        for m in (k, j, zz, h):
            m.setflags(write=False)
        object.__setattr__(self, "n_sites", n)
        object.__setattr__(self, "k_matrix", k)
        object.__setattr__(self, "j_matrix", j)
        object.__setattr__(self, "zz_matrix", zz)
        object.__setattr__(self, "z_fields", h)
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def active_k(self) -> np.ndarray:
        """K with the diagonal removed; S_i^+ S_i^+ vanishes for spin 1/2."""
        k = self.k_matrix.copy()
        np.fill_diagonal(k, 0.0)
        return k

    def kernel_matrix(self, include_diagonal: bool | None = None) -> np.ndarray:
        if include_diagonal is None:
            include_diagonal = self.include_diagonal_in_kernel
        return self.k_matrix if include_diagonal else self.active_k

    def with_(self, **changes) -> "CouplingSpec":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        def cplx(m):
            m = np.asarray(m)
            return np.stack([m.real, m.imag], axis=-1).tolist()

        return {
            "n_sites": self.n_sites,
            "k_matrix": cplx(self.k_matrix),
            "j_matrix": cplx(self.j_matrix),
            "zz_matrix": self.zz_matrix.tolist(),
            "z_fields": self.z_fields.tolist(),
            "offset": self.offset,
            "include_diagonal_in_kernel": self.include_diagonal_in_kernel,
        }

    def digest(self) -> str:
        """sha256 of the canonical JSON form (values rounded to 12 significant digits)."""

        def canon(x):
            if isinstance(x, float):
                return float(f"{x:.12g}") + 0.0
            if isinstance(x, list):
                return [canon(v) for v in x]
            if isinstance(x, dict):
                return {k: canon(v) for k, v in x.items()}
            return x

        blob = json.dumps(canon(self.to_dict()), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def __repr__(self):
        return f"CouplingSpec(name={self.name!r}, n_sites={self.n_sites})"


@dataclass(frozen=True)
class SpinConfig:
    """Computational-basis product state; +1 is up, -1 is down."""

    sigmas: tuple

    def __post_init__(self):
        s = tuple(int(v) for v in np.asarray(self.sigmas).ravel())
        if any(v not in (1, -1) for v in np.asarray(self.sigmas).ravel()):
            raise ValueError(f"spin configuration entries must be +1 or -1, got {self.sigmas}")
        object.__setattr__(self, "sigmas", s)

    @classmethod
    def from_string(cls, text: str) -> "SpinConfig":
        """Parse strings such as ``"+-+-"`` or ``"1,-1,1"``."""
        text = text.strip()
        if "," in text:
            return cls(tuple(int(v) for v in text.split(",")))
        mapping = {"+": 1, "-": -1, "u": 1, "d": -1}
        try:
            return cls(tuple(mapping[c] for c in text))
        except KeyError as exc:
            raise ValueError(f"bad spin configuration string {text!r}") from exc

    @property
    def n_sites(self) -> int:
        return len(self.sigmas)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.sigmas, dtype=float)

    def __str__(self):
        return "".join("+" if s > 0 else "-" for s in self.sigmas)


# ---------------------------------------------------------------------------
# constructors


def _real_symmetric(m, label, n=None):
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{label} must be a square matrix, got shape {m.shape}")
    if n is not None and m.shape[0] != n:
        raise ValueError(f"{label} has dimension {m.shape[0]}, expected {n}")
    if not np.allclose(m, m.T, rtol=0, atol=HERMITIAN_TOL):
        raise ValueError(f"{label} must be symmetric")
    if np.any(np.diag(m) != 0):
        raise ValueError(f"{label} must have zero diagonal")
    return m


def build_xyz(jx, jy, jz, z_fields=None) -> CouplingSpec:
    """XYZ model sum_ij (Jx S^x S^x + Jy S^y S^y + Jz S^z S^z) over ordered pairs."""
    jx = _real_symmetric(jx, "jx")
    n = jx.shape[0]
    jy = _real_symmetric(jy, "jy", n)
    jz = _real_symmetric(jz, "jz", n)
    h = np.zeros(n) if z_fields is None else np.asarray(z_fields, dtype=float)
    return CouplingSpec(
        n_sites=n,
        k_matrix=(jx - jy) / 4,
        j_matrix=(jx + jy) / 4,
        zz_matrix=jz,
        z_fields=h,
        name="xyz",
    )


def xyz_couplings(spec: CouplingSpec) -> tuple[np.ndarray, np.ndarray]:
    """Invert the XYZ map: (jx, jy) = 2 (J +- K).  Only meaningful for real K, J."""
    return 2 * (spec.j_matrix + spec.k_matrix).real, 2 * (spec.j_matrix - spec.k_matrix).real


def build_oat(chi: float, n: int) -> CouplingSpec:
    """One-axis twisting (chi/N) (J^x)^2.

    Every (i, j) entry of K and the off-diagonal of J equal chi/(4N).  The
    K_ii entries are inert (S^+S^+ = 0 on one site) and only show up in kernel
    sums; the i == j part of the J block is the constant chi/4, kept as offset.
    """
    if n < 2:
        raise ValueError(f"OAT needs n >= 2, got {n}")
    c = chi / (4 * n)
    k = np.full((n, n), c, dtype=complex)
    j = np.full((n, n), c, dtype=complex)
    np.fill_diagonal(j, 0.0)
    return CouplingSpec(
        n_sites=n,
        k_matrix=k,
        j_matrix=j,
        zz_matrix=np.zeros((n, n)),
        z_fields=np.zeros(n),
        offset=chi / 4,
        name="oat",
    )


def build_tact(chi: float, n: int) -> CouplingSpec:
    """Two-axis countertwisting (chi/(iN)) [(J^+)^2 - (J^-)^2]."""
    if n < 2:
        raise ValueError(f"TACT needs n >= 2, got {n}")
    return CouplingSpec(
        n_sites=n,
        k_matrix=np.full((n, n), -1j * chi / n),
        j_matrix=np.zeros((n, n)),
        zz_matrix=np.zeros((n, n)),
        z_fields=np.zeros(n),
        name="tact",
    )


def power_law_matrix(n: int, amplitude: float, exponent: float, geometry: str = "chain") -> np.ndarray:
    """amplitude / r_ij**exponent with r the chain (open) or ring (periodic) distance."""
    idx = np.arange(n)
    r = np.abs(idx[:, None] - idx[None, :]).astype(float)
    if geometry == "ring":
        r = np.minimum(r, n - r)
    elif geometry != "chain":
        raise ValueError(f"unknown geometry {geometry!r} (expected 'chain' or 'ring')")
    out = np.zeros((n, n))
    mask = r > 0
    out[mask] = amplitude / r[mask] ** exponent
    return out


def random_xyz(rng: np.random.Generator, n: int, *, u1: bool = False, cutoff: int | None = None) -> CouplingSpec:
    """Couplings i.i.d. uniform in [-1, 1]; ``u1`` forces jx == jy (K = 0)."""

    def sym():
        a = rng.uniform(-1, 1, size=(n, n))
        a = np.triu(a, 1)
        a = a + a.T
        if cutoff is not None:
            idx = np.arange(n)
            a[np.abs(idx[:, None] - idx[None, :]) > cutoff] = 0.0
        return a

    jx, jy, jz = sym(), sym(), sym()
    if u1:
        jy = jx.copy()
    spec = build_xyz(jx, jy, jz)
    return spec.with_(name="xyz-u1" if u1 else "xyz-random")


def random_complex_spec(rng: np.random.Generator, n: int) -> CouplingSpec:
    """Generic spec with complex symmetric K and Hermitian J, random Jz and fields."""
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    k = (a + a.T) / 4
    np.fill_diagonal(k, 0.0)
    b = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    j = (b + b.conj().T) / 4
    np.fill_diagonal(j, 0.0)
    z = rng.uniform(-1, 1, size=(n, n))
    z = np.triu(z, 1)
    return CouplingSpec(
        n_sites=n,
        k_matrix=k,
        j_matrix=j,
        zz_matrix=z + z.T,
        z_fields=rng.uniform(-1, 1, size=n),
        name="complex-random",
    )


# ---------------------------------------------------------------------------
# dense construction from Kronecker products (independent of the bitwise engine)

_SP = sp.csr_matrix(np.array([[0, 0], [1, 0]], dtype=complex))  # |down>=0 -> |up>=1
_SM = _SP.T.tocsr()
_SZ = sp.csr_matrix(np.diag([-0.5, 0.5]).astype(complex))
_SX = (_SP + _SM) / 2
_SY = (_SP - _SM) / 2j
LOCAL_OPS = {"+": _SP, "-": _SM, "z": _SZ, "x": _SX, "y": _SY}


def site_operator(op, site: int, n: int) -> sp.csr_matrix:
    """Embed a 2x2 operator on ``site``; site i is bit i, so it sits at Kronecker slot n-1-i."""
    local = LOCAL_OPS[op] if isinstance(op, str) else sp.csr_matrix(op)
    out = sp.identity(1, dtype=complex, format="csr")
    for k in range(n - 1, -1, -1):
        out = sp.kron(out, local if k == site else sp.identity(2, dtype=complex), format="csr")
    return out


def dense_hamiltonian(spec: CouplingSpec, n_max: int = DENSE_CAP) -> np.ndarray:
    n = spec.n_sites
    if n > n_max:
        raise ValueError(f"dense construction capped at {n_max} sites, got {n}")
    ops = {c: [site_operator(c, i, n) for i in range(n)] for c in "+-z"}
    dim = 2**n
    h = sp.csr_matrix((dim, dim), dtype=complex)
    k, j = spec.k_matrix, spec.j_matrix
    for a in range(n):
        for b in range(n):
            if k[a, b] != 0:
                term = k[a, b] * (ops["+"][a] @ ops["+"][b])
                h = h + term + term.conj().T
            if j[a, b] != 0:
                term = j[a, b] * (ops["+"][a] @ ops["-"][b])
                h = h + term + term.conj().T
            if spec.zz_matrix[a, b] != 0:
                h = h + spec.zz_matrix[a, b] * (ops["z"][a] @ ops["z"][b])
        if spec.z_fields[a] != 0:
            h = h + spec.z_fields[a] * ops["z"][a]
    out = h.toarray()
    out[np.diag_indices(dim)] += spec.offset
    return out


def parity_diagonal(n: int) -> np.ndarray:
    """Diagonal of prod_i (2 S_i^z): (-1)**(number of down spins)."""
    idx = np.arange(2**n)
    ups = np.array([bin(x).count("1") for x in idx])
    return np.where((n - ups) % 2 == 0, 1.0, -1.0)


def verify_parity(spec: CouplingSpec, n_max: int = 10, extra_term: np.ndarray | None = None) -> float:
    """Max-abs entry of [H, P]; ``extra_term`` is a dense operator added to H (test hook)."""
    h = dense_hamiltonian(spec, n_max=n_max)
    if extra_term is not None:
        h = h + extra_term
    p = parity_diagonal(spec.n_sites)
    comm = h * p[None, :] - p[:, None] * h
    return float(np.max(np.abs(comm)))
