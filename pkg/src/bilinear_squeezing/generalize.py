"""Computational-basis product states other than all-up.

U = prod_{sigma_i = -1} exp(i pi S_i^x) maps |sigma> to the all-up state.  On a
flipped site S^+ <-> S^- and S^z -> -S^z, so conjugating H by U keeps it in the
bilinear parity-conserving class:

* bonds with both ends flipped:   K -> conj(K),  J_ij -> J_ji
* bonds with one end flipped:     the K and J roles swap on that bond
  (i flipped: K'_ij = J_ji, J'_ij = conj(K_ij);  j flipped: K'_ij = J_ij, J'_ij = K_ij)
* Jz changes sign on bonds with one flipped end, h_i on flipped sites.

For XYZ couplings this is a sign flip of Jy and Jz on bonds with an odd number
of flipped ends.
"""

from __future__ import annotations

import numpy as np

from .adiabatic import adiabatic_slope
from .dynamics import short_time_slope
from .fitting import SlopeResult
from .model import CouplingSpec, SpinConfig, dense_hamiltonian, parity_diagonal
from .squeezing import collective_moments
from .statevec import StateVector, product_state


def _check(spec, config):
    if config.n_sites != spec.n_sites:
        raise ValueError(f"configuration has {config.n_sites} sites, spec has {spec.n_sites}")


def flip_weights(config: SpinConfig) -> np.ndarray:
    """Per-site weights (x, y, z) of the modified collective spin: (1, sigma, sigma)."""
    s = config.array
    return np.stack([np.ones_like(s), s, s])


def transform_spec(spec: CouplingSpec, config: SpinConfig) -> CouplingSpec:
    _check(spec, config)
    n = spec.n_sites
    f = config.array < 0
    k, j = spec.k_matrix, spec.j_matrix
    k_new = k.copy()
    j_new = j.copy()
    zz_new = spec.zz_matrix.copy()
    h_new = np.where(f, -spec.z_fields, spec.z_fields)
    offset = spec.offset
    for a in range(n):
        for b in range(n):
            if a == b:
                if f[a]:
                    k_new[a, a] = np.conj(k[a, a])
                    # 2 J_aa S^+S^- = 2 J_aa (1/2 + S^z)  ->  2 J_aa (1/2 - S^z)
                    j_new[a, a] = -j[a, a]
                    offset += 2 * j[a, a].real
                continue
            if f[a] and f[b]:
                k_new[a, b] = np.conj(k[a, b])
                j_new[a, b] = j[b, a]
            elif f[a]:
                k_new[a, b] = j[b, a]
                j_new[a, b] = np.conj(k[a, b])
            elif f[b]:
                k_new[a, b] = j[a, b]
                j_new[a, b] = k[a, b]
            if f[a] != f[b]:
                zz_new[a, b] = -zz_new[a, b]
    return CouplingSpec(
        n_sites=n,
        k_matrix=k_new,
        j_matrix=j_new,
        zz_matrix=zz_new,
        z_fields=h_new,
        offset=offset,
        include_diagonal_in_kernel=spec.include_diagonal_in_kernel,
        name=f"{spec.name}|flip:{config}",
    )


def flip_unitary_permutation(config: SpinConfig) -> np.ndarray:
    """U acts as a bit flip on the down sites (times a global phase i^#flips)."""
    mask = sum(1 << i for i, s in enumerate(config.sigmas) if s < 0)
    return np.arange(2**config.n_sites) ^ mask


def conjugated_dense(spec: CouplingSpec, config: SpinConfig) -> np.ndarray:
    """U H U^dagger as a dense matrix, U built as an explicit unitary."""
    _check(spec, config)
    n = spec.n_sites
    dim = 2**n
    u = np.zeros((dim, dim), dtype=complex)
    n_flip = sum(1 for s in config.sigmas if s < 0)
    u[flip_unitary_permutation(config), np.arange(dim)] = 1j**n_flip
    h = dense_hamiltonian(spec)
    return u @ h @ u.conj().T


def extract_spec(h: np.ndarray, n: int) -> CouplingSpec:
    """Read (K, J, Jz, h, offset) off a dense bilinear parity-conserving Hamiltonian.

    J_ii is folded into the fields, so the result has a zero J diagonal.
    """
    dim = 2**n
    if h.shape != (dim, dim):
        raise ValueError("matrix dimension does not match n")
    k = np.zeros((n, n), dtype=complex)
    j = np.zeros((n, n), dtype=complex)
    for a in range(n):
        for b in range(n):
            if a == b:
                continue
            k[a, b] = h[(1 << a) | (1 << b), 0] / 2
            j[a, b] = h[1 << a, 1 << b] / 2
    e = np.real(np.diag(h))

    def energy(*ups):
        return e[sum(1 << u for u in ups)]

    zz = np.zeros((n, n))
    for a in range(n):
        for b in range(a + 1, n):
            coupling = energy(a, b) - energy(a) - energy(b) + energy()
            zz[a, b] = zz[b, a] = coupling / 2
    fields = np.array([energy(a) - energy() + zz[a].sum() for a in range(n)])
    # energy(all down) = offset - sum_a h_a / 2 + sum_{a != b} zz_ab / 4
    offset = energy() + 0.5 * fields.sum() - 0.25 * zz.sum()
    return CouplingSpec(n_sites=n, k_matrix=k, j_matrix=j, zz_matrix=zz, z_fields=fields, offset=offset)


def transform_spec_dense(spec: CouplingSpec, config: SpinConfig, n_max: int = 10) -> CouplingSpec:
    if spec.n_sites > n_max:
        raise ValueError(f"dense conjugation limited to {n_max} sites")
    return extract_spec(conjugated_dense(spec, config), spec.n_sites)


def modified_collective_moments(psi: StateVector, config: SpinConfig):
    """Moments of J' = (sum S^x, sum sigma_i S^y, sum sigma_i S^z)."""
    if config.n_sites != psi.n_sites:
        raise ValueError("configuration and state sizes differ")
    return collective_moments(psi, flip_weights(config))


def verify_generalized_t1(
    spec: CouplingSpec, config: SpinConfig, t_grid=None, *, which_xi="local", seed=0, n_restarts=16
) -> SlopeResult:
    """Evolve |sigma> under H and measure xi^2 of J'; predicted from the flipped couplings."""
    _check(spec, config)
    flipped = transform_spec(spec, config)
    return short_time_slope(
        spec,
        which_xi,
        t_grid,
        seed=seed,
        n_restarts=n_restarts,
        psi0=product_state(config),
        weights=flip_weights(config),
        kernel_spec=flipped,
    )


def verify_generalized_t2(
    spec: CouplingSpec, config: SpinConfig, field_h=1.0, lambda_grid=None, *, which_xi="local", seed=0, n_restarts=16
) -> SlopeResult:
    """Ground state of lambda H - h sum_i sigma_i S_i^z, measured with J'."""
    _check(spec, config)
    flipped = transform_spec(spec, config)
    return adiabatic_slope(
        spec,
        field_h,
        which_xi,
        lambda_grid,
        seed=seed,
        n_restarts=n_restarts,
        field_signs=config.array,
        weights=flip_weights(config),
        kernel_spec=flipped,
    )


def parity_of(psi: StateVector) -> float:
    return float(np.sum(np.abs(psi.amplitudes) ** 2 * parity_diagonal(psi.n_sites)))
