"""First-order spin squeezing from parity-conserving bilinear spin-1/2 Hamiltonians."""

from .model import (
    CouplingSpec,
    SpinConfig,
    build_oat,
    build_tact,
    build_xyz,
    dense_hamiltonian,
    power_law_matrix,
    random_xyz,
    verify_parity,
)
from .kernel import KernelMaxResult, eval_kernel, kernel_gradient, maximize_I, maximize_R
from .statevec import StateVector, apply_hamiltonian, css_state, evolve, ground_state, product_state
from .squeezing import SqueezingReport, collective_moments, squeezing_report, xi2_local, xi2_uniform
from .fitting import SlopeResult
from .dynamics import short_time_slope
from .adiabatic import adiabatic_slope, perturbative_state
from .generalize import transform_spec, verify_generalized_t1, verify_generalized_t2

__version__ = "0.1.0"
