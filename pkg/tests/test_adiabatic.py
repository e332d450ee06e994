import numpy as np
import pytest
from conftest import collective, expect

from bilinear_squeezing.adiabatic import (
    GapCollapseError,
    adiabatic_slope,
    ground_states_along,
    infidelity,
    matrix_element_oracle,
    matrix_element_prediction,
    perturbative_state,
    perturbed_jz_check,
    predicted_t2_slope,
    state_distance,
)
from bilinear_squeezing.generalize import parity_of
from bilinear_squeezing.model import CouplingSpec, build_oat, build_tact, build_xyz, random_complex_spec, random_xyz
from bilinear_squeezing.statevec import ground_state


def two_site(k12, jz=0.0):
    k = np.array([[0, k12], [k12, 0]], dtype=complex)
    zz = np.array([[0, jz], [jz, 0]])
    return CouplingSpec(2, k, np.zeros((2, 2)), zz, np.zeros(2))


class TestPerturbativeState:
    def test_two_site_unnormalized(self):
        psi = perturbative_state(two_site(0.25), 0.1, 1.0, normalize=False).amplitudes
        np.testing.assert_allclose(psi, [-0.1 / 4, 0, 0, 1.0])

    def test_two_site_against_exact_2x2(self):
        # the {|dd>, |uu>} block of lambda H - h Jz is [[h + ..., 2 lambda conj(K)], [2 lambda K, -h + ...]]
        lam, h, k = 1e-3, 1.0, 0.25
        gs = ground_state(two_site(k), lam, h)
        block = np.array([[h, 2 * lam * k], [2 * lam * k, -h]])
        w, v = np.linalg.eigh(block)
        exact = np.zeros(4, complex)
        exact[[0, 3]] = v[:, 0]
        assert abs(np.vdot(exact, gs.state.amplitudes)) == pytest.approx(1.0, abs=1e-12)
        approx = perturbative_state(two_site(k), lam, h)
        assert state_distance(approx, gs.state) < 1e-6

    def test_distance_scales_quadratically(self, rng):
        for _ in range(3):
            spec = random_complex_spec(rng, 5)
            d = []
            for dl in (4e-3, 2e-3, 1e-3):
                d.append(state_distance(perturbative_state(spec, dl, 1.0), ground_state(spec, dl, 1.0).state))
            assert d[0] / d[1] == pytest.approx(4.0, rel=0.05)
            assert d[1] / d[2] == pytest.approx(4.0, rel=0.05)

    def test_infidelity_scales_quartically(self, rng):
        spec = random_xyz(rng, 5)
        f = [infidelity(perturbative_state(spec, dl, 1.0), ground_state(spec, dl, 1.0).state) for dl in (8e-3, 4e-3)]
        assert f[0] / f[1] == pytest.approx(16.0, rel=0.1)

    def test_zero_dlambda_is_css(self):
        psi = perturbative_state(build_oat(1.0, 3), 0.0, 1.0)
        assert psi.amplitudes[-1] == 1.0

    def test_bad_field(self):
        with pytest.raises(ValueError):
            perturbative_state(build_oat(1.0, 3), 0.1, -1.0)


class TestMatrixElements:
    def test_all_pairs_n4(self, rng):
        for _ in range(5):
            th = rng.uniform(0, 2 * np.pi, 4)
            for i in range(4):
                for j in range(4):
                    if i != j:
                        got = matrix_element_oracle(th, i, j, 4)
                        assert abs(got - matrix_element_prediction(th, i, j)) <= 1e-12

    def test_diagonal_rejected(self):
        with pytest.raises(ValueError):
            matrix_element_oracle(np.zeros(3), 1, 1, 3)


class TestGroundStateProperties:
    def test_parity_and_transverse_mean(self, rng):
        n = 5
        spec = random_complex_spec(rng, n)
        jx, jy, _ = collective(n)
        for lam in (1e-3, 1e-2, 0.05):
            a = ground_state(spec, lam, 1.0).state
            assert parity_of(a) == pytest.approx(1.0, abs=1e-10)
            assert abs(expect(jx, a.amplitudes)) < 1e-10 and abs(expect(jy, a.amplitudes)) < 1e-10

    def test_jz_deviation_second_order(self, rng):
        spec = random_xyz(rng, 5)
        d = [perturbed_jz_check(spec, dl, 1.0) for dl in (2e-3, 1e-3)]
        assert d[0] / d[1] == pytest.approx(4.0, rel=0.05)

    def test_gap_collapse(self):
        # antiferromagnetic Ising bond: |ud> crosses |uu> at 8 lambda = h
        j = np.ones((2, 2)) - np.eye(2)
        spec = build_xyz(np.zeros((2, 2)), np.zeros((2, 2)), 8 * j)
        with pytest.raises(GapCollapseError):
            ground_states_along(spec, [0.125], 1.0)


class TestAdiabaticSlope:
    def test_oat_active_prediction(self):
        res = adiabatic_slope(build_oat(1.0, 6), 1.0)
        assert res.predicted_slope == pytest.approx(-5 / 12, abs=1e-12)
        assert res.within(1e-2)

    def test_tact_active_prediction(self):
        res = adiabatic_slope(build_tact(1.0, 6), 1.0)
        assert res.predicted_slope == pytest.approx(-5 / 3, abs=1e-12)
        assert res.within(1e-2)

    def test_random(self, rng):
        for n in (4, 5):
            assert adiabatic_slope(random_xyz(rng, n), 1.0, seed=2).within(1e-2)

    def test_field_doubling_halves_slope(self, rng):
        spec = random_xyz(rng, 5)
        grid = np.geomspace(1e-4, 1e-2, 8)
        a = adiabatic_slope(spec, 1.0, lambda_grid=grid)
        b = adiabatic_slope(spec, 2.0, lambda_grid=grid)
        assert b.predicted_slope == pytest.approx(a.predicted_slope / 2, rel=1e-12)
        assert b.slope_estimate == pytest.approx(a.slope_estimate / 2, rel=1e-2)

    def test_no_k_no_squeezing(self, rng):
        j = np.triu(rng.uniform(-1, 1, (4, 4)), 1)
        j = j + j.T
        res = adiabatic_slope(build_xyz(j, j, j), 1.0)
        assert abs(res.slope_estimate) < 1e-6

    def test_prediction_helper(self):
        s, rmax = predicted_t2_slope(build_oat(1.0, 4), 2.0)
        assert s == pytest.approx(-2 * 0.75 / (2.0 * 4))
        assert rmax.value == pytest.approx(0.75)
