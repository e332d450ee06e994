import numpy as np
import pytest
from conftest import SX, SY, collective, embed, expect, random_state

from bilinear_squeezing.model import build_oat, random_complex_spec
from bilinear_squeezing.squeezing import (
    collective_moments,
    local_covariance,
    squeezing_report,
    transverse_variance,
    xi2_local,
    xi2_uniform,
)
from bilinear_squeezing.statevec import StateVector, css_state, evolve


def dense_transverse(thetas, n):
    return sum(np.cos(t) * embed(SX, i, n) + np.sin(t) * embed(SY, i, n) for i, t in enumerate(thetas))


class TestMoments:
    def test_css(self):
        mean, second = collective_moments(css_state(4))
        np.testing.assert_allclose(mean, [0, 0, 2], atol=1e-15)
        assert second[0, 0] == pytest.approx(1.0)
        assert second[1, 1] == pytest.approx(1.0)
        assert second[2, 2] == pytest.approx(4.0)

    def test_matches_dense(self, rng):
        n = 4
        psi = random_state(rng, n)
        ops = collective(n)
        mean, second = collective_moments(StateVector(n, psi))
        for a in range(3):
            assert mean[a] == pytest.approx(expect(ops[a], psi).real, abs=1e-12)
            for b in range(3):
                sym = 0.5 * (ops[a] @ ops[b] + ops[b] @ ops[a])
                assert second[a, b] == pytest.approx(expect(sym, psi).real, abs=1e-12)

    def test_weighted_matches_dense(self, rng):
        n = 4
        w = np.array([[1, -1, 1, -1], [1, -1, 1, -1], [1, 1, 1, 1]], dtype=float)
        psi = random_state(rng, n)
        ops = collective(n, w)
        mean, second = collective_moments(StateVector(n, psi), w)
        for a in range(3):
            assert mean[a] == pytest.approx(expect(ops[a], psi).real, abs=1e-12)
        assert second[0, 1] == pytest.approx(expect(0.5 * (ops[0] @ ops[1] + ops[1] @ ops[0]), psi).real, abs=1e-12)

    def test_bad_weights_shape(self):
        with pytest.raises(ValueError):
            collective_moments(css_state(3), np.ones((2, 3)))


class TestXi2:
    def test_css_is_one(self):
        for n in (1, 2, 5):
            assert xi2_uniform(css_state(n))[0] == pytest.approx(1.0)
            assert xi2_local(css_state(n))[0] == pytest.approx(1.0)

    def test_local_not_above_uniform(self, rng):
        for _ in range(5):
            spec = random_complex_spec(rng, 5)
            psi = evolve(spec, css_state(5), 0.2)
            rep = squeezing_report(psi)
            assert rep.xi2_local <= rep.xi2_uniform + 1e-10

    def test_uniform_matches_dense_scan(self):
        n = 6
        psi = evolve(build_oat(1.0, n), css_state(n), 0.3)
        ops = collective(n)
        a = psi.amplitudes
        var = []
        for phi in np.linspace(0, np.pi, 2001):
            op = np.cos(phi) * ops[0] + np.sin(phi) * ops[1]
            var.append(expect(op @ op, a).real - expect(op, a).real ** 2)
        jz = expect(ops[2], a).real
        xu, _, vu = xi2_uniform(psi)
        assert vu == pytest.approx(min(var), rel=1e-5)
        assert xu == pytest.approx(n * min(var) / jz**2, rel=1e-5)

    def test_oat_squeezes(self):
        psi = evolve(build_oat(1.0, 8), css_state(8), 0.05)
        assert xi2_local(psi)[0] < 1.0

    def test_zero_mean_raises(self):
        a = np.zeros(4, complex)
        a[1] = a[2] = 1 / np.sqrt(2)
        with pytest.raises(ValueError):
            xi2_local(StateVector(2, a))


class TestTransverseVariance:
    def test_closed_form_matches_direct(self, rng):
        n = 4
        psi = random_state(rng, n)
        cov, _ = local_covariance(StateVector(n, psi))
        for _ in range(10):
            th = rng.uniform(0, 2 * np.pi, n)
            op = dense_transverse(th, n)
            direct = expect(op @ op, psi).real - expect(op, psi).real ** 2
            assert transverse_variance(cov, th) == pytest.approx(direct, abs=1e-12)

    def test_periodic(self, rng):
        n = 3
        cov, _ = local_covariance(StateVector(n, random_state(rng, n)))
        th = rng.uniform(0, 2 * np.pi, n)
        assert transverse_variance(cov, th + 2 * np.pi) == pytest.approx(transverse_variance(cov, th), abs=1e-13)
        assert transverse_variance(cov, th + np.pi) == pytest.approx(transverse_variance(cov, th), abs=1e-13)

    def test_local_minimum_is_global_on_scan(self, rng):
        n = 2
        psi = evolve(random_complex_spec(rng, n), css_state(n), 0.4)
        cov, jz = local_covariance(psi)
        g = np.linspace(0, np.pi, 181)
        scan = min(transverse_variance(cov, [a, b]) for a in g for b in g)
        _, _, var = xi2_local(psi)
        assert var <= scan + 1e-12


def test_report_csv_row():
    rep = squeezing_report(css_state(3))
    row = rep.csv_row(0.5)
    assert row[0] == 0.5 and row[1] == pytest.approx(1.0) and row[3] == pytest.approx(1.5)
