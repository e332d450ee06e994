import numpy as np
import pytest
import scipy.linalg as la
from conftest import SZ, collective, embed, expect, random_state

from bilinear_squeezing.model import SpinConfig, build_oat, build_tact, build_xyz, dense_hamiltonian, random_complex_spec, random_xyz
from bilinear_squeezing.statevec import (
    StateVector,
    apply_hamiltonian,
    css_state,
    dump_state,
    evolve,
    ground_state,
    load_state,
    product_state,
)


def parity_op(n):
    # (-1)^(number of down spins)
    return la.expm(1j * np.pi * (n / 2 * np.eye(2**n) - collective(n)[2]))


class TestStates:
    def test_css_index(self):
        a = css_state(5).amplitudes
        assert a[31] == 1 and np.count_nonzero(a) == 1

    def test_css_n1(self):
        np.testing.assert_array_equal(css_state(1).amplitudes, [0, 1])

    def test_css_is_all_up(self):
        n = 4
        jz = collective(n)[2]
        assert expect(jz, css_state(n).amplitudes).real == pytest.approx(n / 2)

    def test_product_state_index(self):
        assert np.argmax(np.abs(product_state(SpinConfig((1, -1, 1))).amplitudes)) == 0b101

    def test_site_count_limits(self):
        with pytest.raises(ValueError):
            css_state(0)
        with pytest.raises(ValueError):
            css_state(17)

    def test_wrong_length_rejected(self):
        with pytest.raises(ValueError):
            StateVector(3, np.zeros(7))


class TestApply:
    def test_matches_dense_on_random_specs(self, rng):
        for k in range(20):
            spec = random_complex_spec(rng, 4) if k % 2 else random_xyz(rng, 4)
            psi = random_state(rng, 4)
            got = apply_hamiltonian(spec, StateVector(4, psi)).amplitudes
            np.testing.assert_allclose(got, dense_hamiltonian(spec) @ psi, atol=1e-12)

    def test_u1_spec_keeps_css_eigenstate(self, rng):
        spec = random_xyz(rng, 5, u1=True)
        out = apply_hamiltonian(spec, css_state(5)).amplitudes
        assert np.count_nonzero(np.abs(out) > 1e-14) <= 1

    def test_tact_css_support_on_two_down_states(self):
        out = apply_hamiltonian(build_tact(1.0, 4), css_state(4)).amplitudes
        support = np.flatnonzero(np.abs(out) > 1e-14)
        assert all(bin(15 ^ int(s)).count("1") == 2 for s in support)
        assert support.size == 6

    def test_size_mismatch(self, rng):
        with pytest.raises(ValueError):
            apply_hamiltonian(random_xyz(rng, 3), css_state(4))


class TestEvolve:
    def test_zero_time_identity(self, rng):
        psi = StateVector(4, random_state(rng, 4))
        np.testing.assert_array_equal(evolve(random_xyz(rng, 4), psi, 0.0).amplitudes, psi.amplitudes)

    def test_norm_and_energy_conserved(self, rng):
        spec = random_complex_spec(rng, 8)
        psi = StateVector(8, random_state(rng, 8))
        out = evolve(spec, psi, 1.0)
        assert out.norm == pytest.approx(1.0, abs=1e-10)
        assert out.expectation(spec) == pytest.approx(psi.expectation(spec), abs=1e-8)

    def test_composition(self, rng):
        spec = random_xyz(rng, 6)
        psi = css_state(6)
        a = evolve(spec, evolve(spec, psi, 0.3), 0.4).amplitudes
        b = evolve(spec, psi, 0.7).amplitudes
        assert np.linalg.norm(a - b) < 1e-8

    def test_matches_dense_expm(self, rng):
        spec = random_complex_spec(rng, 5)
        psi = random_state(rng, 5)
        exact = la.expm(-1.3j * dense_hamiltonian(spec)) @ psi
        assert np.linalg.norm(evolve(spec, StateVector(5, psi), 1.3).amplitudes - exact) < 1e-9

    def test_negative_time_inverts(self, rng):
        spec = random_xyz(rng, 5)
        psi = StateVector(5, random_state(rng, 5))
        back = evolve(spec, evolve(spec, psi, 0.5), -0.5)
        assert np.linalg.norm(back.amplitudes - psi.amplitudes) < 1e-8

    def test_parity_and_transverse_mean_stay_zero(self, rng):
        n = 5
        spec = random_complex_spec(rng, n)
        p = parity_op(n)
        jx, jy, _ = collective(n)
        for t in (0.1, 0.5, 1.0):
            psi = evolve(spec, css_state(n), t).amplitudes
            assert expect(p, psi).real == pytest.approx(1.0, abs=1e-10)
            assert abs(expect(jx, psi)) < 1e-10 and abs(expect(jy, psi)) < 1e-10

    def test_nonfinite_time(self, rng):
        with pytest.raises(ValueError):
            evolve(random_xyz(rng, 3), css_state(3), np.inf)


class TestGroundState:
    def test_lambda_zero_is_css(self, rng):
        gs = ground_state(random_xyz(rng, 5), 0.0, 1.3)
        assert abs(gs.state.amplitudes[-1]) == pytest.approx(1.0)
        assert gs.energy == pytest.approx(-5 * 1.3 / 2)
        assert gs.gap == pytest.approx(1.3)

    def test_matches_dense_eigh(self, rng):
        n, lam, h = 5, 0.2, 1.0
        spec = random_complex_spec(rng, n)
        full = lam * dense_hamiltonian(spec) - h * collective(n)[2]
        w, v = np.linalg.eigh(full)
        gs = ground_state(spec, lam, h)
        assert gs.energy == pytest.approx(w[0], abs=1e-10)
        assert abs(np.vdot(v[:, 0], gs.state.amplitudes)) == pytest.approx(1.0, abs=1e-10)
        assert gs.residual < 1e-10

    def test_hellmann_feynman(self, rng):
        spec = random_xyz(rng, 4)
        lam, d = 0.05, 1e-5
        e = [ground_state(spec, lam + s * d, 1.0).energy for s in (-1, 1)]
        psi = ground_state(spec, lam, 1.0).state
        assert (e[1] - e[0]) / (2 * d) == pytest.approx(psi.expectation(spec), abs=1e-7)

    def test_phase_convention(self, rng):
        a = ground_state(random_xyz(rng, 4), 0.1, 1.0).state.amplitudes
        k = np.argmax(np.abs(a))
        assert a[k].imag == 0 and a[k].real > 0

    def test_sparse_path_matches_dense_path(self, rng):
        spec = random_xyz(rng, 11)
        a = ground_state(spec, 0.05, 1.0, dense_cap=8)
        b = ground_state(spec, 0.05, 1.0, dense_cap=11)
        assert a.energy == pytest.approx(b.energy, abs=1e-9)
        assert abs(a.state.overlap(b.state)) == pytest.approx(1.0, abs=1e-9)

    def test_field_signs(self):
        # flipped field on site 0 at lambda = 0 selects the matching product state
        gs = ground_state(build_oat(1.0, 3), 0.0, 1.0, field_signs=[-1, 1, 1])
        assert abs(gs.state.amplitudes[0b110]) == pytest.approx(1.0)

    def test_bad_field(self, rng):
        with pytest.raises(ValueError):
            ground_state(random_xyz(rng, 3), 0.1, 0.0)


class TestDump:
    def test_round_trip(self, rng, tmp_path):
        psi = StateVector(6, random_state(rng, 6))
        dump_state(psi, tmp_path / "s.bin")
        back = load_state(tmp_path / "s.bin")
        assert back.n_sites == 6
        np.testing.assert_array_equal(back.amplitudes, psi.amplitudes)
        assert (tmp_path / "s.bin").stat().st_size == 16 + 16 * 64

    def test_bad_magic(self, tmp_path):
        (tmp_path / "x.bin").write_bytes(b"\0" * 48)
        with pytest.raises(ValueError):
            load_state(tmp_path / "x.bin")

    def test_truncated(self, rng, tmp_path):
        dump_state(css_state(3), tmp_path / "s.bin")
        data = (tmp_path / "s.bin").read_bytes()
        (tmp_path / "s.bin").write_bytes(data[:-16])
        with pytest.raises(ValueError):
            load_state(tmp_path / "s.bin")


def test_embed_consistency():
    # the independent helpers agree with the library's site convention
    n = 3
    for i in range(n):
        np.testing.assert_allclose(np.diag(embed(SZ, i, n)).real, [((x >> i) & 1) - 0.5 for x in range(8)])
