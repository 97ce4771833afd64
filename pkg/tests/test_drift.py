import numpy as np
import pytest

from conftest import rand_skew
from vnlab.algebra import (
    check_affiliated,
    conditional_expectation,
    diagonal_algebra,
    identity_expectation,
)
from vnlab.drift import (
    approximate_drift,
    compactify_spectrum,
    compress,
    convergence_sweep,
    invert_compactification,
    make_params,
    resolvent_probe_distance,
    standard_probes,
)
from vnlab.errors import ClampExceeded
from vnlab.koopman import build_torus_model, dyadic_filtration, generator
from vnlab.linalg import eig_hermitian, resolvent, skew_defect


class TestCompactify:
    def test_zero(self):
        assert np.allclose(compactify_spectrum(np.zeros((3, 3)), 0.5), 0.0)

    def test_scalar_value(self):
        out = compactify_spectrum(np.diag([1j]), 0.5)
        assert abs(out[0, 0] - 0.8j) < 1e-14

    def test_extremal_at_rate_z(self):
        z = 0.7
        out = compactify_spectrum(np.diag([1j * z, -1j * z]), z)
        assert np.allclose(np.diag(out), [1j / (2 * z), -1j / (2 * z)])

    def test_band_and_skewness(self, rng):
        v0 = rand_skew(rng, 9)
        z = 0.3
        q = compactify_spectrum(v0, z)
        assert skew_defect(q) <= 1e-10
        rates = eig_hermitian(q, kind="skew_hermitian").eigenvalues
        assert np.max(np.abs(rates)) <= 1 / (2 * z) + 1e-10
        assert np.linalg.norm(q @ v0 - v0 @ q) <= 1e-9 * np.linalg.norm(v0)

    def test_resolvent_sandwich_identity(self, rng):
        # the squeeze equals R_z^* V0 R_z with R_z the resolvent at real z
        v0 = rand_skew(rng, 7)
        z = 0.8
        rz = resolvent(v0, z)
        sandwich = rz.conj().T @ v0 @ rz
        assert np.linalg.norm(compactify_spectrum(v0, z) - sandwich) <= 1e-8

    def test_antisymmetry(self, rng):
        v0 = rand_skew(rng, 6)
        assert np.allclose(
            compactify_spectrum(-v0, 0.4), -compactify_spectrum(v0, 0.4), atol=1e-12
        )


class TestCompress:
    def test_identity_expectation_unchanged(self, rng):
        alg = diagonal_algebra(5)
        q = compactify_spectrum(np.diag(1j * rng.uniform(-2, 2, 5)), 0.5)
        assert np.allclose(compress(q, identity_expectation(alg)), q)

    def test_scalar_cell_kills_symmetric_spectrum(self):
        # averaging everything sends a trace-zero squeeze to zero
        alg = diagonal_algebra(4)
        exp = conditional_expectation(alg, [[0, 1, 2, 3]])
        q = compactify_spectrum(np.diag([1j, -1j, 2j, -2j]), 0.5)
        assert np.linalg.norm(compress(q, exp)) <= 1e-12

    def test_band_contraction(self, rng):
        alg = diagonal_algebra(6)
        exp = conditional_expectation(alg, [[0, 1, 2], [3, 4], [5]])
        z = 0.3
        q = compactify_spectrum(np.diag(1j * rng.uniform(-4, 4, 6)), z)
        rates = eig_hermitian(compress(q, exp), kind="skew_hermitian").eigenvalues
        assert np.max(np.abs(rates)) <= 1 / (2 * z) + 1e-10


class TestInvert:
    def test_roundtrip_value(self):
        # u = 0.8 at z = 0.5 inverts to rate 1
        c = np.diag([0.8j])
        out = invert_compactification(c, 0.5)
        assert abs(out[0, 0] - 1j) < 1e-12

    def test_zero_maps_to_zero(self):
        assert np.allclose(invert_compactification(np.zeros((2, 2)), 1.0), 0.0)

    def test_reflection_band(self):
        # rate 0.5 inside the band at z = 1: squeeze then invert gives z^2/w = 2
        v0 = np.diag([0.5j])
        out = invert_compactification(compactify_spectrum(v0, 1.0), 1.0)
        assert abs(out[0, 0] - 2j) < 1e-12

    def test_clamp_guard(self):
        with pytest.raises(ClampExceeded):
            invert_compactification(np.diag([1.2j]), 1.0)  # band is 0.5


class TestApproximateDrift:
    def test_identity_expectation_roundtrip(self):
        v0 = np.diag([1j, -1j, 2j, -2j, 3j, -3j])
        alg = diagonal_algebra(6)
        params = make_params(0.5, identity_expectation(alg), standard_probes(6))
        assert np.linalg.norm(approximate_drift(v0, params) - v0) <= 1e-8

    def test_zero_drift(self):
        alg = diagonal_algebra(3)
        params = make_params(0.25, identity_expectation(alg), standard_probes(3))
        assert np.allclose(approximate_drift(np.zeros((3, 3)), params), 0.0)

    def test_composed_averaging(self):
        # diagonal rates 1..4, z=0.5, pairwise cells: compose the closed forms
        alg = diagonal_algebra(4)
        exp = conditional_expectation(alg, [[0, 1], [2, 3]])
        v0 = np.diag([1j, 2j, 3j, 4j])
        params = make_params(0.5, exp, standard_probes(4))
        out = approximate_drift(v0, params)
        z = 0.5
        q = lambda w: w / (z * z + w * w)  # noqa: E731
        qi = lambda u: (1 + np.sqrt(1 - 4 * z * z * u * u)) / (2 * u)  # noqa: E731
        u12, u34 = (q(1) + q(2)) / 2, (q(3) + q(4)) / 2
        expect = np.diag([1j * qi(u12), 1j * qi(u12), 1j * qi(u34), 1j * qi(u34)])
        assert np.linalg.norm(out - expect) <= 1e-10

    def test_output_skew_and_affiliated(self, rng):
        rates = rng.uniform(-3, 3, size=8)
        v0 = np.diag(1j * rates)
        alg = diagonal_algebra(8)
        exp = conditional_expectation(alg, [[0, 1, 2, 3], [4, 5], [6], [7]])
        out = approximate_drift(v0, make_params(0.4, exp, standard_probes(8)))
        assert skew_defect(out) <= 1e-9
        assert check_affiliated(out, alg).verdict

    def test_exact_roundtrip_per_eigenvalue(self, rng):
        # every rate with |w| >= z survives exactly under the identity expectation
        rates = np.array([-2.5, -1.1, 0.9, 3.0])
        z = 0.6
        v0 = np.diag(1j * rates)
        alg = diagonal_algebra(4)
        out = approximate_drift(v0, make_params(z, identity_expectation(alg), standard_probes(4)))
        assert np.allclose(np.diag(out).imag, rates, atol=1e-9)

    def test_reflection_law_random_rates(self, rng):
        # rates strictly inside the band come back as z^2/w
        z = 1.3
        rates = rng.uniform(0.05, z * 0.95, size=6) * rng.choice([-1.0, 1.0], size=6)
        v0 = np.diag(1j * rates)
        alg = diagonal_algebra(6)
        out = approximate_drift(v0, make_params(z, identity_expectation(alg), standard_probes(6)))
        assert np.allclose(np.diag(out).imag, z * z / rates, atol=1e-9)


class TestProbeDistance:
    def test_zero_for_equal(self, rng):
        a = rand_skew(rng, 5)
        assert resolvent_probe_distance(a, a, standard_probes(5)) == 0.0

    def test_scalar_example(self):
        d = resolvent_probe_distance(np.zeros((1, 1)), np.diag([1j]), standard_probes(1))
        assert d == pytest.approx(np.sqrt(2) / 2)

    def test_symmetry(self, rng):
        a, b = rand_skew(rng, 4), rand_skew(rng, 4)
        probes = standard_probes(4)
        assert resolvent_probe_distance(a, b, probes) == pytest.approx(
            resolvent_probe_distance(b, a, probes)
        )


class TestSweep:
    def test_requires_identity_tail(self):
        alg = diagonal_algebra(4)
        coarse = conditional_expectation(alg, [[0, 1], [2, 3]])
        with pytest.raises(ValueError):
            convergence_sweep(np.diag([1j, 2j, -1j, -2j]), [0.5], [coarse])

    def test_requires_refinement(self):
        alg = diagonal_algebra(4)
        a = conditional_expectation(alg, [[0, 1], [2, 3]])
        b = conditional_expectation(alg, [[0, 2], [1], [3]])
        ident = identity_expectation(alg)
        with pytest.raises(ValueError):
            convergence_sweep(np.diag([1j, 2j, -1j, -2j]), [0.5], [a, b, ident])

    def test_zero_drift_all_zero(self):
        alg = diagonal_algebra(4)
        chain = [conditional_expectation(alg, [[0, 1], [2, 3]]), identity_expectation(alg)]
        sweep = convergence_sweep(np.zeros((4, 4)), [1.0, 0.5], chain)
        assert np.allclose(sweep.distances, 0.0)

    def test_small_spectrum_example(self):
        # rates {1, 2} mirrored; identity tail exact once z <= 1
        model = build_torus_model(1, [1.0], 2)
        chain = dyadic_filtration(model, 3)
        sweep = convergence_sweep(generator(model), [1.0, 0.5, 0.1], chain)
        assert sweep.distances.shape == (3, 3)
        assert sweep.distances[-1, -1] <= 1e-6
        csv = sweep.to_csv_text()
        assert csv.splitlines()[0] == "z,refinement_index,srt_distance"
        assert len(csv.splitlines()) == 10

    def test_fixed_z_non_increasing(self):
        model = build_torus_model(1, [1.0], 8)
        chain = dyadic_filtration(model, 4)
        sweep = convergence_sweep(generator(model), [1.0, 0.5, 0.25, 0.1], chain)
        diffs = np.diff(sweep.distances, axis=1)
        assert np.all(diffs <= 1e-15)

    def test_parallel_matches_serial(self):
        model = build_torus_model(1, [1.0], 4)
        chain = dyadic_filtration(model, 3)
        v0 = generator(model)
        serial = convergence_sweep(v0, [0.5, 0.25], chain)
        parallel = convergence_sweep(v0, [0.5, 0.25], chain, max_workers=4)
        assert np.array_equal(serial.distances, parallel.distances)
