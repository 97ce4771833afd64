import numpy as np
import pytest

from vnlab.algebra import check_affiliated, trace_of
from vnlab.drift import compactify_spectrum
from vnlab.errors import BadCutoff
from vnlab.koopman import (
    build_torus_model,
    dyadic_filtration,
    filtration_expectation,
    generator,
    koopman_algebra,
    koopman_unitary,
    model_algebra,
)
from vnlab.linalg import expm_skew


class TestModel:
    def test_dimensions(self):
        assert build_torus_model(1, [1.0], 1).ambient_dim == 3
        assert build_torus_model(2, [1.0, 1.0], 2).ambient_dim == 25

    def test_index_roundtrip(self):
        model = build_torus_model(2, [1.0, 2.0], 1)
        for pos, xi in enumerate(model.indices):
            assert model.position_of(xi) == pos

    def test_bad_cutoff(self):
        with pytest.raises(BadCutoff):
            build_torus_model(1, [1.0], 0)

    def test_uniform_trace(self):
        model = build_torus_model(1, [1.0], 2)
        alg = model_algebra(model)
        assert trace_of(np.eye(5, dtype=complex), alg) == pytest.approx(1.0)
        assert all(w == pytest.approx(1 / 5) for w in alg.weights)


class TestGenerator:
    def test_rate_at_mode(self):
        model = build_torus_model(1, [1.0], 3)
        gen = generator(model)
        pos = model.position_of((3,))
        assert gen[pos, pos] == pytest.approx(3j)

    def test_zero_mode(self):
        model = build_torus_model(1, [1.0], 2)
        assert gen_entry(model, (0,)) == pytest.approx(0.0)

    def test_dot_product_rates(self):
        model = build_torus_model(2, [1.0, np.sqrt(2.0)], 3)
        assert gen_entry(model, (3, -2)) == pytest.approx(1j * (3 - 2 * np.sqrt(2.0)))

    def test_affiliated_with_diagonal(self):
        model = build_torus_model(1, [1.0], 3)
        assert check_affiliated(generator(model), model_algebra(model)).verdict


def gen_entry(model, xi):
    g = generator(model)
    pos = model.position_of(xi)
    return g[pos, pos]


class TestUnitary:
    def test_time_zero(self):
        model = build_torus_model(1, [1.0], 2)
        assert np.allclose(koopman_unitary(model, 0.0), np.eye(5))

    def test_phase_value(self):
        model = build_torus_model(1, [1.0], 1)
        u = koopman_unitary(model, np.pi)
        pos = model.position_of((1,))
        assert u[pos, pos] == pytest.approx(-1.0)

    def test_matches_exponential(self):
        model = build_torus_model(2, [1.0, 0.3], 1)
        t = 0.77
        assert np.linalg.norm(koopman_unitary(model, t) - expm_skew(t * generator(model))) <= 1e-10

    def test_group_law(self, rng):
        model = build_torus_model(1, [np.sqrt(3.0)], 2)
        for _ in range(5):
            t, s = rng.uniform(-2, 2, 2)
            lhs = koopman_unitary(model, t + s)
            rhs = koopman_unitary(model, t) @ koopman_unitary(model, s)
            assert np.linalg.norm(lhs - rhs) <= 1e-10

    def test_finite_difference_generator(self):
        model = build_torus_model(1, [1.0], 8)
        h = 1e-4
        fd = (koopman_unitary(model, h) - np.eye(model.ambient_dim)) / h
        gen = generator(model)
        assert np.linalg.norm(fd - gen) <= 1e-3 * np.linalg.norm(gen)


class TestGeneratedAlgebra:
    def test_irrational_rotation_full_diagonal(self):
        model = build_torus_model(1, [1.0], 2)
        alg = koopman_algebra(model, [1.0, np.sqrt(2.0)])
        assert alg.blocks == ((1, 1),) * 5

    def test_trivial_flow(self):
        model = build_torus_model(1, [0.0], 1)
        assert koopman_algebra(model).blocks == ((1, 3),)

    def test_degenerate_level_sets(self):
        model = build_torus_model(2, [1.0, 1.0], 1)
        alg = koopman_algebra(model)
        assert sorted(m for _, m in alg.blocks) == [1, 1, 2, 2, 3]

    def test_sample_set_independence(self):
        model = build_torus_model(2, [1.0, np.sqrt(2.0)], 1)
        a = koopman_algebra(model, [0.11, 0.23])
        b = koopman_algebra(model, [0.05, 0.17])
        assert sorted(a.blocks) == sorted(b.blocks)

    def test_colliding_samples_rescaled(self, caplog):
        # t = 2 pi aliases every integer rate; automatic rescaling recovers
        # the full diagonal algebra and logs a note
        import logging

        model = build_torus_model(1, [1.0], 2)
        with caplog.at_level(logging.INFO, logger="vnlab.koopman"):
            alg = koopman_algebra(model, [2.0 * np.pi])
        assert alg.blocks == ((1, 1),) * 5
        assert any("rescaled" in r.message for r in caplog.records)

    def test_generator_affiliated(self):
        for alpha in ([1.0, np.sqrt(2.0)], [1.0, 1.0]):
            model = build_torus_model(2, alpha, 2)
            alg = koopman_algebra(model)
            assert check_affiliated(generator(model), alg).verdict

    def test_squeezed_generator_affiliated(self):
        model = build_torus_model(1, [1.0], 3)
        alg = koopman_algebra(model)
        q = compactify_spectrum(generator(model), 0.5)
        assert check_affiliated(q, alg).verdict

    def test_abelian(self):
        # the generated algebra commutes with itself: diagonal within diagonal
        model = build_torus_model(1, [1.0], 2)
        alg = koopman_algebra(model)
        gens = alg.algebra_generators()
        for g in gens:
            for h in gens:
                assert np.linalg.norm(g @ h - h @ g) <= 1e-12


class TestFiltration:
    def test_singletons_are_identity(self):
        model = build_torus_model(1, [1.0], 2)
        e = filtration_expectation(model, [[k] for k in range(5)])
        assert e.is_identity

    def test_single_cell_is_trace_projection(self):
        model = build_torus_model(1, [1.0], 2)
        e = filtration_expectation(model, [list(range(5))])
        a = np.diag(np.arange(5.0)).astype(complex)
        alg = model_algebra(model)
        expect = trace_of(a, alg) * np.eye(5)
        assert np.linalg.norm(e.apply(a) - expect) <= 1e-12

    def test_dyadic_chain_structure(self):
        model = build_torus_model(1, [1.0], 3)
        chain = dyadic_filtration(model, 3)
        assert len(chain) == 3
        assert chain[-1].is_identity
        for earlier, later in zip(chain, chain[1:]):
            assert later.refines(earlier)

    def test_chain_trace_preserving(self, rng):
        model = build_torus_model(1, [1.0], 3)
        alg = model_algebra(model)
        chain = dyadic_filtration(model, 3)
        for e in chain:
            a = np.diag(rng.standard_normal(7) + 1j * rng.standard_normal(7))
            assert trace_of(e.apply(a), alg) == pytest.approx(trace_of(a, alg), abs=1e-12)

    def test_sign_purity(self):
        model = build_torus_model(1, [1.0], 4)
        rates = model.rates()
        for e in dyadic_filtration(model, 3)[:-1]:
            for cell in e.cells:
                signs = {np.sign(rates[k]) for k in cell}
                assert len(signs) == 1
