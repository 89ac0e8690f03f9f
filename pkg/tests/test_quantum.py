"""Tests for quantum strategies and the Born-rule table builder."""

import itertools
from math import sqrt

import numpy as np
import pytest

from gamecap import (
    DensityMatrix,
    MeasurementSet,
    QuantumStrategy,
    SharedRandomnessStrategy,
    born_table,
    classical_max_win,
    is_no_signaling,
    make_ghz_parity,
    make_mermin_peres,
    make_parity,
    make_tsirelson_chsh,
    pure_state_density,
    table_from_shared_randomness,
    validate_measurement,
    winning_probability,
)

TSIRELSON = (2 + sqrt(2)) / 4


def computational_measurements(num_questions: int) -> MeasurementSet:
    ops = np.zeros((num_questions, 2, 2, 2), dtype=complex)
    for q in range(num_questions):
        ops[q, 0] = np.diag([1.0, 0.0])
        ops[q, 1] = np.diag([0.0, 1.0])
    return MeasurementSet(ops)


class TestDensityMatrix:
    def test_wrong_shape(self):
        with pytest.raises(ValueError, match="shape"):
            DensityMatrix(np.eye(3) / 3, (2, 2))

    def test_not_hermitian(self):
        m = np.array([[0.5, 0.5], [0.0, 0.5]], dtype=complex)
        with pytest.raises(ValueError, match="Hermitian"):
            DensityMatrix(m, (2,))

    def test_wrong_trace(self):
        with pytest.raises(ValueError, match="trace"):
            DensityMatrix(np.eye(2), (2,))

    def test_not_psd(self):
        m = np.diag([1.5, -0.5]).astype(complex)
        with pytest.raises(ValueError, match="positive"):
            DensityMatrix(m, (2,))

    def test_pure_state_normalizes(self):
        rho = pure_state_density(np.array([2.0, 0.0, 0.0, 2.0]), (2, 2))
        assert np.trace(rho.matrix).real == pytest.approx(1.0)
        assert rho.matrix[0, 3] == pytest.approx(0.5)

    def test_matrix_read_only(self):
        rho = pure_state_density(np.array([1.0, 0.0]), (2,))
        with pytest.raises(ValueError):
            rho.matrix[0, 0] = 0.0


class TestMeasurementValidation:
    def test_bad_rank(self):
        with pytest.raises(ValueError, match="shape"):
            MeasurementSet(np.zeros((2, 2, 2)))

    def test_not_hermitian(self):
        ops = np.zeros((1, 2, 2, 2), dtype=complex)
        ops[0, 0] = [[0.5, 1.0], [0.0, 0.5]]
        ops[0, 1] = np.eye(2) - ops[0, 0]
        with pytest.raises(ValueError, match="Hermitian"):
            validate_measurement(MeasurementSet(ops))

    def test_not_psd(self):
        ops = np.zeros((1, 2, 2, 2), dtype=complex)
        ops[0, 0] = np.diag([2.0, 0.0])
        ops[0, 1] = np.eye(2) - ops[0, 0]
        with pytest.raises(ValueError, match="PSD"):
            validate_measurement(MeasurementSet(ops))

    def test_incomplete(self):
        ops = np.zeros((1, 2, 2, 2), dtype=complex)
        ops[0, 0] = np.diag([0.5, 0.5])
        ops[0, 1] = np.diag([0.4, 0.4])
        with pytest.raises(ValueError, match="identity"):
            validate_measurement(MeasurementSet(ops))

    def test_single_outcome_identity(self):
        ops = np.eye(2, dtype=complex).reshape(1, 1, 2, 2)
        validate_measurement(MeasurementSet(ops))

    @pytest.mark.parametrize(
        "factory", [make_tsirelson_chsh, make_mermin_peres, lambda: make_ghz_parity(4)]
    )
    def test_builtin_strategies_valid(self, factory):
        strategy = factory()
        for ms in strategy.measurements:
            validate_measurement(ms)

    def test_dimension_mismatch(self):
        rho = pure_state_density(np.array([1.0, 0.0]), (2,))
        ops = np.zeros((2, 2, 3, 3), dtype=complex)
        ops[:, 0] = np.eye(3)
        with pytest.raises(ValueError, match="dimension"):
            QuantumStrategy(rho, [MeasurementSet(ops)])


class TestBornTable:
    def test_matches_kron_trace_oracle(self):
        strategy = make_tsirelson_chsh()
        table = born_table(strategy)
        rho = strategy.state.matrix
        m1 = strategy.measurements[0].operators
        m2 = strategy.measurements[1].operators
        for q1, q2, a1, a2 in itertools.product(range(2), repeat=4):
            expected = np.trace(rho @ np.kron(m1[q1, a1], m2[q2, a2])).real
            assert table.probs[q1, q2, a1, a2] == pytest.approx(expected, abs=1e-12)

    def test_three_party_oracle(self):
        strategy = make_ghz_parity(3)
        table = born_table(strategy)
        rho = strategy.state.matrix
        ms = [m.operators for m in strategy.measurements]
        idx = (1, 0, 1, 0, 1, 1)
        q, a = idx[:3], idx[3:]
        op = np.kron(np.kron(ms[0][q[0], a[0]], ms[1][q[1], a[1]]), ms[2][q[2], a[2]])
        assert table.probs[idx] == pytest.approx(np.trace(rho @ op).real, abs=1e-12)

    def test_table_alphabets(self, chsh):
        assert born_table(make_tsirelson_chsh()).matches_game(chsh)

    def test_tables_are_no_signaling(self):
        for strategy in (make_tsirelson_chsh(), make_mermin_peres(), make_ghz_parity(3)):
            report = is_no_signaling(born_table(strategy))
            assert report, report

    def test_product_state_deterministic(self):
        rho = pure_state_density(np.array([0.0, 1.0, 0.0, 0.0]), (2, 2))
        ms = computational_measurements(2)
        table = born_table(QuantumStrategy(rho, [ms, ms]))
        expected = np.zeros((2, 2, 2, 2))
        expected[:, :, 0, 1] = 1.0
        np.testing.assert_allclose(table.probs, expected, atol=1e-12)

    def test_maximally_mixed_uniform(self):
        rho = DensityMatrix(np.eye(4, dtype=complex) / 4, (2, 2))
        ms = computational_measurements(2)
        table = born_table(QuantumStrategy(rho, [ms, ms]))
        np.testing.assert_allclose(table.probs, 0.25, atol=1e-12)

    def test_separable_state_matches_shared_randomness(self):
        # classically correlated state: same table as a shared coin flip
        rho = DensityMatrix(np.diag([0.5, 0.0, 0.0, 0.5]).astype(complex), (2, 2))
        ms = computational_measurements(2)
        quantum = born_table(QuantumStrategy(rho, [ms, ms]))
        copy_latent = np.zeros((2, 2, 2))
        for v in range(2):
            copy_latent[v, :, v] = 1.0
        classical = table_from_shared_randomness(
            SharedRandomnessStrategy(np.array([0.5, 0.5]), [copy_latent, copy_latent])
        )
        np.testing.assert_allclose(quantum.probs, classical.probs, atol=1e-9)


class TestWinningValues:
    def test_tsirelson_value(self, chsh):
        wp = winning_probability(chsh, born_table(make_tsirelson_chsh()))
        assert wp == pytest.approx(TSIRELSON, abs=1e-9)

    def test_tsirelson_beats_classical(self, chsh):
        classical, _ = classical_max_win(chsh)
        wp = winning_probability(chsh, born_table(make_tsirelson_chsh()))
        assert wp > classical + 0.1

    def test_tsirelson_per_question(self, chsh):
        table = born_table(make_tsirelson_chsh())
        per_q = (table.probs * chsh.winning).sum(axis=(2, 3))
        np.testing.assert_allclose(per_q, TSIRELSON, atol=1e-9)

    def test_mermin_peres_row_parity(self):
        table = born_table(make_mermin_peres())
        odd = [a for a in range(8) if bin(a).count("1") % 2 == 1]
        party1_marginal = table.probs.sum(axis=3)
        assert party1_marginal[:, :, odd].max() < 1e-9

    def test_ghz_conditional_parity(self):
        table = born_table(make_ghz_parity(3))
        block = table.probs[0, 0, 0]
        even_mass = sum(
            block[a] for a in itertools.product(range(2), repeat=3) if sum(a) % 2 == 0
        )
        assert even_mass == pytest.approx(1.0, abs=1e-9)

    def test_mermin_peres_perfect(self, magic_square):
        wp = winning_probability(magic_square, born_table(make_mermin_peres()))
        assert wp == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("k", [3, 4, 5])
    def test_ghz_parity_perfect(self, k):
        game = make_parity(k)
        wp = winning_probability(game, born_table(make_ghz_parity(k)))
        assert wp == pytest.approx(1.0, abs=1e-9)

    def test_ghz_party_bounds(self):
        with pytest.raises(ValueError):
            make_ghz_parity(2)
        with pytest.raises(ValueError):
            make_ghz_parity(11)
