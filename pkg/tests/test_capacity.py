"""Tests for mutual information, the capacity iterations and the gap."""

import itertools
import math

import numpy as np
import pytest

import gamecap.capacity as capacity_mod
from gamecap import (
    CapacityResult,
    Channel,
    ChannelParams,
    GbaConfig,
    ProductDistribution,
    binary_entropy,
    ba_point_to_point,
    build_game_channel,
    closed_form_sum_capacity,
    cooperation_gap,
    eta_sweep,
    gba_sum_capacity,
    make_chsh,
    mutual_information,
    single_user_channel,
    validate_game_channel,
    write_sweep_csv,
)
from gamecap.capacity import SWEEP_CSV_HEADER

H2_01 = 0.4689955935892812
BSC01 = np.array([[0.9, 0.1], [0.1, 0.9]])

FAST = GbaConfig(num_starts=8, rng_seed=0)


def random_two_tx_channel(rng, num_outputs):
    """Two binary transmitters (bare questions, single answers), Dirichlet rows."""
    probs = rng.dirichlet(np.ones(num_outputs), size=(2, 2))
    return Channel(2, (2, 2), (1, 1), (num_outputs,), probs)


class TestProductDistribution:
    def test_joint_flat_is_outer_product(self):
        d = ProductDistribution((np.array([0.25, 0.75]), np.array([0.6, 0.1, 0.3])))
        expected = np.outer([0.25, 0.75], [0.6, 0.1, 0.3]).ravel()
        np.testing.assert_allclose(d.joint_flat(), expected, atol=1e-15)

    def test_uniform(self):
        d = ProductDistribution.uniform((4, 4))
        assert d.sizes == (4, 4)
        np.testing.assert_allclose(d.joint_flat(), 1 / 16)

    def test_from_concatenated(self):
        d = ProductDistribution.from_concatenated(np.array([1.0, 3.0, 1.0, 1.0]), (2, 2))
        np.testing.assert_allclose(d.factors[0], [0.25, 0.75])
        np.testing.assert_allclose(d.factors[1], [0.5, 0.5])

    def test_rejects_bad_factor(self):
        with pytest.raises(ValueError, match="probability vector"):
            ProductDistribution((np.array([0.5, 0.4]),))

    def test_to_lists_round_trip(self):
        d = ProductDistribution((np.array([0.25, 0.75]),))
        assert d.to_lists() == [[0.25, 0.75]]


class TestGbaConfig:
    def test_defaults(self):
        cfg = GbaConfig()
        assert cfg.num_starts == 50
        assert cfg.init == "random-dirichlet"

    def test_validation(self):
        with pytest.raises(ValueError):
            GbaConfig(tolerance=0.0)
        with pytest.raises(ValueError):
            GbaConfig(num_starts=0)
        with pytest.raises(ValueError):
            GbaConfig(init="gaussian")


class TestMutualInformation:
    def test_bsc_uniform(self):
        ch = single_user_channel(BSC01)
        mi = mutual_information(ch, ProductDistribution.uniform((2,)))
        assert mi == pytest.approx(1 - H2_01, abs=1e-12)

    def test_noiseless_uniform(self):
        ch = single_user_channel(np.eye(4))
        assert mutual_information(ch, ProductDistribution.uniform((4,))) == pytest.approx(2.0)

    def test_joint_equals_product(self, chsh_eta02, rng):
        factors = [rng.dirichlet(np.ones(s)) for s in chsh_eta02.input_sizes]
        d = ProductDistribution(tuple(factors))
        assert mutual_information(chsh_eta02, d) == pytest.approx(
            mutual_information(chsh_eta02, d.joint_flat()), abs=1e-12
        )

    def test_accepts_factor_list(self, chsh_eta02):
        mi = mutual_information(chsh_eta02, [np.full(4, 0.25), np.full(4, 0.25)])
        assert mi == pytest.approx(
            mutual_information(chsh_eta02, ProductDistribution.uniform((4, 4))), abs=1e-15
        )

    def test_zero_mass_rows_skipped(self):
        ch = single_user_channel(BSC01)
        assert mutual_information(ch, np.array([1.0, 0.0])) == pytest.approx(0.0, abs=1e-12)

    def test_size_mismatch(self, chsh_eta02):
        with pytest.raises(ValueError):
            mutual_information(chsh_eta02, np.full(7, 1 / 7))


class TestPointToPoint:
    def test_bsc_capacity(self):
        result = ba_point_to_point(BSC01)
        assert result.converged
        assert result.value == pytest.approx(1 - H2_01, abs=1e-9)
        np.testing.assert_allclose(result.argmax.factors[0], 0.5, atol=1e-6)

    def test_erasure_capacity(self):
        e = 0.3
        W = np.array([[1 - e, e, 0.0], [0.0, e, 1 - e]])
        result = ba_point_to_point(W)
        assert result.value == pytest.approx(1 - e, abs=1e-9)

    def test_z_channel_capacity(self):
        # crossover 1/2: capacity log2(5/4) at input P(1) = 2/5
        W = np.array([[1.0, 0.0], [0.5, 0.5]])
        result = ba_point_to_point(W)
        assert result.value == pytest.approx(math.log2(1.25), abs=1e-8)
        np.testing.assert_allclose(result.argmax.factors[0], [0.6, 0.4], atol=1e-4)

    def test_rejects_bad_rows(self):
        with pytest.raises(ValueError):
            ba_point_to_point(np.array([[0.5, 0.4], [0.5, 0.5]]))
        with pytest.raises(ValueError):
            ba_point_to_point(np.ones(3))

    def test_unconverged_flag(self):
        # Z-channel: uniform start is far from the optimum, one step cannot close the bracket
        W = np.array([[1.0, 0.0], [0.5, 0.5]])
        result = ba_point_to_point(W, tol=1e-12, max_iter=1)
        assert not result.converged


class TestGbaSumCapacity:
    def test_single_transmitter_reduces_to_point_to_point(self, rng):
        for _ in range(4):
            W = rng.dirichlet(np.ones(3), size=4)
            ref = ba_point_to_point(W).value
            got = gba_sum_capacity(single_user_channel(W), FAST).value
            assert got == pytest.approx(ref, abs=1e-6)

    def test_all_starts_monotone(self, chsh_noiseless):
        result = gba_sum_capacity(chsh_noiseless, GbaConfig(num_starts=6))
        for t in result.starts:
            assert np.min(np.diff(t.history)) >= -1e-12

    def test_sound_against_closed_form(self, chsh_eta02):
        report = validate_game_channel(chsh_eta02, make_chsh())
        cf = closed_form_sum_capacity(report)
        result = gba_sum_capacity(chsh_eta02, FAST)
        assert result.value <= cf + 1e-6

    def test_matches_grid_search(self, rng):
        # two bare binary inputs: exhaustive product-distribution grid
        grid = np.arange(0.0, 1.0 + 1e-12, 0.02)
        for trial in range(3):
            ch = random_two_tx_channel(rng, num_outputs=3)
            best = 0.0
            for p, r in itertools.product(grid, repeat=2):
                d = (np.array([p, 1 - p]), np.array([r, 1 - r]))
                best = max(best, mutual_information(ch, d))
            got = gba_sum_capacity(ch, GbaConfig(num_starts=12, rng_seed=trial)).value
            assert got >= best - 1e-9
            assert got == pytest.approx(best, abs=5e-3)

    def test_multi_start_deterministic(self, chsh_eta02):
        r1 = gba_sum_capacity(chsh_eta02, FAST)
        r2 = gba_sum_capacity(chsh_eta02, FAST)
        assert r1.value == r2.value
        assert r1.best_start == r2.best_start
        for t1, t2 in zip(r1.starts, r2.starts):
            assert np.array_equal(t1.history, t2.history)

    def test_worker_count_does_not_change_result(self, chsh_eta02, monkeypatch):
        monkeypatch.setenv("GAMECAP_WORKERS", "1")
        r1 = gba_sum_capacity(chsh_eta02, GbaConfig(num_starts=4))
        monkeypatch.setenv("GAMECAP_WORKERS", "2")
        r2 = gba_sum_capacity(chsh_eta02, GbaConfig(num_starts=4))
        assert r1.value == r2.value
        for t1, t2 in zip(r1.starts, r2.starts):
            assert np.array_equal(t1.history, t2.history)

    def test_result_dict(self, chsh_eta02):
        result = gba_sum_capacity(chsh_eta02, GbaConfig(num_starts=2))
        doc = result.to_dict()
        assert set(doc) == {"value_bits", "argmax", "best_start", "backend", "starts"}
        assert len(doc["starts"]) == 2


class TestCooperationGap:
    def test_chsh_eta02(self, chsh_eta02):
        closed, gba, gap = cooperation_gap(chsh_eta02, make_chsh(), FAST)
        assert closed == pytest.approx(2 * (1 - H2_01), abs=1e-12)
        assert gap == pytest.approx(closed - gba, abs=1e-12)
        assert 0.2 < gap < 0.3

    def test_negative_gap_is_error(self, chsh_eta02, monkeypatch):
        def fake(ch, cfg=None):
            return CapacityResult(
                value=10.0, argmax=ProductDistribution.uniform(ch.input_sizes),
                starts=(), best_start=0,
            )

        monkeypatch.setattr(capacity_mod, "gba_sum_capacity", fake)
        with pytest.raises(ArithmeticError):
            capacity_mod.cooperation_gap(chsh_eta02, make_chsh())

    def test_roundoff_gap_clamped(self, chsh_eta02, monkeypatch):
        report = validate_game_channel(chsh_eta02, make_chsh())
        cf = closed_form_sum_capacity(report)

        def fake(ch, cfg=None):
            return CapacityResult(
                value=cf + 1e-8, argmax=ProductDistribution.uniform(ch.input_sizes),
                starts=(), best_start=0,
            )

        monkeypatch.setattr(capacity_mod, "gba_sum_capacity", fake)
        with pytest.warns(UserWarning, match="clamping"):
            _, _, gap = capacity_mod.cooperation_gap(chsh_eta02, make_chsh())
        assert gap == 0.0


class TestEtaSweep:
    def test_rows_sorted_and_match_formula(self):
        rows = eta_sweep(make_chsh(), [0.2, 0.0, 0.1], FAST)
        assert [r.eta for r in rows] == [0.0, 0.1, 0.2]
        for r in rows:
            assert r.closed_form_bits == pytest.approx(2 * (1 - binary_entropy(r.eta / 2)))
            assert r.gap_bits >= 0
            assert r.converged_starts == FAST.num_starts
        gaps = [r.gap_bits for r in rows]
        assert gaps[0] > gaps[1] > gaps[2]

    def test_grid_bounds(self):
        with pytest.raises(ValueError, match="outside"):
            eta_sweep(make_chsh(), [0.5])

    def test_failure_is_wrapped(self, monkeypatch):
        def boom(ch, cfg=None):
            raise ValueError("no")

        monkeypatch.setattr(capacity_mod, "gba_sum_capacity", boom)
        with pytest.raises(RuntimeError, match="sweep failed at eta=0.1"):
            capacity_mod.eta_sweep(make_chsh(), [0.1])

    def test_csv_format(self, tmp_path):
        rows = eta_sweep(make_chsh(), [0.0, 0.2], GbaConfig(num_starts=2))
        path = tmp_path / "sweep.csv"
        write_sweep_csv(rows, path)
        lines = path.read_text().strip().split("\n")
        assert lines[0] == SWEEP_CSV_HEADER
        assert len(lines) == 3
        first = lines[1].split(",")
        assert first[0] == "0"
        assert first[1] == "2.000000"
