"""Numerical capacity engines.

``ba_point_to_point`` is the classical single-user alternating-maximization
iteration with the capacity-bracket stopping rule.  ``gba_sum_capacity`` is
its multi-transmitter generalization: the input distribution is constrained
to a product over transmitters and each factor is updated cyclically against
the others, which upper-bounds what non-cooperating senders can achieve.
``cooperation_gap`` and ``eta_sweep`` compare that bound with the
cooperative closed form.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._kernels import BACKEND, gba_run
from .channels import (
    Channel,
    ChannelParams,
    GameChannelReport,
    build_game_channel,
    closed_form_sum_capacity,
    single_user_channel,
    validate_game_channel,
)
from .games import Game

LN2 = math.log(2.0)
TINY = 1e-300
GAP_CLAMP_TOL = 1e-6
WORKERS_ENV = "GAMECAP_WORKERS"

INIT_UNIFORM = "uniform"
INIT_DIRICHLET = "random-dirichlet"


@dataclass(frozen=True)
class ProductDistribution:
    """One input distribution per transmitter."""

    factors: tuple[np.ndarray, ...]

    def __post_init__(self):
        fs = []
        for i, f in enumerate(self.factors):
            f = np.asarray(f, dtype=float)
            if f.ndim != 1 or f.min() < 0 or abs(f.sum() - 1.0) > 1e-12:
                raise ValueError(f"factor {i} is not a probability vector")
            f = f.copy()
            f.setflags(write=False)
            fs.append(f)
        object.__setattr__(self, "factors", tuple(fs))

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(f.size for f in self.factors)

    def joint_flat(self) -> np.ndarray:
        px = self.factors[0]
        for f in self.factors[1:]:
            px = np.multiply.outer(px, f)
        return px.ravel()

    @classmethod
    def uniform(cls, sizes) -> "ProductDistribution":
        return cls(tuple(np.full(int(s), 1.0 / int(s)) for s in sizes))

    @classmethod
    def from_concatenated(cls, flat: np.ndarray, sizes) -> "ProductDistribution":
        flat = np.asarray(flat, dtype=float)
        out, pos = [], 0
        for s in sizes:
            seg = flat[pos: pos + int(s)]
            out.append(seg / seg.sum())  # kernel output is normalized to roundoff
            pos += int(s)
        return cls(tuple(out))

    def to_lists(self) -> list[list[float]]:
        return [f.tolist() for f in self.factors]


@dataclass(frozen=True)
class GbaConfig:
    """Controls for the multi-start cyclic ascent."""

    tolerance: float = 1e-9
    max_iterations: int = 20000
    num_starts: int = 50
    rng_seed: int = 0
    init: str = INIT_DIRICHLET

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.num_starts < 1:
            raise ValueError("need at least one start")
        if self.init not in (INIT_UNIFORM, INIT_DIRICHLET):
            raise ValueError(f"init must be '{INIT_UNIFORM}' or '{INIT_DIRICHLET}'")


@dataclass(frozen=True)
class StartTrajectory:
    """Outcome of one start: objective after every full cycle, in bits."""

    start_index: int
    history: np.ndarray = field(repr=False)
    converged: bool

    @property
    def iterations(self) -> int:
        return self.history.size - 1

    @property
    def final_value(self) -> float:
        return float(self.history[-1])


@dataclass(frozen=True)
class CapacityResult:
    value: float
    argmax: ProductDistribution
    starts: tuple[StartTrajectory, ...]
    best_start: int
    backend: str = BACKEND

    @property
    def converged(self) -> bool:
        return self.starts[self.best_start].converged

    @property
    def num_converged(self) -> int:
        return sum(1 for s in self.starts if s.converged)

    def to_dict(self) -> dict:
        return {
            "value_bits": self.value,
            "argmax": self.argmax.to_lists(),
            "best_start": self.best_start,
            "backend": self.backend,
            "starts": [
                {
                    "start": s.start_index,
                    "iterations": s.iterations,
                    "final_value_bits": s.final_value,
                    "converged": s.converged,
                }
                for s in self.starts
            ],
        }


def _joint_flat(ch: Channel, dist) -> np.ndarray:
    """Accept a ProductDistribution, per-transmitter vectors, or a joint
    array (shaped or flat) and return the flat joint over inputs."""
    if isinstance(dist, ProductDistribution):
        if dist.sizes != ch.input_sizes:
            raise ValueError("distribution sizes do not match channel inputs")
        return dist.joint_flat()
    if isinstance(dist, (list, tuple)):
        return _joint_flat(ch, ProductDistribution(tuple(np.asarray(f) for f in dist)))
    arr = np.asarray(dist, dtype=float)
    if arr.shape == ch.input_sizes:
        arr = arr.ravel()
    if arr.shape != (ch.num_inputs,):
        raise ValueError(
            f"joint distribution shape {arr.shape} does not match inputs {ch.input_sizes}"
        )
    if arr.min() < 0 or abs(arr.sum() - 1.0) > 1e-9:
        raise ValueError("joint distribution must be a probability vector")
    return arr


def mutual_information(ch: Channel, dist) -> float:
    """I(X_[K]; Y_[K]) in bits under the given input distribution."""
    px = _joint_flat(ch, dist)
    W = ch.flat_matrix()
    py = px @ W
    lpy = np.log(np.maximum(py, TINY))
    rows = px > 0
    Wp = W[rows]
    wlogw = np.where(Wp > 0, Wp * np.log(np.maximum(Wp, TINY)), 0.0).sum(axis=1)
    score = wlogw - Wp @ lpy
    return float(px[rows] @ score) / LN2


def ba_point_to_point(
    sub: np.ndarray, tol: float = 1e-9, max_iter: int = 20000
) -> CapacityResult:
    """Single-user capacity by alternating maximization.

    Stops when the capacity bracket max_x D(x) - I(Q) falls below ``tol``
    bits, which sandwiches the true capacity within ``tol``.
    """
    W = np.ascontiguousarray(sub, dtype=float)
    if W.ndim != 2:
        raise ValueError("expected a 2-D transition matrix")
    if np.max(np.abs(W.sum(axis=1) - 1.0)) > 1e-10 or W.min() < 0:
        raise ValueError("rows must be probability vectors")
    m = W.shape[0]
    wlogw = np.where(W > 0, W * np.log(np.maximum(W, TINY)), 0.0).sum(axis=1)
    q = np.full(m, 1.0 / m)
    history = []
    converged = False
    for _ in range(max_iter):
        py = q @ W
        score = wlogw - W @ np.log(np.maximum(py, TINY))  # nats
        i_nats = float(q @ score)
        history.append(i_nats / LN2)
        if (float(score.max()) - i_nats) / LN2 < tol:
            converged = True
            break
        new = q * np.exp(score - score.max())
        q = new / new.sum()
    traj = StartTrajectory(0, np.asarray(history), converged)
    dist = ProductDistribution((q,))
    value = mutual_information(single_user_channel(W), dist)
    return CapacityResult(value=value, argmax=dist, starts=(traj,), best_start=0)


def _initial_points(ch: Channel, cfg: GbaConfig) -> list[np.ndarray]:
    """All starting points drawn up front so results do not depend on the
    worker count."""
    sizes = ch.input_sizes
    if cfg.init == INIT_UNIFORM:
        flat = np.concatenate([np.full(s, 1.0 / s) for s in sizes])
        return [flat.copy() for _ in range(cfg.num_starts)]
    rng = np.random.default_rng(cfg.rng_seed)
    starts = []
    for _ in range(cfg.num_starts):
        starts.append(np.concatenate([rng.dirichlet(np.ones(s)) for s in sizes]))
    return starts


def _run_start(payload):
    W, sizes, q_init, tol, max_iter = payload
    return gba_run(W, sizes, q_init, tol, max_iter)


def _worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def gba_sum_capacity(ch: Channel, cfg: GbaConfig | None = None) -> CapacityResult:
    """Best sum rate over product input distributions, maximized over
    ``cfg.num_starts`` starting points.

    Ties between starts break toward the lowest start index.  Set the
    ``GAMECAP_WORKERS`` environment variable to fan starts out over
    processes; results are identical for any worker count.
    """
    cfg = cfg or GbaConfig()
    W = ch.flat_matrix()
    sizes = ch.input_sizes
    inits = _initial_points(ch, cfg)
    payloads = [(W, sizes, q0, cfg.tolerance, cfg.max_iterations) for q0 in inits]
    workers = _worker_count()
    if workers > 1 and len(payloads) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            raw = list(pool.map(_run_start, payloads))
    else:
        raw = [_run_start(p) for p in payloads]
    trajectories = tuple(
        StartTrajectory(i, hist, conv) for i, (_, hist, conv) in enumerate(raw)
    )
    finals = np.array([t.final_value for t in trajectories])
    best = int(np.argmax(finals))
    argmax = ProductDistribution.from_concatenated(raw[best][0], sizes)
    value = mutual_information(ch, argmax)
    return CapacityResult(value=value, argmax=argmax, starts=trajectories, best_start=best)


def cooperation_gap(
    ch: Channel, game: Game, cfg: GbaConfig | None = None
) -> tuple[float, float, float]:
    """(closed_form, gba_value, gap) for a validated game channel.

    The gap is the cooperative sum capacity minus the no-cooperation upper
    bound; a tiny negative value (unconverged ascent overshoot is impossible,
    so this means roundoff) is clamped to zero with a warning.
    """
    report = validate_game_channel(ch, game)
    closed = closed_form_sum_capacity(report)
    result = gba_sum_capacity(ch, cfg)
    gap = closed - result.value
    if gap < 0:
        if gap < -GAP_CLAMP_TOL:
            raise ArithmeticError(
                f"no-cooperation bound {result.value:.9f} exceeds the cooperative "
                f"capacity {closed:.9f} beyond tolerance"
            )
        warnings.warn(
            f"clamping slightly negative gap {gap:.3g} to 0", stacklevel=2
        )
        gap = 0.0
    return closed, result.value, gap


@dataclass(frozen=True)
class SweepRow:
    eta: float
    closed_form_bits: float
    gba_bits: float
    gap_bits: float
    converged_starts: int


def eta_sweep(game: Game, grid, cfg: GbaConfig | None = None) -> list[SweepRow]:
    """Gap as a function of the noise knob eta (eta_w = 1 - eta, eta_l = eta).

    Builds the per-receiver channel at every grid point; grid values must
    lie in [0, 0.5).
    """
    etas = sorted(float(e) for e in grid)
    for e in etas:
        if not 0.0 <= e < 0.5:
            raise ValueError(f"eta={e} outside [0, 0.5)")
    rows = []
    for e in etas:
        try:
            ch = build_game_channel(game, ChannelParams.from_noise(e))
            report = validate_game_channel(ch, game)
            closed = closed_form_sum_capacity(report)
            result = gba_sum_capacity(ch, cfg)
            gap = max(closed - result.value, 0.0)
            rows.append(SweepRow(e, closed, result.value, gap, result.num_converged))
        except Exception as exc:
            raise RuntimeError(f"sweep failed at eta={e}: {exc}") from exc
    return rows


SWEEP_CSV_HEADER = "eta,closed_form_bits,gba_bits,gap_bits,converged_starts"


def write_sweep_csv(rows: list[SweepRow], path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(SWEEP_CSV_HEADER + "\n")
        for r in rows:
            fh.write(
                f"{r.eta:.10g},{r.closed_form_bits:.6f},{r.gba_bits:.6f},"
                f"{r.gap_bits:.6f},{r.converged_starts}\n"
            )


__all__ = [
    "ProductDistribution",
    "GbaConfig",
    "StartTrajectory",
    "CapacityResult",
    "mutual_information",
    "ba_point_to_point",
    "gba_sum_capacity",
    "cooperation_gap",
    "eta_sweep",
    "SweepRow",
    "write_sweep_csv",
    "SWEEP_CSV_HEADER",
    "GameChannelReport",
]
