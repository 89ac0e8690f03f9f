"""Monte Carlo realization of the cooperative achievability scheme.

Per channel use the transmitters feed their questions into the shared
cooperation box, send (question, answer) through the channel, and each
receiver decodes against the analytic winning sub-channel.  The module also
verifies the structural claims empirically: with a probability-1 winning box
the channel acts as independent per-receiver sub-channels.

Randomness comes from the counter-based Philox generator so every result is
bit-reproducible for a fixed seed on any platform and schedule.  Stream
labels: (seed, 0) box answers, (seed, 1) channel noise, (seed, 2) messages,
(seed, 3) random codebooks, (seed, 4) question draws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import (
    Channel,
    GameChannelReport,
    MODE_PER_RECEIVER,
    validate_game_channel,
    winning_input_mask,
)
from .correlations import CorrelationTable, random_shared_randomness, table_from_shared_randomness, winning_probability
from .correlations import classical_max_win
from .games import Game

BOX_TRUNCATION = 1e-12
TINY = 1e-300
LN2 = math.log(2.0)

STREAM_BOX = 0
STREAM_CHANNEL = 1
STREAM_MESSAGES = 2
STREAM_CODEBOOK = 3
STREAM_QUESTIONS = 4


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Philox generator on the documented (seed, stream) lane."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((int(seed), int(stream)))))


def _as_rng(rng, stream: int = 0) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return make_rng(int(rng), stream)


@dataclass(frozen=True)
class SimConfig:
    """Experiment knobs: block length, trial count, seed, per-user rates."""

    block_length: int = 1
    samples: int = 1
    rng_seed: int = 0
    rates: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "rates", tuple(float(r) for r in self.rates))
        if self.block_length < 1:
            raise ValueError("block length must be >= 1")
        if self.samples < 1:
            raise ValueError("need at least one sample")

    def to_dict(self) -> dict:
        return {
            "block_length": self.block_length,
            "samples": self.samples,
            "rng_seed": self.rng_seed,
            "rates": list(self.rates),
        }


@dataclass(frozen=True)
class Codebook:
    """Per-transmitter codeword tables: codewords[i] has shape (M_i, n)
    with symbols in the question alphabet."""

    codewords: tuple[np.ndarray, ...]
    question_sizes: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "question_sizes", tuple(self.question_sizes))
        cws = []
        n = None
        for i, c in enumerate(self.codewords):
            c = np.asarray(c, dtype=np.int64)
            if c.ndim != 2 or c.shape[0] < 1:
                raise ValueError(f"codebook {i} must be a (messages, n) table")
            if n is None:
                n = c.shape[1]
            elif c.shape[1] != n:
                raise ValueError("all transmitters must share the block length")
            if c.min() < 0 or c.max() >= self.question_sizes[i]:
                raise ValueError(f"codebook {i} symbols out of range")
            c.setflags(write=False)
            cws.append(c)
        object.__setattr__(self, "codewords", tuple(cws))

    @property
    def num_messages(self) -> tuple[int, ...]:
        return tuple(c.shape[0] for c in self.codewords)

    @property
    def block_length(self) -> int:
        return self.codewords[0].shape[1]

    def to_dict(self) -> dict:
        return {
            "question_sizes": list(self.question_sizes),
            "codewords": [c.tolist() for c in self.codewords],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Codebook":
        return cls(
            tuple(np.asarray(c, dtype=np.int64) for c in doc["codewords"]),
            tuple(int(v) for v in doc["question_sizes"]),
        )


def repetition_codebook(question_sizes, num_messages, block_length: int) -> Codebook:
    """Message m is sent as the constant block (m, m, ..., m)."""
    question_sizes = tuple(int(v) for v in question_sizes)
    if isinstance(num_messages, int):
        num_messages = (num_messages,) * len(question_sizes)
    cws = []
    for i, (qsize, m) in enumerate(zip(question_sizes, num_messages)):
        if not 1 <= m <= qsize:
            raise ValueError(
                f"transmitter {i}: repetition needs messages <= |Q_i| = {qsize}"
            )
        cws.append(np.repeat(np.arange(m)[:, None], block_length, axis=1))
    return Codebook(tuple(cws), question_sizes)


def random_codebook(question_sizes, rates, block_length: int, rng) -> Codebook:
    """I.i.d. uniform codewords with ceil(2^{n R_i}) messages per user."""
    rng = _as_rng(rng, STREAM_CODEBOOK)
    question_sizes = tuple(int(v) for v in question_sizes)
    cws = []
    for qsize, rate in zip(question_sizes, rates):
        m = max(1, math.ceil(2.0 ** (block_length * float(rate))))
        cws.append(rng.integers(0, qsize, size=(m, block_length)))
    return Codebook(tuple(cws), question_sizes)


def _sampling_rows(probs: np.ndarray, lead: int) -> np.ndarray:
    """Row-stochastic matrix with entries below the truncation threshold
    removed, ready for inverse-CDF sampling."""
    flat = probs.reshape(lead, -1).copy()
    flat[flat < BOX_TRUNCATION] = 0.0
    flat /= flat.sum(axis=1, keepdims=True)
    return flat


def _sample_rows(cdf: np.ndarray, row_idx: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    u = rng.random(row_idx.size)
    idx = (u[:, None] >= cdf[row_idx]).sum(axis=1)
    # roundoff can leave the last cumulative bucket a hair under 1
    return np.minimum(idx, cdf.shape[1] - 1)


def truncated_box_table(box: CorrelationTable) -> CorrelationTable:
    """The box actually sampled from: sub-threshold entries dropped."""
    n_q = int(np.prod(box.question_sizes))
    rows = _sampling_rows(box.probs, n_q)
    return CorrelationTable(
        box.num_parties,
        box.question_sizes,
        box.answer_sizes,
        rows.reshape(box.question_sizes + box.answer_sizes),
    )


def cooperative_transmit(q_block: np.ndarray, box: CorrelationTable, rng) -> np.ndarray:
    """Sample one answer tuple per symbol from the box and attach it.

    ``q_block`` has shape (num_symbols, K); the result holds the flattened
    channel symbols x_i = q_i * |A_i| + a_i, same shape.
    """
    rng = _as_rng(rng, STREAM_BOX)
    q_block = np.asarray(q_block, dtype=np.int64)
    K = box.num_parties
    if q_block.ndim != 2 or q_block.shape[1] != K:
        raise ValueError(f"q_block must have shape (num_symbols, {K})")
    for i in range(K):
        col = q_block[:, i]
        if col.size and (col.min() < 0 or col.max() >= box.question_sizes[i]):
            raise ValueError(f"question symbols out of range for party {i}")
    n_q = int(np.prod(box.question_sizes))
    rows = _sampling_rows(box.probs, n_q)
    cdf = np.cumsum(rows, axis=1)
    q_flat = np.ravel_multi_index(q_block.T, box.question_sizes)
    a_flat = _sample_rows(cdf, q_flat, rng)
    answers = np.stack(np.unravel_index(a_flat, box.answer_sizes), axis=1)
    a_sizes = np.asarray(box.answer_sizes, dtype=np.int64)
    return q_block * a_sizes[None, :] + answers


def channel_sample(ch: Channel, x_block: np.ndarray, rng) -> np.ndarray:
    """Memoryless sampling: one output tuple per input symbol, shape
    (num_symbols, num_receivers)."""
    rng = _as_rng(rng, STREAM_CHANNEL)
    x_block = np.asarray(x_block, dtype=np.int64)
    if x_block.ndim != 2 or x_block.shape[1] != ch.num_tx:
        raise ValueError(f"x_block must have shape (num_symbols, {ch.num_tx})")
    for i in range(ch.num_tx):
        col = x_block[:, i]
        if col.size and (col.min() < 0 or col.max() >= ch.input_sizes[i]):
            raise ValueError(f"input symbols out of range for transmitter {i}")
    cdf = np.cumsum(ch.flat_matrix(), axis=1)
    x_flat = np.ravel_multi_index(x_block.T, ch.input_sizes)
    y_flat = _sample_rows(cdf, x_flat, rng)
    return np.stack(np.unravel_index(y_flat, ch.output_sizes), axis=1)


def winning_fraction(game: Game, x_block: np.ndarray) -> float:
    """Fraction of transmitted symbols whose (question, answer) tuple wins."""
    mask = winning_input_mask(game).ravel()
    sizes = tuple(q * a for q, a in zip(game.question_sizes, game.answer_sizes))
    x_flat = np.ravel_multi_index(np.asarray(x_block, dtype=np.int64).T, sizes)
    return float(mask[x_flat].mean())


def _require_winning_box(game: Game, box: CorrelationTable) -> CorrelationTable:
    if not box.matches_game(game):
        raise ValueError("box alphabets do not match the game")
    truncated = truncated_box_table(box)
    w = winning_probability(game, truncated)
    if w < 1.0 - 1e-9:
        raise ValueError(
            f"box wins with probability {w:.6f} < 1; the decomposition claim "
            "requires a probability-1 winning box"
        )
    return truncated


@dataclass(frozen=True)
class DecompositionReport:
    """Empirical check that a winning box turns the channel into parallel
    per-receiver sub-channels."""

    samples: int
    winning_fraction: float
    tv_per_receiver: tuple[float, ...]
    max_conditional_mi_bits: float

    def to_dict(self) -> dict:
        return {
            "samples": self.samples,
            "winning_fraction": self.winning_fraction,
            "tv_per_receiver": list(self.tv_per_receiver),
            "max_conditional_mi_bits": self.max_conditional_mi_bits,
        }


def _receiver_questions(ch: Channel, game: Game, q_block: np.ndarray) -> list[np.ndarray]:
    """Question index driving each receiver: own question per receiver in
    per-receiver mode, the joint tuple for the merged global receiver."""
    if ch.mode == MODE_PER_RECEIVER:
        return [q_block[:, i] for i in range(ch.num_tx)]
    return [np.ravel_multi_index(q_block.T, game.question_sizes)]


def empirical_decomposition_test(
    ch: Channel, game: Game, box: CorrelationTable, samples: int, rng
) -> DecompositionReport:
    """Estimate each receiver's conditional law and compare with the
    analytic winning sub-channel.

    Returns the worst-question total-variation distance per receiver plus
    the largest empirical cross-receiver conditional mutual information
    (given the question tuple), which the parallel decomposition claim says
    should vanish.
    """
    box = _require_winning_box(game, box)
    report: GameChannelReport = validate_game_channel(ch, game)
    if isinstance(rng, np.random.Generator):
        rng_q = rng_box = rng_ch = rng
    else:
        rng_q = make_rng(rng, STREAM_QUESTIONS)
        rng_box = make_rng(rng, STREAM_BOX)
        rng_ch = make_rng(rng, STREAM_CHANNEL)

    K = game.num_parties
    q_block = np.stack(
        [rng_q.integers(0, game.question_sizes[i], size=samples) for i in range(K)],
        axis=1,
    )
    x_block = cooperative_transmit(q_block, box, rng_box)
    y_block = channel_sample(ch, x_block, rng_ch)
    win_frac = winning_fraction(game, x_block)

    recv_q = _receiver_questions(ch, game, q_block)
    tvs = []
    for r in range(len(ch.output_sizes)):
        sub = report.sub_channels[r]
        nq, ny = sub.shape
        counts = np.zeros((nq, ny))
        np.add.at(counts, (recv_q[r], y_block[:, r]), 1.0)
        worst = 0.0
        for qv in range(nq):
            total = counts[qv].sum()
            emp = counts[qv] / total if total > 0 else np.zeros(ny)
            worst = max(worst, 0.5 * float(np.abs(emp - sub[qv]).sum()))
        tvs.append(worst)

    max_mi = 0.0
    R = len(ch.output_sizes)
    if R >= 2:
        q_flat = np.ravel_multi_index(q_block.T, game.question_sizes)
        nq_joint = int(np.prod(game.question_sizes))
        for r in range(R):
            for s in range(r + 1, R):
                max_mi = max(
                    max_mi,
                    _conditional_mi_bits(
                        q_flat, y_block[:, r], y_block[:, s],
                        nq_joint, ch.output_sizes[r], ch.output_sizes[s],
                    ),
                )
    return DecompositionReport(
        samples=int(samples),
        winning_fraction=win_frac,
        tv_per_receiver=tuple(tvs),
        max_conditional_mi_bits=max_mi,
    )


def _conditional_mi_bits(q, ya, yb, nq, na, nb) -> float:
    """Plug-in estimate of I(Y_a; Y_b | Q) from paired samples."""
    counts = np.zeros((nq, na, nb))
    np.add.at(counts, (q, ya, yb), 1.0)
    n = counts.sum()
    mi = 0.0
    for qv in range(nq):
        c = counts[qv]
        tot = c.sum()
        if tot == 0:
            continue
        joint = c / tot
        pa = joint.sum(axis=1, keepdims=True)
        pb = joint.sum(axis=0, keepdims=True)
        mask = joint > 0
        ratio = joint[mask] / (pa @ pb)[mask]
        mi += (tot / n) * float((joint[mask] * np.log(ratio)).sum())
    return mi / LN2


@dataclass(frozen=True)
class EndToEndReport:
    """Coding-experiment outcome under maximum-likelihood sub-channel
    decoding."""

    config: SimConfig
    num_messages: tuple[int, ...]
    per_receiver_error: tuple[float, ...]
    tuple_error: float
    winning_fraction: float

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "num_messages": list(self.num_messages),
            "per_receiver_error": list(self.per_receiver_error),
            "tuple_error": self.tuple_error,
            "winning_fraction": self.winning_fraction,
        }


def end_to_end(
    ch: Channel, game: Game, box: CorrelationTable, codebook: Codebook, cfg: SimConfig
) -> EndToEndReport:
    """Full scheme: uniform messages, codewords as question blocks,
    cooperative transmission, memoryless channel, per-receiver ML decoding
    against the analytic winning sub-channel."""
    if ch.mode != MODE_PER_RECEIVER:
        raise ValueError(
            "end-to-end coding decodes one message per receiver and needs a "
            "per-receiver mode channel"
        )
    if codebook.question_sizes != game.question_sizes:
        raise ValueError("codebook alphabets do not match the game")
    if codebook.block_length != cfg.block_length:
        raise ValueError("codebook block length does not match the config")
    box = _require_winning_box(game, box)
    report = validate_game_channel(ch, game)

    K = game.num_parties
    n = cfg.block_length
    trials = cfg.samples
    rng_msg = make_rng(cfg.rng_seed, STREAM_MESSAGES)
    rng_box = make_rng(cfg.rng_seed, STREAM_BOX)
    rng_ch = make_rng(cfg.rng_seed, STREAM_CHANNEL)

    messages = np.stack(
        [rng_msg.integers(0, m, size=trials) for m in codebook.num_messages], axis=1
    )
    q_blocks = np.stack(
        [codebook.codewords[i][messages[:, i]] for i in range(K)], axis=2
    )  # (trials, n, K)
    q_flat_sym = q_blocks.reshape(trials * n, K)
    x_flat_sym = cooperative_transmit(q_flat_sym, box, rng_box)
    y_flat_sym = channel_sample(ch, x_flat_sym, rng_ch)
    y_blocks = y_flat_sym.reshape(trials, n, K)
    win_frac = winning_fraction(game, x_flat_sym)

    errors = []
    wrong_any = np.zeros(trials, dtype=bool)
    cols = np.arange(n)
    for r in range(K):
        logsub = np.log(np.maximum(report.sub_channels[r], TINY))
        y_r = y_blocks[:, :, r]
        scores = np.empty((trials, codebook.num_messages[r]))
        for m in range(codebook.num_messages[r]):
            rows = logsub[codebook.codewords[r][m]]  # (n, |Y_r|)
            scores[:, m] = rows[cols[None, :], y_r].sum(axis=1)
        decoded = np.argmax(scores, axis=1)  # ties break to the lowest message
        wrong = decoded != messages[:, r]
        wrong_any |= wrong
        errors.append(float(wrong.mean()))
    return EndToEndReport(
        config=cfg,
        num_messages=codebook.num_messages,
        per_receiver_error=tuple(errors),
        tuple_error=float(wrong_any.mean()),
        winning_fraction=win_frac,
    )


def mixture_dominance_test(game: Game, trials: int, rng) -> bool:
    """Check that no sampled shared-randomness box beats the deterministic
    optimum: the winning probability is affine in the box, so the maximum
    sits at an extreme point."""
    rng = _as_rng(rng, STREAM_QUESTIONS)
    best, _ = classical_max_win(game)
    for _ in range(int(trials)):
        table = table_from_shared_randomness(random_shared_randomness(game, rng))
        if winning_probability(game, table) > best + 1e-9:
            return False
    return True
