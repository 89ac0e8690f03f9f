"""Game channels: interference channels whose inputs carry (question, answer).

Transmitter i feeds the symbol x_i = (q_i, a_i), flattened as
``x_i = q_i * |A_i| + a_i``.  On winning input tuples the channel splits into
per-receiver weakly symmetric sub-channels P(y_i | q_i); losing tuples see a
strictly noisier law.  That structural gap is what cooperation exploits, and
``validate_game_channel`` certifies it.

Two built-in families share the machinery: "per-receiver" noise mixes each
receiver's output toward uniform separately, "global" mixes the joint output
tuple toward uniform in one shot and is stored as a single product-output
receiver so the same validation and capacity code applies.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from ._info import entropy_bits
from .games import Game

ROW_NORMALIZATION_TOL = 1e-10
ENTROPY_STRICTNESS_MARGIN = 1e-9
DEFAULT_VALIDATION_TOL = 1e-9

MODE_PER_RECEIVER = "per-receiver"
MODE_GLOBAL = "global"
MODES = (MODE_PER_RECEIVER, MODE_GLOBAL)


@dataclass(frozen=True)
class ChannelParams:
    """Noise weights for the built-in channel families.

    ``eta_w`` is the weight of the faithful relay on winning inputs,
    ``eta_l`` on losing inputs; the gap eta_l < eta_w makes winning rows
    strictly less noisy.
    """

    eta_w: float
    eta_l: float
    mode: str = MODE_PER_RECEIVER

    def __post_init__(self):
        if not (0.0 <= self.eta_l < self.eta_w <= 1.0):
            raise ValueError(
                f"need 0 <= eta_l < eta_w <= 1, got eta_l={self.eta_l}, eta_w={self.eta_w}"
            )
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")

    @classmethod
    def from_noise(cls, eta: float, mode: str = MODE_PER_RECEIVER) -> "ChannelParams":
        """Single-knob family eta_w = 1 - eta, eta_l = eta for eta in [0, 1/2)."""
        return cls(eta_w=1.0 - eta, eta_l=eta, mode=mode)


@dataclass(frozen=True)
class Channel:
    """Dense memoryless channel P(y_[R] | x_[K]) with factored inputs.

    ``probs`` has shape (*x_sizes, *output_sizes) where
    x_sizes[i] = question_sizes[i] * answer_sizes[i].
    """

    num_tx: int
    question_sizes: tuple[int, ...]
    answer_sizes: tuple[int, ...]
    output_sizes: tuple[int, ...]
    probs: np.ndarray = field(repr=False)
    mode: str = MODE_PER_RECEIVER
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "question_sizes", tuple(self.question_sizes))
        object.__setattr__(self, "answer_sizes", tuple(self.answer_sizes))
        object.__setattr__(self, "output_sizes", tuple(self.output_sizes))
        if self.num_tx < 1:
            raise ValueError("need at least one transmitter")
        if len(self.question_sizes) != self.num_tx or len(self.answer_sizes) != self.num_tx:
            raise ValueError("need one (question, answer) alphabet pair per transmitter")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        expected = self.input_sizes + self.output_sizes
        p = np.ascontiguousarray(self.probs, dtype=float)
        if p.shape != expected:
            raise ValueError(f"probs shape {p.shape} != {expected}")
        if p.min() < -1e-12:
            raise ValueError("probabilities must be nonnegative")
        p = np.clip(p, 0.0, None)
        out_axes = tuple(range(self.num_tx, p.ndim))
        sums = p.sum(axis=out_axes)
        if np.max(np.abs(sums - 1.0)) > ROW_NORMALIZATION_TOL:
            raise ValueError("each input row must sum to 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def input_sizes(self) -> tuple[int, ...]:
        return tuple(q * a for q, a in zip(self.question_sizes, self.answer_sizes))

    @property
    def num_inputs(self) -> int:
        return int(np.prod(self.input_sizes))

    @property
    def num_outputs(self) -> int:
        return int(np.prod(self.output_sizes))

    def flat_matrix(self) -> np.ndarray:
        """(num_inputs, num_outputs) row-stochastic view, C-order flattening."""
        return self.probs.reshape(self.num_inputs, self.num_outputs)

    def encode_input(self, questions, answers) -> tuple[int, ...]:
        """Flatten per-transmitter (q_i, a_i) pairs into channel symbols."""
        x = []
        for i in range(self.num_tx):
            q, a = int(questions[i]), int(answers[i])
            if not (0 <= q < self.question_sizes[i] and 0 <= a < self.answer_sizes[i]):
                raise IndexError(f"(q, a) out of range for transmitter {i}")
            x.append(q * self.answer_sizes[i] + a)
        return tuple(x)

    def decode_input(self, x) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """Inverse of encode_input."""
        qs, ans = [], []
        for i in range(self.num_tx):
            xi = int(x[i])
            if not 0 <= xi < self.input_sizes[i]:
                raise IndexError(f"x_{i} = {xi} out of range")
            q, a = divmod(xi, self.answer_sizes[i])
            qs.append(q)
            ans.append(a)
        return tuple(qs), tuple(ans)

    def to_dict(self) -> dict:
        return {
            "num_tx": self.num_tx,
            "question_sizes": list(self.question_sizes),
            "answer_sizes": list(self.answer_sizes),
            "output_sizes": list(self.output_sizes),
            "mode": self.mode,
            "name": self.name,
            "probs": self.probs.ravel().tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Channel":
        qs = tuple(int(v) for v in doc["question_sizes"])
        asz = tuple(int(v) for v in doc["answer_sizes"])
        out = tuple(int(v) for v in doc["output_sizes"])
        shape = tuple(q * a for q, a in zip(qs, asz)) + out
        probs = np.asarray(doc["probs"], dtype=float).reshape(shape)
        return cls(
            num_tx=int(doc["num_tx"]),
            question_sizes=qs,
            answer_sizes=asz,
            output_sizes=out,
            probs=probs,
            mode=doc.get("mode", MODE_PER_RECEIVER),
            name=doc.get("name", ""),
        )


def single_user_channel(matrix: np.ndarray, name: str = "") -> Channel:
    """Wrap a plain row-stochastic matrix as a one-transmitter channel."""
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2:
        raise ValueError("expected a 2-D transition matrix")
    return Channel(
        num_tx=1,
        question_sizes=(m.shape[0],),
        answer_sizes=(1,),
        output_sizes=(m.shape[1],),
        probs=m,
        name=name,
    )


def _interleave_to_inputs(arr: np.ndarray, game: Game, trailing: int) -> np.ndarray:
    """Reorder (*Q, *A, *rest) axes to (q_1, a_1, ..., q_K, a_K, *rest) and
    merge each pair into the flattened input axis."""
    K = game.num_parties
    order = []
    for i in range(K):
        order.extend([i, K + i])
    order.extend(range(2 * K, 2 * K + trailing))
    arr = arr.transpose(order)
    x_sizes = tuple(q * a for q, a in zip(game.question_sizes, game.answer_sizes))
    return arr.reshape(x_sizes + arr.shape[2 * K:])


def winning_input_mask(game: Game) -> np.ndarray:
    """Boolean mask over flattened channel inputs (*x_sizes,), true on
    winning (question, answer) tuples."""
    return _interleave_to_inputs(game.winning.astype(bool), game, trailing=0)


def _relay_mixture(size: int, eta: float) -> np.ndarray:
    """size x size row-stochastic mixture of the identity relay and uniform noise."""
    return eta * np.eye(size) + (1.0 - eta) / size


def build_game_channel(
    game: Game, params: ChannelParams, output_sizes: tuple[int, ...] | None = None
) -> Channel:
    """Construct the built-in game channel for ``game``.

    Per-receiver mode: on winning inputs each receiver sees its sender's
    question through an independent relay/uniform mixture with weight eta_w
    (eta_l on losing inputs), so |Y_i| must equal |Q_i|.  Global mode: one
    mixture of the perfect joint relay and the uniform joint output, stored
    as a single receiver with |Y| = prod |Q_i|.
    """
    K = game.num_parties
    qs = game.question_sizes
    if params.mode == MODE_PER_RECEIVER:
        expected_out = qs
    else:
        expected_out = (int(np.prod(qs)),)
    if output_sizes is None:
        output_sizes = expected_out
    output_sizes = tuple(int(v) for v in output_sizes)
    if output_sizes != expected_out:
        raise ValueError(
            f"{params.mode} mode requires output sizes {expected_out}, got {output_sizes}"
        )

    if params.mode == MODE_PER_RECEIVER:
        rows_w = [_relay_mixture(qs[i], params.eta_w) for i in range(K)]
        rows_l = [_relay_mixture(qs[i], params.eta_l) for i in range(K)]
        t_w = rows_w[0]
        t_l = rows_l[0]
        for i in range(1, K):
            t_w = np.tensordot(t_w, rows_w[i], axes=0)
            t_l = np.tensordot(t_l, rows_l[i], axes=0)
        # tensordot leaves axes as (q_1, y_1, q_2, y_2, ...): split blocks
        perm = list(range(0, 2 * K, 2)) + list(range(1, 2 * K, 2))
        t_w = t_w.transpose(perm)  # (*Q, *Y)
        t_l = t_l.transpose(perm)
    else:
        n = int(np.prod(qs))
        t_w = _relay_mixture(n, params.eta_w).reshape(qs + (n,))
        t_l = _relay_mixture(n, params.eta_l).reshape(qs + (n,))

    n_out = len(output_sizes)
    mask = game.winning.reshape(game.winning.shape + (1,) * n_out)
    t_w = t_w.reshape(qs + (1,) * K + output_sizes)
    t_l = t_l.reshape(qs + (1,) * K + output_sizes)
    full = np.where(mask, t_w, t_l)  # (*Q, *A, *output_sizes)
    probs = _interleave_to_inputs(full, game, trailing=n_out)
    return Channel(
        num_tx=K,
        question_sizes=qs,
        answer_sizes=game.answer_sizes,
        output_sizes=output_sizes,
        probs=probs,
        mode=params.mode,
        name=game.name,
    )


def is_weakly_symmetric(sub: np.ndarray, tol: float = 1e-9) -> bool:
    """True iff all rows are permutations of one another (sorted-row
    comparison) and all column sums are equal, both within ``tol``."""
    m = np.asarray(sub, dtype=float)
    if m.ndim != 2:
        raise ValueError("expected a 2-D transition matrix")
    srt = np.sort(m, axis=1)
    if np.max(np.abs(srt - srt[0])) > tol:
        return False
    col = m.sum(axis=0)
    return float(np.max(np.abs(col - col[0]))) <= tol


def conditional_output_entropy(ch: Channel, x) -> float:
    """H(Y | X = x) in bits for a flattened input tuple."""
    x = tuple(int(v) for v in x)
    if len(x) != ch.num_tx:
        raise IndexError(f"expected {ch.num_tx} input symbols, got {len(x)}")
    for i, xi in enumerate(x):
        if not 0 <= xi < ch.input_sizes[i]:
            raise IndexError(f"x_{i} = {xi} out of range")
    return entropy_bits(ch.probs[x].ravel())


def weakly_symmetric_capacity(sub: np.ndarray, tol: float = 1e-9) -> float:
    """log2 |Y| - H(row), valid for weakly symmetric channels only."""
    m = np.asarray(sub, dtype=float)
    if not is_weakly_symmetric(m, tol):
        raise ValueError("channel is not weakly symmetric")
    return math.log2(m.shape[1]) - entropy_bits(m[0])


class GameChannelValidationError(ValueError):
    """Structural validation failure; ``clause`` names the failed condition."""

    def __init__(self, clause: str, message: str):
        super().__init__(f"[{clause}] {message}")
        self.clause = clause


@dataclass(frozen=True)
class GameChannelReport:
    """Certificate that a channel is a game channel for some game.

    ``sub_channels[i]`` is receiver i's winning sub-channel P(y_i | q_i);
    for global-mode channels there is a single merged receiver conditioned
    on the joint question tuple.
    """

    mode: str
    receiver_question_sizes: tuple[int, ...]
    output_sizes: tuple[int, ...]
    sub_channels: tuple[np.ndarray, ...] = field(repr=False)
    h_w: tuple[float, ...]
    weakly_symmetric: tuple[bool, ...]
    max_factorization_residual: float
    max_winning_entropy: float
    min_losing_entropy: float
    entropy_margin: float

    @property
    def num_receivers(self) -> int:
        return len(self.output_sizes)

    def to_csv(self, path) -> None:
        """One row per receiver: |Q_i|, |Y_i|, h_i_w, weakly_symmetric."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["receiver", "num_questions", "num_outputs", "h_w_bits", "weakly_symmetric"])
            for i in range(self.num_receivers):
                w.writerow(
                    [
                        i + 1,
                        self.receiver_question_sizes[i],
                        self.output_sizes[i],
                        f"{self.h_w[i]:.12g}",
                        int(self.weakly_symmetric[i]),
                    ]
                )


def validate_game_channel(
    ch: Channel, game: Game, tol: float = DEFAULT_VALIDATION_TOL
) -> GameChannelReport:
    """Check the three game-channel conditions and return the certificate.

    (1) On every winning input the law factors across receivers with each
    factor depending only on that receiver's question; (2) each factor is
    weakly symmetric; (3) every losing input is strictly noisier than every
    winning one, with margin at least ``ENTROPY_STRICTNESS_MARGIN``.
    Raises ``GameChannelValidationError`` naming the violated clause.
    """
    if (
        ch.num_tx != game.num_parties
        or ch.question_sizes != game.question_sizes
        or ch.answer_sizes != game.answer_sizes
    ):
        raise GameChannelValidationError(
            "alphabets", "channel input alphabets do not match the game"
        )
    if ch.mode == MODE_PER_RECEIVER:
        if len(ch.output_sizes) != ch.num_tx:
            raise GameChannelValidationError(
                "alphabets", "per-receiver mode needs one output per transmitter"
            )
        # receiver i is driven by question i
        recv_qsizes = game.question_sizes
    else:
        if len(ch.output_sizes) != 1:
            raise GameChannelValidationError(
                "alphabets", "global mode stores a single merged receiver"
            )
        # the merged receiver is driven by the joint question tuple
        recv_qsizes = (int(np.prod(game.question_sizes)),)

    mask = winning_input_mask(game)
    flat = ch.flat_matrix()
    win_rows = flat[mask.ravel()]
    lose_rows = flat[~mask.ravel()]
    if win_rows.shape[0] == 0:
        raise GameChannelValidationError("factorization", "game has no winning inputs")

    # questions of each winning input, flattened per effective receiver
    win_x = np.argwhere(mask)
    qa = [np.divmod(win_x[:, i], game.answer_sizes[i]) for i in range(ch.num_tx)]
    qmat = np.stack([q for q, _ in qa], axis=1)  # (n_win, K)
    if ch.mode == MODE_PER_RECEIVER:
        recv_q = [qmat[:, i] for i in range(ch.num_tx)]
    else:
        recv_q = [np.ravel_multi_index(qmat.T, game.question_sizes)]

    R = len(ch.output_sizes)
    win_tensor = win_rows.reshape((win_rows.shape[0],) + ch.output_sizes)
    subs: list[np.ndarray] = []
    residual = 0.0
    for r in range(R):
        other = tuple(1 + j for j in range(R) if j != r)
        marg = win_tensor.sum(axis=other) if other else win_tensor  # (n_win, |Y_r|)
        sub = np.zeros((recv_qsizes[r], ch.output_sizes[r]))
        for qv in range(recv_qsizes[r]):
            sel = marg[recv_q[r] == qv]
            if sel.shape[0] == 0:
                raise GameChannelValidationError(
                    "factorization",
                    f"receiver {r + 1}: question {qv} occurs in no winning input, "
                    "sub-channel undefined",
                )
            dev = float(np.max(np.abs(sel - sel[0])))
            if dev > residual:
                residual = dev
            sub[qv] = sel.mean(axis=0)
        subs.append(sub)

    # product reconstruction on every winning row
    recon = np.ones((win_rows.shape[0], 1))
    for r in range(R):
        fac = subs[r][recv_q[r]]  # (n_win, |Y_r|)
        recon = recon[:, :, None] * fac[:, None, :]
        recon = recon.reshape(win_rows.shape[0], -1)
    residual = max(residual, float(np.max(np.abs(recon - win_rows))))
    if residual > tol:
        raise GameChannelValidationError(
            "factorization",
            f"winning rows do not factor into per-receiver question-only laws "
            f"(max residual {residual:.3g})",
        )

    ws_flags = []
    for r, sub in enumerate(subs):
        ok = is_weakly_symmetric(sub, tol=max(tol, 1e-9))
        ws_flags.append(ok)
        if not ok:
            raise GameChannelValidationError(
                "weak-symmetry", f"receiver {r + 1} winning sub-channel is not weakly symmetric"
            )
    h_w = tuple(entropy_bits(sub[0]) for sub in subs)

    win_ent = np.apply_along_axis(entropy_bits, 1, win_rows)
    max_w = float(win_ent.max())
    if lose_rows.shape[0]:
        lose_ent = np.apply_along_axis(entropy_bits, 1, lose_rows)
        min_l = float(lose_ent.min())
        margin = min_l - max_w
    else:
        min_l = math.inf
        margin = math.inf
    if margin < ENTROPY_STRICTNESS_MARGIN:
        raise GameChannelValidationError(
            "entropy-gap",
            f"losing inputs must be strictly noisier than winning ones "
            f"(margin {margin:.3g} < {ENTROPY_STRICTNESS_MARGIN})",
        )

    return GameChannelReport(
        mode=ch.mode,
        receiver_question_sizes=tuple(recv_qsizes),
        output_sizes=ch.output_sizes,
        sub_channels=tuple(subs),
        h_w=h_w,
        weakly_symmetric=tuple(ws_flags),
        max_factorization_residual=residual,
        max_winning_entropy=max_w,
        min_losing_entropy=min_l,
        entropy_margin=margin,
    )


def closed_form_sum_capacity(report: GameChannelReport) -> float:
    """Cooperative sum capacity sum_i (log2 |Y_i| - h_i_w) in bits."""
    return float(
        sum(math.log2(n) - h for n, h in zip(report.output_sizes, report.h_w))
    )
