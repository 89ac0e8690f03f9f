"""Cooperation boxes: conditional distributions P(answers | questions).

A cooperation box is what the parties share before the game starts.  This
module holds the dense table representation, the classical constructions
(shared randomness, deterministic answer functions), the no-signaling check,
winning-probability evaluation, and exact brute force over all deterministic
strategies.
"""

from __future__ import annotations

import itertools
import string
from dataclasses import dataclass, field

import numpy as np

from .games import Game

NORMALIZATION_TOL = 1e-10
NO_SIGNALING_TOL = 1e-9
DEFAULT_ENUM_BUDGET = 10**8


@dataclass(frozen=True)
class CorrelationTable:
    """Dense cooperation box P(a_1..a_K | q_1..q_K).

    ``probs`` has shape (*question_sizes, *answer_sizes) and each question
    slice sums to one.
    """

    num_parties: int
    question_sizes: tuple[int, ...]
    answer_sizes: tuple[int, ...]
    probs: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "question_sizes", tuple(self.question_sizes))
        object.__setattr__(self, "answer_sizes", tuple(self.answer_sizes))
        expected = self.question_sizes + self.answer_sizes
        p = np.ascontiguousarray(self.probs, dtype=float)
        if p.shape != expected:
            raise ValueError(f"probs shape {p.shape} != {expected}")
        if p.min() < -1e-12 or p.max() > 1 + 1e-12:
            raise ValueError("probabilities must lie in [0, 1]")
        p = np.clip(p, 0.0, None)
        sums = p.sum(axis=tuple(range(self.num_parties, 2 * self.num_parties)))
        if np.max(np.abs(sums - 1.0)) > NORMALIZATION_TOL:
            raise ValueError("each question slice must sum to 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    def matches_game(self, game: Game) -> bool:
        return (
            self.num_parties == game.num_parties
            and self.question_sizes == game.question_sizes
            and self.answer_sizes == game.answer_sizes
        )

    def to_dict(self) -> dict:
        """JSON form: alphabets plus row-major flattened probabilities
        (question indices outer, answer indices inner, party 1 most
        significant within each block)."""
        return {
            "num_parties": self.num_parties,
            "question_sizes": list(self.question_sizes),
            "answer_sizes": list(self.answer_sizes),
            "probs": self.probs.ravel().tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "CorrelationTable":
        qs = tuple(int(v) for v in doc["question_sizes"])
        asz = tuple(int(v) for v in doc["answer_sizes"])
        probs = np.asarray(doc["probs"], dtype=float).reshape(qs + asz)
        return cls(int(doc["num_parties"]), qs, asz, probs)


@dataclass(frozen=True)
class SharedRandomnessStrategy:
    """Classical cooperation: a shared latent value plus local responses.

    ``weights`` is the latent distribution; ``responses[i][v, q, a]`` is
    party i's response distribution given its question and the latent value.
    """

    weights: np.ndarray
    responses: list[np.ndarray]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.min() < 0 or abs(w.sum() - 1.0) > NORMALIZATION_TOL:
            raise ValueError("latent weights must be a probability vector")
        object.__setattr__(self, "weights", w)
        resp = []
        for i, t in enumerate(self.responses):
            t = np.asarray(t, dtype=float)
            if t.ndim != 3 or t.shape[0] != w.size:
                raise ValueError(f"response table {i} must have shape (|V|, |Q_i|, |A_i|)")
            if t.min() < 0 or np.max(np.abs(t.sum(axis=2) - 1.0)) > NORMALIZATION_TOL:
                raise ValueError(f"response table {i} rows must be distributions")
            resp.append(t)
        object.__setattr__(self, "responses", resp)

    @property
    def num_parties(self) -> int:
        return len(self.responses)


@dataclass(frozen=True)
class DeterministicStrategy:
    """One answer function per party, encoded as lookup lists."""

    answer_maps: list[np.ndarray]
    answer_sizes: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "answer_sizes", tuple(self.answer_sizes))
        maps = []
        for i, m in enumerate(self.answer_maps):
            m = np.asarray(m, dtype=int)
            if m.ndim != 1:
                raise ValueError("answer maps must be 1-D lookup lists")
            if m.size and (m.min() < 0 or m.max() >= self.answer_sizes[i]):
                raise ValueError(f"answer map {i} has out-of-range answers")
            maps.append(m)
        object.__setattr__(self, "answer_maps", maps)

    @property
    def question_sizes(self) -> tuple[int, ...]:
        return tuple(m.size for m in self.answer_maps)


def _einsum_letters(n: int):
    return list(string.ascii_lowercase[:n])


def table_from_shared_randomness(s: SharedRandomnessStrategy) -> CorrelationTable:
    """Compile a shared-randomness strategy into its cooperation table."""
    K = s.num_parties
    qs = tuple(t.shape[1] for t in s.responses)
    asz = tuple(t.shape[2] for t in s.responses)
    q_l = _einsum_letters(K)
    a_l = [c.upper() for c in q_l]
    terms = ["z"]
    ops = [s.weights]
    for i in range(K):
        terms.append("z" + q_l[i] + a_l[i])
        ops.append(s.responses[i])
    spec = ",".join(terms) + "->" + "".join(q_l) + "".join(a_l)
    probs = np.einsum(spec, *ops, optimize=True)
    return CorrelationTable(K, qs, asz, probs)


def table_from_deterministic(d: DeterministicStrategy) -> CorrelationTable:
    """Point-mass table: a_i = f_i(q_i) with probability one."""
    K = len(d.answer_maps)
    qs = d.question_sizes
    asz = d.answer_sizes
    probs = np.zeros(qs + asz)
    for q in itertools.product(*(range(s) for s in qs)):
        a = tuple(int(d.answer_maps[i][q[i]]) for i in range(K))
        probs[q + a] = 1.0
    return CorrelationTable(K, qs, asz, probs)


@dataclass(frozen=True)
class NoSignalingReport:
    ok: bool
    max_deviation: float
    party: int | None = None
    answer: int | None = None
    question_own: int | None = None
    context_low: tuple[int, ...] | None = None
    context_high: tuple[int, ...] | None = None

    def __bool__(self) -> bool:
        return self.ok


def is_no_signaling(t: CorrelationTable, tol: float = NO_SIGNALING_TOL) -> NoSignalingReport:
    """Check the marginal-independence condition.

    For every party the marginal of its own answer given the full question
    tuple must not depend on the other parties' questions.  The report
    carries the largest deviation found and the indices where it occurs.
    """
    K = t.num_parties
    worst = 0.0
    arg = (None, None, None, None, None)
    for i in range(K):
        other_answers = tuple(K + j for j in range(K) if j != i)
        marg = t.probs.sum(axis=other_answers)  # (*question_sizes, |A_i|)
        # move own question axis first, flatten the rest
        m = np.moveaxis(marg, i, 0)
        qi_size = t.question_sizes[i]
        ctx_shape = m.shape[1:-1]
        flat = m.reshape(qi_size, -1, t.answer_sizes[i])
        hi = flat.max(axis=1)
        lo = flat.min(axis=1)
        dev = hi - lo
        d = float(dev.max())
        if d > worst:
            worst = d
            qi, ai = np.unravel_index(int(dev.argmax()), dev.shape)
            ctx_hi = np.unravel_index(int(flat[qi, :, ai].argmax()), ctx_shape)
            ctx_lo = np.unravel_index(int(flat[qi, :, ai].argmin()), ctx_shape)
            arg = (i, int(ai), int(qi), tuple(int(v) for v in ctx_lo), tuple(int(v) for v in ctx_hi))
    ok = worst <= tol
    return NoSignalingReport(ok, worst, *arg)


def winning_probability(g: Game, t: CorrelationTable) -> float:
    """Winning probability of a box under uniform questions."""
    if not t.matches_game(g):
        raise ValueError("table alphabets do not match the game")
    return float((t.probs * g.winning).sum() / g.num_questions)


def _party_function_tables(game: Game) -> list[np.ndarray]:
    """All deterministic answer functions per party, lexicographic in
    (f(0), f(1), ...)."""
    tables = []
    for i in range(game.num_parties):
        q, a = game.question_sizes[i], game.answer_sizes[i]
        tables.append(np.array(list(itertools.product(range(a), repeat=q)), dtype=np.int64))
    return tables


def classical_max_win(
    g: Game, budget: int = DEFAULT_ENUM_BUDGET
) -> tuple[float, DeterministicStrategy]:
    """Exact maximum winning probability over deterministic strategies.

    Enumerates every joint tuple of per-party answer functions and counts
    winning questions; ties break toward the lexicographically smallest
    strategy encoding.  By extremality of deterministic encoders this equals
    the maximum over all shared-randomness boxes.
    """
    total = 1
    for i in range(g.num_parties):
        total *= g.answer_sizes[i] ** g.question_sizes[i]
        if total > budget:
            raise ValueError(
                f"deterministic strategy space ({total}+) exceeds budget {budget}"
            )
    funcs = _party_function_tables(g)
    counts_shape = tuple(f.shape[0] for f in funcs)
    counts = np.zeros(counts_shape, dtype=np.int32)
    K = g.num_parties
    for q in g.question_tuples():
        w_q = g.winning[q]  # (*answer_sizes,) boolean
        idx = []
        for i in range(K):
            shape = [1] * K
            shape[i] = counts_shape[i]
            idx.append(funcs[i][:, q[i]].reshape(shape))
        counts += w_q[tuple(idx)]
    best_flat = int(np.argmax(counts))  # first max = lexicographically smallest
    value = float(counts.ravel()[best_flat] / g.num_questions)
    best_idx = np.unravel_index(best_flat, counts_shape)
    maps = [funcs[i][best_idx[i]].copy() for i in range(K)]
    return value, DeterministicStrategy(maps, g.answer_sizes)


def make_pr_box() -> CorrelationTable:
    """The extremal no-signaling box that always wins CHSH."""
    probs = np.zeros((2, 2, 2, 2))
    for q1, q2, a1, a2 in itertools.product(range(2), repeat=4):
        if (a1 ^ a2) == (q1 & q2):
            probs[q1, q2, a1, a2] = 0.5
    return CorrelationTable(2, (2, 2), (2, 2), probs)


def random_shared_randomness(
    game: Game, rng: np.random.Generator, num_latent: int | None = None
) -> SharedRandomnessStrategy:
    """Sample a random shared-randomness strategy for a game (Dirichlet rows)."""
    if num_latent is None:
        num_latent = int(rng.integers(1, 5))
    weights = rng.dirichlet(np.ones(num_latent))
    responses = []
    for i in range(game.num_parties):
        q, a = game.question_sizes[i], game.answer_sizes[i]
        responses.append(rng.dirichlet(np.ones(a), size=(num_latent, q)))
    return SharedRandomnessStrategy(weights, responses)
