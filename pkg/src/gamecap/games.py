"""Multiparty non-local games: alphabets plus a dense winning-condition tensor.

A K-party game is a tuple of per-party question alphabets, per-party answer
alphabets, and a winning set.  Questions and answers are 0-based indices
everywhere; the winning set is stored as a dense boolean tensor indexed by
(q_1..q_K, a_1..a_K) so user-defined games and built-ins are interchangeable
and exhaustively enumerable.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

BUILTIN_GAMES = ("chsh", "magic-square", "parity")


@dataclass(frozen=True)
class Game:
    """An immutable K-party game.

    ``winning[q_1, ..., q_K, a_1, ..., a_K]`` is True iff the tuple wins.
    """

    num_parties: int
    question_sizes: tuple[int, ...]
    answer_sizes: tuple[int, ...]
    winning: np.ndarray = field(repr=False)
    name: str = "custom"

    def __post_init__(self):
        if self.num_parties < 2:
            raise ValueError("a game needs at least 2 parties")
        if len(self.question_sizes) != self.num_parties or len(self.answer_sizes) != self.num_parties:
            raise ValueError("alphabet size lists must have one entry per party")
        if any(s < 1 for s in self.question_sizes + self.answer_sizes):
            raise ValueError("alphabet sizes must be positive")
        expected = tuple(self.question_sizes) + tuple(self.answer_sizes)
        if self.winning.shape != expected:
            raise ValueError(f"winning tensor shape {self.winning.shape} != {expected}")
        w = np.ascontiguousarray(self.winning, dtype=bool)
        w.setflags(write=False)
        object.__setattr__(self, "winning", w)
        object.__setattr__(self, "question_sizes", tuple(self.question_sizes))
        object.__setattr__(self, "answer_sizes", tuple(self.answer_sizes))

    @property
    def num_questions(self) -> int:
        return int(np.prod(self.question_sizes))

    @property
    def num_answers(self) -> int:
        return int(np.prod(self.answer_sizes))

    def question_tuples(self):
        return itertools.product(*(range(s) for s in self.question_sizes))

    def answer_tuples(self):
        return itertools.product(*(range(s) for s in self.answer_sizes))


def is_winning(game: Game, q: tuple[int, ...], a: tuple[int, ...]) -> bool:
    """Winning-set membership for one (questions, answers) pair."""
    q = tuple(int(v) for v in q)
    a = tuple(int(v) for v in a)
    if len(q) != game.num_parties or len(a) != game.num_parties:
        raise ValueError("question/answer tuple length must equal the number of parties")
    for i in range(game.num_parties):
        if not 0 <= q[i] < game.question_sizes[i]:
            raise IndexError(f"question index {q[i]} out of range for party {i}")
        if not 0 <= a[i] < game.answer_sizes[i]:
            raise IndexError(f"answer index {a[i]} out of range for party {i}")
    return bool(game.winning[q + a])


def make_chsh() -> Game:
    """The CHSH game: binary alphabets, win iff a1 XOR a2 == q1 AND q2."""
    q1, q2, a1, a2 = np.ix_(*[np.arange(2)] * 4)
    winning = (a1 ^ a2) == (q1 & q2)
    return Game(2, (2, 2), (2, 2), np.broadcast_to(winning, (2, 2, 2, 2)).copy(), "chsh")


def make_magic_square() -> Game:
    """The magic square game.

    Questions index a row (party 1) and a column (party 2) of a 3x3 grid.
    Answers are 3-bit strings encoded as integers 0..7, bit j holding the
    j-th cell (0-based).  A tuple wins iff party 1's bits have even parity,
    party 2's bits have odd parity, and bit q2 of a1 equals bit q1 of a2.
    """
    winning = np.zeros((3, 3, 8, 8), dtype=bool)
    parity = np.array([bin(a).count("1") % 2 for a in range(8)])
    bit = np.array([[(a >> j) & 1 for j in range(3)] for a in range(8)])
    for q1 in range(3):
        for q2 in range(3):
            ok1 = parity == 0
            ok2 = parity == 1
            agree = bit[:, q2][:, None] == bit[:, q1][None, :]
            winning[q1, q2] = ok1[:, None] & ok2[None, :] & agree
    return Game(2, (3, 3), (8, 8), winning, "magic-square")


def make_parity(num_parties: int) -> Game:
    """The K-party parity game (binary alphabets, K >= 3).

    A tuple wins if the question sum is odd, or if it is even and the answer
    sum is congruent to half the question sum mod 2.
    """
    K = int(num_parties)
    if K < 3:
        raise ValueError("the parity game needs at least 3 parties")
    qs = np.array(list(itertools.product(range(2), repeat=K)))
    qsum = qs.sum(axis=1)
    asum = qsum  # same enumeration for answers
    odd_q = (qsum % 2 == 1)
    target = (qsum // 2) % 2
    winning = odd_q[:, None] | ((asum % 2)[None, :] == target[:, None])
    shape = (2,) * (2 * K)
    return Game(K, (2,) * K, (2,) * K, winning.reshape(shape), f"parity-{K}")


def _make_builtin(name: str, num_parties: int | None = None) -> Game:
    if name == "chsh":
        return make_chsh()
    if name == "magic-square":
        return make_magic_square()
    if name == "parity":
        if num_parties is None:
            raise ValueError("the parity builtin needs num_parties")
        return make_parity(num_parties)
    raise ValueError(f"unknown builtin game {name!r}; known: {BUILTIN_GAMES}")


def game_from_spec(document: dict) -> Game:
    """Build a Game from a JSON-style document.

    The document declares ``num_parties``, ``question_sizes`` and
    ``answer_sizes``, plus either ``builtin: <name>`` or an explicit
    ``winning`` list of ``[[q...], [a...]]`` tuples (unlisted tuples lose).
    """
    try:
        num_parties = int(document["num_parties"])
        question_sizes = tuple(int(v) for v in document["question_sizes"])
        answer_sizes = tuple(int(v) for v in document["answer_sizes"])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed game document: {exc}") from exc
    name = str(document.get("name", "custom"))

    if "builtin" in document:
        game = _make_builtin(document["builtin"], num_parties)
        if (game.num_parties, game.question_sizes, game.answer_sizes) != (
            num_parties,
            question_sizes,
            answer_sizes,
        ):
            raise ValueError("declared alphabets do not match the builtin game")
        return game

    if "winning" not in document:
        raise ValueError("game document needs either 'builtin' or a 'winning' list")
    winning = np.zeros(question_sizes + answer_sizes, dtype=bool)
    seen = set()
    for entry in document["winning"]:
        try:
            q, a = entry
            q = tuple(int(v) for v in q)
            a = tuple(int(v) for v in a)
        except (TypeError, ValueError) as exc:
            raise ValueError(f"malformed winning tuple {entry!r}") from exc
        if len(q) != num_parties or len(a) != num_parties:
            raise ValueError(f"winning tuple {entry!r} has wrong arity")
        for i in range(num_parties):
            if not (0 <= q[i] < question_sizes[i] and 0 <= a[i] < answer_sizes[i]):
                raise ValueError(f"winning tuple {entry!r} out of alphabet range")
        if (q, a) in seen:
            raise ValueError(f"duplicate winning tuple {entry!r}")
        seen.add((q, a))
        winning[q + a] = True
    return Game(num_parties, question_sizes, answer_sizes, winning, name)


def game_to_spec(game: Game) -> dict:
    """Serialize a Game to the document format accepted by game_from_spec."""
    win_idx = np.argwhere(game.winning)
    K = game.num_parties
    winning = [[row[:K].tolist(), row[K:].tolist()] for row in win_idx]
    return {
        "name": game.name,
        "num_parties": game.num_parties,
        "question_sizes": list(game.question_sizes),
        "answer_sizes": list(game.answer_sizes),
        "winning": winning,
    }
