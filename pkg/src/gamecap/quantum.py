"""Entanglement-assisted cooperation: states, measurements, Born-rule tables.

A quantum strategy is a shared density matrix plus one measurement set per
party (a POVM for each question).  ``born_table`` compiles the strategy into
the same ``CorrelationTable`` representation used for classical boxes, so
winning probabilities and no-signaling checks apply unchanged.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, field
from math import cos, pi, sin, sqrt

import numpy as np

from .correlations import CorrelationTable

HERMITICITY_TOL = 1e-10
COMPLETENESS_TOL = 1e-10

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / sqrt(2)
_S = np.array([[1, 0], [0, 1j]], dtype=complex)


@dataclass(frozen=True)
class DensityMatrix:
    """Positive unit-trace operator on a tensor product of local spaces."""

    matrix: np.ndarray = field(repr=False)
    dims: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        m = np.asarray(self.matrix, dtype=complex)
        d = int(np.prod(self.dims))
        if m.shape != (d, d):
            raise ValueError(f"matrix shape {m.shape} != ({d}, {d})")
        if np.max(np.abs(m - m.conj().T)) > HERMITICITY_TOL:
            raise ValueError("density matrix must be Hermitian")
        if abs(np.trace(m).real - 1.0) > 1e-9:
            raise ValueError("density matrix must have unit trace")
        if np.linalg.eigvalsh(m).min() < -1e-9:
            raise ValueError("density matrix must be positive semidefinite")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)


def pure_state_density(vec: np.ndarray, dims: tuple[int, ...]) -> DensityMatrix:
    v = np.asarray(vec, dtype=complex).ravel()
    v = v / np.linalg.norm(v)
    return DensityMatrix(np.outer(v, v.conj()), dims)


@dataclass(frozen=True)
class MeasurementSet:
    """One POVM per question for a single party.

    ``operators`` has shape (|Q_i|, |A_i|, d_i, d_i); ``operators[q, a]`` is
    the POVM element for answer ``a`` under question ``q``.
    """

    operators: np.ndarray = field(repr=False)

    def __post_init__(self):
        ops = np.asarray(self.operators, dtype=complex)
        if ops.ndim != 4 or ops.shape[2] != ops.shape[3]:
            raise ValueError("operators must have shape (|Q|, |A|, d, d)")
        object.__setattr__(self, "operators", ops)

    @property
    def num_questions(self) -> int:
        return self.operators.shape[0]

    @property
    def num_answers(self) -> int:
        return self.operators.shape[1]

    @property
    def dim(self) -> int:
        return self.operators.shape[2]


def validate_measurement(ms: MeasurementSet, tol: float = COMPLETENESS_TOL) -> None:
    """Raise unless every element is PSD Hermitian and each question's
    elements sum to the identity."""
    ops = ms.operators
    herm = np.max(np.abs(ops - ops.conj().transpose(0, 1, 3, 2)))
    if herm > tol:
        raise ValueError(f"POVM elements must be Hermitian (deviation {herm:.3g})")
    eigs = np.linalg.eigvalsh(ops.reshape(-1, ms.dim, ms.dim))
    if eigs.min() < -tol:
        raise ValueError(f"POVM elements must be PSD (min eigenvalue {eigs.min():.3g})")
    total = ops.sum(axis=1)
    dev = np.max(np.abs(total - np.eye(ms.dim)))
    if dev > tol:
        raise ValueError(f"POVM elements must sum to identity (deviation {dev:.3g})")


@dataclass(frozen=True)
class QuantumStrategy:
    """Shared state plus one measurement set per party."""

    state: DensityMatrix
    measurements: list[MeasurementSet]

    def __post_init__(self):
        if len(self.measurements) != len(self.state.dims):
            raise ValueError("need one measurement set per subsystem")
        for ms, d in zip(self.measurements, self.state.dims):
            if ms.dim != d:
                raise ValueError("measurement dimension does not match subsystem")

    @property
    def num_parties(self) -> int:
        return len(self.measurements)

    @property
    def question_sizes(self) -> tuple[int, ...]:
        return tuple(ms.num_questions for ms in self.measurements)

    @property
    def answer_sizes(self) -> tuple[int, ...]:
        return tuple(ms.num_answers for ms in self.measurements)


def born_table(strategy: QuantumStrategy) -> CorrelationTable:
    """Compile a quantum strategy into its cooperation table.

    table[q, a] = Tr((Pi_1 x ... x Pi_K) rho), evaluated as one contraction
    of the reshaped state against the stacked per-party operator arrays.
    """
    K = strategy.num_parties
    dims = strategy.state.dims
    rho = strategy.state.matrix.reshape(dims + dims)
    letters = iter(string.ascii_letters)
    q_l = [next(letters) for _ in range(K)]
    a_l = [next(letters) for _ in range(K)]
    row_l = [next(letters) for _ in range(K)]
    col_l = [next(letters) for _ in range(K)]
    # Tr((x)Pi rho) = sum rho[cols, rows] * prod Pi_i[row_i, col_i]
    terms = ["".join(col_l) + "".join(row_l)]
    ops: list[np.ndarray] = [rho]
    for i in range(K):
        terms.append(q_l[i] + a_l[i] + row_l[i] + col_l[i])
        ops.append(strategy.measurements[i].operators)
    spec = ",".join(terms) + "->" + "".join(q_l) + "".join(a_l)
    table = np.einsum(spec, *ops, optimize="greedy")
    imag = float(np.max(np.abs(table.imag)))
    if imag > 1e-9:
        raise ValueError(f"Born probabilities came out complex (imag {imag:.3g})")
    return CorrelationTable(
        K, strategy.question_sizes, strategy.answer_sizes, table.real
    )


def _rotation_projectors(angles: list[float]) -> np.ndarray:
    """Qubit projectors onto cos/sin rays: answer a rotates the angle by
    a * pi/2."""
    ops = np.empty((len(angles), 2, 2, 2), dtype=complex)
    for q, theta in enumerate(angles):
        for a in range(2):
            v = np.array([cos(theta + a * pi / 2), sin(theta + a * pi / 2)], dtype=complex)
            ops[q, a] = np.outer(v, v.conj())
    return ops


def make_tsirelson_chsh() -> QuantumStrategy:
    """Optimal entangled strategy for the XOR game on two qubits.

    Maximally entangled pair; party 1 measures at angles {0, pi/4}, party 2
    at {pi/8, -pi/8}.  Wins with probability (2 + sqrt(2)) / 4.
    """
    phi = np.zeros(4, dtype=complex)
    phi[0] = phi[3] = 1 / sqrt(2)
    state = pure_state_density(phi, (2, 2))
    m1 = MeasurementSet(_rotation_projectors([0.0, pi / 4]))
    m2 = MeasurementSet(_rotation_projectors([pi / 8, -pi / 8]))
    return QuantumStrategy(state, [m1, m2])


_PERES_SQUARE = [
    [np.kron(_I2, _Z), np.kron(_Z, _I2), np.kron(_Z, _Z)],
    [np.kron(_X, _I2), np.kron(_I2, _X), np.kron(_X, _X)],
    [-np.kron(_X, _Z), -np.kron(_Z, _X), np.kron(_Y, _Y)],
]


def _commuting_sign_projector(observables: list[np.ndarray], a: int) -> np.ndarray:
    """Joint eigenprojector of commuting +/-1 observables; bit j of ``a``
    selects the -1 eigenspace of the j-th observable."""
    proj = np.eye(4, dtype=complex)
    for j, obs in enumerate(observables):
        sign = 1.0 - 2.0 * ((a >> j) & 1)
        proj = proj @ ((np.eye(4, dtype=complex) + sign * obs) / 2.0)
    return proj


def make_mermin_peres() -> QuantumStrategy:
    """Perfect entangled strategy for the 3x3 grid game.

    Two maximally entangled qubit pairs; party 1 jointly measures the three
    commuting observables of its row, party 2 those of its column.  Every
    entry of the observable square is transpose invariant, so the two sides
    agree at the intersection with certainty and the parity constraints hold
    by construction: the strategy wins with probability 1.
    """
    vec = np.zeros(16, dtype=complex)
    for m in range(4):
        vec[m * 4 + m] = 0.5
    state = pure_state_density(vec, (4, 4))
    row_ops = np.empty((3, 8, 4, 4), dtype=complex)
    col_ops = np.empty((3, 8, 4, 4), dtype=complex)
    for r in range(3):
        for a in range(8):
            row_ops[r, a] = _commuting_sign_projector(_PERES_SQUARE[r], a)
    for c in range(3):
        for a in range(8):
            col_ops[c, a] = _commuting_sign_projector(
                [_PERES_SQUARE[j][c] for j in range(3)], a
            )
    return QuantumStrategy(state, [MeasurementSet(row_ops), MeasurementSet(col_ops)])


def make_ghz_parity(num_parties: int) -> QuantumStrategy:
    """Perfect entangled strategy for the K-party parity game.

    Shares a GHZ state; each party applies the phase gate q times and a
    Hadamard, then measures in the computational basis.
    """
    if not 3 <= num_parties <= 10:
        raise ValueError("parity strategy supports 3 to 10 parties")
    K = num_parties
    vec = np.zeros(2**K, dtype=complex)
    vec[0] = vec[-1] = 1 / sqrt(2)
    state = pure_state_density(vec, (2,) * K)
    ops = np.empty((2, 2, 2, 2), dtype=complex)
    for q in range(2):
        u = _H @ np.linalg.matrix_power(_S, q)
        for a in range(2):
            e = np.zeros(2, dtype=complex)
            e[a] = 1.0
            v = u.conj().T @ e
            ops[q, a] = np.outer(v, v.conj())
    ms = MeasurementSet(ops)
    return QuantumStrategy(state, [ms] * K)
