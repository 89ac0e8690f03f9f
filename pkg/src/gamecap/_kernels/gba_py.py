"""Numpy implementation of the multi-transmitter capacity iteration.

One ``gba_run`` call performs the full cyclic ascent from a single starting
point: transmitters are updated in order, each against the current product
of the others' distributions, and the sum-rate objective is recorded after
every full cycle.  For a single transmitter this is exactly the classical
capacity iteration.
"""

from __future__ import annotations

import math
import string

import numpy as np

LN2 = math.log(2.0)
TINY = 1e-300


def _product_distribution(qs: list[np.ndarray]) -> np.ndarray:
    px = qs[0]
    for q in qs[1:]:
        px = np.multiply.outer(px, q)
    return px.ravel()


def gba_run(
    channel: np.ndarray,
    input_sizes,
    q_init: np.ndarray,
    tol: float = 1e-9,
    max_iter: int = 20000,
):
    """Cyclic ascent over per-transmitter input distributions.

    ``channel`` is the (num_inputs, num_outputs) row-stochastic matrix with
    inputs flattened in C order over the per-transmitter alphabets
    ``input_sizes``; ``q_init`` concatenates the per-transmitter starting
    distributions.  Returns ``(q_final, history_bits, converged)`` where
    ``history_bits[0]`` is the objective at the start and one entry is
    appended per full cycle.  Zero-probability input symbols stay at zero.
    """
    W = np.ascontiguousarray(channel, dtype=float)
    sizes = [int(s) for s in input_sizes]
    K = len(sizes)
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    q0 = np.asarray(q_init, dtype=float)
    qs = [q0[offsets[i]: offsets[i + 1]].copy() for i in range(K)]

    # per-row sum_y W log W, so the row score is this minus W @ log p_y
    wlogw = np.where(W > 0, W * np.log(np.maximum(W, TINY)), 0.0).sum(axis=1)

    letters = string.ascii_lowercase[:K]

    def row_scores() -> tuple[np.ndarray, np.ndarray]:
        px = _product_distribution(qs)
        py = px @ W
        score = wlogw - W @ np.log(np.maximum(py, TINY))
        return px, score

    def objective_bits(px: np.ndarray, score: np.ndarray) -> float:
        return float(px @ score) / LN2

    px, score = row_scores()
    history = [objective_bits(px, score)]
    converged = False
    for _ in range(max_iter):
        for i in range(K):
            _, score = row_scores()
            tensor = score.reshape(sizes)
            others = [j for j in range(K) if j != i]
            spec = ",".join([letters] + [letters[j] for j in others]) + "->" + letters[i]
            d = np.einsum(spec, tensor, *[qs[j] for j in others], optimize=True)
            supp = qs[i] > 0.0
            shift = d[supp].max()
            new = np.where(supp, qs[i] * np.exp(d - shift), 0.0)
            total = new.sum()
            if total <= 0.0:
                raise FloatingPointError(f"transmitter {i} distribution collapsed")
            qs[i] = new / total
        px, score = row_scores()
        history.append(objective_bits(px, score))
        if abs(history[-1] - history[-2]) < tol:
            converged = True
            break
    return np.concatenate(qs), np.asarray(history), converged
