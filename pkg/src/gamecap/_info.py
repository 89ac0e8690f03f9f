"""Shared entropy helpers (all quantities in bits)."""

import numpy as np

LN2 = np.log(2.0)


def entropy_bits(p: np.ndarray) -> float:
    """Shannon entropy of a distribution, base 2, with 0*log(0) = 0."""
    p = np.asarray(p, dtype=float)
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum())


def binary_entropy(p: float) -> float:
    return entropy_bits(np.array([p, 1.0 - p]))


def kl_bits(p: np.ndarray, q: np.ndarray) -> float:
    """KL divergence D(p || q) in bits; requires supp(p) ⊆ supp(q)."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    mask = p > 0
    if np.any(q[mask] <= 0):
        raise ValueError("KL divergence undefined: p puts mass where q is zero")
    return float((p[mask] * (np.log2(p[mask]) - np.log2(q[mask]))).sum())
