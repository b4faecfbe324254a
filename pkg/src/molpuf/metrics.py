"""Hamming-distance statistics, reliability and uniqueness.

All distances are fractions of the signature length L (multiply by 100 for
the percentages usually tabulated).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


def _bits(x) -> np.ndarray:
    a = np.asarray(x)
    if a.ndim != 1:
        raise ValueError("expected a 1-d bit vector")
    return a.astype(np.uint8)


def hamming_distance(a, b) -> int:
    a, b = _bits(a), _bits(b)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
    return int(np.count_nonzero(a != b))


def _matrix(responses) -> np.ndarray:
    r = np.asarray([_bits(x) for x in responses])
    if r.ndim != 2:
        raise ValueError("signatures must all have the same length")
    return r


def intra_distances(responses, all_pairs: bool = False) -> np.ndarray:
    """HD(R_1, R_i)/L for i = 2..m, or every pair with ``all_pairs``."""
    r = _matrix(responses)
    if len(r) < 2:
        raise ValueError("need at least two signatures")
    if all_pairs:
        return inter_distances(r)
    return np.count_nonzero(r[1:] != r[0], axis=1) / r.shape[1]


def inter_distances(responses) -> np.ndarray:
    """HD(R_i, R_j)/L over all K(K-1)/2 pairs i < j, row-major order."""
    r = _matrix(responses)
    k = len(r)
    if k < 2:
        raise ValueError("need at least two signatures")
    i, j = np.triu_indices(k, 1)
    # counts via integer products keep the sum exact and order independent
    ones = r.astype(np.int64)
    same_ones = ones @ ones.T
    n1 = ones.sum(axis=1)
    hd = n1[:, None] + n1[None, :] - 2 * same_ones
    return hd[i, j] / r.shape[1]


def p_intra(responses, divisor: str = "m-1", all_pairs: bool = False) -> float:
    """Mean intra-chip distance of m signatures from one PUF.

    ``divisor="m"`` reproduces the literal 1/m normalisation of a sum of
    m-1 terms; the default averages the m-1 comparisons.
    """
    d = intra_distances(responses, all_pairs)
    if all_pairs or divisor == "m-1":
        return float(d.sum() / len(d))
    if divisor == "m":
        return float(d.sum() / (len(d) + 1))
    raise ValueError("divisor must be 'm-1' or 'm'")


def p_inter(responses) -> float:
    d = inter_distances(responses)
    return float(d.sum() / len(d))


def _check_fraction(p: float):
    if not (0.0 <= p <= 1.0) or math.isnan(p):
        raise ValueError(f"expected a fraction in [0, 1], got {p!r}")


def reliability(p_intra: float) -> float:
    _check_fraction(p_intra)
    return 1.0 - p_intra


def uniqueness(p_inter: float) -> float:
    _check_fraction(p_inter)
    return 1.0 - abs(2.0 * p_inter - 1.0)


@dataclass(frozen=True)
class VariationStats:
    max: float
    min: float
    mean: float


@dataclass(frozen=True)
class GaussianFit:
    mean: float
    std: float

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.std == 0:
            return np.where(x == self.mean, np.inf, 0.0)
        z = (x - self.mean) / self.std
        return np.exp(-0.5 * z * z) / (self.std * math.sqrt(2 * math.pi))


def variation_stats(samples: Sequence[float]) -> VariationStats:
    s = np.asarray(samples, dtype=float)
    if s.size == 0:
        raise ValueError("no samples")
    return VariationStats(float(s.max()), float(s.min()), float(s.sum() / s.size))


def gaussian_fit(samples: Sequence[float]) -> GaussianFit:
    """Sample mean and corrected sample standard deviation (0 for one sample)."""
    s = np.asarray(samples, dtype=float)
    if s.size == 0:
        raise ValueError("no samples")
    std = float(s.std(ddof=1)) if s.size > 1 else 0.0
    return GaussianFit(float(s.mean()), std)


def feasible(intra: VariationStats, inter: VariationStats) -> bool:
    """A design is usable only if min inter-chip exceeds max intra-chip variation."""
    return inter.min > intra.max
