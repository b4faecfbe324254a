"""Additive linear delay model of an arbiter PUF.

Each MUX has a delay D ~ N(mu, sigma^2); stage i contributes the top/bottom
difference Delta_i ~ N(0, 2 sigma^2).  The final delay difference is
``r = sum_i (-1)^{C'_i} Delta_i`` with the suffix parity
``C'_i = C_{i+1} xor ... xor C_N`` (so ``C'_N = 0``) and the response is 1
iff ``r >= 0``.  Environmental noise is modelled the same way: an
independent N(0, sigma_noise^2) offset on every MUX delay.

This is a fast statistical stand-in for the chemical PUF, not a model of
its crossing times.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fabric import ChallengeLike, as_challenge
from .metrics import inter_distances, intra_distances


@dataclass(frozen=True)
class DelayPuf:
    delta: np.ndarray  # per-stage top-minus-bottom delay
    sigma: float = 1.0

    @property
    def n_stages(self) -> int:
        return len(self.delta)


def sample_delay_puf(n_stages: int, rng: np.random.Generator, sigma: float = 1.0) -> DelayPuf:
    d = rng.normal(0.0, sigma, (2, n_stages))
    return DelayPuf(d[0] - d[1], sigma)


def transform_challenge(c: ChallengeLike) -> np.ndarray:
    bits = as_challenge(c)
    out = np.zeros_like(bits)
    acc = 0
    for i in range(len(bits) - 1, -1, -1):
        out[i] = acc
        acc ^= int(bits[i])
    return out


def features(challenges) -> np.ndarray:
    """(-1)^{C'} for a batch of challenges, shape (L, N)."""
    c = np.atleast_2d(np.asarray(challenges, dtype=np.int64))
    suffix = np.cumsum(c[:, ::-1], axis=1)[:, ::-1] % 2
    cprime = np.zeros_like(c)
    cprime[:, :-1] = suffix[:, 1:]
    return 1.0 - 2.0 * cprime


def delay_difference(puf: DelayPuf, c: ChallengeLike, noise=None) -> float:
    cp = transform_challenge(as_challenge(c, puf.n_stages))
    d = puf.delta if noise is None else puf.delta + np.asarray(noise, dtype=float)
    return float(np.sum(np.where(cp == 1, -d, d)))


def response(puf: DelayPuf, c: ChallengeLike, noise=None) -> int:
    return int(delay_difference(puf, c, noise) >= 0)


def responses(deltas, challenges) -> np.ndarray:
    """Response bits for K delta vectors x L challenges, shape (K, L)."""
    r = np.atleast_2d(deltas) @ features(challenges).T
    return (r >= 0).astype(np.uint8)


@dataclass(frozen=True)
class DelayModelMetrics:
    p_intra: float
    p_inter: float
    intra: np.ndarray  # HD(R_1, R_i)/L per PUF and condition, shape (K, m-1)
    inter: np.ndarray  # pairwise HD/L, length K(K-1)/2


def monte_carlo_metrics(n_stages: int, sigma: float, sigma_noise: float, K: int, m: int,
                        L: int, rng: np.random.Generator) -> DelayModelMetrics:
    """Intra- and inter-chip distances for K sampled PUFs.

    Every PUF sees the same L challenges.  Condition 1 is noise free and
    serves as the reference; conditions 2..m add fresh per-MUX noise.
    """
    if K < 2 or m < 2 or L < 1:
        raise ValueError("need K >= 2, m >= 2 and L >= 1")
    challenges = rng.integers(0, 2, (L, n_stages))
    phi = features(challenges)
    d = rng.normal(0.0, sigma, (K, 2, n_stages))
    base = d[:, 0] - d[:, 1]
    nominal = (base @ phi.T >= 0).astype(np.uint8)
    intra = np.empty((K, m - 1))
    for k in range(K):
        e = rng.normal(0.0, sigma_noise, (m - 1, 2, n_stages))
        noisy = ((base[k] + e[:, 0] - e[:, 1]) @ phi.T >= 0).astype(np.uint8)
        intra[k] = intra_distances(np.vstack([nominal[k], noisy]))
    inter = inter_distances(nominal)
    return DelayModelMetrics(float(intra.mean()), float(inter.mean()), intra, inter)
