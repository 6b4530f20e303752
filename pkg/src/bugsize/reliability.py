"""Remaining-bug size and release reliability.

The remaining size of a sampler state is the total eventual size of
candidates that are included but were never detected: the testing debt the
campaign did not surface.  Release reliability at a threshold is the
posterior probability that this remaining size stays below the threshold.
"""

from __future__ import annotations

import numpy as np

from .model import AugmentedState
from .sampler import ChainSet

__all__ = [
    "remaining_size",
    "reliability_at",
    "chain_reliability",
    "reliability_curve",
]


def remaining_size(state: AugmentedState) -> int:
    """Total eventual size of included-but-undetected candidates.

    Equivalent to the total size of all included candidates minus the total
    size of the detected ones, since detected candidates are always
    included.  Zero whenever every included candidate was detected.
    """
    return int(state.size[state.include & ~state.detected].sum())


def _remaining_draws(chainset: ChainSet) -> np.ndarray:
    draws = chainset.pooled("remaining_size")
    if draws.size == 0:
        raise ValueError("chain set holds no kept draws")
    return draws


def reliability_at(chainset: ChainSet, epsilon: float) -> float:
    """Posterior probability that the remaining size is below ``epsilon``.

    Pooled over chains; the inequality is strict, so ``epsilon = 0`` always
    yields 0.
    """
    if epsilon < 0:
        raise ValueError("threshold must be non-negative")
    draws = _remaining_draws(chainset)
    return float(np.count_nonzero(draws < epsilon) / draws.size)


def chain_reliability(chainset: ChainSet, epsilon: float) -> list[float]:
    """Per-chain reliability estimates at one threshold, for stability checks."""
    if epsilon < 0:
        raise ValueError("threshold must be non-negative")
    _remaining_draws(chainset)
    out = []
    for chain in chainset.chains:
        r = chain.draws["remaining_size"]
        out.append(float(np.count_nonzero(r < epsilon) / r.size))
    return out


def reliability_curve(chainset: ChainSet, epsilons) -> list[tuple[float, float]]:
    """Pointwise reliability over a strictly increasing threshold grid.

    Returns (threshold, probability) pairs; the probabilities are
    nondecreasing because the underlying event only grows with the
    threshold.
    """
    eps = np.asarray(epsilons, dtype=float)
    if eps.ndim != 1 or eps.size == 0:
        raise ValueError("need at least one threshold")
    if eps.size > 1 and np.any(np.diff(eps) <= 0):
        raise ValueError("thresholds must be strictly increasing")
    return [(float(e), reliability_at(chainset, float(e))) for e in eps]
