"""Core detection model: campaign data, configuration, kernels and densities.

A testing campaign is a grid of J missions by K phases.  The software holds
at most ``max_bugs`` candidate bugs; each candidate is real with probability
``inclusion_prob``.  A real bug has a latent eventual size (the number of
inputs that would ever traverse it), and bigger bugs are easier to find: a
bug of size ``s`` is detected somewhere in the campaign with probability
``1 - exp(-s**size_exponent / t_max)`` where ``t_max`` is the largest
per-cell test-case count.  Conditional on detection, the bug lands in cell
(j, k) with probability proportional to ``1 - exp(-T[j, k])``.  Sizes carry
a negative-binomial prior whose mean is itself gamma distributed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

__all__ = [
    "TestCampaign",
    "ModelConfig",
    "BugAssignment",
    "AugmentedState",
    "phase_detection_prob",
    "cell_probabilities",
    "detection_prob",
    "bug_log_likelihood",
    "nb_log_pmf",
    "gamma_log_pdf",
]

# Cell probabilities in the one-trial categorical likelihood must sum to 1;
# "sum" divides each raw cell mass by the total raw mass.
NORMALIZATION_POLICIES = ("sum",)


@dataclass(frozen=True, eq=False)
class TestCampaign:
    """Observed campaign counts over a missions-by-phases grid.

    Attributes
    ----------
    test_cases : ndarray of int, shape (J, K)
        Test cases run in mission j, phase k.
    bugs_detected : ndarray of int, shape (J, K)
        Bugs detected in mission j, phase k.
    """

    test_cases: np.ndarray
    bugs_detected: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.test_cases, dtype=np.int64)
        y = np.asarray(self.bugs_detected, dtype=np.int64)
        if t.ndim != 2 or t.shape[0] < 1 or t.shape[1] < 1:
            raise ValueError("test_cases must be a J x K matrix with J, K >= 1")
        if y.shape != t.shape:
            raise ValueError(
                f"bugs_detected shape {y.shape} does not match test_cases shape {t.shape}"
            )
        if np.any(t < 0):
            raise ValueError("test-case counts must be non-negative")
        if np.any(y < 0):
            raise ValueError("detected-bug counts must be non-negative")
        object.__setattr__(self, "test_cases", t)
        object.__setattr__(self, "bugs_detected", y)

    def __eq__(self, other):
        if not isinstance(other, TestCampaign):
            return NotImplemented
        return np.array_equal(self.test_cases, other.test_cases) and np.array_equal(
            self.bugs_detected, other.bugs_detected
        )

    @property
    def missions(self) -> int:
        return int(self.test_cases.shape[0])

    @property
    def phases(self) -> int:
        return int(self.test_cases.shape[1])

    @property
    def detected_total(self) -> int:
        """Total detected bugs across all cells."""
        return int(self.bugs_detected.sum())

    @property
    def t_max(self) -> int:
        """Largest per-cell test-case count; scales the detection kernel."""
        return int(self.test_cases.max())


@dataclass(frozen=True)
class ModelConfig:
    """Model settings: candidate ceiling, kernel tuning and prior hyperparameters.

    Attributes
    ----------
    max_bugs : int
        Ceiling on the number of candidate bugs (detected or hidden).
    size_exponent : float
        Exponent applied to a bug's size inside the detection kernel;
        larger values make detection probability rise faster with size.
    mean_size_shape, mean_size_rate : float
        Shape and rate of the gamma prior on each bug's mean eventual size
        (defaults give prior mean 100, variance 200).
    dispersion : float
        Negative-binomial dispersion of sizes around their mean
        (variance = mean + mean**2 / dispersion).
    normalization : str
        Cell-probability policy; only "sum" is currently defined.
    """

    max_bugs: int
    size_exponent: float = 1.5
    mean_size_shape: float = 50.0
    mean_size_rate: float = 0.5
    dispersion: float = 50.0
    normalization: str = "sum"

    def __post_init__(self):
        if self.max_bugs < 1:
            raise ValueError("max_bugs must be a positive integer")
        if self.size_exponent <= 0:
            raise ValueError("size_exponent must be positive")
        if self.mean_size_shape <= 0 or self.mean_size_rate <= 0:
            raise ValueError("gamma prior hyperparameters must be positive")
        if self.dispersion <= 0:
            raise ValueError("dispersion must be positive")
        if self.normalization not in NORMALIZATION_POLICIES:
            raise ValueError(
                f"unknown normalization policy {self.normalization!r}; "
                f"known: {', '.join(NORMALIZATION_POLICIES)}"
            )


@dataclass(frozen=True, eq=False)
class BugAssignment:
    """Per-candidate detection cells over the augmented candidate list.

    ``cell[i]`` is the flat index ``j * phases + k`` of the single cell in
    which candidate i was detected, or -1 if it was never detected.  At most
    one detection per candidate, so each row of the equivalent
    max_bugs x (J*K + 1) indicator array sums to 0 or 1.
    """

    cell: np.ndarray
    missions: int
    phases: int

    def __post_init__(self):
        c = np.asarray(self.cell, dtype=np.int64)
        if c.ndim != 1:
            raise ValueError("cell must be a 1-D array of flat cell indices")
        if np.any(c < -1) or np.any(c >= self.missions * self.phases):
            raise ValueError("cell indices out of range")
        object.__setattr__(self, "cell", c)

    def __eq__(self, other):
        if not isinstance(other, BugAssignment):
            return NotImplemented
        return (
            self.missions == other.missions
            and self.phases == other.phases
            and np.array_equal(self.cell, other.cell)
        )

    @property
    def max_bugs(self) -> int:
        return int(self.cell.shape[0])

    @property
    def detected(self) -> np.ndarray:
        """Boolean mask of candidates detected somewhere in the campaign."""
        return self.cell >= 0

    @property
    def undetected(self) -> np.ndarray:
        """Indicator (1 iff never detected) for each candidate."""
        return (self.cell < 0).astype(np.int64)

    @property
    def detected_total(self) -> int:
        return int(np.count_nonzero(self.cell >= 0))

    def counts(self) -> np.ndarray:
        """Reconstruct the J x K detected-bug count matrix."""
        found = self.cell[self.cell >= 0]
        return np.bincount(found, minlength=self.missions * self.phases).reshape(
            self.missions, self.phases
        )


@dataclass
class AugmentedState:
    """One sampler state over the augmented candidate list.

    Attributes
    ----------
    include : ndarray of bool, shape (max_bugs,)
        Whether each candidate is currently a real bug.
    size : ndarray of int, shape (max_bugs,)
        Current eventual size of each candidate.
    mean_size : ndarray of float, shape (max_bugs,)
        Current negative-binomial mean of each candidate's size.
    inclusion_prob : float
        Current probability that a candidate is real.
    detected : ndarray of bool, shape (max_bugs,)
        Fixed detection flags; detected candidates are always included.
    """

    include: np.ndarray
    size: np.ndarray
    mean_size: np.ndarray
    inclusion_prob: float
    detected: np.ndarray

    @property
    def max_bugs(self) -> int:
        return int(self.include.shape[0])

    @property
    def total_bugs(self) -> int:
        """Number of currently included candidates."""
        return int(np.count_nonzero(self.include))

    def validate(self) -> None:
        """Raise if the state violates its structural invariants."""
        m = self.max_bugs
        if not (self.size.shape == self.mean_size.shape == self.detected.shape == (m,)):
            raise ValueError("state arrays must share one length")
        if np.any(self.detected & ~self.include):
            raise ValueError("detected candidates must be included")
        if np.any(self.size < 0):
            raise ValueError("sizes must be non-negative")
        if np.any(self.mean_size <= 0):
            raise ValueError("size means must be positive")
        if not 0.0 < self.inclusion_prob < 1.0:
            raise ValueError("inclusion probability must lie in (0, 1)")


def phase_detection_prob(t):
    """Probability that a cell running ``t`` test cases detects a present bug.

    Equals ``1 - exp(-t)``: zero effort detects nothing, and the probability
    rises monotonically toward (but never reaches) 1.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("test-case count must be non-negative")
    return (-np.expm1(-t))[()]


def cell_probabilities(test_cases, normalization: str = "sum"):
    """Normalized per-cell detection probabilities for a campaign grid.

    Each cell's raw mass is ``1 - exp(-T[j, k])``; the "sum" policy rescales
    so the grid sums to 1, making the one-trial detection likelihood a proper
    categorical distribution.  Cells with zero test cases get probability 0.
    """
    if normalization not in NORMALIZATION_POLICIES:
        raise ValueError(
            f"unknown normalization policy {normalization!r}; "
            f"known: {', '.join(NORMALIZATION_POLICIES)}"
        )
    t = np.asarray(test_cases, dtype=float)
    if np.any(t < 0):
        raise ValueError("test-case counts must be non-negative")
    raw = -np.expm1(-t)
    total = raw.sum()
    if total <= 0.0:
        raise ValueError("no testing effort: every cell has zero test cases")
    return raw / total


def detection_prob(size, exponent: float, t_max: float):
    """Probability that a bug of the given eventual size is ever detected.

    Computed as ``1 - exp(-size**exponent / t_max)``: zero at size 0,
    strictly increasing in size, and scaled by the campaign's largest
    per-cell test-case count ``t_max``.
    """
    if exponent <= 0:
        raise ValueError("exponent must be positive")
    if t_max <= 0:
        raise ValueError("detection kernel undefined without test cases")
    s = np.asarray(size, dtype=float)
    if np.any(s < 0):
        raise ValueError("size must be non-negative")
    return (-np.expm1(-np.power(s, exponent) / t_max))[()]


def bug_log_likelihood(cell, included: bool, size, cell_probs, exponent: float, t_max: float) -> float:
    """Log-probability of one candidate's detection outcome.

    Parameters
    ----------
    cell : tuple of (j, k) or None
        Cell in which the candidate was detected, or None if never detected.
    included : bool
        Whether the candidate is currently a real bug.
    size : int
        The candidate's eventual size.
    cell_probs : ndarray, shape (J, K)
        Normalized cell probabilities from :func:`cell_probabilities`.
    exponent, t_max : float
        Detection-kernel parameters.

    Returns
    -------
    float
        ``log(alpha * cell_probs[cell])`` for a detected real bug,
        ``log(1 - alpha)`` for an undetected real bug, and 0 for an excluded
        candidate (which is undetected with probability 1).
    """
    if cell is not None and not included:
        raise ValueError("impossible configuration: detected candidate excluded")
    if not included:
        return 0.0
    if exponent <= 0:
        raise ValueError("exponent must be positive")
    if t_max <= 0:
        raise ValueError("detection kernel undefined without test cases")
    x = np.power(float(size), exponent) / t_max
    if cell is None:
        return float(-x)
    alpha = -np.expm1(-x)
    p = float(np.asarray(cell_probs)[cell])
    if alpha <= 0.0 or p <= 0.0:
        return float("-inf")
    return float(np.log(alpha) + np.log(p))


def nb_log_pmf(s, mean, dispersion: float):
    """Negative-binomial log-pmf parameterized by mean and dispersion.

    The variance is ``mean + mean**2 / dispersion``; as dispersion grows the
    distribution tightens toward a Poisson with the same mean.
    """
    s_arr = np.asarray(s, dtype=float)
    lam = np.asarray(mean, dtype=float)
    r = float(dispersion)
    if np.any(s_arr < 0):
        raise ValueError("size must be non-negative")
    if np.any(lam <= 0):
        raise ValueError("mean must be positive")
    if r <= 0:
        raise ValueError("dispersion must be positive")
    out = (
        gammaln(s_arr + r)
        - gammaln(r)
        - gammaln(s_arr + 1.0)
        - r * np.log1p(lam / r)
        + s_arr * (np.log(lam) - np.log(lam + r))
    )
    return out[()]


def gamma_log_pdf(x, shape: float, rate: float):
    """Gamma log-density with shape/rate parameterization.

    Returns -inf outside the (0, inf) support rather than raising.
    """
    if shape <= 0 or rate <= 0:
        raise ValueError("shape and rate must be positive")
    x_arr = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (
            shape * np.log(rate)
            - gammaln(shape)
            + (shape - 1.0) * np.log(x_arr)
            - rate * x_arr
        )
        out = np.where(x_arr > 0, out, -np.inf)
    return out[()]
