"""Degree distributions for LT encoding.

A degree distribution assigns probability Omega_d to each encoded-symbol
degree d in [1, k].  Two concrete constructions are provided: the
Robust-Soliton distribution (ideal soliton plus spike/tail component) and
the fixed 10-term distribution used by Raptor codes' inner LT code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

# Coefficients of the Raptor inner-LT generator polynomial, degree -> weight.
# The printed weights sum to ~1.00001; they are re-normalized on construction.
RAPTOR_COEFFS = {
    1: 0.00797,
    2: 0.49357,
    3: 0.16622,
    4: 0.07265,
    5: 0.08256,
    8: 0.05606,
    9: 0.03723,
    19: 0.05559,
    65: 0.02502,
    66: 0.00314,
}

NORMALIZATION_TOL = 1e-9


@dataclass(frozen=True)
class DegreeDistribution:
    """Probability law over degrees 1..k with inverse-CDF sampling support.

    probs[d-1] is the probability that an encoded symbol has degree d;
    cumulative holds the prefix sums, clamped so cumulative[-1] == 1.0.
    Instances are immutable and safe to share across parallel trials.
    """

    k: int
    probs: np.ndarray
    cumulative: np.ndarray

    @classmethod
    def from_weights(cls, k: int, weights) -> "DegreeDistribution":
        """Normalize a non-negative weight vector of length k into a distribution."""
        if k < 1:
            raise ParameterError(f"k must be >= 1, got {k}")
        w = np.asarray(weights, dtype=float)
        if w.shape != (k,):
            raise ParameterError(f"expected {k} weights, got shape {w.shape}")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ParameterError("weights must be finite and non-negative")
        total = w.sum()
        if total <= 0:
            raise ParameterError("weights sum to zero")
        probs = w / total
        cumulative = np.cumsum(probs)
        cumulative[-1] = 1.0
        probs.flags.writeable = False
        cumulative.flags.writeable = False
        return cls(k=k, probs=probs, cumulative=cumulative)

    def mean_degree(self) -> float:
        return float(np.dot(np.arange(1, self.k + 1), self.probs))


def robust_soliton(k: int, c: float, delta: float) -> DegreeDistribution:
    """Robust-Soliton distribution: ideal soliton plus the spike/tail component.

    The ideal part is rho(1) = 1/k, rho(d) = 1/(d(d-1)) for d >= 2.  The
    robust part tau puts R/(dk) on d < ceil(k/R), a spike of
    R*ln(R/delta)/k at d = ceil(k/R), and zero above, where
    R = c * ln(k/delta) * sqrt(k).  The sum is normalized to 1.
    """
    if k < 2:
        raise ParameterError(f"robust_soliton requires k >= 2, got {k}")
    if c <= 0:
        raise ParameterError(f"c must be positive, got {c}")
    if not 0 < delta < 1:
        raise ParameterError(f"delta must be in (0,1), got {delta}")

    R = c * math.log(k / delta) * math.sqrt(k)
    # Spike index uses ceiling; if it lands beyond k (tiny R) the spike and
    # everything above k are truncated and the rest re-normalized.
    spike = math.ceil(k / R)

    w = np.zeros(k)
    w[0] = 1.0 / k
    d = np.arange(2, k + 1, dtype=float)
    w[1:] = 1.0 / (d * (d - 1.0))

    below = min(spike, k + 1)
    tau_range = np.arange(1, below, dtype=float)
    w[: below - 1] += R / (tau_range * k)
    if spike <= k:
        w[spike - 1] += R * math.log(R / delta) / k

    return DegreeDistribution.from_weights(k, w)


def raptor_distribution(k: int = 1000) -> DegreeDistribution:
    """The fixed 10-term Raptor inner-LT distribution, embedded in block size k.

    Support is {1,2,3,4,5,8,9,19,65,66}; k must be at least 66 so the whole
    support fits.
    """
    if k < max(RAPTOR_COEFFS):
        raise ParameterError(f"k must be >= {max(RAPTOR_COEFFS)}, got {k}")
    w = np.zeros(k)
    for d, coeff in RAPTOR_COEFFS.items():
        w[d - 1] = coeff
    return DegreeDistribution.from_weights(k, w)


def point_mass(k: int, degree: int) -> DegreeDistribution:
    """Degenerate distribution that always samples `degree`."""
    if not 1 <= degree <= k:
        raise ParameterError(f"degree must be in [1,{k}], got {degree}")
    w = np.zeros(k)
    w[degree - 1] = 1.0
    return DegreeDistribution.from_weights(k, w)


def sample_degree(dist: DegreeDistribution, rng: np.random.Generator) -> int:
    """Draw a degree by inverse-CDF lookup on the cumulative vector."""
    u = rng.random()
    d = int(np.searchsorted(dist.cumulative, u, side="right")) + 1
    return min(d, dist.k)


def from_config(spec: dict, k: int) -> DegreeDistribution:
    """Build a distribution from a config mapping, e.g.
    {"kind": "robust_soliton", "c": 0.05, "delta": 0.01} or {"kind": "raptor"}.
    """
    kind = spec.get("kind")
    if kind == "robust_soliton":
        return robust_soliton(k, c=spec["c"], delta=spec["delta"])
    if kind == "raptor":
        return raptor_distribution(k)
    if kind == "point_mass":
        return point_mass(k, degree=spec["degree"])
    raise ParameterError(f"unknown distribution kind: {kind!r}")
