from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist

Z99 = NormalDist().inv_cdf(0.995)


@dataclass(frozen=True)
class Estimate:
    """Bernoulli frequency with a 99% normal-approximation half-width.

    For exact results ``trials`` is None and ``half_width`` is 0.
    """

    value: float
    half_width: float = 0.0
    trials: int | None = None

    @property
    def exact(self) -> bool:
        return self.trials is None

    @property
    def low(self) -> float:
        return float(self.value) - self.half_width

    @property
    def high(self) -> float:
        return float(self.value) + self.half_width

    def wilson(self, z: float = Z99) -> tuple[float, float]:
        if self.trials is None:
            v = float(self.value)
            return v, v
        n = self.trials
        ph = float(self.value)
        denom = 1 + z * z / n
        centre = (ph + z * z / (2 * n)) / denom
        spread = z * math.sqrt(ph * (1 - ph) / n + z * z / (4 * n * n)) / denom
        return centre - spread, centre + spread

    def as_dict(self) -> dict:
        return {"value": float(self.value), "half_width": self.half_width, "trials": self.trials}


def bernoulli_estimate(successes: int, trials: int, z: float = Z99) -> Estimate:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    ph = successes / trials
    return Estimate(ph, z * math.sqrt(ph * (1 - ph) / trials), trials)


def mean_estimate(values, z: float = Z99) -> Estimate:
    """Sample mean with a normal half-width (for non-Bernoulli quantities)."""
    import numpy as np

    values = np.asarray(values, dtype=float)
    n = len(values)
    if n < 1:
        raise ValueError("need at least one value")
    sd = values.std(ddof=1) if n > 1 else 0.0
    return Estimate(float(values.mean()), float(z * sd / math.sqrt(n)), n)


def within_sigmas(observed: float, expected: float, trials: int, k: float = 3.0) -> bool:
    """True if a Bernoulli frequency is within ``k`` standard errors of ``expected``."""
    expected = float(expected)
    sigma = math.sqrt(max(expected * (1 - expected), 0.0) / trials)
    if sigma == 0.0:
        return observed == expected
    return abs(observed - expected) <= k * sigma
