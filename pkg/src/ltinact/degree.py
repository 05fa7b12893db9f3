"""Output degree distributions: validation, presets, file loading, sampling."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DegreeBelowOne,
    DistFileError,
    NonPositiveProbability,
    NonUnitMass,
    UnknownPreset,
)

MASS_TOLERANCE = 1e-9

# Standardized LT degree distributions as printed, keyed by preset name.  The
# second variant's coefficients total 1.0008; preset() rescales it to unit
# mass so the probability recursions stay well-posed.
PRESET_COEFFICIENTS: dict[str, dict[int, float]] = {
    "mbms-sec3": {
        1: 0.0098,
        2: 0.4590,
        3: 0.2110,
        4: 0.1134,
        10: 0.1113,
        11: 0.0799,
        40: 0.0156,
    },
    "mbms-sec4": {
        1: 0.0098,
        2: 0.4600,
        3: 0.2110,
        4: 0.1134,
        10: 0.1110,
        11: 0.0800,
        40: 0.0156,
    },
}


@dataclass(frozen=True)
class DegreeDistribution:
    """Sparse PMF over output degrees 1..d_max.

    Immutable after construction; safe to share across trial workers.
    """

    probs: dict[int, float]
    name: str = field(default="custom", compare=False)

    @property
    def d_max(self) -> int:
        return max(self.probs)

    @property
    def omega1(self) -> float:
        """Probability of degree 1 (zero if absent)."""
        return self.probs.get(1, 0.0)

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.array(sorted(self.probs), dtype=np.int64)

    @cached_property
    def weights(self) -> np.ndarray:
        return np.array([self.probs[int(d)] for d in self.degrees], dtype=np.float64)

    @cached_property
    def cumulative(self) -> np.ndarray:
        """Inverse-CDF table; last entry forced to 1.0 so sampling never overruns."""
        cum = np.cumsum(self.weights)
        cum[-1] = max(cum[-1], 1.0)
        return cum

    def mean_degree(self) -> float:
        return float(np.dot(self.degrees, self.weights))


def validate(raw: Iterable[tuple[int, float]], name: str = "custom") -> DegreeDistribution:
    """Check a (degree, probability) list and build a distribution.

    Rejects rather than renormalizes: a silently rescaled table would mask
    transcription errors in hand-entered coefficients.
    """
    pairs = list(raw)
    if not pairs:
        raise DegreeBelowOne("empty distribution")
    probs: dict[int, float] = {}
    for d, p in pairs:
        d = int(d)
        if d < 1:
            raise DegreeBelowOne(f"degree {d} < 1")
        if p <= 0:
            raise NonPositiveProbability(f"degree {d} has probability {p}")
        probs[d] = probs.get(d, 0.0) + float(p)
    total = sum(probs.values())
    if abs(total - 1.0) > MASS_TOLERANCE:
        raise NonUnitMass(f"probabilities sum to {total!r}, not 1")
    return DegreeDistribution(probs=dict(sorted(probs.items())), name=name)


def preset(name: str) -> DegreeDistribution:
    """Return a named preset distribution (rescaled to unit mass if needed)."""
    try:
        coeffs = PRESET_COEFFICIENTS[name]
    except KeyError:
        raise UnknownPreset(
            f"unknown preset {name!r}; choices: {sorted(PRESET_COEFFICIENTS)}"
        ) from None
    total = sum(coeffs.values())
    if abs(total - 1.0) > MASS_TOLERANCE:
        coeffs = {d: p / total for d, p in coeffs.items()}
    return validate(coeffs.items(), name=name)


def load_distribution(path: str | Path) -> DegreeDistribution:
    """Load `degree probability` lines from a text file; `#` starts a comment."""
    path = Path(path)
    pairs: list[tuple[int, float]] = []
    with path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            tokens = text.split()
            if len(tokens) != 2:
                raise DistFileError(
                    f"{path}:{lineno}: expected 'degree probability', got {line.strip()!r}"
                )
            try:
                d = int(tokens[0])
                p = float(tokens[1])
            except ValueError:
                raise DistFileError(
                    f"{path}:{lineno}: could not parse {line.strip()!r}"
                ) from None
            pairs.append((d, p))
    if not pairs:
        raise DistFileError(f"{path}: no degree entries found")
    return validate(pairs, name=str(path))


def resolve_distribution(spec: str) -> DegreeDistribution:
    """Interpret a CLI-style spec: a preset name or a path to a table file."""
    if spec in PRESET_COEFFICIENTS:
        return preset(spec)
    path = Path(spec)
    if not path.exists():
        raise FileNotFoundError(f"no such preset or distribution file: {spec}")
    return load_distribution(path)


def sample_degree(dist: DegreeDistribution, rng: np.random.Generator) -> int:
    """Draw one degree by inverse CDF over the precomputed cumulative table."""
    x = rng.random()
    idx = int(np.searchsorted(dist.cumulative, x, side="right"))
    return int(dist.degrees[min(idx, len(dist.degrees) - 1)])


def sample_degrees(
    dist: DegreeDistribution, n: int, rng: np.random.Generator
) -> np.ndarray:
    """Vectorized inverse-CDF sampling of n degrees."""
    xs = rng.random(n)
    idx = np.minimum(
        np.searchsorted(dist.cumulative, xs, side="right"), len(dist.degrees) - 1
    )
    return dist.degrees[idx].astype(np.int64)
