"""
Discrete demand distributions.

Every distribution is a dense probability vector indexed by the demand value
0..max. Tails beyond the truncation point are folded into the last kept value
so total mass stays exactly one.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
from scipy import stats

from ..utils import config
from .errors import InstanceValidationError

logger = logging.getLogger(__name__)

MASS_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class DemandDistribution:
    """Finite pmf over non-negative integer demands."""
    pmf: np.ndarray
    kind: str = "discrete"
    params: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        pmf = np.asarray(self.pmf, dtype=float)
        if pmf.ndim != 1 or pmf.size == 0:
            raise InstanceValidationError("Demand pmf must be a non-empty vector")
        if np.any(pmf < 0):
            raise InstanceValidationError("Demand pmf has negative mass")
        total = pmf.sum()
        if total <= 0:
            raise InstanceValidationError("Demand distribution has zero mass")
        if abs(total - 1.0) > MASS_TOL:
            raise InstanceValidationError(f"Demand masses sum to {total}, expected 1")
        # trim trailing zeros so max_demand is the true support maximum
        last = int(np.flatnonzero(pmf)[-1])
        pmf = pmf[: last + 1].copy()
        pmf.setflags(write=False)
        object.__setattr__(self, "pmf", pmf)

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.pmf)

    @property
    def mass(self) -> np.ndarray:
        return self.pmf[self.support]

    @property
    def max_demand(self) -> int:
        return self.pmf.size - 1

    @property
    def mean(self) -> float:
        """Nominal mean: the model parameter for Poisson, the pmf mean otherwise."""
        if self.kind == "poisson":
            return float(self.params["lambda"])
        return self.pmf_mean

    @property
    def pmf_mean(self) -> float:
        return float(np.dot(np.arange(self.pmf.size), self.pmf))

    def cdf(self, value: int) -> float:
        if value < 0:
            return 0.0
        return float(min(1.0, self.pmf[: value + 1].sum()))

    def same_law(self, other: "DemandDistribution", tol: float = 1e-12) -> bool:
        """True when both pmfs coincide point by point."""
        if self.pmf.size != other.pmf.size:
            return False
        return bool(np.allclose(self.pmf, other.pmf, rtol=0.0, atol=tol))

    def is_deterministic(self) -> bool:
        return self.support.size == 1

    def __repr__(self) -> str:
        return f"DemandDistribution(kind={self.kind!r}, params={self.params}, support=0..{self.max_demand})"


def _fold_tail(pmf: np.ndarray, tail_eps: float) -> np.ndarray:
    """Cut the pmf at the first value whose upper tail drops below tail_eps."""
    pmf = np.clip(np.asarray(pmf, dtype=float), 0.0, None)
    pmf = pmf / pmf.sum()
    tail_after = pmf[::-1].cumsum()[::-1] - pmf
    below = np.flatnonzero(tail_after < tail_eps)
    cut = int(below[0]) if below.size else pmf.size - 1
    kept = pmf[: cut + 1].copy()
    kept[-1] = max(0.0, 1.0 - kept[:-1].sum())
    return kept


def make_poisson(lam: float, tail_eps: Optional[float] = None, cap: Optional[int] = None) -> DemandDistribution:
    """Poisson(lam) truncated at the first value with upper tail mass below tail_eps.

    With cap, the law is conditioned on the demand not exceeding cap (masses
    above it are dropped and the rest renormalized). A cap at or beyond the
    tail cut leaves the plain truncated Poisson.
    """
    tail_eps = config.TAIL_EPS if tail_eps is None else tail_eps
    if lam <= 0:
        raise InstanceValidationError(f"Poisson rate must be positive, got {lam}")
    if not 0.0 < tail_eps < 1.0:
        raise InstanceValidationError(f"tail_eps must lie in (0, 1), got {tail_eps}")
    if cap is not None and cap < 0:
        raise InstanceValidationError(f"Poisson cap must be non-negative, got {cap}")

    cut = max(0, int(stats.poisson.isf(tail_eps, lam)))
    while stats.poisson.sf(cut, lam) >= tail_eps:
        cut += 1
    while cut > 0 and stats.poisson.sf(cut - 1, lam) < tail_eps:
        cut -= 1

    if cap is not None and cap < cut:
        pmf = stats.poisson.pmf(np.arange(cap + 1), lam)
        pmf = pmf / pmf.sum()
        return DemandDistribution(
            pmf=pmf, kind="capped-poisson", params={"lambda": float(lam), "cap": int(cap)}
        )

    pmf = stats.poisson.pmf(np.arange(cut + 1), lam)
    pmf[-1] = max(0.0, 1.0 - pmf[:-1].sum())
    return DemandDistribution(pmf=pmf, kind="poisson", params={"lambda": float(lam)})


def make_triangular(center: int, halfwidth: int) -> DemandDistribution:
    """Symmetric triangular pmf on center-halfwidth..center+halfwidth."""
    if halfwidth < 0:
        raise InstanceValidationError(f"halfwidth must be non-negative, got {halfwidth}")
    if center - halfwidth < 0:
        raise InstanceValidationError(
            f"Triangular demand with center {center} and halfwidth {halfwidth} has negative support"
        )
    offsets = np.arange(-halfwidth, halfwidth + 1)
    weights = (halfwidth + 1 - np.abs(offsets)).astype(float)
    pmf = np.zeros(center + halfwidth + 1)
    pmf[center + offsets] = weights / weights.sum()
    return DemandDistribution(
        pmf=pmf, kind="triangular", params={"center": int(center), "halfwidth": int(halfwidth)}
    )


def make_discrete(support: Sequence[int], mass: Sequence[float]) -> DemandDistribution:
    """Explicit pmf; zero-mass points are dropped, masses are renormalized within 1e-6."""
    if len(support) != len(mass) or len(support) == 0:
        raise InstanceValidationError("support and mass must be non-empty and of equal length")
    values = [int(s) for s in support]
    if any(v != s for v, s in zip(values, support)):
        raise InstanceValidationError("Demand support must be integer")
    if any(v < 0 for v in values):
        raise InstanceValidationError("Demand support must be non-negative")
    if len(set(values)) != len(values):
        raise InstanceValidationError("Demand support has duplicate values")
    weights = np.asarray(mass, dtype=float)
    if np.any(weights < 0):
        raise InstanceValidationError("Demand masses must be non-negative")
    total = weights.sum()
    if total <= 0:
        raise InstanceValidationError("Demand distribution has zero mass")
    if abs(total - 1.0) > 1e-6:
        raise InstanceValidationError(f"Demand masses sum to {total}, expected 1")

    pmf = np.zeros(max(values) + 1)
    pmf[values] = weights / total
    return DemandDistribution(pmf=pmf, kind="discrete")


def make_deterministic(value: int) -> DemandDistribution:
    return make_discrete([value], [1.0])


def make_bernoulli(p: float) -> DemandDistribution:
    return make_discrete([0, 1], [1.0 - p, p])


def convolve(
    a: DemandDistribution, b: DemandDistribution, tail_eps: Optional[float] = None
) -> DemandDistribution:
    """Distribution of the independent sum a + b, truncated with the tail folded."""
    tail_eps = config.TAIL_EPS if tail_eps is None else tail_eps
    pmf = _fold_tail(np.convolve(a.pmf, b.pmf), tail_eps)
    if a.kind == "poisson" and b.kind == "poisson":
        return DemandDistribution(
            pmf=pmf, kind="poisson", params={"lambda": a.mean + b.mean}
        )
    return DemandDistribution(pmf=pmf, kind="convolution")


def convolve_all(
    dists: Iterable[DemandDistribution], tail_eps: Optional[float] = None
) -> DemandDistribution:
    total = make_deterministic(0)
    for dist in dists:
        total = convolve(total, dist, tail_eps)
    return total


def exceed_probability(partial: DemandDistribution, threshold: int) -> float:
    """P[X > threshold]."""
    if threshold < 0:
        raise ValueError(f"threshold must be non-negative, got {threshold}")
    if threshold >= partial.max_demand:
        return 0.0
    return float(min(1.0, max(0.0, partial.pmf[threshold + 1:].sum())))


class PartialSumTable:
    """Pmfs of the prefix sums of a sequence of independent demands.

    Row j holds the law of the first j demands; row 0 is the point mass at zero.
    """

    def __init__(self, dists: Sequence[DemandDistribution], tail_eps: Optional[float] = None):
        self.tail_eps = config.TAIL_EPS if tail_eps is None else tail_eps
        rows: List[DemandDistribution] = [make_deterministic(0)]
        for dist in dists:
            rows.append(convolve(rows[-1], dist, self.tail_eps))
        self.rows = rows

    def __len__(self) -> int:
        return len(self.rows)

    def __getitem__(self, j: int) -> DemandDistribution:
        return self.rows[j]

    def cdf(self, j: int, value: int) -> float:
        return self.rows[j].cdf(value)

    def means(self) -> List[float]:
        return [row.pmf_mean for row in self.rows]
