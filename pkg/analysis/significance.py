"""
Paired significance and equivalence tests used to compare benchmark arms.

- Wilcoxon signed-rank (zero differences dropped, tie and continuity
  corrected normal approximation)
- Fisher and Stouffer combination of per-seed p-values
- Benjamini-Hochberg FDR
- paired TOST against a +-delta margin
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np
from scipy import stats

from utils.errors import StatsInputError

logger = logging.getLogger(__name__)

MIN_WILCOXON_PAIRS = 6


@dataclass
class PairedSamples:
    """Two measurements per query, paired by index"""
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=np.float64).reshape(-1)
        self.b = np.asarray(self.b, dtype=np.float64).reshape(-1)
        if len(self.a) != len(self.b):
            raise StatsInputError(f"paired samples differ in length: {len(self.a)} vs {len(self.b)}")
        if np.isnan(self.a).any() or np.isnan(self.b).any():
            raise StatsInputError("paired samples contain missing values")

    @property
    def differences(self) -> np.ndarray:
        return self.a - self.b


@dataclass
class TestResult:
    """Outcome of one statistical test"""
    statistic: float
    p_value: float
    method: str
    z: Optional[float] = None
    direction: int = 0
    degenerate: bool = False
    n: int = 0
    equivalent: Optional[bool] = None
    details: Dict[str, float] = field(default_factory=dict)

    # keep pytest from collecting this class
    __test__ = False


def _direction(values: np.ndarray) -> int:
    mean = float(np.mean(values)) if len(values) else 0.0
    return int(np.sign(mean))


def wilcoxon_signed_rank(samples: PairedSamples, two_sided: bool = True) -> TestResult:
    """Paired Wilcoxon signed-rank test on a - b"""
    diffs = samples.differences
    nonzero = diffs[diffs != 0]
    if len(nonzero) == 0:
        return TestResult(0.0, 1.0, "wilcoxon", z=0.0, degenerate=True, n=0)
    if len(nonzero) < MIN_WILCOXON_PAIRS:
        raise StatsInputError(f"Wilcoxon needs at least {MIN_WILCOXON_PAIRS} nonzero differences, "
                              f"got {len(nonzero)}")

    alternative = "two-sided" if two_sided else "greater"
    result = stats.wilcoxon(diffs, zero_method="wilcox", correction=True, alternative=alternative,
                            method="approx")
    z = getattr(result, "zstatistic", None)
    return TestResult(float(result.statistic), float(np.clip(result.pvalue, 0.0, 1.0)), "wilcoxon",
                      z=None if z is None else float(z), direction=_direction(nonzero), n=len(nonzero))


def _checked_p_values(p_values: Sequence[float], label: str) -> np.ndarray:
    p = np.asarray(p_values, dtype=np.float64).reshape(-1)
    if len(p) == 0:
        raise StatsInputError(f"{label} needs at least one p-value")
    if np.isnan(p).any() or (p < 0).any() or (p > 1).any():
        raise StatsInputError(f"{label} p-values must lie in [0, 1]")
    if (p == 0).any():
        logger.warning(f"{label}: clamping {int((p == 0).sum())} zero p-value(s) to the smallest positive float")
        p = np.where(p == 0, np.finfo(np.float64).tiny, p)
    return p


def combine_fisher(p_values: Sequence[float]) -> TestResult:
    """chi2 = -2 sum ln p on 2k degrees of freedom"""
    p = _checked_p_values(p_values, "Fisher")
    statistic = float(-2.0 * np.sum(np.log(p)))
    p_combined = float(stats.chi2.sf(statistic, 2 * len(p)))
    return TestResult(statistic, min(max(p_combined, 0.0), 1.0), "fisher", n=len(p))


def combine_stouffer(p_values: Sequence[float], directions: Optional[Sequence[float]] = None) -> TestResult:
    """Signed z per two-sided p, combined z = sum z / sqrt(k)"""
    p = _checked_p_values(p_values, "Stouffer")
    if directions is None:
        signs = np.ones(len(p))
    else:
        signs = np.sign(np.asarray(directions, dtype=np.float64).reshape(-1))
        if len(signs) != len(p):
            raise StatsInputError("Stouffer needs one direction per p-value")
        signs[signs == 0] = 1.0
    z_values = signs * stats.norm.isf(p / 2.0)
    z = float(np.sum(z_values) / np.sqrt(len(p)))
    p_combined = float(2.0 * stats.norm.sf(abs(z)))
    return TestResult(z, min(max(p_combined, 0.0), 1.0), "stouffer", z=z, direction=int(np.sign(z)), n=len(p))


def bh_fdr(p_values: Sequence[float], q: float = 0.05) -> np.ndarray:
    """Benjamini-Hochberg step-up rejection flags at rate q"""
    if not 0 < q < 1:
        raise StatsInputError(f"FDR rate q must be in (0, 1), got {q}")
    p = np.asarray(p_values, dtype=np.float64).reshape(-1)
    if len(p) == 0:
        return np.zeros(0, dtype=bool)
    if np.isnan(p).any() or (p < 0).any() or (p > 1).any():
        raise StatsInputError("FDR p-values must lie in [0, 1]")
    adjusted = stats.false_discovery_control(p, method="bh")
    return adjusted <= q


def tost_paired(differences: Sequence[float], delta: float, alpha: float = 0.05) -> TestResult:
    """Two one-sided t-tests of mean difference against -delta and +delta"""
    d = np.asarray(differences, dtype=np.float64).reshape(-1)
    if len(d) < 2:
        raise StatsInputError(f"TOST needs at least 2 paired differences, got {len(d)}")
    if not delta > 0:
        raise StatsInputError(f"equivalence margin must be positive, got {delta}")
    mean = float(np.mean(d))

    if np.ptp(d) == 0:
        inside = -delta < mean < delta
        p = 0.0 if inside else 1.0
        return TestResult(float("inf") if inside else 0.0, p, "tost", direction=_direction(d), degenerate=True,
                          n=len(d), equivalent=inside,
                          details={"p_lower": p, "p_upper": p, "mean_diff": mean})

    lower = stats.ttest_1samp(d, -delta, alternative="greater")
    upper = stats.ttest_1samp(d, delta, alternative="less")
    p_lower, p_upper = float(lower.pvalue), float(upper.pvalue)
    equivalent = bool(p_lower < alpha and p_upper < alpha)
    # the reported statistic is the binding one-sided test
    binding = lower if p_lower >= p_upper else upper
    return TestResult(float(binding.statistic), max(p_lower, p_upper), "tost", direction=_direction(d), n=len(d),
                      equivalent=equivalent, details={"p_lower": p_lower, "p_upper": p_upper, "mean_diff": mean})
