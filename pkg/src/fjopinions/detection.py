"""Platform-side manipulation detection from an observed equilibrium.

The map s' -> z' = B s' is invertible, so with (estimates of) the network
and susceptibilities the platform can reconstruct the reported intrinsic
opinions from what it observes:

    s'^ = A^{-1} ((I - A) L + A) z' = z' + L z' / alpha~     (entrywise).

Under no manipulation s'^ equals the true intrinsic opinions, so when those
follow a known-mean distribution a one-sample t-test on the entries of s'^
flags manipulation. For +/-1-valued opinion populations the Gaussian model
is wrong and a sign-binned chi-square goodness-of-fit test replaces it.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .engine import (
    OpinionProfile,
    OpinionRole,
    SusceptibilityProfile,
    _coerce_profile,
    as_opinions,
)
from .errors import (
    DimensionMismatch,
    EmptySample,
    InputError,
    SingularSusceptibility,
)
from .graph import WeightedGraph, laplacian
from .stats import chi2_sf_1dof, student_t_two_sided_p

__all__ = [
    "Verdict",
    "TTestResult",
    "DetectionOutcome",
    "reconstruct_intrinsic",
    "t_test_one_sample",
    "detect_manipulation",
    "chi_square_sign_test",
]


class Verdict(enum.Enum):
    MANIPULATION = "Manipulation"
    NO_MANIPULATION = "NoManipulation"


class TTestResult(NamedTuple):
    statistic: float
    p_value: float
    dof: int


@dataclass(frozen=True)
class DetectionOutcome:
    """Result of the reconstruct-then-test detection pipeline."""

    verdict: Verdict
    t_statistic: float
    p_value: float
    dof: int
    reconstructed: OpinionProfile
    significance: float


def reconstruct_intrinsic(g_hat: WeightedGraph, a_hat, z_prime) -> OpinionProfile:
    """Invert the equilibrium map: s'^ = A^{-1}((I - A) L + A) z'.

    With the exact network and susceptibilities this recovers the reported
    intrinsic opinions exactly (it is the inverse of z' = B s'); with
    estimates it reconstructs under the estimated model.
    """
    try:
        profile = _coerce_profile(a_hat, g_hat.n)
    except (InputError, SingularSusceptibility) as exc:
        raise SingularSusceptibility(str(exc)) from exc
    z = as_opinions(z_prime)
    if len(z) != g_hat.n:
        raise DimensionMismatch("z' must match the graph size")
    L = laplacian(g_hat)
    s_hat = z + (L @ z) / profile.alpha_tilde
    return OpinionProfile(s_hat, OpinionRole.INTRINSIC_REPORTED)


def t_test_one_sample(data, mu0: float) -> TTestResult:
    """One-sample two-sided t-test of mean(data) against mu0.

    t = (mean - mu0) / (sd / sqrt(n)) with the ddof=1 sample standard
    deviation and dof = n - 1. Degenerate samples are reported rather than
    raised: sd == 0 yields p = 0 (constant sample away from mu0, infinite t)
    or p = 1 (constant sample exactly at mu0).
    """
    x = np.asarray(data, dtype=float)
    if x.ndim != 1 or len(x) < 2:
        raise InputError("t-test needs a 1-d sample with at least 2 entries")
    n = len(x)
    mean = float(np.mean(x))
    sd = float(np.std(x, ddof=1))
    dof = n - 1
    if sd == 0.0:
        if mean == mu0:
            return TTestResult(0.0, 1.0, dof)
        return TTestResult(math.copysign(math.inf, mean - mu0), 0.0, dof)
    t = (mean - mu0) / (sd / math.sqrt(n))
    return TTestResult(t, student_t_two_sided_p(t, dof), dof)


def detect_manipulation(g_hat: WeightedGraph, a_hat, z_prime, mu0: float,
                        significance: float = 0.05) -> DetectionOutcome:
    """Reconstruct reported intrinsic opinions and t-test them against mu0.

    Verdict is Manipulation exactly when p_value < significance.
    """
    if not (0.0 <= significance <= 1.0):
        raise InputError("significance level must lie in [0, 1]")
    reconstructed = reconstruct_intrinsic(g_hat, a_hat, z_prime)
    t, p, dof = t_test_one_sample(reconstructed.values, mu0)
    verdict = Verdict.MANIPULATION if p < significance else Verdict.NO_MANIPULATION
    return DetectionOutcome(
        verdict=verdict,
        t_statistic=t,
        p_value=p,
        dof=dof,
        reconstructed=reconstructed,
        significance=significance,
    )


def chi_square_sign_test(data, p0: float) -> tuple[float, float]:
    """Sign-binned goodness-of-fit test for +/-1-style opinion populations.

    Entries are binned by sign (zero counts as +), compared against expected
    counts (n*p0, n*(1-p0)) with a one-degree-of-freedom chi-square statistic.
    Returns (chi2, p_value).
    """
    x = np.asarray(data, dtype=float)
    if x.size == 0:
        raise EmptySample("chi-square sign test needs data")
    if not (0.0 < p0 < 1.0):
        raise InputError("p0 must lie strictly inside (0, 1)")
    n = x.size
    pos = int(np.sum(x >= 0))
    neg = n - pos
    exp_pos = n * p0
    exp_neg = n * (1.0 - p0)
    chi2 = (pos - exp_pos) ** 2 / exp_pos + (neg - exp_neg) ** 2 / exp_neg
    return float(chi2), chi2_sf_1dof(float(chi2))
