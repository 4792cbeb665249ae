"""Friedkin-Johnsen equilibria, costs, platform metrics, misreporting-cost bounds.

Each agent i holds an intrinsic opinion s_i and expresses an opinion z_i,
paying the quadratic cost

    c_i(z) = (1 - alpha_i) * sum_j w_ij (z_i - z_j)^2 + alpha_i (z_i - s_i)^2,

with susceptibility alpha_i in (0, 1). The simultaneous best response has the
unique fixed point z = B s where B = ((I - A) L + A)^{-1} A; equivalently
B = (L + diag(alpha~))^{-1} diag(alpha~) with alpha~_i = alpha_i / (1 - alpha_i),
which is the symmetric positive-definite form actually factored here.

Costs are always charged against the truthful intrinsic opinions, even when
the expressed equilibrium was reached from misreported ones; the OpinionProfile
role tag makes that explicit at the API boundary.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    DegenerateBaseline,
    DimensionMismatch,
    InputError,
    NoConvergence,
    OracleAssertionFailure,
    SharedAlphaRequired,
    SingularSusceptibility,
    SingularSystem,
)
from .graph import WeightedGraph, laplacian

__all__ = [
    "OpinionRole",
    "OpinionProfile",
    "SusceptibilityProfile",
    "ResponseMatrix",
    "MetricsReport",
    "response_matrix",
    "fj_equilibrium",
    "best_response_dynamics",
    "agent_cost",
    "total_cost",
    "metrics",
    "pom",
    "pom_upper_bound_shared",
    "pom_upper_bound_hetero",
    "q_matrix_oracle",
]

RESIDUAL_TOL = 1e-8


class OpinionRole(enum.Enum):
    INTRINSIC_TRUE = "intrinsic_true"
    INTRINSIC_REPORTED = "intrinsic_reported"
    EXPRESSED = "expressed"


@dataclass(frozen=True)
class OpinionProfile:
    """A real opinion vector over the nodes, tagged by its role in the game."""

    values: np.ndarray
    role: OpinionRole = OpinionRole.INTRINSIC_TRUE

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1:
            raise InputError("opinion profile must be a 1-d vector")
        if not np.all(np.isfinite(v)):
            raise InputError("opinion profile has non-finite entries")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def __len__(self):
        return len(self.values)


def as_opinions(x, role: OpinionRole | None = None, *, expect: OpinionRole | None = None) -> np.ndarray:
    """Extract a plain vector from an OpinionProfile or array-like.

    When a tagged profile is passed and ``expect`` is given, the roles must
    agree (mixing truthful and reported vectors is the classic bug here).
    """
    if isinstance(x, OpinionProfile):
        if expect is not None and x.role is not expect:
            raise InputError(
                f"expected opinions with role {expect.value}, got {x.role.value}")
        return x.values
    return np.asarray(x, dtype=float)


class SusceptibilityProfile:
    """Per-agent susceptibilities alpha_i in (0,1) and alpha~_i = alpha_i/(1-alpha_i)."""

    def __init__(self, alpha):
        a = np.atleast_1d(np.asarray(alpha, dtype=float)).copy()
        if a.ndim != 1:
            raise InputError("susceptibility must be a scalar or 1-d vector")
        if not np.all(np.isfinite(a)) or np.any(a <= 0.0) or np.any(a >= 1.0):
            raise SingularSusceptibility(
                "susceptibilities must lie strictly inside (0, 1)")
        a.flags.writeable = False
        self.alpha = a
        at = a / (1.0 - a)
        at.flags.writeable = False
        self.alpha_tilde = at

    @classmethod
    def shared(cls, alpha: float, n: int) -> "SusceptibilityProfile":
        return cls(np.full(n, float(alpha)))

    @property
    def n(self) -> int:
        return len(self.alpha)

    @property
    def is_shared(self) -> bool:
        return bool(np.all(self.alpha == self.alpha[0]))

    def matrix(self) -> np.ndarray:
        """A = diag(alpha)."""
        return np.diag(self.alpha)

    def expand_to(self, n: int) -> "SusceptibilityProfile":
        """Broadcast a scalar profile to n agents; validate length otherwise."""
        if self.n == n:
            return self
        if self.n == 1:
            return SusceptibilityProfile(np.full(n, self.alpha[0]))
        raise DimensionMismatch(
            f"susceptibility profile has {self.n} entries, graph has {n} nodes")


def _coerce_profile(profile, n: int) -> SusceptibilityProfile:
    if isinstance(profile, SusceptibilityProfile):
        return profile.expand_to(n)
    return SusceptibilityProfile(profile).expand_to(n)


@dataclass(frozen=True)
class ResponseMatrix:
    """B = ((I - A) L + A)^{-1} A plus the Cholesky factor it came from.

    The factorization of K = L + diag(alpha~) is kept so later solves reuse
    it. For a shared alpha, B is symmetric with eigenvalues
    alpha~ / (lambda_i + alpha~), so ||B||_2 = 1; for any profile B 1 = 1.
    """

    B: np.ndarray = field(repr=False)
    cho: tuple = field(repr=False)
    profile: SusceptibilityProfile = field(repr=False)
    n: int

    def solve_equilibrium(self, s) -> np.ndarray:
        """z solving (L + diag(alpha~)) z = alpha~ * s, via the stored factor."""
        s = np.asarray(s, dtype=float)
        return scipy.linalg.cho_solve(self.cho, self.profile.alpha_tilde * s)

    def apply_inverse(self, z) -> np.ndarray:
        """B^{-1} z = diag(1/alpha~) (L + diag(alpha~)) z without factoring."""
        z = np.asarray(z, dtype=float)
        K = self._K
        return (K @ z) / self.profile.alpha_tilde

    @property
    def _K(self) -> np.ndarray:
        c, lower = self.cho
        tri = np.tril(c) if lower else np.triu(c)
        return tri @ tri.T if lower else tri.T @ tri


def response_matrix(g: WeightedGraph, profile) -> ResponseMatrix:
    """Factor (I-A)L + A through its SPD form and solve for B (never inverted).

    Raises SingularSystem defensively if the factorization fails; for
    alpha in (0,1) and L PSD the system is positive definite and it cannot.
    """
    profile = _coerce_profile(profile, g.n)
    L = laplacian(g)
    at = profile.alpha_tilde
    K = L + np.diag(at)
    try:
        cho = scipy.linalg.cho_factor(K, lower=True)
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover - defensive
        raise SingularSystem(f"response system failed to factor: {exc}") from exc
    B = scipy.linalg.cho_solve(cho, np.diag(at))
    A = profile.matrix()
    M = (np.eye(g.n) - A) @ L + A
    resid = np.max(np.abs(M @ B - A)) if g.n else 0.0
    if resid > RESIDUAL_TOL * max(1.0, np.max(np.abs(A)) if g.n else 1.0):
        raise SingularSystem(f"response residual {resid:.3g} exceeds tolerance")
    B.flags.writeable = False
    return ResponseMatrix(B=B, cho=cho, profile=profile, n=g.n)


def fj_equilibrium(g: WeightedGraph, profile, s, *,
                   response: ResponseMatrix | None = None) -> OpinionProfile:
    """Expressed-opinion equilibrium z = B s for reported intrinsic opinions s."""
    s = as_opinions(s)
    if len(s) != g.n:
        raise DimensionMismatch(f"opinions have length {len(s)}, graph has {g.n} nodes")
    rm = response if response is not None else response_matrix(g, profile)
    z = rm.solve_equilibrium(s)
    resid = np.max(np.abs(rm._K @ z - rm.profile.alpha_tilde * s)) if g.n else 0.0
    scale = max(1.0, float(np.max(np.abs(s))) if g.n else 1.0)
    if resid > RESIDUAL_TOL * scale:  # pragma: no cover - defensive
        raise SingularSystem(f"equilibrium residual {resid:.3g} exceeds tolerance")
    return OpinionProfile(z, OpinionRole.EXPRESSED)


def best_response_dynamics(g: WeightedGraph, profile, s, z0=None,
                           tol: float = 1e-10,
                           max_iter: int = 100_000) -> tuple[OpinionProfile, int]:
    """Synchronous best-response iteration of the per-agent cost minimizer.

    Each sweep sets z_i to
    (alpha_i s_i + (1-alpha_i) sum_j w_ij z_j) / (alpha_i + (1-alpha_i) d_i),
    whose fixed point is exactly z = B s. The map is an infinity-norm
    contraction, so the iteration converges geometrically from any start.
    Returns the limit and the number of sweeps performed.
    """
    if tol <= 0:
        raise InputError("tolerance must be positive")
    profile = _coerce_profile(profile, g.n)
    s = as_opinions(s)
    if len(s) != g.n:
        raise DimensionMismatch(f"opinions have length {len(s)}, graph has {g.n} nodes")
    a = profile.alpha
    deg = g.degrees
    denom = a + (1.0 - a) * deg
    z = s.copy() if z0 is None else as_opinions(z0).copy()
    if len(z) != g.n:
        raise DimensionMismatch("z0 has the wrong length")
    for it in range(1, max_iter + 1):
        z_next = (a * s + (1.0 - a) * (g.W @ z)) / denom
        if np.max(np.abs(z_next - z)) <= tol:
            return OpinionProfile(z_next, OpinionRole.EXPRESSED), it
        z = z_next
    raise NoConvergence(f"best-response dynamics did not converge in {max_iter} sweeps")


def agent_cost(i: int, z, s_true, g: WeightedGraph, profile) -> float:
    """Quadratic cost of agent i at expressed opinions z, charged against true s."""
    profile = _coerce_profile(profile, g.n)
    z = as_opinions(z)
    s = as_opinions(s_true, expect=OpinionRole.INTRINSIC_TRUE)
    if len(z) != g.n or len(s) != g.n:
        raise DimensionMismatch("z and s must match the graph size")
    if not (0 <= i < g.n):
        raise InputError(f"node {i} out of range")
    ai = profile.alpha[i]
    neighbor_term = float(np.sum(g.W[i] * (z[i] - z) ** 2))
    return (1.0 - ai) * neighbor_term + ai * (z[i] - s[i]) ** 2


def total_cost(z, s_true, g: WeightedGraph, profile) -> float:
    """Sum of all agent costs. Every edge is paid by both endpoints."""
    profile = _coerce_profile(profile, g.n)
    z = as_opinions(z)
    s = as_opinions(s_true, expect=OpinionRole.INTRINSIC_TRUE)
    if len(z) != g.n or len(s) != g.n:
        raise DimensionMismatch("z and s must match the graph size")
    diff2 = (z[:, None] - z[None, :]) ** 2
    edge_part = float(np.sum((1.0 - profile.alpha)[:, None] * g.W * diff2))
    anchor_part = float(np.sum(profile.alpha * (z - s) ** 2))
    return edge_part + anchor_part


@dataclass(frozen=True)
class MetricsReport:
    """Platform-wide metrics of an expressed-opinion profile."""

    polarization: float
    disagreement: float
    total_cost: float
    mean_opinion: float


def metrics(z, s_true, g: WeightedGraph, profile) -> MetricsReport:
    """Polarization sum_i (z_i - mean)^2, disagreement z^T L z, total cost.

    Disagreement is the Laplacian quadratic form, i.e. each unordered edge
    counted once (the convention every spectral identity here relies on).
    """
    zv = as_opinions(z)
    if len(zv) != g.n:
        raise DimensionMismatch("z must match the graph size")
    zbar = float(np.mean(zv)) if g.n else 0.0
    pol = float(np.sum((zv - zbar) ** 2))
    L = laplacian(g)
    dis = max(0.0, float(zv @ L @ zv))
    return MetricsReport(
        polarization=pol,
        disagreement=dis,
        total_cost=total_cost(zv, s_true, g, profile),
        mean_opinion=zbar,
    )


def pom(z_corrupted, z_truthful, s_true, g: WeightedGraph, profile) -> float:
    """Price of Misreporting: total cost under manipulation over truthful cost."""
    c_base = total_cost(z_truthful, s_true, g, profile)
    if c_base <= 1e-14:
        raise DegenerateBaseline(
            "truthful equilibrium has ~zero cost (consensus); ratio undefined")
    return total_cost(z_corrupted, s_true, g, profile) / c_base


def pom_upper_bound_shared(lambda_n: float, alpha_tilde: float) -> float:
    """Worst-case all-deviate misreporting-cost bound for shared susceptibility.

    Evaluates (lambda_n + 4a~)(lambda_n + a~)^2 / a~^5. Loose for small a~;
    empirically it can be exceeded when alpha approaches 1 on sparse graphs,
    so treat it as a spectral yardstick rather than a hard guarantee.
    """
    if alpha_tilde <= 0:
        raise InputError("alpha_tilde must be positive")
    return (lambda_n + 4.0 * alpha_tilde) * (lambda_n + alpha_tilde) ** 2 / alpha_tilde ** 5


def pom_upper_bound_hetero(lambda_n: float, alpha_min: float, alpha_max: float) -> float:
    """Misreporting-cost bound for heterogeneous susceptibility, evaluated verbatim.

    Uses the cross-normalized a~_min = alpha_min/(1-alpha_max) and
    a~_max = alpha_max/(1-alpha_min); the denominator carries a~_min to the
    first power (it does not reduce to the shared-alpha bound's fifth power
    when alpha_min = alpha_max).
    """
    if not (0.0 < alpha_min <= alpha_max < 1.0):
        raise InputError("need 0 < alpha_min <= alpha_max < 1")
    at_min = alpha_min / (1.0 - alpha_max)
    at_max = alpha_max / (1.0 - alpha_min)
    lead = (1.0 - alpha_min) / (1.0 - alpha_max)
    return lead * (lambda_n + 4.0 * at_max) * (lambda_n + at_max) ** 2 / at_min


def _shared_alpha(g: WeightedGraph, alpha) -> tuple[SusceptibilityProfile, float]:
    if isinstance(alpha, SusceptibilityProfile):
        profile = alpha.expand_to(g.n)
        if not profile.is_shared:
            raise SharedAlphaRequired("this operation needs a shared susceptibility")
        return profile, float(profile.alpha[0])
    alpha = float(alpha)
    return SusceptibilityProfile.shared(alpha, g.n), alpha


def q_matrix_oracle(g: WeightedGraph, alpha, *, n_checks: int = 20,
                    tol: float = 1e-7) -> tuple[np.ndarray, np.ndarray]:
    """Quadratic form reproducing the truthful equilibrium cost, self-checked.

    For shared alpha the total cost at z = B s is the quadratic form
    C(z) = (1 - alpha) s^T Q s with

        Q = 2 B L B + alpha~ (I - 2B + B^2),

    the factor 2 on B L B because the edge part of the total cost charges
    each edge at both endpoints while z^T L z counts it once. Q shares the
    Laplacian eigenbasis with eigenvalues
    alpha~ lambda (lambda + 2 alpha~) / (lambda + alpha~)^2.

    The oracle verifies both facts numerically (cost identity on seeded
    random s, spectrum against the graph spectrum) and raises
    OracleAssertionFailure on disagreement, which would signal a bug in the
    cost or response-matrix code. Returns (Q, ascending eigenvalues).
    """
    profile, a = _shared_alpha(g, alpha)
    at = a / (1.0 - a)
    L = laplacian(g)
    rm = response_matrix(g, profile)
    B = rm.B
    eye = np.eye(g.n)
    Q = 2.0 * B @ L @ B + at * (eye - 2.0 * B + B @ B)
    qvals = np.linalg.eigvalsh(Q)

    lam = np.linalg.eigvalsh(L)
    predicted = np.sort(at * lam * (lam + 2.0 * at) / (lam + at) ** 2)
    if np.max(np.abs(qvals - predicted)) > tol * max(1.0, float(np.max(np.abs(qvals)))):
        raise OracleAssertionFailure("Q spectrum disagrees with the graph spectrum")

    rng = np.random.default_rng(0)
    for _ in range(n_checks):
        s = rng.standard_normal(g.n)
        z = rm.solve_equilibrium(s)
        direct = total_cost(z, s, g, profile)
        quad = (1.0 - a) * float(s @ Q @ s)
        if abs(direct - quad) > tol * max(1.0, abs(direct)):
            raise OracleAssertionFailure(
                f"cost identity violated: direct {direct!r} vs quadratic {quad!r}")
    return Q, qvals
