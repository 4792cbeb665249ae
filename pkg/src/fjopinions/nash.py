"""Nash equilibria of the misreporting meta-game.

A set S of strategic agents reports fictitious intrinsic opinions; everyone
then settles into the ordinary expressed-opinion equilibrium z' = B s'.
Agent i in S picks s'_i to minimize its own quadratic cost at z', charged
against its true s_i. The first-order conditions are linear in s', so the
equilibria (all of which are pure) solve

    e_i^T [ (1-alpha_i) B^T L_i B + alpha_i B^T e_i e_i^T B ] s' = alpha_i B_ii s_i
                                                                   for i in S,
    s'_j = s_j                                                     for j not in S,

with L_i the Laplacian restricted to edges at i. Rows are assembled as
vector-matrix products from a cached B (never materializing the n x n
middle matrices), reduced to an |S| x |S| system, and solved directly;
every returned equilibrium is re-verified through its analytic gradient
with a finite-difference cross-check.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .engine import (
    OpinionProfile,
    OpinionRole,
    ResponseMatrix,
    SusceptibilityProfile,
    _coerce_profile,
    _shared_alpha,
    agent_cost,
    as_opinions,
    response_matrix,
)
from .errors import (
    DegenerateCoefficient,
    DimensionMismatch,
    GradientMismatch,
    InputError,
    NoConvergence,
    NoNashEquilibrium,
)
from .graph import WeightedGraph

__all__ = [
    "StrategicSet",
    "Uniqueness",
    "NashSystem",
    "StrategicOutcome",
    "build_system",
    "solve_nash",
    "truthful_outcome",
    "closed_form_all_deviate",
    "verify_nash",
    "cost_gradient",
    "best_response",
    "iterate_best_responses",
]

CONDITION_THRESHOLD = 1e12
LSTSQ_RESIDUAL_TOL = 1e-6


@dataclass(frozen=True)
class StrategicSet:
    """A sorted set of deviating agents."""

    members: tuple[int, ...]

    @classmethod
    def of(cls, indices, n: int | None = None) -> "StrategicSet":
        members = tuple(sorted(int(i) for i in indices))
        if len(set(members)) != len(members):
            raise InputError("strategic set has duplicate members")
        if members and members[0] < 0:
            raise InputError("strategic set has negative indices")
        if n is not None and members and members[-1] >= n:
            raise InputError(f"strategic set member {members[-1]} out of range for n={n}")
        return cls(members)

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, i):
        return i in self.members

    def complement(self, n: int) -> np.ndarray:
        mask = np.ones(n, dtype=bool)
        mask[list(self.members)] = False
        return np.nonzero(mask)[0]


class Uniqueness(enum.Enum):
    UNIQUE = "unique"
    NON_UNIQUE = "non_unique"
    NONE = "none"


@dataclass(frozen=True)
class NashSystem:
    """Reduced linear system T~ x = y~ over the strategic coordinates.

    ``row_index[r]`` is the agent whose first-order condition row r encodes;
    rows are ordered by ascending agent index.
    """

    T_tilde: np.ndarray = field(repr=False)
    y_tilde: np.ndarray = field(repr=False)
    row_index: tuple[int, ...]


@dataclass(frozen=True)
class StrategicOutcome:
    """A solved misreporting game: reports, induced equilibrium, diagnostics."""

    s_prime: OpinionProfile
    z_prime: OpinionProfile
    residual: float
    max_gradient: float | None
    uniqueness: Uniqueness


def _foc_row(g: WeightedGraph, profile: SusceptibilityProfile,
             rm: ResponseMatrix, i: int) -> np.ndarray:
    """Row e_i^T T_i of the first-order-condition matrix, built from B columns.

    e_i^T B^T L_i B = (B e_i)^T L_i B expands over the neighbors of i, so the
    row costs one vector-matrix product instead of two matrix products.
    """
    B = rm.B
    ai = profile.alpha[i]
    col = B[:, i]
    w = g.W[i]
    nbrs = np.nonzero(w)[0]
    # v = L_i (B e_i): nonzero only at i and its neighbors
    v = np.zeros(g.n)
    v[i] = np.sum(w[nbrs] * (col[i] - col[nbrs]))
    v[nbrs] = w[nbrs] * (col[nbrs] - col[i])
    return (1.0 - ai) * (v @ B) + ai * B[i, i] * B[i, :]


def build_system(g: WeightedGraph, profile, s, strategic,
                 *, response: ResponseMatrix | None = None) -> NashSystem:
    """Assemble the reduced first-order-condition system for the set S.

    Honest agents' (known) reports are moved to the right-hand side:
    y~ = y - sum_{j not in S} s_j T e_j.
    """
    profile = _coerce_profile(profile, g.n)
    s = as_opinions(s)
    if len(s) != g.n:
        raise DimensionMismatch("opinions must match the graph size")
    S = strategic if isinstance(strategic, StrategicSet) else StrategicSet.of(strategic, g.n)
    if len(S) == 0:
        raise InputError("strategic set is empty; nothing to solve")
    if S.members[-1] >= g.n:
        raise InputError("strategic set member out of range")
    rm = response if response is not None else response_matrix(g, profile)
    members = list(S.members)
    honest = S.complement(g.n)
    T_tilde = np.empty((len(members), len(members)))
    y_tilde = np.empty(len(members))
    for r, i in enumerate(members):
        row = _foc_row(g, profile, rm, i)
        T_tilde[r] = row[members]
        y_tilde[r] = profile.alpha[i] * rm.B[i, i] * s[i] - row[honest] @ s[honest]
    return NashSystem(T_tilde=T_tilde, y_tilde=y_tilde, row_index=tuple(members))


def solve_nash(system: NashSystem, g: WeightedGraph, profile, s, strategic,
               *, response: ResponseMatrix | None = None) -> StrategicOutcome:
    """Solve the misreporting game from an assembled system.

    Well-conditioned systems are solved directly and flagged Unique. Past a
    condition estimate of 1e12 the minimum-norm least-squares solution is
    returned with a NonUnique flag, and NoNashEquilibrium is raised when even
    that leaves a residual above 1e-6 * ||y~|| (inconsistent system). Honest
    entries of the returned report vector are exact copies of s.
    """
    profile = _coerce_profile(profile, g.n)
    s = as_opinions(s)
    S = strategic if isinstance(strategic, StrategicSet) else StrategicSet.of(strategic, g.n)
    if tuple(S.members) != system.row_index:
        raise InputError("system was assembled for a different strategic set")
    rm = response if response is not None else response_matrix(g, profile)

    cond = np.linalg.cond(system.T_tilde)
    if np.isfinite(cond) and cond < CONDITION_THRESHOLD:
        x = np.linalg.solve(system.T_tilde, system.y_tilde)
        uniqueness = Uniqueness.UNIQUE
    else:
        x, *_ = np.linalg.lstsq(system.T_tilde, system.y_tilde, rcond=None)
        uniqueness = Uniqueness.NON_UNIQUE
    residual = float(np.linalg.norm(system.T_tilde @ x - system.y_tilde))
    ynorm = float(np.linalg.norm(system.y_tilde))
    limit = LSTSQ_RESIDUAL_TOL * ynorm if ynorm > 0 else 1e-12
    if residual > limit:
        raise NoNashEquilibrium(
            f"first-order system is inconsistent (residual {residual:.3g})")

    s_prime = s.copy()
    s_prime[list(S.members)] = x
    z_prime = rm.solve_equilibrium(s_prime)
    outcome = StrategicOutcome(
        s_prime=OpinionProfile(s_prime, OpinionRole.INTRINSIC_REPORTED),
        z_prime=OpinionProfile(z_prime, OpinionRole.EXPRESSED),
        residual=residual,
        max_gradient=None,
        uniqueness=uniqueness,
    )
    max_grad = verify_nash(outcome, g, profile, s, S, response=rm)
    return StrategicOutcome(
        s_prime=outcome.s_prime,
        z_prime=outcome.z_prime,
        residual=residual,
        max_gradient=max_grad,
        uniqueness=uniqueness,
    )


def truthful_outcome(g: WeightedGraph, profile, s,
                     *, response: ResponseMatrix | None = None) -> StrategicOutcome:
    """Degenerate outcome for an empty strategic set: everyone reports s."""
    profile = _coerce_profile(profile, g.n)
    s = as_opinions(s)
    rm = response if response is not None else response_matrix(g, profile)
    return StrategicOutcome(
        s_prime=OpinionProfile(s.copy(), OpinionRole.INTRINSIC_REPORTED),
        z_prime=OpinionProfile(rm.solve_equilibrium(s), OpinionRole.EXPRESSED),
        residual=0.0,
        max_gradient=None,
        uniqueness=Uniqueness.UNIQUE,
    )


def closed_form_all_deviate(g: WeightedGraph, alpha_shared, s) -> StrategicOutcome:
    """Closed-form all-deviate construction s' = (1/a~) B^{-1} diag(B) s.

    This is the reference profile used in the worst-case cost analysis of
    the all-deviate game with shared susceptibility: every agent scales its
    report through the diagonal of the response matrix, giving
    z' = (1/a~) diag(B) s without a solve.

    Note: this construction is NOT, in general, a critical point of the
    per-agent costs; the first-order-condition system solved by
    ``solve_nash`` is the authoritative equilibrium, and the two disagree
    already on a single edge with alpha = 1/2. The returned outcome carries
    the construction's true maximum cost gradient so the discrepancy is
    visible rather than hidden.
    """
    profile, a = _shared_alpha(g, alpha_shared)
    s = as_opinions(s)
    if len(s) != g.n:
        raise DimensionMismatch("opinions must match the graph size")
    at = a / (1.0 - a)
    rm = response_matrix(g, profile)
    z_prime = np.diag(rm.B) * s / at
    s_prime = rm.apply_inverse(z_prime)
    S = StrategicSet.of(range(g.n))
    grads = [cost_gradient(i, s_prime, g, profile, s, response=rm) for i in S]
    return StrategicOutcome(
        s_prime=OpinionProfile(s_prime, OpinionRole.INTRINSIC_REPORTED),
        z_prime=OpinionProfile(z_prime, OpinionRole.EXPRESSED),
        residual=0.0,
        max_gradient=float(np.max(np.abs(grads))) if grads else 0.0,
        uniqueness=Uniqueness.UNIQUE,
    )


def cost_gradient(i: int, s_prime, g: WeightedGraph, profile, s_true,
                  *, response: ResponseMatrix | None = None) -> float:
    """Analytic d c_i / d s'_i at the report vector s'.

    Equals 2 e_i^T [ (1-alpha_i) B^T L_i B s' + alpha_i (B^T e_i e_i^T B s'
    - B^T e_i e_i^T s) ], evaluated through B columns and the neighbor
    structure of i.
    """
    profile = _coerce_profile(profile, g.n)
    s_prime = as_opinions(s_prime)
    s = as_opinions(s_true)
    rm = response if response is not None else response_matrix(g, profile)
    B = rm.B
    z_prime = rm.solve_equilibrium(s_prime)
    ai = profile.alpha[i]
    col = B[:, i]
    w = g.W[i]
    nbrs = np.nonzero(w)[0]
    edge_term = col[i] * np.sum(w[nbrs] * (z_prime[i] - z_prime[nbrs]))
    edge_term += np.sum(col[nbrs] * w[nbrs] * (z_prime[nbrs] - z_prime[i]))
    return 2.0 * ((1.0 - ai) * edge_term + ai * B[i, i] * (z_prime[i] - s[i]))


def verify_nash(outcome: StrategicOutcome, g: WeightedGraph, profile, s, strategic,
                *, response: ResponseMatrix | None = None,
                fd_step: float = 1e-6, fd_tol: float = 1e-4) -> float:
    """Max |d c_i / d s'_i| over i in S, cross-checked by central differences.

    Raises GradientMismatch when the analytic and numeric derivatives
    disagree beyond fd_tol (relative to max(1, |gradient|)) -- that would be
    an implementation bug, not a property of the instance.
    """
    profile = _coerce_profile(profile, g.n)
    s = as_opinions(s)
    S = strategic if isinstance(strategic, StrategicSet) else StrategicSet.of(strategic, g.n)
    rm = response if response is not None else response_matrix(g, profile)
    s_prime = as_opinions(outcome.s_prime)
    z_prime = rm.solve_equilibrium(s_prime)
    s_tagged = OpinionProfile(s, OpinionRole.INTRINSIC_TRUE)
    max_grad = 0.0
    for i in S:
        analytic = cost_gradient(i, s_prime, g, profile, s, response=rm)
        # z' is linear in s'_i with slope B[:, i]: perturb z' directly
        dz = fd_step * rm.B[:, i]
        c_plus = agent_cost(i, z_prime + dz, s_tagged, g, profile)
        c_minus = agent_cost(i, z_prime - dz, s_tagged, g, profile)
        numeric = (c_plus - c_minus) / (2.0 * fd_step)
        if abs(analytic - numeric) > fd_tol * max(1.0, abs(analytic), abs(numeric)):
            raise GradientMismatch(
                f"agent {i}: analytic {analytic:.6g} vs numeric {numeric:.6g}")
        max_grad = max(max_grad, abs(analytic))
    return max_grad


def best_response(i: int, s_prime_others, g: WeightedGraph, profile, s,
                  *, response: ResponseMatrix | None = None) -> float:
    """Scalar report solving agent i's first-order condition, others held fixed."""
    profile = _coerce_profile(profile, g.n)
    s = as_opinions(s)
    sp = as_opinions(s_prime_others)
    rm = response if response is not None else response_matrix(g, profile)
    row = _foc_row(g, profile, rm, i)
    coeff = row[i]
    if abs(coeff) < 1e-12:
        raise DegenerateCoefficient(f"agent {i} has coefficient {coeff:.3g}")
    y_i = profile.alpha[i] * rm.B[i, i] * s[i]
    return float((y_i - row @ sp + coeff * sp[i]) / coeff)


def iterate_best_responses(g: WeightedGraph, profile, s, strategic,
                           tol: float = 1e-10, max_rounds: int = 10_000,
                           *, response: ResponseMatrix | None = None
                           ) -> tuple[np.ndarray, int]:
    """Round-robin best responses over S (ascending index) until a fixed point.

    When this converges its limit solves the same system as ``solve_nash``.
    Returns (s', rounds); raises NoConvergence otherwise.
    """
    profile = _coerce_profile(profile, g.n)
    s = as_opinions(s)
    S = strategic if isinstance(strategic, StrategicSet) else StrategicSet.of(strategic, g.n)
    rm = response if response is not None else response_matrix(g, profile)
    sp = s.copy()
    for round_no in range(1, max_rounds + 1):
        delta = 0.0
        for i in S:
            new = best_response(i, sp, g, profile, s, response=rm)
            delta = max(delta, abs(new - sp[i]))
            sp[i] = new
        if delta <= tol:
            return sp, round_no
    raise NoConvergence(f"best-response rotation did not settle in {max_rounds} rounds")
