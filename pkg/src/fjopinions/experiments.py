"""Scenario configuration and experiment sweeps, emitting deterministic CSV.

A scenario bundles a graph, susceptibilities, exactly one opinion source and
exactly one strategic-set source, plus a 64-bit seed. Randomized experiments
derive the generator for trial t as ``default_rng(seed + trial_offset)`` so
every trial is independently reproducible and output CSV is byte-identical
across runs.

Sweeps re-solve the misreporting game per parameter value, verify the
returned equilibrium's first-order conditions (rows are never emitted
unverified), and report polarization / disagreement / cost ratios, flagging
a cell DEGENERATE when its truthful baseline is below 1e-14.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .detection import Verdict, detect_manipulation
from .engine import (
    SusceptibilityProfile,
    _coerce_profile,
    fj_equilibrium,
    metrics,
    response_matrix,
)
from .errors import InputError, NumericalError
from .graph import WeightedGraph, eigenvector_centrality
from .nash import StrategicSet, build_system, solve_nash, truthful_outcome
from .recovery import recover_deviators

__all__ = [
    "GaussianOpinions",
    "RademacherOpinions",
    "EmbeddingOpinions",
    "FixedOpinions",
    "FixedSet",
    "EmptySet",
    "TopCentralityFraction",
    "RandomFraction",
    "Scenario",
    "SweepRow",
    "select_top_centrality",
    "sweep_alpha",
    "sweep_strategic_fraction",
    "detection_experiment",
    "recovery_experiment",
    "sweep_rows_to_csv",
]

DEGENERATE_FLOOR = 1e-14
GRADIENT_TOL = 1e-6


# --- opinion sources ----------------------------------------------------

@dataclass(frozen=True)
class GaussianOpinions:
    mu: float
    sigma: float

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return self.mu + self.sigma * rng.standard_normal(n)


@dataclass(frozen=True)
class RademacherOpinions:
    """+1 with probability p_plus, else -1."""

    p_plus: float

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if not (0.0 <= self.p_plus <= 1.0):
            raise InputError("p_plus must lie in [0, 1]")
        return np.where(rng.random(n) < self.p_plus, 1.0, -1.0)


@dataclass(frozen=True)
class EmbeddingOpinions:
    """Deterministic s = X v from node features."""

    X: np.ndarray
    v: np.ndarray

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        X = np.asarray(self.X, dtype=float)
        if X.shape[0] != n:
            raise InputError("embedding rows must match the graph size")
        return X @ np.asarray(self.v, dtype=float)


@dataclass(frozen=True)
class FixedOpinions:
    values: tuple

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        vals = np.asarray(self.values, dtype=float)
        if len(vals) != n:
            raise InputError("fixed opinions must match the graph size")
        return vals.copy()


# --- strategic-set sources ----------------------------------------------

@dataclass(frozen=True)
class FixedSet:
    members: tuple

    def sample(self, g: WeightedGraph, rng: np.random.Generator) -> StrategicSet:
        return StrategicSet.of(self.members, g.n)


@dataclass(frozen=True)
class EmptySet:
    """No deviators; the null configuration for calibration experiments."""

    def sample(self, g: WeightedGraph, rng: np.random.Generator) -> StrategicSet:
        return StrategicSet.of((), g.n)


@dataclass(frozen=True)
class TopCentralityFraction:
    p: float

    def sample(self, g: WeightedGraph, rng: np.random.Generator) -> StrategicSet:
        return select_top_centrality(g, self.p)


@dataclass(frozen=True)
class RandomFraction:
    p: float

    def sample(self, g: WeightedGraph, rng: np.random.Generator) -> StrategicSet:
        if not (0.0 < self.p <= 1.0):
            raise InputError("fraction must lie in (0, 1]")
        size = math.ceil(self.p * g.n)
        return StrategicSet.of(rng.choice(g.n, size=size, replace=False), g.n)


@dataclass(frozen=True)
class Scenario:
    """One graph + susceptibilities + opinion source + strategic-set source."""

    graph: WeightedGraph
    alpha: SusceptibilityProfile
    opinions: object
    strategic: object
    seed: int = 0

    def resolve(self, rng: np.random.Generator | None = None
                ) -> tuple[np.ndarray, StrategicSet]:
        """Draw (s, S) with the scenario seed (opinions first, then the set)."""
        rng = np.random.default_rng(self.seed) if rng is None else rng
        s = self.opinions.sample(self.graph.n, rng)
        S = self.strategic.sample(self.graph, rng)
        return s, S


def select_top_centrality(g: WeightedGraph, p: float) -> StrategicSet:
    """The ceil(p*n) nodes of highest eigenvector centrality (ties: lower index)."""
    if not (0.0 < p <= 1.0):
        raise InputError(f"fraction p={p} must lie in (0, 1]")
    size = math.ceil(p * g.n)
    pi = eigenvector_centrality(g)
    order = np.lexsort((np.arange(g.n), -pi))
    return StrategicSet.of(order[:size], g.n)


@dataclass(frozen=True)
class SweepRow:
    """One solved sweep point; None marks a ratio with a degenerate baseline."""

    value: float
    pol_ratio: float | None
    dis_ratio: float | None
    pom: float | None
    residual: float
    max_gradient: float
    uniqueness: str


def _solve_point(g, profile, s, S, rm) -> SweepRow:
    base = metrics(fj_equilibrium(g, profile, s, response=rm), s, g, profile)
    if len(S) == 0:
        outcome = truthful_outcome(g, profile, s, response=rm)
        max_grad = 0.0
    else:
        system = build_system(g, profile, s, S, response=rm)
        outcome = solve_nash(system, g, profile, s, S, response=rm)
        max_grad = outcome.max_gradient
        if max_grad > GRADIENT_TOL:
            raise NumericalError(
                f"equilibrium failed first-order verification ({max_grad:.3g})")
    manip = metrics(outcome.z_prime, s, g, profile)

    def ratio(num, den):
        return None if den < DEGENERATE_FLOOR else num / den

    return SweepRow(
        value=math.nan,  # caller fills the sweep parameter
        pol_ratio=ratio(manip.polarization, base.polarization),
        dis_ratio=ratio(manip.disagreement, base.disagreement),
        pom=ratio(manip.total_cost, base.total_cost),
        residual=outcome.residual,
        max_gradient=max_grad,
        uniqueness=outcome.uniqueness.value,
    )


def _with_value(row: SweepRow, value: float) -> SweepRow:
    return SweepRow(value, row.pol_ratio, row.dis_ratio, row.pom,
                    row.residual, row.max_gradient, row.uniqueness)


def sweep_alpha(scenario: Scenario, alphas) -> list[SweepRow]:
    """Solve the game per shared susceptibility value; s and S stay fixed."""
    g = scenario.graph
    s, S = scenario.resolve()
    rows = []
    for a in alphas:
        if not (0.0 < a < 1.0):
            raise InputError(f"alpha={a} outside (0, 1)")
        profile = SusceptibilityProfile.shared(float(a), g.n)
        rm = response_matrix(g, profile)
        rows.append(_with_value(_solve_point(g, profile, s, S, rm), float(a)))
    return rows


def sweep_strategic_fraction(scenario: Scenario, fractions) -> list[SweepRow]:
    """Solve the game with S = top-centrality ceil(p*n) per fraction p."""
    g = scenario.graph
    profile = scenario.alpha.expand_to(g.n)
    rm = response_matrix(g, profile)
    s, _ = scenario.resolve()
    rows = []
    for p in fractions:
        S = select_top_centrality(g, float(p))
        rows.append(_with_value(_solve_point(g, profile, s, S, rm), float(p)))
    return rows


def sweep_rows_to_csv(rows, param_name: str) -> tuple[list[str], list[tuple]]:
    header = [param_name, "pol_ratio", "dis_ratio", "pom"]
    out = [(r.value, r.pol_ratio, r.dis_ratio, r.pom) for r in rows]
    return header, out


def detection_experiment(scenario: Scenario, n_trials: int,
                         shift_magnitude: float, significance: float = 0.05
                         ) -> tuple[list[tuple], dict]:
    """Seeded detection trials; returns (rows, summary).

    Each trial draws fresh Gaussian opinions, shifts the reports of the
    scenario's strategic set by shift_magnitude standard deviations, lets the
    network re-equilibrate, and runs the detector with the generator's known
    mean. Rows are (trial, set size, p-value, verdict); the summary carries
    the empirical Type I rate over null trials and Type II rate over
    corrupted trials (nan when a kind is absent).
    """
    if not isinstance(scenario.opinions, GaussianOpinions):
        raise InputError("detection experiment needs a Gaussian opinion source")
    g = scenario.graph
    profile = scenario.alpha.expand_to(g.n)
    rm = response_matrix(g, profile)
    mu, sigma = scenario.opinions.mu, scenario.opinions.sigma
    rows = []
    null_total = null_rejects = corrupt_total = corrupt_misses = 0
    for trial in range(n_trials):
        rng = np.random.default_rng(scenario.seed + trial)
        s = scenario.opinions.sample(g.n, rng)
        S = scenario.strategic.sample(g, rng)
        s_reported = s.copy()
        if len(S):
            s_reported[list(S.members)] += shift_magnitude * sigma
        z_prime = rm.solve_equilibrium(s_reported)
        outcome = detect_manipulation(g, profile, z_prime, mu0=mu,
                                      significance=significance)
        rows.append((trial, len(S), outcome.p_value, outcome.verdict.value))
        if len(S) == 0:
            null_total += 1
            null_rejects += outcome.verdict is Verdict.MANIPULATION
        else:
            corrupt_total += 1
            corrupt_misses += outcome.verdict is Verdict.NO_MANIPULATION
    summary = {
        "type_i_rate": null_rejects / null_total if null_total else math.nan,
        "type_ii_rate": corrupt_misses / corrupt_total if corrupt_total else math.nan,
    }
    return rows, summary


def recovery_error(s_hat, s_true, floor: float = 1e-12) -> tuple[float, int]:
    """Mean relative error (1/n) sum |(s^_i - s_i)/s_i| over usable entries.

    Entries with |s_i| < floor are excluded from the mean and counted in the
    second return value.
    """
    s_hat = np.asarray(s_hat, dtype=float)
    s_true = np.asarray(s_true, dtype=float)
    usable = np.abs(s_true) >= floor
    excluded = int(np.sum(~usable))
    if not np.any(usable):
        return math.nan, excluded
    rel = np.abs((s_hat[usable] - s_true[usable]) / s_true[usable])
    return float(np.mean(rel)), excluded


def balanced_accuracy(predicted: StrategicSet, actual: StrategicSet, n: int) -> float:
    """Mean of true-positive and true-negative rates; nan when one side is empty."""
    pred = set(predicted.members)
    act = set(actual.members)
    if not act or len(act) == n:
        return math.nan
    tpr = len(pred & act) / len(act)
    tnr = len([i for i in range(n) if i not in pred and i not in act]) / (n - len(act))
    return (tpr + tnr) / 2.0


def recovery_experiment(scenario: Scenario, fractions, n_trials: int
                        ) -> list[tuple]:
    """Full-pipeline recovery trials: random S, solved misreporting game, recovery.

    The opinion source must satisfy the feature model (s = X v); the scenario's
    opinions object must therefore be EmbeddingOpinions, whose X also serves as
    the regression design. Per (fraction index f, trial t) the generator is
    default_rng(seed + f * n_trials + t). fraction 0 runs a no-deviator
    control with k forced to 1. Rows are
    (frac, trial, recovery_error, balanced_accuracy).
    """
    if not isinstance(scenario.opinions, EmbeddingOpinions):
        raise InputError("recovery experiment needs an embedding opinion source")
    g = scenario.graph
    profile = scenario.alpha.expand_to(g.n)
    rm = response_matrix(g, profile)
    X = np.asarray(scenario.opinions.X, dtype=float)
    rows = []
    for f_idx, frac in enumerate(fractions):
        frac = float(frac)
        if not (0.0 <= frac <= 1.0):
            raise InputError(f"fraction {frac} outside [0, 1]")
        for trial in range(n_trials):
            rng = np.random.default_rng(scenario.seed + f_idx * n_trials + trial)
            s = scenario.opinions.sample(g.n, rng)
            size = math.ceil(frac * g.n)
            S = StrategicSet.of(rng.choice(g.n, size=size, replace=False), g.n)
            if len(S):
                system = build_system(g, profile, s, S, response=rm)
                outcome = solve_nash(system, g, profile, s, S, response=rm)
            else:
                outcome = truthful_outcome(g, profile, s, response=rm)
            k = max(1, len(S))
            result = recover_deviators(X, g, profile, outcome.z_prime, k)
            err, _ = recovery_error(result.s_hat.values, s)
            rows.append((frac, trial, err, balanced_accuracy(result.S_hat, S, g.n)))
    return rows
