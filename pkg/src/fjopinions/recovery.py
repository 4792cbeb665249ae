"""Recovering the strategic set by robust regression, with recoverability certificates.

Misreported intrinsic opinions are a sparse corruption of the truthful ones.
If node features X explain the truthful opinions (s = X v), an iterative
hard-thresholding regression of the reconstructed reports s'^ on X tolerates
the corrupted rows, and the k largest fit residuals name the deviators.

Whether that works is governed by extremal eigenvalues of sub-design Gram
matrices: the smallest lambda_min over large row subsets (subset strong
convexity) against the largest lambda_max over small subsets (subset strong
smoothness). Both are computed here exactly, by enumeration for generic
small designs and in closed form for one-hot community designs.
"""

from __future__ import annotations

import enum
import itertools
import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .detection import reconstruct_intrinsic
from .engine import OpinionProfile, OpinionRole, _coerce_profile, as_opinions
from .errors import (
    DimensionMismatch,
    InputError,
    InsufficientSeparation,
    RankDeficientActiveSet,
    SizeConditionViolated,
    TooLarge,
)
from .graph import WeightedGraph, laplacian, spectral_decomposition
from .nash import StrategicSet

__all__ = [
    "EmbeddingProvenance",
    "EmbeddingMatrix",
    "TorrentResult",
    "RecoveryResult",
    "CertificateMethod",
    "SscSssCertificate",
    "torrent",
    "min_max_normalize",
    "recover_deviators",
    "ssc_sss_bruteforce",
    "blockmodel_constants",
    "max_certified_set_size",
    "spectral_embedding",
]

BRUTEFORCE_MAX_N = 20
SEPARATION_TOL = 1e-9


class EmbeddingProvenance(enum.Enum):
    ONE_HOT_COMMUNITY = "one_hot_community"
    SPECTRAL_EMBEDDING = "spectral_embedding"
    EXTERNAL_FILE = "external_file"


@dataclass(frozen=True)
class EmbeddingMatrix:
    """Node feature matrix X (n x d) with a record of where it came from."""

    X: np.ndarray = field(repr=False)
    provenance: EmbeddingProvenance = EmbeddingProvenance.EXTERNAL_FILE

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        if X.ndim != 2:
            raise InputError("embedding matrix must be 2-d")
        if not np.all(np.isfinite(X)):
            raise InputError("embedding matrix has non-finite entries")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]


class TorrentResult(NamedTuple):
    w: np.ndarray
    iterations: int
    active_set: np.ndarray
    active_set_sizes: tuple[int, ...]


@dataclass(frozen=True)
class RecoveryResult:
    """Estimated intrinsic opinions, estimated strategic set, and the fit trace."""

    s_hat: OpinionProfile
    S_hat: StrategicSet
    v_hat: np.ndarray
    diffs: np.ndarray
    iterations: int
    active_set_trace: tuple[int, ...] | None = None


def min_max_normalize(X: np.ndarray) -> np.ndarray:
    """Per-column (x - min) / (max - min); constant columns map to 0."""
    X = np.asarray(X, dtype=float)
    lo = X.min(axis=0)
    hi = X.max(axis=0)
    span = hi - lo
    out = np.zeros_like(X)
    ok = span > 0
    out[:, ok] = (X[:, ok] - lo[ok]) / span[ok]
    return out


def _smallest_k(values: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k smallest values, ties broken toward lower index."""
    return np.sort(np.argsort(values, kind="stable")[:k])


def torrent(X, y, beta: float, variant: str = "fc", tol: float = 1e-10,
            max_iter: int | None = None) -> TorrentResult:
    """Hard-thresholding robust regression against a beta fraction of bad rows.

    Repeats: fit w on the current active set (``fc``: exact least squares;
    ``gd``: one gradient step with step size 1 / ||min-max-normalized X||_2^2),
    recompute residuals r = y - X w, keep the ceil((1-beta) n) rows of
    smallest |r| (ties toward lower index). Stops when ||w_{t+1} - w_t|| <= tol,
    after max_iter fits (default ceil(10 (log n)^2)), or -- fully-corrective
    only, where the fit is a function of the active set -- when the active
    set repeats and the iteration is therefore at a fixed point. beta = 0
    keeps every row and reduces to ordinary least squares.

    Raises RankDeficientActiveSet when the fully-corrective fit meets an
    active design without full column rank -- the features cannot support
    that corruption budget.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise DimensionMismatch("X must be (n, d) and y length n")
    n, d = X.shape
    if not (0.0 <= beta < 0.5):
        raise InputError(f"corruption bound beta={beta} must lie in [0, 0.5)")
    if variant not in ("fc", "gd"):
        raise InputError(f"unknown variant {variant!r}, expected 'fc' or 'gd'")
    m = math.ceil((1.0 - beta) * n)
    if m < d:
        raise InputError(f"active set of {m} rows cannot identify {d} coefficients")
    if max_iter is None:
        max_iter = max(1, math.ceil(10.0 * math.log(max(n, 2)) ** 2))

    if variant == "gd":
        norm = np.linalg.norm(min_max_normalize(X), 2)
        if norm == 0.0:
            raise InputError("all feature columns are constant; step size undefined")
        eta = 1.0 / norm ** 2

    w = np.zeros(d)
    active = _smallest_k(np.abs(y), m)
    sizes = []
    for it in range(1, max_iter + 1):
        Xa, ya = X[active], y[active]
        if variant == "fc":
            w_new, _, rank, _ = np.linalg.lstsq(Xa, ya, rcond=None)
            if rank < d:
                raise RankDeficientActiveSet(
                    f"active design rank {rank} < {d} at iteration {it}")
        else:
            w_new = w + eta * (Xa.T @ (ya - Xa @ w))
        sizes.append(len(active))
        new_active = _smallest_k(np.abs(y - X @ w_new), m)
        stable = variant == "fc" and np.array_equal(new_active, active)
        if stable or np.linalg.norm(w_new - w) <= tol:
            return TorrentResult(w_new, it, new_active, tuple(sizes))
        w, active = w_new, new_active
    return TorrentResult(w, max_iter, active, tuple(sizes))


def recover_deviators(X, g: WeightedGraph, profile, z_prime, k: int,
                      variant: str = "fc") -> RecoveryResult:
    """Name the k agents whose reports deviate most from the feature model.

    Reconstructs the reported intrinsic opinions from the observed
    equilibrium, robust-fits them as X v with corruption budget k/n, and
    returns the k nodes of largest |X v^ - s'^| (ties toward lower index).
    Warns InsufficientSeparation when the k-th and (k+1)-th residuals are
    within 1e-9: membership of the boundary node is then ambiguous.
    """
    emb = X if isinstance(X, EmbeddingMatrix) else EmbeddingMatrix(np.asarray(X, dtype=float))
    if emb.n != g.n:
        raise DimensionMismatch("embedding rows must match the graph size")
    if k < 1:
        raise InputError("set size k must be at least 1")
    profile = _coerce_profile(profile, g.n)
    s_rep = reconstruct_intrinsic(g, profile, z_prime).values
    result = torrent(emb.X, s_rep, beta=k / g.n, variant=variant)
    s_hat = emb.X @ result.w
    diffs = np.abs(s_hat - s_rep)
    order = np.argsort(-diffs, kind="stable")
    if k < g.n and diffs[order[k - 1]] - diffs[order[k]] < SEPARATION_TOL:
        warnings.warn(
            f"top-{k} residual gap below {SEPARATION_TOL:g}; set membership ambiguous",
            InsufficientSeparation, stacklevel=2)
    return RecoveryResult(
        s_hat=OpinionProfile(s_hat, OpinionRole.INTRINSIC_TRUE),
        S_hat=StrategicSet.of(order[:k], g.n),
        v_hat=result.w,
        diffs=diffs,
        iterations=result.iterations,
        active_set_trace=result.active_set_sizes,
    )


class CertificateMethod(enum.Enum):
    BRUTE_FORCE = "brute_force"
    BLOCKMODEL_CLOSED_FORM = "blockmodel_closed_form"


@dataclass(frozen=True)
class SscSssCertificate:
    """Extremal sub-design Gram eigenvalues and the recovery condition they imply.

    ``certified`` holds exactly when 4 sqrt(Xi / xi) < 1.
    """

    gamma: float
    xi: float
    Xi: float
    condition_value: float
    certified: bool
    method: CertificateMethod


def _subset_sizes(n: int, gamma: float) -> tuple[int, int]:
    """(small, large) subset sizes: gamma*n and (1-gamma)*n, rounded, floored at 1."""
    if not (0.0 < gamma < 1.0):
        raise InputError(f"gamma={gamma} must lie strictly inside (0, 1)")
    k = max(1, round(gamma * n))
    m = max(1, round((1.0 - gamma) * n))
    return k, m


def _certificate(gamma: float, xi: float, Xi: float,
                 method: CertificateMethod) -> SscSssCertificate:
    condition = 4.0 * math.sqrt(Xi / xi) if xi > 0 else math.inf
    return SscSssCertificate(
        gamma=gamma, xi=float(xi), Xi=float(Xi),
        condition_value=condition, certified=condition < 1.0, method=method)


def ssc_sss_bruteforce(X, gamma: float) -> SscSssCertificate:
    """Exact extremal constants by enumerating every subset (n <= 20).

    xi = min over |S| = round((1-gamma) n) of lambda_min(X_S^T X_S);
    Xi = max over |S| = round(gamma n) of lambda_max(X_S^T X_S).
    """
    emb = X if isinstance(X, EmbeddingMatrix) else EmbeddingMatrix(np.asarray(X, dtype=float))
    n = emb.n
    if n > BRUTEFORCE_MAX_N:
        raise TooLarge(f"subset enumeration limited to n <= {BRUTEFORCE_MAX_N}, got {n}")
    k, m = _subset_sizes(n, gamma)

    def extremal(size: int, reduce_max: bool) -> float:
        combos = np.fromiter(
            itertools.chain.from_iterable(itertools.combinations(range(n), size)),
            dtype=np.intp).reshape(-1, size)
        rows = emb.X[combos]  # (n_subsets, size, d)
        grams = np.einsum("csd,cse->cde", rows, rows)
        eigs = np.linalg.eigvalsh(grams)
        return float(eigs[:, -1].max()) if reduce_max else float(eigs[:, 0].min())

    Xi = extremal(k, reduce_max=True)
    xi = max(0.0, extremal(m, reduce_max=False))
    return _certificate(gamma, xi, Xi, CertificateMethod.BRUTE_FORCE)


def blockmodel_constants(sizes, gamma: float) -> SscSssCertificate:
    """Closed-form extremal constants for a one-hot community design.

    For X with one-hot rows over communities of sizes n_1 >= ... >= n_K, the
    Gram of any row subset is diagonal with the per-community counts, so the
    extremal eigenvalues are pure counting:

        Xi  = min(k, n_1)                 (pack the small subset into the
                                           largest community),
        xi  = max(0, m - (n - n_K))       (starve the smallest community by
                                           filling all the others first),

    with k, m the rounded small/large subset sizes. These match subset
    enumeration exactly. For K >= 3 the smallest community must satisfy
    n_K > (16K / (16K + 1)) n / K, else SizeConditionViolated.
    """
    sizes = tuple(int(s) for s in sizes)
    if not sizes or any(s <= 0 for s in sizes):
        raise InputError(f"community sizes must be positive, got {sizes}")
    if any(sizes[i] < sizes[i + 1] for i in range(len(sizes) - 1)):
        raise InputError(f"community sizes must be nonincreasing, got {sizes}")
    n = sum(sizes)
    K = len(sizes)
    if K >= 3 and sizes[-1] <= (16.0 * K / (16.0 * K + 1.0)) * n / K:
        raise SizeConditionViolated(
            f"smallest community {sizes[-1]} <= {(16 * K / (16 * K + 1)) * n / K:.3f}")
    k, m = _subset_sizes(n, gamma)
    Xi = float(min(k, sizes[0]))
    xi = float(max(0, m - (n - sizes[-1])))
    return _certificate(gamma, xi, Xi, CertificateMethod.BLOCKMODEL_CLOSED_FORM)


def max_certified_set_size(sizes) -> int:
    """Largest strategic-set size whose blockmodel certificate holds (0 if none)."""
    n = sum(int(s) for s in sizes)
    best = 0
    for k in range(1, n):
        cert = blockmodel_constants(sizes, k / n)
        if cert.certified:
            best = k
    return best


def spectral_embedding(g: WeightedGraph, d: int) -> EmbeddingMatrix:
    """Rows of the d non-constant bottom Laplacian eigenvectors u_2 .. u_{d+1}.

    Deterministic sign convention (largest-magnitude entry positive). At
    d = n - 1 the columns form the full non-constant eigenbasis, so
    X^T X = I.
    """
    if not (1 <= d <= g.n - 1):
        raise InputError(f"embedding dimension d={d} must lie in [1, n-1]")
    dec = spectral_decomposition(laplacian(g))
    X = dec.eigenvectors[:, 1:d + 1].copy()
    return EmbeddingMatrix(X=X, provenance=EmbeddingProvenance.SPECTRAL_EMBEDDING)
