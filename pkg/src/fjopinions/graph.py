"""Weighted undirected graphs, Laplacians, spectra, centrality, blockmodels.

Graphs are stored densely (the intended scale is a few thousand nodes at
most, where exact factorizations beat iterative methods). All objects are
immutable after construction and safe to share across threads; every
operation here is a pure function.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    InputError,
    NoConvergence,
    NonSymmetricInput,
)

__all__ = [
    "WeightedGraph",
    "SpectralDecomposition",
    "CommunityEmbedding",
    "laplacian",
    "restricted_laplacian",
    "spectral_decomposition",
    "eigenvector_centrality",
    "generate_blockmodel",
]


def _fix_column_signs(U: np.ndarray) -> np.ndarray:
    """Flip eigenvector signs so the entry of largest magnitude is positive.

    Ties go to the lowest index (np.argmax). Gives a deterministic basis
    for simple eigenvalues.
    """
    U = U.copy()
    idx = np.argmax(np.abs(U), axis=0)
    flip = U[idx, np.arange(U.shape[1])] < 0
    U[:, flip] *= -1.0
    return U


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected graph with nonnegative edge weights.

    ``edges`` holds one entry per unordered pair (u < v); the adjacency
    matrix ``W`` is stored symmetrically and marked read-only.
    """

    n: int
    edges: tuple[tuple[int, int, float], ...]
    W: np.ndarray = field(repr=False)

    @classmethod
    def from_edges(cls, n: int, edges) -> "WeightedGraph":
        """Build a graph from an iterable of (u, v) or (u, v, weight) tuples.

        Duplicate unordered pairs are an input error, not summed: silent
        summation hides data bugs upstream.
        """
        if n < 0:
            raise InputError(f"node count must be nonnegative, got {n}")
        W = np.zeros((n, n))
        canonical = []
        seen = set()
        for e in edges:
            if len(e) == 2:
                u, v = e
                w = 1.0
            elif len(e) == 3:
                u, v, w = e
            else:
                raise InputError(f"edge must be (u, v) or (u, v, w), got {e!r}")
            u, v, w = int(u), int(v), float(w)
            if not (0 <= u < n and 0 <= v < n):
                raise InputError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise InputError(f"self-loop at node {u} is not allowed")
            if not np.isfinite(w) or w < 0:
                raise InputError(f"edge ({u}, {v}) has invalid weight {w}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise InputError(f"duplicate edge {key}")
            seen.add(key)
            canonical.append((key[0], key[1], w))
            W[u, v] = w
            W[v, u] = w
        canonical.sort()
        W.flags.writeable = False
        return cls(n=n, edges=tuple(canonical), W=W)

    @property
    def m(self) -> int:
        """Number of edges."""
        return len(self.edges)

    @property
    def degrees(self) -> np.ndarray:
        """Weighted degree of every node."""
        return self.W.sum(axis=1)

    def neighbors(self, i: int) -> np.ndarray:
        return np.nonzero(self.W[i])[0]

    def has_edges(self) -> bool:
        return self.m > 0


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigendecomposition L = U diag(eigenvalues) U^T, eigenvalues ascending.

    Columns of ``eigenvectors`` are orthonormal with a deterministic sign
    convention (largest-magnitude entry positive).
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruction_error(self, L: np.ndarray) -> float:
        R = (self.eigenvectors * self.eigenvalues) @ self.eigenvectors.T
        return float(np.max(np.abs(R - L)))

    def orthonormality_error(self) -> float:
        U = self.eigenvectors
        return float(np.max(np.abs(U.T @ U - np.eye(U.shape[1]))))


@dataclass(frozen=True)
class CommunityEmbedding:
    """One-hot community membership matrix X (n x K) with nonincreasing sizes."""

    X: np.ndarray
    sizes: tuple[int, ...]

    def __post_init__(self):
        X = np.asarray(self.X)
        if X.ndim != 2:
            raise InputError("community embedding must be a 2-d matrix")
        if not np.all((X == 0) | (X == 1)) or not np.all(X.sum(axis=1) == 1):
            raise InputError("community embedding rows must be one-hot")
        if tuple(X.sum(axis=0).astype(int)) != tuple(self.sizes):
            raise InputError("community sizes do not match column sums")


def laplacian(g: WeightedGraph) -> np.ndarray:
    """Combinatorial Laplacian L = D - W (symmetric, PSD, zero row sums)."""
    return np.diag(g.degrees) - g.W


def restricted_laplacian(g: WeightedGraph, i: int) -> np.ndarray:
    """Laplacian of the subgraph keeping only edges incident to node i.

    Equals the sum of single-edge Laplacians w_ij (e_i - e_j)(e_i - e_j)^T
    over neighbors j of i; summing over all i gives 2L because every edge
    is counted from both endpoints.
    """
    if not (0 <= i < g.n):
        raise InputError(f"node {i} out of range for n={g.n}")
    w = g.W[i]
    Li = np.diag(w.copy())
    Li[i, i] = w.sum()
    Li[i, :] -= w
    Li[:, i] -= w
    return Li


def spectral_decomposition(L: np.ndarray, tol: float = 1e-8) -> SpectralDecomposition:
    """Full symmetric eigendecomposition with ascending eigenvalues.

    Raises NonSymmetricInput when max|L - L^T| exceeds tol * max(1, max|L|).
    """
    L = np.asarray(L, dtype=float)
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {L.shape}")
    scale = max(1.0, float(np.max(np.abs(L))) if L.size else 0.0)
    asym = float(np.max(np.abs(L - L.T))) if L.size else 0.0
    if asym > tol * scale:
        raise NonSymmetricInput(f"matrix asymmetry {asym:.3g} exceeds tolerance")
    vals, vecs = np.linalg.eigh(L)
    return SpectralDecomposition(eigenvalues=vals, eigenvectors=_fix_column_signs(vecs))


def _connected_components(g: WeightedGraph) -> list[np.ndarray]:
    """Connected components as sorted index arrays, ordered by smallest node."""
    seen = np.zeros(g.n, dtype=bool)
    comps = []
    for start in range(g.n):
        if seen[start]:
            continue
        stack = [start]
        seen[start] = True
        comp = [start]
        while stack:
            u = stack.pop()
            for v in g.neighbors(u):
                if not seen[v]:
                    seen[v] = True
                    comp.append(int(v))
                    stack.append(int(v))
        comps.append(np.array(sorted(comp)))
    return comps


def _power_iteration(W: np.ndarray, tol: float, max_iter: int) -> tuple[np.ndarray, float]:
    """Dominant eigenpair of a nonnegative symmetric W by shifted power iteration.

    Iterates with W/r + I (r = max row sum), which preserves eigenvectors and
    makes the Perron eigenvalue strictly dominant even on bipartite graphs.
    The normalization by r also makes convergence independent of a uniform
    rescaling of the weights.
    """
    n = W.shape[0]
    r = float(W.sum(axis=1).max())
    if r == 0.0:
        raise InputError("power iteration requires at least one edge")
    M = W / r
    x = np.full(n, 1.0 / np.sqrt(n))
    for _ in range(max_iter):
        y = M @ x + x
        y /= np.linalg.norm(y)
        if np.linalg.norm(y - x) <= tol:
            rayleigh = float(y @ W @ y)
            return y, rayleigh
        x = y
    raise NoConvergence(f"power iteration did not converge in {max_iter} iterations")


def eigenvector_centrality(g: WeightedGraph, tol: float = 1e-10,
                           max_iter: int = 10000) -> np.ndarray:
    """Dominant eigenvector of the weight matrix, entrywise nonnegative, unit norm.

    Disconnected graphs: the component of largest spectral radius carries all
    the mass; exact radius ties break toward the component containing the
    lowest node index. Sign convention: largest-magnitude entry positive.
    """
    if not g.has_edges():
        raise InputError("eigenvector centrality requires at least one edge")
    best = None  # (radius, component, vector)
    for comp in _connected_components(g):
        Wc = g.W[np.ix_(comp, comp)]
        if Wc.sum() == 0.0:
            continue  # isolated node: centrality 0
        vec, radius = _power_iteration(Wc, tol, max_iter)
        if best is None or radius > best[0]:
            best = (radius, comp, vec)
    pi = np.zeros(g.n)
    _, comp, vec = best
    pi[comp] = np.abs(vec)  # Perron vector is nonnegative; abs irons out roundoff
    pi /= np.linalg.norm(pi)
    return pi


def generate_blockmodel(sizes, p_in: float, p_out: float,
                        seed: int) -> tuple[WeightedGraph, CommunityEmbedding]:
    """Planted-partition graph with unit weights plus one-hot community features.

    Nodes are laid out community by community (sizes must be nonincreasing).
    Each within-community pair is an edge with probability p_in, each
    across-community pair with probability p_out, independently; the draw is
    deterministic given the seed.
    """
    sizes = tuple(int(s) for s in sizes)
    if not sizes or any(s <= 0 for s in sizes):
        raise InputError(f"community sizes must be positive, got {sizes}")
    if any(sizes[i] < sizes[i + 1] for i in range(len(sizes) - 1)):
        raise InputError(f"community sizes must be nonincreasing, got {sizes}")
    if not (0.0 <= p_in <= 1.0 and 0.0 <= p_out <= 1.0):
        raise InputError("edge probabilities must lie in [0, 1]")
    n = sum(sizes)
    labels = np.repeat(np.arange(len(sizes)), sizes)
    same = labels[:, None] == labels[None, :]
    prob = np.where(same, p_in, p_out)
    rng = np.random.default_rng(seed)
    draw = rng.random((n, n))
    upper = np.triu(draw < prob, k=1)
    us, vs = np.nonzero(upper)
    g = WeightedGraph.from_edges(n, [(int(u), int(v), 1.0) for u, v in zip(us, vs)])
    X = np.zeros((n, len(sizes)))
    X[np.arange(n), labels] = 1.0
    X.flags.writeable = False
    return g, CommunityEmbedding(X=X, sizes=sizes)
