"""File formats: edge lists, opinion/susceptibility vectors, sets, embeddings.

Edge lists are whitespace-separated ``u v w`` lines (0-based nodes, weight
optional with default 1); lines starting with ``#`` are comments. Writers
emit a ``# n=<count>`` comment so graphs with trailing isolated nodes
round-trip; readers honor it and otherwise infer n from the largest index.

Opinion-style vectors are either one decimal per line (line k = node k) or
``node,value`` CSV with an optional header. A susceptibility file holding a
single scalar line means one shared value for every node.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np

from .engine import SusceptibilityProfile
from .errors import GraphFormatError, InputError
from .graph import WeightedGraph
from .nash import StrategicSet
from .recovery import EmbeddingMatrix, EmbeddingProvenance

__all__ = [
    "load_graph",
    "save_graph",
    "load_vector",
    "save_vector",
    "load_susceptibility",
    "parse_alpha",
    "load_strategic_set",
    "save_strategic_set",
    "load_embeddings",
    "save_embeddings",
    "format_cell",
    "write_csv",
]


def _read_lines(path) -> list[str]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    return text.splitlines()


def load_graph(path) -> WeightedGraph:
    """Parse an edge-list file into a WeightedGraph."""
    n_declared = None
    edges = []
    max_node = -1
    for lineno, raw in enumerate(_read_lines(path), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("n="):
                try:
                    n_declared = int(body[2:])
                except ValueError as exc:
                    raise GraphFormatError(f"{path}:{lineno}: bad node count") from exc
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise GraphFormatError(
                f"{path}:{lineno}: expected 'u v [w]', got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
            w = float(parts[2]) if len(parts) == 3 else 1.0
        except ValueError as exc:
            raise GraphFormatError(f"{path}:{lineno}: {exc}") from exc
        edges.append((u, v, w))
        max_node = max(max_node, u, v)
    n = n_declared if n_declared is not None else max_node + 1
    try:
        return WeightedGraph.from_edges(n, edges)
    except InputError as exc:
        raise GraphFormatError(f"{path}: {exc}") from exc


def save_graph(g: WeightedGraph, path) -> None:
    lines = [f"# n={g.n}"]
    lines += [f"{u} {v} {format_cell(w)}" for u, v, w in g.edges]
    Path(path).write_text("\n".join(lines) + "\n")


def _parse_vector_lines(lines, path) -> np.ndarray:
    """Shared parser for plain-per-line and node,value CSV vector files."""
    plain = []
    pairs = {}
    saw_csv = False
    first_content = True
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "," in line:
            saw_csv = True
            fields = [f.strip() for f in line.split(",")]
            if len(fields) != 2:
                raise GraphFormatError(f"{path}:{lineno}: expected 'node,value'")
            try:
                node, value = int(fields[0]), float(fields[1])
            except ValueError as exc:
                if first_content:
                    first_content = False
                    continue  # header row such as "node,value"
                raise GraphFormatError(f"{path}:{lineno}: {exc}") from exc
            if node in pairs:
                raise GraphFormatError(f"{path}:{lineno}: duplicate node {node}")
            pairs[node] = value
        else:
            try:
                plain.append(float(line))
            except ValueError as exc:
                raise GraphFormatError(f"{path}:{lineno}: {exc}") from exc
        first_content = False
    if saw_csv and plain:
        raise GraphFormatError(f"{path}: mixes CSV and plain-value lines")
    if saw_csv:
        n = max(pairs) + 1
        if sorted(pairs) != list(range(n)):
            raise GraphFormatError(f"{path}: node indices must cover 0..{n - 1}")
        return np.array([pairs[i] for i in range(n)])
    return np.array(plain)


def load_vector(path, n: int | None = None) -> np.ndarray:
    """Load an opinion-style vector (plain lines or node,value CSV)."""
    values = _parse_vector_lines(_read_lines(path), path)
    if n is not None and len(values) != n:
        raise GraphFormatError(f"{path}: expected {n} values, found {len(values)}")
    return values


def save_vector(values, path) -> None:
    values = np.asarray(values, dtype=float)
    Path(path).write_text("\n".join(format_cell(v) for v in values) + "\n")


def load_susceptibility(path, n: int) -> SusceptibilityProfile:
    """Load per-node susceptibilities; a single scalar line means shared."""
    values = _parse_vector_lines(_read_lines(path), path)
    if len(values) == 1:
        return SusceptibilityProfile.shared(float(values[0]), n)
    if len(values) != n:
        raise GraphFormatError(f"{path}: expected 1 or {n} values, found {len(values)}")
    return SusceptibilityProfile(values)


def parse_alpha(spec: str, n: int) -> SusceptibilityProfile:
    """CLI-style susceptibility: a literal scalar or a path to a file."""
    try:
        return SusceptibilityProfile.shared(float(spec), n)
    except ValueError:
        return load_susceptibility(spec, n)


def load_strategic_set(path, n: int) -> StrategicSet:
    """One node index per line."""
    members = []
    for lineno, raw in enumerate(_read_lines(path), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            members.append(int(line))
        except ValueError as exc:
            raise GraphFormatError(f"{path}:{lineno}: {exc}") from exc
    return StrategicSet.of(members, n)


def save_strategic_set(S: StrategicSet, path) -> None:
    Path(path).write_text("\n".join(str(i) for i in S.members) + "\n")


def load_embeddings(path) -> EmbeddingMatrix:
    """CSV of d floats per row (row k = node k), optional header row."""
    rows = []
    for lineno, raw in enumerate(_read_lines(path), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = [f.strip() for f in line.split(",")]
        try:
            rows.append([float(f) for f in fields])
        except ValueError:
            if not rows and lineno <= 2:
                continue  # header row
            raise GraphFormatError(f"{path}:{lineno}: non-numeric embedding row")
    if not rows:
        raise GraphFormatError(f"{path}: no embedding rows found")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise GraphFormatError(f"{path}: ragged embedding rows (widths {sorted(widths)})")
    return EmbeddingMatrix(np.array(rows), EmbeddingProvenance.EXTERNAL_FILE)


def save_embeddings(X, path) -> None:
    X = np.asarray(X, dtype=float)
    lines = [",".join(format_cell(v) for v in row) for row in X]
    Path(path).write_text("\n".join(lines) + "\n")


def format_cell(value) -> str:
    """Deterministic CSV cell formatting (shortest float round-trip)."""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if value is None:
        return "DEGENERATE"
    return repr(float(value))


def write_csv(target, header, rows, comments=()) -> str:
    """Render rows to CSV text; write to ``target`` path/handle when given.

    Output is byte-deterministic: '\\n' newlines, repr-formatted floats, and
    trailing '# key=value' comment lines for summaries.
    """
    lines = [",".join(header)]
    lines += [",".join(format_cell(c) for c in row) for row in rows]
    lines += [f"# {c}" for c in comments]
    text = "\n".join(lines) + "\n"
    if target is None:
        return text
    if isinstance(target, io.TextIOBase):
        target.write(text)
    else:
        Path(target).write_text(text)
    return text
