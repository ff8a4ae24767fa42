"""Dataset directory persistence for multi-view graphs.

Layout (all text files, UTF-8, LF newlines):

    meta.json    {"n": int, "views": [D_1, ..., D_K], "directed": false}
    edges.tsv    one "u<TAB>v" pair per line, 0-indexed, u < v
    view_0.csv   n rows of D_k comma-separated floats, no header (one per view)
    labels.csv   optional; n rows of "flag,kind" with flag in {0,1} and
                 kind in {normal, global, structural, community}

Floats are written with ``repr`` so save -> load round-trips exactly and two
saves of the same graph are byte-identical.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path

import numpy as np

from .graph import ANOMALY_KINDS, MultiViewGraph

log = logging.getLogger(__name__)


class DatasetError(ValueError):
    """Raised for a missing, malformed or inconsistent dataset directory."""


def save_dataset(graph: MultiViewGraph, path) -> None:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)

    meta = {"n": graph.n, "views": graph.view_dims, "directed": False}
    _write_text(out / "meta.json", json.dumps(meta, indent=2, sort_keys=True) + "\n")

    rows, cols = np.nonzero(np.triu(graph.adjacency, k=1))
    edge_lines = [f"{u}\t{v}" for u, v in zip(rows.tolist(), cols.tolist())]
    _write_text(out / "edges.tsv", "".join(line + "\n" for line in edge_lines))

    for k, view in enumerate(graph.views):
        lines = [",".join(repr(float(x)) for x in row) for row in view]
        _write_text(out / f"view_{k}.csv", "".join(line + "\n" for line in lines))

    if graph.labels is not None:
        flags = graph.anomaly_flags
        lines = [f"{flag},{kind}" for flag, kind in zip(flags, graph.labels)]
        _write_text(out / "labels.csv", "".join(line + "\n" for line in lines))


def load_dataset(path) -> MultiViewGraph:
    root = Path(path)
    if not root.is_dir():
        raise DatasetError(f"dataset directory not found: {root}")

    meta = _load_meta(root / "meta.json")
    n = meta["n"]
    view_dims = meta["views"]

    adjacency = _load_edges(root / "edges.tsv", n)
    views = [
        _load_view(root / f"view_{k}.csv", n, dim)
        for k, dim in enumerate(view_dims)
    ]
    labels = _load_labels(root / "labels.csv", n)
    try:
        return MultiViewGraph(adjacency=adjacency, views=views, labels=labels)
    except ValueError as exc:
        raise DatasetError(f"invalid dataset at {root}: {exc}") from exc


def _write_text(path: Path, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise DatasetError(f"cannot write {path}: {exc}") from exc


def _read_lines(path: Path) -> list[str]:
    if not path.is_file():
        raise DatasetError(f"missing dataset file: {path}")
    return path.read_text(encoding="utf-8").splitlines()


def _load_meta(path: Path) -> dict:
    if not path.is_file():
        raise DatasetError(f"missing dataset file: {path}")
    try:
        meta = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DatasetError(f"malformed meta.json: {exc}") from exc
    for key in ("n", "views", "directed"):
        if key not in meta:
            raise DatasetError(f"meta.json missing required key '{key}'")
    if meta["directed"]:
        raise DatasetError("directed graphs are not supported")
    n = meta["n"]
    if not isinstance(n, int) or n < 1:
        raise DatasetError(f"meta.json: invalid node count {n!r}")
    dims = meta["views"]
    if not isinstance(dims, list) or not dims or not all(
        isinstance(d, int) and d >= 1 for d in dims
    ):
        raise DatasetError(f"meta.json: invalid view dimensions {dims!r}")
    return meta


def _load_edges(path: Path, n: int) -> np.ndarray:
    adjacency = np.zeros((n, n))
    noncanonical = 0
    seen: set[tuple[int, int]] = set()
    for lineno, line in enumerate(_read_lines(path), start=1):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise DatasetError(f"edges.tsv line {lineno}: expected 'u<TAB>v', got {line!r}")
        try:
            u, v = int(fields[0]), int(fields[1])
        except ValueError as exc:
            raise DatasetError(f"edges.tsv line {lineno}: non-integer node id") from exc
        for node in (u, v):
            if not 0 <= node < n:
                raise DatasetError(f"node id out of range: {node} (n={n})")
        if u == v:
            raise DatasetError(f"edges.tsv line {lineno}: self-loops are not allowed")
        if u > v:
            noncanonical += 1
            u, v = v, u
        if (u, v) in seen:
            noncanonical += 1
            continue
        seen.add((u, v))
        adjacency[u, v] = 1.0
        adjacency[v, u] = 1.0
    if noncanonical:
        log.warning(
            "edge list not in canonical u<v form; symmetrized %d entries", noncanonical
        )
    return adjacency


def _load_view(path: Path, n: int, dim: int) -> np.ndarray:
    lines = [line for line in _read_lines(path) if line.strip()]
    if len(lines) != n:
        raise DatasetError(
            f"view row count mismatch: {path.name} has {len(lines)} rows, expected {n}"
        )
    view = np.empty((n, dim))
    for i, line in enumerate(lines):
        fields = line.split(",")
        if len(fields) != dim:
            raise DatasetError(
                f"view column count mismatch: {path.name} row {i} has "
                f"{len(fields)} values, expected {dim}"
            )
        try:
            view[i] = [float(x) for x in fields]
        except ValueError as exc:
            raise DatasetError(f"{path.name} row {i}: non-numeric value") from exc
    return view


def _load_labels(path: Path, n: int) -> np.ndarray | None:
    if not path.is_file():
        return None
    lines = [line for line in _read_lines(path) if line.strip()]
    if len(lines) != n:
        raise DatasetError(
            f"labels.csv has {len(lines)} rows, expected {n}"
        )
    kinds = []
    for i, line in enumerate(lines):
        fields = line.split(",")
        if len(fields) != 2:
            raise DatasetError(f"labels.csv row {i}: expected 'flag,kind'")
        flag, kind = fields[0].strip(), fields[1].strip()
        if flag not in ("0", "1"):
            raise DatasetError(f"labels.csv row {i}: flag must be 0 or 1, got {flag!r}")
        if kind not in ANOMALY_KINDS:
            raise DatasetError(f"labels.csv row {i}: unknown kind {kind!r}")
        if (flag == "1") != (kind != "normal"):
            raise DatasetError(
                f"labels.csv row {i}: flag {flag} inconsistent with kind {kind!r}"
            )
        kinds.append(kind)
    return np.asarray(kinds)
