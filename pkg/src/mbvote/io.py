"""Readers and writers for the on-disk artifact formats.

Floats are written with ``repr`` so every value round-trips exactly.
"""

from __future__ import annotations

import csv
import json
import os
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .ci import MarkovBlanket
from .fas import FasResult
from .graph import Digraph, WeightedDigraph
from .learners import LocalGraph
from .synth import WeightedSCM
from .voting import VoteTally

PathLike = Union[str, os.PathLike]


class ParseError(ValueError):
    def __init__(self, path, line: Optional[int], msg: str):
        self.path, self.line = str(path), line
        where = f"{path}:{line}" if line is not None else str(path)
        super().__init__(f"{where}: {msg}")


def _write_atomic(path: PathLike, text: str) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _meta_line(line: str) -> dict:
    out = {}
    for tok in line.lstrip("#").split():
        if "=" in tok:
            k, v = tok.split("=", 1)
            out[k] = v
    return out


# ---- edge lists -------------------------------------------------------------

def write_edges_tsv(path: PathLike, g: Union[Digraph, WeightedDigraph]) -> None:
    weighted = isinstance(g, WeightedDigraph)
    items = g.sorted_items() if weighted else [(e, None) for e in g.sorted_edges()]
    lines = [f"# n={g.n} edges={len(items)}"]
    for (u, v), w in items:
        lines.append(f"{u}\t{v}\t{w!r}" if weighted else f"{u}\t{v}")
    _write_atomic(path, "\n".join(lines) + "\n")


def read_edges_tsv(path: PathLike, n: Optional[int] = None):
    """Read an edge list; returns a WeightedDigraph when a weight column is present.

    The node count comes from ``n``, else the ``# n=`` comment, else the
    largest id + 1.
    """
    meta, edges, weights = {}, [], []
    first = True
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            meta.update(_meta_line(line))
            continue
        fields = line.split("\t")
        if first and not fields[0].lstrip("-").isdigit():
            first = False
            continue  # header row
        first = False
        if len(fields) not in (2, 3):
            raise ParseError(path, lineno, f"expected 2 or 3 fields, got {len(fields)}")
        try:
            u, v = int(fields[0]), int(fields[1])
            w = float(fields[2]) if len(fields) == 3 else None
        except ValueError as exc:
            raise ParseError(path, lineno, str(exc)) from None
        edges.append((u, v))
        weights.append(w)
    if text and not text.endswith("\n"):
        raise ParseError(path, None, "file does not end with a newline (truncated?)")
    if "edges" in meta and int(meta["edges"]) != len(edges):
        raise ParseError(path, None, f"expected {meta['edges']} edges, found {len(edges)}")
    if n is None:
        n = int(meta["n"]) if "n" in meta else (max((max(e) for e in edges), default=-1) + 1)
    has_w = [w is not None for w in weights]
    if any(has_w) and not all(has_w):
        raise ParseError(path, None, "weight column present on some lines only")
    try:
        if any(has_w):
            return WeightedDigraph(n, dict(zip(edges, weights)))
        return Digraph(n, edges)
    except ValueError as exc:
        raise ParseError(path, None, str(exc)) from None


def write_adjacency_csv(path: PathLike, g: Digraph) -> None:
    A = g.to_adjacency()
    _write_atomic(path, "\n".join(",".join(str(int(x)) for x in row) for row in A) + "\n")


def read_adjacency_csv(path: PathLike) -> Digraph:
    M, _, _ = _read_matrix(path, float)
    if M.shape[0] != M.shape[1]:
        raise ParseError(path, None, f"adjacency matrix is not square: {M.shape}")
    return Digraph.from_adjacency(M)


# ---- matrices ---------------------------------------------------------------

def _read_matrix(path: PathLike, conv, header: bool = False):
    text = Path(path).read_text()
    if text and not text.endswith("\n"):
        raise ParseError(path, None, "file does not end with a newline (truncated?)")
    meta, rows, cols = {}, [], None
    names = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        if not raw.strip():
            continue
        if raw.startswith("#"):
            meta.update(_meta_line(raw))
            continue
        fields = next(csv.reader([raw]))
        if header and names is None:
            names = fields
            cols = len(fields)
            continue
        if cols is None:
            cols = len(fields)
        if len(fields) != cols:
            raise ParseError(path, lineno, f"expected {cols} fields, got {len(fields)}")
        try:
            rows.append([conv(f) for f in fields])
        except ValueError as exc:
            raise ParseError(path, lineno, str(exc)) from None
    if "rows" in meta and int(meta["rows"]) != len(rows):
        raise ParseError(path, None, f"expected {meta['rows']} rows, found {len(rows)}")
    return np.array(rows) if rows else np.zeros((0, cols or 0)), meta, names


def write_data_csv(path: PathLike, X) -> None:
    X = np.asarray(X, dtype=float)
    lines = [",".join(f"x{j}" for j in range(X.shape[1]))]
    lines += [",".join(repr(float(x)) for x in row) for row in X]
    _write_atomic(path, "\n".join(lines) + "\n")


def read_data_csv(path: PathLike) -> np.ndarray:
    X, _, names = _read_matrix(path, float, header=True)
    if names is None:
        raise ParseError(path, None, "missing header row")
    if not np.isfinite(X).all():
        raise ParseError(path, None, "non-finite values")
    return X.astype(float)


def write_tally_csv(path: PathLike, tally: VoteTally, config_hash: Optional[str] = None) -> None:
    A = tally.edge_count
    head = f"# n={tally.n} rows={tally.n}" + (f" config_hash={config_hash}" if config_hash else "")
    body = "\n".join(",".join(str(int(x)) for x in row) for row in A)
    _write_atomic(path, head + "\n" + body + ("\n" if tally.n else ""))


def read_tally_csv(path: PathLike) -> tuple[VoteTally, Optional[str]]:
    A, meta, _ = _read_matrix(path, int)
    n = int(meta.get("n", A.shape[0]))
    if A.shape != (n, n):
        raise ParseError(path, None, f"expected a {n}x{n} matrix, got {A.shape}")
    try:
        return VoteTally(A.reshape(n, n)), meta.get("config_hash")
    except ValueError as exc:
        raise ParseError(path, None, str(exc)) from None


def write_matrix_csv(path: PathLike, M) -> None:
    M = np.asarray(M, dtype=float)
    _write_atomic(path, "\n".join(",".join(repr(float(x)) for x in row) for row in M) + "\n")


# ---- json artifacts ----------------------------------------------------------

def _write_json(path: PathLike, obj) -> None:
    _write_atomic(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _read_json(path: PathLike):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(path, exc.lineno, exc.msg) from None


def write_blankets_json(path: PathLike, blankets: Sequence[MarkovBlanket]) -> None:
    _write_json(path, {str(mb.target): sorted(mb.members) for mb in blankets})


def read_blankets_json(path: PathLike) -> list[MarkovBlanket]:
    raw = _read_json(path)
    try:
        out = [MarkovBlanket(int(k), v) for k, v in raw.items()]
    except (TypeError, ValueError, AttributeError) as exc:
        raise ParseError(path, None, f"malformed blanket map: {exc}") from None
    return sorted(out, key=lambda mb: mb.target)


def write_locals_json(path: PathLike, local_graphs: Sequence[LocalGraph]) -> None:
    payload = []
    for lg in local_graphs:
        item = {"node": lg.center, "nodes": list(lg.nodes),
                "edges": [list(e) for e in lg.global_edges()]}
        if lg.error:
            item["error"] = lg.error
        payload.append(item)
    _write_json(path, payload)


def read_locals_json(path: PathLike) -> list[LocalGraph]:
    out = []
    for i, item in enumerate(_read_json(path)):
        try:
            nodes = tuple(int(v) for v in item["nodes"])
            local = {v: k for k, v in enumerate(nodes)}
            edges = [(local[u], local[v]) for u, v in item["edges"]]
            out.append(LocalGraph(int(item["node"]), nodes, Digraph(len(nodes), edges), item.get("error")))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(path, None, f"entry {i}: {exc!r}") from None
    return out


def write_fas_json(path: PathLike, fas: FasResult) -> None:
    _write_json(path, fas.to_dict())


def write_scm(path: PathLike, scm: WeightedSCM, seed: Optional[int] = None) -> None:
    """Edge list with a weight column plus a ``.json`` sidecar."""
    lines = [f"# n={scm.graph.n} edges={len(scm.weights)}"]
    lines += [f"{u}\t{v}\t{w!r}" for (u, v), w in sorted(scm.weights.items())]
    _write_atomic(path, "\n".join(lines) + "\n")
    _write_json(Path(path).with_suffix(".json"),
                {"n": scm.graph.n, "noise_scale": scm.noise_scale, "seed": seed})


def read_scm(path: PathLike) -> WeightedSCM:
    side = _read_json(Path(path).with_suffix(".json"))
    meta, weights = {}, {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        if raw.startswith("#"):
            meta.update(_meta_line(raw))
            continue
        if not raw.strip():
            continue
        f = raw.split("\t")
        if len(f) != 3:
            raise ParseError(path, lineno, "expected u, v, weight")
        try:
            weights[(int(f[0]), int(f[1]))] = float(f[2])
        except ValueError as exc:
            raise ParseError(path, lineno, str(exc)) from None
    if "edges" in meta and int(meta["edges"]) != len(weights):
        raise ParseError(path, None, "edge count mismatch")
    g = Digraph(int(side["n"]), weights.keys())
    return WeightedSCM(g, weights, float(side["noise_scale"]))
