"""TU benchmark dataset loading and artifact output formats.

TU layout for a dataset ``NAME`` in a directory::

    NAME_A.txt                "i, j" per line, 1-based global node ids
    NAME_graph_indicator.txt  graph id (1-based) of node k on line k
    NAME_graph_labels.txt     class label of graph g on line g
    NAME_node_labels.txt      optional, one integer label per node
    NAME_node_attributes.txt  optional, comma-separated reals per node

Edge labels and other files are ignored.
"""

from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from .errors import (
    DataError,
    InconsistentIndicator,
    MalformedLine,
    MissingFile,
    RaggedAttributes,
)
from .graph import Graph, GraphDataset

__all__ = [
    "load_tu_dataset",
    "write_gram",
    "read_gram",
    "write_rpf",
    "read_rpf",
    "write_embeddings",
    "read_embeddings",
    "GRAM_MAGIC",
    "EMBED_MAGIC",
]

GRAM_MAGIC = b"RETGKGRM"
EMBED_MAGIC = b"RETGKEMB"


def _lines(path: Path):
    """Yield ``(lineno, stripped_text)`` for non-empty lines."""
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip()
            if text:
                yield lineno, text


def _read_ints(path: Path):
    out = []
    for lineno, text in _lines(path):
        try:
            out.append(int(text.split(",")[0].strip()))
        except ValueError:
            raise MalformedLine(path, lineno, text) from None
    return out


def load_tu_dataset(directory, name: str) -> GraphDataset:
    """Load dataset ``name`` stored in TU text format under ``directory``."""
    root = Path(directory)
    files = {
        key: root / f"{name}_{key}.txt"
        for key in ("A", "graph_indicator", "graph_labels", "node_labels", "node_attributes")
    }
    for key in ("A", "graph_indicator", "graph_labels"):
        if not files[key].is_file():
            raise MissingFile(files[key])

    indicator = np.array(_read_ints(files["graph_indicator"]), dtype=np.int64)
    n_total = len(indicator)
    if n_total == 0:
        raise InconsistentIndicator(f"{files['graph_indicator']} is empty")
    n_graphs = int(indicator.max())
    if indicator.min() < 1:
        raise InconsistentIndicator("graph ids in the indicator file must be >= 1")
    sizes = np.bincount(indicator, minlength=n_graphs + 1)[1:]
    if np.any(sizes == 0):
        missing = int(np.flatnonzero(sizes == 0)[0]) + 1
        raise InconsistentIndicator(f"graph {missing} has no nodes")

    raw_y = _read_ints(files["graph_labels"])
    if len(raw_y) != n_graphs:
        raise InconsistentIndicator(
            f"{len(raw_y)} graph labels for {n_graphs} graphs in the indicator file"
        )
    classes, y = np.unique(raw_y, return_inverse=True)

    # local node index of every global node
    order = np.argsort(indicator, kind="stable")
    local = np.empty(n_total, dtype=np.int64)
    starts = np.concatenate([[0], np.cumsum(sizes)])
    local[order] = np.arange(n_total) - np.repeat(starts[:-1], sizes)

    edges = [dict() for _ in range(n_graphs)]
    path = files["A"]
    for lineno, text in _lines(path):
        parts = text.split(",")
        try:
            if len(parts) != 2:
                raise ValueError
            i, j = int(parts[0]), int(parts[1])
        except ValueError:
            raise MalformedLine(path, lineno, text) from None
        if not (1 <= i <= n_total and 1 <= j <= n_total):
            raise MalformedLine(path, lineno, f"node id outside 1..{n_total}")
        gi, gj = indicator[i - 1], indicator[j - 1]
        if gi != gj:
            raise InconsistentIndicator(f"{path}:{lineno}: edge joins graphs {gi} and {gj}")
        a, b = local[i - 1], local[j - 1]
        key = (min(a, b), max(a, b))
        # unweighted files: a repeated pair implies the same weight
        edges[gi - 1][key] = 1.0

    labels = alphabet = None
    if files["node_labels"].is_file():
        raw = _read_ints(files["node_labels"])
        if len(raw) != n_total:
            raise InconsistentIndicator(
                f"{len(raw)} node labels for {n_total} nodes in the indicator file"
            )
        values, labels = np.unique(raw, return_inverse=True)
        alphabet = tuple(range(len(values)))

    attrs = None
    if files["node_attributes"].is_file():
        rows, dim = [], None
        apath = files["node_attributes"]
        for lineno, text in _lines(apath):
            try:
                row = [float(v) for v in text.split(",")]
            except ValueError:
                raise MalformedLine(apath, lineno, text) from None
            if dim is None:
                dim = len(row)
            elif len(row) != dim:
                raise RaggedAttributes(
                    f"{apath}:{lineno}: {len(row)} values, expected {dim}"
                )
            rows.append(row)
        if len(rows) != n_total:
            raise InconsistentIndicator(
                f"{len(rows)} attribute rows for {n_total} nodes in the indicator file"
            )
        attrs = np.array(rows, dtype=float)

    graphs = []
    for g in range(n_graphs):
        members = order[starts[g]:starts[g + 1]]
        e = [(a, b, w) for (a, b), w in edges[g].items()]
        graphs.append(
            Graph(
                int(sizes[g]),
                e,
                None if labels is None else tuple(int(v) for v in labels[members]),
                None if attrs is None else attrs[members],
            )
        )
    return GraphDataset(tuple(graphs), y, alphabet or (), name)


def write_gram(gram, path, fmt: str = "csv") -> None:
    """Write a square matrix as CSV (17 significant digits) or binary.

    CSV: first line is ``N``, then ``N`` comma-separated rows. Binary: the
    8-byte magic, ``N`` as little-endian int32, then row-major float64.
    """
    k = np.asarray(gram, dtype=float)
    if k.ndim != 2 or k.shape[0] != k.shape[1]:
        raise DataError(f"Gram matrix must be square, got {k.shape}")
    path = Path(path)
    if fmt == "csv":
        with open(path, "w") as fh:
            fh.write(f"{len(k)}\n")
            for row in k:
                fh.write(",".join(format(v, ".16e") for v in row) + "\n")
    elif fmt == "binary":
        with open(path, "wb") as fh:
            fh.write(GRAM_MAGIC)
            fh.write(struct.pack("<i", len(k)))
            fh.write(k.astype("<f8").tobytes(order="C"))
    else:
        raise ValueError(f"unknown format {fmt!r}")


def read_gram(path) -> np.ndarray:
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(len(GRAM_MAGIC))
        if head == GRAM_MAGIC:
            (n,) = struct.unpack("<i", fh.read(4))
            data = np.frombuffer(fh.read(), dtype="<f8")
            if data.size != n * n:
                raise DataError(f"{path}: expected {n * n} values, found {data.size}")
            return data.reshape(n, n).astype(float)
    lines = [ln for _, ln in _lines(path)]
    if not lines:
        raise DataError(f"{path} is empty")
    n = int(lines[0])
    rows = [[float(v) for v in ln.split(",")] for ln in lines[1:]]
    k = np.array(rows, dtype=float).reshape(n, n) if n else np.zeros((0, 0))
    return k


def _fmt(v: float) -> str:
    return format(v, ".17g")


def write_rpf(rpfs, path, steps: int | None = None) -> None:
    """One CSV row per node: ``graph_id, node_id, s1..sS`` (0-based ids)."""
    rpfs = list(rpfs)
    if steps is None:
        steps = rpfs[0].shape[1] if rpfs else 0
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["graph_id", "node_id"] + [f"s{s}" for s in range(1, steps + 1)])
        for gid, r in enumerate(rpfs):
            for nid, row in enumerate(np.asarray(r)):
                w.writerow([gid, nid] + [_fmt(v) for v in row])


def read_rpf(path):
    """Inverse of :func:`write_rpf`; returns a list of per-graph matrices."""
    out = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            out.setdefault(int(row[0]), []).append([float(v) for v in row[2:]])
    return [np.array(out[g]) for g in sorted(out)]


def write_embeddings(emb, path, dims=None, fmt: str = "binary") -> None:
    """Write an ``N x D`` embedding matrix.

    Binary layout: magic, int32 count ``k`` of header integers, then ``k``
    int32 values ``[N, D_0, ..., D_L]``, then row-major little-endian
    float64 payload. CSV: one embedding per line.
    """
    x = np.atleast_2d(np.asarray(emb, dtype=float))
    dims = tuple(dims) if dims is not None else (x.shape[1],)
    if int(np.prod(dims)) != x.shape[1]:
        raise DataError(f"factor dims {dims} do not multiply to {x.shape[1]}")
    if fmt == "binary":
        header = (x.shape[0],) + dims
        with open(path, "wb") as fh:
            fh.write(EMBED_MAGIC)
            fh.write(struct.pack("<i", len(header)))
            fh.write(struct.pack(f"<{len(header)}i", *header))
            fh.write(x.astype("<f8").tobytes(order="C"))
    elif fmt == "csv":
        np.savetxt(path, x, delimiter=",", fmt="%.17g")
    else:
        raise ValueError(f"unknown format {fmt!r}")


def read_embeddings(path):
    """Read a binary embedding file; returns ``(matrix, dims)``."""
    with open(path, "rb") as fh:
        if fh.read(len(EMBED_MAGIC)) != EMBED_MAGIC:
            raise DataError(f"{path}: not an embedding file")
        (k,) = struct.unpack("<i", fh.read(4))
        header = struct.unpack(f"<{k}i", fh.read(4 * k))
        data = np.frombuffer(fh.read(), dtype="<f8")
    n, dims = header[0], header[1:]
    return data.reshape(n, int(np.prod(dims))).astype(float), tuple(dims)
