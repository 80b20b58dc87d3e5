import os
import sys
from pathlib import Path

import numpy as np
import pytest

from retgk import Graph

FIXTURES = Path(__file__).parent / "fixtures"


def random_connected_graph(rng, n, extra_prob=0.2, weighted=True, labels=0, attr_dim=0):
    """Random spanning tree plus Erdos-Renyi extra edges."""
    order = rng.permutation(n)
    pairs = set()
    for k in range(1, n):
        a, b = order[k], order[rng.integers(k)]
        pairs.add((min(a, b), max(a, b)))
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < extra_prob:
                pairs.add((i, j))
    edges = [
        (int(i), int(j), float(rng.uniform(0.1, 3.0)) if weighted else 1.0)
        for i, j in sorted(pairs)
    ]
    lab = tuple(int(v) for v in rng.integers(0, labels, n)) if labels else None
    attrs = rng.normal(size=(n, attr_dim)) if attr_dim else None
    return Graph(n, edges, lab, attrs)


def cycle(n, offset=0):
    return [(offset + k, offset + (k + 1) % n, 1.0) for k in range(n)]


def toy_centers_graph():
    """Three degree-3 centres whose neighbours all have degree 2.

    C1 and C2 sit on spiders with legs of length 6; C2's legs carry a pendant
    at depth 5, so the two agree for several steps. C3's neighbours lead into
    a triangle at depth 2. Returns ``(graph, (c1, c2, c3))``.
    """
    edges, count = [], [0]

    def new():
        count[0] += 1
        return count[0] - 1

    def leg(u, length):
        nodes, prev = [], u
        for _ in range(length):
            v = new()
            edges.append((prev, v, 1.0))
            nodes.append(v)
            prev = v
        return nodes

    c1 = new()
    legs1 = [leg(c1, 6) for _ in range(3)]
    c2 = new()
    legs2 = [leg(c2, 6) for _ in range(3)]
    for lg in legs2:
        leg(lg[4], 1)
    c3 = new()
    nb = [new() for _ in range(3)]
    tri = [new() for _ in range(3)]
    for a, b in zip(nb, tri):
        edges += [(c3, a, 1.0), (a, b, 1.0)]
    edges += [(tri[0], tri[1], 1.0), (tri[1], tri[2], 1.0), (tri[0], tri[2], 1.0)]
    hub = new()
    for lg in legs1 + legs2:
        edges.append((lg[-1], hub, 1.0))
    edges.append((tri[0], hub, 1.0))
    return Graph(count[0], edges), (c1, c2, c3)


def write_tu(directory, name, graphs, classes):
    """Write graphs in TU text format (1-based ids, both edge directions)."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    a_lines, ind, nl, na = [], [], [], []
    offset = 0
    for gid, g in enumerate(graphs, 1):
        for i, j, _ in g.edges:
            a_lines.append(f"{offset + i + 1}, {offset + j + 1}")
            if i != j:
                a_lines.append(f"{offset + j + 1}, {offset + i + 1}")
        ind += [str(gid)] * g.n
        if g.labels is not None:
            nl += [str(v) for v in g.labels]
        if g.attrs is not None:
            na += [",".join(repr(float(v)) for v in row) for row in g.attrs]
        offset += g.n
    files = {"A": a_lines, "graph_indicator": ind, "graph_labels": [str(c) for c in classes]}
    if nl:
        files["node_labels"] = nl
    if na:
        files["node_attributes"] = na
    for suffix, lines in files.items():
        (d / f"{name}_{suffix}.txt").write_text("\n".join(lines) + "\n")
    return d


def triangles_vs_squares(copies=10):
    """Disjoint unions of triangles (class 0) or 4-cycles (class 1)."""
    graphs, classes = [], []
    for k in range(copies):
        reps = 1 + k % 3
        graphs.append(Graph(3 * reps, sum((cycle(3, 3 * r) for r in range(reps)), [])))
        classes.append(0)
        graphs.append(Graph(4 * reps, sum((cycle(4, 4 * r) for r in range(reps)), [])))
        classes.append(1)
    return graphs, classes


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def shapes_dir(tmp_path):
    graphs, classes = triangles_vs_squares()
    return write_tu(tmp_path / "data", "SHAPES", graphs, classes)


def dataset_dir():
    """Directory with public TU datasets, from ``RETGK_DATA_DIR``."""
    return os.environ.get("RETGK_DATA_DIR")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
