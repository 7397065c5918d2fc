"""Directed probabilistic graphs, edge-list ingestion and probability assignment."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence, Union

import networkx as nx
import numpy as np

from containment.errors import ParseError, ValidationError


@dataclass(frozen=True)
class Uniform:
    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValidationError(f"uniform probability {self.p} outside [0, 1]")


@dataclass(frozen=True)
class WeightedCascade:
    pass


@dataclass(frozen=True)
class ActivityBased:
    p_max: float = 0.2
    p_base: float = 0.4

    def __post_init__(self):
        if self.p_max < 0 or self.p_base < 0 or self.p_max + self.p_base > 1.0:
            raise ValidationError(
                f"activity-based mode needs p_max, p_base >= 0 and p_max + p_base <= 1, "
                f"got p_max={self.p_max}, p_base={self.p_base}"
            )


@dataclass(frozen=True)
class FromFile:
    pass


ProbabilityMode = Union[Uniform, WeightedCascade, ActivityBased, FromFile]


class DirectedGraph:
    """Immutable directed graph with one propagation probability per edge.

    Nodes are dense integers ``0..node_count-1``. Edges are stored sorted by
    ``(source, target)``; the edge index is the position in that order and is
    what live-edge masks refer to. ``labels[i]`` is the original id of node ``i``
    when the graph was loaded from a file with sparse ids.
    """

    def __init__(
        self,
        node_count: int,
        src: Sequence[int],
        dst: Sequence[int],
        prob: Sequence[float] | None = None,
        activity: Sequence[int] | None = None,
        labels: Sequence | None = None,
    ):
        src = np.asarray(src, dtype=np.int64).reshape(-1)
        dst = np.asarray(dst, dtype=np.int64).reshape(-1)
        if src.shape != dst.shape:
            raise ValidationError("source and target arrays differ in length")
        m = src.size
        prob = np.zeros(m) if prob is None else np.asarray(prob, dtype=np.float64).reshape(-1)
        if prob.size != m:
            raise ValidationError("probability array length does not match edge count")
        if activity is not None:
            activity = np.asarray(activity, dtype=np.int64).reshape(-1)
            if activity.size != m:
                raise ValidationError("activity array length does not match edge count")
            if (activity < 0).any():
                raise ValidationError("negative activity count")
        if node_count < 0:
            raise ValidationError("negative node count")
        if m and (src.min() < 0 or dst.min() < 0 or max(src.max(), dst.max()) >= node_count):
            raise ValidationError("edge endpoint outside 0..node_count-1")
        if (src == dst).any():
            i = int(np.flatnonzero(src == dst)[0])
            raise ValidationError(f"self-loop at node {int(src[i])}")
        if ((prob < 0) | (prob > 1) | np.isnan(prob)).any():
            raise ValidationError("edge probability outside [0, 1]")

        order = np.lexsort((dst, src))
        src, dst, prob = src[order], dst[order], prob[order]
        if activity is not None:
            activity = activity[order]
        dup = (src[1:] == src[:-1]) & (dst[1:] == dst[:-1])
        if dup.any():
            i = int(np.flatnonzero(dup)[0])
            raise ValidationError(f"duplicate edge ({int(src[i])}, {int(dst[i])})")

        self.node_count = int(node_count)
        self.src = src
        self.dst = dst
        self.prob = prob
        self.activity = activity
        self.labels = list(labels) if labels is not None else list(range(node_count))
        for arr in (self.src, self.dst, self.prob, self.activity):
            if arr is not None:
                arr.flags.writeable = False

    @classmethod
    def from_edges(cls, node_count: int, edges: Iterable[tuple], p: float | None = None):
        """Build from ``(u, v)`` or ``(u, v, prob)`` tuples; ``p`` fills missing probabilities."""
        src, dst, prob = [], [], []
        for e in edges:
            src.append(e[0])
            dst.append(e[1])
            if len(e) > 2:
                prob.append(e[2])
            elif p is not None:
                prob.append(p)
            else:
                prob.append(0.0)
        return cls(node_count, src, dst, prob)

    @property
    def edge_count(self) -> int:
        return int(self.src.size)

    def edges(self):
        return list(zip(self.src.tolist(), self.dst.tolist(), self.prob.tolist()))

    def with_probabilities(self, prob) -> "DirectedGraph":
        return DirectedGraph(self.node_count, self.src, self.dst, prob, self.activity, self.labels)

    @cached_property
    def out_ptr(self) -> np.ndarray:
        ptr = np.zeros(self.node_count + 1, dtype=np.int64)
        np.cumsum(np.bincount(self.src, minlength=self.node_count), out=ptr[1:])
        return ptr

    @cached_property
    def _in_order(self) -> np.ndarray:
        return np.lexsort((self.src, self.dst))

    @cached_property
    def in_ptr(self) -> np.ndarray:
        ptr = np.zeros(self.node_count + 1, dtype=np.int64)
        np.cumsum(np.bincount(self.dst, minlength=self.node_count), out=ptr[1:])
        return ptr

    @cached_property
    def in_src(self) -> np.ndarray:
        return self.src[self._in_order]

    @cached_property
    def in_eid(self) -> np.ndarray:
        """Edge index (into the ``src``/``dst`` order) of each in-CSR slot."""
        return self._in_order.astype(np.int64)

    def in_degree(self) -> np.ndarray:
        return np.bincount(self.dst, minlength=self.node_count)

    def out_degree(self) -> np.ndarray:
        return np.bincount(self.src, minlength=self.node_count)

    def out_neighbors(self, u: int) -> np.ndarray:
        return self.dst[self.out_ptr[u] : self.out_ptr[u + 1]]

    def node_weights(self) -> np.ndarray:
        """Sum of out-edge probabilities per node."""
        return np.bincount(self.src, weights=self.prob, minlength=self.node_count)

    def __repr__(self):
        return f"DirectedGraph(node_count={self.node_count}, edge_count={self.edge_count})"


def load_edge_list(path, directed_flag: bool = True, third_column: str = "activity") -> DirectedGraph:
    """Read a whitespace-separated edge list.

    Lines are ``u v`` or ``u v x`` where ``x`` is an activity count
    (``third_column="activity"``) or a propagation probability
    (``third_column="prob"``). ``#`` lines and blank lines are skipped. Node ids
    are compacted to a dense range in order of first appearance. With
    ``directed_flag=False`` every line contributes both arcs.
    """
    if third_column not in ("activity", "prob"):
        raise ValueError("third_column must be 'activity' or 'prob'")
    ids: dict = {}
    src, dst, extra = [], [], []
    has_extra = None
    text = Path(path).read_text()
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        tok = s.split()
        if len(tok) not in (2, 3):
            raise ParseError(f"{path}:{lineno}: expected 2 or 3 fields, got {len(tok)}")
        try:
            u, v = int(tok[0]), int(tok[1])
            x = None
            if len(tok) == 3:
                x = int(tok[2]) if third_column == "activity" else float(tok[2])
        except ValueError:
            raise ParseError(f"{path}:{lineno}: non-numeric token in {s!r}") from None
        if has_extra is None:
            has_extra = x is not None
        elif has_extra != (x is not None):
            raise ParseError(f"{path}:{lineno}: inconsistent column count")
        if x is not None and third_column == "activity" and x < 0:
            raise ValidationError(f"{path}:{lineno}: negative activity {x}")
        for node in (u, v):
            if node not in ids:
                ids[node] = len(ids)
        arcs = [(ids[u], ids[v])] if directed_flag else [(ids[u], ids[v]), (ids[v], ids[u])]
        for a, b in arcs:
            src.append(a)
            dst.append(b)
            extra.append(x)
    labels = list(ids)
    if has_extra and third_column == "activity":
        return DirectedGraph(len(ids), src, dst, None, extra, labels)
    if has_extra:
        return DirectedGraph(len(ids), src, dst, extra, None, labels)
    return DirectedGraph(len(ids), src, dst, None, None, labels)


def assign_probabilities(g: DirectedGraph, mode: ProbabilityMode) -> DirectedGraph:
    if isinstance(mode, FromFile):
        return g
    if isinstance(mode, Uniform):
        return g.with_probabilities(np.full(g.edge_count, mode.p))
    if isinstance(mode, WeightedCascade):
        indeg = g.in_degree()
        return g.with_probabilities(1.0 / indeg[g.dst] if g.edge_count else np.zeros(0))
    if isinstance(mode, ActivityBased):
        if g.activity is None:
            raise ValidationError("activity-based probabilities need an activity count on every edge")
        a_max = g.activity.max() if g.edge_count else 0
        if a_max <= 0:
            raise ValidationError("activity-based probabilities need at least one positive activity")
        return g.with_probabilities(g.activity / a_max * mode.p_max + mode.p_base)
    raise TypeError(f"unknown probability mode {mode!r}")


def parse_probability_mode(text: str) -> ProbabilityMode:
    """Parse ``uniform:0.1``, ``wc``, ``activity:0.2:0.4`` or ``file``."""
    name, *args = text.strip().split(":")
    name = name.lower()
    try:
        if name == "uniform":
            return Uniform(float(args[0]) if args else 0.1)
        if name in ("wc", "weighted_cascade", "weighted-cascade"):
            return WeightedCascade()
        if name in ("activity", "activity_based"):
            vals = [float(a) for a in args]
            return ActivityBased(*vals)
        if name in ("file", "from_file"):
            return FromFile()
    except (ValueError, TypeError, IndexError):
        raise ParseError(f"bad probability mode {text!r}") from None
    raise ParseError(f"unknown probability mode {text!r}")


def erdos_renyi(n: int, m: int, seed: int = 0) -> DirectedGraph:
    """Directed G(n, m) without self-loops."""
    nxg = nx.gnm_random_graph(n, m, seed=seed, directed=True)
    return from_networkx(nxg)


def preferential_attachment(n: int, m_attach: int, seed: int = 0) -> DirectedGraph:
    """Barabasi-Albert graph with every undirected edge expanded to two arcs."""
    nxg = nx.barabasi_albert_graph(n, m_attach, seed=seed).to_directed()
    return from_networkx(nxg)


def from_networkx(nxg) -> DirectedGraph:
    nodes = sorted(nxg.nodes())
    index = {v: i for i, v in enumerate(nodes)}
    pairs = {(index[u], index[v]) for u, v in nxg.edges() if u != v}
    if not nxg.is_directed():
        pairs |= {(b, a) for a, b in pairs}
    pairs = sorted(pairs)
    src = [a for a, _ in pairs]
    dst = [b for _, b in pairs]
    return DirectedGraph(len(nodes), src, dst, None, None, nodes)
