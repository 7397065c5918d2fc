"""Reduction from positive-negative partial set cover to seed selection.

Node layout of the reduced graph: ``x_1..x_|X|``, ``y_1..y_|Y|``,
``z_1..z_|Y|``, ``phi_1..phi_m``, then ``a``, ``b1``, ``b2``, ``c``.
Cascades: 0 = misinformation seeded at ``{b1, b2}``, 1 = positive seeded at
``{a}``, 2 = the new positive cascade.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from containment.cascades import CascadeSystem, PriorityProfile
from containment.diffusion import simulate
from containment.errors import ParseError, ValidationError
from containment.graph import DirectedGraph

M1, P1, STAR = 0, 1, 2


@dataclass(frozen=True)
class PspcInstance:
    X: frozenset
    Y: frozenset
    Phi: tuple

    def __post_init__(self):
        X, Y = frozenset(self.X), frozenset(self.Y)
        phi = tuple(frozenset(s) for s in self.Phi)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)
        object.__setattr__(self, "Phi", phi)
        if X & Y:
            raise ValidationError(f"X and Y overlap on {sorted(X & Y)}")
        for i, s in enumerate(phi):
            extra = s - X - Y
            if extra:
                raise ValidationError(f"subset {i} has elements outside X and Y: {sorted(extra)}")


@dataclass
class ReducedInstance:
    graph: DirectedGraph
    system: CascadeSystem
    profile: PriorityProfile
    candidate_set: tuple
    budget: int
    node_roles: dict
    phi_nodes: tuple


def pspc_cost(inst: PspcInstance, selection) -> int:
    """Uncovered X elements plus covered Y elements."""
    covered = frozenset().union(*[frozenset(s) for s in selection]) if selection else frozenset()
    return len(inst.X - covered) + len(inst.Y & covered)


def build_reduction(inst: PspcInstance) -> ReducedInstance:
    xs = sorted(inst.X, key=str)
    ys = sorted(inst.Y, key=str)
    m = len(inst.Phi)
    roles: dict = {}
    idx: dict = {}

    def add(role, key):
        node = len(roles)
        roles[node] = role
        idx[key] = node
        return node

    for x in xs:
        add(f"x:{x}", ("x", x))
    for y in ys:
        add(f"y:{y}", ("y", y))
    for y in ys:
        add(f"z:{y}", ("z", y))
    for i in range(m):
        add(f"phi:{i + 1}", ("phi", i))
    a, b1, b2, c = (add(r, (r,)) for r in ("a", "b1", "b2", "c"))

    edges = []
    for i, s in enumerate(inst.Phi):
        phi = idx[("phi", i)]
        edges += [(phi, idx[("x", e)]) for e in xs if e in s]
        edges += [(phi, idx[("y", e)]) for e in ys if e in s]
    for y in ys:
        edges += [(idx[("y", y)], idx[("z", y)]), (c, idx[("z", y)]), (a, idx[("y", y)])]
    edges += [(b2, idx[("x", x)]) for x in xs]
    edges.append((b1, c))

    n = len(roles)
    graph = DirectedGraph.from_edges(n, edges, p=1.0)
    system = CascadeSystem(("M", "P", "P"), (frozenset({b1, b2}), frozenset({a}), frozenset()), STAR)
    # rank vectors indexed by cascade id (M1, P1, P*)
    rank = np.tile([1, 2, 3], (n, 1))
    for y in ys:
        rank[idx[("z", y)]] = [2, 3, 1]
    phi_nodes = tuple(idx[("phi", i)] for i in range(m))
    return ReducedInstance(graph, system, PriorityProfile(rank), phi_nodes, m, roles, phi_nodes)


def verify_reduction_identity(inst: PspcInstance, selection_indices) -> tuple:
    """Compare the misinformation count on the reduced graph with ``3 + cost``.

    ``selection_indices`` are positions in ``inst.Phi``. Every edge has
    probability 1, so a single deterministic run is the expectation.
    """
    red = build_reduction(inst)
    sel = sorted(set(int(i) for i in selection_indices))
    if any(not 0 <= i < len(inst.Phi) for i in sel):
        raise ValidationError("selection index outside Phi")
    star = [red.phi_nodes[i] for i in sel]
    out = simulate(red.graph, red.system, red.profile, star, 0)
    lhs = float(out.m_active_count)
    rhs = 3 + pspc_cost(inst, [inst.Phi[i] for i in sel])
    return lhs, rhs, lhs == rhs


def parse_pspc(text: str) -> PspcInstance:
    """First line ``|X| |Y| m``, then one line per subset with tokens ``x<i>``/``y<j>`` (1-based)."""
    lines = [ln.strip() for ln in text.splitlines() if not ln.strip().startswith("#")]
    while lines and not lines[0]:
        lines.pop(0)
    if not lines:
        raise ParseError("empty instance")
    try:
        nx_, ny, m = (int(t) for t in lines[0].split())
    except ValueError:
        raise ParseError(f"bad header {lines[0]!r}; expected '|X| |Y| m'") from None
    body = lines[1 : 1 + m]
    body += [""] * (m - len(body))
    X = frozenset(f"x{i}" for i in range(1, nx_ + 1))
    Y = frozenset(f"y{j}" for j in range(1, ny + 1))
    phi = []
    for lineno, ln in enumerate(body, start=2):
        toks = ln.split()
        for t in toks:
            if t not in X and t not in Y:
                raise ParseError(f"line {lineno}: unknown element {t!r}")
        phi.append(frozenset(toks))
    return PspcInstance(X, Y, tuple(phi))


def load_pspc(path) -> PspcInstance:
    return parse_pspc(Path(path).read_text())
