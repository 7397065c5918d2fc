"""Small fixed instances used by the CLI self-checks and the test-suite.

Node ``v_i`` is id ``i - 1`` throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from containment.cascades import CascadeSystem, PriorityProfile
from containment.graph import DirectedGraph


@dataclass
class Instance:
    graph: DirectedGraph
    system: CascadeSystem
    profile: PriorityProfile
    star_seeds: tuple = ()


def three_cascade_trace(flip_v4: bool = False) -> Instance:
    """Three cascades from v1, v2, v3 meeting at v4 and v6; all edges certain.

    Cascade 0 (misinformation) seeds v1, cascade 1 seeds v2, the new cascade
    (id 2) seeds v3. At v4 cascade 0 outranks cascade 1 unless ``flip_v4``;
    at v6 the order is 1 > 2 > 0.
    """
    edges = [(0, 3), (1, 3), (2, 4), (3, 5), (4, 5)]
    g = DirectedGraph.from_edges(6, edges, p=1.0)
    system = CascadeSystem(("M", "P", "P"), ({0}, {1}, ()), 2)
    rank = np.tile([1, 2, 3], (6, 1))
    rank[3] = [2, 3, 1] if flip_v4 else [3, 2, 1]
    rank[5] = [1, 3, 2]
    return Instance(g, system, PriorityProfile(rank), (2,))


def non_submodular_witness() -> Instance:
    """Seven nodes where seeding v2 or v4 hands v5 to the misinformation.

    The existing positive cascade starts at v1 and reaches v3 at step 1; the
    misinformation starts at v7 and reaches v5 through v6 at step 2, the same
    step v3's cascade arrives. v5 prefers the existing positive cascade to
    the misinformation but the misinformation to the new cascade, and v3
    prefers the new cascade, so any new seed adjacent to v3 flips v5.
    Values (not-misinformation counts): f({}) = 5, f({v2}) = f({v4}) = f({v2, v4}) = 4.
    """
    edges = [(0, 2), (1, 2), (3, 2), (2, 4), (6, 5), (5, 4)]
    g = DirectedGraph.from_edges(7, edges, p=1.0)
    system = CascadeSystem(("M", "P", "P"), ({6}, {0}, ()), 2)
    rank = np.tile([1, 2, 3], (7, 1))
    rank[4] = [2, 3, 1]
    return Instance(g, system, PriorityProfile(rank))
