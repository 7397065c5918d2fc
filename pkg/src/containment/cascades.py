"""Cascade systems and per-node cascade priorities."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from containment.errors import ValidationError

MISINFO = "M"
POSITIVE = "P"

PRIORITY_KINDS = ("homogeneous", "m_dominant", "p_dominant", "random", "explicit")


@dataclass(frozen=True)
class CascadeSystem:
    """Existing misinformation/positive cascades plus the new positive cascade.

    Cascade ids are dense ``0..n_cascades-1``. ``seeds[star_id]`` is always empty;
    the new cascade's seeds are passed separately wherever they are needed.
    """

    groups: tuple
    seeds: tuple
    star_id: int

    def __post_init__(self):
        groups = tuple(str(g).upper() for g in self.groups)
        seeds = tuple(frozenset(int(v) for v in s) for s in self.seeds)
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "seeds", seeds)
        if len(groups) != len(seeds):
            raise ValidationError("groups and seeds differ in length")
        if any(g not in (MISINFO, POSITIVE) for g in groups):
            raise ValidationError(f"cascade groups must be 'M' or 'P', got {groups}")
        if not 0 <= self.star_id < len(groups):
            raise ValidationError(f"star cascade id {self.star_id} out of range")
        if groups[self.star_id] != POSITIVE:
            raise ValidationError("the new cascade must belong to the positive group")
        if seeds[self.star_id]:
            raise ValidationError("the new cascade's seeds are a decision variable, not fixed")

    @classmethod
    def build(cls, m_seeds: Iterable[Iterable[int]] = (), p_seeds: Iterable[Iterable[int]] = ()):
        """M cascades get the lowest ids, then P cascades, then the new cascade."""
        m_seeds = [frozenset(s) for s in m_seeds]
        p_seeds = [frozenset(s) for s in p_seeds]
        groups = [MISINFO] * len(m_seeds) + [POSITIVE] * (len(p_seeds) + 1)
        return cls(tuple(groups), tuple(m_seeds + p_seeds + [frozenset()]), len(groups) - 1)

    @property
    def n_cascades(self) -> int:
        return len(self.groups)

    @property
    def is_misinfo(self) -> np.ndarray:
        return np.array([g == MISINFO for g in self.groups], dtype=bool)

    @property
    def m_ids(self) -> list:
        return [c for c, g in enumerate(self.groups) if g == MISINFO]

    @property
    def p_ids(self) -> list:
        """Positive cascades including the new one."""
        return [c for c, g in enumerate(self.groups) if g == POSITIVE]

    def existing_seed_nodes(self) -> frozenset:
        return frozenset().union(*self.seeds)

    def misinfo_seed_nodes(self) -> frozenset:
        return frozenset().union(*(self.seeds[c] for c in self.m_ids))

    def positive_seed_nodes(self, star_seeds=()) -> frozenset:
        return frozenset().union(*(self.seeds[c] for c in self.p_ids)) | frozenset(star_seeds)

    def seed_lists(self, star_seeds=()) -> list:
        out = [set(s) for s in self.seeds]
        out[self.star_id] = set(star_seeds)
        return out

    def check_nodes(self, node_count: int, star_seeds=()):
        for c, s in enumerate(self.seed_lists(star_seeds)):
            bad = [v for v in s if not 0 <= v < node_count]
            if bad:
                raise ValidationError(f"cascade {c} seeds unknown nodes {sorted(bad)}")


class PriorityProfile:
    """Per-node ranks over cascades; ``rank[v, c]`` larger means higher priority at ``v``."""

    def __init__(self, rank):
        rank = np.array(rank, dtype=np.int64)
        if rank.ndim != 2:
            raise ValidationError("rank table must be 2-dimensional (nodes x cascades)")
        n, k = rank.shape
        if n and k and not (np.sort(rank, axis=1) == np.arange(1, k + 1)).all():
            bad = int(np.flatnonzero(~(np.sort(rank, axis=1) == np.arange(1, k + 1)).all(axis=1))[0])
            raise ValidationError(f"ranks at node {bad} are not a permutation of 1..{k}")
        rank.flags.writeable = False
        self.rank = rank

    @property
    def node_count(self) -> int:
        return self.rank.shape[0]

    @property
    def n_cascades(self) -> int:
        return self.rank.shape[1]

    def order_at(self, v: int) -> list:
        """Cascade ids at node ``v`` from lowest to highest priority."""
        return [int(c) for c in np.argsort(self.rank[v])]

    def __eq__(self, other):
        return isinstance(other, PriorityProfile) and np.array_equal(self.rank, other.rank)

    def __repr__(self):
        return f"PriorityProfile(nodes={self.node_count}, cascades={self.n_cascades})"

    def is_homogeneous(self) -> bool:
        return self.node_count == 0 or bool((self.rank == self.rank[0]).all())

    def is_m_dominant(self, system: CascadeSystem) -> bool:
        return _group_dominates(self.rank, system.m_ids, system.p_ids)

    def is_p_dominant(self, system: CascadeSystem) -> bool:
        return _group_dominates(self.rank, system.p_ids, system.m_ids)

    def classes(self, system: CascadeSystem) -> set:
        out = set()
        if self.is_homogeneous():
            out.add("homogeneous")
        if self.is_m_dominant(system):
            out.add("m_dominant")
        if self.is_p_dominant(system):
            out.add("p_dominant")
        return out


def _group_dominates(rank, high, low) -> bool:
    if not high or not low or rank.shape[0] == 0:
        return True
    return bool((rank[:, high].min(axis=1) > rank[:, low].max(axis=1)).all())


def _ranks_from_keys(keys: np.ndarray) -> np.ndarray:
    return np.argsort(np.argsort(keys, axis=1, kind="stable"), axis=1, kind="stable") + 1


def _check_perm(perm, k) -> np.ndarray:
    perm = np.asarray(perm, dtype=np.int64).reshape(-1)
    if perm.size != k or sorted(perm.tolist()) != list(range(1, k + 1)):
        raise ValidationError(f"global ranks {perm.tolist()} are not a permutation of 1..{k}")
    return perm


def random_node_ranks(seed: int, node_count: int, n_cascades: int) -> np.ndarray:
    """Independent uniform permutation per node; node ``v`` draws from stream ``(seed, v)``."""
    rank = np.empty((node_count, n_cascades), dtype=np.int64)
    for v in range(node_count):
        rng = np.random.default_rng([seed, v])
        rank[v] = rng.permutation(n_cascades) + 1
    return rank


def make_priority_profile(
    kind: str,
    system: CascadeSystem,
    node_count: int,
    perm: Sequence[int] | None = None,
    seed: int | None = None,
    table=None,
) -> PriorityProfile:
    """Build a profile of one of the kinds in ``PRIORITY_KINDS``.

    ``perm`` is a global rank vector (``perm[c]`` is the rank of cascade ``c``)
    used by ``homogeneous`` and as the within-group order of the dominant kinds;
    it defaults to ranking cascades by id.
    """
    k = system.n_cascades
    if kind == "explicit":
        if table is None:
            raise ValidationError("explicit priorities need a rank table")
        prof = PriorityProfile(table)
        if prof.rank.shape != (node_count, k):
            raise ValidationError(f"rank table shape {prof.rank.shape} != ({node_count}, {k})")
        return prof
    if kind == "random":
        return PriorityProfile(random_node_ranks(0 if seed is None else seed, node_count, k))
    perm = np.arange(1, k + 1) if perm is None else _check_perm(perm, k)
    base = PriorityProfile(np.tile(perm, (node_count, 1)))
    if kind == "homogeneous":
        return base
    if kind == "m_dominant":
        return induce_lower_priority(base, system)
    if kind == "p_dominant":
        return induce_upper_priority(base, system)
    raise ValidationError(f"unknown priority kind {kind!r}; expected one of {PRIORITY_KINDS}")


def _induce(p: PriorityProfile, system: CascadeSystem, positive_on_top: bool) -> PriorityProfile:
    k = system.n_cascades
    lift = ~system.is_misinfo if positive_on_top else system.is_misinfo
    keys = p.rank + np.where(lift, k, 0)
    return PriorityProfile(_ranks_from_keys(keys))


def induce_upper_priority(p: PriorityProfile, system: CascadeSystem) -> PriorityProfile:
    """P-dominant reordering that keeps the order inside each group."""
    return _induce(p, system, positive_on_top=True)


def induce_lower_priority(p: PriorityProfile, system: CascadeSystem) -> PriorityProfile:
    """M-dominant reordering that keeps the order inside each group."""
    return _induce(p, system, positive_on_top=False)
