"""Compiled inner loops over live-edge graphs.

Conventions shared by every kernel: ``state[v]`` is a cascade id or -1 for an
inactive node, ``dist[v]`` is the activation step or -1 for never.
CSR arrays (``ptr``, ``idx``) are absolute offsets into one flat index array so
that a batch of live graphs can share a single buffer.
"""

import numba as nb
import numpy as np


@nb.njit(cache=True)
def _propagate(n, ptr, idx, keep, use_keep, init_state, rank, state, dist, queue):
    tail = 0
    for v in range(n):
        state[v] = init_state[v]
        if init_state[v] >= 0:
            dist[v] = 0
            queue[tail] = v
            tail += 1
        else:
            dist[v] = -1
    head = 0
    while head < tail:
        u = queue[head]
        head += 1
        level = dist[u] + 1
        c = state[u]
        for e in range(ptr[u], ptr[u + 1]):
            if use_keep and not keep[e]:
                continue
            v = idx[e]
            dv = dist[v]
            if dv == -1:
                dist[v] = level
                state[v] = c
                queue[tail] = v
                tail += 1
            elif dv == level and rank[v, c] > rank[v, state[v]]:
                state[v] = c


@nb.njit(cache=True)
def propagate(n, ptr, idx, keep, init_state, rank):
    """Final state and activation step on one live graph given by an edge mask."""
    state = np.empty(n, np.int64)
    dist = np.empty(n, np.int64)
    queue = np.empty(n, np.int64)
    _propagate(n, ptr, idx, keep, True, init_state, rank, state, dist, queue)
    return state, dist


@nb.njit(cache=True)
def misinfo_counts(n, ptr, idx, masks, init_state, rank, is_m):
    """Number of misinformation-active nodes on each live graph (rows of ``masks``)."""
    R = masks.shape[0]
    out = np.zeros(R, np.int64)
    state = np.empty(n, np.int64)
    dist = np.empty(n, np.int64)
    queue = np.empty(n, np.int64)
    for r in range(R):
        _propagate(n, ptr, idx, masks[r], True, init_state, rank, state, dist, queue)
        cnt = 0
        for v in range(n):
            if state[v] >= 0 and is_m[state[v]]:
                cnt += 1
        out[r] = cnt
    return out


@nb.njit(cache=True)
def propagate_csr_batch(n, optr, odst, init_state, rank):
    """Run ``_propagate`` on each pre-filtered live graph ``optr[r]``."""
    R = optr.shape[0]
    states = np.empty((R, n), np.int64)
    dists = np.empty((R, n), np.int64)
    queue = np.empty(n, np.int64)
    dummy = np.empty(0, np.bool_)
    for r in range(R):
        _propagate(n, optr[r], odst, dummy, False, init_state, rank, states[r], dists[r], queue)
    return states, dists


@nb.njit(cache=True)
def _bfs(n, ptr, idx, keep, use_keep, sources, dist, queue):
    tail = 0
    for v in range(n):
        dist[v] = -1
    for v in sources:
        if dist[v] == -1:
            dist[v] = 0
            queue[tail] = v
            tail += 1
    head = 0
    while head < tail:
        u = queue[head]
        head += 1
        for e in range(ptr[u], ptr[u + 1]):
            if use_keep and not keep[e]:
                continue
            v = idx[e]
            if dist[v] == -1:
                dist[v] = dist[u] + 1
                queue[tail] = v
                tail += 1


@nb.njit(cache=True)
def _less(a, b):
    # hop distances with -1 as infinity
    if a == -1:
        return False
    return b == -1 or a < b


@nb.njit(cache=True)
def _fast_is_m(n, ptr, idx, keep, seed_ptr, seed_nodes, is_m, grank, mode, out, dmin, dc, queue):
    C = is_m.shape[0]
    for c in range(C):
        _bfs(n, ptr, idx, keep, True, seed_nodes[seed_ptr[c] : seed_ptr[c + 1]], dc[c], queue)
    for v in range(n):
        dm = -1
        dp = -1
        for c in range(C):
            d = dc[c, v]
            if d == -1:
                continue
            if is_m[c]:
                if dm == -1 or d < dm:
                    dm = d
            elif dp == -1 or d < dp:
                dp = d
        dmin[v] = dp if _less(dp, dm) or dm == -1 else dm
        if dm == -1:
            out[v] = False
        elif mode == 0:
            # misinformation wins ties
            out[v] = not _less(dp, dm)
        elif mode == 1:
            # positive wins ties
            out[v] = _less(dm, dp)
        else:
            best = -1
            for c in range(C):
                if dc[c, v] == dmin[v] and (best == -1 or grank[c] > grank[best]):
                    best = c
            out[v] = is_m[best]


@nb.njit(cache=True)
def fast_is_m(n, ptr, idx, keep, seed_ptr, seed_nodes, is_m, grank, mode):
    """Misinformation-active indicator from hop distances alone.

    ``mode`` 0: M-dominant (strict), 1: P-dominant (ties positive),
    2: homogeneous (nearest seeds, highest global rank).
    """
    C = is_m.shape[0]
    out = np.empty(n, np.bool_)
    dmin = np.empty(n, np.int64)
    dc = np.empty((C, n), np.int64)
    queue = np.empty(n, np.int64)
    _fast_is_m(n, ptr, idx, keep, seed_ptr, seed_nodes, is_m, grank, mode, out, dmin, dc, queue)
    return out, dmin


@nb.njit(cache=True)
def fast_misinfo_counts(n, ptr, idx, masks, seed_ptr, seed_nodes, is_m, grank, mode):
    R = masks.shape[0]
    C = is_m.shape[0]
    res = np.zeros(R, np.int64)
    out = np.empty(n, np.bool_)
    dmin = np.empty(n, np.int64)
    dc = np.empty((C, n), np.int64)
    queue = np.empty(n, np.int64)
    for r in range(R):
        _fast_is_m(n, ptr, idx, masks[r], seed_ptr, seed_nodes, is_m, grank, mode, out, dmin, dc, queue)
        res[r] = out.sum()
    return res


@nb.njit(cache=True)
def greedy_gains(n, optr, odst, iptr, isrc, bstate, bdist, weights, cands, star, rank, is_m):
    """Weighted sum over live graphs of the drop in misinformation-active nodes per candidate.

    Only the region whose activation step or state changes is recomputed:
    nodes are revisited in nondecreasing step order starting from the new seed,
    and a node's state is re-derived from its in-neighbors one step earlier.
    """
    R = optr.shape[0]
    nc = cands.shape[0]
    gains = np.zeros(nc, np.float64)
    wd = np.empty(n, np.int64)
    ws = np.empty(n, np.int64)
    sched = np.zeros(n, np.bool_)
    queue = np.empty(n, np.int64)
    for r in range(R):
        for v in range(n):
            wd[v] = bdist[r, v]
            ws[v] = bstate[r, v]
        op = optr[r]
        ip = iptr[r]
        for i in range(nc):
            x = cands[i]
            old = ws[x]
            if wd[x] == 0:
                if old == star or rank[x, star] < rank[x, old]:
                    continue
            g = 0
            if old >= 0 and is_m[old]:
                g += 1
            ws[x] = star
            wd[x] = 0
            sched[x] = True
            queue[0] = x
            tail = 1
            head = 0
            while head < tail:
                u = queue[head]
                head += 1
                if u != x:
                    lvl = wd[u]
                    s = -1
                    for e in range(ip[u], ip[u + 1]):
                        w = isrc[e]
                        if wd[w] == lvl - 1 and ws[w] >= 0:
                            if s == -1 or rank[u, ws[w]] > rank[u, s]:
                                s = ws[w]
                    ws[u] = s
                    if lvl == bdist[r, u] and s == bstate[r, u]:
                        continue
                    ob = bstate[r, u]
                    if ob >= 0 and is_m[ob]:
                        g += 1
                    if s >= 0 and is_m[s]:
                        g -= 1
                nxt = wd[u] + 1
                for e in range(op[u], op[u + 1]):
                    v = odst[e]
                    if sched[v]:
                        continue
                    if wd[v] != -1 and wd[v] < nxt:
                        continue
                    sched[v] = True
                    wd[v] = nxt
                    queue[tail] = v
                    tail += 1
            if g != 0:
                gains[i] += weights[r] * g
            for j in range(tail):
                v = queue[j]
                sched[v] = False
                wd[v] = bdist[r, v]
                ws[v] = bstate[r, v]
    return gains


@nb.njit(cache=True)
def reach_totals(n, optr, odst):
    """Sum over live graphs of the number of nodes reachable from each node (itself included)."""
    R = optr.shape[0]
    tot = np.zeros(n, np.int64)
    mark = np.full(n, -1, np.int64)
    queue = np.empty(n, np.int64)
    stamp = 0
    for r in range(R):
        p = optr[r]
        for s in range(n):
            stamp += 1
            mark[s] = stamp
            queue[0] = s
            head = 0
            tail = 1
            while head < tail:
                u = queue[head]
                head += 1
                for e in range(p[u], p[u + 1]):
                    v = odst[e]
                    if mark[v] != stamp:
                        mark[v] = stamp
                        queue[tail] = v
                        tail += 1
            tot[s] += tail
    return tot
