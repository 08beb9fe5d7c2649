"""Expected-spread computation three ways.

* Monte-Carlo (``mcs_spread``): mean reachable-set size over independent
  live-edge samples; the workhorse estimator.
* Exact world enumeration (``exact_spread``): sums over all 2^k
  realizations of the probabilistic edges reachable from the seed; the
  desk-scale oracle every estimator is checked against.
* Per-vertex spread decrease (``decrease_es``): one dominator tree per
  sample gives the spread decrease of *every* candidate blocker at once,
  instead of one Monte-Carlo run per candidate.

Blocking never rebuilds the graph: edges pointing at a blocked vertex
are masked during traversal, which is equivalent to removing the vertex.
"""

import math
from dataclasses import dataclass

import numba
import numpy as np
from numba import njit, prange

from .dominator import _accumulate_sizes, _lt_idom, _pred_csr
from .rng import edge_uniform, sample_key
from .sampling import _dfs_sample


class OracleInfeasibleError(RuntimeError):
    """Too many probabilistic edges for exact world enumeration."""


@dataclass(frozen=True)
class SpreadEstimate:
    """Expected spread in vertices, seed(s) included.

    ``stderr`` is the standard error of the mean for Monte-Carlo results
    and 0 for exact ones.  ``marginals`` (exact oracle only, on request)
    maps vertex id to its activation probability.
    """

    value: float
    method: str          # "mcs" | "exact" | "sampled"
    rounds: int
    stderr: float = 0.0
    marginals: dict | None = None


@dataclass(eq=False, frozen=True)
class DeltaVector:
    """Estimated spread decrease per candidate blocker.

    ``delta[u]`` estimates E(spread) - E(spread with u blocked); the seed
    entry is NaN (blocking the seed is undefined), vertices never reached
    stay at 0.  ``stderr`` is the per-vertex standard error of the mean,
    and ``mean_reach``/``reach_stderr`` summarize the same samples'
    reachable-set sizes (an unblocked spread estimate for free).
    """

    delta: np.ndarray
    stderr: np.ndarray
    theta: int
    excluded: int
    mean_reach: float
    reach_stderr: float

    def ranked(self):
        """(vertex, delta) pairs sorted by decreasing delta, ties by id."""
        n = len(self.delta)
        ids = [u for u in range(n) if u != self.excluded]
        ids.sort(key=lambda u: (-self.delta[u], u))
        return [(u, float(self.delta[u])) for u in ids]

    def spread_estimate(self):
        """The same samples' unblocked-spread estimate, as a SpreadEstimate."""
        return SpreadEstimate(value=self.mean_reach, method="sampled",
                              rounds=self.theta, stderr=self.reach_stderr)

    def to_csv(self, labels=None):
        lines = ["vertex,delta"]
        for u, d in self.ranked():
            ext = u if labels is None else int(labels[u])
            lines.append(f"{ext},{d!r}")
        return "\n".join(lines) + "\n"


def _blocked_mask(g, blockers, s=None):
    mask = np.zeros(g.n, np.bool_)
    for b in blockers:
        b = int(b)
        if not (0 <= b < g.n):
            raise ValueError(f"blocker {b} out of range")
        mask[b] = True
    if s is not None and mask[s]:
        raise ValueError("seed cannot be blocked")
    return mask


@njit(cache=True)
def _count_reach(indptr, targets, probs, blocked, root, key, queue, stamp, epoch):
    """Reachable-set size of one lazy sample (coin flips on first touch)."""
    queue[0] = root
    stamp[root] = epoch
    head = 0
    tail = 1
    while head < tail:
        u = queue[head]
        head += 1
        for k in range(indptr[u], indptr[u + 1]):
            v = targets[k]
            if blocked[v] or stamp[v] == epoch:
                continue
            if edge_uniform(key, k) < probs[k]:
                stamp[v] = epoch
                queue[tail] = v
                tail += 1
    return tail


@njit(cache=True, parallel=True)
def _mcs_batch(indptr, targets, probs, blocked, root, master, r, nchunks):
    """Sum and sum of squares of reach counts over r samples."""
    n = len(indptr) - 1
    chunk = (r + nchunks - 1) // nchunks
    total = np.int64(0)
    total_sq = np.int64(0)
    for c in prange(nchunks):
        lo = c * chunk
        hi = min(r, lo + chunk)
        if lo >= hi:
            continue
        queue = np.empty(n, np.int32)
        stamp = np.zeros(n, np.int64)
        sub = np.int64(0)
        sub_sq = np.int64(0)
        for i in range(lo, hi):
            key = sample_key(master, np.int64(i))
            cnt = np.int64(_count_reach(indptr, targets, probs, blocked,
                                        root, key, queue, stamp,
                                        np.int64(i + 1)))
            sub += cnt
            sub_sq += cnt * cnt
        total += sub
        total_sq += sub_sq
    return total, total_sq


def _mean_se(total, total_sq, r):
    mean = total / r
    if r > 1:
        var = max(0.0, (total_sq - r * mean * mean) / (r - 1))
        se = math.sqrt(var / r)
    else:
        se = 0.0
    return mean, se


def mcs_spread(g, s, blockers=(), r=10000, master_seed=0):
    """Monte-Carlo spread estimate of seed s on g with ``blockers`` removed."""
    if not g.has_probs():
        raise ValueError("assign probabilities before estimating spread")
    if not (0 <= s < g.n):
        raise ValueError(f"seed {s} out of range")
    if r < 1:
        raise ValueError("need at least one round")
    blocked = _blocked_mask(g, blockers, s)
    master = np.uint64(int(master_seed) & 0xFFFFFFFFFFFFFFFF)
    nchunks = numba.get_num_threads()
    total, total_sq = _mcs_batch(g.indptr, g.targets, g.probs, blocked,
                                 s, master, r, nchunks)
    mean, se = _mean_se(int(total), int(total_sq), r)
    return SpreadEstimate(value=mean, method="mcs", rounds=r, stderr=se)


def _probabilistic_closure(g, seeds, blocked):
    """Vertices reachable from the seeds if every p>0 edge were live."""
    seen = np.zeros(g.n, np.bool_)
    stack = list(seeds)
    for s in seeds:
        seen[s] = True
    while stack:
        u = stack.pop()
        tgts, ps = g.out_edges(u)
        for v, p in zip(tgts, ps):
            v = int(v)
            if p > 0.0 and not blocked[v] and not seen[v]:
                seen[v] = True
                stack.append(v)
    return seen


def _count_probabilistic(g, seeds, blocked):
    """Probabilistic edges with a reachable source and unblocked target."""
    reachable = _probabilistic_closure(g, seeds, blocked)
    k = 0
    for u in np.nonzero(reachable)[0]:
        tgts, ps = g.out_edges(int(u))
        for v, p in zip(tgts, ps):
            if not blocked[int(v)] and 0.0 < p < 1.0:
                k += 1
    return k


def oracle_feasible(g, s, blockers=(), budget=25):
    """Whether exact_spread would stay within its enumeration budget."""
    seeds = (int(s),) if isinstance(s, (int, np.integer)) else tuple(s)
    blocked = _blocked_mask(g, blockers)
    return _count_probabilistic(g, seeds, blocked) <= budget


def exact_spread(g, s, blockers=(), *, marginals=False, budget=25):
    """Exact expected spread by enumerating all live-edge worlds.

    ``s`` may be a single seed or an iterable of seeds.  Edges with
    p in {0, 1} cost nothing; each of the k probabilistic edges reachable
    from the seeds doubles the world count, so k is capped at ``budget``
    (raises OracleInfeasibleError beyond it; callers fall back to
    Monte-Carlo).  Worlds are visited in Gray-code order so the live
    adjacency updates one edge at a time; each world's probability is a
    fresh k-factor product to keep the result exact to float precision.
    """
    if not g.has_probs():
        raise ValueError("assign probabilities before computing spread")
    if isinstance(s, (int, np.integer)):
        seeds = (int(s),)
    else:
        seeds = tuple(sorted({int(x) for x in s}))
        if not seeds:
            raise ValueError("need at least one seed")
    for x in seeds:
        if not (0 <= x < g.n):
            raise ValueError(f"seed {x} out of range")
    blocked = _blocked_mask(g, blockers)
    if any(blocked[x] for x in seeds):
        raise ValueError("seed cannot be blocked")

    reachable = _probabilistic_closure(g, seeds, blocked)
    det_adj = {}
    prob_edges = []
    prob_p = []
    for u in np.nonzero(reachable)[0]:
        u = int(u)
        mask = 0
        tgts, ps = g.out_edges(u)
        for v, p in zip(tgts, ps):
            v = int(v)
            if blocked[v] or p == 0.0:
                continue
            if p == 1.0:
                mask |= 1 << v
            else:
                prob_edges.append((u, v))
                prob_p.append(float(p))
        det_adj[u] = mask
    k = len(prob_edges)
    if k > budget:
        raise OracleInfeasibleError(
            f"{k} probabilistic edges reachable from the seed exceed the "
            f"enumeration budget of {budget}")

    seed_mask = 0
    for x in seeds:
        seed_mask |= 1 << x
    adj = dict(det_adj)
    live = [False] * k
    total = 0.0
    marg = [0.0] * g.n if marginals else None
    for w in range(1 << k):
        if w > 0:
            j = (w & -w).bit_length() - 1
            live[j] = not live[j]
            u, v = prob_edges[j]
            adj[u] ^= 1 << v
        wp = 1.0
        for j in range(k):
            wp *= prob_p[j] if live[j] else 1.0 - prob_p[j]
        reach = seed_mask
        frontier = seed_mask
        while frontier:
            nxt = 0
            f = frontier
            while f:
                low = f & -f
                nxt |= adj.get(low.bit_length() - 1, 0)
                f ^= low
            frontier = nxt & ~reach
            reach |= frontier
        total += wp * reach.bit_count()
        if marginals:
            rr = reach
            while rr:
                low = rr & -rr
                marg[low.bit_length() - 1] += wp
                rr ^= low
    result = SpreadEstimate(value=total, method="exact", rounds=1 << k,
                            stderr=0.0,
                            marginals={u: marg[u] for u in range(g.n)
                                       if marg[u] > 0.0} if marginals else None)
    return result


@njit(cache=True, parallel=True)
def _delta_batch(indptr, targets, probs, blocked, root, master, theta,
                 nchunks, acc, acc_sq, racc, racc_sq):
    """Accumulate dominator-subtree sizes over theta samples.

    Per-chunk integer accumulators make the totals independent of the
    chunk count and thread schedule; the caller divides by theta once.
    """
    n = len(indptr) - 1
    m = len(targets)
    chunk = (theta + nchunks - 1) // nchunks
    for c in prange(nchunks):
        lo = c * chunk
        hi = min(theta, lo + chunk)
        if lo >= hi:
            continue
        order = np.empty(n, np.int32)
        parent = np.empty(n, np.int32)
        loc = np.empty(n, np.int32)
        stamp = np.zeros(n, np.int64)
        stack_v = np.empty(n, np.int32)
        stack_c = np.empty(n, np.int64)
        ke_src = np.empty(m, np.int32)
        ke_dst = np.empty(m, np.int32)
        pptr = np.empty(n + 1, np.int64)
        psrc = np.empty(m, np.int32)
        semi = np.empty(n, np.int32)
        idom = np.empty(n, np.int32)
        ancestor = np.empty(n, np.int32)
        label = np.empty(n, np.int32)
        bh = np.empty(n, np.int32)
        bn = np.empty(n, np.int32)
        cstack = np.empty(n, np.int32)
        sizes = np.empty(n, np.int64)
        for i in range(lo, hi):
            key = sample_key(master, np.int64(i))
            nr, nke = _dfs_sample(indptr, targets, probs, blocked, root, key,
                                  order, parent, loc, stamp, np.int64(i + 1),
                                  stack_v, stack_c, ke_src, ke_dst)
            racc[c] += nr
            racc_sq[c] += np.int64(nr) * np.int64(nr)
            if nr > 1:
                _pred_csr(nr, nke, ke_src, ke_dst, pptr, psrc)
                _lt_idom(nr, parent, pptr, psrc, semi, idom, ancestor,
                         label, bh, bn, cstack)
                _accumulate_sizes(nr, idom, sizes)
                for vl in range(1, nr):
                    v = order[vl]
                    sz = sizes[vl]
                    acc[c, v] += sz
                    acc_sq[c, v] += sz * sz


def decrease_es(g, s, theta, master_seed=0, *, blocked=()):
    """Spread decrease of every candidate blocker from theta samples.

    Per sample: draw a live-edge graph, build its dominator tree, and add
    each vertex's subtree size to its accumulator; the mean over samples
    estimates E(spread) - E(spread with that vertex blocked).  Runs in
    O(theta * m * alpha(m, n)) and is embarrassingly parallel over
    samples with bit-identical totals for any worker count.
    """
    if not g.has_probs():
        raise ValueError("assign probabilities before estimating")
    if not (0 <= s < g.n):
        raise ValueError(f"seed {s} out of range")
    if theta < 1:
        raise ValueError("need at least one sample")
    bmask = _blocked_mask(g, blocked, s)
    master = np.uint64(int(master_seed) & 0xFFFFFFFFFFFFFFFF)
    nchunks = numba.get_num_threads()
    acc = np.zeros((nchunks, g.n), np.int64)
    acc_sq = np.zeros((nchunks, g.n), np.int64)
    racc = np.zeros(nchunks, np.int64)
    racc_sq = np.zeros(nchunks, np.int64)
    _delta_batch(g.indptr, g.targets, g.probs, bmask, s, master,
                 theta, nchunks, acc, acc_sq, racc, racc_sq)
    tot = acc.sum(axis=0)
    tot_sq = acc_sq.sum(axis=0)
    delta = tot / theta
    if theta > 1:
        var = np.maximum(0.0, (tot_sq - theta * delta * delta) / (theta - 1))
        se = np.sqrt(var / theta)
    else:
        se = np.zeros(g.n)
    delta[s] = math.nan
    se[s] = math.nan
    mean_reach, reach_se = _mean_se(int(racc.sum()), int(racc_sq.sum()), theta)
    return DeltaVector(delta=delta, stderr=se, theta=theta, excluded=s,
                       mean_reach=mean_reach, reach_stderr=reach_se)
