"""Live-edge graph sampling: draw random subgraphs of the cascade process.

A sample keeps each edge (u,v) independently with probability p(u,v);
the set of vertices reachable from the seed in a sample is an unbiased
draw of the cascade size.  Sampling is lazy: an edge's coin is only
flipped once its source has been reached, which never changes the
distribution because every coin is a pure function of
(master seed, sample index, edge index).

The DFS used to materialize a sample doubles as the depth-first
numbering required by the dominator-tree construction, so samples carry
their vertices in discovery order together with the DFS tree.
"""

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .rng import edge_uniform, sample_key


@njit(cache=True)
def _dfs_sample(indptr, targets, probs, blocked, root, key,
                order, parent, loc, stamp, epoch, stack_v, stack_c,
                ke_src, ke_dst):
    """Depth-first lazy sampling from root.

    Fills ``order`` (discovery order, original ids), ``parent`` (DFS tree,
    local ids), and the kept-edge list in local ids.  Scratch arrays are
    caller-owned so the hot loop never allocates; ``stamp``/``epoch``
    implement O(1) visited-reset across samples.  Returns (reached, kept).
    """
    order[0] = root
    loc[root] = 0
    stamp[root] = epoch
    parent[0] = -1
    nr = 1
    nke = 0
    top = 0
    stack_v[0] = 0
    stack_c[0] = indptr[root]
    while top >= 0:
        ul = stack_v[top]
        cur = stack_c[top]
        u = order[ul]
        if cur < indptr[u + 1]:
            stack_c[top] = cur + 1
            v = targets[cur]
            if blocked[v]:
                continue
            if edge_uniform(key, cur) < probs[cur]:
                if stamp[v] == epoch:
                    ke_src[nke] = ul
                    ke_dst[nke] = loc[v]
                    nke += 1
                else:
                    stamp[v] = epoch
                    loc[v] = nr
                    order[nr] = v
                    parent[nr] = ul
                    ke_src[nke] = ul
                    ke_dst[nke] = nr
                    nke += 1
                    top += 1
                    stack_v[top] = nr
                    stack_c[top] = indptr[v]
                    nr += 1
        else:
            top -= 1
    return nr, nke


@dataclass(eq=False, frozen=True)
class LiveEdgeSample:
    """One realization of the live-edge distribution, reachable part only.

    ``order`` maps local ids (DFS discovery order, 0 = root) to original
    vertex ids; ``tree_parent`` is the DFS tree in local ids; the kept
    edges (``edge_src`` -> ``edge_dst``, local ids) are exactly the live
    edges whose source was reached.
    """

    graph: object
    root: int
    index: int
    order: np.ndarray        # int32, local -> original id
    tree_parent: np.ndarray  # int32, local
    edge_src: np.ndarray     # int32, local
    edge_dst: np.ndarray     # int32, local

    @property
    def reach_count(self):
        return len(self.order)

    def local_of(self, v):
        hits = np.nonzero(self.order == v)[0]
        if len(hits) == 0:
            raise KeyError(f"vertex {v} not reached in this sample")
        return int(hits[0])

    def edges_original(self):
        """Kept edges as (u, v) pairs in original vertex ids."""
        return list(zip(self.order[self.edge_src].tolist(),
                        self.order[self.edge_dst].tolist()))


def sample_live_edge(g, s, master_seed, index, blocked=None):
    """Draw sample ``index`` of graph g rooted at s.

    The result is a pure function of (master_seed, index); worker order
    and thread count cannot change it.
    """
    if not g.has_probs():
        raise ValueError("assign probabilities before sampling")
    if not (0 <= s < g.n):
        raise ValueError(f"seed {s} out of range")
    bmask = np.zeros(g.n, np.bool_)
    if blocked is not None:
        for b in blocked:
            bmask[b] = True
        if bmask[s]:
            raise ValueError("seed cannot be blocked")
    n, m = g.n, g.m
    order = np.empty(n, np.int32)
    parent = np.empty(n, np.int32)
    loc = np.empty(n, np.int32)
    stamp = np.zeros(n, np.int64)
    stack_v = np.empty(n, np.int32)
    stack_c = np.empty(n, np.int64)
    ke_src = np.empty(m, np.int32)
    ke_dst = np.empty(m, np.int32)
    key = np.uint64(sample_key(np.uint64(int(master_seed) & 0xFFFFFFFFFFFFFFFF),
                               np.int64(index)))
    nr, nke = _dfs_sample(g.indptr, g.targets, g.probs, bmask, s, key,
                          order, parent, loc, stamp, np.int64(1),
                          stack_v, stack_c, ke_src, ke_dst)
    return LiveEdgeSample(
        graph=g, root=s, index=int(index),
        order=order[:nr].copy(), tree_parent=parent[:nr].copy(),
        edge_src=ke_src[:nke].copy(), edge_dst=ke_dst[:nke].copy(),
    )


def reach_count(sample):
    """Number of vertices the root reaches in the sample, root included."""
    return sample.reach_count


def required_samples(n, eps, ell, opt_lower_bound):
    """Samples sufficient for relative error eps with confidence 1 - n^-ell.

    Evaluates ceil(ell * (2+eps) * n * ln n / (eps^2 * OPT)).  Advisory:
    the bound needs a lower bound on the true spread decrease, which is
    unknown in practice, so callers normally fix the sample count instead.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    if eps <= 0 or ell <= 0 or opt_lower_bound <= 0:
        raise ValueError("eps, ell and opt_lower_bound must be positive")
    return math.ceil(ell * (2.0 + eps) * n * math.log(n)
                     / (eps * eps * opt_lower_bound))
