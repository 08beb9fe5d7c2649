"""Dominator trees of sampled graphs via the Lengauer-Tarjan algorithm.

For a sample rooted at the seed, vertex u dominates v when every live
path from the root to v passes through u.  The size of u's subtree in
the dominator tree is exactly the number of vertices the root loses when
u is deleted, which is what the spread-decrease estimator accumulates.

This is the "simple" Lengauer-Tarjan variant: an eval/link forest with
path compression, O(m log n).  Everything is iterative over flat arrays;
no recursion, no per-sample allocation when the caller supplies scratch.
Vertices are addressed by their DFS discovery number (root = 0), which
the live-edge sampler already assigns.
"""

from dataclasses import dataclass

import numpy as np
from numba import njit


@njit(cache=True)
def _eval_compress(v, ancestor, label, semi, cstack):
    """Min-semidominator label on v's eval-forest path, with compression."""
    if ancestor[v] < 0:
        return v
    top = 0
    x = v
    while ancestor[ancestor[x]] >= 0:
        cstack[top] = x
        top += 1
        x = ancestor[x]
    while top > 0:
        top -= 1
        y = cstack[top]
        a = ancestor[y]
        if semi[label[a]] < semi[label[y]]:
            label[y] = label[a]
        ancestor[y] = ancestor[a]
    return label[v]


@njit(cache=True)
def _pred_csr(nr, nke, ke_src, ke_dst, pptr, psrc):
    """Counting-sort kept edges into a predecessor CSR over local ids."""
    for v in range(nr + 1):
        pptr[v] = 0
    for k in range(nke):
        pptr[ke_dst[k] + 1] += 1
    for v in range(nr):
        pptr[v + 1] += pptr[v]
    for k in range(nke):
        d = ke_dst[k]
        psrc[pptr[d]] = ke_src[k]
        pptr[d] += 1
    for v in range(nr, 0, -1):
        pptr[v] = pptr[v - 1]
    pptr[0] = 0


@njit(cache=True)
def _lt_idom(nr, parent, pptr, psrc, semi, idom, ancestor, label, bh, bn, cstack):
    """Immediate dominators for DFS-numbered vertices 0..nr-1 (root 0).

    Semidominators come from the path-minimum over predecessors; the
    two-case resolution turns them into idoms in the final ascending pass.
    Buckets are intrusive linked lists (bh = head per vertex, bn = next).
    """
    for v in range(nr):
        semi[v] = v
        label[v] = v
        ancestor[v] = -1
        bh[v] = -1
        idom[v] = 0
    for w in range(nr - 1, 0, -1):
        for k in range(pptr[w], pptr[w + 1]):
            x = _eval_compress(psrc[k], ancestor, label, semi, cstack)
            if semi[x] < semi[w]:
                semi[w] = semi[x]
        bn[w] = bh[semi[w]]
        bh[semi[w]] = w
        p = parent[w]
        ancestor[w] = p
        v = bh[p]
        bh[p] = -1
        while v != -1:
            nxt = bn[v]
            x = _eval_compress(v, ancestor, label, semi, cstack)
            if semi[x] < semi[v]:
                idom[v] = x
            else:
                idom[v] = p
            v = nxt
    for w in range(1, nr):
        if idom[w] != semi[w]:
            idom[w] = idom[idom[w]]
    idom[0] = 0


@njit(cache=True)
def _accumulate_sizes(nr, idom, sizes):
    """Subtree sizes in one backward scan (idom(v) precedes v in DFS)."""
    for v in range(nr):
        sizes[v] = 1
    for v in range(nr - 1, 0, -1):
        sizes[idom[v]] += sizes[v]


@dataclass(eq=False, frozen=True)
class DominatorTree:
    """Immediate-dominator tree of one sample, rooted at the seed.

    Arrays are in local DFS-number space; ``order`` translates local ids
    back to original vertex ids.  ``sizes[v]`` counts v's dominated
    subtree including v itself, so ``sizes[0]`` equals the sample's
    reach count.
    """

    root: int
    order: np.ndarray   # int32, local -> original id
    idom: np.ndarray    # int32, local; idom[0] == 0
    sizes: np.ndarray   # int64, local

    @property
    def reach_count(self):
        return len(self.order)

    def _local(self, v):
        hits = np.nonzero(self.order == v)[0]
        if len(hits) == 0:
            raise KeyError(f"vertex {v} not in tree")
        return int(hits[0])

    def idom_of(self, v):
        """Immediate dominator of original-id vertex v (root maps to itself)."""
        return int(self.order[self.idom[self._local(v)]])

    def size_of(self, v):
        return int(self.sizes[self._local(v)])


def build_domtree(sample):
    """Dominator tree of a live-edge sample.

    The sample's DFS tree and discovery numbering feed Lengauer-Tarjan
    directly; only the predecessor CSR is materialized here.
    """
    nr = sample.reach_count
    nke = len(sample.edge_src)
    pptr = np.empty(nr + 1, np.int64)
    psrc = np.empty(max(nke, 1), np.int32)
    _pred_csr(nr, nke, sample.edge_src, sample.edge_dst, pptr, psrc)
    if nr > 1:
        # reachable-only materialization: every non-root has a live in-edge
        assert int(np.diff(pptr)[1:].min()) >= 1
    semi = np.empty(nr, np.int32)
    idom = np.empty(nr, np.int32)
    ancestor = np.empty(nr, np.int32)
    label = np.empty(nr, np.int32)
    bh = np.empty(nr, np.int32)
    bn = np.empty(nr, np.int32)
    cstack = np.empty(nr, np.int32)
    _lt_idom(nr, sample.tree_parent, pptr, psrc,
             semi, idom, ancestor, label, bh, bn, cstack)
    sizes = np.empty(nr, np.int64)
    _accumulate_sizes(nr, idom, sizes)
    return DominatorTree(root=sample.root, order=sample.order,
                         idom=idom, sizes=sizes)


def subtree_sizes(tree):
    """Dominated-subtree size per vertex, keyed by original id.

    ``result[u]`` is the number of vertices (u included) that become
    unreachable from the root when u is removed from the sample.
    """
    return {int(tree.order[v]): int(tree.sizes[v])
            for v in range(tree.reach_count)}


def dump_domtree(tree):
    """Debug dump: "u idom(u) subtree_size(u)" per line, DFS order."""
    out = []
    for v in range(tree.reach_count):
        out.append(f"{int(tree.order[v])} {int(tree.order[tree.idom[v]])} "
                   f"{int(tree.sizes[v])}")
    return "\n".join(out) + "\n"
