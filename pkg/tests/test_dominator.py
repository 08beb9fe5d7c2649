import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import imin
from util import TOY_SEED, py_reach, random_graph, sample_adjacency


def domtree_of(g, master=1, index=0, root=0):
    return imin.build_domtree(imin.sample_live_edge(g, root, master, index))


class TestSmallShapes:
    def test_chain(self):
        g = imin.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)])
        t = domtree_of(g)
        assert t.idom_of(1) == 0 and t.idom_of(2) == 1
        assert imin.subtree_sizes(t) == {0: 3, 1: 2, 2: 1}

    def test_diamond_meets_at_root(self):
        g = imin.from_edges(4, [(0, 1, 1.0), (0, 2, 1.0),
                                (1, 3, 1.0), (2, 3, 1.0)])
        t = domtree_of(g)
        assert t.idom_of(3) == 0
        assert t.size_of(0) == 4
        assert t.size_of(1) == 1 and t.size_of(2) == 1

    def test_leaf_size_is_one(self):
        g = imin.from_edges(2, [(0, 1, 1.0)])
        assert domtree_of(g).size_of(1) == 1


class TestToyTrees:
    def find_sample(self, toy, want_e58, want_e98):
        for i in range(4000):
            s = imin.sample_live_edge(toy, TOY_SEED, 31, i)
            e = set(s.edges_original())
            if ((4, 7) in e) == want_e58 and ((8, 7) in e) == want_e98:
                return s
        pytest.fail("sample class not found")

    def test_both_paths_still_dominated_by_v5(self, toy):
        s = self.find_sample(toy, True, True)
        t = imin.build_domtree(s)
        assert t.idom_of(7) == 4          # idom(v8) = v5
        sizes = imin.subtree_sizes(t)
        assert sizes[4] in (5, 6)         # v5 subtree, +1 if (v8,v7) kept

    def test_neither_prob_edge_gives_subtree_four(self, toy):
        s = self.find_sample(toy, False, False)
        t = imin.build_domtree(s)
        assert imin.subtree_sizes(t)[4] == 4
        assert t.reach_count == 7

    def test_only_v9_path_roots_v8_under_v9(self, toy):
        s = self.find_sample(toy, False, True)
        t = imin.build_domtree(s)
        assert t.idom_of(7) == 8          # idom(v8) = v9


def tree_children(t):
    kids = [[] for _ in range(t.reach_count)]
    for v in range(1, t.reach_count):
        kids[t.idom[v]].append(v)
    return kids


def dataflow_idoms(vertices, edges, root):
    """Immediate dominators by set-intersection fixpoint (slow oracle)."""
    preds = {v: [] for v in vertices}
    for u, v in edges:
        preds[v].append(u)
    full = set(vertices)
    dom = {v: set(full) for v in vertices}
    dom[root] = {root}
    changed = True
    while changed:
        changed = False
        for v in vertices:
            if v == root:
                continue
            new = set(full)
            for p in preds[v]:
                new &= dom[p]
            new = {v} | new
            if new != dom[v]:
                dom[v] = new
                changed = True
    idom = {}
    for v in vertices:
        if v == root:
            continue
        strict = dom[v] - {v}
        idom[v] = max(strict, key=lambda d: len(dom[d]))
    return idom


class TestAgainstDataflowOracle:
    """Cross-check idoms on dense cyclic graphs (back and cross edges)."""

    @pytest.mark.parametrize("seed", range(25))
    def test_idoms_match_fixpoint(self, seed):
        rng = np.random.default_rng(seed + 12345)
        n = int(rng.integers(8, 50))
        triples = [(int(rng.integers(0, v)), v, 1.0) for v in range(1, n)]
        for _ in range(4 * n):
            u = int(rng.integers(0, n))
            v = int(rng.integers(0, n))
            if u != v:
                triples.append((u, v, 1.0))     # cycles welcome
        g = imin.from_edges(n, triples)
        s = imin.sample_live_edge(g, 0, seed, 0)   # p=1: whole graph
        assert s.reach_count == n
        t = imin.build_domtree(s)
        want = dataflow_idoms(list(range(n)), s.edges_original(), 0)
        for v in range(1, n):
            assert t.idom_of(v) == want[v], f"idom({v}) differs (seed {seed})"


class TestStructuralInvariants:
    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10**6))
    def test_tree_invariants(self, seed):
        g = random_graph(seed, max_n=30, max_prob_edges=20, extra_frac=2.0)
        s = imin.sample_live_edge(g, 0, seed, 0)
        t = imin.build_domtree(s)
        nr = t.reach_count
        assert nr == s.reach_count
        assert t.sizes[0] == nr
        # every non-root has an idom earlier in DFS order; sizes telescope
        for v in range(1, nr):
            assert 0 <= t.idom[v] < v
            assert t.sizes[t.idom[v]] > t.sizes[v]
        for u, kids in enumerate(tree_children(t)):
            assert sum(t.sizes[c] for c in kids) == t.sizes[u] - 1

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10**6))
    def test_subtree_size_equals_removal_loss(self, seed):
        g = random_graph(seed, max_n=40, max_prob_edges=25, extra_frac=2.0)
        s = imin.sample_live_edge(g, 0, seed ^ 0xABCD, 1)
        t = imin.build_domtree(s)
        adj = sample_adjacency(s)
        full = len(py_reach(adj, 0))
        sizes = imin.subtree_sizes(t)
        for v in s.order.tolist():
            if v == 0:
                continue
            lost = full - len(py_reach(adj, 0, removed=v))
            assert sizes[v] == lost

    @settings(max_examples=15, deadline=None)
    @given(st.integers(0, 10**6))
    def test_dominance_soundness(self, seed):
        g = random_graph(seed, max_n=20, max_prob_edges=12, extra_frac=1.5)
        s = imin.sample_live_edge(g, 0, seed ^ 0x77, 2)
        t = imin.build_domtree(s)
        adj = sample_adjacency(s)
        kids = tree_children(t)
        for u in range(1, t.reach_count):
            stack = list(kids[u])
            members = set()
            while stack:
                x = stack.pop()
                members.add(x)
                stack.extend(kids[x])
            u_orig = int(t.order[u])
            alive = py_reach(adj, 0, removed=u_orig)
            for v in members:
                assert int(t.order[v]) not in alive


class TestDump:
    def test_dump_lines_and_fields(self, toy):
        s = imin.sample_live_edge(toy, TOY_SEED, 5, 0)
        t = imin.build_domtree(s)
        lines = imin.dump_domtree(t).strip().split("\n")
        assert len(lines) == t.reach_count
        first = lines[0].split()
        assert first[0] == first[1] == str(TOY_SEED)
        assert int(first[2]) == t.reach_count
        for line in lines:
            u, d, c = (int(x) for x in line.split())
            assert c >= 1

    def test_golden_dump_without_prob_edges(self, toy):
        # the deterministic core alone: DFS preorder 0,1,4,2,5,8,3 with
        # the meet vertex 4 hanging off the root
        for i in range(2000):
            s = imin.sample_live_edge(toy, TOY_SEED, 13, i)
            edges = set(s.edges_original())
            if (4, 7) not in edges and (8, 7) not in edges:
                t = imin.build_domtree(s)
                assert imin.dump_domtree(t) == (
                    "0 0 7\n1 0 1\n4 0 4\n2 4 1\n5 4 1\n8 4 1\n3 0 1\n")
                return
        pytest.fail("sample without probabilistic edges not found")
