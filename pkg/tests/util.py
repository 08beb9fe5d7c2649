"""Shared fixtures and independent brute-force oracles for the tests.

The brute-force routines here deliberately reimplement spread and
reachability with plain dicts and sets so they share no code with the
library paths they check.
"""

import itertools
from collections import defaultdict

import numpy as np

import imin

# Toy cascade graph: seed v1, deterministic core v1->{v2,v4}->v5->{v3,v6,v9},
# probabilistic tail (v5,v8)=0.5, (v9,v8)=0.2, (v8,v7)=0.1.
# Internal ids are v-number minus one.
TOY_EDGES = [
    (0, 1, 1.0), (0, 3, 1.0), (1, 4, 1.0), (3, 4, 1.0),
    (4, 2, 1.0), (4, 5, 1.0), (4, 8, 1.0), (4, 7, 0.5),
    (8, 7, 0.2), (7, 6, 0.1),
]
TOY_SEED = 0
V = {f"v{i}": i - 1 for i in range(1, 10)}   # v-number -> internal id


def make_toy():
    return imin.from_edges(9, TOY_EDGES)


def edges_dict(g):
    """{(u, v): p} over the whole graph (p None when unassigned)."""
    out = {}
    for u in range(g.n):
        tgts, ps = g.out_edges(u)
        for k, v in enumerate(tgts):
            out[(u, int(v))] = float(ps[k]) if ps is not None else None
    return out


def brute_exact_spread(g, seeds, blocked=()):
    """Expected spread by enumerating probabilistic-edge subsets.

    Independent of the library oracle: dict adjacency, set BFS, plain
    product enumeration in lexicographic order.
    """
    seeds = [seeds] if isinstance(seeds, (int, np.integer)) else list(seeds)
    blocked = set(blocked)
    det = []
    prob = []
    for (u, v), p in edges_dict(g).items():
        if v in blocked or p == 0.0:
            continue
        if p == 1.0:
            det.append((u, v))
        else:
            prob.append(((u, v), p))
    total = 0.0
    for keep in itertools.product((False, True), repeat=len(prob)):
        w = 1.0
        adj = defaultdict(list)
        for u, v in det:
            adj[u].append(v)
        for kept, ((u, v), p) in zip(keep, prob):
            w *= p if kept else 1.0 - p
            if kept:
                adj[u].append(v)
        seen = set(seeds)
        stack = list(seeds)
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        total += w * len(seen)
    return total


def sample_adjacency(sample):
    """Kept edges of a sample as a dict over original vertex ids."""
    adj = defaultdict(list)
    for u, v in sample.edges_original():
        adj[u].append(v)
    return adj


def py_reach(adj, root, removed=None):
    """Reachable set by plain BFS, optionally with one vertex removed."""
    if root == removed:
        return set()
    seen = {root}
    stack = [root]
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v != removed and v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


def random_graph(seed, max_n=12, max_prob_edges=8, extra_frac=1.0,
                 p_low=0.1, p_high=0.9):
    """Random connected-from-0 digraph with a bounded probabilistic core.

    A spanning backbone from vertex 0 keeps the seed's cascade nontrivial;
    edges beyond ``max_prob_edges`` probabilistic ones become
    deterministic so the exact oracle stays cheap.
    """
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, max_n + 1))
    edges = {}
    for v in range(1, n):
        u = int(rng.integers(0, v))
        edges[(u, v)] = None
    for _ in range(int(extra_frac * n)):
        u = int(rng.integers(0, n))
        v = int(rng.integers(0, n))
        if u != v:
            edges.setdefault((u, v), None)
    keys = sorted(edges)
    n_prob = min(len(keys), max_prob_edges)
    prob_keys = set(tuple(keys[i]) for i in
                    rng.choice(len(keys), size=n_prob, replace=False))
    triples = []
    for k in keys:
        if k in prob_keys:
            p = float(np.round(rng.uniform(p_low, p_high), 3))
        else:
            p = 1.0
        triples.append((k[0], k[1], p))
    return imin.from_edges(n, triples)
