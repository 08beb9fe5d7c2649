"""Directed probability graphs: ingestion, probability models, seed merging.

The graph is stored once as a flat CSR adjacency (int64 offsets, int32
targets, float64 activation probabilities) and never mutated afterwards,
so samplers and selection algorithms can share it across threads.
"""

import io
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .rng import _mix64_np, derive_seed

TRIVALENCY_VALUES = (0.1, 0.01, 0.001)


class GraphParseError(ValueError):
    """Malformed edge-list input; message carries the 1-based line number."""


@dataclass(eq=False, frozen=True)
class ProbGraph:
    """Immutable directed graph with per-edge activation probabilities.

    Vertices are dense internal ids 0..n-1; ``labels[i]`` is the external
    id vertex i carried in the source file.  ``probs`` is None until a
    probability model has been applied.  ``seed_count`` and ``retired``
    record a seed unification: ``retired`` holds the now-isolated original
    seed vertices, and reported spreads add ``seed_count - 1``.
    """

    n: int
    m: int
    indptr: np.ndarray          # int64, n+1
    targets: np.ndarray         # int32, m
    probs: np.ndarray | None    # float64, m
    in_deg: np.ndarray          # int64, n
    directed: bool
    labels: np.ndarray          # int64, n (internal -> external id)
    seed_count: int = 1
    retired: frozenset = field(default_factory=frozenset)

    def out_edges(self, u):
        """(targets, probs) slice of u's out-edges."""
        lo, hi = self.indptr[u], self.indptr[u + 1]
        p = self.probs[lo:hi] if self.probs is not None else None
        return self.targets[lo:hi], p

    def out_degree(self, u):
        return int(self.indptr[u + 1] - self.indptr[u])

    def has_probs(self):
        return self.probs is not None

    def label_of(self, u):
        return int(self.labels[u])

    def index_of(self, label):
        """Internal id of an external label; KeyError if absent."""
        hits = np.nonzero(self.labels == label)[0]
        if len(hits) == 0:
            raise KeyError(f"unknown vertex label {label}")
        return int(hits[0])


@dataclass(frozen=True)
class SeedSpec:
    """Nonempty, duplicate-free list of seed vertex ids."""

    seeds: tuple

    def __init__(self, seeds):
        seeds = [int(s) for s in seeds]
        if not seeds:
            raise ValueError("seed set must be nonempty")
        if len(set(seeds)) != len(seeds):
            raise ValueError("duplicate seed ids")
        if any(s < 0 for s in seeds):
            raise ValueError("seed ids must be nonnegative")
        object.__setattr__(self, "seeds", tuple(seeds))

    def __len__(self):
        return len(self.seeds)

    def __iter__(self):
        return iter(self.seeds)


@dataclass(frozen=True)
class ProbModel:
    """Edge-probability assignment rule.

    ``trivalency`` draws each probability uniformly from
    {0.1, 0.01, 0.001} (an explicit ``fixed`` value overrides the draw,
    for tests); ``weighted_cascade`` sets p(u,v) = 1/in_deg(v);
    ``explicit`` keeps probabilities read from the input file.
    """

    kind: str
    fixed: float | None = None

    @classmethod
    def trivalency(cls, fixed=None):
        if fixed is not None and not (0.0 <= fixed <= 1.0):
            raise ValueError("fixed probability outside [0,1]")
        return cls("tr", fixed)

    @classmethod
    def weighted_cascade(cls):
        return cls("wc")

    @classmethod
    def explicit(cls):
        return cls("explicit")

    @classmethod
    def parse(cls, name):
        name = name.lower()
        if name in ("tr", "trivalency"):
            return cls.trivalency()
        if name in ("wc", "weighted_cascade", "weighted-cascade"):
            return cls.weighted_cascade()
        if name == "explicit":
            return cls.explicit()
        raise ValueError(f"unknown probability model {name!r}")


def _build_csr(n, edges, probs_by_edge, directed, labels):
    """Assemble a ProbGraph from a deduplicated {(u,v): p|None} dict."""
    m = len(edges)
    src = np.fromiter((e[0] for e in edges), np.int64, m)
    dst = np.fromiter((e[1] for e in edges), np.int64, m)
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    indptr = np.zeros(n + 1, np.int64)
    np.add.at(indptr, src + 1, 1)
    np.cumsum(indptr, out=indptr)
    in_deg = np.bincount(dst, minlength=n).astype(np.int64)
    probs = None
    if probs_by_edge is not None:
        probs = np.fromiter((probs_by_edge[e] for e in edges), np.float64, m)[order]
    return ProbGraph(
        n=n, m=m, indptr=indptr, targets=dst.astype(np.int32), probs=probs,
        in_deg=in_deg, directed=directed, labels=np.asarray(labels, np.int64),
    )


def from_edges(n, edges, directed=True, labels=None):
    """Build a graph from (u, v[, p]) triples on vertices 0..n-1.

    Self-loops are dropped; parallel edges merge by noisy-or when
    probabilities are present, and collapse structurally otherwise.
    """
    merged = {}
    have_probs = False
    for e in edges:
        u, v = int(e[0]), int(e[1])
        p = float(e[2]) if len(e) > 2 else None
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"edge ({u},{v}) out of range for n={n}")
        if u == v:
            continue
        if p is not None:
            have_probs = True
            if not (0.0 <= p <= 1.0):
                raise ValueError(f"probability {p} outside [0,1]")
            prev = merged.get((u, v))
            merged[(u, v)] = p if prev is None else 1.0 - (1.0 - prev) * (1.0 - p)
        else:
            if have_probs:
                raise ValueError("cannot mix probabilistic and bare edges")
            merged.setdefault((u, v), None)
    if have_probs and any(p is None for p in merged.values()):
        raise ValueError("cannot mix probabilistic and bare edges")
    if labels is None:
        labels = np.arange(n, dtype=np.int64)
    keys = list(merged.keys())
    return _build_csr(n, keys, merged if have_probs else None, directed, labels)


def _parse_lines(lines):
    """Yield (lineno, tokens) for non-comment, non-blank lines."""
    for i, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield i, line.split()


def load_edge_list(path, directed=True):
    """Load a whitespace-separated "u v" or "u v p" edge list.

    External ids may be arbitrary nonnegative integers; they are densely
    remapped to 0..n-1 in sorted order (the mapping is kept in
    ``labels``).  Undirected inputs store each edge in both directions.
    Self-loops are dropped; duplicates collapse (noisy-or on explicit
    probabilities).
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.readlines()
    raw_edges = []
    ids = set()
    width = None
    for lineno, toks in _parse_lines(lines):
        if len(toks) not in (2, 3):
            raise GraphParseError(f"{path}: line {lineno}: expected 'u v' or 'u v p'")
        if width is None:
            width = len(toks)
        elif len(toks) != width:
            raise GraphParseError(f"{path}: line {lineno}: inconsistent column count")
        try:
            u, v = int(toks[0]), int(toks[1])
        except ValueError:
            raise GraphParseError(f"{path}: line {lineno}: non-integer vertex id") from None
        if u < 0 or v < 0:
            raise GraphParseError(f"{path}: line {lineno}: negative vertex id")
        p = None
        if len(toks) == 3:
            try:
                p = float(toks[2])
            except ValueError:
                raise GraphParseError(f"{path}: line {lineno}: bad probability") from None
            if not (0.0 <= p <= 1.0):
                raise GraphParseError(f"{path}: line {lineno}: probability outside [0,1]")
        ids.add(u)
        ids.add(v)
        raw_edges.append((u, v, p))
    if not raw_edges:
        raise GraphParseError(f"{path}: no edges found")
    labels = np.array(sorted(ids), np.int64)
    remap = {ext: i for i, ext in enumerate(labels)}
    n = len(labels)
    triples = []
    for u, v, p in raw_edges:
        ui, vi = remap[u], remap[v]
        if p is None:
            triples.append((ui, vi))
            if not directed:
                triples.append((vi, ui))
        else:
            triples.append((ui, vi, p))
            if not directed:
                triples.append((vi, ui, p))
    return from_edges(n, triples, directed=directed, labels=labels)


def dump_canonical(g, path_or_buf):
    """Write the canonical dump: "n m directed" header, sorted "u v p" rows.

    Probabilities print at 17 significant digits so a reload is
    bit-exact.  Non-identity external labels are preserved in "# v i ext"
    comment rows so converted datasets keep reporting original ids.
    """
    own = isinstance(path_or_buf, (str, os.PathLike))
    fh = open(path_or_buf, "w", encoding="utf-8") if own else path_or_buf
    try:
        fh.write(f"{g.n} {g.m} {1 if g.directed else 0}\n")
        if not np.array_equal(g.labels, np.arange(g.n)):
            for i in range(g.n):
                fh.write(f"# v {i} {int(g.labels[i])}\n")
        for u in range(g.n):
            lo, hi = int(g.indptr[u]), int(g.indptr[u + 1])
            for k in range(lo, hi):
                if g.probs is None:
                    fh.write(f"{u} {int(g.targets[k])}\n")
                else:
                    fh.write(f"{u} {int(g.targets[k])} {g.probs[k]:.17g}\n")
    finally:
        if own:
            fh.close()


def dumps_canonical(g):
    buf = io.StringIO()
    dump_canonical(g, buf)
    return buf.getvalue()


def load_canonical(path):
    """Reload a canonical dump produced by :func:`dump_canonical`."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.readlines()
    header = None
    label_rows = {}
    edges = []
    for i, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            toks = line.split()
            if len(toks) == 4 and toks[1] == "v":
                label_rows[int(toks[2])] = int(toks[3])
            continue
        toks = line.split()
        if header is None:
            if len(toks) != 3:
                raise GraphParseError(f"{path}: line {i}: expected 'n m directed' header")
            try:
                header = (int(toks[0]), int(toks[1]), int(toks[2]))
            except ValueError:
                raise GraphParseError(f"{path}: line {i}: bad header") from None
            continue
        if len(toks) not in (2, 3):
            raise GraphParseError(f"{path}: line {i}: expected 'u v' or 'u v p'")
        try:
            u, v = int(toks[0]), int(toks[1])
            p = float(toks[2]) if len(toks) == 3 else None
        except ValueError:
            raise GraphParseError(f"{path}: line {i}: bad edge row") from None
        edges.append((u, v) if p is None else (u, v, p))
    if header is None:
        raise GraphParseError(f"{path}: missing header")
    n, m, directed = header
    if len(edges) != m:
        raise GraphParseError(f"{path}: header claims m={m}, found {len(edges)} edges")
    if any(not (0 <= e[0] < n and 0 <= e[1] < n) for e in edges):
        raise GraphParseError(f"{path}: edge endpoint outside 0..{n - 1}")
    labels = np.arange(n, dtype=np.int64)
    for i, ext in label_rows.items():
        if not (0 <= i < n):
            raise GraphParseError(f"{path}: label row for vertex {i} out of range")
        labels[i] = ext
    try:
        return from_edges(n, edges, directed=bool(directed), labels=labels)
    except ValueError as exc:
        raise GraphParseError(f"{path}: {exc}") from None


def assign_probs(g, model, rng_seed=0):
    """Return a copy of g with every edge probability set by the model.

    Trivalency draws are a pure function of (rng_seed, edge index), so
    repeated calls are bit-identical.
    """
    if model.kind == "explicit":
        if g.probs is None:
            raise ValueError("explicit model needs probabilities in the input file")
        return g
    if model.kind == "wc":
        probs = 1.0 / g.in_deg[g.targets].astype(np.float64)
        return replace(g, probs=probs)
    if model.kind == "tr":
        if model.fixed is not None:
            probs = np.full(g.m, float(model.fixed))
        else:
            key = np.uint64(derive_seed(rng_seed, 0x7472))
            h = _mix64_np(key ^ (np.arange(g.m, dtype=np.uint64)
                                 * np.uint64(0x9E3779B97F4A7C15)))
            probs = np.array(TRIVALENCY_VALUES)[(h % np.uint64(3)).astype(np.int64)]
        return replace(g, probs=probs)
    raise ValueError(f"unknown model kind {model.kind!r}")


def unify_seeds(g, seeds):
    """Merge a seed set into one source vertex s'.

    With a single seed this is the identity.  Otherwise a fresh vertex s'
    takes over all seed out-edges (noisy-or merged per target), edges into
    seeds are dropped, and the original seeds remain as isolated, retired
    vertices that no algorithm may block.  Spread over the unified graph
    understates the multi-seed spread by exactly seed_count - 1.
    """
    if not isinstance(seeds, SeedSpec):
        seeds = SeedSpec(seeds)
    for s in seeds:
        if s >= g.n:
            raise ValueError(f"seed id {s} out of range for n={g.n}")
    if len(seeds) == 1:
        return g, seeds.seeds[0]
    if g.probs is None:
        raise ValueError("assign probabilities before unifying seeds")
    seed_set = frozenset(seeds)
    sprime = g.n
    n_new = g.n + 1
    acc = {}      # target -> product of (1 - p) over seed in-edges
    triples = []
    for u in range(g.n):
        tgts, ps = g.out_edges(u)
        if u in seed_set:
            for v, p in zip(tgts, ps):
                v = int(v)
                if v in seed_set:
                    continue
                acc[v] = acc.get(v, 1.0) * (1.0 - float(p))
        else:
            for v, p in zip(tgts, ps):
                v = int(v)
                if v in seed_set:
                    continue
                triples.append((u, v, float(p)))
    for v, miss in sorted(acc.items()):
        triples.append((sprime, v, 1.0 - miss))
    labels = np.concatenate([g.labels, [g.labels.max() + 1]])
    unified = from_edges(n_new, triples, directed=g.directed, labels=labels)
    if unified.probs is None:       # degenerate: no surviving edges
        unified = replace(unified, probs=np.zeros(0))
    unified = replace(unified, seed_count=len(seeds), retired=seed_set)
    return unified, sprime
