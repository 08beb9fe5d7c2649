"""Blocker selection: two greedy algorithms, a replace heuristic, and
three reference baselines (random, out-degree, exhaustive optimum).

All selection is over a single seed vertex; multi-seed instances are
unified first (see graph.unify_seeds).  Ties always break toward the
smallest vertex id.  Retired seed husks left behind by unification are
never eligible.
"""

import itertools
import time
from dataclasses import dataclass, field

import numpy as np

from .rng import derive_seed
from .spread import decrease_es, exact_spread, mcs_spread, oracle_feasible

_TAG_BG = 0xB6
_TAG_AG = 0xA6
_TAG_GR = 0x66
_TAG_RAND = 0x4A
_TAG_EXACT = 0xE7
_TAG_EVAL = 0xEF


class GuardError(RuntimeError):
    """Problem size exceeds a hard feasibility guard."""


class TimeoutExceeded(RuntimeError):
    """Cooperative per-run deadline hit."""


@dataclass(frozen=True)
class BlockerResult:
    """Outcome of one selection run.

    ``blockers`` is in insertion order (internal ids); ``residual_spread``
    estimates the spread on the blocked graph.  ``deviations`` carries
    flags such as the replace heuristic topping up an undersized
    out-neighbor phase.
    """

    algorithm: str
    blockers: tuple
    budget: int
    residual_spread: object         # SpreadEstimate
    theta: int | None
    rounds: int | None
    duration_ms: float
    master_seed: int
    deviations: tuple = field(default_factory=tuple)

    def to_record(self, g, seeds=None):
        """JSON-ready dict in original vertex ids.

        The reported spread adds seed_count - 1 so unified multi-seed
        runs stay comparable with the original instance.
        """
        correction = g.seed_count - 1
        return {
            "algorithm": self.algorithm,
            "seeds": [int(x) for x in seeds] if seeds is not None else None,
            "budget": self.budget,
            "blockers": [int(g.labels[b]) for b in self.blockers],
            "spread": self.residual_spread.value + correction,
            "stderr": self.residual_spread.stderr,
            "spread_method": self.residual_spread.method,
            "theta": self.theta,
            "rounds": self.rounds,
            "duration_ms": self.duration_ms,
            "master_seed": self.master_seed,
            "deviations": list(self.deviations),
        }


def _check_inputs(g, s, b):
    if not g.has_probs():
        raise ValueError("assign probabilities before selecting blockers")
    if not (0 <= s < g.n):
        raise ValueError(f"seed {s} out of range")
    if s in g.retired:
        raise ValueError("retired seed husk cannot act as the source")
    if b < 1:
        raise ValueError("budget must be >= 1")


def _candidate_pool(g, s, taken=()):
    """Vertex ids eligible for blocking, ascending."""
    bad = set(g.retired)
    bad.add(s)
    bad.update(taken)
    return [u for u in range(g.n) if u not in bad]


def _check_deadline(deadline):
    if deadline is not None and time.perf_counter() > deadline:
        raise TimeoutExceeded("selection exceeded its time budget")


def _evaluate(g, s, blockers, eval_rounds, master_seed):
    return mcs_spread(g, s, blockers, r=eval_rounds,
                      master_seed=derive_seed(master_seed, _TAG_EVAL))


def baseline_greedy(g, s, b, r=10000, master_seed=0, *,
                    eval_rounds=10000, spread_fn=None, deadline=None):
    """Greedy selection with one Monte-Carlo estimate per candidate.

    Each round evaluates the spread after blocking every remaining
    candidate (r fresh rounds each, deterministic per-candidate streams)
    and keeps the one with the largest decrease.  O(b * n * r * m); the
    reference the sampled-graph algorithms are measured against.
    """
    _check_inputs(g, s, b)
    t0 = time.perf_counter()
    blocked = []
    for rnd in range(b):
        pool = _candidate_pool(g, s, blocked)
        if not pool:
            break
        best_u = -1
        best_val = float("inf")
        for u in pool:
            _check_deadline(deadline)
            if spread_fn is not None:
                val = spread_fn(g, s, tuple(blocked) + (u,))
            else:
                seed_u = derive_seed(master_seed, _TAG_BG, rnd, u)
                val = mcs_spread(g, s, tuple(blocked) + (u,),
                                 r=r, master_seed=seed_u).value
            if val < best_val:
                best_val = val
                best_u = u
        blocked.append(best_u)
    residual = _evaluate(g, s, blocked, eval_rounds, master_seed)
    return BlockerResult(
        algorithm="bg", blockers=tuple(blocked), budget=b,
        residual_spread=residual, theta=None, rounds=r,
        duration_ms=(time.perf_counter() - t0) * 1e3,
        master_seed=int(master_seed))


def _argmax_delta(delta, pool):
    """Candidate with the largest delta; ties go to the smallest id."""
    best_u = pool[0]
    best_d = delta[best_u]
    for u in pool[1:]:
        if delta[u] > best_d:
            best_d = delta[u]
            best_u = u
    return best_u, best_d


def advanced_greedy(g, s, b, theta=10000, master_seed=0, *,
                    eval_rounds=10000, delta_fn=None, deadline=None):
    """Greedy selection over the sampled-graph spread-decrease estimator.

    One decrease_es call per round prices every candidate at once from
    fresh samples of the currently blocked graph; O(b * theta * m *
    alpha(m, n)).
    """
    _check_inputs(g, s, b)
    t0 = time.perf_counter()
    blocked = []
    for rnd in range(b):
        _check_deadline(deadline)
        pool = _candidate_pool(g, s, blocked)
        if not pool:
            break
        if delta_fn is not None:
            delta = delta_fn(g, s, tuple(blocked))
        else:
            delta = decrease_es(g, s, theta,
                                derive_seed(master_seed, _TAG_AG, rnd),
                                blocked=blocked).delta
        best_u, _ = _argmax_delta(delta, pool)
        blocked.append(best_u)
    residual = _evaluate(g, s, blocked, eval_rounds, master_seed)
    return BlockerResult(
        algorithm="ag", blockers=tuple(blocked), budget=b,
        residual_spread=residual, theta=theta, rounds=None,
        duration_ms=(time.perf_counter() - t0) * 1e3,
        master_seed=int(master_seed))


def greedy_replace(g, s, b, theta=10000, master_seed=0, *,
                   eval_rounds=10000, delta_fn=None, deadline=None):
    """Out-neighbor-first selection with greedy replacement.

    Phase 1 greedily blocks up to b out-neighbors of the seed (candidates
    restricted to them).  Phase 2 walks the picks in reverse insertion
    order; each is removed and the globally best vertex inserted instead,
    stopping the whole walk the first time the removed vertex wins its own
    replacement (on a tie the removed vertex is preferred, triggering the
    stop).  If the seed has fewer than b out-neighbors, the remaining
    budget is filled with unrestricted greedy rounds afterwards and the
    result is flagged.
    """
    _check_inputs(g, s, b)
    t0 = time.perf_counter()
    deviations = []

    def fresh_delta(tag, idx, blocked_now):
        if delta_fn is not None:
            return delta_fn(g, s, tuple(blocked_now))
        return decrease_es(g, s, theta,
                           derive_seed(master_seed, _TAG_GR, tag, idx),
                           blocked=blocked_now).delta

    out_neigh = sorted({int(v) for v in g.out_edges(s)[0]
                        if int(v) != s and int(v) not in g.retired})
    cb = list(out_neigh)
    blocked = []
    for rnd in range(min(len(out_neigh), b)):
        _check_deadline(deadline)
        delta = fresh_delta(1, rnd, blocked)
        best_u, _ = _argmax_delta(delta, cb)
        cb.remove(best_u)
        blocked.append(best_u)

    for step, u in enumerate(reversed(list(blocked))):
        _check_deadline(deadline)
        blocked.remove(u)
        delta = fresh_delta(2, step, blocked)
        pool = _candidate_pool(g, s, blocked)
        best_u, best_d = _argmax_delta(delta, pool)
        if delta[u] >= best_d:      # removed vertex ties or wins: keep it
            best_u = u
        blocked.append(best_u)
        if best_u == u:
            break

    if len(blocked) < b:
        pool = _candidate_pool(g, s, blocked)
        if pool:
            deviations.append("topped_up_ag")
        topup = 0
        while len(blocked) < b:
            _check_deadline(deadline)
            pool = _candidate_pool(g, s, blocked)
            if not pool:
                break
            delta = fresh_delta(3, topup, blocked)
            best_u, _ = _argmax_delta(delta, pool)
            blocked.append(best_u)
            topup += 1

    residual = _evaluate(g, s, blocked, eval_rounds, master_seed)
    return BlockerResult(
        algorithm="gr", blockers=tuple(blocked), budget=b,
        residual_spread=residual, theta=theta, rounds=None,
        duration_ms=(time.perf_counter() - t0) * 1e3,
        master_seed=int(master_seed), deviations=tuple(deviations))


def rand_blockers(g, s, b, master_seed=0, *, eval_rounds=10000):
    """Uniform blockers without replacement from the eligible vertices."""
    _check_inputs(g, s, b)
    t0 = time.perf_counter()
    pool = _candidate_pool(g, s)
    rng = np.random.default_rng(int(master_seed) & 0xFFFFFFFFFFFFFFFF)
    picks = rng.choice(len(pool), size=min(b, len(pool)), replace=False)
    blocked = [pool[i] for i in picks]
    residual = _evaluate(g, s, blocked, eval_rounds, master_seed)
    return BlockerResult(
        algorithm="rand", blockers=tuple(blocked), budget=b,
        residual_spread=residual, theta=None, rounds=None,
        duration_ms=(time.perf_counter() - t0) * 1e3,
        master_seed=int(master_seed))


def outdegree_blockers(g, s, b, *, eval_rounds=10000, master_seed=0):
    """Top-b eligible vertices by out-degree, ties to the smallest id."""
    _check_inputs(g, s, b)
    t0 = time.perf_counter()
    pool = _candidate_pool(g, s)
    deg = np.diff(g.indptr)
    pool.sort(key=lambda u: (-int(deg[u]), u))
    blocked = pool[:b]
    residual = _evaluate(g, s, blocked, eval_rounds, master_seed)
    return BlockerResult(
        algorithm="outdeg", blockers=tuple(blocked), budget=b,
        residual_spread=residual, theta=None, rounds=None,
        duration_ms=(time.perf_counter() - t0) * 1e3,
        master_seed=int(master_seed))


def exact_blockers(g, s, b, *, r=10000, master_seed=0, deadline=None):
    """Optimal blocker set by exhausting all b-subsets.

    Spread per subset comes from the exact oracle when the instance is
    enumerable, otherwise from Monte-Carlo with r rounds (flagged in the
    result).  Hard guards keep the search desk-scale.  Ties resolve to
    the lexicographically smallest set.
    """
    _check_inputs(g, s, b)
    if g.n > 40 or b > 4:
        raise GuardError(f"exact search guarded to n <= 40, b <= 4 "
                         f"(got n={g.n}, b={b})")
    t0 = time.perf_counter()
    pool = _candidate_pool(g, s)
    deviations = []
    use_oracle = oracle_feasible(g, s)
    if not use_oracle:
        deviations.append("mcs_fallback")

    def measure(subset, idx):
        if use_oracle:
            return exact_spread(g, s, subset)
        return mcs_spread(g, s, subset, r=r,
                          master_seed=derive_seed(master_seed, _TAG_EXACT, idx))

    if b >= len(pool):
        best_set = tuple(pool)
        best_est = measure(best_set, 0)
    else:
        best_set = None
        best_est = None
        for idx, combo in enumerate(itertools.combinations(pool, b)):
            _check_deadline(deadline)
            est = measure(combo, idx)
            if best_est is None or est.value < best_est.value:
                best_est = est
                best_set = combo
    return BlockerResult(
        algorithm="exact", blockers=tuple(best_set), budget=b,
        residual_spread=best_est, theta=None,
        rounds=None if use_oracle else r,
        duration_ms=(time.perf_counter() - t0) * 1e3,
        master_seed=int(master_seed), deviations=tuple(deviations))
