import itertools
import time

import numpy as np
import pytest

import imin
from imin.blockers import GuardError, TimeoutExceeded
from util import brute_exact_spread, random_graph


def exact_delta_fn(g, s, blocked):
    """Oracle-valued spread decrease for every candidate (tests only)."""
    base = imin.exact_spread(g, s, blocked).value
    delta = np.zeros(g.n)
    for u in range(g.n):
        if u == s or u in blocked:
            continue
        delta[u] = base - imin.exact_spread(g, s, set(blocked) | {u}).value
    return delta


def exact_spread_fn(g, s, blocked):
    return imin.exact_spread(g, s, blocked).value


class TestToySelections:
    """Selection results on the toy fixture, spreads checked by oracle."""

    def resid(self, toy, res):
        return imin.exact_spread(toy, 0, res.blockers).value

    def test_baseline_greedy(self, toy):
        r1 = imin.baseline_greedy(toy, 0, 1, r=10000, master_seed=3)
        assert r1.blockers == (4,)
        assert self.resid(toy, r1) == pytest.approx(3.0, abs=1e-12)
        r2 = imin.baseline_greedy(toy, 0, 2, r=10000, master_seed=3)
        assert r2.blockers == (4, 1)     # {v5, v2} under smallest-id ties
        assert self.resid(toy, r2) == pytest.approx(2.0, abs=1e-12)

    def test_advanced_greedy(self, toy):
        r1 = imin.advanced_greedy(toy, 0, 1, theta=20000, master_seed=3)
        assert r1.blockers == (4,)
        r2 = imin.advanced_greedy(toy, 0, 2, theta=20000, master_seed=3)
        assert r2.blockers == (4, 1)
        assert self.resid(toy, r2) == pytest.approx(2.0, abs=1e-12)

    def test_advanced_greedy_deterministic_chain(self):
        g = imin.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)])
        r = imin.advanced_greedy(g, 0, 1, theta=10, master_seed=1)
        assert r.blockers == (1,)

    def test_greedy_replace(self, toy):
        r1 = imin.greedy_replace(toy, 0, 1, theta=20000, master_seed=3)
        assert r1.blockers == (4,)
        assert self.resid(toy, r1) == pytest.approx(3.0, abs=1e-12)
        r2 = imin.greedy_replace(toy, 0, 2, theta=20000, master_seed=3)
        assert set(r2.blockers) == {1, 3}
        assert self.resid(toy, r2) == pytest.approx(1.0, abs=1e-12)

    def test_exact(self, toy):
        r1 = imin.exact_blockers(toy, 0, 1)
        assert r1.blockers == (4,)
        assert r1.residual_spread.value == pytest.approx(3.0, abs=1e-12)
        r2 = imin.exact_blockers(toy, 0, 2)
        assert set(r2.blockers) == {1, 3}
        assert r2.residual_spread.value == pytest.approx(1.0, abs=1e-12)

    def test_outdegree(self, toy):
        assert imin.outdegree_blockers(toy, 0, 1).blockers == (4,)
        assert imin.outdegree_blockers(toy, 0, 2).blockers == (4, 1)
        g = imin.from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
        g = imin.assign_probs(g, imin.ProbModel.trivalency(fixed=1.0))
        assert imin.outdegree_blockers(g, 0, 2).blockers == (1, 2)


class TestBaselineGreedy:
    def test_star_blocks_everything(self):
        g = imin.from_edges(4, [(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)])
        r = imin.baseline_greedy(g, 0, 3, r=200, master_seed=1)
        assert set(r.blockers) == {1, 2, 3}
        assert imin.exact_spread(g, 0, r.blockers).value == 1.0

    def test_budget_beyond_candidates(self, toy):
        r = imin.baseline_greedy(toy, 0, 99, r=50, master_seed=1)
        assert set(r.blockers) == set(range(1, 9))

    def test_rejects_bad_budget(self, toy):
        with pytest.raises(ValueError):
            imin.baseline_greedy(toy, 0, 0)


class TestGreedyReplace:
    def test_cut_vertex_survives_replacement(self):
        g = imin.from_edges(5, [(0, 1, 1.0), (1, 2, 1.0),
                                (1, 3, 1.0), (1, 4, 1.0)])
        r = imin.greedy_replace(g, 0, 1, theta=500, master_seed=2)
        assert r.blockers == (1,)
        assert imin.exact_spread(g, 0, r.blockers).value == 1.0

    def test_seed_without_out_neighbors_topped_up(self):
        g = imin.from_edges(4, [(1, 2, 1.0), (2, 3, 1.0), (1, 0, 0.0)])
        r = imin.greedy_replace(g, 0, 2, theta=200, master_seed=2)
        assert len(r.blockers) == 2
        assert "topped_up_ag" in r.deviations

    def test_top_up_when_out_degree_below_budget(self, toy):
        r = imin.greedy_replace(toy, 0, 4, theta=5000, master_seed=9)
        assert len(r.blockers) == 4
        assert "topped_up_ag" in r.deviations
        assert len(set(r.blockers)) == 4 and 0 not in r.blockers

    def test_early_stop_breaks_whole_walk(self, toy):
        # b=2: reversed order starts at v4, which wins its own replacement,
        # so v2 is never reconsidered even though v5 beats it
        r = imin.greedy_replace(toy, 0, 2, theta=20000, master_seed=3)
        assert set(r.blockers) == {1, 3}


class TestRandAndGuards:
    def test_rand_deterministic_and_excludes_seed(self, toy):
        a = imin.rand_blockers(toy, 0, 3, master_seed=5)
        b = imin.rand_blockers(toy, 0, 3, master_seed=5)
        assert a.blockers == b.blockers
        assert 0 not in a.blockers and len(set(a.blockers)) == 3

    def test_rand_all_non_seeds(self, toy):
        r = imin.rand_blockers(toy, 0, 8, master_seed=5)
        assert set(r.blockers) == set(range(1, 9))

    def test_rand_uniform_frequency(self, toy):
        counts = np.zeros(9)
        trials = 10000
        for t in range(trials):
            r = imin.rand_blockers(toy, 0, 1, master_seed=t, eval_rounds=1)
            counts[r.blockers[0]] += 1
        freq = counts / trials
        assert freq[0] == 0.0
        assert np.all(np.abs(freq[1:] - 0.125) < 0.02)

    def test_exact_guards(self, toy):
        with pytest.raises(GuardError):
            imin.exact_blockers(toy, 0, 5)
        big = imin.from_edges(41, [(i, i + 1, 1.0) for i in range(40)])
        with pytest.raises(GuardError):
            imin.exact_blockers(big, 0, 1)

    def test_exact_all_non_seeds_when_budget_huge(self):
        g = imin.from_edges(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)])
        r = imin.exact_blockers(g, 0, 3)
        assert set(r.blockers) == {1, 2, 3}
        assert r.residual_spread.value == 1.0

    def test_exact_mcs_fallback_flag(self):
        # 26 probabilistic edges from the seed: oracle infeasible, n <= 40
        g = imin.from_edges(27, [(0, v, 0.5) for v in range(1, 27)])
        r = imin.exact_blockers(g, 0, 1, r=400, master_seed=1)
        assert "mcs_fallback" in r.deviations
        assert r.residual_spread.method == "mcs"

    def test_timeout(self, toy):
        with pytest.raises(TimeoutExceeded):
            imin.baseline_greedy(toy, 0, 2, r=100, master_seed=1,
                                 deadline=time.perf_counter() - 1.0)


class TestAgreementAndOptimality:
    @pytest.mark.parametrize("seed", range(6))
    def test_ag_equals_bg_under_exact_values(self, seed):
        g = random_graph(seed + 300, max_n=9, max_prob_edges=6)
        ag = imin.advanced_greedy(g, 0, 3, master_seed=1,
                                  delta_fn=exact_delta_fn, eval_rounds=10)
        bg = imin.baseline_greedy(g, 0, 3, master_seed=1,
                                  spread_fn=exact_spread_fn, eval_rounds=10)
        assert ag.blockers == bg.blockers

    @pytest.mark.parametrize("seed", range(5))
    def test_no_heuristic_beats_exact(self, seed):
        g = random_graph(seed + 400, max_n=8, max_prob_edges=6)
        for b in (1, 2):
            ex = imin.exact_blockers(g, 0, b)
            picks = [
                imin.greedy_replace(g, 0, b, theta=4000, master_seed=2),
                imin.advanced_greedy(g, 0, b, theta=4000, master_seed=2),
                imin.baseline_greedy(g, 0, b, r=2000, master_seed=2),
                imin.rand_blockers(g, 0, b, master_seed=2),
                imin.outdegree_blockers(g, 0, b),
            ]
            for res in picks:
                resid = imin.exact_spread(g, 0, res.blockers).value
                assert resid >= ex.residual_spread.value - 1e-9

    @pytest.mark.parametrize("seed", range(3))
    def test_phase_one_only_never_beats_full_replace(self, seed):
        # replacement with exact values cannot make the result worse
        g = random_graph(seed + 500, max_n=9, max_prob_edges=6)
        b = 2
        full = imin.greedy_replace(g, 0, b, master_seed=3,
                                   delta_fn=exact_delta_fn, eval_rounds=10)
        out_neigh = sorted({int(v) for v in g.out_edges(0)[0]})
        phase1 = []
        for _ in range(min(b, len(out_neigh))):
            delta = exact_delta_fn(g, 0, tuple(phase1))
            cand = [u for u in out_neigh if u not in phase1]
            best = max(cand, key=lambda u: (delta[u], -u))
            phase1.append(best)
        r_full = imin.exact_spread(g, 0, full.blockers).value
        r_p1 = imin.exact_spread(g, 0, phase1).value
        assert r_full <= r_p1 + 1e-9


class TestResultInvariants:
    @pytest.mark.parametrize("algo", ["bg", "ag", "gr", "rand", "outdeg", "exact"])
    def test_feasibility(self, toy, algo):
        fn = {
            "bg": lambda: imin.baseline_greedy(toy, 0, 2, r=300, master_seed=4),
            "ag": lambda: imin.advanced_greedy(toy, 0, 2, theta=300, master_seed=4),
            "gr": lambda: imin.greedy_replace(toy, 0, 2, theta=300, master_seed=4),
            "rand": lambda: imin.rand_blockers(toy, 0, 2, master_seed=4),
            "outdeg": lambda: imin.outdegree_blockers(toy, 0, 2),
            "exact": lambda: imin.exact_blockers(toy, 0, 2),
        }[algo]
        res = fn()
        assert len(res.blockers) <= 2
        assert 0 not in res.blockers
        assert len(set(res.blockers)) == len(res.blockers)
        base = imin.exact_spread(toy, 0).value
        resid = imin.exact_spread(toy, 0, res.blockers).value
        assert resid <= base + 1e-12
        assert res.duration_ms >= 0.0

    def test_greedy_determinism(self, toy):
        a = imin.advanced_greedy(toy, 0, 3, theta=2000, master_seed=11)
        b = imin.advanced_greedy(toy, 0, 3, theta=2000, master_seed=11)
        assert a.blockers == b.blockers
        assert a.residual_spread.value == b.residual_spread.value

    def test_retired_husks_never_blocked(self):
        g = imin.from_edges(5, [(0, 2, 0.8), (1, 2, 0.8), (2, 3, 0.5),
                                (3, 4, 0.5)])
        gu, s = imin.unify_seeds(g, [0, 1])
        r = imin.advanced_greedy(gu, s, 4, theta=500, master_seed=1)
        assert not (set(r.blockers) & {0, 1})
        rr = imin.rand_blockers(gu, s, 99, master_seed=1)
        assert not (set(rr.blockers) & {0, 1})

    def test_to_record_uses_original_labels(self, tmp_path):
        p = tmp_path / "g.txt"
        p.write_text("10 20 1\n20 30 1\n")
        g = imin.load_edge_list(str(p))
        r = imin.outdegree_blockers(g, 0, 1)
        rec = r.to_record(g, seeds=[10])
        assert rec["blockers"] == [20]
        assert rec["seeds"] == [10]
