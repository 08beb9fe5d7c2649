"""Command-line front end and benchmark harness.

Subcommands: convert, assign-probs, spread, delta, minimize.
Exit codes: 0 success, 1 usage error, 2 data error, 3 guard or timeout.
"""

import argparse
import csv
import io
import json
import os
import sys
import time

import numba
import numpy as np

from . import blockers as blk
from .graph import (GraphParseError, ProbModel, SeedSpec, assign_probs,
                    dump_canonical, load_canonical, load_edge_list,
                    unify_seeds)
from .rng import derive_seed
from .spread import OracleInfeasibleError, decrease_es, exact_spread, mcs_spread

ALGORITHMS = ("bg", "ag", "gr", "rand", "outdeg", "exact")

_TAG_SEEDPICK = 0x5EED
_TAG_RUN = {"bg": 1, "ag": 2, "gr": 3, "rand": 4, "outdeg": 5, "exact": 6}


class UsageError(ValueError):
    """Bad flags or config keys; exits with code 1."""


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; the contract wants 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _directed(args):
    if args.directed and args.undirected:
        raise UsageError("--directed and --undirected are mutually exclusive")
    return not args.undirected


def _load_graph(path, directed=True, fmt="auto"):
    if fmt == "canonical":
        return load_canonical(path)
    if fmt == "raw":
        return load_edge_list(path, directed=directed)
    try:
        return load_canonical(path)
    except GraphParseError:
        return load_edge_list(path, directed=directed)


def _prepare(path, directed, fmt, model_name, rng_seed):
    """Load a dataset and make sure probabilities are assigned."""
    g = _load_graph(path, directed=directed, fmt=fmt)
    if model_name:
        g = assign_probs(g, ProbModel.parse(model_name), rng_seed)
    if not g.has_probs():
        raise GraphParseError(
            f"{path}: no probabilities; pass --model or use a 'u v p' file")
    return g


def _parse_id_list(text):
    try:
        return [int(tok) for tok in text.replace(",", " ").split()]
    except ValueError:
        raise ValueError(f"bad id list {text!r}") from None


def _map_labels(g, labels):
    return [g.index_of(x) for x in labels]


def _unified(g, seed_labels):
    seeds_internal = _map_labels(g, seed_labels)
    SeedSpec(seeds_internal)
    return unify_seeds(g, seeds_internal)


def cmd_convert(args):
    g = _load_graph(args.input, directed=_directed(args), fmt=args.format)
    if args.out:
        dump_canonical(g, args.out)
    else:
        buf = io.StringIO()
        dump_canonical(g, buf)
        sys.stdout.write(buf.getvalue())
    return 0


def cmd_assign_probs(args):
    g = _prepare(args.input, _directed(args), args.format,
                 args.model, args.rng_seed)
    if args.out:
        dump_canonical(g, args.out)
    else:
        buf = io.StringIO()
        dump_canonical(g, buf)
        sys.stdout.write(buf.getvalue())
    return 0


def cmd_spread(args):
    g = _prepare(args.graph, _directed(args), args.format,
                 args.model, args.rng_seed)
    gu, s = _unified(g, _parse_id_list(args.seeds))
    blocker_ids = _map_labels(gu, _parse_id_list(args.blockers)) \
        if args.blockers else []
    if any(b in gu.retired or b == s for b in blocker_ids):
        raise ValueError("blockers may not include seeds")
    if args.method == "exact":
        est = exact_spread(gu, s, blocker_ids)
    else:
        est = mcs_spread(gu, s, blocker_ids, r=args.rounds,
                         master_seed=args.master_seed)
    value = est.value + (gu.seed_count - 1)
    print(f"spread={value!r} stderr={est.stderr!r} "
          f"method={est.method} rounds={est.rounds}")
    return 0


def cmd_delta(args):
    g = _prepare(args.graph, _directed(args), args.format,
                 args.model, args.rng_seed)
    gu, s = _unified(g, _parse_id_list(args.seeds))
    dv = decrease_es(gu, s, args.theta, args.master_seed)
    text = dv.to_csv(labels=gu.labels)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


# --- minimize -----------------------------------------------------------

_CONFIG_DEFAULTS = {
    "dataset": None,
    "directed": True,
    "format": "auto",
    "model": None,
    "rng_seed": 0,
    "seeds": None,           # explicit external labels
    "random_seeds": None,    # draw k seeds instead
    "budgets": [1],
    "algorithms": ["ag", "gr"],
    "theta": 10000,
    "rounds": 10000,
    "reps": 5,
    "master_seed": 0,
    "eval_rounds": 100000,
    "threads": 0,
    "timeout_secs": 86400,
    "redraw_seeds": False,
    "out": None,
}

_INT_KEYS = {"random_seeds", "theta", "rounds", "reps", "master_seed",
             "eval_rounds", "threads", "timeout_secs", "rng_seed"}
_BOOL_KEYS = {"directed", "redraw_seeds"}
_LIST_INT_KEYS = {"seeds", "budgets"}
_LIST_STR_KEYS = {"algorithms"}


def _parse_config_file(path):
    cfg = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"{path}: line {lineno}: expected key = value")
            key, _, value = line.partition("=")
            key = key.strip().replace("-", "_")
            value = value.strip()
            if key not in _CONFIG_DEFAULTS:
                raise UsageError(f"{path}: line {lineno}: unknown key {key!r}")
            try:
                cfg[key] = _coerce_config_value(key, value)
            except ValueError as exc:
                raise UsageError(f"{path}: line {lineno}: {exc}") from None
    return cfg

def _coerce_config_value(key, value):
    if key in _BOOL_KEYS:
        if value.lower() in ("1", "true", "yes", "on"):
            return True
        if value.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"bad boolean for {key}: {value!r}")
    if key in _INT_KEYS:
        return int(value)
    if key in _LIST_INT_KEYS:
        return _parse_id_list(value)
    if key in _LIST_STR_KEYS:
        return [tok for tok in value.replace(",", " ").split()]
    return value


def _pick_seeds(g, cfg, rep):
    if cfg["seeds"] is not None:
        return list(cfg["seeds"])
    k = cfg["random_seeds"]
    if not k or k < 1:
        raise UsageError("config needs seeds=... or random_seeds=K")
    tags = (_TAG_SEEDPICK, rep) if cfg["redraw_seeds"] else (_TAG_SEEDPICK,)
    rng = np.random.default_rng(derive_seed(cfg["master_seed"], *tags))
    internal = rng.choice(g.n, size=min(k, g.n), replace=False)
    return [int(g.labels[i]) for i in sorted(internal)]


def _run_one(gu, s, algo, budget, cfg, run_seed, deadline):
    if algo == "bg":
        return blk.baseline_greedy(gu, s, budget, r=cfg["rounds"],
                                   master_seed=run_seed,
                                   eval_rounds=cfg["eval_rounds"],
                                   deadline=deadline)
    if algo == "ag":
        return blk.advanced_greedy(gu, s, budget, theta=cfg["theta"],
                                   master_seed=run_seed,
                                   eval_rounds=cfg["eval_rounds"],
                                   deadline=deadline)
    if algo == "gr":
        return blk.greedy_replace(gu, s, budget, theta=cfg["theta"],
                                  master_seed=run_seed,
                                  eval_rounds=cfg["eval_rounds"],
                                  deadline=deadline)
    if algo == "rand":
        return blk.rand_blockers(gu, s, budget, master_seed=run_seed,
                                 eval_rounds=cfg["eval_rounds"])
    if algo == "outdeg":
        return blk.outdegree_blockers(gu, s, budget, master_seed=run_seed,
                                      eval_rounds=cfg["eval_rounds"])
    if algo == "exact":
        return blk.exact_blockers(gu, s, budget, r=cfg["rounds"],
                                  master_seed=run_seed, deadline=deadline)
    raise ValueError(f"unknown algorithm {algo!r}")


def cmd_minimize(args):
    cfg = dict(_CONFIG_DEFAULTS)
    if args.config:
        cfg.update(_parse_config_file(args.config))
    overrides = {
        "dataset": args.dataset, "model": args.model, "out": args.out,
        "seeds": _parse_id_list(args.seeds) if args.seeds else None,
        "random_seeds": args.random_seeds, "theta": args.theta,
        "rounds": args.rounds, "reps": args.reps,
        "master_seed": args.master_seed, "eval_rounds": args.eval_rounds,
        "threads": args.threads, "timeout_secs": args.timeout_secs,
        "budgets": _parse_id_list(args.budget) if args.budget else None,
        "algorithms": args.algo.replace(",", " ").split() if args.algo else None,
        "format": args.format if args.format != "auto" else None,
    }
    for key, val in overrides.items():
        if val is not None:
            cfg[key] = val
    if args.directed and args.undirected:
        raise UsageError("--directed and --undirected are mutually exclusive")
    if args.undirected:
        cfg["directed"] = False
    elif args.directed:
        cfg["directed"] = True
    if args.redraw_seeds:
        cfg["redraw_seeds"] = True
    if not cfg["dataset"]:
        raise UsageError("no dataset given (config key 'dataset' or --dataset)")
    if not cfg["algorithms"]:
        raise UsageError("algorithms must be nonempty")
    for algo in cfg["algorithms"]:
        if algo not in ALGORITHMS:
            raise UsageError(f"unknown algorithm {algo!r}")
    if not cfg["budgets"] or any(b < 1 for b in cfg["budgets"]):
        raise UsageError("budgets must all be >= 1")
    if cfg["reps"] < 1:
        raise UsageError("reps must be >= 1")
    if cfg["theta"] < 1 or cfg["rounds"] < 1 or cfg["eval_rounds"] < 1:
        raise UsageError("theta, rounds and eval_rounds must be >= 1")
    if cfg["threads"]:
        numba.set_num_threads(min(cfg["threads"],
                                  numba.config.NUMBA_NUM_THREADS))

    g = _prepare(cfg["dataset"], cfg["directed"], cfg["format"],
                 cfg["model"], cfg["rng_seed"])
    dataset_name = os.path.splitext(os.path.basename(cfg["dataset"]))[0]
    model_name = cfg["model"] or "explicit"

    rows = []
    records = []
    base_seeds = _pick_seeds(g, cfg, 0)
    gu_base = _unified(g, base_seeds)
    for algo in cfg["algorithms"]:
        for budget in cfg["budgets"]:
            cell = []
            for rep in range(1, cfg["reps"] + 1):
                if cfg["redraw_seeds"]:
                    seeds = _pick_seeds(g, cfg, rep)
                    gu, s = _unified(g, seeds)
                else:
                    seeds = base_seeds
                    gu, s = gu_base
                run_seed = derive_seed(cfg["master_seed"], _TAG_RUN[algo],
                                       budget, rep)
                deadline = (time.perf_counter() + cfg["timeout_secs"]
                            if cfg["timeout_secs"] else None)
                try:
                    res = _run_one(gu, s, algo, budget, cfg, run_seed, deadline)
                except blk.GuardError:
                    rows.append([dataset_name, model_name, algo, budget,
                                 str(rep), "skipped", "", "", ""])
                    continue
                except blk.TimeoutExceeded:
                    rows.append([dataset_name, model_name, algo, budget,
                                 str(rep), "timeout", "", "", ""])
                    continue
                rec = res.to_record(gu, seeds=seeds)
                records.append({"dataset": dataset_name, "model": model_name,
                                "repetition": rep, **rec})
                row = [dataset_name, model_name, algo, budget, str(rep),
                       repr(rec["spread"]), repr(rec["stderr"]),
                       repr(res.duration_ms),
                       ";".join(str(x) for x in rec["blockers"])]
                rows.append(row)
                cell.append((rec["spread"], rec["stderr"], res.duration_ms))
            if cell:
                ms = float(np.mean([c[0] for c in cell]))
                me = float(np.mean([c[1] for c in cell]))
                md = float(np.mean([c[2] for c in cell]))
                rows.append([dataset_name, model_name, algo, budget, "mean",
                             repr(ms), repr(me), repr(md), ""])

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["dataset", "model", "algorithm", "budget", "repetition",
                     "spread", "stderr", "duration_ms", "blockers"])
    writer.writerows(rows)
    if cfg["out"]:
        with open(cfg["out"], "w", encoding="utf-8") as fh:
            fh.write(buf.getvalue())
        stem, _ = os.path.splitext(cfg["out"])
        with open(stem + ".json", "w", encoding="utf-8") as fh:
            json.dump(records, fh, indent=2)
            fh.write("\n")
    else:
        sys.stdout.write(buf.getvalue())
    return 0


def _add_common_graph_flags(p, input_name):
    p.add_argument(input_name)
    p.add_argument("--directed", action="store_true",
                   help="treat input edges as directed (the default)")
    p.add_argument("--undirected", action="store_true",
                   help="treat input edges as bidirectional")
    p.add_argument("--format", choices=("auto", "raw", "canonical"),
                   default="auto")


def _add_model_flags(p):
    p.add_argument("--model", choices=("tr", "wc", "explicit"), default=None)
    p.add_argument("--rng-seed", type=int, default=0,
                   help="seed for trivalency probability draws")


def build_parser():
    top = _Parser(prog="imin",
                  description="Influence minimization by vertex blocking")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", parents=[], help="rewrite an edge list "
                       "in canonical form")
    _add_common_graph_flags(p, "input")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("assign-probs", help="assign edge probabilities")
    _add_common_graph_flags(p, "input")
    _add_model_flags(p)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_assign_probs)

    p = sub.add_parser("spread", help="expected spread of a seed set")
    _add_common_graph_flags(p, "graph")
    _add_model_flags(p)
    p.add_argument("--seeds", required=True, help="comma-separated labels")
    p.add_argument("--blockers", default="", help="comma-separated labels")
    p.add_argument("--method", choices=("mcs", "exact"), default="mcs")
    p.add_argument("--rounds", type=int, default=10000)
    p.add_argument("--master-seed", type=int, default=0)
    p.set_defaults(func=cmd_spread)

    p = sub.add_parser("delta", help="spread decrease of every vertex")
    _add_common_graph_flags(p, "graph")
    _add_model_flags(p)
    p.add_argument("--seeds", required=True)
    p.add_argument("--theta", type=int, default=10000)
    p.add_argument("--master-seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_delta)

    p = sub.add_parser("minimize", help="select blockers and benchmark")
    p.add_argument("--config", default=None, help="flat key = value file")
    p.add_argument("--dataset", default=None)
    p.add_argument("--directed", action="store_true",
                   help="treat input edges as directed (the default)")
    p.add_argument("--undirected", action="store_true")
    p.add_argument("--format", choices=("auto", "raw", "canonical"),
                   default="auto")
    p.add_argument("--model", choices=("tr", "wc", "explicit"), default=None)
    p.add_argument("--seeds", default=None)
    p.add_argument("--random-seeds", type=int, default=None)
    p.add_argument("--redraw-seeds", action="store_true",
                   help="draw fresh seeds for every repetition")
    p.add_argument("--budget", default=None, help="comma-separated budgets")
    p.add_argument("--algo", default=None,
                   help=f"comma-separated subset of {','.join(ALGORITHMS)}")
    p.add_argument("--theta", type=int, default=None)
    p.add_argument("--rounds", type=int, default=None)
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--master-seed", type=int, default=None)
    p.add_argument("--eval-rounds", type=int, default=None)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--timeout-secs", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_minimize)
    return top


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"imin: usage error: {exc}", file=sys.stderr)
        return 1
    except GraphParseError as exc:
        print(f"imin: data error: {exc}", file=sys.stderr)
        return 2
    except (KeyError, ValueError) as exc:
        print(f"imin: data error: {exc}", file=sys.stderr)
        return 2
    except (blk.GuardError, blk.TimeoutExceeded, OracleInfeasibleError) as exc:
        print(f"imin: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
