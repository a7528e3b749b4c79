"""Batch command-line front end.

Exit codes: 0 success, 1 usage error, 2 input format error, 3 internal
invariant violation.
"""
from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from . import __version__
from .bootstrap import BootstrapConfig, derive_constraints, learn_structure, parse_method, run_bootstrap
from .core import BayesianNetwork, forward_sample
from .errors import FormatError, InvariantError, UsageError
from .evaluation import DEFAULT_SIZES, DEFAULT_THRESHOLDS, ExperimentSpec, run_constraint_experiment, run_recovery_experiment
from .features import ALL_KINDS, FeatureKind
from .io import (read_constraints, read_dataset, read_network, read_report, write_constraints,
                 write_dataset, write_manifest, write_network, write_report)
from .scoring import fit_parameters, network_score, normalized_score
from .search import SearchConfig, satisfies

EXIT_USAGE, EXIT_FORMAT, EXIT_INTERNAL = 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _kinds(text: str) -> tuple[FeatureKind, ...]:
    if text == "all":
        return ALL_KINDS
    try:
        return tuple(FeatureKind.parse(k) for k in text.split(","))
    except UsageError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_search_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("search")
    g.add_argument("--ess", type=float, default=5.0, help="equivalent sample size of the BDe prior")
    g.add_argument("--restarts", type=int, default=10, help="number of perturbed restarts")
    g.add_argument("--perturbation", type=int, default=20, help="random arc changes per restart")
    g.add_argument("--tabu", type=int, default=100, help="TABU list length")
    g.add_argument("--max-parents", type=int, default=None)
    g.add_argument("--tree", action="store_true", help="learn in-degree <= 1 structures instead")
    g.add_argument("--seed", type=int, default=0)


def _search_config(args) -> SearchConfig:
    return SearchConfig(ess=args.ess, max_restarts=args.restarts, perturbation_size=args.perturbation,
                        tabu_length=args.tabu, max_parents=args.max_parents, seed=args.seed)


def _config_dict(obj) -> dict:
    def convert(v):
        if dataclasses.is_dataclass(v):
            return {f.name: convert(getattr(v, f.name)) for f in dataclasses.fields(v)}
        if isinstance(v, FeatureKind):
            return v.value
        if isinstance(v, (list, tuple)):
            return [convert(x) for x in v]
        return v
    return convert(obj)


def _manifest(command: str, args, config: dict, inputs: dict, outputs: dict) -> dict:
    return {
        "command": command,
        "argv": list(args.argv),
        "config": config,
        "seed": getattr(args, "seed", None),
        "inputs": inputs,
        "outputs": outputs,
        "version": __version__,
    }


def _load_domain(args):
    if args.domain is None:
        return None
    return read_network(args.domain).variables


def cmd_sample(args) -> None:
    net = read_network(args.network)
    if not isinstance(net, BayesianNetwork):
        raise FormatError("network file has no cpts; cannot sample", args.network)
    if args.count < 0:
        raise UsageError("count must be non-negative")
    data = forward_sample(net, args.count, args.seed)
    write_dataset(data, args.out)
    write_manifest(args.out, _manifest("sample", args, {"count": args.count, "seed": args.seed},
                                       {"network": str(args.network)}, {"dataset": str(args.out)}))


def cmd_learn(args) -> None:
    data = read_dataset(args.dataset, _load_domain(args))
    search = _search_config(args)
    constraints = None
    if args.constraints:
        constraints = read_constraints(args.constraints, data.names).constraints
        constraints.check_acyclic(len(data.names))
    learner = "tree" if args.tree else "hill_climb"
    if constraints is None:
        dag = learn_structure(data, search, learner)
    else:
        dag = learn_structure(data, search, learner, constraints)
        if not satisfies(dag, constraints):
            raise InvariantError("learned structure violates its constraints")
    bn = fit_parameters(dag, data, search.ess)
    score = network_score(dag, data, search.ess)
    meta = {"score": score, "n": data.n_rows, "learner": learner}
    if data.n_rows:
        meta["normalized_score"] = normalized_score(score, data.n_rows)
    write_network(bn, args.out, metadata=meta)
    write_manifest(args.out, _manifest(
        "learn", args, {"search": _config_dict(search), "learner": learner},
        {"dataset": str(args.dataset), "constraints": args.constraints and str(args.constraints)},
        {"network": str(args.out)}))


def cmd_bootstrap(args) -> None:
    data = read_dataset(args.dataset, _load_domain(args))
    config = BootstrapConfig(m=args.m, method=parse_method(args.method), search=_search_config(args),
                             kinds=args.kinds, seed=args.seed,
                             learner="tree" if args.tree else "hill_climb", jobs=args.jobs)
    report = run_bootstrap(data, config)
    write_report(report, args.out)
    cfg = _config_dict(config)
    cfg.pop("jobs")  # output does not depend on it
    write_manifest(args.out, _manifest("bootstrap", args, cfg, {"dataset": str(args.dataset)},
                                       {"report": str(args.out)}))


def cmd_constrain(args) -> None:
    report = read_report(args.report)
    derived = derive_constraints(report, args.order_threshold, args.markov_threshold)
    write_constraints(derived, report.names, args.out)
    write_manifest(args.out, _manifest(
        "constrain", args, {"order_threshold": args.order_threshold, "markov_threshold": args.markov_threshold},
        {"report": str(args.report)}, {"constraints": str(args.out)}))


def cmd_evaluate(args) -> None:
    golden = read_network(args.golden)
    if not isinstance(golden, BayesianNetwork):
        raise FormatError("golden network file has no cpts", args.golden)
    boot = BootstrapConfig(m=args.m, method=parse_method(args.method), search=_search_config(args),
                           kinds=args.kinds, learner="tree" if args.tree else "hill_climb", jobs=args.jobs)
    spec = ExperimentSpec(golden, sizes=tuple(args.sizes), replicates=args.replicates, bootstrap=boot,
                          thresholds=tuple(args.thresholds), kinds=args.kinds, seed=args.seed,
                          include_tn=args.include_tn)
    progress = (lambda msg: print(msg, file=sys.stderr, flush=True)) if args.verbose else None
    if args.experiment == "recovery":
        table = run_recovery_experiment(spec, progress=progress).to_csv()
    else:
        table = run_constraint_experiment(spec, args.test_size, args.order_threshold,
                                          args.markov_threshold, progress=progress).to_csv()
    Path(args.out).write_text(table)
    cfg = _config_dict(spec)
    cfg.pop("golden")
    cfg["bootstrap"].pop("jobs")
    cfg.update(experiment=args.experiment, test_size=args.test_size,
               order_threshold=args.order_threshold, markov_threshold=args.markov_threshold)
    write_manifest(args.out, _manifest("evaluate", args, cfg, {"golden": str(args.golden)},
                                       {"table": str(args.out)}))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bnboot", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"bnboot {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sample", help="draw a dataset from a network")
    p.add_argument("network")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("learn", help="learn a structure and its parameters")
    p.add_argument("dataset")
    p.add_argument("--domain", help="network file whose variables define the state sets")
    p.add_argument("--constraints", help="constraints JSON from 'bnboot constrain'")
    p.add_argument("--out", required=True)
    _add_search_flags(p)
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("bootstrap", help="estimate feature confidence")
    p.add_argument("dataset")
    p.add_argument("--domain", help="network file whose variables define the state sets")
    p.add_argument("--method", default="np", help="np, p or bayes")
    p.add_argument("--m", type=int, default=100, help="number of bootstrap replicates")
    p.add_argument("--kinds", type=_kinds, default=ALL_KINDS)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)
    _add_search_flags(p)
    p.set_defaults(func=cmd_bootstrap)

    p = sub.add_parser("constrain", help="turn a report into search constraints")
    p.add_argument("report")
    p.add_argument("--order-threshold", type=float, default=0.8)
    p.add_argument("--markov-threshold", type=float, default=0.05)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_constrain)

    p = sub.add_parser("evaluate", help="run a golden-model experiment")
    p.add_argument("golden")
    p.add_argument("--experiment", choices=("recovery", "constraints"), default="recovery")
    p.add_argument("--sizes", type=_int_list, default=list(DEFAULT_SIZES))
    p.add_argument("--replicates", type=int, default=10)
    p.add_argument("--m", type=int, default=100)
    p.add_argument("--method", default="np")
    p.add_argument("--thresholds", type=_float_list, default=list(DEFAULT_THRESHOLDS))
    p.add_argument("--kinds", type=_kinds, default=ALL_KINDS)
    p.add_argument("--include-tn", action="store_true")
    p.add_argument("--test-size", type=int, default=10000)
    p.add_argument("--order-threshold", type=float, default=0.8)
    p.add_argument("--markov-threshold", type=float, default=0.05)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--verbose", action="store_true", help="print a progress line per replicate")
    p.add_argument("--out", required=True)
    _add_search_flags(p)
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(argv)
    args.argv = argv
    try:
        args.func(args)
    except FormatError as exc:
        print(f"bnboot: format error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except UsageError as exc:
        print(f"bnboot: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvariantError as exc:
        print(f"bnboot: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    return 0


if __name__ == "__main__":
    sys.exit(main())
