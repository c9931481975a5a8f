"""Command-line surface.

Subcommands: gen, stability, coherence, select, experiment, simulate.
Results print as JSON (or flattened CSV with --format csv) on stdout.

Exit codes: 0 success, 1 usage error, 2 input/config error, 3 the system
under test is unstable.  Node ids on the command line and in outputs are
in the graph file's label space (``label_base``, default 1).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .coherence import (
    SystemContext,
    coherence_closed,
    coherence_lyapunov_oracle,
)
from .errors import (
    CombinatorialCapError,
    DimensionCapError,
    LeaderSelError,
    ParseError,
    PreconditionViolatedError,
    SchemaError,
    StepTooLargeError,
    UnstableGainsError,
    UnstableSystemError,
)
from .experiments import ExperimentConfig, run_experiment
from .graphs import (
    GraphFile,
    erdos_renyi,
    erdos_renyi_connected,
    graph_payload,
    read_graph_file,
    unit_kappa,
)
from .selection import certify_bound, exhaustive_select, greedy_select
from .simulate import SimulationSpec, simulate_coherence, simulate_trajectory, write_trajectory_csv
from .stability import auto_gains, build_state_matrices, check_stability, spectral_stability_oracle
from .system import GainVector, GroundedSystem, LeaderSet

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_UNSTABLE = 3


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse with usage failures mapped to exit code 1."""

    def error(self, message):  # noqa: A003 - argparse API
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0, help="master random seed")
    parser.add_argument("--out", default=None,
                        help="output directory for file-producing commands")
    parser.add_argument("--format", choices=("json", "csv"), default="json",
                        help="stdout payload format")


def _add_system_args(parser: argparse.ArgumentParser, with_leaders: bool = True) -> None:
    parser.add_argument("graph", help="graph JSON file")
    parser.add_argument("--order", type=int, required=True, choices=(1, 2, 3, 4),
                        help="dynamic order m")
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--gains", help="comma-separated gains a1,..,am")
    group.add_argument("--auto-gains", action="store_true",
                       help="derive gains from the smallest grounded eigenvalue")
    if with_leaders:
        parser.add_argument("--leaders", help="comma-separated leader labels")


def build_parser() -> _Parser:
    parser = _Parser(prog="leadersel", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_gen = sub.add_parser("gen", help="sample a random graph file")
    _add_common(p_gen)
    p_gen.add_argument("--n", type=int, required=True)
    p_gen.add_argument("--p", type=float, required=True)
    p_gen.add_argument("--weight", type=float, default=1.0)
    p_gen.add_argument("--connected", action="store_true",
                       help="resample (seed offset +1) until connected")
    p_gen.add_argument("--label-base", type=int, default=1)
    p_gen.add_argument("--output", help="write the graph here instead of stdout")

    p_stab = sub.add_parser("stability", help="stability verdict for a leader set")
    _add_common(p_stab)
    _add_system_args(p_stab)
    p_stab.add_argument("--oracle", action="store_true",
                        help="cross-check against the state-matrix spectrum")

    p_coh = sub.add_parser("coherence", help="coherence of a leader set")
    _add_common(p_coh)
    _add_system_args(p_coh)
    p_coh.add_argument("--method", choices=("closed", "lyapunov", "simulate"),
                       default="closed")
    p_coh.add_argument("--dt", type=float, default=1e-3)
    p_coh.add_argument("--total-time", type=float, default=500.0)
    p_coh.add_argument("--burn-in", type=float, default=20.0)
    p_coh.add_argument("--ensemble", type=int, default=2)

    p_sel = sub.add_parser("select", help="choose a leader set of size <= k")
    _add_common(p_sel)
    _add_system_args(p_sel, with_leaders=False)
    p_sel.add_argument("--k", type=int, required=True)
    p_sel.add_argument("--algorithm", choices=("greedy", "exhaustive", "both"),
                       default="greedy")

    p_exp = sub.add_parser("experiment", help="run a configured experiment")
    _add_common(p_exp)
    p_exp.add_argument("config", help="experiment config JSON file")

    p_sim = sub.add_parser("simulate", help="empirical coherence via integration")
    _add_common(p_sim)
    _add_system_args(p_sim)
    p_sim.add_argument("--dt", type=float, default=1e-3)
    p_sim.add_argument("--total-time", type=float, default=500.0)
    p_sim.add_argument("--burn-in", type=float, default=20.0)
    p_sim.add_argument("--ensemble", type=int, default=2)
    p_sim.add_argument("--trajectory", help="also write a trajectory CSV to this file")
    p_sim.add_argument("--stride", type=int, default=100,
                       help="record every this many steps in the trajectory")

    return parser


def _load_graph(path: str) -> GraphFile:
    p = Path(path)
    if not p.exists():
        raise InputError(f"graph file not found: {path}")
    return read_graph_file(p)


def _parse_leaders(gf: GraphFile, raw: str | None) -> LeaderSet:
    if raw is None:
        raise UsageError("--leaders is required for this command")
    labels = [tok for tok in raw.split(",") if tok.strip() != ""]
    if not labels:
        raise InputError("leader list is empty")
    try:
        ids = [gf.to_id(int(tok)) for tok in labels]
    except ValueError as exc:
        raise InputError(f"leader labels must be integers: {exc}") from exc
    for ident, tok in zip(ids, labels):
        if not 0 <= ident < gf.graph.n:
            raise InputError(f"leader label {tok} outside the graph's label range")
    return LeaderSet.of(ids)


def _parse_gains(args, gf: GraphFile) -> GainVector:
    if args.auto_gains:
        return auto_gains(gf.graph, gf.kappa, args.order)
    if args.gains is None:
        raise UsageError("provide --gains or --auto-gains")
    try:
        values = tuple(float(tok) for tok in args.gains.split(","))
    except ValueError as exc:
        raise UsageError(f"gains must be numbers: {exc}") from exc
    if len(values) != args.order:
        raise UsageError(f"expected {args.order} gains, got {len(values)}")
    return GainVector(values)


def _json_default(value):
    import numpy as np

    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"not JSON serializable: {type(value)}")


def _emit(payload: dict, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(payload, indent=2, default=_json_default))
        return
    rows = ["key,value"]

    def walk(prefix: str, value) -> None:
        if isinstance(value, dict):
            for key, sub in value.items():
                walk(f"{prefix}.{key}" if prefix else str(key), sub)
        elif isinstance(value, (list, tuple)):
            for i, sub in enumerate(value):
                walk(f"{prefix}[{i}]", sub)
        else:
            rows.append(f"{prefix},{value!r}" if isinstance(value, float) else f"{prefix},{value}")

    walk("", payload)
    print("\n".join(rows))


def _cmd_gen(args) -> int:
    if args.connected:
        graph, resamples = erdos_renyi_connected(args.n, args.p, args.seed, args.weight)
    else:
        graph, resamples = erdos_renyi(args.n, args.p, args.seed, args.weight), 0
    payload = graph_payload(graph, unit_kappa(args.n), args.label_base)
    text = json.dumps(payload)
    if args.output:
        Path(args.output).write_text(text + "\n")
        _emit({"written": args.output, "edges": len(graph.edges), "resamples": resamples},
              args.format)
    else:
        print(text)
    return EXIT_OK


def _cmd_stability(args) -> int:
    gf = _load_graph(args.graph)
    leaders = _parse_leaders(gf, args.leaders)
    gains = _parse_gains(args, gf)
    system = GroundedSystem.create(gf.graph, gf.kappa, leaders, gains)
    report = check_stability(system)
    payload = report.to_dict()
    payload["leaders"] = [gf.to_label(v) for v in leaders.sorted_members]
    payload["gains"] = list(gains.values)
    if args.oracle:
        stable, max_real = spectral_stability_oracle(build_state_matrices(system).a)
        payload["oracle"] = {"stable": stable, "max_real_part": max_real}
    _emit(payload, args.format)
    return EXIT_OK if report.stable else EXIT_UNSTABLE


def _cmd_coherence(args) -> int:
    gf = _load_graph(args.graph)
    leaders = _parse_leaders(gf, args.leaders)
    gains = _parse_gains(args, gf)
    system = GroundedSystem.create(gf.graph, gf.kappa, leaders, gains)
    if args.method == "closed":
        report = coherence_closed(system)
        payload = report.to_dict()
    elif args.method == "lyapunov":
        report = coherence_lyapunov_oracle(system)
        payload = report.to_dict()
    else:
        spec = SimulationSpec(system=system, dt=args.dt, total_time=args.total_time,
                              burn_in=args.burn_in, seed=args.seed, ensemble=args.ensemble)
        estimate, stderr = simulate_coherence(spec)
        payload = {
            "order": system.m,
            "value": estimate,
            "standard_error": stderr,
            "method": "simulation",
            "leaders": list(system.leaders.sorted_members),
            "gains": list(gains.values),
        }
    payload["leaders"] = [gf.to_label(v) for v in leaders.sorted_members]
    _emit(payload, args.format)
    return EXIT_OK


def _cmd_select(args) -> int:
    if args.k < 1:
        raise UsageError("--k must be >= 1")
    gf = _load_graph(args.graph)
    gains = _parse_gains(args, gf)
    context = SystemContext(graph=gf.graph, kappa=gf.kappa, gains=gains)
    payload: dict = {"order": args.order, "gains": list(gains.values)}

    def labelled(result) -> dict:
        data = result.to_dict()
        data["chosen"] = [gf.to_label(v) for v in result.chosen]
        return data

    if args.algorithm in ("greedy", "both"):
        payload["greedy"] = labelled(greedy_select(context, args.k))
    if args.algorithm in ("exhaustive", "both"):
        payload["exhaustive"] = labelled(exhaustive_select(context, args.k))
    if args.algorithm == "both":
        payload["certificate"] = certify_bound(context, args.k).to_dict()
    _emit(payload, args.format)
    return EXIT_OK


def _cmd_experiment(args) -> int:
    path = Path(args.config)
    if not path.exists():
        raise InputError(f"config file not found: {args.config}")
    config = ExperimentConfig.from_file(path)
    out = run_experiment(config, args.out)
    _emit({"experiment": config.experiment, "output_dir": str(out)}, args.format)
    return EXIT_OK


def _cmd_simulate(args) -> int:
    gf = _load_graph(args.graph)
    leaders = _parse_leaders(gf, args.leaders)
    gains = _parse_gains(args, gf)
    system = GroundedSystem.create(gf.graph, gf.kappa, leaders, gains)
    spec = SimulationSpec(system=system, dt=args.dt, total_time=args.total_time,
                          burn_in=args.burn_in, seed=args.seed, ensemble=args.ensemble)
    estimate, stderr = simulate_coherence(spec)
    payload = {
        "order": system.m,
        "estimate": estimate,
        "standard_error": stderr,
        "dt": args.dt,
        "total_time": args.total_time,
        "burn_in": args.burn_in,
        "ensemble": args.ensemble,
        "seed": args.seed,
        "leaders": [gf.to_label(v) for v in leaders.sorted_members],
    }
    if args.trajectory:
        times, outputs = simulate_trajectory(spec, record_stride=args.stride)
        target = Path(args.out) / args.trajectory if args.out else Path(args.trajectory)
        target.parent.mkdir(parents=True, exist_ok=True)
        write_trajectory_csv(target, times, outputs)
        payload["trajectory"] = str(target)
    _emit(payload, args.format)
    return EXIT_OK


_HANDLERS = {
    "gen": _cmd_gen,
    "stability": _cmd_stability,
    "coherence": _cmd_coherence,
    "select": _cmd_select,
    "experiment": _cmd_experiment,
    "simulate": _cmd_simulate,
}

_INPUT_ERRORS = (
    ParseError,
    SchemaError,
    InputError,
    CombinatorialCapError,
    DimensionCapError,
    PreconditionViolatedError,
    StepTooLargeError,
)
_UNSTABLE_ERRORS = (UnstableSystemError, UnstableGainsError)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _HANDLERS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _UNSTABLE_ERRORS as exc:
        print(f"unstable system: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    except _INPUT_ERRORS as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (OSError, ValueError, LeaderSelError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
