"""Seeded experiment runners behind the ``experiment`` CLI subcommand.

Three canned protocols plus a custom one, all emitting plot-ready CSV:

* fig1 - optimal coherence per order and budget k on connected random
  graphs, averaged over trials.
* fig2 - greedy-vs-optimal surrogate ratio per order and k, same graphs.
* fig3 - per-node single-leader coherence table on the bundled six-node
  network (whose best leader differs between orders).
* custom - the fig3-style singleton table on a user-supplied graph file.

Per-trial seeds derive from SeedSequence([master_seed, trial]); random
graphs are resampled (seed offset +1) until connected, with the resample
count recorded in the summary.  Means are written alongside per-trial
rows so downstream checks never need to re-run the protocol.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .coherence import SystemContext
from .errors import SchemaError
from .graphs import GraphFile, erdos_renyi_connected, read_graph_file, six_node_example, unit_kappa
from .selection import certify_bound, exhaustive_select
from .stability import auto_gains
from .system import GainVector

EXPERIMENTS = ("fig1", "fig2", "fig3", "custom")


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    n: int = 12
    p: float = 0.5
    trials: int = 3
    k_max: int = 3
    orders: tuple[int, ...] = (1, 2, 3)
    seed: int = 0
    gain_rule: str | dict = "auto"
    output_dir: str = "."
    graph_file: str | None = None

    def __post_init__(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise SchemaError(f"experiment must be one of {EXPERIMENTS}")
        if not self.orders or any(m not in (1, 2, 3, 4) for m in self.orders):
            raise SchemaError("orders must be a nonempty subset of {1, 2, 3, 4}")
        if self.trials < 1:
            raise SchemaError("trials must be >= 1")
        if self.k_max < 1:
            raise SchemaError("k_max must be >= 1")
        if self.experiment == "custom" and not self.graph_file:
            raise SchemaError("custom experiments need a graph_file")

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        try:
            payload = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: {exc}") from exc
        if not isinstance(payload, dict):
            raise SchemaError("experiment config must be a JSON object")
        known = {
            "experiment", "n", "p", "trials", "k_max", "orders", "seed",
            "gain_rule", "output_dir", "graph_file",
        }
        unknown = set(payload) - known
        if unknown:
            raise SchemaError(f"unknown config fields: {sorted(unknown)}")
        if "orders" in payload:
            payload["orders"] = tuple(int(m) for m in payload["orders"])
        try:
            return cls(**payload)
        except TypeError as exc:
            raise SchemaError(str(exc)) from exc


def derive_seed(master: int, *key: int) -> int:
    """Stable 64-bit child seed for (master, key...)."""
    ss = np.random.SeedSequence([int(master), *[int(k) for k in key]])
    return int(ss.generate_state(1, np.uint64)[0])


def gains_for(config: ExperimentConfig, graph, kappa, m: int) -> GainVector:
    if config.gain_rule == "auto":
        return auto_gains(graph, kappa, m)
    if isinstance(config.gain_rule, dict):
        try:
            raw = config.gain_rule[str(m)]
        except KeyError as exc:
            raise SchemaError(f"gain_rule has no entry for order {m}") from exc
        return GainVector(tuple(float(a) for a in raw))
    raise SchemaError(f"gain_rule must be 'auto' or a mapping, got {config.gain_rule!r}")


def _write_csv(path: Path, header: str, rows: list[str]) -> None:
    path.write_text("\n".join([header, *rows]) + "\n")


@dataclass
class _TrialData:
    seed: int
    resamples: int
    gains: dict = field(default_factory=dict)


def _run_graph_trials(config: ExperimentConfig, out: Path, metric: str) -> dict:
    """Shared driver for fig1 (metric='optimal_h') and fig2 (metric='ratio')."""
    per_trial_rows: list[str] = []
    values: dict[tuple[int, int], list[float]] = {}
    trials_meta: list[dict] = []
    for trial in range(config.trials):
        trial_seed = derive_seed(config.seed, trial)
        graph, resamples = erdos_renyi_connected(config.n, config.p, trial_seed)
        kappa = unit_kappa(config.n)
        meta = _TrialData(seed=trial_seed, resamples=resamples)
        for m in config.orders:
            gains = gains_for(config, graph, kappa, m)
            meta.gains[str(m)] = list(gains.values)
            context = SystemContext(graph=graph, kappa=kappa, gains=gains)
            for k in range(1, config.k_max + 1):
                if metric == "optimal_h":
                    value = exhaustive_select(context, k).h_values[-1]
                else:
                    value = certify_bound(context, k).ratio
                values.setdefault((k, m), []).append(value)
                per_trial_rows.append(f"{k},{m},{trial},{value!r}")
        trials_meta.append(
            {"trial": trial, "seed": meta.seed, "resamples": meta.resamples, "gains": meta.gains}
        )

    name = config.experiment
    if metric == "optimal_h":
        header = "k,order,mean_optimal_h,trials"
        trial_header = "k,order,trial,optimal_h"
    else:
        header = "k,order,mean_ratio"
        trial_header = "k,order,trial,ratio"
    mean_rows = []
    for (k, m) in sorted(values):
        mean = float(np.mean(values[(k, m)]))
        row = f"{k},{m},{mean!r}"
        if metric == "optimal_h":
            row += f",{config.trials}"
        mean_rows.append(row)
    _write_csv(out / f"{name}.csv", header, mean_rows)
    _write_csv(out / f"{name}_trials.csv", trial_header, per_trial_rows)
    return {"trials": trials_meta}


def _run_singleton_table(config: ExperimentConfig, out: Path, gf: GraphFile) -> dict:
    graph, kappa = gf.graph, gf.kappa
    rows: list[str] = []
    gains_used: dict[str, list[float]] = {}
    argmin: dict[str, int] = {}
    for m in config.orders:
        gains = gains_for(config, graph, kappa, m)
        gains_used[str(m)] = list(gains.values)
        context = SystemContext(graph=graph, kappa=kappa, gains=gains)
        best = exhaustive_select(context, 1)
        for v in range(graph.n):
            rows.append(f"{gf.to_label(v)},{m},{context.coherence([v])!r}")
        argmin[str(m)] = gf.to_label(best.chosen[0])
    name = config.experiment
    _write_csv(out / f"{name}.csv", "node,order,coherence", rows)
    return {"gains": gains_used, "argmin_node": argmin}


def run_experiment(config: ExperimentConfig, output_dir: str | Path | None = None) -> Path:
    """Run the configured experiment; returns the output directory.

    Writes the protocol CSVs plus a summary.json recording the seeds and
    the gain values actually used, so a rerun is fully reproducible.
    """
    out = Path(output_dir if output_dir is not None else config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    if config.experiment == "fig1":
        detail = _run_graph_trials(config, out, "optimal_h")
    elif config.experiment == "fig2":
        detail = _run_graph_trials(config, out, "ratio")
    elif config.experiment == "fig3":
        detail = _run_singleton_table(config, out, six_node_example())
    else:
        detail = _run_singleton_table(config, out, read_graph_file(config.graph_file))
    summary = {
        "experiment": config.experiment,
        "config": {
            "n": config.n,
            "p": config.p,
            "trials": config.trials,
            "k_max": config.k_max,
            "orders": list(config.orders),
            "seed": config.seed,
            "gain_rule": config.gain_rule,
            "graph_file": config.graph_file,
        },
        **detail,
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    return out
