"""Benchmark harness command line.

Four subcommands cover the pipeline:

collect    runs a scenario's simulator with exhaustive verification each
           cycle and writes the labeled design dataset (one row per
           adaptation option per cycle).
design     derives a runtime configuration from a design dataset: feature
           importance scores and mask, then a scaler x model evaluation
           grid over exploration rates and warm-up counts, emitted as a
           loadable scenario file plus the full metric grid.
run        executes every configured approach on the same seeded
           uncertainty trajectory with a co-executed exhaustive reference
           oracle, writing one cycles CSV per (approach, seed) plus the
           summary artifacts.
summarize  recomputes summary.csv and stats.json from the cycles CSVs in
           a run directory.

Jobs (approach, seed) are independent of each other; cycles within one
job are strictly serial. Exit codes: 0 ok, 2 configuration error,
3 runtime contract error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import replace
from itertools import product
from pathlib import Path

import numpy as np

from adaspace.config import (
    ConfigError,
    ModelSpec,
    ScenarioConfig,
    build_goals,
    build_reducer_config,
    build_system,
    default_candidate_catalog,
    load_scenario,
    scenario_to_mapping,
    verifier_params,
    with_overrides,
)
from adaspace.features import (
    LabeledDataset,
    apply_scaler,
    compose_features,
    compute_feature_importance,
    fit_scaler,
    load_dataset,
    mask_from_importance,
    save_dataset,
    select_features,
)
from adaspace.learners import EvalRecord, evaluate_models
from adaspace.mape import RANDOM, run_approach
from adaspace.metrics import MetricsError, quantitative_metrics, wilcoxon_signed_rank
from adaspace.reducer import TESTING
from adaspace.verifier import verify

_DESIGN_SCALERS = ("none", "min-max", "standard")
_DESIGN_EXPLORATION_GRID = (0.05, 0.10)
_DESIGN_WARMUP_GRID = (30, 45, 60)
_DESIGN_MAX_ROWS = 20000
_POOLED_SEED = -1


def cycles_csv_columns(quality_names, goal_names) -> list[str]:
    """The pinned cycles CSV schema; changing it is a schema version bump."""
    return (
        ["cycle", "approach", "seed", "mode"]
        + ["n_total", "n_filtered", "n_explored", "n_verified", "chosen_id"]
        + [f"q_{n}" for n in quality_names]
        + [f"q_o_{n}" for n in quality_names]
        + ["t_total_sim_ms", "t_reduced_sim_ms", "t_learn_real_ms"]
        + [f"sat_{n}" for n in goal_names]
    )


def write_cycles_csv(path, records, quality_names, goal_names) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(cycles_csv_columns(quality_names, goal_names))
        for r in records:
            writer.writerow(
                [r.cycle, r.approach, r.seed, r.mode]
                + [r.n_total, r.n_filtered, r.n_explored, r.n_verified, r.chosen_id]
                + [repr(float(q)) for q in r.qualities]
                + [repr(float(q)) for q in r.reference_qualities]
                + [
                    repr(float(r.t_total_sim_ms)),
                    repr(float(r.t_reduced_sim_ms)),
                    repr(float(r.t_learn_real_ms)),
                ]
                + [int(s) for s in r.satisfied]
            )


def read_cycles_csv(path) -> dict:
    """One run's cycle streams as arrays, keyed like the CSV columns."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    if not rows:
        raise ValueError(f"{path}: no cycle rows")
    index = {name: i for i, name in enumerate(header)}
    quality_names = [h[2:] for h in header if h.startswith("q_") and not h.startswith("q_o_")]
    goal_names = [h[4:] for h in header if h.startswith("sat_")]

    def column(name, kind=float):
        return np.array([kind(row[index[name]]) for row in rows])

    def block(prefix, names):
        cols = [column(f"{prefix}{n}") for n in names]
        return np.column_stack(cols) if cols else np.empty((len(rows), 0))

    return {
        "approach": rows[0][index["approach"]],
        "seed": int(rows[0][index["seed"]]),
        "cycle": column("cycle", int),
        "mode": [row[index["mode"]] for row in rows],
        "n_total": column("n_total", int),
        "n_verified": column("n_verified", int),
        "qualities": block("q_", quality_names),
        "oracle": block("q_o_", quality_names),
        "t_total_sim_ms": column("t_total_sim_ms"),
        "t_reduced_sim_ms": column("t_reduced_sim_ms"),
        "t_learn_real_ms": column("t_learn_real_ms"),
        "sat": block("sat_", goal_names).astype(bool),
        "quality_names": quality_names,
        "goal_names": goal_names,
    }


def _testing_rows(run: dict) -> np.ndarray:
    return np.array([m == TESTING for m in run["mode"]], dtype=bool)


def _summary_row(run: dict, approach: str, seed: int) -> dict:
    """Post-warm-up aggregate of one run (reference and random runs are
    all-testing, so nothing is dropped for them)."""
    keep = _testing_rows(run)
    names = run["quality_names"]
    row: dict = {"approach": approach, "seed": seed}
    if not keep.any():
        row.update(
            {"n_cycles": 0, "aasr_pct": math.nan, "overhead_pct": math.nan,
             "time_saved_pct": math.nan, "violations_pct": math.nan},
        )
        for n in names:
            row[f"penalty_{n}"] = math.nan
            row[f"mean_{n}"] = math.nan
        row["flags"] = "no-testing-cycles"
        return row
    report = quantitative_metrics(
        names,
        run["n_total"][keep],
        run["n_verified"][keep],
        run["t_total_sim_ms"][keep],
        run["t_reduced_sim_ms"][keep],
        run["t_learn_real_ms"][keep],
        run["qualities"][keep],
        run["oracle"][keep],
    )
    violations = float(np.mean(~run["sat"][keep].all(axis=1)) * 100.0)
    row.update(
        {
            "n_cycles": report.n_cycles,
            "aasr_pct": report.aasr_pct,
            "overhead_pct": report.overhead_pct,
            "time_saved_pct": report.time_saved_pct,
            "violations_pct": violations,
        }
    )
    for n in names:
        row[f"penalty_{n}"] = report.utility_penalty[n]
        row[f"mean_{n}"] = report.mean_quality[n]
    row["flags"] = "|".join(report.flags)
    return row


def _pool_runs(runs: list[dict]) -> dict:
    """Concatenates several runs' streams into one pseudo-run."""
    pooled = {
        "approach": runs[0]["approach"],
        "seed": _POOLED_SEED,
        "quality_names": runs[0]["quality_names"],
        "goal_names": runs[0]["goal_names"],
        "mode": sum((r["mode"] for r in runs), []),
    }
    for key in (
        "cycle", "n_total", "n_verified", "t_total_sim_ms",
        "t_reduced_sim_ms", "t_learn_real_ms",
    ):
        pooled[key] = np.concatenate([r[key] for r in runs])
    for key in ("qualities", "oracle", "sat"):
        pooled[key] = np.vstack([r[key] for r in runs])
    return pooled


def _per_cycle_means(runs: list[dict], quality_index: int) -> dict[int, float]:
    """cycle -> mean quality across runs (testing rows only)."""
    sums: dict[int, float] = {}
    counts: dict[int, int] = {}
    for run in runs:
        keep = _testing_rows(run)
        for cycle, value in zip(run["cycle"][keep], run["qualities"][keep, quality_index]):
            sums[int(cycle)] = sums.get(int(cycle), 0.0) + float(value)
            counts[int(cycle)] = counts.get(int(cycle), 0) + 1
    return {c: sums[c] / counts[c] for c in sums}


def _wilcoxon_block(learned: dict, other_runs: list[dict]) -> dict:
    """Paired per-cycle comparison of the learned run against another
    approach (averaged across that approach's runs), one test per quality."""
    block: dict = {}
    keep = _testing_rows(learned)
    cycles = learned["cycle"][keep]
    for j, name in enumerate(learned["quality_names"]):
        other = _per_cycle_means(other_runs, j)
        pairs = [(float(q), other[int(c)]) for c, q in zip(cycles, learned["qualities"][keep, j]) if int(c) in other]
        if not pairs:
            block[name] = {"error": "no overlapping testing cycles"}
            continue
        xs = [p[0] for p in pairs]
        ys = [p[1] for p in pairs]
        try:
            result = wilcoxon_signed_rank(xs, ys)
        except MetricsError as exc:
            block[name] = {"error": str(exc)}
            continue
        block[name] = {
            "n_pairs": len(pairs),
            "learned_mean": float(np.mean(xs)),
            "other_mean": float(np.mean(ys)),
            "p_value": result.p_value,
            "significant": result.significant,
            "statistic": result.statistic,
            "n_effective": result.n_effective,
            "mode": result.mode,
        }
    return block


def summarize_dir(out_dir) -> tuple[Path, Path]:
    """Aggregates every cycles CSV in a directory into summary.csv (one row
    per run, plus a pooled row per multi-run approach) and stats.json
    (paired Wilcoxon tests and goal-violation rates)."""
    out_dir = Path(out_dir)
    paths = sorted(out_dir.glob("cycles_*.csv"))
    if not paths:
        raise ConfigError(f"{out_dir}: no cycles_*.csv files to summarize")
    runs = [read_cycles_csv(p) for p in paths]
    names = runs[0]["quality_names"]
    for run in runs:
        if run["quality_names"] != names:
            raise ValueError("cycles CSVs disagree on quality columns")

    by_approach: dict[str, list[dict]] = {}
    for run in runs:
        by_approach.setdefault(run["approach"], []).append(run)
    for group in by_approach.values():
        group.sort(key=lambda r: r["seed"])

    rows = []
    for approach in sorted(by_approach, key=_approach_order):
        for run in by_approach[approach]:
            rows.append(_summary_row(run, approach, run["seed"]))
        if len(by_approach[approach]) > 1:
            pooled = _pool_runs(by_approach[approach])
            rows.append(_summary_row(pooled, f"{approach}-pooled", _POOLED_SEED))

    summary_path = out_dir / "summary.csv"
    columns = (
        ["approach", "seed", "n_cycles", "aasr_pct", "overhead_pct",
         "time_saved_pct", "violations_pct"]
        + [f"penalty_{n}" for n in names]
        + [f"mean_{n}" for n in names]
        + ["flags"]
    )
    with open(summary_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow(
                [row[c] if isinstance(row[c], (str, int)) else repr(float(row[c])) for c in columns]
            )

    stats: dict = {"schema_version": 1, "wilcoxon": {}, "violations_pct": {}}
    for row in rows:
        label = row["approach"] if row["seed"] == _POOLED_SEED else f"{row['approach']}_{row['seed']}"
        stats["violations_pct"][label] = row["violations_pct"]
    learned_runs = by_approach.get("learned")
    if learned_runs:
        for approach, group in by_approach.items():
            if approach == "learned":
                continue
            stats["wilcoxon"][f"learned_vs_{approach}"] = _wilcoxon_block(
                learned_runs[0], group
            )
    stats_path = out_dir / "stats.json"
    with open(stats_path, "w", encoding="utf-8") as fh:
        json.dump(stats, fh, indent=2, sort_keys=True, allow_nan=True)
        fh.write("\n")
    return summary_path, stats_path


def _approach_order(approach: str) -> tuple[int, str]:
    known = {"learned": 0, "reference": 1, "random": 2}
    return (known.get(approach, 3), approach)


def run_scenario(scenario: ScenarioConfig) -> list[Path]:
    """Executes all configured approaches and writes the run artifacts."""
    out = Path(scenario.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    config_path = out / "config.json"
    with open(config_path, "w", encoding="utf-8") as fh:
        json.dump(scenario_to_mapping(scenario), fh, indent=2, sort_keys=True)
        fh.write("\n")

    jobs: list[tuple[str, int]] = []
    for approach in scenario.approaches:
        if approach == RANDOM:
            jobs.extend((approach, scenario.seed + r) for r in range(scenario.random_runs))
        else:
            jobs.append((approach, scenario.seed))

    written = [config_path]
    for approach, seed in jobs:
        system = build_system(scenario.system)
        goals = build_goals(scenario, system.quality_names)
        cfg = build_reducer_config(scenario, system)
        noise_stds, cost_ms = verifier_params(scenario, system)
        records, _ = run_approach(
            system,
            goals,
            cfg,
            approach,
            scenario.cycles,
            seed,
            noise_stds=noise_stds,
            cost_ms=cost_ms,
        )
        path = out / f"cycles_{approach}_{seed}.csv"
        goal_names = [g.name for g in goals.point_goals]
        write_cycles_csv(path, records, system.quality_names, goal_names)
        written.append(path)
        print(f"wrote {path} ({len(records)} cycles)")
    summary_path, stats_path = summarize_dir(out)
    written += [summary_path, stats_path]
    print(f"wrote {summary_path}")
    print(f"wrote {stats_path}")
    return written


def collect_dataset(scenario: ScenarioConfig, cycles: int, seed: int) -> LabeledDataset:
    """Exhaustively verified design data: every option of every cycle."""
    system = build_system(scenario.system)
    space = system.enumerate_space()
    noise_stds, cost_ms = verifier_params(scenario, system)
    models = system.quality_models(noise_stds=noise_stds, cost_ms=cost_ms)
    ids = np.arange(space.size)
    feature_blocks = []
    quality_blocks = []
    for cycle in range(cycles):
        state = system.read_uncertainties()
        tail = system.uncertainty_features(state)
        feature_blocks.append(compose_features(space, tail))
        result = verify(ids, state, models, seed=(seed, cycle, 6))
        quality_blocks.append(result.qualities)
        system.advance_time()
    return LabeledDataset(
        np.vstack(feature_blocks),
        np.vstack(quality_blocks),
        system.feature_names,
        system.quality_names,
    )


def _rank_record(record: EvalRecord):
    def worst_if_nan(value: float, sign: float) -> float:
        return math.inf if math.isnan(value) else sign * value

    m = record.metrics
    if record.kind == "classification":
        return (worst_if_nan(m.f1, -1.0), worst_if_nan(m.mcc, -1.0), record.model_index)
    return (worst_if_nan(m.r2, -1.0), worst_if_nan(m.mse, 1.0), record.model_index)


def _headline_metric(record: EvalRecord) -> float:
    return record.metrics.f1 if record.kind == "classification" else record.metrics.r2


def design_from_dataset(
    scenario: ScenarioConfig, ds: LabeledDataset, seed: int
) -> tuple[ScenarioConfig, dict, list[tuple], list[tuple]]:
    """The design-stage pipeline: importance scores -> feature mask, then
    an evaluation grid over scalers, candidate models, exploration rates
    and warm-up counts. Models are chosen per target at the scenario's own
    (exploration rate, warm-up) cell; the grid exists to document how the
    alternatives compare. Returns the chosen scenario, the provenance
    block, and the importance/evaluation rows for the CSV artifacts."""
    goals = build_goals(scenario, ds.quality_names)
    catalog_probe = default_candidate_catalog(1)
    if not catalog_probe:
        raise ConfigError("empty candidate catalog")

    scores = []
    for j in range(ds.qualities.shape[1]):
        score, _ = compute_feature_importance(ds, j, seed=seed)
        scores.append(score)
    combined = np.max(scores, axis=0)
    mask = mask_from_importance(combined)
    kept = set(mask.indices)
    importance_rows = [
        (name, *(float(s[i]) for s in scores), float(combined[i]), int(i in kept))
        for i, name in enumerate(ds.feature_names)
    ]

    if ds.n_rows > _DESIGN_MAX_ROWS:
        rng = np.random.default_rng((seed, 9))
        rows = np.sort(rng.choice(ds.n_rows, size=_DESIGN_MAX_ROWS, replace=False))
        ds = ds.take(rows)
    masked = select_features(ds.features, mask)
    masked_names = mask.apply_names(ds.feature_names)
    catalog = default_candidate_catalog(len(mask))

    e_grid = sorted(set(_DESIGN_EXPLORATION_GRID) | {scenario.reducer.exploration_rate})
    w_grid = sorted(set(_DESIGN_WARMUP_GRID) | {scenario.reducer.warmup_count})
    reference_cell = (scenario.reducer.exploration_rate, scenario.reducer.warmup_count)

    evaluation_rows: list[tuple] = []
    candidates: dict[str, list[tuple[int, EvalRecord]]] = {}
    for scaler_index, scaler_kind in enumerate(_DESIGN_SCALERS):
        scaler = fit_scaler(scaler_kind, masked)
        ds_scaled = LabeledDataset(
            apply_scaler(scaler, masked), ds.qualities, masked_names, ds.quality_names
        )
        for e, w in product(e_grid, w_grid):
            # warm-up cycles bound the training share of the collected data
            fraction = min(0.8, max(0.1, w / scenario.cycles))
            # candidates may legitimately diverge on unscaled features; the
            # NaN scores rank last instead of warning
            with np.errstate(over="ignore", invalid="ignore"):
                records = evaluate_models(
                    catalog,
                    ds_scaled,
                    goals,
                    train_fraction=fraction,
                    seed=seed,
                    exploration_rate=e,
                    warmup_count=w,
                )
            for rec in records:
                for metric, value in vars(rec.metrics).items():
                    evaluation_rows.append(
                        (scaler_kind, e, w, rec.model_index, rec.family, rec.loss,
                         rec.penalty, rec.target, rec.kind, metric, value)
                    )
                if (e, w) == reference_cell:
                    candidates.setdefault(rec.target, []).append((scaler_index, rec))

    chosen: dict[str, tuple[str, EvalRecord]] = {}
    for target, pool in candidates.items():
        scaler_index, best = min(pool, key=lambda item: (_rank_record(item[1]), item[0]))
        chosen[target] = (_DESIGN_SCALERS[scaler_index], best)
    first_target = next(iter(candidates))
    chosen_scaler = chosen.get("thresholds", chosen[first_target])[0]

    reducer = replace(
        scenario.reducer,
        features=mask.indices,
        scaler=chosen_scaler,
        models={
            target: ModelSpec(family=rec.family, loss=rec.loss, penalty=rec.penalty)
            for target, (_, rec) in chosen.items()
        },
    )
    provenance = {
        "rows": int(ds.n_rows),
        "selected": {
            target: {
                "scaler": scaler_kind,
                "family": rec.family,
                "loss": rec.loss,
                "penalty": rec.penalty,
                "metric": None if math.isnan(_headline_metric(rec)) else _headline_metric(rec),
            }
            for target, (scaler_kind, rec) in chosen.items()
        },
        "exploration_rate": scenario.reducer.exploration_rate,
        "warmup_count": scenario.reducer.warmup_count,
    }
    return replace(scenario, reducer=reducer), provenance, importance_rows, evaluation_rows


def cmd_collect(args) -> None:
    scenario = load_scenario(args.config)
    cycles = args.cycles if args.cycles is not None else scenario.cycles
    if cycles < 1:
        raise ConfigError("--cycles must be >= 1")
    seed = args.seed if args.seed is not None else scenario.seed
    out = Path(args.out if args.out is not None else scenario.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    ds = collect_dataset(scenario, cycles, seed)
    path = out / f"{scenario.name}-design-data.csv"
    save_dataset(ds, path)
    print(f"wrote {path} ({ds.n_rows} rows, {cycles} cycles)")


def cmd_design(args) -> None:
    scenario = load_scenario(args.config)
    seed = args.seed if args.seed is not None else scenario.seed
    out = Path(args.out if args.out is not None else scenario.output_dir)
    ds = load_dataset(args.data)
    system = build_system(scenario.system)
    if ds.feature_names != system.feature_names:
        raise ConfigError(
            f"{args.data}: dataset features do not match the scenario's system"
        )
    chosen_scenario, provenance, importance_rows, evaluation_rows = design_from_dataset(
        scenario, ds, seed
    )
    out.mkdir(parents=True, exist_ok=True)

    importance_path = out / "design_importance.csv"
    with open(importance_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["feature"] + [f"score_{n}" for n in ds.quality_names] + ["combined", "kept"]
        )
        writer.writerows(importance_rows)

    evaluation_path = out / "design_evaluation.csv"
    with open(evaluation_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["scaler", "exploration_rate", "warmup_count", "model_index", "family",
             "loss", "penalty", "target", "kind", "metric", "value"]
        )
        writer.writerows(evaluation_rows)

    config_path = out / "design_config.json"
    mapping = scenario_to_mapping(chosen_scenario)
    mapping["design"] = {"dataset": str(args.data), **provenance}
    with open(config_path, "w", encoding="utf-8") as fh:
        json.dump(mapping, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for path in (importance_path, evaluation_path, config_path):
        print(f"wrote {path}")


def cmd_run(args) -> None:
    scenario = load_scenario(args.config)
    approaches = args.approach.split(",") if args.approach else None
    scenario = with_overrides(
        scenario,
        seed=args.seed,
        cycles=args.cycles,
        granularity=args.granularity,
        approaches=approaches,
        output_dir=args.out,
    )
    run_scenario(scenario)


def cmd_summarize(args) -> None:
    summary_path, stats_path = summarize_dir(args.out)
    print(f"wrote {summary_path}")
    print(f"wrote {stats_path}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adaspace",
        description="Adaptation-space reduction benchmark harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    collect = sub.add_parser("collect", help="write an exhaustively verified design dataset")
    collect.add_argument("--config", required=True, help="scenario file (.toml or .json)")
    collect.add_argument("--cycles", type=int, default=None, help="cycles to collect")
    collect.add_argument("--seed", type=int, default=None)
    collect.add_argument("--out", default=None, help="output directory")
    collect.set_defaults(func=cmd_collect)

    design = sub.add_parser("design", help="derive a runtime configuration from design data")
    design.add_argument("--config", required=True)
    design.add_argument("--data", required=True, help="design dataset CSV")
    design.add_argument("--seed", type=int, default=None)
    design.add_argument("--out", default=None)
    design.set_defaults(func=cmd_design)

    run = sub.add_parser("run", help="benchmark the configured approaches")
    run.add_argument("--config", required=True)
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--out", default=None)
    run.add_argument("--approach", default=None, help="comma-separated approach list")
    run.add_argument("--granularity", type=int, default=None)
    run.add_argument("--cycles", type=int, default=None)
    run.set_defaults(func=cmd_run)

    summarize = sub.add_parser("summarize", help="recompute summary artifacts from cycles CSVs")
    summarize.add_argument("--out", required=True, help="run directory holding cycles_*.csv")
    summarize.set_defaults(func=cmd_summarize)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse: 2 on usage error, 0 on --help
        return int(exc.code or 0)
    try:
        args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
