"""Unified command line: gridgen, run, metrics, search, serve, validate.

Every output directory receives one manifest.json recording the toolkit
version, the hash of the config set involved, the exact command line,
the base seed, and a timestamp. Data files themselves are byte-stable
for identical inputs; the manifest is the one file that is not.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from pathlib import Path

from . import __version__
from .agents import AGENT_KINDS, AgentParams, default_params
from .env import GridConfig
from .gen import (
    COMPLEX,
    SIMPLE,
    GenSpec,
    GenerationError,
    generate,
    reference_seeds,
    validate,
)
from .harness import RunSpec, run_batch
from .metrics import (
    METRIC_NAMES,
    condition_summary,
    curve_values,
    episode_metrics,
    learning_curves,
)
from .plots import line_plot_svg, write_svg
from .records import (
    config_set_hash,
    load_config_dir,
    read_step_csv,
    save_config,
    step_csv_text,
    summary_csv_text,
)
from .search import (
    OBJECTIVE_PMAX,
    OBJECTIVE_RMSE,
    SearchSpace,
    load_reference_curve,
    random_search,
    write_trial_log,
)


def write_manifest(out_dir: Path, base_seed: int, configs=None) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "toolkit_version": __version__,
        "config_set_hash": config_set_hash(configs) if configs else None,
        "command": " ".join(sys.argv),
        "base_seed": base_seed,
        "created_unix": time.time(),
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


def _add_gridgen(sub):
    p = sub.add_parser("gridgen", help="generate grid configurations")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--complexity", choices=[SIMPLE, COMPLEX], default=SIMPLE)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--size", type=int, default=11)
    p.add_argument("--reference", action="store_true",
                   help="emit the fixed 64 simple + 62 complex reference set")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_gridgen)


def cmd_gridgen(args) -> int:
    out: Path = args.out
    configs = []
    if args.reference:
        for complexity in (SIMPLE, COMPLEX):
            for seed in reference_seeds(complexity):
                configs.append(generate(GenSpec(seed=seed, complexity=complexity)))
    else:
        seed = args.seed
        while len(configs) < args.count:
            try:
                configs.append(
                    generate(GenSpec(seed=seed, complexity=args.complexity,
                                     size=args.size))
                )
            except GenerationError as exc:
                print(f"skipping seed {seed}: {exc}", file=sys.stderr)
            seed += 1
    for config in configs:
        save_config(config, out)
    write_manifest(out, args.seed if not args.reference else 0, configs)
    print(f"wrote {len(configs)} configs to {out}")
    return 0


def _add_run(sub):
    p = sub.add_parser("run", help="run an agent batch over a config directory")
    p.add_argument("--agent", choices=AGENT_KINDS, required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--defaults", choices=[SIMPLE, COMPLEX],
                       help="use the published default parameters for this condition")
    group.add_argument("--params", type=Path, help="JSON file of AgentParams")
    p.add_argument("--configs", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--episodes", type=int, default=40)
    p.add_argument("--runs", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--only-condition", choices=[SIMPLE, COMPLEX], default=None,
                   help="restrict to configs of one condition")
    p.set_defaults(func=cmd_run)


def cmd_run(args) -> int:
    configs = load_config_dir(args.configs)
    if args.only_condition:
        configs = {k: v for k, v in configs.items()
                   if v.complexity == args.only_condition}
    if not configs:
        print("no configs found", file=sys.stderr)
        return 2
    if args.params:
        params = AgentParams.from_json(json.loads(args.params.read_text()))
        if params.kind != args.agent:
            print(f"params file is for {params.kind}, not {args.agent}", file=sys.stderr)
            return 2
    else:
        params = default_params(args.agent, args.defaults)

    spec = RunSpec(config_ids=sorted(configs), agent=params, episodes=args.episodes,
                   runs_per_config=args.runs, base_seed=args.seed)
    result = run_batch(spec, configs, workers=args.workers)
    for failure in result.failures:
        print(f"warning: {failure}", file=sys.stderr)

    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    (out / "steps.csv").write_text(step_csv_text(result.records))
    from .harness import summary_rows

    (out / "summary.csv").write_text(
        summary_csv_text(summary_rows(result.records, configs))
    )
    (out / "params.json").write_text(json.dumps(params.to_json(), indent=2) + "\n")
    write_manifest(out, args.seed, configs.values())
    print(f"wrote {len(result.records)} episode records to {out}")
    return 0


def _add_metrics(sub):
    p = sub.add_parser("metrics", help="score step CSVs and emit curves/plots")
    p.add_argument("--steps", action="append", required=True, metavar="[LABEL=]CSV",
                   help="step CSV, optionally labeled (repeatable)")
    p.add_argument("--configs", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--plots", action="store_true", help="emit SVG learning curves")
    p.add_argument("--reference", type=Path, default=None,
                   help="summary CSV of reference means (condition,pmax,poptimal)")
    p.set_defaults(func=cmd_metrics)


def cmd_metrics(args) -> int:
    configs = load_config_dir(args.configs)
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)

    reference = {}
    if args.reference:
        with open(args.reference, newline="") as fh:
            for row in csv.DictReader(fh):
                reference[row["condition"]] = row

    labeled_curves: dict[str, dict] = {}
    summary_lines = []
    for item in args.steps:
        label, _, path = item.rpartition("=")
        label = label or Path(path).stem
        records = read_step_csv(Path(path), configs)
        if not records:
            print(f"warning: {path} contained no episodes", file=sys.stderr)
            continue
        scored = []
        rows = []
        for rec in records:
            config = configs.get(rec.config_id)
            if config is None:
                print(f"warning: unknown config {rec.config_id}", file=sys.stderr)
                continue
            em = episode_metrics(rec, config)
            scored.append((rec, em, config))
            rows.append([rec.config_id, rec.run, rec.episode,
                         "none" if em.consumed_rank is None else em.consumed_rank,
                         len(rec.steps), repr(rec.score),
                         int(em.pmax), int(em.poptimal), repr(em.redundancy),
                         repr(em.immediate_redundancy), repr(em.coverage),
                         int(em.linear_move), int(em.closest_distractor)])
        with open(out / f"{label}_episodes.csv", "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["config_id", "run", "episode", "consumed_rank", "steps",
                             "score", "pmax", "poptimal", "redundancy",
                             "immediate_redundancy", "coverage", "linear_move",
                             "closest_distractor"])
            writer.writerows(rows)

        curves = learning_curves(scored)
        labeled_curves[label] = curves
        with open(out / f"{label}_curves.csv", "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["condition", "episode", *METRIC_NAMES])
            for condition in sorted(curves):
                for ep in sorted(curves[condition]):
                    row = curves[condition][ep]
                    writer.writerow([condition, ep, *(repr(row[m]) for m in METRIC_NAMES)])

        for condition, means in sorted(condition_summary(curves).items()):
            line = [label, condition, repr(means["pmax"]), repr(means["poptimal"])]
            ref = reference.get(condition)
            if ref:
                line += [repr(means["pmax"] - float(ref["pmax"])),
                         repr(means["poptimal"] - float(ref["poptimal"]))]
            else:
                line += ["", ""]
            summary_lines.append(line)

    with open(out / "condition_summary.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["label", "condition", "pmax", "poptimal",
                         "pmax_diff", "poptimal_diff"])
        writer.writerows(summary_lines)

    if args.plots:
        emit_plots(labeled_curves, out)
    write_manifest(out, 0, configs.values())
    print(f"metrics written to {out}")
    return 0


def emit_plots(labeled_curves: dict[str, dict], out: Path,
               metrics=("pmax", "poptimal")) -> int:
    """One SVG per metric and condition, overlaying every labeled curve set."""
    written = 0
    conditions = sorted({c for curves in labeled_curves.values() for c in curves})
    for metric in metrics:
        for condition in conditions:
            series = {
                label: curve_values(curves, condition, metric)
                for label, curves in sorted(labeled_curves.items())
                if condition in curves
            }
            series = {k: v for k, v in series.items() if v}
            if not series:
                continue
            svg = line_plot_svg(
                title=f"{metric} - {condition}",
                series=series,
                y_label=metric,
                y_range=(0.0, 1.0) if metric in ("pmax", "poptimal") else None,
            )
            write_svg(out / f"{metric}_{condition}.svg", svg)
            written += 1
    if written == 0:
        print("warning: no curve data to plot", file=sys.stderr)
    return written


def _add_search(sub):
    p = sub.add_parser("search", help="random parameter search")
    p.add_argument("--agent", choices=AGENT_KINDS, required=True)
    p.add_argument("--objective", choices=[OBJECTIVE_PMAX, OBJECTIVE_RMSE],
                   default=OBJECTIVE_PMAX)
    p.add_argument("--reference", type=Path, default=None,
                   help="curve CSV (episode,value) for the rmse objective")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--configs", type=Path, required=True)
    p.add_argument("--subset", type=int, default=0,
                   help="evaluate on only the first N configs (0 = all)")
    p.add_argument("--episodes", type=int, default=40)
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_search)


def cmd_search(args) -> int:
    configs = load_config_dir(args.configs)
    config_ids = sorted(configs)
    if args.subset:
        config_ids = config_ids[: args.subset]
    reference_curve = None
    if args.objective == OBJECTIVE_RMSE:
        if not args.reference:
            print("rmse objective requires --reference", file=sys.stderr)
            return 2
        reference_curve = load_reference_curve(args.reference)
        if len(reference_curve) != args.episodes:
            print(f"reference curve has {len(reference_curve)} points, "
                  f"need {args.episodes}", file=sys.stderr)
            return 2

    result = random_search(
        kind=args.agent,
        space=SearchSpace(trials=args.trials),
        configs=configs,
        config_ids=config_ids,
        objective=args.objective,
        reference_curve=reference_curve,
        seed=args.seed,
        episodes=args.episodes,
        runs_per_config=args.runs,
        workers=args.workers,
    )
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    (out / "best_params.json").write_text(
        json.dumps(result.best_params.to_json(), indent=2) + "\n"
    )
    write_trial_log(out / "trials.csv", result)
    write_manifest(out, args.seed, configs.values())
    print(f"best objective {result.best_objective:.4f} after "
          f"{len(result.trials)} trials -> {out}")
    return 0


def _add_serve(sub):
    p = sub.add_parser("serve", help="run the experiment task server")
    p.add_argument("--configs", type=Path, required=True)
    p.add_argument("--port", type=int,
                   default=int(os.environ.get("GRIDCREDIT_PORT", "8000")))
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--data", type=Path,
                   default=Path(os.environ.get("GRIDCREDIT_DATA", "task-data")))
    p.add_argument("--shuffle", action="store_true",
                   help="randomize config assignment instead of round-robin")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ui", type=Path, default=None,
                   help="directory of static UI files to serve at /")
    p.set_defaults(func=cmd_serve)


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    configs = load_config_dir(args.configs)
    app = create_app(configs, args.data, shuffle=args.shuffle, seed=args.seed,
                     ui_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def _add_validate(sub):
    p = sub.add_parser("validate", help="validate every config in a directory")
    p.add_argument("configs", type=Path)
    p.set_defaults(func=cmd_validate)


def cmd_validate(args) -> int:
    configs = load_config_dir(args.configs)
    if not configs:
        print("no configs found", file=sys.stderr)
        return 2
    bad = 0
    for config_id in sorted(configs):
        problems = validate(configs[config_id])
        if problems:
            bad += 1
            for problem in problems:
                print(f"{config_id}: {problem}")
    print(f"{len(configs) - bad}/{len(configs)} configs valid")
    return 0 if bad == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gridcredit",
        description="credit-assignment gridworld toolkit",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    _add_gridgen(sub)
    _add_run(sub)
    _add_metrics(sub)
    _add_search(sub)
    _add_serve(sub)
    _add_validate(sub)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
