"""Command-line pipeline runner.

Subcommands: build, select, sweep, evaluate, render, export. Exit codes:
0 success, 2 input or validation problem, 3 numerical failure. Outputs are
deterministic for fixed inputs, config, and seed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io as cio
from .config import PipelineConfig
from .evaluation import missingness_sweep, regression_report
from .model import ScoreTable, validate_score_table
from .pipeline import build_pruned_network, initialize, run_selection
from .render import render_network
from .selector import cobalt_select

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3


def _load_config(args: argparse.Namespace) -> PipelineConfig:
    config = (
        PipelineConfig.from_json(args.config) if args.config else PipelineConfig()
    )
    if args.seed is not None:
        config = config.with_seed(args.seed)
    return config


def _load_table(path: str) -> ScoreTable:
    table = cio.read_score_table(path)
    violations = validate_score_table(table)
    if violations:
        raise cio.InputFormatError(
            "score table is invalid:\n" + "\n".join(f"  - {v}" for v in violations)
        )
    return table


def _out_dir(args: argparse.Namespace) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _pruning_meta(config: PipelineConfig) -> dict:
    return {
        "alpha": config.pruning.alpha,
        "quantization": config.pruning.quantization,
        "degree_definition": "quantized_strength",
    }


def cmd_build(args: argparse.Namespace) -> int:
    config = _load_config(args)
    table = _load_table(args.scores)
    network = build_pruned_network(table, config)
    out = _out_dir(args)
    cio.dump_json(
        cio.network_to_dict(network, _pruning_meta(config)), out / "network.json"
    )
    print(f"wrote {out / 'network.json'}")
    return EXIT_OK


def cmd_select(args: argparse.Namespace) -> int:
    config = _load_config(args)
    source = Path(args.scores)
    if source.suffix == ".json":
        # a pruned network artifact carries everything selection needs
        with open(source, "r", encoding="utf-8") as fh:
            pruned = cio.network_from_dict(json.load(fh))
        init = initialize(pruned, config)
        trace = cobalt_select(
            pruned, init, config.leiden, stopping=config.selector.stopping
        )
    else:
        table = _load_table(args.scores)
        trace = run_selection(table, config)
    out = _out_dir(args)

    meta = dict(config.to_dict())
    meta["pruning"] = _pruning_meta(config)
    cio.dump_json(cio.trace_to_dict(trace, meta), out / "trace.json")
    for record in trace.records:
        payload = cio.partition_to_dict(
            record.partition,
            {"iteration": record.index, "layers": list(record.layers)},
        )
        cio.dump_json(payload, out / f"partition_iter{record.index:02d}.json")
    print(f"wrote {out / 'trace.json'} and {len(trace.records)} partition files")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    config = _load_config(args)
    table = _load_table(args.scores)
    if not table.is_complete():
        raise cio.InputFormatError("sweep requires a complete table (no missing cells)")
    report = missingness_sweep(table, config)
    out = _out_dir(args)
    cio.dump_json(cio.sweep_report_to_dict(report), out / "sweep.json")
    print(f"wrote {out / 'sweep.json'}")
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    config = _load_config(args)
    table = _load_table(args.scores)
    covariates = cio.read_covariates(args.covariates)
    targets = cio.read_targets(args.targets)
    if args.trace:
        with open(args.trace, "r", encoding="utf-8") as fh:
            trace = cio.trace_from_dict(json.load(fh))
    else:
        trace = run_selection(table, config)
    for layer in table.layers:
        if layer not in targets.layers:
            print(f"warning: no targets for layer {layer!r}; skipped", file=sys.stderr)
    report = regression_report(covariates, table, targets, trace, config)
    out = _out_dir(args)
    cio.dump_json(cio.regression_report_to_dict(report), out / "regression.json")
    cio.regression_report_to_csv(report, out / "regression.csv")
    print(f"wrote {out / 'regression.json'} and {out / 'regression.csv'}")
    return EXIT_OK


def cmd_render(args: argparse.Namespace) -> int:
    with open(args.network, "r", encoding="utf-8") as fh:
        network = cio.network_from_dict(json.load(fh))
    with open(args.partition, "r", encoding="utf-8") as fh:
        partition = cio.partition_from_dict(json.load(fh))
    out = _out_dir(args)
    seed = args.seed if args.seed is not None else 0
    written = render_network(network, partition, out, seed=seed)
    print(f"wrote {len(written)} SVG files to {out}")
    return EXIT_OK


def cmd_export(args: argparse.Namespace) -> int:
    with open(args.network, "r", encoding="utf-8") as fh:
        network = cio.network_from_dict(json.load(fh))
    partition = None
    if args.partition:
        with open(args.partition, "r", encoding="utf-8") as fh:
            partition = cio.partition_from_dict(json.load(fh))
    out = _out_dir(args)
    cio.export_graphml(network, partition, out / "network.graphml")
    print(f"wrote {out / 'network.graphml'}")
    return EXIT_OK


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cobalt",
        description="Cost-based layer selection and community detection",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="pipeline config JSON")
        p.add_argument("--seed", type=int, help="override every configured seed")
        p.add_argument("--out-dir", default="out", help="output directory")

    p = sub.add_parser("build", help="build and prune the full network")
    p.add_argument("scores", help="score CSV")
    common(p)
    p.set_defaults(run=cmd_build)

    p = sub.add_parser("select", help="run iterative layer selection")
    p.add_argument("scores", help="score CSV, or a pruned network artifact JSON")
    common(p)
    p.set_defaults(run=cmd_select)

    p = sub.add_parser("sweep", help="missingness robustness sweep")
    p.add_argument("scores", help="complete score CSV")
    common(p)
    p.set_defaults(run=cmd_sweep)

    p = sub.add_parser("evaluate", help="baseline vs community regression")
    p.add_argument("scores", help="pre-treatment score CSV")
    p.add_argument("covariates", help="covariates CSV (entity,age,gender)")
    p.add_argument("targets", help="post-treatment targets CSV")
    p.add_argument("--trace", help="trace JSON from a previous select run")
    common(p)
    p.set_defaults(run=cmd_evaluate)

    p = sub.add_parser("render", help="community-colored SVG per layer")
    p.add_argument("network", help="network artifact JSON")
    p.add_argument("partition", help="partition artifact JSON")
    common(p)
    p.set_defaults(run=cmd_render)

    p = sub.add_parser("export", help="export network to GraphML")
    p.add_argument("network", help="network artifact JSON")
    p.add_argument("--partition", help="partition artifact JSON")
    common(p)
    p.set_defaults(run=cmd_export)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.run(args)
    except (cio.InputFormatError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ArithmeticError, OverflowError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
