"""Command-line front end.

    uq reproduce <table_id> [--mc N --seed S] [--out PATH]
    uq run <config.json> [--out DIR]
    uq density <table_id> --samples N --seed S [--grid-size G] [--out PATH]

Exit codes: 0 success, 2 validation error, 3 numerical failure.  The env
var UQ_THREADS caps model-evaluation parallelism (default: hardware count).
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, pce, studies
from .errors import NumericalError, ValidationError
from .results import ResultTable, render_csv, render_curves_csv, write_csv

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uq",
        description="Polynomial-chaos uncertainty propagation for queueing models",
    )
    parser.add_argument("--version", action="version", version=f"uq {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    rep = sub.add_parser("reproduce", help="compute a built-in result table")
    rep.add_argument("table_id", help=f"one of: {', '.join(studies.TABLE_IDS)}")
    rep.add_argument("--mc", type=int, metavar="N", default=None,
                     help="add Monte-Carlo columns with N samples")
    rep.add_argument("--seed", type=int, default=None, help="Monte-Carlo seed")
    rep.add_argument("--out", type=Path, default=None, help="output CSV path")

    run = sub.add_parser("run", help="run a study described by a JSON config")
    run.add_argument("config", type=Path, help="study config (uq-study/1 schema)")
    run.add_argument("--out", type=Path, default=Path("."), help="output directory")

    den = sub.add_parser("density", help="Monte-Carlo output density curves")
    den.add_argument("table_id", help=f"one of: {', '.join(studies.DENSITY_TABLE_IDS)}")
    den.add_argument("--samples", type=int, required=True, help="sample count")
    den.add_argument("--seed", type=int, required=True, help="sampling seed")
    den.add_argument("--grid-size", type=int, default=256, help="curve grid size")
    den.add_argument("--out", type=Path, default=None, help="output CSV path")
    return parser


def _cmd_reproduce(args) -> int:
    if args.table_id in studies.DENSITY_TABLE_IDS:
        if args.mc is None or args.seed is None:
            raise ValidationError(
                f"{args.table_id} is sampled: pass --mc N --seed S (or use `uq density`)"
            )
        return _write_density(args.table_id, args.mc, args.seed, 256, args.out)
    table = studies.build_table(args.table_id, mc_samples=args.mc, mc_seed=args.seed)
    out = args.out or Path(f"{args.table_id}.csv")
    write_csv(table, out)
    print(f"wrote {out} ({len(table.row_labels)} outputs x {len(table.col_labels)} statistics)")
    return EXIT_OK


def _write_density(table_id, samples, seed, grid_size, out_path) -> int:
    labels, curves, meta = studies.build_density(table_id, samples, seed, grid_size)
    out = out_path or Path(f"{table_id}.csv")
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(render_curves_csv(table_id, labels, curves, meta))
    print(f"wrote {out} ({len(labels)} density curves on {grid_size} points)")
    return EXIT_OK


def _cmd_run(args) -> int:
    try:
        doc = json.loads(args.config.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ValidationError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config is not valid JSON: {exc}") from exc
    config = studies.parse_config(doc)
    result = studies.run_study(config)
    out_dir = args.out
    out_dir.mkdir(parents=True, exist_ok=True)

    moments = result.moments
    columns = [("mean", moments.mean), ("variance", moments.variance),
               ("skewness", moments.skewness), ("kurtosis", moments.kurtosis)]
    meta = {"model": config.model, "p": str(config.degree),
            "n_g": str(config.quad_points), "version": __version__}
    if result.mc_moments is not None:
        mc = result.mc_moments
        columns += [("mc_mean", mc.mean), ("mc_variance", mc.variance),
                    ("mc_skewness", mc.skewness), ("mc_kurtosis", mc.kurtosis)]
        meta.update({"mc_samples": str(config.mc_samples), "seed": str(config.mc_seed)})
    table = ResultTable(
        name="study-moments", row_labels=moments.labels,
        col_labels=tuple(label for label, _ in columns),
        values=np.column_stack([v for _, v in columns]), metadata=meta,
    )
    write_csv(table, out_dir / "results.csv")

    if result.sobol is not None:
        report = result.sobol
        col_labels = []
        values = np.empty((len(report.labels), len(report.subsets) + len(report.input_names)))
        for j, subset in enumerate(report.subsets):
            col_labels.append("S_" + "_".join(report.input_names[i] for i in subset))
            values[:, j] = report.indices[:, j]
        for k, name in enumerate(report.input_names):
            col_labels.append(f"ST_{name}")
            values[:, len(report.subsets) + k] = report.totals[:, k]
        sobol_table = ResultTable(name="study-sobol", row_labels=report.labels,
                                  col_labels=tuple(col_labels), values=values,
                                  metadata=meta)
        write_csv(sobol_table, out_dir / "sobol.csv")
    else:
        print("constant surrogate (degree 0): Sobol' indices not defined, skipped")

    (out_dir / "surrogate.json").write_text(
        pce.surrogate_to_json(result.surrogate), encoding="utf-8"
    )
    run_meta = {"config": studies.config_to_doc(config), "version": __version__,
                "outputs": list(moments.labels)}
    (out_dir / "run.json").write_text(json.dumps(run_meta, indent=2), encoding="utf-8")
    written = ["results.csv", "surrogate.json", "run.json"]
    if result.sobol is not None:
        written.insert(1, "sobol.csv")
    print(f"wrote {', '.join(written)} to {out_dir}")
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "reproduce":
            return _cmd_reproduce(args)
        if args.command == "run":
            return _cmd_run(args)
        return _write_density(args.table_id, args.samples, args.seed,
                              args.grid_size, args.out)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
