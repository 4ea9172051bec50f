"""Command-line front end.

Verbs: validate a scenario file, run one scenario, sweep one lever over
several values and seeds, and compare two finished runs.  Output files
are written deterministically (sorted JSON keys, fixed CSV formatting,
no timestamps inside files), so identical runs produce byte-identical
files; only the auto-generated directory name carries a timestamp.

Exit codes: 0 success, 2 invalid config or usage, 3 runtime failure.
Set HSS_LOG=DEBUG|INFO|WARNING|ERROR to control logging.
"""

from __future__ import annotations

import argparse
import copy
import datetime as dt
import json
import logging
import os
import statistics
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Iterable, Optional

from . import engine
from .burden import dalys_averted
from .config import ConfigError, load_scenario, validate_raw

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

SWEEP_LEVERS = ("mode", "absence_rate", "staff_scale", "consumable_scale")


def _setup_logging() -> None:
    level = os.environ.get("HSS_LOG", "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(asctime)s %(levelname)s %(name)s %(message)s",
    )


def _format_cell(value: Any) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, rows: Iterable[tuple]) -> None:
    text = "\n".join(",".join(_format_cell(v) for v in row) for row in rows)
    path.write_text(text + "\n", encoding="utf-8", newline="")


def _write_json(path: Path, obj: Any) -> None:
    path.write_text(
        json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=True) + "\n",
        encoding="utf-8",
        newline="",
    )


def _load_doc(path: str) -> Any:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _prepare_out_dir(explicit: Optional[str], name: str, seed: int, mode: int) -> Path:
    if explicit is not None:
        out = Path(explicit)
    else:
        stamp = dt.datetime.now().strftime("%Y%m%dT%H%M%S")
        out = Path("runs") / f"{name}-s{seed}-m{mode}-{stamp}"
    if out.exists() and any(out.iterdir()):
        raise FileExistsError(f"output directory {out} is not empty")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_run_outputs(out: Path, doc: Any, seed: int, result: engine.RunResult) -> None:
    _write_json(out / "config.resolved.json", {"config": doc, "master_seed": seed})
    _write_json(out / "summary.json", result.summary_dict())
    _write_csv(out / "dalys.csv", result.daly_rows())
    _write_csv(out / "delivery.csv", result.delivery_rows())
    _write_csv(out / "utilization.csv", result.utilization_rows())


def _cmd_validate(args: argparse.Namespace) -> int:
    doc = _load_doc(args.config)
    errors = validate_raw(doc)
    if errors:
        for err in errors:
            print(f"error: {err}", file=sys.stderr)
        print(f"invalid: {len(errors)} problem(s)")
        return EXIT_CONFIG
    config = load_scenario(doc)
    print(f"ok: {config.name} ({config.config_fingerprint[:12]})")
    return EXIT_OK


def _cmd_run(args: argparse.Namespace) -> int:
    doc = _load_doc(args.config)
    config = load_scenario(doc)
    out = _prepare_out_dir(args.out, config.name, args.seed, config.mode)
    logger.info("running %s seed=%d mode=%d", config.name, args.seed, config.mode)
    result = engine.run(config, args.seed)
    _write_run_outputs(out, doc, args.seed, result)
    print(f"{out}")
    print(
        f"dalys={result.total_dalys():.3f} delivered={result.delivered_total} "
        f"alive={result.final_alive} ({result.wall_seconds:.1f}s)"
    )
    return EXIT_OK


def apply_lever(doc: Any, lever: str, value: float) -> Any:
    """New config document with one scenario lever moved."""
    out = copy.deepcopy(doc)
    if lever == "mode":
        out["mode"] = int(value)
    elif lever == "absence_rate":
        for fac in out.get("facilities", []):
            fac["absence_rate"] = value
    elif lever == "staff_scale":
        for fac in out.get("facilities", []):
            fac["staff_count"] = {
                cadre: int(round(count * value))
                for cadre, count in fac.get("staff_count", {}).items()
            }
    elif lever == "consumable_scale":
        for fac in out.get("facilities", []):
            fac["consumable_availability"] = {
                item: min(1.0, p * value)
                for item, p in fac.get("consumable_availability", {}).items()
            }
    else:
        raise ValueError(f"unknown lever {lever!r}")
    return out


def _sweep_cell(payload: tuple[Any, int]) -> dict:
    doc, seed = payload
    result = engine.run(load_scenario(doc), seed)
    return result.summary_dict()


def _parse_values(lever: str, text: str) -> list[float]:
    values = [float(v) for v in text.split(",") if v.strip() != ""]
    if not values:
        raise ValueError("no lever values given")
    if lever == "mode" and any(v not in (0.0, 1.0, 2.0) for v in values):
        raise ValueError("mode values must be 0, 1 or 2")
    return values


def _cmd_sweep(args: argparse.Namespace) -> int:
    doc = _load_doc(args.config)
    values = _parse_values(args.lever, args.values)
    seeds = list(range(args.seed_base, args.seed_base + args.seeds))
    cells = [(value, seed) for value in values for seed in seeds]
    docs = {value: apply_lever(doc, args.lever, value) for value in values}
    for value in values:
        errors = validate_raw(docs[value])
        if errors:
            for err in errors:
                print(f"error ({args.lever}={value}): {err}", file=sys.stderr)
            return EXIT_CONFIG

    base_config = load_scenario(docs[values[0]])
    out = _prepare_out_dir(args.out, f"{base_config.name}-sweep-{args.lever}", args.seed_base, base_config.mode)
    payloads = [(docs[value], seed) for value, seed in cells]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            summaries = list(pool.map(_sweep_cell, payloads))
    else:
        summaries = [_sweep_cell(p) for p in payloads]
    by_cell = {cell: summary for cell, summary in zip(cells, summaries)}

    cell_rows: list[tuple] = [
        ("lever", "value", "seed", "dalys", "yld", "yll", "delivered", "expired", "final_alive")
    ]
    for value, seed in cells:
        t = by_cell[(value, seed)]["totals"]
        cell_rows.append(
            (args.lever, value, seed, t["dalys"], t["yld"], t["yll"],
             t["delivered"], t["expired"], t["final_alive"])
        )

    agg_rows: list[tuple] = [
        ("lever", "value", "n_seeds", "mean_dalys", "sd_dalys",
         "mean_averted_vs_first", "sd_averted_vs_first", "mean_delivered")
    ]
    aggregate: list[dict] = []
    baseline = {seed: by_cell[(values[0], seed)]["totals"]["dalys"] for seed in seeds}
    for value in values:
        dalys = [by_cell[(value, seed)]["totals"]["dalys"] for seed in seeds]
        averted = [baseline[seed] - d for seed, d in zip(seeds, dalys)]
        delivered = [by_cell[(value, seed)]["totals"]["delivered"] for seed in seeds]
        sd_d = statistics.stdev(dalys) if len(seeds) > 1 else 0.0
        sd_a = statistics.stdev(averted) if len(seeds) > 1 else 0.0
        entry = {
            "value": value,
            "n_seeds": len(seeds),
            "mean_dalys": statistics.fmean(dalys),
            "sd_dalys": sd_d,
            "mean_averted_vs_first": statistics.fmean(averted),
            "sd_averted_vs_first": sd_a,
            "mean_delivered": statistics.fmean(delivered),
        }
        aggregate.append(entry)
        agg_rows.append(
            (args.lever, value, len(seeds), entry["mean_dalys"], sd_d,
             entry["mean_averted_vs_first"], sd_a, entry["mean_delivered"])
        )

    _write_json(out / "sweep.json", {
        "lever": args.lever,
        "values": values,
        "seeds": seeds,
        "base_config_fingerprint": base_config.config_fingerprint,
        "aggregate": aggregate,
    })
    _write_json(out / "config.resolved.json", {"config": doc, "lever": args.lever, "values": values, "seeds": seeds})
    _write_csv(out / "cells.csv", cell_rows)
    _write_csv(out / "aggregate.csv", agg_rows)
    print(f"{out}")
    for entry in aggregate:
        print(
            f"{args.lever}={entry['value']}: mean_dalys={entry['mean_dalys']:.3f} "
            f"averted_vs_first={entry['mean_averted_vs_first']:.3f}"
        )
    return EXIT_OK


def _cmd_compare(args: argparse.Namespace) -> int:
    results = []
    for run_dir in (args.baseline, args.comparator):
        summary_path = Path(run_dir) / "summary.json"
        if not summary_path.exists():
            print(f"error: no summary.json under {run_dir}", file=sys.stderr)
            return EXIT_CONFIG
        results.append(engine.RunResult.from_summary(_load_doc(str(summary_path))))
    baseline, comparator = results
    try:
        report = dalys_averted(baseline, comparator)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"baseline dalys:   {report.baseline_total:.3f} (mode {baseline.mode})")
    print(f"comparator dalys: {report.comparator_total:.3f} (mode {comparator.mode})")
    print(f"averted:          {report.total_averted:.3f} ({report.percent_of_baseline:.2f}% of baseline)")
    for cause, value in sorted(report.by_cause.items()):
        print(f"  {cause}: {value:.3f}")
    if args.json:
        _write_json(Path(args.json), {
            "baseline_total": report.baseline_total,
            "comparator_total": report.comparator_total,
            "total_averted": report.total_averted,
            "percent_of_baseline": report.percent_of_baseline,
            "by_cause": dict(sorted(report.by_cause.items())),
        })
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hssim",
        description="Individual-based health system capacity simulator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="check a scenario file")
    p_validate.add_argument("config")

    p_run = sub.add_parser("run", help="run one scenario")
    p_run.add_argument("config")
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--out", default=None, help="output directory (must be empty)")

    p_sweep = sub.add_parser("sweep", help="run one lever over several values and seeds")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--lever", choices=SWEEP_LEVERS, required=True)
    p_sweep.add_argument("--values", required=True, help="comma-separated lever values")
    p_sweep.add_argument("--seeds", type=int, default=1, help="number of seeds")
    p_sweep.add_argument("--seed-base", type=int, default=0)
    p_sweep.add_argument("--jobs", type=int, default=1)
    p_sweep.add_argument("--out", default=None)

    p_compare = sub.add_parser("compare", help="burden averted between two finished runs")
    p_compare.add_argument("baseline")
    p_compare.add_argument("comparator")
    p_compare.add_argument("--json", default=None, help="also write the report as JSON")

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "validate": _cmd_validate,
        "run": _cmd_run,
        "sweep": _cmd_sweep,
        "compare": _cmd_compare,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        for err in exc.errors:
            print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (FileNotFoundError, FileExistsError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # pragma: no cover - defensive
        logger.exception("run failed")
        print(f"failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
