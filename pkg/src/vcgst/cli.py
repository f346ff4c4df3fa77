"""Command-line entry point.

Subcommands: run, generate, ingest, train, predict, evaluate, report,
audit-leakage, sweep. Global flags: --config PATH, --seed N, --out DIR,
--set key=value (repeatable), --periods A..B.

Exit codes: 0 success, 2 configuration error, 3 data error,
4 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import config as cfgmod
from . import pipeline
from .errors import ConfigError, DataError, NumericError
from .evaluation import DEFAULT_KS, report_from_exports
from .graph import save_event_log
from .synthgen import generate

log = logging.getLogger("vcgst")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vcgst",
        description="incremental graph self-attention pipeline for "
                    "start-up success prediction")
    parser.add_argument("--config", metavar="PATH",
                        help="JSON config file (defaults apply without it)")
    parser.add_argument("--seed", type=int, metavar="N",
                        help="override the run seed")
    parser.add_argument("--out", metavar="DIR",
                        help="output directory for artifacts")
    parser.add_argument("--set", action="append", metavar="KEY=VALUE",
                        dest="overrides", default=[],
                        help="override a dotted config key (repeatable)")
    parser.add_argument("--periods", metavar="A..B",
                        help="restrict predict / audit-leakage to test "
                             "months A..B")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", help="full pipeline: data, train, predict, "
                               "evaluate")
    sub.add_parser("generate", help="write a synthetic dataset to OUT/data")
    sub.add_parser("ingest", help="validate input tables and save the "
                                  "canonical event log")
    sub.add_parser("train", help="incremental embeddings + classifier")
    sub.add_parser("predict", help="rank test cohorts from checkpoints")
    sub.add_parser("evaluate", help="exports + report from predictions")
    sub.add_parser("report", help="regenerate the report from exports")
    sub.add_parser("audit-leakage",
                   help="retrain under truncation and byte-compare "
                        "test-month predictions")
    sweep = sub.add_parser("sweep", help="AP@K table across one "
                                         "hyperparameter")
    sweep.add_argument("--parameter", required=True,
                       choices=sorted(pipeline.SWEEP_BOUNDS))
    sweep.add_argument("--values", required=True,
                       help="comma-separated values, e.g. 1,2,3")
    return parser


def _parse_periods(text):
    if text is None:
        return None
    try:
        lo, hi = text.split("..")
        return (int(lo), int(hi))
    except ValueError as exc:
        raise ConfigError(f"--periods expects A..B, got {text!r}") from exc


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = cfgmod.load_config(args.config, args.overrides, args.seed,
                                 args.out)
        periods = _parse_periods(args.periods)
        return _dispatch(args, cfg, periods)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return 2
    except DataError as exc:
        log.error("data error: %s", exc)
        return 3
    except NumericError as exc:
        log.error("numeric failure: %s", exc)
        return 4


def _dispatch(args, cfg: dict, periods) -> int:
    out_dir = Path(cfg["out"])
    out_dir.mkdir(parents=True, exist_ok=True)
    command = args.command
    if command == "run":
        artifacts = pipeline.run_pipeline(cfg)
        print(artifacts["report"])
        return 0
    if command == "generate":
        target = out_dir / "data"
        generate(cfgmod.gen_config(cfg)).write(target)
        cfgmod.save_effective(cfg, out_dir)
        cfgmod.write_manifest(out_dir, cfg)
        print(target)
        return 0
    if command == "ingest":
        pd = pipeline.prepare_data(cfg, out_dir)
        save_event_log(out_dir / "events.tsv", pd.dataset.events)
        stats = pd.graph.structural_stats(int(cfg["data"]["last_period"]))
        summary = {"nodes": len(pd.graph.node_kind),
                   "edges": len(pd.graph.edges),
                   "lcc_fraction": stats.lcc_fraction,
                   "train": len(pd.splits.train),
                   "validation": len(pd.splits.validation),
                   "test": len(pd.splits.test)}
        (out_dir / "ingest_summary.json").write_text(
            json.dumps(summary, indent=2, sort_keys=True) + "\n",
            encoding="utf-8")
        cfgmod.write_manifest(out_dir, cfg)
        print(json.dumps(summary, sort_keys=True))
        return 0
    if command == "train":
        cfgmod.save_effective(cfg, out_dir)
        pd = pipeline.prepare_data(cfg, out_dir)
        pipeline.train_stage(cfg, pd, out_dir)
        cfgmod.write_manifest(out_dir, cfg)
        print(out_dir / "model.npz")
        return 0
    if command == "predict":
        pd = pipeline.prepare_data(cfg, out_dir)
        state = pipeline.load_state(cfg, out_dir)
        pipeline.predict_stage(cfg, pd, state, out_dir, periods=periods)
        cfgmod.write_manifest(out_dir, cfg)
        print(out_dir / "predictions.tsv")
        return 0
    if command == "evaluate":
        pd = pipeline.prepare_data(cfg, out_dir)
        report_path = pipeline.evaluate_stage(cfg, pd, out_dir)
        cfgmod.write_manifest(out_dir, cfg)
        print(report_path)
        return 0
    if command == "report":
        for name in ("predictions.tsv", "labels.tsv", "people.tsv"):
            if not (out_dir / name).is_file():
                raise DataError(f"{out_dir / name} missing; run evaluate")
        report = report_from_exports(out_dir / "predictions.tsv",
                                     out_dir / "labels.tsv",
                                     out_dir / "people.tsv", ks=DEFAULT_KS)
        (out_dir / "report.json").write_text(report.to_json() + "\n",
                                             encoding="utf-8")
        (out_dir / "report.txt").write_text(report.render_text(),
                                            encoding="utf-8")
        print(out_dir / "report.json")
        return 0
    if command == "audit-leakage":
        ok, rows = pipeline.audit_leakage(cfg, periods=periods)
        (out_dir / "leakage_audit.json").write_text(
            json.dumps({"identical": ok, "months": rows}, indent=2,
                       sort_keys=True) + "\n", encoding="utf-8")
        for row in rows:
            print(f"month {row['month']}: "
                  f"{'identical' if row['identical'] else 'MISMATCH'} "
                  f"({row['cohort']} candidates)")
        print("leakage audit:", "PASS" if ok else "FAIL")
        return 0 if ok else 3
    if command == "sweep":
        values = []
        for token in args.values.split(","):
            token = token.strip()
            values.append(float(token) if "." in token else int(token))
        rows = pipeline.run_sweep(cfg, args.parameter, values)
        for row in rows:
            print(row)
        return 0 if all("error" not in row for row in rows) else 3
    raise ConfigError(f"unknown command {command!r}")


if __name__ == "__main__":
    sys.exit(main())
