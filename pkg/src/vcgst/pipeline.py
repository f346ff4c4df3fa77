"""End-to-end orchestration: data, per-period training, prediction,
evaluation, sweeps, and the temporal-leakage audit.

Every stage is deterministic under (config, seed); rerunning a stage
overwrites its artifacts with byte-identical content.
"""

from __future__ import annotations

import copy
import datetime as _dt
import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .attributes import AttributeScaler, load_scaler, save_scaler
from .checkpoint import load_tensors, save_tensors
from .embeddings import EmbeddingTable
from .errors import ConfigError, DataError
from .evaluation import (DEFAULT_KS, Splits, degree_heuristic_scores,
                         make_splits, report_from_exports,
                         write_labels, write_people, write_predictions)
from .graph import TemporalBipartiteGraph, build_temporal_graph
from .gst import GstStack, export_attention_records
from .ingest import Dataset, load_dataset, _assemble
from .predictor import (ClassifierConfig, PredictorModel, predict_cohort,
                        train_classifier)
from .records import StartUpRecord
from .synthgen import generate
from .timeutil import parse_date, period_to_date
from .trainer import (DecoderParams, TrainConfig, run_all_periods,
                      write_loss_trace)

log = logging.getLogger("vcgst")


@dataclass
class PipelineData:
    dataset: Dataset
    graph: TemporalBipartiteGraph
    splits: Splits
    supervision_horizon: _dt.date
    window_months: int
    epoch: _dt.date


@dataclass
class TrainedState:
    stack: GstStack
    dec: DecoderParams
    tables: dict[int, EmbeddingTable]
    model: PredictorModel
    scaler: AttributeScaler


def _rng(seed: int, salt: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, salt]))


def prepare_data(cfg: dict, out_dir=None,
                 dataset: Dataset | None = None) -> PipelineData:
    """Generate or ingest, build the temporal graph, and cut the splits."""
    data = cfg["data"]
    epoch = parse_date(data["epoch"])
    if dataset is None:
        if data["source"] == "synthetic":
            target = Path(out_dir or cfg["out"]) / "data"
            generate(cfgmod.gen_config(cfg)).write(target)
            dataset = load_dataset(target, epoch=epoch)
        else:
            dataset = load_dataset(data["dir"], epoch=epoch,
                                   column_map=data.get("column_map") or None,
                                   filenames=data.get("filenames") or None)
    graph = build_temporal_graph(dataset.events,
                                 int(data["cutoff_period"]),
                                 int(data["last_period"]))
    spec = cfgmod.split_spec(cfg)
    window = int(cfg["model"]["label_window_months"])
    sup_horizon = spec.test_range[0] - _dt.timedelta(days=1)
    splits = make_splits(graph, dataset.startups, spec, epoch,
                         window_months=window,
                         supervision_horizon=sup_horizon)
    return PipelineData(dataset=dataset, graph=graph, splits=splits,
                        supervision_horizon=sup_horizon,
                        window_months=window, epoch=epoch)


def train_stage(cfg: dict, pd: PipelineData,
                out_dir=None) -> TrainedState:
    """Per-period incremental training followed by classifier training."""
    model_cfg = cfg["model"]
    seed = int(cfg["seed"])
    d = int(model_cfg["d"])
    heads = int(model_cfg["heads"])
    layers = int(model_cfg["gst_layers"])
    stack = GstStack.init(_rng(seed, 11), layers, d, heads, prefix="gst1",
                          scale_full_width=bool(model_cfg["scale_full_d"]))
    dec = DecoderParams.init(_rng(seed, 12), d)
    tcfg = TrainConfig(beta=float(model_cfg["beta"]),
                       epochs=int(model_cfg["epochs"]),
                       negative_ratio=int(model_cfg["negative_ratio"]),
                       seed=seed, n_hops=layers,
                       lr=float(model_cfg["lr"]),
                       lp_use_current=bool(model_cfg["lp_use_current"]))

    def progress(period, rows):
        if rows:
            log.info("period %d: %d epochs, loss %.4f -> %.4f", period,
                     len(rows), rows[0].total, rows[-1].total)

    tables, trace = run_all_periods(pd.graph, stack, dec, tcfg,
                                    progress=progress)

    train_records = [pd.dataset.startups[s] for s, _, _ in pd.splits.train]
    scaler = AttributeScaler.fit(train_records)
    model = PredictorModel(d=d, d_seq=int(model_cfg["d_seq"]), heads=heads,
                           layers=layers,
                           hidden=tuple(model_cfg["mlp_hidden"]),
                           rng=_rng(seed, 13))
    ccfg = ClassifierConfig(lr=float(model_cfg["classifier_lr"]),
                            epochs=int(model_cfg["classifier_epochs"]),
                            patience=int(model_cfg["patience"]),
                            lookback=int(model_cfg["lookback"]), seed=seed,
                            freeze_sequence=bool(
                                model_cfg["freeze_sequence"]))
    history = train_classifier(
        model, pd.graph, tables, pd.dataset.startups, pd.dataset.persons,
        scaler, pd.splits.train, ccfg, val_set=pd.splits.validation,
        progress=lambda e, l: log.info("classifier epoch %d loss %.4f",
                                       e, l) if e % 25 == 0 else None)
    log.info("classifier best validation P@%d = %.4f at epoch %d",
             ccfg.rank_k, history.best_val, history.best_epoch)

    state = TrainedState(stack=stack, dec=dec, tables=tables, model=model,
                         scaler=scaler)
    if out_dir is not None:
        out_dir = Path(out_dir)
        for period, table in tables.items():
            table.save(out_dir / "embeddings" / f"period_{period:04d}.npz")
        write_loss_trace(out_dir / "loss_trace.tsv", trace)
        save_tensors(out_dir / "gst1.npz",
                     {**stack.to_tensors(), **dec.to_tensors()},
                     meta={"d": d, "heads": heads, "layers": layers})
        save_tensors(out_dir / "model.npz", model.to_tensors(),
                     meta={"d": d, "d_seq": int(model_cfg["d_seq"]),
                           "heads": heads, "layers": layers,
                           "hidden": list(model_cfg["mlp_hidden"])})
        save_scaler(out_dir / "scaler.json", scaler)
    return state


def load_state(cfg: dict, out_dir) -> TrainedState:
    """Rehydrate a trained run from its checkpoints."""
    out_dir = Path(out_dir)
    for name in ("gst1.npz", "model.npz", "scaler.json"):
        if not (out_dir / name).is_file():
            raise DataError(f"{out_dir / name} missing; run train first")
    model_cfg = cfg["model"]
    d = int(model_cfg["d"])
    heads = int(model_cfg["heads"])
    layers = int(model_cfg["gst_layers"])
    stack = GstStack.zeros(layers, d, heads, prefix="gst1")
    stack.scale_full_width = bool(model_cfg["scale_full_d"])
    dec = DecoderParams.zeros(d)
    tensors, _ = load_tensors(out_dir / "gst1.npz")
    stack.load_tensors(tensors)
    dec.load_tensors(tensors)
    tables = {}
    emb_dir = out_dir / "embeddings"
    if not emb_dir.is_dir():
        raise DataError(f"{emb_dir}: no embedding checkpoints; run train")
    for path in sorted(emb_dir.glob("period_*.npz")):
        table = EmbeddingTable.load(path)
        tables[table.period] = table
    model = PredictorModel(d=d, d_seq=int(model_cfg["d_seq"]), heads=heads,
                           layers=layers,
                           hidden=tuple(model_cfg["mlp_hidden"]),
                           rng=_rng(int(cfg["seed"]), 13))
    tensors, _ = load_tensors(out_dir / "model.npz")
    model.load_tensors(tensors)
    scaler = load_scaler(out_dir / "scaler.json")
    return TrainedState(stack=stack, dec=dec, tables=tables, model=model,
                        scaler=scaler)


def predict_stage(cfg: dict, pd: PipelineData, state: TrainedState,
                  out_dir=None, periods=None):
    """Rank every test month's cohort; returns the flat prediction list."""
    lookback = int(cfg["model"]["lookback"])
    cohorts: dict[int, list[str]] = {}
    for node, period, _ in pd.splits.test:
        cohorts.setdefault(period, []).append(node)
    months = sorted(cohorts)
    if periods is not None:
        months = [m for m in months if periods[0] <= m <= periods[1]]
    predictions = []
    attention = []
    team_degree: dict[str, float] = {}
    for month in months:
        recs, att = predict_cohort(state.model, pd.graph, state.tables,
                                   pd.dataset.startups, pd.dataset.persons,
                                   state.scaler, month, cohorts[month],
                                   lookback, return_attention=True)
        predictions.extend(recs)
        attention.extend(att)
        team_degree.update(degree_heuristic_scores(pd.graph,
                                                   cohorts[month], month))
        log.info("predicted cohort %d: %d candidates", month, len(recs))
    if out_dir is not None:
        out_dir = Path(out_dir)
        write_predictions(out_dir / "predictions.tsv", predictions,
                          team_degree)
        export_attention_records(out_dir / "attention.tsv", attention)
    return predictions, team_degree


def evaluate_stage(cfg: dict, pd: PipelineData, out_dir) -> Path:
    """Write label/people exports and build the report from the files."""
    out_dir = Path(out_dir)
    if not (out_dir / "predictions.tsv").is_file():
        raise DataError(f"{out_dir}/predictions.tsv missing; run predict")
    final_period = int(cfg["data"]["last_period"])
    write_labels(out_dir / "labels.tsv", pd.splits.test,
                 pd.dataset.startups, pd.graph, final_period)
    write_people(out_dir / "people.tsv", pd.graph, pd.dataset.persons,
                 pd.splits.test, final_period)
    report = report_from_exports(out_dir / "predictions.tsv",
                                 out_dir / "labels.tsv",
                                 out_dir / "people.tsv", ks=DEFAULT_KS)
    (out_dir / "report.json").write_text(report.to_json() + "\n",
                                         encoding="utf-8")
    (out_dir / "report.txt").write_text(report.render_text(),
                                        encoding="utf-8")
    log.info("AP@K: %s", {k: round(v, 4) for k, v in report.ap_at_k.items()})
    return out_dir / "report.json"


def run_pipeline(cfg: dict, dataset: Dataset | None = None) -> dict:
    """generate/ingest -> train -> predict -> evaluate -> manifest."""
    out_dir = Path(cfg["out"])
    out_dir.mkdir(parents=True, exist_ok=True)
    cfgmod.save_effective(cfg, out_dir)
    pd = prepare_data(cfg, out_dir, dataset=dataset)
    state = train_stage(cfg, pd, out_dir)
    predict_stage(cfg, pd, state, out_dir)
    evaluate_stage(cfg, pd, out_dir)
    cfgmod.write_manifest(out_dir, cfg)
    return {"out": out_dir, "report": out_dir / "report.json",
            "predictions": out_dir / "predictions.tsv"}


# -- leakage audit ---------------------------------------------------------------------

def truncate_dataset(ds: Dataset, cutoff: _dt.date) -> Dataset:
    """Drop every datum dated after `cutoff`: later-founded start-ups,
    later employments and deals, and outcomes observed later."""
    startups = {}
    for node, rec in ds.startups.items():
        if rec.founded > cutoff:
            continue
        keep_outcome = rec.outcome_date is not None \
            and rec.outcome_date <= cutoff
        startups[node] = StartUpRecord(
            node=rec.node, founded=rec.founded, industry=rec.industry,
            latitude=rec.latitude, longitude=rec.longitude,
            outcome_type=rec.outcome_type if keep_outcome else None,
            outcome_date=rec.outcome_date if keep_outcome else None)
    employments = [(p, c, dte) for p, c, dte in ds.employments
                   if dte <= cutoff and c in startups]
    deals = [row for row in ds.deals
             if row[3] <= cutoff and row[5] in startups]
    out = Dataset(epoch=ds.epoch, startups=startups,
                  persons=dict(ds.persons))
    return _assemble(out, employments, deals)


def audit_leakage(cfg: dict, periods=None) -> tuple[bool, list[dict]]:
    """Prove test-month predictions use only data dated <= that month.

    For each test month: truncate the dataset to the end of that month,
    retrain the entire pipeline under the same seed, re-predict the
    month's cohort, and byte-compare against the full run's rows.
    """
    pd_full = prepare_data(cfg, out_dir=cfg["out"])
    state_full = train_stage(cfg, pd_full)
    full_predictions, full_degrees = predict_stage(cfg, pd_full, state_full)
    full_rows = _prediction_rows_by_month(full_predictions, full_degrees)

    cohort_months = sorted({p for _, p, _ in pd_full.splits.test})
    if periods is not None:
        cohort_months = [m for m in cohort_months
                         if periods[0] <= m <= periods[1]]
    results = []
    ok = True
    for month in cohort_months:
        cutoff = period_to_date(month + 1, pd_full.epoch) \
            - _dt.timedelta(days=1)
        truncated = truncate_dataset(pd_full.dataset, cutoff)
        cfg_t = copy.deepcopy(cfg)
        cfg_t["data"]["last_period"] = min(
            int(cfg["data"]["last_period"]), month)
        pd_t = prepare_data(cfg_t, dataset=truncated)
        state_t = train_stage(cfg_t, pd_t)
        preds_t, degs_t = predict_stage(cfg_t, pd_t, state_t,
                                        periods=(month, month))
        rows_t = _prediction_rows_by_month(preds_t, degs_t).get(month, [])
        same = rows_t == full_rows.get(month, [])
        ok = ok and same
        results.append({"month": month, "identical": same,
                        "cohort": len(rows_t)})
        log.info("audit month %d: %s", month,
                 "identical" if same else "MISMATCH")
    return ok, results


def _prediction_rows_by_month(predictions, degrees) -> dict[int, list[str]]:
    rows: dict[int, list[str]] = {}
    for r in predictions:
        top = r.top_attention_person or ""
        deg = degrees.get(r.startup, 0.0)
        rows.setdefault(r.period, []).append(
            f"{r.startup}\t{r.period}\t{r.probability!r}\t{r.rank}\t"
            f"{top}\t{deg!r}")
    return rows


# -- hyperparameter sweep -----------------------------------------------------------------

SWEEP_BOUNDS = {"gst_layers": (1, 3), "d": (16, 64), "beta": (0.3, 0.7)}


def run_sweep(cfg: dict, parameter: str, values: list) -> list[dict]:
    """One full pipeline per value; partial results survive failed cells."""
    if parameter not in SWEEP_BOUNDS:
        raise ConfigError(f"sweep parameter must be one of "
                          f"{sorted(SWEEP_BOUNDS)}, got {parameter!r}")
    lo, hi = SWEEP_BOUNDS[parameter]
    for value in values:
        if not lo <= value <= hi:
            raise ConfigError(
                f"sweep value {value} outside documented bounds "
                f"[{lo}, {hi}] for {parameter}")
    base_out = Path(cfg["out"])
    rows = []
    for value in values:
        cell = copy.deepcopy(cfg)
        cell["model"][parameter] = value
        if parameter == "d":
            cell["model"]["d_seq"] = value
        cell["out"] = str(base_out / f"sweep_{parameter}_{value}")
        row = {"parameter": parameter, "value": value}
        try:
            cellcfg = cfgmod.finalize(cell)
            artifacts = run_pipeline(cellcfg)
            report = json.loads(Path(artifacts["report"]).read_text())
            for k, ap in report["ap_at_k"].items():
                row[f"ap@{k}"] = ap
        except Exception as exc:  # partial-results table per contract
            row["error"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    _write_sweep_table(base_out, parameter, rows)
    return rows


def _write_sweep_table(out_dir: Path, parameter: str,
                       rows: list[dict]) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    ks = sorted({key for row in rows for key in row if key.startswith("ap@")},
                key=lambda s: int(s[3:]))
    with open(out_dir / f"sweep_{parameter}.tsv", "w",
              encoding="utf-8") as fh:
        fh.write("\t".join(["parameter", "value"] + ks + ["error"]) + "\n")
        for row in rows:
            cells = [row["parameter"], str(row["value"])]
            cells += [repr(row[k]) if k in row else "" for k in ks]
            cells.append(row.get("error", ""))
            fh.write("\t".join(cells) + "\n")
