"""Run configuration: JSON file + CLI overrides -> one effective config.

A config is a nested dict with sections `data`, `gen`, `model`, `split`
plus top-level `seed` and `out`. Every key has a default; `--set a.b=v`
overrides a dotted path (values are JSON-parsed when possible). The
effective config serializes deterministically and hashes stably, and the
serialized form reloads to an equivalent run.
"""

from __future__ import annotations

import copy
import datetime as _dt
import hashlib
import json
from pathlib import Path

from . import __version__
from .errors import ConfigError
from .evaluation import SplitSpec
from .synthgen import GenConfig
from .timeutil import parse_date, period_to_date

TEST_MONTHS = 12          # AP@K averages a year of monthly cohorts
VALIDATION_A_MONTHS = 2   # resolved both-class validation window

DEFAULTS: dict = {
    "seed": 0,
    "out": "runs/default",
    "data": {
        "source": "synthetic",          # "synthetic" | "files"
        "dir": None,                    # input directory for "files"
        "filenames": {},                # overrides of the three table names
        "column_map": {},               # canonical -> actual column names
        "epoch": "2010-01-01",
        "cutoff_period": 0,
        "last_period": None,            # default: gen.months - 1
    },
    "gen": {
        "n_startups": 5000,
        "n_persons": 8000,
        "months": 36,
        "pa_strength": 1.0,
        "target_lcc_fraction": 0.6656,
        "industry_mix": None,           # None -> generator default mix
        "base_success_rate": 0.1571,
        "signal_strength": 2.5,
        "second_round_rate": 0.6344,
        "outcome_window_months": 12,    # compressed synthetic calendar
    },
    "model": {
        "d": 64,
        "heads": 8,
        "gst_layers": 3,
        "beta": 0.5,
        "epochs": 50,
        "lookback": 12,
        "lp_use_current": False,
        "scale_full_d": False,
        "d_seq": 64,
        "mlp_hidden": [64, 32],
        "negative_ratio": 1,
        "lr": 1e-3,
        "classifier_lr": 3e-3,
        "classifier_epochs": 250,
        "patience": 40,
        "freeze_sequence": False,
        "label_window_months": None,    # None -> data-source default
    },
    "split": None,                      # None -> derived from the calendar
}


def _deep_update(base: dict, override: dict) -> dict:
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            _deep_update(base[key], value)
        else:
            base[key] = value
    return base


def load_config(path=None, overrides=None, seed=None, out=None) -> dict:
    """Assemble the effective config from defaults, file, and flags."""
    cfg = copy.deepcopy(DEFAULTS)
    if path is not None:
        try:
            blob = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path}: {exc}") from exc
        if not isinstance(blob, dict):
            raise ConfigError(f"config file {path}: expected an object")
        _deep_update(cfg, blob)
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, _, raw = item.partition("=")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = cfg
        parts = key.split(".")
        for part in parts[:-1]:
            if part not in node or not isinstance(node[part], dict):
                node[part] = {}
            node = node[part]
        node[parts[-1]] = value
    if seed is not None:
        cfg["seed"] = int(seed)
    if out is not None:
        cfg["out"] = str(out)
    return finalize(cfg)


def finalize(cfg: dict) -> dict:
    """Fill derived fields so the config is fully explicit."""
    cfg = copy.deepcopy(cfg)
    data = cfg["data"]
    gen = cfg["gen"]
    model = cfg["model"]
    if data["source"] not in ("synthetic", "files"):
        raise ConfigError(f"unknown data source {data['source']!r}")
    if data["source"] == "files" and not data.get("dir"):
        raise ConfigError("data.source 'files' needs data.dir")
    epoch = parse_date(data["epoch"])
    if data["last_period"] is None:
        data["last_period"] = int(gen["months"]) - 1
    if model["label_window_months"] is None:
        model["label_window_months"] = gen["outcome_window_months"] \
            if data["source"] == "synthetic" else 60
    if cfg["split"] is None:
        cfg["split"] = derive_split(epoch, int(data["last_period"]) + 1,
                                    int(model["label_window_months"]))
    _validate_model(model)
    return cfg


def _validate_model(model: dict) -> None:
    if model["d"] % model["heads"] != 0:
        raise ConfigError("model.d must be divisible by model.heads")
    if not 0.0 <= float(model["beta"]) <= 1.0:
        raise ConfigError("model.beta must lie in [0, 1]")
    for key in ("epochs", "lookback", "classifier_epochs", "patience",
                "negative_ratio", "gst_layers", "label_window_months"):
        if int(model[key]) < 0:
            raise ConfigError(f"model.{key} must be non-negative")


def derive_split(epoch: _dt.date, months: int, window: int) -> dict:
    """Default calendar: 12 test months at the end, a label-window gap so
    train/validation labels resolve before the test year, train first."""
    test_start = months - TEST_MONTHS
    train_end = months - TEST_MONTHS - window - VALIDATION_A_MONTHS - 2
    if train_end < 1:
        raise ConfigError(
            f"{months} months cannot fit train + {window}-month label "
            f"window + {TEST_MONTHS} test months; extend data.last_period "
            f"or shrink model.label_window_months")

    def span(first_period, last_period):
        start = period_to_date(first_period, epoch)
        end = period_to_date(last_period + 1, epoch) - _dt.timedelta(days=1)
        return [start.isoformat(), end.isoformat()]

    val_a = (train_end + 1, train_end + VALIDATION_A_MONTHS)
    return {
        "train_range": span(0, train_end),
        "validation_range_a": span(*val_a),
        "validation_range_b": span(val_a[1] + 1, test_start - 1),
        "test_range": span(test_start, months - 1),
        "horizon": period_to_date(months + window + 1, epoch).isoformat(),
    }


def split_spec(cfg: dict) -> SplitSpec:
    s = cfg["split"]

    def rng(key):
        lo, hi = s[key]
        return (parse_date(lo), parse_date(hi))

    return SplitSpec(train_range=rng("train_range"),
                     validation_range_a=rng("validation_range_a"),
                     validation_range_b=rng("validation_range_b"),
                     test_range=rng("test_range"),
                     horizon=parse_date(s["horizon"]))


def gen_config(cfg: dict) -> GenConfig:
    g = cfg["gen"]
    kwargs = dict(
        n_startups=int(g["n_startups"]), n_persons=int(g["n_persons"]),
        months=int(g["months"]), pa_strength=float(g["pa_strength"]),
        target_lcc_fraction=float(g["target_lcc_fraction"]),
        base_success_rate=float(g["base_success_rate"]),
        signal_strength=float(g["signal_strength"]),
        second_round_rate=float(g["second_round_rate"]),
        outcome_window_months=int(g["outcome_window_months"]),
        seed=int(cfg["seed"]),
        epoch=parse_date(cfg["data"]["epoch"]))
    if g.get("industry_mix"):
        kwargs["industry_mix"] = dict(g["industry_mix"])
    return GenConfig(**kwargs)


def config_hash(cfg: dict) -> str:
    """Hash of the experiment identity: everything except the out path."""
    scrubbed = {k: v for k, v in cfg.items() if k != "out"}
    canon = json.dumps(scrubbed, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def save_effective(cfg: dict, out_dir) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "config.effective.json"
    path.write_text(json.dumps(cfg, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")
    return path


def write_manifest(out_dir, cfg: dict) -> Path:
    """Hash every artifact in the run directory (excluding the manifest)."""
    out_dir = Path(out_dir)
    files = {}
    for path in sorted(out_dir.rglob("*")):
        if path.is_file() and path.name != "manifest.json":
            digest = hashlib.sha256(path.read_bytes()).hexdigest()
            files[str(path.relative_to(out_dir))] = digest
    manifest = {"config_hash": config_hash(cfg), "seed": cfg["seed"],
                "code_version": __version__, "files": files}
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")
    return path
