"""Fixed-layout attribute vectors for persons (31 dims) and start-ups (58).

Layouts are frozen; every one-hot group sums to exactly 1 (unknown values
land in a designated other/unclassified slot) and numeric fields are
standardized with statistics fitted on the training split only.

Person layout (31):
    [0:3)    gender one-hot        (male, female, other)
    [3:7)    degree one-hot        (bachelor, master, doctor, other)
    [7:31)   padding (zeros)

Start-up layout (58):
    [0:41)   industry subsector one-hot (41-label taxonomy below)
    [41:53)  first deal type one-hot    (12 deal types incl. other)
    [53]     latitude               (standardized)
    [54]     longitude              (standardized)
    [55]     log1p first-round amount (standardized)
    [56]     age at first funding, months (standardized)
    [57]     padding (zero)
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .records import DEGREES, GENDERS, PersonRecord, StartUpRecord
from .timeutil import months_between

PERSON_DIM = 31
STARTUP_DIM = 58

# two-tier industry taxonomy: 7 sectors, 41 subsector labels in total
SECTOR_SUBSECTORS: dict[str, tuple[str, ...]] = {
    "it": ("software", "it_services", "internet", "hardware",
           "semiconductors", "cybersecurity", "it_other"),
    "healthcare": ("biotech", "pharmaceuticals", "medical_devices",
                   "healthcare_services", "digital_health", "diagnostics",
                   "healthcare_other"),
    "b2c": ("e_commerce", "consumer_products", "media_content", "gaming",
            "travel_leisure", "food_beverage", "b2c_other"),
    "b2b": ("logistics", "hr_services", "marketing_services",
            "professional_services", "supply_chain", "b2b_other"),
    "fs": ("fintech", "payments", "insurance", "lending", "fs_other"),
    "mr": ("mining", "chemicals", "agriculture", "mr_other"),
    "energy": ("oil_gas", "renewables", "utilities", "energy_other"),
}
UNCLASSIFIED = "unclassified"
SECTORS = tuple(SECTOR_SUBSECTORS)
SUBSECTORS = tuple(s for subs in SECTOR_SUBSECTORS.values()
                   for s in subs) + (UNCLASSIFIED,)
SUBSECTOR_TO_SECTOR = {sub: sector
                       for sector, subs in SECTOR_SUBSECTORS.items()
                       for sub in subs}

DEAL_TYPES = ("angel", "seed", "series_a", "series_b", "series_c",
              "early_stage_vc", "later_stage_vc", "growth", "convertible",
              "grant", "debt", "other")

assert len(SUBSECTORS) == 41
assert len(DEAL_TYPES) == 12

_NUMERIC_FIELDS = ("latitude", "longitude", "log_amount", "age_months")


@dataclass
class AttributeVector:
    node: str
    values: np.ndarray


class AttributeScaler:
    """Per-field standardization fitted on training-split start-ups."""

    def __init__(self, means=None, stds=None):
        self.means = dict(means or {f: 0.0 for f in _NUMERIC_FIELDS})
        self.stds = dict(stds or {f: 1.0 for f in _NUMERIC_FIELDS})

    @classmethod
    def fit(cls, records: list[StartUpRecord]) -> "AttributeScaler":
        columns = {f: [] for f in _NUMERIC_FIELDS}
        for rec in records:
            raw = _numeric_fields(rec)
            for f in _NUMERIC_FIELDS:
                columns[f].append(raw[f])
        means = {}
        stds = {}
        for f, values in columns.items():
            arr = np.asarray(values, dtype=float)
            means[f] = float(arr.mean()) if len(arr) else 0.0
            std = float(arr.std()) if len(arr) else 1.0
            stds[f] = std if std > 1e-9 else 1.0
        return cls(means, stds)

    def transform(self, field: str, value: float) -> float:
        return (value - self.means[field]) / self.stds[field]

    def to_json(self) -> dict:
        return {"means": self.means, "stds": self.stds}

    @classmethod
    def from_json(cls, blob: dict) -> "AttributeScaler":
        return cls(blob["means"], blob["stds"])


def _numeric_fields(rec: StartUpRecord) -> dict[str, float]:
    amount = rec.funding_rounds[0][2] if rec.funding_rounds else 0.0
    if rec.first_funding_date is not None:
        age = months_between(rec.first_funding_date, rec.founded)
    else:
        age = 0
    return {"latitude": rec.latitude, "longitude": rec.longitude,
            "log_amount": float(np.log1p(max(amount, 0.0))),
            "age_months": float(max(age, 0))}


def normalize_subsector(industry: tuple[str, ...]) -> str:
    """Map a record's industry path onto the closed 41-label taxonomy."""
    sub = industry[1].strip().lower() if len(industry) > 1 else ""
    if sub in SUBSECTOR_TO_SECTOR:
        return sub
    sector = industry[0].strip().lower() if industry else ""
    if sector in SECTOR_SUBSECTORS:
        return f"{sector}_other"
    return UNCLASSIFIED


def encode_person(rec: PersonRecord) -> AttributeVector:
    values = np.zeros(PERSON_DIM)
    values[GENDERS.index(rec.gender if rec.gender in GENDERS else "other")] \
        = 1.0
    deg = rec.degree if rec.degree in DEGREES else "other"
    values[3 + DEGREES.index(deg)] = 1.0
    return AttributeVector(rec.node, values)


def encode_startup(rec: StartUpRecord,
                   scaler: AttributeScaler) -> AttributeVector:
    values = np.zeros(STARTUP_DIM)
    values[SUBSECTORS.index(normalize_subsector(rec.industry))] = 1.0
    deal = rec.funding_rounds[0][1] if rec.funding_rounds else "other"
    deal = deal if deal in DEAL_TYPES else "other"
    values[41 + DEAL_TYPES.index(deal)] = 1.0
    raw = _numeric_fields(rec)
    for offset, field in enumerate(_NUMERIC_FIELDS):
        values[53 + offset] = scaler.transform(field, raw[field])
    return AttributeVector(rec.node, values)


def encode_attributes(rec, scaler: AttributeScaler) -> AttributeVector:
    """Dispatch on record type; unknown categories land in other slots."""
    if isinstance(rec, StartUpRecord):
        return encode_startup(rec, scaler)
    return encode_person(rec)


def save_scaler(path, scaler: AttributeScaler) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps({"scaler": scaler.to_json(),
                                "person_dim": PERSON_DIM,
                                "startup_dim": STARTUP_DIM},
                               indent=2, sort_keys=True), encoding="utf-8")


def load_scaler(path) -> AttributeScaler:
    blob = json.loads(Path(path).read_text(encoding="utf-8"))
    return AttributeScaler.from_json(blob["scaler"])
