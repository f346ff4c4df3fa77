"""Attribute records for start-ups and persons (graph-side metadata)."""

from __future__ import annotations

import datetime as _dt
from dataclasses import dataclass, field

GENDERS = ("male", "female", "other")
DEGREES = ("bachelor", "master", "doctor", "other")
OUTCOME_KINDS = ("ipo", "acquired")


def normalize_gender(raw: str | None) -> str:
    value = (raw or "").strip().lower()
    return value if value in GENDERS else "other"


def normalize_degree(raw: str | None) -> str:
    value = (raw or "").strip().lower()
    return value if value in DEGREES else "other"


@dataclass
class StartUpRecord:
    node: str
    founded: _dt.date
    industry: tuple[str, ...]            # up to 3 tiers, coarse first
    latitude: float
    longitude: float
    outcome_type: str | None = None      # "ipo" | "acquired" | None
    outcome_date: _dt.date | None = None
    first_funding_period: int | None = None
    first_funding_date: _dt.date | None = None
    # (period, deal_type, amount) sorted chronologically
    funding_rounds: list[tuple[int, str, float]] = field(default_factory=list)

    @property
    def sector(self) -> str:
        return self.industry[0] if self.industry else "other"

    @property
    def subsector(self) -> str:
        return self.industry[1] if len(self.industry) > 1 else "other"


@dataclass
class PersonRecord:
    node: str
    gender: str = "other"
    degree: str = "other"
    graduated_institute: str | None = None
    graduated_year: int | None = None
