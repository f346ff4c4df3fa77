"""Flat-file ingestion: startups / persons / investments tables -> events.

Three UTF-8 delimiter-separated files with header rows; dates ISO-8601.
Canonical column names below; a column map in the run config renames them.

startups.tsv:    company_id, founded, latitude, longitude, country,
                 industry ("Tier1 > Tier2 > Tier3"), outcome_type
                 (ipo|acquired|none), outcome_date (blank if none)
persons.tsv:     person_id, gender, degree, institute, graduated_year,
                 affiliations ("company_id@YYYY-MM-DD;..."; employment)
investments.tsv: deal_id, deal_type, investors ("person_id;..."),
                 deal_date, amount, company_id

Persons enter the graph at their first relationship; start-ups at their
founding month (clamped to the epoch). Records keep every funding round,
including rounds after the structural window, for labels and baselines.
"""

from __future__ import annotations

import csv
import datetime as _dt
from dataclasses import dataclass, field
from pathlib import Path

from .errors import MalformedRecord
from .graph import EdgeEvent, EdgeKind, NodeEvent, NodeKind
from .records import PersonRecord, StartUpRecord, normalize_degree, \
    normalize_gender
from .timeutil import month_index, parse_date

STARTUP_COLUMNS = ("company_id", "founded", "latitude", "longitude",
                   "country", "industry", "outcome_type", "outcome_date")
PERSON_COLUMNS = ("person_id", "gender", "degree", "institute",
                  "graduated_year", "affiliations")
INVESTMENT_COLUMNS = ("deal_id", "deal_type", "investors", "deal_date",
                      "amount", "company_id")

DEFAULT_FILENAMES = {"startups": "startups.tsv", "persons": "persons.tsv",
                     "investments": "investments.tsv"}


@dataclass
class Dataset:
    epoch: _dt.date
    startups: dict[str, StartUpRecord]
    persons: dict[str, PersonRecord]
    events: list = field(default_factory=list)
    # raw relationship rows, kept for truncation/replay tooling
    employments: list = field(default_factory=list)
    deals: list = field(default_factory=list)


def _read_table(path: Path, canonical: tuple[str, ...],
                column_map: dict[str, str] | None):
    """Yield (lineno, row-dict keyed by canonical names)."""
    colmap = {name: (column_map or {}).get(name, name) for name in canonical}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh, delimiter="\t")
        if reader.fieldnames is None:
            raise MalformedRecord(f"{path}: empty file, header row required")
        missing = [colmap[c] for c in canonical
                   if colmap[c] not in reader.fieldnames]
        if missing:
            raise MalformedRecord(f"{path}: missing columns {missing}")
        for lineno, raw in enumerate(reader, start=2):
            yield lineno, {c: (raw.get(colmap[c]) or "").strip()
                           for c in canonical}


def _parse_float(text: str, where: str) -> float:
    try:
        return float(text)
    except ValueError as exc:
        raise MalformedRecord(f"{where}: bad number {text!r}") from exc


def load_dataset(directory, epoch: _dt.date,
                 column_map: dict[str, dict[str, str]] | None = None,
                 filenames: dict[str, str] | None = None) -> Dataset:
    """Parse the three tables and derive the chronological event stream."""
    directory = Path(directory)
    names = dict(DEFAULT_FILENAMES)
    names.update(filenames or {})
    column_map = column_map or {}

    startups: dict[str, StartUpRecord] = {}
    path = directory / names["startups"]
    for lineno, row in _read_table(path, STARTUP_COLUMNS,
                                   column_map.get("startups")):
        where = f"{path}:{lineno}"
        cid = row["company_id"]
        if not cid:
            raise MalformedRecord(f"{where}: empty company_id")
        if cid in startups:
            raise MalformedRecord(f"{where}: duplicate company_id {cid!r}")
        outcome_type = row["outcome_type"].lower() or "none"
        if outcome_type not in ("ipo", "acquired", "none"):
            raise MalformedRecord(
                f"{where}: bad outcome_type {row['outcome_type']!r}")
        outcome_date = parse_date(row["outcome_date"]) \
            if row["outcome_date"] else None
        if outcome_type != "none" and outcome_date is None:
            raise MalformedRecord(f"{where}: outcome without a date")
        industry = tuple(part.strip() for part in row["industry"].split(">")
                         if part.strip())
        startups[cid] = StartUpRecord(
            node=cid,
            founded=parse_date(row["founded"]),
            industry=industry,
            latitude=_parse_float(row["latitude"], where),
            longitude=_parse_float(row["longitude"], where),
            outcome_type=None if outcome_type == "none" else outcome_type,
            outcome_date=outcome_date,
        )

    persons: dict[str, PersonRecord] = {}
    employments: list[tuple[str, str, _dt.date]] = []
    path = directory / names["persons"]
    for lineno, row in _read_table(path, PERSON_COLUMNS,
                                   column_map.get("persons")):
        where = f"{path}:{lineno}"
        pid = row["person_id"]
        if not pid:
            raise MalformedRecord(f"{where}: empty person_id")
        if pid in persons:
            raise MalformedRecord(f"{where}: duplicate person_id {pid!r}")
        if pid in startups:
            raise MalformedRecord(
                f"{where}: id {pid!r} already used by a start-up")
        year = None
        if row["graduated_year"]:
            try:
                year = int(row["graduated_year"])
            except ValueError as exc:
                raise MalformedRecord(
                    f"{where}: bad graduated_year") from exc
        persons[pid] = PersonRecord(
            node=pid,
            gender=normalize_gender(row["gender"]),
            degree=normalize_degree(row["degree"]),
            graduated_institute=row["institute"] or None,
            graduated_year=year,
        )
        for token in filter(None, row["affiliations"].split(";")):
            if "@" not in token:
                raise MalformedRecord(
                    f"{where}: bad affiliation token {token!r}")
            cid, datestr = token.split("@", 1)
            if cid not in startups:
                raise MalformedRecord(
                    f"{where}: affiliation with unknown company {cid!r}")
            employments.append((pid, cid, parse_date(datestr)))

    deals: list[tuple[str, str, list[str], _dt.date, float, str]] = []
    path = directory / names["investments"]
    seen_deals: set[str] = set()
    for lineno, row in _read_table(path, INVESTMENT_COLUMNS,
                                   column_map.get("investments")):
        where = f"{path}:{lineno}"
        did = row["deal_id"]
        if not did or did in seen_deals:
            raise MalformedRecord(f"{where}: missing or duplicate deal_id")
        seen_deals.add(did)
        cid = row["company_id"]
        if cid not in startups:
            raise MalformedRecord(f"{where}: unknown company {cid!r}")
        investors = [tok for tok in row["investors"].split(";") if tok]
        if not investors:
            raise MalformedRecord(f"{where}: deal without investors")
        for pid in investors:
            if pid not in persons:
                raise MalformedRecord(f"{where}: unknown investor {pid!r}")
        deals.append((did, row["deal_type"].lower(), investors,
                      parse_date(row["deal_date"]),
                      _parse_float(row["amount"], where), cid))

    return _assemble(Dataset(epoch=epoch, startups=startups,
                             persons=persons), employments, deals)


def _assemble(ds: Dataset, employments, deals) -> Dataset:
    """Derive funding summaries and the node/edge event stream."""
    ds.employments = list(employments)
    ds.deals = list(deals)
    epoch = ds.epoch
    rounds_by_startup: dict[str, list] = {}
    for did, deal_type, investors, date, amount, cid in deals:
        rounds_by_startup.setdefault(cid, []).append(
            (month_index(date, epoch), date, did, deal_type, amount,
             investors))
    for cid, rounds in rounds_by_startup.items():
        rounds.sort(key=lambda r: (r[0], r[2]))
        rec = ds.startups[cid]
        rec.funding_rounds = [(p, deal_type, amount)
                              for p, _, _, deal_type, amount, _ in rounds]
        rec.first_funding_period = rounds[0][0]
        rec.first_funding_date = rounds[0][1]
        if rec.outcome_date is not None \
                and rec.outcome_date < rec.first_funding_date:
            raise MalformedRecord(
                f"{cid}: outcome {rec.outcome_date} precedes first "
                f"funding {rec.first_funding_date}")

    person_first: dict[str, int] = {}
    edge_events: list[EdgeEvent] = []
    for pid, cid, date in ds.employments:
        period = month_index(date, epoch)
        edge_events.append(EdgeEvent(period, pid, cid, EdgeKind.EMPLOY))
        person_first[pid] = min(person_first.get(pid, period), period)
    for did, deal_type, investors, date, amount, cid in ds.deals:
        period = month_index(date, epoch)
        for pid in investors:
            edge_events.append(EdgeEvent(period, pid, cid, EdgeKind.INVEST))
            person_first[pid] = min(person_first.get(pid, period), period)

    events: list = []
    for cid, rec in ds.startups.items():
        events.append(NodeEvent(month_index(rec.founded, epoch), cid,
                                NodeKind.STARTUP))
    for pid, period in person_first.items():
        events.append(NodeEvent(period, pid, NodeKind.PERSON))
    events.extend(edge_events)
    ds.events = events
    return ds
