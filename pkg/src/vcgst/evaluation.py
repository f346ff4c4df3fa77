"""Temporal splits, ranking metrics, baselines, and result reporting.

Monthly cohorts are ranked by predicted probability; P@K counts successes
among the top K of one month and AP@K averages the monthly P@Ks across
the evaluation year. Reports regenerate byte-identically from the
exported prediction/label/people files.
"""

from __future__ import annotations

import datetime as _dt
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import (ConfigError, EmptySplit, NoEvaluableMonths,
                     NoSecondRounds)
from .graph import NodeKind, TemporalBipartiteGraph
from .predictor import CENSORED, SUCCESS, PredictionRecord, make_label
from .records import DEGREES, PersonRecord, StartUpRecord
from .timeutil import month_index

DEFAULT_KS = (10, 20, 50)


@dataclass
class SplitSpec:
    """Date intervals (inclusive) for the four cohort windows."""

    train_range: tuple[_dt.date, _dt.date]
    validation_range_a: tuple[_dt.date, _dt.date]
    validation_range_b: tuple[_dt.date, _dt.date]
    test_range: tuple[_dt.date, _dt.date]
    horizon: _dt.date

    def __post_init__(self):
        ranges = [self.train_range, self.validation_range_a,
                  self.validation_range_b, self.test_range]
        for lo, hi in ranges:
            if lo > hi:
                raise ConfigError(f"split range {lo}..{hi} reversed")
        for (_, hi), (lo, _) in zip(ranges, ranges[1:]):
            if hi >= lo:
                raise ConfigError("split ranges must be disjoint and "
                                  "chronologically ordered")


@dataclass
class Splits:
    train: list[tuple[str, int, int]]
    validation: list[tuple[str, int, int]]
    test: list[tuple[str, int, int]]


def make_splits(graph: TemporalBipartiteGraph,
                startup_records: dict[str, StartUpRecord],
                spec: SplitSpec, epoch: _dt.date,
                window_months: int = 60,
                supervision_horizon: _dt.date | None = None) -> Splits:
    """Bucket first-funded start-ups into cohorts by first funding date.

    Training and test keep resolved labels only; validation is the
    resolved part-a window plus success-only samples from the longer
    part-b window (whose failures are unknowable inside a short horizon).

    Train/validation labels are resolved against `supervision_horizon`
    (what a forecaster could know when the test year starts; defaults to
    spec.horizon), test labels against spec.horizon.
    """
    sup_horizon = supervision_horizon or spec.horizon
    train, val, test = [], [], []
    for node in sorted(startup_records):
        rec = startup_records[node]
        if rec.first_funding_date is None:
            continue
        first = rec.first_funding_date
        period = month_index(first, epoch)
        horizon = spec.horizon \
            if spec.test_range[0] <= first <= spec.test_range[1] \
            else sup_horizon
        label = make_label(rec, horizon, window_months).label
        sample = (node, period, label)
        if spec.train_range[0] <= first <= spec.train_range[1]:
            if label != CENSORED:
                train.append(sample)
        elif spec.validation_range_a[0] <= first \
                <= spec.validation_range_a[1]:
            if label != CENSORED:
                val.append(sample)
        elif spec.validation_range_b[0] <= first \
                <= spec.validation_range_b[1]:
            if label == SUCCESS:
                val.append(sample)
        elif spec.test_range[0] <= first <= spec.test_range[1]:
            if label != CENSORED:
                test.append(sample)
    for name, split in (("train", train), ("validation", val),
                        ("test", test)):
        if not split:
            raise EmptySplit(f"{name} split is empty for the given ranges")
    return Splits(train=train, validation=val, test=test)


# -- ranking metrics -----------------------------------------------------------------

def precision_at_k(ranked: list[PredictionRecord],
                   labels: dict[str, int], k: int) -> float | None:
    """Successes among the top min(k, len) of one month; None if empty."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if not ranked:
        return None
    top = ranked[:min(k, len(ranked))]
    return sum(1 for r in top if labels.get(r.startup) == SUCCESS) / len(top)


def average_precision_at_k(monthly_ranked: list[list[PredictionRecord]],
                           labels: dict[str, int], k: int) -> float:
    """Arithmetic mean of the non-absent monthly P@K values."""
    values = [precision_at_k(month, labels, k) for month in monthly_ranked]
    values = [v for v in values if v is not None]
    if not values:
        raise NoEvaluableMonths("no month has ranked candidates")
    return sum(values) / len(values)


def human_investor_baseline(test_set, startup_records) -> float:
    """Success ratio among test start-ups that received a second round."""
    second = [(node, label) for node, _, label in test_set
              if len(startup_records[node].funding_rounds) >= 2]
    if not second:
        raise NoSecondRounds("no test start-up received a second round")
    return sum(1 for _, label in second if label == SUCCESS) / len(second)


def degree_heuristic_scores(graph: TemporalBipartiteGraph,
                            candidates, period: int) -> dict[str, float]:
    """Sanity baseline: rank by total connectivity of the backing team."""
    scores = {}
    for node in candidates:
        team = graph.neighbors_asof(node, period) \
            if graph.has_node(node, period) else []
        scores[node] = float(sum(graph.degree_asof(p, period)
                                 for p in team))
    return scores


# -- discussion-style analyses ----------------------------------------------------------

@dataclass
class PeopleAnalysis:
    n_selected: int
    n_test_people: int
    selected_gender: dict[str, float]
    test_gender: dict[str, float]
    selected_degree: dict[str, float]
    test_degree: dict[str, float]
    selected_mean_centrality: float
    test_mean_centrality: float


def _distribution(people: list[PersonRecord], attr: str,
                  vocab) -> dict[str, float]:
    counts = {v: 0 for v in vocab}
    for rec in people:
        counts[getattr(rec, attr)] = counts.get(getattr(rec, attr), 0) + 1
    total = max(len(people), 1)
    return {v: counts[v] / total for v in vocab}


def selected_people_analysis(positive_predictions: list[PredictionRecord],
                             graph: TemporalBipartiteGraph,
                             person_records: dict[str, PersonRecord],
                             test_set, period: int) -> PeopleAnalysis:
    """Demographics and centrality of top-attention people behind positive
    predictions, against all people affiliated with test start-ups."""
    selected_ids = sorted({r.top_attention_person
                           for r in positive_predictions
                           if r.top_attention_person is not None})
    test_people = sorted({p for node, _, _ in test_set
                          for p in graph.neighbors_asof(node, period)
                          if graph.kind(p) is NodeKind.PERSON})
    selected = [person_records[p] for p in selected_ids
                if p in person_records]
    everyone = [person_records[p] for p in test_people
                if p in person_records]
    genders = ("male", "female", "other")

    def mean_centrality(ids):
        if not ids:
            return 0.0
        return sum(graph.degree_asof(p, period) for p in ids) / len(ids)

    return PeopleAnalysis(
        n_selected=len(selected_ids),
        n_test_people=len(test_people),
        selected_gender=_distribution(selected, "gender", genders),
        test_gender=_distribution(everyone, "gender", genders),
        selected_degree=_distribution(selected, "degree", DEGREES),
        test_degree=_distribution(everyone, "degree", DEGREES),
        selected_mean_centrality=mean_centrality(selected_ids),
        test_mean_centrality=mean_centrality(test_people),
    )


@dataclass
class IndustryRow:
    sector: str
    precision: float | None
    pct_in_lcc: float | None
    selected: int
    total: int


def industry_breakdown(monthly_ranked: list[list[PredictionRecord]],
                       labels: dict[str, int],
                       startup_records: dict[str, StartUpRecord],
                       graph: TemporalBipartiteGraph, test_set,
                       period: int, k: int) -> list[IndustryRow]:
    """Per-sector precision of the monthly top-K picks, LCC coverage of
    the sector's test start-ups, and selected/total ratios."""
    selected: list[str] = []
    for month in monthly_ranked:
        selected.extend(r.startup for r in month[:min(k, len(month))])
    lcc = graph.structural_stats(period).lcc_membership
    sector_of = {node: startup_records[node].sector
                 for node, _, _ in test_set if node in startup_records}
    totals: dict[str, list[str]] = {}
    for node, sec in sector_of.items():
        totals.setdefault(sec, []).append(node)
    rows = []
    for sector in sorted(totals):
        nodes = totals[sector]
        picked = [s for s in selected if sector_of.get(s) == sector]
        wins = sum(1 for s in picked if labels.get(s) == SUCCESS)
        in_lcc = sum(1 for s in nodes if s in lcc)
        rows.append(IndustryRow(
            sector=sector,
            precision=wins / len(picked) if picked else None,
            pct_in_lcc=in_lcc / len(nodes) if nodes else None,
            selected=len(picked), total=len(nodes)))
    return rows


# -- report assembly -----------------------------------------------------------------

@dataclass
class EvalReport:
    ks: tuple[int, ...]
    monthly_p_at_k: dict[int, dict[int, float | None]]
    ap_at_k: dict[int, float]
    human_baseline: float | None
    degree_baseline_ap: dict[int, float | None]
    base_rate: float
    industry: list[IndustryRow] = field(default_factory=list)
    people: PeopleAnalysis | None = None

    def to_json(self) -> str:
        blob = {
            "ks": list(self.ks),
            "monthly_p_at_k": {str(k): {str(m): v for m, v in months.items()}
                               for k, months in self.monthly_p_at_k.items()},
            "ap_at_k": {str(k): v for k, v in self.ap_at_k.items()},
            "human_baseline": self.human_baseline,
            "degree_baseline_ap": {str(k): v for k, v
                                   in self.degree_baseline_ap.items()},
            "base_rate": self.base_rate,
            "industry": [vars(row) for row in self.industry],
            "people": vars(self.people) if self.people else None,
        }
        return json.dumps(blob, indent=2, sort_keys=True)

    def render_text(self) -> str:
        lines = ["ranking evaluation", "=================="]
        lines.append(f"test base success rate: {self.base_rate:.4f}")
        header = "K      AP@K     human   degree-heuristic"
        lines.append(header)
        for k in self.ks:
            human = f"{self.human_baseline:.4f}" \
                if self.human_baseline is not None else "   n/a"
            deg = self.degree_baseline_ap.get(k)
            deg = f"{deg:.4f}" if deg is not None else "   n/a"
            lines.append(f"{k:<6} {self.ap_at_k[k]:.4f}   {human}   {deg}")
        if self.industry:
            lines.append("")
            lines.append("sector      precision   %inLCC   selected/total")
            for row in self.industry:
                prec = f"{row.precision:.3f}" if row.precision is not None \
                    else "  n/a"
                lcc = f"{row.pct_in_lcc:.3f}" if row.pct_in_lcc is not None \
                    else "  n/a"
                lines.append(f"{row.sector:<11} {prec:>9}   {lcc:>6}   "
                             f"{row.selected}/{row.total}")
        if self.people:
            p = self.people
            lines.append("")
            lines.append(f"selected people: {p.n_selected} "
                         f"(test-set people: {p.n_test_people})")
            lines.append(f"  mean degree centrality "
                         f"{p.selected_mean_centrality:.2f} vs "
                         f"{p.test_mean_centrality:.2f}")
            lines.append(f"  female share {p.selected_gender['female']:.3f} "
                         f"vs {p.test_gender['female']:.3f}")
            for deg in DEGREES:
                lines.append(f"  {deg:<9} {p.selected_degree[deg]:.3f} vs "
                             f"{p.test_degree[deg]:.3f}")
        return "\n".join(lines) + "\n"


# -- flat-file exports ---------------------------------------------------------------
#
# evaluate writes these three files and then builds the report FROM them;
# the report subcommand re-reads the same files, so regeneration is
# idempotent and every aggregate is reproducible from the exports alone.

def write_predictions(path, records: list[PredictionRecord],
                      team_degree: dict[str, float] | None = None) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    team_degree = team_degree or {}
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("startup\tperiod\tprobability\trank\t"
                 "top_attention_person\tteam_degree\n")
        for r in records:
            top = r.top_attention_person or ""
            deg = team_degree.get(r.startup, 0.0)
            fh.write(f"{r.startup}\t{r.period}\t{r.probability!r}\t"
                     f"{r.rank}\t{top}\t{deg!r}\n")


def read_predictions(path):
    """Returns (records, team_degree dict)."""
    out = []
    degrees = {}
    with open(path, encoding="utf-8") as fh:
        fh.readline()
        for line in fh:
            startup, period, prob, rank, top, deg = \
                line.rstrip("\n").split("\t")
            out.append(PredictionRecord(startup=startup, period=int(period),
                                        probability=float(prob),
                                        rank=int(rank),
                                        top_attention_person=top or None))
            degrees[startup] = float(deg)
    return out, degrees


def write_labels(path, test_set, startup_records, graph,
                 period: int) -> None:
    """Ground-truth export: label, sector, LCC membership, second round."""
    lcc = graph.structural_stats(period).lcc_membership
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("startup\tperiod\tlabel\tsector\tin_lcc\tsecond_round\n")
        for node, per, label in sorted(test_set):
            rec = startup_records[node]
            fh.write(f"{node}\t{per}\t{label}\t{rec.sector}\t"
                     f"{int(node in lcc)}\t"
                     f"{int(len(rec.funding_rounds) >= 2)}\n")


def read_labels(path):
    rows = []
    with open(path, encoding="utf-8") as fh:
        fh.readline()
        for line in fh:
            node, per, label, sector, in_lcc, second = \
                line.rstrip("\n").split("\t")
            rows.append({"startup": node, "period": int(per),
                         "label": int(label), "sector": sector,
                         "in_lcc": bool(int(in_lcc)),
                         "second_round": bool(int(second))})
    return rows


def write_people(path, graph: TemporalBipartiteGraph,
                 person_records: dict[str, PersonRecord], test_set,
                 period: int) -> None:
    """People affiliated with test start-ups, with demographics and
    degree centrality (the comparison population for the analysis)."""
    test_people = sorted({p for node, _, _ in test_set
                          for p in graph.neighbors_asof(node, period)
                          if graph.kind(p) is NodeKind.PERSON})
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("person\tgender\tdegree\tcentrality\n")
        for p in test_people:
            rec = person_records.get(p) or PersonRecord(node=p)
            fh.write(f"{p}\t{rec.gender}\t{rec.degree}\t"
                     f"{graph.degree_asof(p, period)}\n")


def read_people(path):
    rows = {}
    with open(path, encoding="utf-8") as fh:
        fh.readline()
        for line in fh:
            person, gender, degree, centrality = \
                line.rstrip("\n").split("\t")
            rows[person] = {"gender": gender, "degree": degree,
                            "centrality": float(centrality)}
    return rows


def report_from_exports(predictions_path, labels_path, people_path,
                        ks=DEFAULT_KS) -> EvalReport:
    """Rebuild the full report from the three exported files."""
    predictions, team_degree = read_predictions(predictions_path)
    label_rows = read_labels(labels_path)
    people_rows = read_people(people_path)

    labels = {row["startup"]: row["label"] for row in label_rows}
    by_month: dict[int, list[PredictionRecord]] = {}
    for r in predictions:
        by_month.setdefault(r.period, []).append(r)
    monthly_ranked = [sorted(by_month[m], key=lambda r: r.rank)
                      for m in sorted(by_month)]

    monthly_p: dict[int, dict[int, float | None]] = {}
    ap: dict[int, float] = {}
    for k in ks:
        monthly_p[k] = {month[0].period: precision_at_k(month, labels, k)
                        for month in monthly_ranked}
        ap[k] = average_precision_at_k(monthly_ranked, labels, k)

    second = [row for row in label_rows if row["second_round"]]
    human = (sum(1 for row in second if row["label"] == SUCCESS)
             / len(second)) if second else None

    degree_monthly = []
    for month in monthly_ranked:
        ranked = sorted(month, key=lambda r: (-team_degree.get(r.startup,
                                                               0.0),
                                              r.startup))
        degree_monthly.append([
            PredictionRecord(r.startup, r.period,
                             team_degree.get(r.startup, 0.0), i + 1, None)
            for i, r in enumerate(ranked)])
    degree_ap: dict[int, float | None] = {}
    for k in ks:
        try:
            degree_ap[k] = average_precision_at_k(degree_monthly, labels, k)
        except NoEvaluableMonths:
            degree_ap[k] = None

    base_rate = sum(1 for row in label_rows if row["label"] == SUCCESS) \
        / max(len(label_rows), 1)

    sector_of = {row["startup"]: row["sector"] for row in label_rows}
    in_lcc = {row["startup"]: row["in_lcc"] for row in label_rows}
    k0 = ks[0]
    selected: list[str] = []
    for month in monthly_ranked:
        selected.extend(r.startup for r in month[:min(k0, len(month))])
    totals: dict[str, list[str]] = {}
    for node, sec in sector_of.items():
        totals.setdefault(sec, []).append(node)
    industry = []
    for sector in sorted(totals):
        nodes = totals[sector]
        picked = [s for s in selected if sector_of.get(s) == sector]
        wins = sum(1 for s in picked if labels.get(s) == SUCCESS)
        n_lcc = sum(1 for s in nodes if in_lcc[s])
        industry.append(IndustryRow(
            sector=sector,
            precision=wins / len(picked) if picked else None,
            pct_in_lcc=n_lcc / len(nodes) if nodes else None,
            selected=len(picked), total=len(nodes)))

    positives = [r for r in predictions if r.probability > 0.5]
    selected_ids = sorted({r.top_attention_person for r in positives
                           if r.top_attention_person is not None})
    genders = ("male", "female", "other")

    def dist(ids, attr, vocab):
        total = max(len(ids), 1)
        return {v: sum(1 for p in ids
                       if people_rows.get(p, {}).get(attr) == v) / total
                for v in vocab}

    all_people = sorted(people_rows)
    def centrality(ids):
        if not ids:
            return 0.0
        return sum(people_rows.get(p, {}).get("centrality", 0.0)
                   for p in ids) / len(ids)

    people = PeopleAnalysis(
        n_selected=len(selected_ids), n_test_people=len(all_people),
        selected_gender=dist(selected_ids, "gender", genders),
        test_gender=dist(all_people, "gender", genders),
        selected_degree=dist(selected_ids, "degree", DEGREES),
        test_degree=dist(all_people, "degree", DEGREES),
        selected_mean_centrality=centrality(selected_ids),
        test_mean_centrality=centrality(all_people))

    return EvalReport(ks=tuple(ks), monthly_p_at_k=monthly_p, ap_at_k=ap,
                      human_baseline=human, degree_baseline_ap=degree_ap,
                      base_rate=base_rate, industry=industry,
                      people=people)
