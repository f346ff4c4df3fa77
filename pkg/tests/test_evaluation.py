"""Metric, split, baseline, and report-regeneration tests."""

import datetime as dt

import numpy as np
import pytest

from vcgst.errors import (ConfigError, EmptySplit, NoEvaluableMonths,
                          NoSecondRounds)
from vcgst.evaluation import (SplitSpec, average_precision_at_k,
                              degree_heuristic_scores,
                              human_investor_baseline, industry_breakdown,
                              make_splits, precision_at_k,
                              read_labels, read_predictions,
                              report_from_exports, selected_people_analysis,
                              write_labels, write_people, write_predictions)
from vcgst.graph import (EdgeEvent, EdgeKind, NodeEvent, NodeKind,
                         build_initial_graph)
from vcgst.predictor import (CENSORED, FAILURE, SUCCESS, PredictionRecord,
                             make_label)
from vcgst.records import PersonRecord, StartUpRecord


def pred(startup, period=0, prob=0.5, rank=1, top=None):
    return PredictionRecord(startup=startup, period=period,
                            probability=prob, rank=rank,
                            top_attention_person=top)


def ranked_month(labels_in_order, period=0):
    """Build a ranked month plus its label map from an ordered 0/1 list."""
    records = []
    labels = {}
    for i, lab in enumerate(labels_in_order):
        name = f"s{i:03d}"
        records.append(pred(name, period=period, prob=1.0 - i * 1e-3,
                            rank=i + 1))
        labels[name] = SUCCESS if lab else FAILURE
    return records, labels


# -- precision/AP -------------------------------------------------------------

def test_precision_top2_of_1010():
    month, labels = ranked_month([1, 0, 1, 0])
    assert precision_at_k(month, labels, 2) == 0.5


def test_precision_all_topk_positive():
    month, labels = ranked_month([1, 1, 1, 0])
    assert precision_at_k(month, labels, 3) == 1.0


def test_precision_small_month_uses_min_denominator():
    month, labels = ranked_month([1, 0])
    assert precision_at_k(month, labels, 10) == 0.5


def test_precision_empty_month_absent():
    assert precision_at_k([], {}, 5) is None


def test_precision_matches_brute_force_count(rng):
    for _ in range(50):
        labs = (rng.uniform(size=200) < 0.3).astype(int)
        month, labels = ranked_month(labs)
        k = int(rng.integers(1, 220))
        want = sum(labs[:min(k, 200)]) / min(k, 200)
        assert abs(precision_at_k(month, labels, k) - want) < 1e-12


def test_ap_twelve_identical_months():
    months, labels = [], {}
    for m in range(12):
        month, labs = ranked_month([1, 0, 0, 0, 0], period=m)
        month = [PredictionRecord(f"m{m}_{r.startup}", m, r.probability,
                                  r.rank, None) for r in month]
        labels.update({f"m{m}_s{i:03d}": SUCCESS if i == 0 else FAILURE
                       for i in range(5)})
        months.append(month)
    assert abs(average_precision_at_k(months, labels, 5) - 0.2) < 1e-12


def test_ap_two_months_zero_and_one():
    m0, l0 = ranked_month([0, 0], period=0)
    m1, l1 = ranked_month([1, 1], period=1)
    m1 = [PredictionRecord("x" + r.startup, 1, r.probability, r.rank, None)
          for r in m1]
    labels = dict(l0)
    labels.update({"x" + k: v for k, v in l1.items()})
    assert average_precision_at_k([m0, m1], labels, 2) == 0.5


def test_ap_absent_months_skipped():
    m0, labels = ranked_month([1, 1], period=0)
    assert average_precision_at_k([m0, []], labels, 2) == 1.0


def test_ap_no_months_raises():
    with pytest.raises(NoEvaluableMonths):
        average_precision_at_k([[], []], {}, 5)


def test_ap_matches_mean_oracle(rng):
    months = []
    labels = {}
    per_month = []
    for m in range(12):
        labs = (rng.uniform(size=30) < 0.25).astype(int)
        month, _ = ranked_month(labs, period=m)
        month = [PredictionRecord(f"m{m}_{r.startup}", m, r.probability,
                                  r.rank, None) for r in month]
        for i, lab in enumerate(labs):
            labels[f"m{m}_s{i:03d}"] = SUCCESS if lab else FAILURE
        months.append(month)
        per_month.append(sum(labs[:10]) / 10)
    got = average_precision_at_k(months, labels, 10)
    assert abs(got - np.mean(per_month)) < 1e-12


def test_ap_invariant_to_permutations_within_topk_and_tail(rng):
    labs = (rng.uniform(size=40) < 0.4).astype(int)
    month, labels = ranked_month(labs)
    k = 15
    base = precision_at_k(month, labels, k)
    head, tail = month[:k], month[k:]
    for _ in range(5):
        h = list(head)
        t = list(tail)
        rng.shuffle(h)
        rng.shuffle(t)
        assert precision_at_k(h + t, labels, k) == base


# -- splits -----------------------------------------------------------------------

def startup_rec(node, funded, outcome=None, outcome_date=None,
                sector="it"):
    first = dt.date.fromisoformat(funded)
    rec = StartUpRecord(node=node, founded=first, industry=(sector, ""),
                        latitude=0.0, longitude=0.0, outcome_type=outcome,
                        outcome_date=dt.date.fromisoformat(outcome_date)
                        if outcome_date else None)
    rec.first_funding_date = first
    rec.first_funding_period = (first.year - 2007) * 12 + first.month - 1
    rec.funding_rounds = [(rec.first_funding_period, "seed", 1e6)]
    return rec


def split_spec():
    return SplitSpec(
        train_range=(dt.date(2007, 1, 1), dt.date(2008, 9, 30)),
        validation_range_a=(dt.date(2008, 10, 1), dt.date(2008, 12, 31)),
        validation_range_b=(dt.date(2009, 1, 1), dt.date(2013, 12, 31)),
        test_range=(dt.date(2014, 1, 1), dt.date(2014, 12, 31)),
        horizon=dt.date(2019, 12, 31))


def test_make_splits_matches_date_filter_oracle():
    records = {}
    dates = ["2006-05-01", "2007-03-01", "2008-02-01", "2008-11-01",
             "2010-06-01", "2014-03-01", "2014-09-01", "2015-02-01"]
    for i, day in enumerate(dates):
        # alternate successes so every window has resolved labels
        outcome = "ipo" if i % 2 == 0 else None
        odate = None
        if outcome:
            d = dt.date.fromisoformat(day)
            odate = dt.date(d.year + 2, d.month, 1).isoformat()
        records[f"s{i}"] = startup_rec(f"s{i}", day, outcome, odate)
    spec = split_spec()
    splits = make_splits(None, records, spec, epoch=dt.date(2007, 1, 1))
    assert {s for s, _, _ in splits.train} == {"s1", "s2"}
    assert {s for s, _, _ in splits.validation} == {"s3", "s4"}
    assert {s for s, _, _ in splits.test} == {"s5", "s6"}
    # date-filter oracle: before train_range and after test_range excluded
    everywhere = {s for split in (splits.train, splits.validation,
                                  splits.test) for s, _, _ in split}
    assert "s0" not in everywhere and "s7" not in everywhere


def test_make_splits_partb_success_only():
    records = {
        "early": startup_rec("early", "2007-05-01", "ipo", "2009-05-01"),
        "vala": startup_rec("vala", "2008-11-01"),
        "win": startup_rec("win", "2012-06-01", "acquired", "2013-06-01"),
        "censored": startup_rec("censored", "2012-06-01"),
        "test": startup_rec("test", "2014-05-01"),
    }
    spec = SplitSpec(
        train_range=(dt.date(2007, 1, 1), dt.date(2008, 9, 30)),
        validation_range_a=(dt.date(2008, 10, 1), dt.date(2008, 12, 31)),
        validation_range_b=(dt.date(2009, 1, 1), dt.date(2013, 12, 31)),
        test_range=(dt.date(2014, 1, 1), dt.date(2014, 12, 31)),
        horizon=dt.date(2015, 1, 1))
    # horizon 2015: 'vala' resolved? 2008-11 + 60 months = 2013-11 <= 2015 ok
    # 'win' succeeded inside a short window -> positive in part b
    # 'censored' unresolved in part b -> dropped
    # 'test' censored at this horizon -> would empty the test split
    with pytest.raises(EmptySplit):
        make_splits(None, records, spec, epoch=dt.date(2007, 1, 1))
    records["test2"] = startup_rec("test2", "2014-05-01", "ipo",
                                   "2014-12-01")
    splits = make_splits(None, records, spec, epoch=dt.date(2007, 1, 1))
    val_ids = {s for s, _, _ in splits.validation}
    assert "win" in val_ids and "censored" not in val_ids
    assert all(lab == SUCCESS for s, _, lab in splits.validation
               if s == "win")


def test_split_spec_rejects_overlap():
    with pytest.raises(ConfigError):
        SplitSpec(train_range=(dt.date(2007, 1, 1), dt.date(2009, 1, 1)),
                  validation_range_a=(dt.date(2008, 10, 1),
                                      dt.date(2008, 12, 31)),
                  validation_range_b=(dt.date(2009, 1, 1),
                                      dt.date(2013, 12, 31)),
                  test_range=(dt.date(2014, 1, 1), dt.date(2014, 12, 31)),
                  horizon=dt.date(2019, 12, 31))


def test_splits_disjoint_property(rng):
    records = {}
    for i in range(60):
        year = 2007 + int(rng.integers(0, 9))
        month = int(rng.integers(1, 13))
        outcome = "ipo" if rng.uniform() < 0.5 else None
        odate = f"{year + 3}-01-01" if outcome else None
        records[f"s{i}"] = startup_rec(f"s{i}", f"{year}-{month:02d}-01",
                                       outcome, odate)
    try:
        splits = make_splits(None, records, split_spec(),
                             epoch=dt.date(2007, 1, 1))
    except EmptySplit:
        pytest.skip("random fixture emptied a window")
    ids = [{s for s, _, _ in split.__iter__()} if isinstance(split, list)
           else split for split in
           ({s for s, _, _ in splits.train},
            {s for s, _, _ in splits.validation},
            {s for s, _, _ in splits.test})]
    assert not (ids[0] & ids[1]) and not (ids[0] & ids[2]) \
        and not (ids[1] & ids[2])


# -- baselines -----------------------------------------------------------------------

def test_human_baseline_requires_second_rounds():
    records = {"s0": startup_rec("s0", "2014-01-01")}
    with pytest.raises(NoSecondRounds):
        human_investor_baseline([("s0", 84, FAILURE)], records)


def test_human_baseline_ratio():
    records = {}
    test_set = []
    for i in range(10):
        rec = startup_rec(f"s{i}", "2014-01-01",
                          "ipo" if i < 2 else None,
                          "2016-01-01" if i < 2 else None)
        rec.funding_rounds.append((90, "series_a", 5e6))
        records[f"s{i}"] = rec
        test_set.append((f"s{i}", 84, SUCCESS if i < 2 else FAILURE))
    # two of ten second-round start-ups succeed
    assert human_investor_baseline(test_set, records) == 0.2


def test_human_baseline_filter_oracle(rng):
    records = {}
    test_set = []
    for i in range(40):
        has_second = rng.uniform() < 0.6
        wins = rng.uniform() < 0.3
        rec = startup_rec(f"s{i}", "2014-01-01",
                          "acquired" if wins else None,
                          "2015-06-01" if wins else None)
        if has_second:
            rec.funding_rounds.append((90, "series_b", 1e7))
        records[f"s{i}"] = rec
        test_set.append((f"s{i}", 84, SUCCESS if wins else FAILURE))
    want_n = sum(1 for s, _, _ in test_set
                 if len(records[s].funding_rounds) >= 2)
    want_w = sum(1 for s, _, lab in test_set
                 if len(records[s].funding_rounds) >= 2
                 and lab == SUCCESS)
    if want_n == 0:
        pytest.skip("no second rounds drawn")
    assert human_investor_baseline(test_set, records) == want_w / want_n


# -- selected people / industry -----------------------------------------------------

def people_fixture():
    events = []
    persons = {}
    test_set = []
    for i in range(5):
        sid, pid = f"s{i}", f"p{i}"
        events += [NodeEvent(0, sid, NodeKind.STARTUP),
                   NodeEvent(0, pid, NodeKind.PERSON),
                   EdgeEvent(0, pid, sid, EdgeKind.EMPLOY)]
        persons[pid] = PersonRecord(
            node=pid, gender="female" if i < 2 else "male",
            degree=["bachelor", "master", "doctor", "other", "master"][i])
        test_set.append((sid, 0, SUCCESS if i == 0 else FAILURE))
    graph = build_initial_graph(events, cutoff_period=0)
    return graph, persons, test_set


def test_selected_people_empty_positives():
    graph, persons, test_set = people_fixture()
    out = selected_people_analysis([], graph, persons, test_set, 0)
    assert out.n_selected == 0
    assert out.n_test_people == 5
    assert out.test_gender["female"] == 0.4


def test_selected_people_manual_tally():
    graph, persons, test_set = people_fixture()
    positives = [pred("s0", prob=0.9, top="p0"),
                 pred("s1", prob=0.8, top="p1")]
    out = selected_people_analysis(positives, graph, persons, test_set, 0)
    assert out.n_selected == 2
    assert out.selected_gender == {"male": 0.0, "female": 1.0, "other": 0.0}
    assert out.selected_degree["bachelor"] == 0.5
    assert out.selected_degree["master"] == 0.5
    assert out.selected_mean_centrality == 1.0


def test_selected_people_subset_of_test_people():
    graph, persons, test_set = people_fixture()
    positives = [pred("s0", prob=0.9, top="p3")]
    out = selected_people_analysis(positives, graph, persons, test_set, 0)
    assert out.n_selected <= out.n_test_people


def test_industry_single_sector_matches_overall_precision():
    graph, persons, test_set = people_fixture()
    records = {f"s{i}": startup_rec(f"s{i}", "2007-02-01", sector="it")
               for i in range(5)}
    month = [pred(f"s{i}", prob=1 - i / 10, rank=i + 1) for i in range(5)]
    labels = {s: lab for s, _, lab in test_set}
    rows = industry_breakdown([month], labels, records, graph, test_set,
                              0, k=3)
    assert len(rows) == 1
    assert rows[0].sector == "it"
    assert rows[0].precision == precision_at_k(month, labels, 3)
    assert rows[0].total == 5 and rows[0].selected == 3


def test_industry_two_sectors_manual_group_by():
    graph, persons, test_set = people_fixture()
    records = {}
    for i in range(5):
        records[f"s{i}"] = startup_rec(f"s{i}", "2007-02-01",
                                       sector="it" if i < 3 else "energy")
    month = [pred(f"s{i}", prob=1 - i / 10, rank=i + 1) for i in range(5)]
    labels = {s: lab for s, _, lab in test_set}  # only s0 succeeds
    rows = {r.sector: r for r in industry_breakdown(
        [month], labels, records, graph, test_set, 0, k=5)}
    assert rows["it"].selected == 3 and rows["it"].total == 3
    assert rows["it"].precision == pytest.approx(1 / 3)
    assert rows["energy"].precision == 0.0
    assert rows["energy"].selected == 2


def test_industry_lcc_column_matches_structural_stats():
    graph, persons, test_set = people_fixture()
    records = {f"s{i}": startup_rec(f"s{i}", "2007-02-01", sector="it")
               for i in range(5)}
    month = [pred(f"s{i}", prob=0.5, rank=i + 1) for i in range(5)]
    labels = {s: lab for s, _, lab in test_set}
    rows = industry_breakdown([month], labels, records, graph, test_set,
                              0, k=5)
    stats = graph.structural_stats(0)
    # five disjoint pairs: every component has 2 of 10 nodes; each test
    # startup is in the LCC only if it belongs to the largest component
    want = sum(1 for s, _, _ in test_set
               if s in stats.lcc_membership) / 5
    assert rows[0].pct_in_lcc == want


# -- report round trip ----------------------------------------------------------------

def test_report_regeneration_is_idempotent(tmp_path, rng):
    graph, persons, test_set = people_fixture()
    records = {f"s{i}": startup_rec(f"s{i}", "2007-02-01", sector="it")
               for i in range(5)}
    records["s0"].funding_rounds.append((10, "series_a", 3e6))
    month = [pred(f"s{i}", period=0, prob=1 - i / 10, rank=i + 1,
                  top=f"p{i}") for i in range(5)]
    degree = degree_heuristic_scores(graph, [r.startup for r in month], 0)
    write_predictions(tmp_path / "predictions.tsv", month, degree)
    write_labels(tmp_path / "labels.tsv", test_set, records, graph, 0)
    write_people(tmp_path / "people.tsv", graph, persons, test_set, 0)

    report1 = report_from_exports(tmp_path / "predictions.tsv",
                                  tmp_path / "labels.tsv",
                                  tmp_path / "people.tsv", ks=(2, 3))
    report2 = report_from_exports(tmp_path / "predictions.tsv",
                                  tmp_path / "labels.tsv",
                                  tmp_path / "people.tsv", ks=(2, 3))
    assert report1.to_json() == report2.to_json()
    # exports round-trip exactly
    preds, degs = read_predictions(tmp_path / "predictions.tsv")
    assert preds == month
    assert degs == degree
    rows = read_labels(tmp_path / "labels.tsv")
    assert [r["startup"] for r in rows] == [f"s{i}" for i in range(5)]


def test_report_against_live_analysis_functions(tmp_path):
    # dual route: export-based aggregates equal the live-object ops
    graph, persons, test_set = people_fixture()
    records = {f"s{i}": startup_rec(f"s{i}", "2007-02-01", sector="it")
               for i in range(5)}
    month = [pred(f"s{i}", period=0, prob=1 - i / 10, rank=i + 1,
                  top=f"p{i}") for i in range(5)]
    labels = {s: lab for s, _, lab in test_set}
    degree = degree_heuristic_scores(graph, [r.startup for r in month], 0)
    write_predictions(tmp_path / "predictions.tsv", month, degree)
    write_labels(tmp_path / "labels.tsv", test_set, records, graph, 0)
    write_people(tmp_path / "people.tsv", graph, persons, test_set, 0)
    report = report_from_exports(tmp_path / "predictions.tsv",
                                 tmp_path / "labels.tsv",
                                 tmp_path / "people.tsv", ks=(3,))
    assert report.ap_at_k[3] == average_precision_at_k([month], labels, 3)
    live_rows = industry_breakdown([month], labels, records, graph,
                                   test_set, 0, k=3)
    assert [vars(r) for r in report.industry] == [vars(r)
                                                  for r in live_rows]
    positives = [r for r in month if r.probability > 0.5]
    live_people = selected_people_analysis(positives, graph, persons,
                                           test_set, 0)
    assert report.people.selected_gender == live_people.selected_gender
    assert report.people.selected_mean_centrality == \
        live_people.selected_mean_centrality
