"""Synthetic temporal VC-network generator with a planted success signal.

Structure targets: preferential attachment gives power-law person degrees,
an island mechanism controls the largest-connected-component share, a
7-sector industry mixture matches the documented shares, and round
progression follows the configured second-round rate. Success is logistic
in a planted score combining latent quality, backing-team connectivity,
founder education, industry, and island membership; the intercept is
bisected so the expected success rate hits the configured base rate at
any signal strength (signal 0 makes success independent of everything).

Structural events span months [0, months); outcomes and later funding
rounds are simulated through months + 60 so every cohort's 60-month
window can resolve (they appear in the records, not the graph).
"""

from __future__ import annotations

import datetime as _dt
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .attributes import SECTOR_SUBSECTORS
from .errors import InfeasibleConfig
from .records import DEGREES
from .timeutil import period_to_date

SUCCESS_WINDOW = 60

# default mix: IT/B2C/B2B/healthcare together hold 93.6% of start-ups
DEFAULT_INDUSTRY_MIX = {
    "it": 0.400, "b2c": 0.200, "b2b": 0.190, "healthcare": 0.146,
    "fs": 0.026, "mr": 0.020, "energy": 0.018,
}
# planted industry effect mirrors the reported success-rate ordering
INDUSTRY_EFFECT = {"healthcare": 0.5, "it": 0.25, "b2c": 0.0, "b2b": 0.0,
                   "fs": -0.3, "mr": -0.5, "energy": -0.5}
EDUCATION_SCORE = {"other": 0.0, "bachelor": 0.2, "master": 0.5,
                   "doctor": 1.0}
DEGREE_BASE_P = (0.194, 0.283, 0.112, 0.411)  # bachelor/master/doctor/other
FOUNDER_COUNT_P = (0.45, 0.40, 0.15)          # 1 / 2 / 3 founders
FEMALE_SHARE = 0.08
IPO_SHARE = 0.12


@dataclass
class GenConfig:
    n_startups: int = 5000
    n_persons: int = 6000
    months: int = 36
    pa_strength: float = 1.0
    target_lcc_fraction: float = 0.6656
    industry_mix: dict[str, float] = field(
        default_factory=lambda: dict(DEFAULT_INDUSTRY_MIX))
    base_success_rate: float = 0.1571
    signal_strength: float = 2.5
    second_round_rate: float = 0.6344
    outcome_window_months: int = SUCCESS_WINDOW
    seed: int = 0
    epoch: _dt.date = _dt.date(2010, 1, 1)

    def validate(self) -> None:
        if self.n_startups < 10 or self.n_persons < 10:
            raise InfeasibleConfig("need at least 10 start-ups and persons")
        if self.months < 2:
            raise InfeasibleConfig("need at least 2 months")
        if not 0.05 < self.target_lcc_fraction < 0.995:
            raise InfeasibleConfig("target LCC fraction out of range")
        if not 0.0 < self.base_success_rate < 1.0:
            raise InfeasibleConfig("base success rate out of (0, 1)")
        if not 0.0 < self.second_round_rate < 1.0:
            raise InfeasibleConfig("second round rate out of (0, 1)")
        if self.signal_strength < 0 or self.pa_strength < 0:
            raise InfeasibleConfig("strengths must be non-negative")
        if self.outcome_window_months < 1:
            raise InfeasibleConfig("outcome window must be positive")
        total = sum(self.industry_mix.values())
        if abs(total - 1.0) > 1e-6:
            raise InfeasibleConfig(f"industry mix sums to {total}")


@dataclass
class StartupTruth:
    quality: float
    planted_score: float
    success_prob: float
    success: bool
    island: bool
    team_degree: float
    sector: str
    education_best: float


@dataclass
class GroundTruth:
    by_startup: dict[str, StartupTruth] = field(default_factory=dict)


def _solve_intercept(raw: np.ndarray, target_mean: float) -> float:
    """Bisect c so mean(sigmoid(c + raw)) == target_mean."""
    lo, hi = -30.0, 30.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        mean = float(np.mean(1.0 / (1.0 + np.exp(-(mid + raw)))))
        if mean < target_mean:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _island_probability(cfg: GenConfig) -> float:
    """Island share for the LCC target. Island clusters carry ~1.8x their
    start-up share in nodes (more fresh persons per start-up than the
    connected mass), so the non-LCC node fraction is ~1.8 * p_island;
    the factor was fitted on generated graphs at default density."""
    p = (1.0 - cfg.target_lcc_fraction) / 1.8
    if not 0.0 <= p <= 1.0:
        raise InfeasibleConfig("target LCC fraction unreachable")
    return p


class _PersonPool:
    """Sequential person allocation plus degree-weighted reuse."""

    def __init__(self, cfg: GenConfig, rng: np.random.Generator):
        self.cfg = cfg
        self.rng = rng
        self.next_id = 0
        self.ids: list[str] = []
        self.degree: list[int] = []
        self.reusable: list[int] = []   # indices eligible for PA reuse

    def fresh(self, reusable: bool) -> int:
        # the budget caps the reusable pool; island allocations may overrun
        # it slightly, otherwise islands would leak into the main component
        if reusable and self.next_id >= self.cfg.n_persons:
            return self.pick_existing(0.0)
        idx = self.next_id
        self.next_id += 1
        self.ids.append(f"u{idx:06d}")
        self.degree.append(0)
        if reusable:
            self.reusable.append(idx)
        return idx

    def pick_existing(self, tilt: float) -> int:
        """Preferential attachment over reusable persons; `tilt` bends the
        exponent so high-quality start-ups land better-connected people."""
        pool = self.reusable
        if not pool:
            return self.fresh(True)
        degs = np.array([self.degree[i] for i in pool], dtype=float)
        exponent = max(self.cfg.pa_strength * (1.0 + tilt), 0.0)
        weights = np.power(degs + 1.0, exponent)
        weights /= weights.sum()
        return pool[int(self.rng.choice(len(pool), p=weights))]

    def bump(self, idx: int) -> None:
        self.degree[idx] += 1


@dataclass
class SynthDataset:
    startups_rows: list[str]
    persons_rows: list[str]
    investment_rows: list[str]
    truth_rows: list[str]
    truth: GroundTruth

    def write(self, directory) -> dict[str, Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        paths = {}
        for name, header, rows in (
                ("startups.tsv", "company_id\tfounded\tlatitude\tlongitude"
                 "\tcountry\tindustry\toutcome_type\toutcome_date",
                 self.startups_rows),
                ("persons.tsv", "person_id\tgender\tdegree\tinstitute\t"
                 "graduated_year\taffiliations", self.persons_rows),
                ("investments.tsv", "deal_id\tdeal_type\tinvestors\t"
                 "deal_date\tamount\tcompany_id", self.investment_rows),
                ("truth.tsv", "startup\tquality\tplanted_score\t"
                 "success_prob\tsuccess\tisland\tteam_degree\tsector\t"
                 "education_best", self.truth_rows)):
            path = directory / name
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(header + "\n")
                for row in rows:
                    fh.write(row + "\n")
            paths[name] = path
        return paths


def generate(cfg: GenConfig) -> SynthDataset:
    """Deterministic synthesis of the three ingestion tables plus truth."""
    cfg.validate()
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 7741]))
    n = cfg.n_startups
    p_island = _island_probability(cfg)

    founded_month = np.sort(rng.integers(0, cfg.months, size=n))
    quality = rng.normal(size=n)
    island = rng.uniform(size=n) < p_island
    sectors = list(cfg.industry_mix)
    sector_idx = rng.choice(len(sectors), size=n,
                            p=np.array([cfg.industry_mix[s]
                                        for s in sectors]))

    pool = _PersonPool(cfg, rng)
    person_gender: dict[int, str] = {}
    person_degree_cat: dict[int, str] = {}
    person_affil: dict[int, list[tuple[str, str]]] = {}

    def ensure_attrs(idx: int, q: float, signal: float) -> None:
        if idx in person_gender:
            return
        person_gender[idx] = "female" \
            if rng.uniform() < FEMALE_SHARE else "male"
        base = np.log(np.array(DEGREE_BASE_P))
        scores = np.array([EDUCATION_SCORE[d] for d in DEGREES])
        logits = base + 0.5 * signal * q * scores
        probs = np.exp(logits - logits.max())
        probs /= probs.sum()
        person_degree_cat[idx] = DEGREES[int(rng.choice(4, p=probs))]

    startups_rows = []
    investment_rows = []
    deal_counter = 0
    team_degree = np.zeros(n)
    edu_best = np.zeros(n)
    first_funding_month = np.zeros(n, dtype=int)
    rounds_by_startup: dict[int, list] = {}

    for i in range(n):
        cid = f"c{i:06d}"
        month = int(founded_month[i])
        q = float(quality[i])
        n_founders = 1 + int(rng.choice(3, p=np.array(FOUNDER_COUNT_P)))
        founders = []
        for _ in range(n_founders):
            if island[i]:
                idx = pool.fresh(reusable=False)
            elif rng.uniform() < 0.55:
                idx = pool.fresh(reusable=True)
            else:
                idx = pool.pick_existing(
                    0.3 * cfg.signal_strength * float(np.tanh(q)))
            ensure_attrs(idx, q, cfg.signal_strength)
            founders.append(idx)
        day = int(rng.integers(1, 28))
        founded_date = period_to_date(month, cfg.epoch, day)
        for idx in founders:
            person_affil.setdefault(idx, []).append(
                (cid, founded_date.isoformat()))

        # funding rounds: first one inside the structural window, later
        # ones wherever the progression lands (records only past the end)
        delay = int(rng.integers(0, 5))
        t_round = min(month + delay, cfg.months - 1)
        first_funding_month[i] = t_round
        rounds = []
        round_no = 0
        while True:
            n_inv = 1 + min(int(rng.pareto(2.5)), 9)
            investors = []
            for _ in range(n_inv):
                if island[i]:
                    idx = pool.fresh(reusable=False)
                elif rng.uniform() < 0.30:
                    idx = pool.fresh(reusable=True)
                else:
                    idx = pool.pick_existing(
                        0.3 * cfg.signal_strength * float(np.tanh(q)))
                ensure_attrs(idx, q, cfg.signal_strength)
                if idx not in investors:
                    investors.append(idx)
            amount = float(np.exp(rng.normal(
                13.0 + 0.5 * cfg.signal_strength * q, 1.0)))
            deal_type = ("seed" if round_no == 0 and rng.uniform() < 0.7
                         else "angel" if round_no == 0
                         else ("series_a", "series_b", "series_c",
                               "later_stage_vc")[min(round_no - 1, 3)])
            rounds.append((t_round, deal_type, investors, amount))
            round_no += 1
            keep_prob = cfg.second_round_rate * (0.75 ** (round_no - 1))
            if round_no >= 5 or rng.uniform() > keep_prob:
                break
            t_round = t_round + 3 + int(rng.integers(0, 16))
            if t_round >= cfg.months + cfg.outcome_window_months:
                break
        rounds_by_startup[i] = rounds

        first = rounds[0]
        backing = set(founders) | set(first[2])
        team_degree[i] = float(np.mean([pool.degree[idx]
                                        for idx in backing]))
        edu_best[i] = max(EDUCATION_SCORE[person_degree_cat[idx]]
                          for idx in backing)
        # degrees bump after the snapshot so team_degree is pre-deal
        for t_r, _, investors, _ in rounds:
            if t_r < cfg.months:
                for idx in investors:
                    pool.bump(idx)
        for idx in founders:
            pool.bump(idx)

    # planted score: weights favor channels observable at prediction time
    # (attributes, funding amount, founder education, industry), with the
    # network channels (backing-team degree, connectedness) secondary
    z_deg = np.log1p(team_degree)
    z_deg = (z_deg - z_deg.mean()) / max(z_deg.std(), 1e-9)
    ind_effect = np.array([INDUSTRY_EFFECT[sectors[k]]
                           for k in sector_idx])
    raw = (quality + 0.3 * z_deg + 0.7 * edu_best + 0.5 * ind_effect
           + 0.3 * (~island).astype(float))
    raw = (raw - raw.mean()) / max(raw.std(), 1e-9)
    scaled = cfg.signal_strength * raw
    intercept = _solve_intercept(scaled, cfg.base_success_rate)
    probs = 1.0 / (1.0 + np.exp(-(intercept + scaled)))
    success = rng.uniform(size=n) < probs

    truth = GroundTruth()
    truth_rows = []
    for i in range(n):
        cid = f"c{i:06d}"
        sector = sectors[sector_idx[i]]
        subsectors = SECTOR_SUBSECTORS[sector]
        subsector = subsectors[int(rng.integers(0, len(subsectors)))]
        lat = float(rng.uniform(25.0, 49.0))
        lon = float(rng.uniform(-124.0, -67.0))
        outcome_type = ""
        outcome_date = ""
        if success[i]:
            outcome_type = "ipo" if rng.uniform() < IPO_SHARE \
                else "acquired"
            shift = 1 + int(rng.integers(0, cfg.outcome_window_months))
            outcome_date = period_to_date(
                int(first_funding_month[i]) + shift, cfg.epoch,
                int(rng.integers(1, 28))).isoformat()
        founded_date = period_to_date(int(founded_month[i]), cfg.epoch,
                                      1).isoformat()
        startups_rows.append(
            f"{cid}\t{founded_date}\t{lat:.6f}\t{lon:.6f}\tUS\t"
            f"{sector} > {subsector}\t{outcome_type or 'none'}\t"
            f"{outcome_date}")
        st = StartupTruth(quality=float(quality[i]),
                          planted_score=float(raw[i]),
                          success_prob=float(probs[i]),
                          success=bool(success[i]),
                          island=bool(island[i]),
                          team_degree=float(team_degree[i]),
                          sector=sector,
                          education_best=float(edu_best[i]))
        truth.by_startup[cid] = st
        truth_rows.append(
            f"{cid}\t{st.quality!r}\t{st.planted_score!r}\t"
            f"{st.success_prob!r}\t{int(st.success)}\t{int(st.island)}\t"
            f"{st.team_degree!r}\t{sector}\t{st.education_best!r}")

        for t_r, deal_type, investors, amount in rounds_by_startup[i]:
            if t_r >= cfg.months + cfg.outcome_window_months:
                continue
            deal_date = period_to_date(t_r, cfg.epoch,
                                       int(rng.integers(1, 28)))
            names = ";".join(pool.ids[idx] for idx in investors)
            investment_rows.append(
                f"d{deal_counter:07d}\t{deal_type}\t{names}\t"
                f"{deal_date.isoformat()}\t{amount:.2f}\t{cid}")
            deal_counter += 1

    persons_rows = []
    for idx in range(pool.next_id):
        affil = ";".join(f"{cid}@{date}"
                         for cid, date in person_affil.get(idx, []))
        grad_year = 1970 + int(rng.integers(0, 40))
        institute = f"inst_{int(rng.integers(0, 200)):03d}" \
            if rng.uniform() < 0.7 else ""
        persons_rows.append(
            f"{pool.ids[idx]}\t{person_gender.get(idx, 'other')}\t"
            f"{person_degree_cat.get(idx, 'other')}\t{institute}\t"
            f"{grad_year}\t{affil}")

    return SynthDataset(startups_rows=startups_rows,
                        persons_rows=persons_rows,
                        investment_rows=investment_rows,
                        truth_rows=truth_rows, truth=truth)


# -- audits -------------------------------------------------------------------------

@dataclass
class SignalAudit:
    overall_rate: float
    rate_by_degree_quintile: list[float]
    rate_by_education: dict[str, float]
    rate_island_vs_connected: tuple[float, float]


def planted_signal_audit(truth: GroundTruth, events=None) -> SignalAudit:
    """Empirical success rates along the planted observables.

    A pure function of (events, truth): with an event stream the degree
    quintiles are recomputed from the observable graph (backing-team mean
    degree as of each start-up's first funding month); without one the
    generator's recorded pre-deal team degree is used.
    """
    rows = [truth.by_startup[c] for c in sorted(truth.by_startup)]
    succ = np.array([r.success for r in rows], dtype=float)
    if events is not None:
        observed = _observed_team_degree(events)
        deg = np.array([observed.get(c, 0.0)
                        for c in sorted(truth.by_startup)])
    else:
        deg = np.array([r.team_degree for r in rows])
    edu = np.array([r.education_best for r in rows])
    isl = np.array([r.island for r in rows], dtype=bool)

    order = np.argsort(deg, kind="stable")
    quintiles = np.array_split(order, 5)
    by_quintile = [float(succ[qq].mean()) if len(qq) else 0.0
                   for qq in quintiles]
    by_edu = {}
    for name, score in EDUCATION_SCORE.items():
        mask = edu == score
        by_edu[name] = float(succ[mask].mean()) if mask.any() else 0.0
    island_rate = float(succ[isl].mean()) if isl.any() else 0.0
    conn_rate = float(succ[~isl].mean()) if (~isl).any() else 0.0
    return SignalAudit(overall_rate=float(succ.mean()),
                       rate_by_degree_quintile=by_quintile,
                       rate_by_education=by_edu,
                       rate_island_vs_connected=(island_rate, conn_rate))


def _observed_team_degree(events) -> dict[str, float]:
    """Backing-team mean degree per start-up at its first invest month,
    computed from the event stream alone."""
    from .graph import EdgeEvent, EdgeKind, build_temporal_graph

    last = max((ev.period for ev in events), default=0)
    graph = build_temporal_graph(events, 0, last)
    first_invest: dict[str, int] = {}
    for ev in events:
        if isinstance(ev, EdgeEvent) and ev.kind is EdgeKind.INVEST:
            cur = first_invest.get(ev.startup)
            if cur is None or ev.period < cur:
                first_invest[ev.startup] = ev.period
    out = {}
    for startup, period in first_invest.items():
        team = graph.neighbors_asof(startup, period)
        if team:
            out[startup] = float(np.mean([graph.degree_asof(p, period)
                                          for p in team]))
        else:
            out[startup] = 0.0
    return out


def _hurwitz_zeta(a: float, q: float, terms: int = 60000) -> float:
    """zeta(a, q) by direct summation with an Euler-Maclaurin tail."""
    k = np.arange(q, q + terms, dtype=float)
    head = float(np.sum(k ** -a))
    n = float(q + terms)
    tail = n ** (1.0 - a) / (a - 1.0) + 0.5 * n ** -a \
        + a * n ** (-a - 1.0) / 12.0
    return head + tail


def fit_power_law_exponent(degrees, d_min: int = 2) -> float:
    """Discrete power-law tail exponent by exact maximum likelihood.

    Maximizes sum(-a log d - log zeta(a, d_min)) over degrees >= d_min;
    the stationarity condition is bisected on a in (1, 8]."""
    tail = np.asarray([d for d in degrees if d >= d_min], dtype=float)
    if len(tail) < 10:
        raise ValueError("tail too small for a power-law fit")
    mean_log = float(np.log(tail).mean())

    def score(a: float) -> float:
        h = 1e-6
        dlogz = (np.log(_hurwitz_zeta(a + h, d_min))
                 - np.log(_hurwitz_zeta(a - h, d_min))) / (2 * h)
        return -dlogz - mean_log   # zero at the MLE

    lo, hi = 1.05, 8.0
    if score(lo) < 0:
        return lo
    if score(hi) > 0:
        return hi
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if score(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
