"""Acceptance suite: one test per criterion, one pass/fail line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines live.
The planted-signal recovery test (criterion 6) trains six full pipelines
and dominates the suite's runtime.
"""

import json
import math
import time

import numpy as np
import pytest

from vcgst import autodiff as ad
from vcgst import pipeline
from vcgst.attributes import AttributeScaler, encode_startup
from vcgst.cli import main as cli_main
from vcgst.config import load_config
from vcgst.embeddings import EmbeddingTable
from vcgst.evaluation import average_precision_at_k, precision_at_k
from vcgst.gradcheck import check_gradients
from vcgst.graph import NodeKind, build_temporal_graph
from vcgst.gst import GstStack, gst_forward
from vcgst.ingest import load_dataset
from vcgst.predictor import (FAILURE, SUCCESS, MlpParams, PredictionRecord,
                             PredictorModel, build_batch, fused_forward,
                             predict, predict_batch)
from vcgst.records import PersonRecord, StartUpRecord
from vcgst.sequence import EmbeddingSequence, SequenceParams, encode
from vcgst.synthgen import (GenConfig, fit_power_law_exponent, generate,
                            planted_signal_audit)
from vcgst.trainer import (DecoderParams, TrainConfig, base_increment,
                           lp_score, nc_score, period_finetune,
                           run_all_periods)


def announce(number: int, ok: bool, detail: str) -> None:
    status = "PASS" if ok else "FAIL"
    print(f"\n[ACCEPTANCE {number}] {status} - {detail}")
    assert ok, f"criterion {number}: {detail}"


def sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def oracle_gst(state, neighbors, targets, stack):
    """Straight-line per-node, per-head transcription of the layer math."""
    d, heads = stack.d, stack.heads
    dh = d // heads
    inv = 1.0 / math.sqrt(d if stack.scale_full_width else dh)
    cur = {n: np.asarray(v, dtype=float).copy() for n, v in state.items()}
    for layer in stack.layers:
        wk, wq, wv = layer.W_K.data, layer.W_Q.data, layer.W_V.data
        wm, wa = layer.W_info.data, layer.W_A.data
        new = {}
        for t in targets:
            h_t = cur[t]
            info = np.zeros(d)
            nbrs = list(neighbors.get(t, ()))
            if nbrs:
                q = wq @ h_t
                msgs = {s: np.zeros(d) for s in nbrs}
                for i in range(heads):
                    sl = slice(i * dh, (i + 1) * dh)
                    logits = np.array([(wk @ cur[s])[sl] @ q[sl] * inv
                                       for s in nbrs])
                    ex = np.exp(logits - logits.max())
                    p = ex / ex.sum()
                    for j, s in enumerate(nbrs):
                        msgs[s][sl] = p[j] * (wv @ cur[s])[sl]
                for s in nbrs:
                    info += wm @ msgs[s]
            new[t] = wa @ np.concatenate([h_t, info]) + h_t
        cur.update(new)
    return {t: cur[t] for t in targets}


def random_bipartite(rng, n_people=5, n_startups=4, d=8):
    ids = [f"p{i}" for i in range(n_people)] + \
        [f"s{j}" for j in range(n_startups)]
    emb = {n: rng.normal(size=d) for n in ids}
    neighbors = {n: [] for n in ids}
    for i in range(n_people):
        for j in range(n_startups):
            if rng.uniform() < 0.5:
                neighbors[f"p{i}"].append(f"s{j}")
                neighbors[f"s{j}"].append(f"p{i}")
    return ids, emb, neighbors


# -- 1. gradient correctness --------------------------------------------------------

def test_acceptance_1_gradient_correctness():
    t0 = time.time()
    failures = []

    # attention stack (both stacks share this math) + embeddings
    rng = np.random.default_rng(101)
    ids, emb, neighbors = random_bipartite(rng, d=8)
    stack = GstStack.init(rng, 2, 8, 2, prefix="acc1")
    from vcgst.gst import build_workspace, stack_apply
    ws = build_workspace(sorted(ids), lambda n: neighbors.get(n, ()))
    h = ad.Parameter(np.stack([emb[n] for n in ws.target_ids]), "h")
    w = rng.normal(size=(len(ids), 8))

    def gst_loss():
        out, _ = stack_apply(stack, h, ad.constant(np.zeros((0, 8))), ws)
        return ad.sum_all(ad.mul(out, ad.constant(w)))

    ok, worst = check_gradients(gst_loss, stack.parameters() + [h])
    if not ok:
        failures.append(("gst", worst))

    # link-prediction / node-classification decoders
    from vcgst.trainer import lp_scores_batch, nc_scores_batch
    dec = DecoderParams.init(rng, 8)
    u = ad.Parameter(rng.normal(size=(6, 8)), "u")
    v = ad.constant(rng.normal(size=(6, 8)))
    y = (rng.uniform(size=(6, 1)) < 0.5).astype(float)

    def dec_loss():
        lp = ad.bce_loss(lp_scores_batch(u, v, dec), y)
        nc = ad.bce_loss(nc_scores_batch(u, dec), 1.0 - y)
        return ad.add(ad.scale(lp, 0.5), ad.scale(nc, 0.5))

    ok, worst = check_gradients(dec_loss, dec.parameters() + [u])
    if not ok:
        failures.append(("decoders", worst))

    # recurrent cell
    seq = SequenceParams.init(rng, 6, 6, prefix="acc1seq")
    from vcgst.sequence import encode_batch
    xs = [ad.constant(rng.normal(size=(3, 6))) for _ in range(4)]
    masks = [np.array([1.0, 1.0, 1.0]), np.array([0.0, 1.0, 1.0]),
             np.array([1.0, 0.0, 1.0]), np.array([1.0, 1.0, 1.0])]
    wseq = rng.normal(size=(3, 6))

    def seq_loss():
        return ad.sum_all(ad.mul(encode_batch(seq, xs, masks),
                                 ad.constant(wseq)))

    ok, worst = check_gradients(seq_loss, seq.parameters())
    if not ok:
        failures.append(("recurrent", worst))

    # fusion stack + projections + MLP, end to end
    graph, tables, startups, persons, scaler, model = _tiny_predictor(rng)
    batch = build_batch([("s0", 0), ("s1", 0)], graph, tables, startups,
                        persons, scaler, 2, model.d,
                        labels=[SUCCESS, FAILURE])

    def clf_loss():
        z, _ = fused_forward(model, batch)
        return ad.bce_loss(predict_batch(model.mlp, z), batch.labels)

    ok, worst = check_gradients(clf_loss, model.parameters(),
                                max_entries=60,
                                rng=np.random.default_rng(0))
    if not ok:
        failures.append(("fusion+mlp", worst))

    elapsed = time.time() - t0
    announce(1, not failures and elapsed < 120,
             f"finite-difference checks on all trainable modules "
             f"({elapsed:.1f}s < 120s){failures or ''}")


def _tiny_predictor(rng):
    from vcgst.graph import EdgeEvent, NodeEvent, EdgeKind, \
        build_initial_graph
    import datetime as dt
    events = []
    startups = {}
    persons = {}
    for i in range(3):
        sid, pid = f"s{i}", f"p{i}"
        events += [NodeEvent(0, sid, NodeKind.STARTUP),
                   NodeEvent(0, pid, NodeKind.PERSON),
                   EdgeEvent(0, pid, sid, EdgeKind.EMPLOY)]
        rec = StartUpRecord(node=sid, founded=dt.date(2010, 1, 1),
                            industry=("it", "software"), latitude=1.0,
                            longitude=2.0)
        rec.first_funding_date = dt.date(2010, 3, 1)
        rec.first_funding_period = 0
        rec.funding_rounds = [(0, "seed", 1e6)]
        startups[sid] = rec
        persons[pid] = PersonRecord(node=pid, gender="male",
                                    degree="master")
    graph = build_initial_graph(events, 0)
    table = EmbeddingTable(0, 8)
    table.add_rows(sorted(graph.node_kind),
                   rng.normal(size=(len(graph.node_kind), 8)))
    scaler = AttributeScaler.fit(list(startups.values()))
    model = PredictorModel(d=8, d_seq=8, heads=2, layers=1, hidden=(8, 4),
                           rng=rng)
    return graph, {0: table}, startups, persons, scaler, model


# -- 2. equation transcription oracles ------------------------------------------------

def test_acceptance_2_transcription_oracles():
    worst = 0.0
    for trial in range(20):
        rng = np.random.default_rng(200 + trial)
        d = 8
        heads = int(rng.choice([1, 2, 4]))
        layers = int(rng.integers(1, 4))

        # gst_forward against the straight-line oracle
        ids, emb, neighbors = random_bipartite(rng, d=d)
        stack = GstStack.init(rng, layers, d, heads, prefix=f"t{trial}")
        targets = sorted(rng.choice(ids, size=5, replace=False))
        updated, _ = gst_forward(stack, emb, targets,
                                 lambda n: neighbors.get(n, ()))
        expected = oracle_gst(emb, neighbors, targets, stack)
        for node in targets:
            worst = max(worst,
                        float(np.max(np.abs(updated[node]
                                            - expected[node]))))

        # lp / nc decoders
        dec = DecoderParams.init(rng, d)
        cur = EmbeddingTable(1, d)
        cur.add_rows(["u", "v"], rng.normal(size=(2, d)))
        prev = EmbeddingTable(0, d)
        prev.add_rows(["u", "v"], rng.normal(size=(2, d)))
        got = lp_score(cur, prev, "u", "v", dec)
        left = sigmoid(dec.W_L.data @ cur.row("u") + dec.b_LP.data[0])
        right = sigmoid(dec.W_L.data @ prev.row("v") + dec.b_LP.data[0])
        worst = max(worst, abs(got - sigmoid(left @ right)))
        got = nc_score(cur, "v", dec)
        want = sigmoid(dec.W_C.data[0] @ cur.row("v")
                       + dec.b_NC.data[0, 0])
        worst = max(worst, abs(got - want))

        # recurrent encoding
        seq_p = SequenceParams.init(rng, d, d, prefix=f"s{trial}")
        xs = [rng.normal(size=d) for _ in range(4)]
        got = encode(seq_p, EmbeddingSequence("s", [x.copy() for x in xs],
                                              [True] * 4))
        hh = np.zeros(d)
        cc = np.zeros(d)
        for x in xs:
            g = {}
            for gate in ("input", "forget", "output", "cell"):
                pre = (seq_p.w[gate].data @ x + seq_p.u[gate].data @ hh
                       + seq_p.b[gate].data[0])
                g[gate] = np.tanh(pre) if gate == "cell" else sigmoid(pre)
            cc = g["forget"] * cc + g["input"] * g["cell"]
            hh = g["output"] * np.tanh(cc)
        worst = max(worst, float(np.max(np.abs(got - hh))))

        # fusion over a star ego net
        from vcgst.predictor import fuse
        from vcgst.graph import (EdgeEvent, NodeEvent, EdgeKind,
                                 build_initial_graph)
        n_persons = int(rng.integers(0, 4))
        events = [NodeEvent(0, "sx", NodeKind.STARTUP)]
        for i in range(n_persons):
            events += [NodeEvent(0, f"px{i}", NodeKind.PERSON),
                       EdgeEvent(0, f"px{i}", "sx", EdgeKind.EMPLOY)]
        graph = build_initial_graph(events, 0)
        from vcgst.attributes import PERSON_DIM, STARTUP_DIM
        attr = {"sx": rng.normal(size=STARTUP_DIM)}
        for i in range(n_persons):
            attr[f"px{i}"] = rng.normal(size=PERSON_DIM)
        seqs = {"sx": rng.normal(size=d)}
        proj_s = rng.normal(size=(d, STARTUP_DIM + d))
        proj_p = rng.normal(size=(d, PERSON_DIM + d))
        gst2 = GstStack.init(rng, layers, d, heads, prefix=f"f{trial}")
        out, _ = fuse(gst2, graph, 0, "sx", attr, seqs, proj_s, proj_p)
        feats = {"sx": proj_s @ np.concatenate([attr["sx"], seqs["sx"]])}
        nbrs = {"sx": [f"px{i}" for i in range(n_persons)]}
        for i in range(n_persons):
            feats[f"px{i}"] = proj_p @ np.concatenate(
                [attr[f"px{i}"], np.zeros(d)])
            nbrs[f"px{i}"] = ["sx"]
        expected = oracle_gst(feats, nbrs,
                              ["sx"] + [f"px{i}"
                                        for i in range(n_persons)], gst2)
        worst = max(worst, float(np.max(np.abs(out - expected["sx"]))))

        # MLP probability
        mlp = MlpParams.init(rng, d)
        z = rng.normal(size=d)
        got = predict(mlp, z)
        h1 = np.tanh(mlp.W[0].data @ z + mlp.b[0].data[0])
        h2 = np.tanh(mlp.W[1].data @ h1 + mlp.b[1].data[0])
        want = sigmoid(mlp.W[2].data @ h2 + mlp.b[2].data[0])[0]
        worst = max(worst, abs(got - want))

    announce(2, worst < 1e-10,
             f"20 randomized instances per operation, worst deviation "
             f"{worst:.2e} < 1e-10")


# -- 3. incremental locality -----------------------------------------------------------

def test_acceptance_3_incremental_locality(tmp_path):
    cfg = GenConfig(n_startups=185, n_persons=400, months=18, seed=5,
                    outcome_window_months=12)
    ds = generate(cfg)
    ds.write(tmp_path)
    data = load_dataset(tmp_path, epoch=cfg.epoch)
    graph = build_temporal_graph(data.events, 0, cfg.months - 1)
    n_nodes = len(graph.node_kind)
    assert 450 <= n_nodes <= 620, n_nodes

    rng = np.random.default_rng(6)
    stack = GstStack.init(rng, 3, 16, 4)
    dec = DecoderParams.init(rng, 16)
    tcfg = TrainConfig(epochs=2, n_hops=3, seed=6)
    empty = EmbeddingTable(-1, 16)
    table, _ = period_finetune(graph, 0, empty, stack, dec, tcfg,
                               inc=base_increment(graph))

    checked = 0
    ok = True
    for period in range(1, graph.max_period + 1):
        inc = graph.increment_view(period)
        prev = table
        table, _ = period_finetune(graph, period, prev, stack, dec, tcfg)
        if inc.is_empty():
            continue
        # independent BFS oracle for the 3-hop neighborhood
        seeds = {n for n, _ in inc.new_nodes}
        for e in inc.new_edges:
            seeds.update((e.person, e.startup))
        reach = set(seeds)
        frontier = set(seeds)
        for _ in range(3):
            nxt = set()
            for node in frontier:
                nxt.update(graph.neighbors_asof(node, period))
            frontier = nxt - reach
            reach |= frontier
        for node in prev.index:
            if node in reach:
                continue
            checked += 1
            if not np.array_equal(table.row(node), prev.row(node)):
                ok = False
    announce(3, ok and checked > 0,
             f"{n_nodes}-node graph, 3-layer stack: {checked} beyond-3-hop "
             f"row comparisons all bit-identical")


# -- 4. metric oracle ------------------------------------------------------------------

def test_acceptance_4_metric_oracle():
    rng = np.random.default_rng(400)
    worst = 0.0
    for trial in range(1000):
        n_months = int(rng.integers(1, 13))
        k = int(rng.integers(1, 60))
        monthly = []
        labels = {}
        per_month = []
        for m in range(n_months):
            n = int(rng.integers(0, 40))
            month = []
            labs = []
            for i in range(n):
                name = f"t{trial}m{m}i{i}"
                lab = int(rng.uniform() < 0.3)
                labels[name] = SUCCESS if lab else FAILURE
                month.append(PredictionRecord(name, m, 1.0 - i * 1e-4,
                                              i + 1, None))
                labs.append(lab)
            monthly.append(month)
            if n:
                per_month.append(sum(labs[:min(k, n)]) / min(k, n))
        from vcgst.errors import NoEvaluableMonths
        if not per_month:
            with pytest.raises(NoEvaluableMonths):
                average_precision_at_k(monthly, labels, k)
            continue
        got = average_precision_at_k(monthly, labels, k)
        want = sum(per_month) / len(per_month)
        worst = max(worst, abs(got - want))
        for month in monthly:
            p = precision_at_k(month, labels, k)
            if month:
                n = len(month)
                brute = sum(labels[r.startup] == SUCCESS
                            for r in month[:min(k, n)]) / min(k, n)
                worst = max(worst, abs(p - brute))
    announce(4, worst < 1e-12,
             f"1000 randomized fixtures incl. 12-month averaging, worst "
             f"deviation {worst:.2e} < 1e-12")


# -- 5. temporal hygiene -----------------------------------------------------------------

def test_acceptance_5_temporal_hygiene(tmp_path):
    out = tmp_path / "audit"
    code = cli_main([
        "--set", "gen.n_startups=300", "--set", "gen.n_persons=500",
        "--set", "gen.months=30", "--set", "model.epochs=2",
        "--set", "model.d=16", "--set", "model.heads=2",
        "--set", "model.gst_layers=2", "--set", "model.d_seq=16",
        "--set", "model.mlp_hidden=[16,8]",
        "--set", "model.classifier_epochs=20", "--set", "model.patience=8",
        "--set", "model.lookback=4",
        "--seed", "9", "--out", str(out), "audit-leakage"])
    blob = json.loads((out / "leakage_audit.json").read_text())
    months_ok = all(row["identical"] for row in blob["months"])
    announce(5, code == 0 and blob["identical"] and months_ok
             and len(blob["months"]) == 12,
             f"audit-leakage: {len(blob['months'])} test months "
             f"byte-identical under truncation")


# -- 6. planted-signal recovery ------------------------------------------------------------

def test_acceptance_6_planted_signal_recovery(tmp_path):
    t0 = time.time()
    overrides = ["model.epochs=8"]
    signal = []
    for seed in (0, 1, 2):
        cfg = load_config(overrides=overrides, seed=seed,
                          out=str(tmp_path / f"sig{seed}"))
        artifacts = pipeline.run_pipeline(cfg)
        report = json.loads(artifacts["report"].read_text())
        signal.append(report["ap_at_k"]["10"])
    null = []
    for seed in (0, 1, 2):
        cfg = load_config(overrides=overrides
                          + ["gen.signal_strength=0.0"], seed=seed,
                          out=str(tmp_path / f"null{seed}"))
        artifacts = pipeline.run_pipeline(cfg)
        report = json.loads(artifacts["report"].read_text())
        null.append(report["ap_at_k"]["10"])
    elapsed = time.time() - t0

    base = 0.1571
    signal_mean = sum(signal) / len(signal)
    null_mean = sum(null) / len(null)
    # binomial std of the mean AP@10 over 12 months x 3 seeds of 10 picks
    sd = math.sqrt(base * (1 - base) / 10 / 36)
    signal_ok = signal_mean >= 2 * base
    null_ok = abs(null_mean - base) <= 3 * sd
    announce(6, signal_ok and null_ok and elapsed < 1800,
             f"signal AP@10 mean {signal_mean:.4f} >= {2 * base:.4f}; "
             f"null mean {null_mean:.4f} within {base:.4f} +/- "
             f"{3 * sd:.4f}; runtime {elapsed / 60:.1f} min < 30 min")


# -- 7. null / identity suite -----------------------------------------------------------------

def test_acceptance_7_null_identity():
    rng = np.random.default_rng(700)
    details = []

    # zero-parameter stack is the identity
    ids, emb, neighbors = random_bipartite(rng, d=8)
    stack = GstStack.zeros(3, 8, 4)
    updated, _ = gst_forward(stack, emb, sorted(ids),
                             lambda n: neighbors.get(n, ()))
    identity_ok = all(np.array_equal(updated[n], emb[n]) for n in ids)
    details.append(f"zero-weight identity {identity_ok}")

    # singleton neighbor attention is exactly 1.0 in every head
    stack = GstStack.init(rng, 1, 8, 4)
    _, records = gst_forward(stack, {"s": emb["s0"], "p": emb["p0"]},
                             ["s"], lambda n: ["p"],
                             record_attention=True)
    singleton_ok = len(records) == 4 and \
        all(r.score == 1.0 for r in records)
    details.append(f"singleton attention {singleton_ok}")

    # softmax rows sum to one
    x = ad.constant(rng.normal(scale=10, size=(50, 9)))
    rows = ad.rowwise_softmax(x).data.sum(axis=1)
    softmax_ok = bool(np.all(np.abs(rows - 1.0) < 1e-6))
    stack2 = GstStack.init(rng, 2, 8, 2)
    ids2, emb2, neighbors2 = random_bipartite(rng, d=8)
    _, recs = gst_forward(stack2, emb2, sorted(ids2),
                          lambda n: neighbors2.get(n, ()),
                          record_attention=True)
    sums: dict = {}
    for r in recs:
        sums[(r.target, r.layer, r.head)] = \
            sums.get((r.target, r.layer, r.head), 0.0) + r.score
    softmax_ok = softmax_ok and \
        all(abs(v - 1.0) < 1e-6 for v in sums.values())
    details.append(f"softmax sums {softmax_ok}")

    # beta boundaries silence the other head's gradients
    from vcgst.graph import (Edge, EdgeEvent, EdgeKind, GraphIncrement,
                             NodeEvent, build_initial_graph)
    events = [NodeEvent(0, "p1", NodeKind.PERSON),
              NodeEvent(0, "p2", NodeKind.PERSON),
              NodeEvent(0, "s1", NodeKind.STARTUP),
              NodeEvent(0, "s2", NodeKind.STARTUP),
              EdgeEvent(0, "p1", "s1", EdgeKind.INVEST)]
    beta_ok = True
    for beta, frozen_param in ((1.0, "W_C"), (0.0, "W_L")):
        graph = build_initial_graph(events, 0)
        graph.apply_increment(GraphIncrement(
            period=1, new_edges=[Edge("p2", "s2", EdgeKind.INVEST, 1)]))
        stack = GstStack.init(np.random.default_rng(7), 1, 8, 2)
        dec = DecoderParams.init(np.random.default_rng(8), 8)
        before = getattr(dec, frozen_param).data.copy()
        prev = EmbeddingTable(0, 8)
        prev.add_rows(sorted(graph.node_kind),
                      np.random.default_rng(9).normal(
                          size=(len(graph.node_kind), 8)))
        period_finetune(graph, 1, prev, stack, dec,
                        TrainConfig(epochs=5, n_hops=1, beta=beta))
        beta_ok = beta_ok and np.array_equal(
            getattr(dec, frozen_param).data, before)
    details.append(f"beta boundary freezes {beta_ok}")

    announce(7, identity_ok and singleton_ok and softmax_ok and beta_ok,
             "; ".join(details))


# -- 8. determinism -----------------------------------------------------------------------------

def test_acceptance_8_determinism(tmp_path):
    overrides = [
        "gen.n_startups=300", "gen.n_persons=500", "gen.months=30",
        "model.epochs=2", "model.d=16", "model.heads=2",
        "model.gst_layers=2", "model.d_seq=16",
        "model.mlp_hidden=[16,8]", "model.classifier_epochs=20",
        "model.patience=8", "model.lookback=4"]
    outs = []
    for run in ("a", "b"):
        cfg = load_config(overrides=overrides, seed=77,
                          out=str(tmp_path / run))
        pipeline.run_pipeline(cfg)
        outs.append(tmp_path / run)
    same = all((outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
               for name in ("predictions.tsv", "report.json", "report.txt",
                            "labels.tsv"))
    announce(8, same, "two identically-seeded pipeline runs produced "
                      "byte-identical prediction and report files")


# -- 9. generator fidelity ------------------------------------------------------------------------

def test_acceptance_9_generator_fidelity(tmp_path):
    rates = []
    alphas = []
    lccs = []
    cfg0 = GenConfig()
    for seed in range(5):
        cfg = GenConfig(seed=seed)
        ds = generate(cfg)
        rates.append(planted_signal_audit(ds.truth).overall_rate)
        target = tmp_path / f"seed{seed}"
        ds.write(target)
        data = load_dataset(target, epoch=cfg.epoch)
        graph = build_temporal_graph(data.events, 0, cfg.months - 1)
        degrees = [graph.degree_asof(n, cfg.months - 1)
                   for n, k in graph.node_kind.items()
                   if k is NodeKind.PERSON]
        alphas.append(fit_power_law_exponent(degrees, d_min=2))
        lccs.append(graph.structural_stats(cfg.months - 1).lcc_fraction)
    rate_mean = float(np.mean(rates))
    alpha_mean = float(np.mean(alphas))
    lcc_mean = float(np.mean(lccs))
    rate_ok = abs(rate_mean - cfg0.base_success_rate) < 0.02
    alpha_ok = 1.5 <= alpha_mean <= 3.5
    lcc_ok = abs(lcc_mean - cfg0.target_lcc_fraction) < 0.05
    announce(9, rate_ok and alpha_ok and lcc_ok,
             f"5-seed means: success rate {rate_mean:.4f} "
             f"(target {cfg0.base_success_rate}), tail exponent "
             f"{alpha_mean:.2f} in [1.5, 3.5], LCC {lcc_mean:.4f} "
             f"(target {cfg0.target_lcc_fraction} +/- 0.05)")
