"""End-to-end acceptance checks, one verdict line per criterion.

Each test prints "[criterion N] PASS/FAIL: <measurements>" before asserting,
so a plain run with -s (or any failure report) shows the measured numbers
next to their bounds. Oracles here are deliberately independent scalar
reimplementations, not calls back into the code under test.
"""

from __future__ import annotations

import hashlib
import math
import time
from pathlib import Path

import numpy as np

from fluentnet.audio import StftConfig, Waveform, estimate_mean_pitch, stft
from fluentnet.evaluation import (
    accuracy,
    confusion_from_scores,
    kfold_splits,
    loso_splits,
    miss_rate,
    roc_curve,
    subject_of,
)
from fluentnet.features import (
    build_clip_dataset,
    cosine_similarity,
    extract_clips,
    select_for_type,
)
from fluentnet.model import (
    FluentNet,
    FluentNetConfig,
    TrainConfig,
    bce_loss,
    predict,
    rmsprop_step,
    train_detector,
)
from fluentnet.nn import Tensor, finite_diff_check
from fluentnet.nn.layers import (
    GlobalAttention,
    LstmParams,
    blstm_layer,
    global_attention,
    lstm_cell,
)
from fluentnet.pipeline import (
    PipelineConfig,
    cmd_evaluate,
    cmd_featurize,
    cmd_synthesize,
    cmd_train,
    gradcheck_suite,
)
from fluentnet.synthesis import (
    DISFLUENCY_TYPES,
    SynthesisConfig,
    make_filler_waveform,
    source_position,
    synthesize_file,
)

from synth_fixtures import make_corpus, make_speech

SR = 16000
WINDOW = 4 * SR


def _verdict(criterion: int, ok: bool, detail: str) -> None:
    status = "PASS" if ok else "FAIL"
    print(f"[criterion {criterion}] {status}: {detail}")
    assert ok, f"criterion {criterion} failed: {detail}"


# ---------------------------------------------------------------- criterion 1


def test_criterion_1_gradient_suite():
    t0 = time.monotonic()
    rows = gradcheck_suite(seed=0)
    suite_ok = all(r["ok"] for r in rows)
    suite_err = max(r["max_err"] for r in rows)

    config = FluentNetConfig(width_scale=0.25, dropout=0.0, input_frames=24,
                             input_bins=32, dtype="float64")
    model = FluentNet(config, np.random.default_rng(5))
    x = np.random.default_rng(6).normal(0.0, 1.0, size=(2, 24, 32))
    y = np.array([1.0, 0.0])

    def build_loss():
        return bce_loss(model.forward(x), y)

    report = finite_diff_check(build_loss, dict(model.parameters()),
                               np.random.default_rng(7), samples_per_tensor=2)
    elapsed = time.monotonic() - t0
    max_err = max(suite_err, report.max_err)
    ok = suite_ok and report.ok(1e-4) and elapsed < 300.0
    _verdict(1, ok,
             f"op suite ({len(rows)} entries) and width-0.25 network "
             f"({report.n_coords} coords over {len(report.per_tensor)} tensors): "
             f"max rel err {max_err:.2e} < 1e-4, {elapsed:.0f}s < 300s")


# ---------------------------------------------------------------- criterion 2


def _sig(v: float) -> float:
    return 1.0 / (1.0 + math.exp(-v))


def _oracle_lstm_cell(x, h, c, weights, biases):
    """Scalar replay of one step; gates read [h_prev, x_t]."""
    n, hidden = h.shape
    h_out = np.empty((n, hidden))
    c_out = np.empty((n, hidden))
    for b in range(n):
        z = list(h[b]) + list(x[b])
        for j in range(hidden):
            acc = {}
            for gate in ("f", "i", "c", "o"):
                s = float(biases[gate][j])
                for k, zv in enumerate(z):
                    s += float(weights[gate][j][k]) * zv
                acc[gate] = s
            f = _sig(acc["f"])
            i = _sig(acc["i"])
            cb = math.tanh(acc["c"])
            o = _sig(acc["o"])
            c_new = f * float(c[b, j]) + i * cb
            c_out[b, j] = c_new
            h_out[b, j] = o * math.tanh(c_new)
    return h_out, c_out


def _params_as_arrays(p: LstmParams):
    weights = {g: getattr(p, f"w_{g}").data for g in ("f", "i", "c", "o")}
    biases = {g: getattr(p, f"b_{g}").data for g in ("f", "i", "c", "o")}
    return weights, biases


def _oracle_lstm_run(x, p: LstmParams, reverse: bool):
    n, t_len, _ = x.shape
    weights, biases = _params_as_arrays(p)
    h = np.zeros((n, p.hidden))
    c = np.zeros((n, p.hidden))
    out = np.empty((n, t_len, p.hidden))
    steps = range(t_len - 1, -1, -1) if reverse else range(t_len)
    for t in steps:
        h, c = _oracle_lstm_cell(x[:, t, :], h, c, weights, biases)
        out[:, t, :] = h
    return out


def _oracle_attention(seq, w_c):
    n, t_len, hidden = seq.shape
    alpha = np.empty((n, t_len))
    out = np.empty((n, hidden))
    for b in range(n):
        scores = []
        for t in range(t_len):
            s = 0.0
            for j in range(hidden):
                s += float(seq[b, t_len - 1, j]) * float(seq[b, t, j])
            scores.append(s)
        m = max(scores)
        exps = [math.exp(s - m) for s in scores]
        total = sum(exps)
        for t in range(t_len):
            alpha[b, t] = exps[t] / total
        cat = []
        for j in range(hidden):
            s = 0.0
            for t in range(t_len):
                s += alpha[b, t] * float(seq[b, t, j])
            cat.append(s)
        cat.extend(float(v) for v in seq[b, t_len - 1])
        for i in range(hidden):
            s = 0.0
            for k in range(2 * hidden):
                s += float(w_c[i, k]) * cat[k]
            out[b, i] = math.tanh(s)
    return out, alpha


def test_criterion_2_equation_oracles():
    worst = 0.0

    # lstm_cell
    for seed in range(20):
        rng = np.random.default_rng(100 + seed)
        n, idim, hidden = 1 + seed % 3, 1 + seed % 4, 1 + (seed // 2) % 4
        p = LstmParams(rng, idim, hidden)
        x = rng.normal(size=(n, idim))
        h0 = rng.normal(size=(n, hidden))
        c0 = rng.normal(size=(n, hidden))
        h, c = lstm_cell(Tensor(x), Tensor(h0), Tensor(c0), p)
        weights, biases = _params_as_arrays(p)
        eh, ec = _oracle_lstm_cell(x, h0, c0, weights, biases)
        worst = max(worst, float(np.abs(h.data - eh).max()),
                    float(np.abs(c.data - ec).max()))

    # blstm_layer, both merge modes
    for seed in range(20):
        rng = np.random.default_rng(200 + seed)
        n, t_len, idim, hidden = 1 + seed % 2, 1 + seed % 4, 1 + seed % 3, 1 + seed % 3
        pf = LstmParams(rng, idim, hidden)
        pb = LstmParams(rng, idim, hidden)
        x = rng.normal(size=(n, t_len, idim))
        fwd = _oracle_lstm_run(x, pf, reverse=False)
        bwd = _oracle_lstm_run(x, pb, reverse=True)
        merge = "product" if seed % 2 == 0 else "concat"
        got = blstm_layer(Tensor(x), pf, pb, merge).data
        want = fwd * bwd if merge == "product" else np.concatenate([fwd, bwd], axis=2)
        worst = max(worst, float(np.abs(got - want).max()))

    # global_attention
    for seed in range(20):
        rng = np.random.default_rng(300 + seed)
        n, t_len, hidden = 1 + seed % 3, 1 + seed % 5, 1 + seed % 4
        seq = rng.normal(size=(n, t_len, hidden)) * rng.uniform(0.5, 2.0)
        w_c = rng.normal(size=(hidden, 2 * hidden))
        got_out, got_alpha = global_attention(Tensor(seq), Tensor(w_c))
        want_out, want_alpha = _oracle_attention(seq, w_c)
        worst = max(worst, float(np.abs(got_out.data - want_out).max()),
                    float(np.abs(got_alpha.data - want_alpha).max()))

    # bce_loss with probabilities at and inside the clipping band
    for seed in range(20):
        rng = np.random.default_rng(400 + seed)
        n = 1 + seed % 8
        pred = rng.uniform(0.0, 1.0, size=n)
        if seed % 3 == 0:
            pred[0] = float(seed % 2)  # exact 0 or 1 exercises the clip
        y = rng.integers(0, 2, size=n).astype(np.float64)
        got = bce_loss(Tensor(pred.copy()), y).item()
        total = 0.0
        for b in range(n):
            p = min(max(float(pred[b]), 1e-7), 1.0 - 1e-7)
            total += float(y[b]) * math.log(p) + (1.0 - float(y[b])) * math.log(1.0 - p)
        want = -(total / n)
        worst = max(worst, abs(got - want))

    # rmsprop_step over three consecutive updates, one tensor without a grad
    for seed in range(20):
        rng = np.random.default_rng(500 + seed)
        lr = float(rng.uniform(1e-4, 1e-2))
        rho = float(rng.uniform(0.8, 0.99))
        eps = 1e-7
        shapes = {"a": (2, 3), "b": (4,), "frozen": (2,)}
        tensors = {k: Tensor(rng.normal(size=s), requires_grad=True)
                   for k, s in shapes.items()}
        params = list(tensors.items())
        frozen_before = tensors["frozen"].data.copy()
        velocities: dict[str, np.ndarray] = {}
        mirror_v = {k: np.zeros(s) for k, s in shapes.items() if k != "frozen"}
        mirror_t = {k: tensors[k].data.copy() for k in mirror_v}
        for _ in range(3):
            grads = {k: rng.normal(size=shapes[k]) for k in mirror_v}
            for k, t in tensors.items():
                t.grad = grads[k].copy() if k in grads else None
            rmsprop_step(params, velocities, lr=lr, rho=rho, eps=eps)
            for k in mirror_v:
                v, th, g = mirror_v[k], mirror_t[k], grads[k]
                for idx in np.ndindex(*shapes[k]):
                    gv = float(g[idx])
                    v[idx] = float(v[idx]) * rho + (1.0 - rho) * gv * gv
                    th[idx] = float(th[idx]) - lr * gv / (math.sqrt(float(v[idx])) + eps)
        for k in mirror_v:
            worst = max(worst, float(np.abs(tensors[k].data - mirror_t[k]).max()),
                        float(np.abs(velocities[k] - mirror_v[k]).max()))
        frozen_ok = (np.array_equal(tensors["frozen"].data, frozen_before)
                     and "frozen" not in velocities)
        if not frozen_ok:
            worst = math.inf

    ok = worst <= 1e-12
    _verdict(2, ok,
             f"lstm_cell/blstm_layer/global_attention/bce_loss/rmsprop_step vs "
             f"scalar oracles, 20 instances each: max abs dev {worst:.2e} <= 1e-12")


# ---------------------------------------------------------------- criterion 3


def test_criterion_3_attention_normalization():
    rng = np.random.default_rng(4242)
    n_inputs = 0
    max_dev = 0.0
    min_alpha = math.inf
    while n_inputs < 1000:
        batch = 25
        t_len = int(rng.integers(1, 8))
        hidden = int(rng.integers(1, 7))
        scale = float(rng.uniform(0.2, 50.0))
        seq = rng.normal(size=(batch, t_len, hidden)) * scale
        att = GlobalAttention(rng, hidden)
        _, alpha = att(Tensor(seq))
        max_dev = max(max_dev, float(np.abs(alpha.data.sum(axis=1) - 1.0).max()))
        min_alpha = min(min_alpha, float(alpha.data.min()))
        n_inputs += batch

    single_exact = True
    for seed in range(50):
        r2 = np.random.default_rng(5000 + seed)
        hidden = int(r2.integers(1, 7))
        seq = r2.normal(size=(2, 1, hidden)) * float(r2.uniform(0.1, 100.0))
        _, alpha = global_attention(Tensor(seq), Tensor(r2.normal(size=(hidden, 2 * hidden))))
        single_exact = single_exact and np.array_equal(alpha.data, np.ones((2, 1)))

    ok = max_dev <= 1e-9 and min_alpha >= 0.0 and single_exact
    _verdict(3, ok,
             f"{n_inputs} inputs: max |sum(alpha)-1| {max_dev:.1e} <= 1e-9, "
             f"min alpha {min_alpha:.1e} >= 0, one-step alpha exactly 1: {single_exact}")


# ---------------------------------------------------------------- criterion 4


def test_criterion_4_synthesis_bookkeeping():
    audio, spans, f0s = make_speech(1000, seed=41)
    quotas = {t: 4 for t in DISFLUENCY_TYPES}
    config = SynthesisConfig(insert_prob=1.0, quotas=quotas)
    pool = [(t, make_filler_waveform(t, SR)) for t in ("uh", "um", "er")]
    result = synthesize_file(audio, spans, config, np.random.default_rng(42), pool)

    duration_ok = (result.waveform.n_samples
                   == result.source_samples + sum(e.delta for e in result.events))
    counts_ok = result.counts == quotas

    ov = int(round(config.crossfade_ms * SR / 1000.0))
    pr_events = [e for e in result.events if e.dtype == "PR"]
    ratios = []
    pitch_devs = []
    for e in pr_events:
        span = spans[e.word_index]
        d = round(span.end_s * SR) - round(span.start_s * SR)
        ratios.append(e.delta / d)
        seg = result.waveform.samples[e.insert_start + ov:
                                      e.insert_start + e.inserted - ov]
        measured = estimate_mean_pitch(Waveform(seg, SR))
        f0 = f0s[e.word_index]
        pitch_devs.append(math.inf if measured is None else abs(measured - f0) / f0)

    ratio_ok = bool(pr_events) and all(0.78 <= r <= 0.82 for r in ratios)
    pitch_ok = bool(pr_events) and all(dev <= 0.05 for dev in pitch_devs)

    ok = duration_ok and counts_ok and ratio_ok and pitch_ok
    _verdict(4, ok,
             f"{result.n_windows}-window fixture: duration replay exact {duration_ok}, "
             f"counts {result.counts} == quotas {counts_ok}, prolongation delta/word "
             f"{min(ratios):.3f}..{max(ratios):.3f} in [0.78, 0.82], "
             f"pitch dev max {max(pitch_devs):.3f} <= 0.05")


# ---------------------------------------------------------------- criterion 5


def test_criterion_5_realism_proxy():
    t0 = time.monotonic()
    stft_config = StftConfig()
    quotas = {t: 1 for t in DISFLUENCY_TYPES}
    pool = [(t, make_filler_waveform(t, SR)) for t in ("uh", "um", "er")]

    cleans = []
    results = []
    for i in range(14):
        audio, spans, _ = make_speech(60, seed=500 + i)
        config = SynthesisConfig(insert_prob=1.0, quotas=quotas)
        res = synthesize_file(audio, spans, config, np.random.default_rng(700 + i), pool)
        cleans.append(audio.samples)
        results.append(res)

    rng = np.random.default_rng(9)
    pool_specs = []
    for _ in range(20):
        j = int(rng.integers(len(cleans)))
        off = int(rng.integers(cleans[j].size - WINDOW + 1))
        seg = Waveform(cleans[j][off:off + WINDOW], SR)
        pool_specs.append(stft(seg, stft_config).values)

    cases = 0
    successes = 0
    for clean, res in zip(cleans, results):
        out = res.waveform.samples
        for k in range(out.size // WINDOW):
            lo, hi = k * WINDOW, (k + 1) * WINDOW
            if not any(e.insert_start < hi and e.insert_start + e.inserted > lo
                       for e in res.events):
                continue
            src = source_position(res.events, lo)
            src = min(max(src, 0), clean.size - WINDOW)
            stuttered = stft(Waveform(out[lo:hi], SR), stft_config).values
            own = cosine_similarity(
                stuttered, stft(Waveform(clean[src:src + WINDOW], SR), stft_config).values)
            rand_mean = float(np.mean([cosine_similarity(stuttered, p)
                                       for p in pool_specs]))
            cases += 1
            successes += int(own > rand_mean)

    elapsed = time.monotonic() - t0
    rate = successes / cases if cases else 0.0
    ok = cases >= 50 and rate >= 0.90 and elapsed < 120.0
    _verdict(5, ok,
             f"{cases} stuttered clips (>= 50): own-source cosine beats mean of 20 "
             f"random clips in {successes} ({rate:.0%} >= 90%), {elapsed:.0f}s < 120s")


# ---------------------------------------------------------------- criterion 6


def test_criterion_6_learning_sanity():
    t0 = time.monotonic()

    # toy set: half the clips carry a strong band in a fixed bin range
    rng = np.random.default_rng(5)
    x = rng.normal(0.0, 0.3, size=(16, 398, 256))
    y = np.zeros(16, dtype=np.int64)
    y[:8] = 1
    x[:8, :, 64:128] += 2.0
    perm = rng.permutation(16)
    x, y = x[perm].astype(np.float32), y[perm]
    model = FluentNet(FluentNetConfig(width_scale=0.25, dtype="float32"),
                      np.random.default_rng(3))
    toy_config = TrainConfig(lr=1e-3, epochs=200, batch_size=8, target_acc=0.95)
    history = train_detector(model, x, y, toy_config, np.random.default_rng(11))
    toy_acc = history[-1]["acc"]
    toy_epochs = len(history)
    toy_ok = toy_acc >= 0.95 and toy_epochs <= 200

    # 200-clip S-vs-CLEAN task, default injection strength, 2-fold validation
    syn = SynthesisConfig(insert_prob=1.0, quotas={"S": 3})
    clips = []
    for i in range(34):
        audio, spans, _ = make_speech(60, seed=100 + i)
        res = synthesize_file(audio, spans, syn, np.random.default_rng(1000 + i), None)
        clips.extend(extract_clips(res.waveform, res.rows, source=f"f{i:02d}"))
    ds = build_clip_dataset(clips)
    features, labels, _ = select_for_type(ds, "S")
    pos = np.flatnonzero(labels == 1)
    neg = np.flatnonzero(labels == 0)
    take_pos = min(pos.size, max(100, 200 - neg.size))
    keep = np.sort(np.concatenate([pos[:take_pos], neg[:200 - take_pos]]))
    features, labels = features[keep], labels[keep]

    strata = [f"S:{int(v)}" for v in labels]
    splits = kfold_splits(strata, 2, np.random.default_rng(1))
    fold_config = TrainConfig(lr=1e-3, epochs=12, batch_size=8, target_acc=1.0)
    accs = []
    for si, split in enumerate(splits):
        train_ids = np.array(split.train_ids)
        test_ids = np.array(split.test_ids)
        net = FluentNet(FluentNetConfig(width_scale=0.25, dtype="float32"),
                        np.random.default_rng(42 + si))
        train_detector(net, features[train_ids], labels[train_ids], fold_config,
                       np.random.default_rng(7 + si))
        scores = predict(net, features[test_ids], batch_size=8)
        accs.append(float(((scores >= 0.5) == (labels[test_ids] == 1)).mean()))
    mean_acc = float(np.mean(accs))

    elapsed = time.monotonic() - t0
    ok = (toy_ok and labels.size == 200 and mean_acc >= 0.90 and elapsed < 1800.0)
    _verdict(6, ok,
             f"toy acc {toy_acc:.2f} >= 0.95 in {toy_epochs} epochs (<= 200); "
             f"{labels.size}-clip S-vs-CLEAN 2-fold test acc "
             f"{accs[0]:.2f}/{accs[1]:.2f} mean {mean_acc:.2f} >= 0.90; "
             f"{elapsed:.0f}s < 1800s")


# ---------------------------------------------------------------- criterion 7


def _brute_confusion(scores, labels, threshold):
    tp = fp = tn = fn = 0
    for s, y in zip(scores, labels):
        predicted = s >= threshold
        if predicted and y == 1:
            tp += 1
        elif predicted and y == 0:
            fp += 1
        elif not predicted and y == 0:
            tn += 1
        else:
            fn += 1
    return tp, fp, tn, fn


def _pair_counting_auc(scores, labels):
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    wins = sum(1 for p in pos for q in neg if p > q)
    ties = sum(1 for p in pos for q in neg if p == q)
    return (2 * wins + ties) / (2 * len(pos) * len(neg))


def test_criterion_7_metric_oracles():
    exact = True
    for seed in range(30):
        rng = np.random.default_rng(8800 + seed)
        n = int(rng.integers(2, 101))
        labels = rng.integers(0, 2, size=n)
        if labels.min() == labels.max():
            labels[0] = 1 - labels[0]
        if seed % 2 == 0:
            scores = rng.integers(0, 6, size=n) / 5.0  # heavy ties
        else:
            scores = rng.uniform(0.0, 1.0, size=n)
        threshold = float(rng.uniform(0.2, 0.8))

        counts = confusion_from_scores(scores, labels, threshold)
        tp, fp, tn, fn = _brute_confusion(scores, labels, threshold)
        exact = exact and (counts.tp, counts.fp, counts.tn, counts.fn) == (tp, fp, tn, fn)
        if tp + fn > 0:
            exact = exact and miss_rate(counts) == fn / (tp + fn)
        exact = exact and accuracy(counts) == (tp + tn) / n
        _, auc = roc_curve(scores, labels)
        exact = exact and auc == _pair_counting_auc(scores, labels)

    rng = np.random.default_rng(77)
    sources = []
    for i in range(25):
        for k in range(int(rng.integers(1, 5))):
            sources.append(f"spk{i:02d}-{k:03d}")
    splits = loso_splits(sources)
    count_ok = len(splits) == 25
    pure = all(len({subject_of(sources[i]) for i in s.test_ids}) == 1 for s in splits)
    leak_free = all(
        {subject_of(sources[i]) for i in s.test_ids}.isdisjoint(
            {subject_of(sources[i]) for i in s.train_ids})
        for s in splits)
    all_test = sorted(i for s in splits for i in s.test_ids)
    exhaustive = all_test == list(range(len(sources)))
    disjoint = len(set(all_test)) == len(all_test)
    complements = all(sorted((*s.train_ids, *s.test_ids)) == list(range(len(sources)))
                      for s in splits)
    loso_ok = count_ok and pure and leak_free and exhaustive and disjoint and complements

    ok = exact and loso_ok
    _verdict(7, ok,
             f"confusion/miss-rate/accuracy/AUC exact on 30 sets up to 100 items: {exact}; "
             f"LOSO on 25 subjects ({len(sources)} clips) -> {len(splits)} subject-pure, "
             f"disjoint, exhaustive splits: {loso_ok}")


# ---------------------------------------------------------------- criterion 8


def _tree_hash(root: Path) -> str:
    digest = hashlib.sha256()
    for path in sorted(root.rglob("*")):
        if path.is_file():
            digest.update(str(path.relative_to(root)).encode())
            digest.update(path.read_bytes())
    return digest.hexdigest()


def test_criterion_8_determinism(tmp_path):
    clean = tmp_path / "clean"
    make_corpus(clean, n_subjects=2, files_per_subject=2, words_per_file=10, seed=21)

    def run(out_dir: Path) -> None:
        config = PipelineConfig(
            seed=13,
            clean_dir=str(clean),
            out_dir=str(out_dir),
            dtypes=("S",),
            folds=2,
            synthesis=SynthesisConfig(window_s=1.0, insert_prob=1.0, quotas={"S": 2}),
            stft=StftConfig(n_bins=64),
            model=FluentNetConfig(width_scale=0.0625, hidden=16, dropout=0.0,
                                  input_frames=98, input_bins=64, dtype="float32"),
            train=TrainConfig(lr=1e-3, epochs=2, batch_size=8),
        )
        cmd_synthesize(config)
        cmd_featurize(config)
        cmd_train(config)
        cmd_evaluate(config)

    run(tmp_path / "out_a")
    run(tmp_path / "out_b")
    hash_a = _tree_hash(tmp_path / "out_a")
    hash_b = _tree_hash(tmp_path / "out_b")
    ok = hash_a == hash_b
    _verdict(8, ok,
             f"synthesize->featurize->train->evaluate twice at seed 13: "
             f"output tree hashes {'match' if ok else 'differ'} ({hash_a[:12]})")


# ---------------------------------------------------------------- criterion 9


def test_criterion_9_stft_shape():
    config = StftConfig()
    t = np.arange(WINDOW) / SR
    tone = Waveform(0.5 * np.sin(2.0 * np.pi * 1000.0 * t), SR)
    spec = stft(tone, config)
    shape_ok = spec.values.shape == (398, 256)
    peak = int(spec.values.mean(axis=0).argmax())
    expected = round(1000.0 * config.fft_size / SR)
    peak_ok = abs(peak - expected) <= 1
    ok = shape_ok and peak_ok
    _verdict(9, ok,
             f"4 s at 16 kHz -> {spec.values.shape} frames (expect (398, 256)); "
             f"1 kHz tone peaks at bin {peak} (expect {expected} +-1)")
