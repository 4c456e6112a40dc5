"""End-to-end pipeline: corpus synthesis, features, training, and reports.

Commands are plain functions over one PipelineConfig so the command line and
tests drive the same code. A single global seed fans out to every stage
through named SeedSequence spawn keys, which keeps reruns byte-identical and
stages independent of each other's draw counts. Worker count comes from the
FLUENTNET_WORKERS environment variable and never changes results: parallel
stages split per file and are reassembled in sorted file order.
"""

from __future__ import annotations

import csv
import json
import os
import sys
import wave
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .audio import StftConfig, load_wav, save_wav
from .evaluation import (
    Split,
    ensemble_evaluate,
    kfold_splits,
    loso_splits,
    write_report_csvs,
)
from .features import (
    ClipDataset,
    build_clip_dataset,
    extract_clips,
    load_clip_dataset,
    save_clip_dataset,
    select_for_type,
    write_clip_index_csv,
)
from .model import (
    FluentNet,
    FluentNetConfig,
    TrainConfig,
    bce_loss,
    load_checkpoint,
    predict,
    save_checkpoint,
    train_detector,
)
from .nn import (
    BlstmLayer,
    GlobalAttention,
    SEResNetBlock,
    Tensor,
    finite_diff_check,
)
from .nn import ops
from .synthesis import (
    CLEAN,
    DISFLUENCY_TYPES,
    SynthesisConfig,
    load_filler_pool,
    read_alignments_csv,
    read_labels_csv,
    synthesize_file,
    write_default_filler_pool,
    write_labels_csv,
)


class UsageError(Exception):
    """Bad flags or configuration; exit code 1."""


class DataError(Exception):
    """Missing or invalid inputs on disk; exit code 2."""


class NumericalError(Exception):
    """Gradient check failure or non-finite training loss; exit code 3."""


WORKERS_ENV = "FLUENTNET_WORKERS"

# Spawn-key namespaces for the global seed; fixed so commands never share or
# reorder each other's random streams.
_STAGE_SYNTH, _STAGE_FEAT, _STAGE_TRAIN, _STAGE_SPLIT, _STAGE_GRADCHECK = range(5)


def stage_rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=tuple(key)))


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"{WORKERS_ENV} must be an integer, got {raw!r}")
    if n < 1:
        raise UsageError(f"{WORKERS_ENV} must be >= 1, got {n}")
    return n


def _map_ordered(fn, items: list) -> list:
    """Apply fn to items, in threads when configured; results keep item order."""
    n = worker_count()
    if n == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class PipelineConfig:
    """Everything one experiment needs: paths, seed, and per-stage settings."""

    seed: int = 0
    sample_rate: int = 16000
    clean_dir: str = "data/clean"
    filler_dir: str | None = None
    out_dir: str = "out"
    dtypes: tuple[str, ...] = DISFLUENCY_TYPES
    split: str = "kfold"
    folds: int = 10
    synthesis: SynthesisConfig = field(default_factory=SynthesisConfig)
    stft: StftConfig = field(default_factory=StftConfig)
    model: FluentNetConfig = field(default_factory=FluentNetConfig)
    train: TrainConfig = field(default_factory=TrainConfig)

    def __post_init__(self):
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        object.__setattr__(self, "dtypes", tuple(self.dtypes))
        unknown = set(self.dtypes) - set(DISFLUENCY_TYPES)
        if unknown or not self.dtypes:
            raise ValueError(f"dtypes must be a non-empty subset of {DISFLUENCY_TYPES}")
        if self.split not in ("kfold", "loso"):
            raise ValueError("split must be 'kfold' or 'loso'")
        if self.folds < 2:
            raise ValueError("folds must be >= 2")


_SECTIONS = {"synthesis": SynthesisConfig, "stft": StftConfig,
             "model": FluentNetConfig, "train": TrainConfig}


def _build_section(cls, name: str, data: dict):
    if not isinstance(data, dict):
        raise UsageError(f"config section {name!r} must be an object")
    coerced = dict(data)
    for f in fields(cls):
        if isinstance(coerced.get(f.name), list) and isinstance(f.default, tuple):
            coerced[f.name] = tuple(coerced[f.name])
    try:
        return cls(**coerced)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"config section {name!r}: {exc}")


def load_pipeline_config(path: str | Path | None = None,
                         overrides: dict | None = None) -> PipelineConfig:
    """Defaults, then the JSON config file, then command-line overrides."""
    raw: dict = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise UsageError(f"config file {path} not found")
        except json.JSONDecodeError as exc:
            raise UsageError(f"config file {path}: {exc}")
        if not isinstance(raw, dict):
            raise UsageError("config root must be a JSON object")
    top_fields = {f.name for f in fields(PipelineConfig)} - set(_SECTIONS)
    unknown = set(raw) - top_fields - set(_SECTIONS)
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")

    o = overrides or {}
    top = {k: v for k, v in raw.items() if k in top_fields}
    for key in ("seed", "out_dir"):
        if o.get(key) is not None:
            top[key] = o[key]
    if o.get("dtype") is not None:
        top["dtypes"] = [o["dtype"]]

    sections = {}
    for name, cls in _SECTIONS.items():
        data = dict(raw.get(name, {})) if isinstance(raw.get(name, {}), dict) else raw.get(name)
        if name == "synthesis":
            if o.get("prob") is not None:
                data["insert_prob"] = o["prob"]
            if o.get("quota") is not None:
                data["quotas"] = o["quota"]
        if name == "model" and o.get("width_scale") is not None:
            data["width_scale"] = o["width_scale"]
        sections[name] = _build_section(cls, name, data)
    try:
        return PipelineConfig(**top, **sections)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc))


def _load_fillers(config: PipelineConfig):
    if config.filler_dir is not None:
        directory = Path(config.filler_dir)
        if not directory.is_dir():
            raise DataError(f"filler directory {directory} not found")
        return load_filler_pool(directory)
    directory = Path(config.out_dir) / "fillers"
    if not any(directory.glob("*.wav")):
        write_default_filler_pool(directory, config.sample_rate)
    return load_filler_pool(directory)


def cmd_synthesize(config: PipelineConfig) -> dict:
    """Inject disfluencies into every clean recording; write WAVs + labels.

    Per-file failures remove that file's partial outputs and are reported
    together after the surviving files' manifest is written.
    """
    clean_dir = Path(config.clean_dir)
    if not clean_dir.is_dir():
        raise DataError(f"clean directory {clean_dir} not found")
    stems = sorted(p.stem for p in clean_dir.glob("*.wav"))
    if not stems:
        raise DataError(f"no clean recordings (*.wav) in {clean_dir}")
    missing = [s for s in stems if not (clean_dir / f"{s}.csv").exists()]
    if missing:
        raise DataError(f"missing alignment CSVs for: {', '.join(missing)}")
    filler_pool = _load_fillers(config)
    out = Path(config.out_dir) / "stutter"
    out.mkdir(parents=True, exist_ok=True)

    def one(job):
        index, stem = job
        wav_path = out / f"{stem}.wav"
        csv_path = out / f"{stem}.csv"
        try:
            clean = load_wav(clean_dir / f"{stem}.wav")
            words = read_alignments_csv(clean_dir / f"{stem}.csv")
            rng = stage_rng(config.seed, _STAGE_SYNTH, index)
            result = synthesize_file(clean, words, config.synthesis, rng, filler_pool)
            save_wav(result.waveform, wav_path)
            write_labels_csv(csv_path, result.rows)
            return stem, result, None
        except Exception as exc:
            wav_path.unlink(missing_ok=True)
            csv_path.unlink(missing_ok=True)
            return stem, None, f"{stem}: {exc}"

    results = _map_ordered(one, list(enumerate(stems)))
    manifest_rows = []
    failures = []
    totals = {t: 0 for t in DISFLUENCY_TYPES}
    for stem, result, error in results:
        if error is not None:
            failures.append(error)
            continue
        counts = [result.counts.get(t, 0) for t in DISFLUENCY_TYPES]
        for t, c in zip(DISFLUENCY_TYPES, counts):
            totals[t] += c
        manifest_rows.append([stem, f"{result.waveform.duration_s:.4f}",
                              result.n_windows, *counts, sum(counts)])
    manifest = out / "manifest.csv"
    with open(manifest, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["file", "duration_s", "n_windows", *DISFLUENCY_TYPES, "total"])
        writer.writerows(manifest_rows)
    if failures:
        raise DataError("synthesis failed for " + "; ".join(failures))
    total_events = sum(totals.values())
    print(f"synthesized {len(manifest_rows)} files, {total_events} events -> {out}")
    return {"files": len(manifest_rows), "events": totals,
            "total_events": total_events, "manifest": str(manifest)}


def _empty_dataset(config: PipelineConfig) -> ClipDataset:
    window = int(round(config.synthesis.window_s * config.sample_rate))
    frames = config.stft.frame_count(window)
    return ClipDataset(
        features=np.zeros((0, frames, config.stft.n_bins), dtype=np.float32),
        type_masks=np.zeros(0, dtype=np.uint8),
        source_idx=np.zeros(0, dtype=np.int32),
        window_index=np.zeros(0, dtype=np.int32),
        start_s=np.zeros(0, dtype=np.float64),
        sources=[],
        window_s=config.synthesis.window_s,
    )


def _dataset_subset(ds: ClipDataset, idx: np.ndarray) -> ClipDataset:
    return ClipDataset(features=ds.features[idx], type_masks=ds.type_masks[idx],
                       source_idx=ds.source_idx[idx], window_index=ds.window_index[idx],
                       start_s=ds.start_s[idx], sources=list(ds.sources),
                       window_s=ds.window_s)


def cmd_featurize(config: PipelineConfig) -> dict:
    """Cut the synthesized corpus into clips; write one dataset per type."""
    stutter = Path(config.out_dir) / "stutter"
    if not stutter.is_dir():
        raise DataError(f"no synthesized corpus at {stutter}; run synthesize first")
    stems = sorted(p.stem for p in stutter.glob("*.wav"))
    missing = [s for s in stems if not (stutter / f"{s}.csv").exists()]
    if missing:
        raise DataError(f"missing label CSVs for: {', '.join(missing)}")
    feat_dir = Path(config.out_dir) / "features"
    feat_dir.mkdir(parents=True, exist_ok=True)
    window_s = config.synthesis.window_s

    def one(stem):
        waveform = load_wav(stutter / f"{stem}.wav")
        rows = read_labels_csv(stutter / f"{stem}.csv")
        return extract_clips(waveform, rows, source=stem,
                             window_s=window_s, stft_config=config.stft)

    clips = [c for per_file in _map_ordered(one, stems) for c in per_file]
    if clips:
        ds = build_clip_dataset(clips, window_s)
    else:
        print("warning: no clips extracted; writing empty datasets", file=sys.stderr)
        ds = _empty_dataset(config)
    save_clip_dataset(feat_dir / "clips_all.bin", ds)
    write_clip_index_csv(feat_dir / "clips_all.csv", ds)
    per_dtype = {}
    for dtype in config.dtypes:
        _, labels, idx = select_for_type(ds, dtype)
        subset = _dataset_subset(ds, idx)
        save_clip_dataset(feat_dir / f"clips_{dtype}.bin", subset)
        write_clip_index_csv(feat_dir / f"clips_{dtype}.csv", subset)
        per_dtype[dtype] = {"clips": int(idx.size), "positives": int((labels == 1).sum())}
    counts = ", ".join(f"{d}: {v['positives']} pos / {v['clips']} clips"
                       for d, v in per_dtype.items())
    print(f"extracted {len(ds)} clips -> {feat_dir} ({counts})")
    return {"clips": len(ds), "per_dtype": per_dtype}


def _detector_data(config: PipelineConfig, dtype: str):
    path = Path(config.out_dir) / "features" / f"clips_{dtype}.bin"
    if not path.exists():
        raise DataError(f"missing dataset {path}; run featurize first")
    ds = load_clip_dataset(path)
    features, labels, idx = select_for_type(ds, dtype)
    expected = (config.model.input_frames, config.model.input_bins)
    if features.shape[0] and features.shape[1:] != expected:
        raise UsageError(
            f"dataset clips are {features.shape[1]}x{features.shape[2]} but the "
            f"model expects {expected[0]}x{expected[1]}; align stft/model config")
    return ds, features, labels, idx


def _make_splits(config: PipelineConfig, sources: list[str],
                 strata: list[str], dtype_index: int) -> list[Split]:
    try:
        if config.split == "loso":
            return loso_splits(sources)
        return kfold_splits(strata, config.folds,
                            stage_rng(config.seed, _STAGE_SPLIT, dtype_index))
    except ValueError as exc:
        raise DataError(str(exc))


def _write_splits_json(path: Path, config: PipelineConfig, splits: list[Split]) -> None:
    payload = {"split": config.split,
               "splits": [{"name": sp.name,
                           "train": list(sp.train_ids),
                           "test": list(sp.test_ids)} for sp in splits]}
    path.write_text(json.dumps(payload, indent=1) + "\n")


def _read_splits_json(path: Path) -> list[Split]:
    if not path.exists():
        raise DataError(f"missing split definitions {path}; run train first")
    payload = json.loads(path.read_text())
    return [Split(name=sp["name"], train_ids=tuple(sp["train"]),
                  test_ids=tuple(sp["test"])) for sp in payload["splits"]]


def _write_history_csv(path: Path, history: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "loss", "acc"])
        for row in history:
            writer.writerow([row["epoch"], f"{row['loss']:.6f}", f"{row['acc']:.6f}"])


def cmd_train(config: PipelineConfig, dtype: str | None = None) -> dict:
    """Train one detector per type per split; write checkpoints + histories."""
    if dtype is not None and dtype not in DISFLUENCY_TYPES:
        raise UsageError(f"unknown disfluency type {dtype!r}")
    targets = (dtype,) if dtype is not None else config.dtypes
    summary = {}
    for target in targets:
        dtype_index = DISFLUENCY_TYPES.index(target)
        ds, features, labels, idx = _detector_data(config, target)
        n_pos = int((labels == 1).sum())
        n_neg = int(labels.size - n_pos)
        if n_pos == 0 or n_neg == 0:
            raise DataError(f"type {target}: need both classes to train "
                            f"(have {n_pos} positive, {n_neg} negative clips)")
        sources = [ds.clip_source(i) for i in idx]
        strata = [f"{target}:{int(y)}" for y in labels]
        splits = _make_splits(config, sources, strata, dtype_index)
        model_dir = Path(config.out_dir) / "models" / target
        model_dir.mkdir(parents=True, exist_ok=True)
        _write_splits_json(model_dir / "splits.json", config, splits)
        fold_rows = []
        for split_index, split in enumerate(splits):
            rng = stage_rng(config.seed, _STAGE_TRAIN, dtype_index, split_index)
            model = FluentNet(config.model, rng)
            train_ids = np.array(split.train_ids, dtype=np.int64)
            history = train_detector(model, features[train_ids], labels[train_ids],
                                     config.train, rng)
            if not all(np.isfinite(row["loss"]) for row in history):
                raise NumericalError(f"non-finite loss training {target} {split.name}")
            save_checkpoint(model_dir / f"{split.name}.bin", model)
            _write_history_csv(model_dir / f"{split.name}_history.csv", history)
            last = history[-1]
            print(f"trained {target} {split.name}: epochs={last['epoch']} "
                  f"loss={last['loss']:.4f} acc={last['acc']:.3f}")
            fold_rows.append({"split": split.name, "epochs": last["epoch"],
                              "loss": last["loss"], "acc": last["acc"]})
        summary[target] = fold_rows
    return summary


def cmd_evaluate(config: PipelineConfig) -> dict:
    """Score every detector on its test folds; write report CSVs."""
    fold_scores = {}
    for target in config.dtypes:
        ds, features, labels, idx = _detector_data(config, target)
        model_dir = Path(config.out_dir) / "models" / target
        splits = _read_splits_json(model_dir / "splits.json")
        triples = []
        for split in splits:
            ckpt = model_dir / f"{split.name}.bin"
            if not ckpt.exists():
                raise DataError(f"missing model for {target} split {split.name}")
            model = load_checkpoint(ckpt)
            test_ids = np.array(split.test_ids, dtype=np.int64)
            scores = predict(model, features[test_ids])
            triples.append((split.name, scores, labels[test_ids].astype(np.int64)))
        fold_scores[target] = triples
    try:
        report = ensemble_evaluate(fold_scores)
    except ValueError as exc:
        raise DataError(str(exc))
    report_dir = Path(config.out_dir) / "report"
    write_report_csvs(report_dir, report)
    names = [row["dtype"] for row in report["summary"]]
    print("metric " + "".join(f"{name:>9}" for name in names))
    print("MR %   " + "".join(f"{row['miss_rate'] * 100:9.2f}" for row in report["summary"]))
    print("Acc %  " + "".join(f"{row['accuracy'] * 100:9.2f}" for row in report["summary"]))
    print(f"report written to {report_dir}")
    return report


def _suite_entries(rng: np.random.Generator):
    """(name, build_loss, tensors) cases covering every differentiable op.

    Inputs avoid non-differentiable points (relu at zero, clamp edges) so
    central differences are trustworthy; dropout is excluded because its
    training-mode mask changes per call.
    """
    def leaf(shape, shift=0.0, scale=1.0):
        return Tensor(rng.standard_normal(shape) * scale + shift, requires_grad=True)

    def const(shape):
        return Tensor(rng.standard_normal(shape))

    entries = []

    a, b, c = leaf((3, 4)), leaf((3, 4)), leaf((3, 4), shift=3.0)
    entries.append(("elementwise", lambda: (a * b + a / c - b * 2.0).sum(),
                    {"a": a, "b": b, "c": c}))

    m1, m2 = leaf((3, 5)), leaf((5, 2))
    mw = const((3, 2))
    entries.append(("matmul", lambda: (m1.matmul(m2) * mw).sum(), {"m1": m1, "m2": m2}))

    dx, dw, db = leaf((4, 6)), leaf((3, 6)), leaf((3,))
    dm = const((4, 3))
    entries.append(("dense", lambda: (ops.dense(dx, dw, db) * dm).sum(),
                    {"x": dx, "w": dw, "b": db}))

    sx, sy = leaf((2, 7)), leaf((2, 7))
    entries.append(("sigmoid_tanh", lambda: (ops.sigmoid(sx) * ops.tanh(sy)).sum(),
                    {"x": sx, "y": sy}))

    ex, ey = leaf((3, 3), scale=0.5), leaf((3, 3))
    entries.append(("exp_log", lambda: (ex.exp() + (ey * ey + 1.0).log()).sum(),
                    {"x": ex, "y": ey}))

    fx = leaf((2, 6))
    fm = const((2, 6))
    entries.append(("softmax", lambda: (ops.softmax(fx, axis=-1) * fm).sum(), {"x": fx}))

    rdata = rng.standard_normal((4, 5))
    rdata += 0.25 * np.sign(rdata)  # keep clear of the kink at zero
    rx = Tensor(rdata, requires_grad=True)
    rm = const((4, 5))
    entries.append(("relu", lambda: (ops.relu(rx) * rm).sum(), {"x": rx}))

    cdata = rng.uniform(-0.35, 0.35, size=(3, 5))
    wide = rng.random((3, 5)) < 0.4
    cdata[wide] = np.sign(rng.standard_normal(wide.sum())) * rng.uniform(0.7, 1.3, wide.sum())
    cx = Tensor(cdata, requires_grad=True)
    cm = const((3, 5))
    entries.append(("clamp", lambda: (ops.clamp(cx, -0.5, 0.5) * cm).sum(), {"x": cx}))

    vx, vw = leaf((2, 2, 5, 6)), leaf((3, 2, 3, 3), scale=0.5)
    vm = const((2, 3, 5, 3))
    entries.append(("conv2d",
                    lambda: (ops.conv2d(vx, vw, stride=(1, 2), padding=(1, 1)) * vm).sum(),
                    {"x": vx, "w": vw}))

    px = leaf((2, 3, 4, 5))
    pm = const((2, 3))
    entries.append(("global_avg_pool", lambda: (ops.global_avg_pool(px) * pm).sum(),
                    {"x": px}))

    bx = leaf((3, 2, 4, 4))
    bgamma = Tensor(rng.uniform(0.5, 1.5, 2), requires_grad=True)
    bbeta = leaf((2,))
    brm, brv = rng.standard_normal(2) * 0.1, rng.uniform(0.8, 1.2, 2)
    bm = const((3, 2, 4, 4))
    entries.append(("batch_norm",
                    lambda: (ops.batch_norm(bx, bgamma, bbeta, brm.copy(), brv.copy(),
                                            training=False) * bm).sum(),
                    {"x": bx, "gamma": bgamma, "beta": bbeta}))

    block = SEResNetBlock(rng, 2, 3, stride=(1, 2), reduction=2)
    kx = leaf((2, 2, 4, 6), scale=0.5)
    km = const((2, 3, 4, 3))
    ktensors = {"x": kx, **dict(block.parameters())}
    entries.append(("se_resnet_block", lambda: (block(kx, training=False) * km).sum(),
                    ktensors))

    blstm = BlstmLayer(rng, 3, 4)
    lx = leaf((2, 5, 3), scale=0.5)
    lm = const((2, 5, 4))
    ltensors = {"x": lx, **dict(blstm.parameters())}
    entries.append(("blstm", lambda: (blstm(lx) * lm).sum(), ltensors))

    att = GlobalAttention(rng, 6)
    ax = leaf((2, 5, 6), scale=0.5)
    am = const((2, 6))
    atensors = {"x": ax, **dict(att.parameters())}
    entries.append(("attention", lambda: (att(ax)[0] * am).sum(), atensors))

    det_config = FluentNetConfig(width_scale=0.0625, hidden=16, dropout=0.0,
                                 input_frames=12, input_bins=8, dtype="float64")
    det = FluentNet(det_config, rng)
    det_x = rng.standard_normal((2, 12, 8))
    det_y = np.array([1.0, 0.0])
    entries.append(("detector_bce", lambda: bce_loss(det.forward(det_x), det_y),
                    dict(det.parameters())))

    return entries


def gradcheck_suite(seed: int = 0) -> list[dict]:
    """Finite-difference check of every op and layer; per-op error rows."""
    rng = stage_rng(seed, _STAGE_GRADCHECK)
    rows = []
    for name, build_loss, tensors in _suite_entries(rng):
        report = finite_diff_check(build_loss, tensors, rng, samples_per_tensor=3)
        rows.append({"name": name, "max_err": report.max_err,
                     "worst": report.worst_coord, "n_coords": report.n_coords,
                     "ok": report.ok()})
    return rows


def cmd_gradcheck(seed: int = 0) -> list[dict]:
    rows = gradcheck_suite(seed)
    width = max(len(r["name"]) for r in rows)
    for r in rows:
        status = "ok" if r["ok"] else "FAIL"
        print(f"{r['name']:<{width}}  max_rel_err {r['max_err']:.3e}  "
              f"coords {r['n_coords']:3d}  {status}")
    failed = [r["name"] for r in rows if not r["ok"]]
    if failed:
        raise NumericalError("gradient check failed for: " + ", ".join(failed))
    return rows


def cmd_stats(config: PipelineConfig) -> dict:
    """Corpus statistics: event counts, labeled seconds, dataset sizes."""
    stutter = Path(config.out_dir) / "stutter"
    if not stutter.is_dir():
        raise DataError(f"no synthesized corpus at {stutter}; run synthesize first")
    stems = sorted(p.stem for p in stutter.glob("*.wav"))
    if not stems:
        raise DataError(f"no recordings in {stutter}")
    events = {t: 0 for t in DISFLUENCY_TYPES}
    seconds = {t: 0.0 for t in DISFLUENCY_TYPES}
    total_s = 0.0
    for stem in stems:
        with wave.open(str(stutter / f"{stem}.wav"), "rb") as wav:
            total_s += wav.getnframes() / wav.getframerate()
        for row in read_labels_csv(stutter / f"{stem}.csv"):
            if row.dtype != CLEAN:
                events[row.dtype] += 1
                seconds[row.dtype] += row.end_s - row.start_s
    clips = {}
    feat_dir = Path(config.out_dir) / "features"
    for dtype in config.dtypes:
        path = feat_dir / f"clips_{dtype}.bin"
        if path.exists():
            ds = load_clip_dataset(path)
            _, labels, _ = select_for_type(ds, dtype)
            clips[dtype] = {"clips": len(ds), "positives": int((labels == 1).sum())}
    print(f"files {len(stems)}  duration {total_s:.1f} s  "
          f"events {sum(events.values())}")
    print("type  events  seconds    clips  positives")
    for t in DISFLUENCY_TYPES:
        cl = clips.get(t, {})
        print(f"{t:<5} {events[t]:6d} {seconds[t]:8.2f} {cl.get('clips', 0):8d} "
              f"{cl.get('positives', 0):10d}")
    return {"files": len(stems), "duration_s": total_s,
            "events": events, "event_seconds": seconds, "clips": clips}
