"""Clip extraction: fixed-length spectrogram windows with disfluency labels.

A labeled recording is cut into consecutive non-overlapping fixed-length
windows; each window becomes one log-magnitude spectrogram clip tagged with
the set of disfluency types whose label spans overlap it. Detector training
is binary per type: clips containing the target type are positives, clips
containing no disfluency at all are negatives, and clips containing only
other types are excluded so they pollute neither class.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .audio import Spectrogram, StftConfig, Waveform, stft
from .container import read_container, write_container
from .synthesis import CLEAN, DISFLUENCY_TYPES, LabelRow

TYPE_BITS = {t: 1 << i for i, t in enumerate(DISFLUENCY_TYPES)}


def types_to_mask(types) -> int:
    mask = 0
    for t in types:
        mask |= TYPE_BITS[t]
    return mask


def mask_to_types(mask: int) -> frozenset[str]:
    return frozenset(t for t, bit in TYPE_BITS.items() if mask & bit)


@dataclass(frozen=True)
class Clip:
    """One spectrogram window and the disfluency types present in it."""

    values: np.ndarray
    source: str
    index: int
    start_s: float
    types: frozenset[str]


def extract_clips(
    waveform: Waveform,
    rows: list[LabelRow],
    source: str = "",
    window_s: float = 4.0,
    stft_config: StftConfig = StftConfig(),
) -> list[Clip]:
    """Cut a labeled recording into consecutive labeled spectrogram clips.

    Windows step by their own length from time zero; a trailing remainder
    shorter than the window is dropped. A disfluency counts as present in a
    window when its label span overlaps the window by any amount.
    """
    sr = waveform.sample_rate
    win = int(round(window_s * sr))
    events = [r for r in rows if r.dtype != CLEAN]
    clips = []
    index = 0
    for start in range(0, waveform.n_samples - win + 1, win):
        t0 = start / sr
        t1 = (start + win) / sr
        present = frozenset(r.dtype for r in events if r.start_s < t1 and r.end_s > t0)
        spec = stft(waveform.slice_samples(start, start + win), stft_config)
        clips.append(Clip(spec.values, source, index, t0, present))
        index += 1
    return clips


@dataclass
class ClipDataset:
    """Clip collection as flat arrays, ready to persist or feed a trainer."""

    features: np.ndarray  # (n, frames, bins) float32
    type_masks: np.ndarray  # (n,) uint8
    source_idx: np.ndarray  # (n,) int32 into sources
    window_index: np.ndarray  # (n,) int32
    start_s: np.ndarray  # (n,) float64
    sources: list[str]
    window_s: float = 4.0

    def __len__(self) -> int:
        return int(self.features.shape[0])

    def clip_types(self, i: int) -> frozenset[str]:
        return mask_to_types(int(self.type_masks[i]))

    def clip_source(self, i: int) -> str:
        return self.sources[int(self.source_idx[i])]


def build_clip_dataset(clips: list[Clip], window_s: float = 4.0) -> ClipDataset:
    if not clips:
        raise ValueError("cannot build a dataset from zero clips")
    shape = clips[0].values.shape
    for c in clips:
        if c.values.shape != shape:
            raise ValueError("all clips must share one spectrogram shape")
    sources = sorted({c.source for c in clips})
    src_id = {s: i for i, s in enumerate(sources)}
    return ClipDataset(
        features=np.stack([c.values for c in clips]).astype(np.float32),
        type_masks=np.array([types_to_mask(c.types) for c in clips], dtype=np.uint8),
        source_idx=np.array([src_id[c.source] for c in clips], dtype=np.int32),
        window_index=np.array([c.index for c in clips], dtype=np.int32),
        start_s=np.array([c.start_s for c in clips], dtype=np.float64),
        sources=sources,
        window_s=window_s,
    )


def save_clip_dataset(path: str | Path, ds: ClipDataset) -> None:
    header = {
        "kind": "clip_dataset",
        "sources": ds.sources,
        "window_s": ds.window_s,
    }
    write_container(path, header, {
        "features": ds.features,
        "type_masks": ds.type_masks,
        "source_idx": ds.source_idx,
        "window_index": ds.window_index,
        "start_s": ds.start_s,
    })


def load_clip_dataset(path: str | Path) -> ClipDataset:
    header, arrays = read_container(path)
    if header.get("kind") != "clip_dataset":
        raise ValueError(f"{path}: not a clip dataset")
    return ClipDataset(
        features=arrays["features"],
        type_masks=arrays["type_masks"],
        source_idx=arrays["source_idx"],
        window_index=arrays["window_index"],
        start_s=arrays["start_s"],
        sources=list(header["sources"]),
        window_s=float(header["window_s"]),
    )


def write_clip_index_csv(path: str | Path, ds: ClipDataset) -> None:
    """Human-readable listing of a dataset's clips."""
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["source", "window_index", "start_s", "types"])
        for i in range(len(ds)):
            types = "+".join(sorted(ds.clip_types(i))) or "-"
            writer.writerow([ds.clip_source(i), int(ds.window_index[i]),
                             f"{float(ds.start_s[i]):.3f}", types])


def select_for_type(ds: ClipDataset, target: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Binary subset for one detector: (features, labels, original indices).

    Positives contain the target type (alone or with others); negatives
    contain no disfluency; clips with only other types are excluded.
    """
    if target not in TYPE_BITS:
        raise ValueError(f"unknown disfluency type {target!r}")
    bit = TYPE_BITS[target]
    masks = ds.type_masks.astype(np.int64)
    keep = (masks & bit != 0) | (masks == 0)
    idx = np.flatnonzero(keep)
    labels = (masks[idx] & bit != 0).astype(np.int8)
    return ds.features[idx], labels, idx


def compute_normalization(features: np.ndarray, eps: float = 1e-8) -> tuple[np.ndarray, np.ndarray]:
    """Per-frequency-bin mean and std over a (n, frames, bins) collection."""
    if features.ndim != 3 or features.shape[0] == 0:
        raise ValueError("expected a non-empty (n, frames, bins) array")
    mean = features.mean(axis=(0, 1))
    std = np.maximum(features.std(axis=(0, 1)), eps)
    return mean.astype(np.float64), std.astype(np.float64)


def normalize_features(features: np.ndarray, mean: np.ndarray, std: np.ndarray) -> np.ndarray:
    """Apply per-bin statistics; preserves the input's dtype."""
    out = (features - mean) / std
    return out.astype(features.dtype, copy=False)


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine of the angle between two arrays flattened to vectors."""
    av = np.asarray(a, dtype=np.float64).ravel()
    bv = np.asarray(b, dtype=np.float64).ravel()
    if av.shape != bv.shape:
        raise ValueError("cosine similarity needs equal-size arrays")
    na = np.linalg.norm(av)
    nb = np.linalg.norm(bv)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(av, bv) / (na * nb))
