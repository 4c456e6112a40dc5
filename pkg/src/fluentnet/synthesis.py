"""Disfluency injection: turn clean aligned speech into labeled stuttered speech.

The synthesizer walks fixed-length windows over the source timeline and, per
window, decides with a configured probability whether to inject exactly one
disfluency at a word chosen from that window. Five disfluency kinds are
supported:

* ``S``  sound repetition: the word's initial sound is repeated 1-3 times,
  each copy followed by a silent pause, before the word itself.
* ``W``  word repetition: 1-2 whole-word copies before the word, each
  followed by a pause.
* ``PH`` phrase repetition: one copy of 2-3 consecutive words plus a pause,
  inserted before the phrase.
* ``I``  interjection: a filler token, pitch-aligned to its context, plus a
  pause, inserted before a word.
* ``PR`` prolongation: the final fifth of a word is time-stretched with its
  pitch realigned afterwards.

All splicing is sample-exact: the output length equals the input length plus
the sum over events of (inserted - replaced) samples, and every untouched
word's samples appear bit-identical at its shifted position. Crossfades are
paid for by duplicating a few milliseconds of context inside the inserted
region rather than by shortening it.

Randomness comes exclusively from the caller-supplied generator. Per window
the draw order is: gate; then (probability mode) one type choice; then target
word index; then the type's own draws (S: fraction, count, one pause per
copy; W: count, one pause per copy; PH: phrase length, pause; I: filler
index, pause; PR: none). Quota mode shuffles the full type deck once up
front instead of drawing a type per window.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .audio import (
    Waveform,
    crossfade_splice,
    estimate_mean_pitch,
    load_wav,
    pitch_shift,
    save_wav,
    time_stretch,
)

DISFLUENCY_TYPES = ("S", "W", "PH", "I", "PR")
CLEAN = "CLEAN"


@dataclass(frozen=True)
class WordSpan:
    """A word and its time span in the source recording, in seconds."""

    word: str
    start_s: float
    end_s: float


@dataclass(frozen=True)
class LabelRow:
    """One row of a label file: a span of the output and its class."""

    word: str
    start_s: float
    end_s: float
    dtype: str


@dataclass(frozen=True)
class Event:
    """Sample-exact record of one injected disfluency."""

    dtype: str
    window_index: int
    word_index: int
    text: str
    insert_start: int
    inserted: int
    replaced: int
    label_start: int
    label_end: int

    @property
    def delta(self) -> int:
        return self.inserted - self.replaced


@dataclass(frozen=True)
class SynthesisConfig:
    """Knobs of the injection procedure; defaults match the target corpus."""

    window_s: float = 4.0
    insert_prob: float = 0.833
    type_weights: dict[str, float] | None = None
    quotas: dict[str, int] | None = None
    pause_ms_range: tuple[float, float] = (100.0, 350.0)
    sound_rep_count_range: tuple[int, int] = (1, 3)
    word_rep_count_range: tuple[int, int] = (1, 2)
    phrase_word_range: tuple[int, int] = (2, 3)
    sound_fraction_range: tuple[float, float] = (0.15, 0.35)
    min_sound_ms: float = 60.0
    prolong_fraction: float = 0.2
    prolong_factor: float = 5.0
    crossfade_ms: float = 10.0
    fade_ms: float = 5.0

    def __post_init__(self):
        if not 0.0 <= self.insert_prob <= 1.0:
            raise ValueError("insert_prob must be in [0, 1]")
        if self.window_s <= 0:
            raise ValueError("window_s must be positive")
        for name in ("pause_ms_range", "sound_fraction_range"):
            lo, hi = getattr(self, name)
            if lo < 0 or hi < lo:
                raise ValueError(f"{name} must satisfy 0 <= lo <= hi")
        for name in ("sound_rep_count_range", "word_rep_count_range", "phrase_word_range"):
            lo, hi = getattr(self, name)
            if lo < 1 or hi < lo:
                raise ValueError(f"{name} must satisfy 1 <= lo <= hi")
        if self.phrase_word_range[0] < 2:
            raise ValueError("phrase repetition needs at least 2 words")
        if not 0.0 < self.prolong_fraction <= 1.0:
            raise ValueError("prolong_fraction must be in (0, 1]")
        if self.prolong_factor <= 1.0:
            raise ValueError("prolong_factor must exceed 1")
        if self.type_weights is not None:
            unknown = set(self.type_weights) - set(DISFLUENCY_TYPES)
            if unknown:
                raise ValueError(f"unknown disfluency types in weights: {sorted(unknown)}")
            if any(w < 0 for w in self.type_weights.values()):
                raise ValueError("type weights must be non-negative")
        if self.quotas is not None:
            unknown = set(self.quotas) - set(DISFLUENCY_TYPES)
            if unknown:
                raise ValueError(f"unknown disfluency types in quotas: {sorted(unknown)}")
            if any(q < 0 for q in self.quotas.values()):
                raise ValueError("quotas must be non-negative")


@dataclass
class SynthesisResult:
    """Stuttered audio plus everything needed to audit or label it."""

    waveform: Waveform
    rows: list[LabelRow]
    events: list[Event]
    counts: dict[str, int]
    n_windows: int
    n_gated: int
    source_samples: int


class _Word:
    __slots__ = ("text", "src_start", "src_end", "out_start", "out_end",
                 "dtype", "label_start", "label_end", "consumed")

    def __init__(self, text: str, start: int, end: int):
        self.text = text
        self.src_start = start
        self.src_end = end
        self.out_start = start
        self.out_end = end
        self.dtype = CLEAN
        self.label_start = start
        self.label_end = end
        self.consumed = False


def _validate_words(words: list[WordSpan], n_samples: int, sr: int) -> list[_Word]:
    out = []
    prev_end = 0
    for i, ws in enumerate(words):
        start = int(round(ws.start_s * sr))
        end = int(round(ws.end_s * sr))
        if start >= end:
            raise ValueError(f"word {i} ({ws.word!r}) has empty span")
        if start < prev_end:
            raise ValueError(f"word {i} ({ws.word!r}) overlaps the previous word")
        if end > n_samples:
            raise ValueError(f"word {i} ({ws.word!r}) extends past end of audio")
        out.append(_Word(ws.word, start, end))
        prev_end = end
    return out


def _fade_edges(x: np.ndarray, n: int) -> np.ndarray:
    """Linear fade-in/out applied in place over at most half the fragment."""
    n = min(n, x.size // 2)
    if n > 0:
        ramp = np.arange(1, n + 1) / (n + 1)
        x[:n] *= ramp
        x[-n:] *= ramp[::-1]
    return x


def _draw_pause(rng: np.random.Generator, config: SynthesisConfig, sr: int) -> np.ndarray:
    ms = rng.uniform(*config.pause_ms_range)
    return np.zeros(int(round(ms * sr / 1000.0)))


def _splice(audio: np.ndarray, sr: int, a: int, b: int, fragment: np.ndarray,
            ov: int, overlap_ms: float) -> np.ndarray:
    """Replace audio[a:b] with fragment; output length is exact by extending
    the cut points into context so the crossfades consume duplicated samples."""
    left = Waveform(audio[: a + ov], sr)
    insert = Waveform(fragment, sr)
    right = Waveform(audio[b - ov :], sr)
    return crossfade_splice(left, insert, right, overlap_ms=overlap_ms).samples


def synthesize_file(
    clean: Waveform,
    words: list[WordSpan],
    config: SynthesisConfig,
    rng: np.random.Generator,
    filler_pool: list[tuple[str, Waveform]] | None = None,
) -> SynthesisResult:
    """Inject disfluencies into one clean recording.

    ``words`` is the recording's word alignment, sorted and non-overlapping.
    ``filler_pool`` supplies (token, waveform) candidates for interjections;
    without it the ``I`` type is never injected.
    """
    sr = clean.sample_rate
    audio = np.array(clean.samples)
    ws = _validate_words(words, audio.size, sr)
    ov = int(round(config.crossfade_ms * sr / 1000.0))
    fade_n = int(round(config.fade_ms * sr / 1000.0))
    window_len = int(round(config.window_s * sr))
    n_windows = max(1, -(-audio.size // window_len))
    min_sound = int(round(config.min_sound_ms * sr / 1000.0))

    members: list[list[int]] = [[] for _ in range(n_windows)]
    for i, w in enumerate(ws):
        members[min(w.src_start // window_len, n_windows - 1)].append(i)

    if filler_pool is not None:
        for name, fw in filler_pool:
            if fw.sample_rate != sr:
                raise ValueError(f"filler {name!r} sample rate {fw.sample_rate} != {sr}")

    deck: list[str] | None = None
    if config.quotas is not None:
        flat = [t for t in DISFLUENCY_TYPES for _ in range(config.quotas.get(t, 0))]
        deck = [flat[j] for j in rng.permutation(len(flat))] if flat else []

    def eligible(t: str, i: int) -> bool:
        w = ws[i]
        d = w.out_end - w.out_start
        if d < ov:
            return False
        if t == "PH":
            need = config.phrase_word_range[0] - 1
            follow = ws[i + 1 : i + 1 + need]
            return (len(follow) == need
                    and all(not f.consumed and f.dtype == CLEAN for f in follow))
        if t == "I":
            return bool(filler_pool)
        if t == "PR":
            # replacement must be long enough to carry both crossfades
            tail = int(round(config.prolong_fraction * d))
            return tail >= 1 and int(round(tail * config.prolong_factor)) >= 2 * ov
        return True

    events: list[Event] = []
    counts = {t: 0 for t in DISFLUENCY_TYPES}
    n_gated = 0

    for win in range(n_windows):
        gate = rng.random()
        if gate >= config.insert_prob:
            continue
        n_gated += 1
        cand = [i for i in members[win] if not ws[i].consumed and ws[i].dtype == CLEAN]
        if not cand:
            continue
        avail = {t: [i for i in cand if eligible(t, i)] for t in DISFLUENCY_TYPES}

        if deck is not None:
            pick = next((j for j, t in enumerate(deck) if avail[t]), None)
            if pick is None:
                continue
            dtype = deck.pop(pick)
        else:
            weights = config.type_weights or {t: 1.0 for t in DISFLUENCY_TYPES}
            names = [t for t in DISFLUENCY_TYPES if avail[t] and weights.get(t, 0.0) > 0]
            if not names:
                continue
            p = np.array([weights[t] for t in names])
            dtype = names[int(rng.choice(len(names), p=p / p.sum()))]

        tgt = avail[dtype][int(rng.integers(len(avail[dtype])))]
        w = ws[tgt]
        d = w.out_end - w.out_start

        if dtype == "S":
            frac = rng.uniform(*config.sound_fraction_range)
            frag_len = min(d, max(int(round(frac * d)), min_sound))
            frag = audio[w.out_start : w.out_start + frag_len]
            k = int(rng.integers(config.sound_rep_count_range[0],
                                 config.sound_rep_count_range[1] + 1))
            parts = []
            for _ in range(k):
                parts.append(_fade_edges(frag.copy(), fade_n))
                parts.append(_draw_pause(rng, config, sr))
            fragment = np.concatenate(parts)
            a = b = w.out_start
            label_words = [tgt]
            text = w.text
        elif dtype == "W":
            k = int(rng.integers(config.word_rep_count_range[0],
                                 config.word_rep_count_range[1] + 1))
            parts = []
            for _ in range(k):
                parts.append(_fade_edges(audio[w.out_start : w.out_end].copy(), fade_n))
                parts.append(_draw_pause(rng, config, sr))
            fragment = np.concatenate(parts)
            a = b = w.out_start
            label_words = [tgt]
            text = w.text
        elif dtype == "PH":
            lo, hi = config.phrase_word_range
            last_ok = tgt
            while (last_ok + 1 < len(ws) and last_ok - tgt + 1 < hi
                   and not ws[last_ok + 1].consumed and ws[last_ok + 1].dtype == CLEAN):
                last_ok += 1
            m = int(rng.integers(lo, max(lo, last_ok - tgt + 1) + 1))
            last = tgt + m - 1
            phrase = _fade_edges(audio[w.out_start : ws[last].out_end].copy(), fade_n)
            fragment = np.concatenate([phrase, _draw_pause(rng, config, sr)])
            a = b = w.out_start
            label_words = list(range(tgt, last + 1))
            text = " ".join(ws[j].text for j in label_words)
        elif dtype == "I":
            assert filler_pool
            name, fw = filler_pool[int(rng.integers(len(filler_pool)))]
            filler = fw.samples.copy()
            if d >= int(round(0.050 * sr)) and fw.n_samples >= int(round(0.050 * sr)):
                ctx_f0 = estimate_mean_pitch(Waveform(audio[w.out_start : w.out_end], sr))
                fil_f0 = estimate_mean_pitch(fw)
                if ctx_f0 is not None and fil_f0 is not None:
                    ratio = float(np.clip(ctx_f0 / fil_f0, 0.5, 2.0))
                    filler = pitch_shift(fw, ratio).samples.copy()
            fragment = np.concatenate([_fade_edges(filler, fade_n),
                                       _draw_pause(rng, config, sr)])
            a = b = w.out_start
            label_words = []
            text = name
        else:  # PR
            tail = int(round(config.prolong_fraction * d))
            a = w.out_end - tail
            b = w.out_end
            stretched = time_stretch(Waveform(audio[a:b], sr), config.prolong_factor)
            fragment = pitch_shift(stretched, config.prolong_factor).samples
            label_words = [tgt]
            text = w.text

        if fragment.size < 2 * ov:
            # degenerate config (e.g. zero pauses on a tiny word); skip cleanly
            continue
        audio = _splice(audio, sr, a, b, fragment, ov, config.crossfade_ms)
        delta = fragment.size - (b - a)

        for other in ws:
            if other.out_start >= b and other is not w:
                other.out_start += delta
                other.out_end += delta
                other.label_start += delta
                other.label_end += delta
        if dtype == "PR":
            w.out_end += delta
        else:
            w.out_start += delta
            w.out_end += delta
            w.label_start += delta
            w.label_end += delta

        if dtype == "I":
            label_start, label_end = a, a + fragment.size
        elif dtype == "PR":
            label_start, label_end = w.out_start, w.out_end
        else:
            last_w = ws[label_words[-1]]
            label_start, label_end = a, last_w.out_end
        for j in label_words:
            ws[j].dtype = dtype
            ws[j].consumed = j != tgt
        if label_words:
            w.label_start, w.label_end = label_start, label_end

        events.append(Event(dtype=dtype, window_index=win, word_index=tgt,
                            text=text, insert_start=a, inserted=fragment.size,
                            replaced=b - a, label_start=label_start,
                            label_end=label_end))
        counts[dtype] += 1

    rows = []
    for i, w in enumerate(ws):
        if w.consumed:
            continue
        txt = w.text
        if w.dtype == "PH":
            ev = next(e for e in events if e.dtype == "PH" and e.word_index == i)
            txt = ev.text
        rows.append(LabelRow(txt, w.label_start / sr, w.label_end / sr, w.dtype))
    for e in events:
        if e.dtype == "I":
            rows.append(LabelRow(e.text, e.label_start / sr, e.label_end / sr, "I"))
    rows.sort(key=lambda r: (r.start_s, r.end_s))

    return SynthesisResult(
        waveform=Waveform(audio, sr),
        rows=rows,
        events=events,
        counts=counts,
        n_windows=n_windows,
        n_gated=n_gated,
        source_samples=clean.n_samples,
    )


def source_position(events: list[Event], out_pos: int) -> int:
    """Map an output sample index back to the source timeline.

    Positions inside inserted material map to the start of the source span
    the event attached to. Events must be in injection order, which is how
    ``synthesize_file`` returns them.
    """
    shift = 0
    for e in events:
        if out_pos >= e.insert_start + e.inserted:
            shift += e.delta
        elif out_pos > e.insert_start:
            return e.insert_start - shift
        else:
            break
    return out_pos - shift


def write_labels_csv(path: str | Path, rows: list[LabelRow]) -> None:
    """Write label rows as ``word,start_s,end_s,type`` with millisecond precision."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["word", "start_s", "end_s", "type"])
        for r in rows:
            writer.writerow([r.word, f"{r.start_s:.3f}", f"{r.end_s:.3f}", r.dtype])


def read_labels_csv(path: str | Path) -> list[LabelRow]:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["word", "start_s", "end_s", "type"]:
            raise ValueError(f"{path}: unexpected label header {header}")
        for rec in reader:
            word, start, end, dtype = rec
            if dtype != CLEAN and dtype not in DISFLUENCY_TYPES:
                raise ValueError(f"{path}: unknown label type {dtype!r}")
            rows.append(LabelRow(word, float(start), float(end), dtype))
    return rows


def read_alignments_csv(path: str | Path) -> list[WordSpan]:
    """Read a source word alignment: ``word,start_s,end_s``."""
    spans = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["word", "start_s", "end_s"]:
            raise ValueError(f"{path}: unexpected alignment header {header}")
        for word, start, end in reader:
            spans.append(WordSpan(word, float(start), float(end)))
    return spans


def write_alignments_csv(path: str | Path, spans: list[WordSpan]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["word", "start_s", "end_s"])
        for s in spans:
            writer.writerow([s.word, f"{s.start_s:.3f}", f"{s.end_s:.3f}"])


_FILLER_SPECS = {
    # token -> (f0 Hz, duration s, harmonic amplitudes)
    "uh": (130.0, 0.30, (0.40, 0.25, 0.12, 0.06)),
    "um": (120.0, 0.35, (0.45, 0.15, 0.05, 0.02)),
    "er": (140.0, 0.28, (0.35, 0.30, 0.15, 0.05)),
}


def make_filler_waveform(token: str, sample_rate: int = 16000) -> Waveform:
    """A deterministic synthetic filler vowel for the given token."""
    if token not in _FILLER_SPECS:
        raise ValueError(f"unknown filler token {token!r}")
    f0, dur, amps = _FILLER_SPECS[token]
    n = int(round(dur * sample_rate))
    t = np.arange(n) / sample_rate
    x = np.zeros(n)
    for h, amp in enumerate(amps, start=1):
        x += amp * np.sin(2 * np.pi * f0 * h * t)
    env = np.minimum(1.0, np.minimum(t, dur - t) / 0.04)
    return Waveform(x * env, sample_rate)


def write_default_filler_pool(directory: str | Path, sample_rate: int = 16000) -> list[Path]:
    """Write the built-in filler tokens as WAV files; returns the paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for token in sorted(_FILLER_SPECS):
        path = directory / f"{token}.wav"
        save_wav(make_filler_waveform(token, sample_rate), path)
        paths.append(path)
    return paths


def load_filler_pool(directory: str | Path) -> list[tuple[str, Waveform]]:
    """Load every WAV in a directory as (token, waveform), sorted by filename."""
    directory = Path(directory)
    pool = []
    for path in sorted(directory.glob("*.wav")):
        pool.append((path.stem, load_wav(path)))
    if not pool:
        raise ValueError(f"no WAV files found in {directory}")
    return pool
