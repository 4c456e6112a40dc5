"""Deterministic audio primitives: WAV I/O, STFT, pitch, stretch, splice.

All operations are pure functions on immutable inputs: same inputs give
bit-identical outputs, so corpus builds are reproducible and safe to
parallelize across files.
"""

from __future__ import annotations

import wave
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class ClippingWarning(UserWarning):
    """A waveform operation produced samples outside [-1, 1] and clipped them."""


@dataclass(frozen=True)
class Waveform:
    """Mono sample sequence in [-1, 1] with its sample rate in Hz."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        arr = np.asarray(self.samples, dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError("waveform samples must be one-dimensional")
        if not np.all(np.isfinite(arr)):
            raise ValueError("waveform contains non-finite samples")
        if arr.size and (arr.max() > 1.0 or arr.min() < -1.0):
            warnings.warn("samples exceeded [-1, 1]; clipping", ClippingWarning, stacklevel=3)
            arr = np.clip(arr, -1.0, 1.0)
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)

    @property
    def n_samples(self) -> int:
        return int(self.samples.size)

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate

    def slice_samples(self, start: int, stop: int) -> "Waveform":
        """Sub-waveform over sample indices [start, stop)."""
        if not 0 <= start <= stop <= self.n_samples:
            raise ValueError(f"slice [{start}, {stop}) out of range for {self.n_samples} samples")
        return Waveform(self.samples[start:stop], self.sample_rate)


@dataclass(frozen=True)
class StftConfig:
    """Analysis parameters; defaults give 25 ms / 10 ms frames and 256 bins at 16 kHz."""

    window_len: int = 400
    hop: int = 160
    fft_size: int = 512
    n_bins: int = 256
    window_fn: str = "hann"

    def __post_init__(self):
        if self.hop < 1:
            raise ValueError("hop must be >= 1")
        if self.window_len > self.fft_size:
            raise ValueError("window_len must not exceed fft_size")
        if self.n_bins > self.fft_size // 2 + 1:
            raise ValueError("n_bins must not exceed fft_size/2 + 1")
        if self.window_fn != "hann":
            raise ValueError(f"unsupported window function {self.window_fn!r}")

    def frame_count(self, n_samples: int) -> int:
        if n_samples < self.window_len:
            raise ValueError("signal shorter than one analysis window")
        return (n_samples - self.window_len) // self.hop + 1


@dataclass(frozen=True)
class Spectrogram:
    """frames x n_bins grid of log(1 + magnitude) values."""

    values: np.ndarray
    config: StftConfig
    origin_time: float = 0.0

    @property
    def n_frames(self) -> int:
        return int(self.values.shape[0])


def _hann(n: int) -> np.ndarray:
    # periodic Hann, the standard STFT taper
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)


def load_wav(path: str | Path) -> Waveform:
    """Read a 16-bit PCM WAV file (first channel of multichannel files).

    Samples are scaled to [-1, 1] by dividing by 32768.
    """
    try:
        with wave.open(str(path), "rb") as fh:
            n_channels = fh.getnchannels()
            sampwidth = fh.getsampwidth()
            n_frames = fh.getnframes()
            rate = fh.getframerate()
            if fh.getcomptype() != "NONE":
                raise ValueError(f"{path}: unsupported WAV compression {fh.getcomptype()!r}")
            if sampwidth != 2:
                raise ValueError(f"{path}: only 16-bit PCM supported, got {8 * sampwidth}-bit")
            if n_frames == 0:
                raise ValueError(f"{path}: empty WAV file")
            raw = fh.readframes(n_frames)
    except wave.Error as exc:
        raise ValueError(f"{path}: malformed WAV header ({exc})") from exc
    data = np.frombuffer(raw, dtype="<i2").reshape(-1, n_channels)[:, 0]
    return Waveform(data.astype(np.float64) / 32768.0, rate)


def save_wav(waveform: Waveform, path: str | Path) -> None:
    """Write a mono 16-bit PCM WAV file.

    Samples are quantized as round(x * 32768) clipped to the int16 range, so a
    load/save round trip stays within 1/32768 of the original.
    """
    if not np.all(np.isfinite(waveform.samples)):
        raise ValueError("cannot save non-finite samples")
    q = np.clip(np.round(waveform.samples * 32768.0), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(2)
        fh.setframerate(waveform.sample_rate)
        fh.writeframes(q.tobytes())


def stft(waveform: Waveform, config: StftConfig = StftConfig()) -> Spectrogram:
    """Log-magnitude STFT: frame t covers samples [t*hop, t*hop + window_len).

    Each frame is log(1 + |DFT(windowed segment)|) over bins 0..n_bins-1; the
    window is zero-padded into fft_size points.
    """
    x = waveform.samples
    n_frames = config.frame_count(x.size)
    window = _hann(config.window_len)
    idx = np.arange(config.window_len)[None, :] + config.hop * np.arange(n_frames)[:, None]
    frames = x[idx] * window[None, :]
    spec = np.fft.rfft(frames, n=config.fft_size, axis=1)
    mags = np.abs(spec[:, : config.n_bins])
    return Spectrogram(np.log1p(mags), config)


PITCH_FMIN = 60.0
PITCH_FMAX = 400.0
_PITCH_FRAME_S = 0.040
_PITCH_HOP_S = 0.010
_VOICING_THRESHOLD = 0.5


def estimate_mean_pitch(waveform: Waveform) -> float | None:
    """Mean f0 in Hz over voiced frames, or None if no frame is voiced.

    Frames are 40 ms with a 10 ms hop; each frame's autocorrelation is peak
    picked in the 60-400 Hz lag band with parabolic refinement. A frame counts
    as voiced when its length-corrected peak exceeds 0.5 of the zero-lag
    energy.
    """
    sr = waveform.sample_rate
    x = waveform.samples
    if x.size < round(0.050 * sr):
        raise ValueError("segment too short for pitch estimation (< 50 ms)")
    frame_len = min(round(_PITCH_FRAME_S * sr), x.size)
    hop = max(1, round(_PITCH_HOP_S * sr))
    min_lag = max(2, int(sr / PITCH_FMAX))
    max_lag = min(int(np.ceil(sr / PITCH_FMIN)), frame_len - 2)
    if max_lag <= min_lag:
        raise ValueError("segment too short for the pitch search band")

    nfft = 1 << int(np.ceil(np.log2(2 * frame_len)))
    estimates = []
    for start in range(0, x.size - frame_len + 1, hop):
        frame = x[start : start + frame_len]
        frame = frame - frame.mean()
        if np.max(np.abs(frame)) < 1e-6:
            continue
        spec = np.fft.rfft(frame, n=nfft)
        r = np.fft.irfft(spec * np.conj(spec), n=nfft)[: frame_len]
        if r[0] <= 0:
            continue
        # peak-pick the biased autocorrelation: its linear taper keeps period
        # multiples below the true period, avoiding octave-down errors
        peak = int(np.argmax(r[min_lag : max_lag + 1]))
        lag = min_lag + peak
        # undo the taper only for the voicing decision
        voicing = r[lag] * frame_len / ((frame_len - lag) * r[0])
        if voicing < _VOICING_THRESHOLD:
            continue
        if 0 < lag < frame_len - 1:
            a, b, c = r[lag - 1], r[lag], r[lag + 1]
            denom = a - 2 * b + c
            if denom < 0:
                lag = lag + 0.5 * (a - c) / denom
        estimates.append(sr / lag)
    if not estimates:
        return None
    return float(np.mean(estimates))


def time_stretch(waveform: Waveform, factor: float) -> Waveform:
    """Resample the sample grid: duration scales by ``factor``, pitch by 1/factor."""
    if factor <= 0:
        raise ValueError("stretch factor must be positive")
    if factor == 1.0:
        return waveform
    n_in = waveform.n_samples
    n_out = int(round(n_in * factor))
    if n_in == 0 or n_out == 0:
        return Waveform(np.zeros(n_out), waveform.sample_rate)
    positions = np.minimum(np.arange(n_out) / factor, n_in - 1)
    out = np.interp(positions, np.arange(n_in), waveform.samples)
    return Waveform(out, waveform.sample_rate)


_PV_FFT = 1024
_PV_HOP = 256


def _pv_time_stretch(x: np.ndarray, factor: float) -> np.ndarray:
    """Phase-vocoder time stretch: duration scales by ``factor``, pitch preserved."""
    n_target = int(round(x.size * factor))
    if x.size < _PV_FFT:
        # too short for spectral processing; fall back to grid resampling
        pos = np.minimum(np.arange(n_target) / factor, max(x.size - 1, 0))
        return np.interp(pos, np.arange(x.size), x) if x.size else np.zeros(n_target)
    # pad enough that the returned span comes from output with full window
    # coverage and settled synthesis phase; the margins are discarded
    out_margin = 2 * _PV_FFT
    pad = _PV_FFT // 2 + int(np.ceil(out_margin / factor)) + _PV_FFT
    xp = np.pad(x, pad, mode="reflect")
    n_frames = (xp.size - _PV_FFT) // _PV_HOP + 1
    window = _hann(_PV_FFT)
    idx = np.arange(_PV_FFT)[None, :] + _PV_HOP * np.arange(n_frames)[:, None]
    spec = np.fft.rfft(xp[idx] * window[None, :], axis=1).T  # bins x frames

    omega = 2.0 * np.pi * _PV_HOP * np.arange(spec.shape[0]) / _PV_FFT
    steps = np.arange(0.0, n_frames - 1, 1.0 / factor)
    mags = np.abs(spec)
    phases = np.angle(spec)
    acc = phases[:, 0].copy()
    out_frames = np.empty((steps.size, _PV_FFT))
    for k, t in enumerate(steps):
        i = int(t)
        frac = t - i
        mag = (1.0 - frac) * mags[:, i] + frac * mags[:, i + 1]
        out_frames[k] = np.fft.irfft(mag * np.exp(1j * acc), n=_PV_FFT)
        dphi = phases[:, i + 1] - phases[:, i] - omega
        dphi -= 2.0 * np.pi * np.round(dphi / (2.0 * np.pi))
        acc += omega + dphi

    out_len = (steps.size - 1) * _PV_HOP + _PV_FFT
    y = np.zeros(out_len)
    norm = np.zeros(out_len)
    wsq = window * window
    for k in range(steps.size):
        lo = k * _PV_HOP
        y[lo : lo + _PV_FFT] += out_frames[k] * window
        norm[lo : lo + _PV_FFT] += wsq
    # floor the window-power normalization so thin coverage at the buffer
    # edges fades out instead of amplifying numerically tiny samples
    y = y / np.maximum(norm, 1e-2)
    offset = int(round(pad * factor))
    y = y[offset : offset + n_target]
    if y.size >= n_target:
        return y
    return np.pad(y, (0, n_target - y.size))


def pitch_shift(waveform: Waveform, ratio: float) -> Waveform:
    """Multiply pitch by ``ratio`` with duration preserved within one hop.

    A phase-vocoder stretch changes duration by ``ratio`` keeping pitch, then
    grid resampling restores the duration while scaling all frequencies.
    """
    if ratio <= 0:
        raise ValueError("pitch ratio must be positive")
    if ratio == 1.0:
        return waveform
    stretched = _pv_time_stretch(waveform.samples, ratio)
    return time_stretch(Waveform(stretched, waveform.sample_rate), 1.0 / ratio)


def crossfade_splice(
    left: Waveform,
    insert: Waveform,
    right: Waveform,
    overlap_ms: float = 10.0,
) -> Waveform:
    """Join three pieces with linear crossfades over ``overlap_ms``.

    Output length is exactly len(left) + len(insert) + len(right) - 2*overlap.
    """
    sr = left.sample_rate
    if insert.sample_rate != sr or right.sample_rate != sr:
        raise ValueError("sample rates of spliced pieces must match")
    n = int(round(overlap_ms * sr / 1000.0))
    if n == 0:
        return Waveform(
            np.concatenate([left.samples, insert.samples, right.samples]), sr
        )
    if left.n_samples < n or right.n_samples < n or insert.n_samples < 2 * n:
        raise ValueError("piece shorter than the crossfade overlap")
    # ramp never hits exactly 0/1 so no sample enters at full weight twice
    ramp = np.arange(1, n + 1) / (n + 1)
    a = left.samples[-n:]
    b = insert.samples[:n]
    head = a + ramp * (b - a)
    c = insert.samples[-n:]
    d = right.samples[:n]
    tail = c + ramp * (d - c)
    out = np.concatenate(
        [left.samples[:-n], head, insert.samples[n:-n], tail, right.samples[n:]]
    )
    return Waveform(out, sr)


def make_silence(duration_ms: float, sample_rate: int) -> Waveform:
    """Zero samples of the requested duration, rounded to the nearest sample."""
    if duration_ms < 0:
        raise ValueError("silence duration must be non-negative")
    n = int(round(duration_ms * sample_rate / 1000.0))
    return Waveform(np.zeros(n), sample_rate)
