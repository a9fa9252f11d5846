"""Sliding-window segmentation of raw multi-channel EMG and the four
classical time-domain features: mean absolute value, zero crossings,
slope sign changes and waveform length.

All feature functions take a window shaped (n_samples, n_channels) and
return one value per channel wrapped in a :class:`FeatureVector`.
"""

import csv
import enum
from dataclasses import dataclass

import numpy as np

from .errors import (
    DatasetParseError,
    DatasetSchemaError,
    DimensionError,
    EmptyInputError,
    InsufficientSamplesError,
)


class FeatureKind(enum.Enum):
    MAV = "mav"
    ZC = "zc"
    SSC = "ssc"
    WL = "wl"


@dataclass(frozen=True)
class EmgRecording:
    """Raw multi-channel EMG: rows are time samples, columns are channels."""

    samples: np.ndarray
    sample_rate: float

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 2:
            raise DimensionError(
                f"recording must be 2-D (samples x channels), got ndim={samples.ndim}"
            )
        if samples.shape[1] < 1:
            raise DimensionError("recording needs at least one channel")
        if not self.sample_rate > 0:
            raise ValueError(f"sample_rate must be > 0, got {self.sample_rate}")
        object.__setattr__(self, "samples", samples)

    @property
    def n_samples(self) -> int:
        return self.samples.shape[0]

    @property
    def n_channels(self) -> int:
        return self.samples.shape[1]


@dataclass(frozen=True)
class FeatureVector:
    """One feature value per channel, before any normalization."""

    values: np.ndarray
    kind: FeatureKind

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1:
            raise DimensionError(f"feature values must be 1-D, got ndim={values.ndim}")
        if not np.all(np.isfinite(values)):
            raise ValueError("feature values must be finite")
        if self.kind in (FeatureKind.MAV, FeatureKind.WL) and np.any(values < 0):
            raise ValueError(f"{self.kind.value} features must be non-negative")
        object.__setattr__(self, "values", values)

    @property
    def n_channels(self) -> int:
        return self.values.shape[0]


def _as_window(window: np.ndarray) -> np.ndarray:
    w = np.asarray(window, dtype=float)
    if w.ndim == 1:
        w = w[:, None]
    if w.ndim != 2 or w.shape[0] == 0:
        raise EmptyInputError("window must be a non-empty 2-D array")
    return w


def segment_windows(
    rec: EmgRecording, window_ms: float, step_ms: float | None = None
) -> list[np.ndarray]:
    """Cut a recording into consecutive windows.

    ``step_ms`` defaults to the window length (non-overlapping windows).
    Window and step lengths are floored to whole samples and a trailing
    partial window is dropped rather than padded.
    """
    if not window_ms > 0:
        raise ValueError(f"window_ms must be > 0, got {window_ms}")
    if step_ms is None:
        step_ms = window_ms
    if not step_ms > 0:
        raise ValueError(f"step_ms must be > 0, got {step_ms}")

    window_len = int(window_ms * rec.sample_rate / 1000.0)
    step_len = int(step_ms * rec.sample_rate / 1000.0)
    if window_len < 2:
        raise ValueError(
            f"window of {window_ms} ms spans {window_len} samples at "
            f"{rec.sample_rate} Hz; need at least 2"
        )
    if step_len < 1:
        raise ValueError(f"step of {step_ms} ms is shorter than one sample")
    if rec.n_samples < window_len:
        raise EmptyInputError(
            f"recording has {rec.n_samples} samples, shorter than one "
            f"{window_len}-sample window"
        )

    n_windows = (rec.n_samples - window_len) // step_len + 1
    return [
        rec.samples[i * step_len : i * step_len + window_len] for i in range(n_windows)
    ]


def mav(window: np.ndarray) -> FeatureVector:
    """Mean absolute value per channel."""
    w = _as_window(window)
    return FeatureVector(np.mean(np.abs(w), axis=0), FeatureKind.MAV)


def zero_crossings(window: np.ndarray, deadband: float = 0.0) -> FeatureVector:
    """Count sign changes between consecutive samples per channel.

    A crossing needs strictly opposite signs and an amplitude step larger
    than ``deadband``.
    """
    if deadband < 0:
        raise ValueError(f"deadband must be >= 0, got {deadband}")
    w = _as_window(window)
    opposite = w[:-1] * w[1:] < 0
    large = np.abs(w[:-1] - w[1:]) > deadband
    counts = np.sum(opposite & large, axis=0)
    return FeatureVector(counts.astype(float), FeatureKind.ZC)


def slope_sign_changes(window: np.ndarray, deadband: float = 0.0) -> FeatureVector:
    """Count strict local extrema per channel.

    An interior sample counts when it sits strictly above or below both
    neighbors and both neighbor differences exceed ``deadband`` in
    magnitude.
    """
    if deadband < 0:
        raise ValueError(f"deadband must be >= 0, got {deadband}")
    w = _as_window(window)
    if w.shape[0] < 3:
        raise InsufficientSamplesError(
            f"slope sign changes need at least 3 samples, got {w.shape[0]}"
        )
    left = w[1:-1] - w[:-2]
    right = w[1:-1] - w[2:]
    extremum = left * right > 0
    large = (np.abs(left) > deadband) & (np.abs(right) > deadband)
    counts = np.sum(extremum & large, axis=0)
    return FeatureVector(counts.astype(float), FeatureKind.SSC)


def waveform_length(window: np.ndarray) -> FeatureVector:
    """Sum of absolute sample-to-sample differences per channel."""
    w = _as_window(window)
    if w.shape[0] < 2:
        raise InsufficientSamplesError(
            f"waveform length needs at least 2 samples, got {w.shape[0]}"
        )
    return FeatureVector(np.sum(np.abs(np.diff(w, axis=0)), axis=0), FeatureKind.WL)


def load_recording(path, sample_rate: float = 1024.0) -> EmgRecording:
    """Read a raw recording CSV: header ``ch1..chN``, one row per sample."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetSchemaError(f"{path}: missing header row") from None
        header = [h.strip() for h in header]
        expected = [f"ch{i + 1}" for i in range(len(header))]
        if header != expected:
            raise DatasetSchemaError(
                f"{path}: header must be ch1..chN, got {header}"
            )
        n_channels = len(header)
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != n_channels:
                raise DatasetSchemaError(
                    f"{path}:{lineno}: expected {n_channels} values, got {len(row)}"
                )
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise DatasetParseError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise EmptyInputError(f"{path}: no samples after header")
    return EmgRecording(np.array(rows, dtype=float), sample_rate)


def save_recording(rec: EmgRecording, path) -> None:
    """Write a raw recording CSV in the format :func:`load_recording` reads."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"ch{i + 1}" for i in range(rec.n_channels)])
        for row in rec.samples:
            writer.writerow([repr(float(v)) for v in row])
