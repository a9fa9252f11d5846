"""Amplitude encoding of feature vectors as unit-norm states.

A window's per-channel feature values become the amplitudes of a real
n-dimensional state, normalized so the squared amplitudes sum to one.
Overall signal intensity is deliberately removed by the normalization;
only the distribution across channels survives.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ZeroSignalError
from .features import FeatureVector

NORM_TOL = 1e-12


@dataclass(frozen=True)
class QuantumState:
    """Real amplitude vector with unit Euclidean norm."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amplitudes = np.asarray(self.amplitudes, dtype=float)
        if amplitudes.ndim != 1:
            raise DimensionError(f"amplitudes must be 1-D, got ndim={amplitudes.ndim}")
        if not np.all(np.isfinite(amplitudes)):
            raise ValueError("amplitudes must be finite")
        norm_sq = float(np.dot(amplitudes, amplitudes))
        if abs(norm_sq - 1.0) > NORM_TOL:
            raise ValueError(f"state is not unit norm: sum of squares = {norm_sq!r}")
        object.__setattr__(self, "amplitudes", amplitudes)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]


def encode(fv: FeatureVector) -> QuantumState:
    """Normalize a feature vector into a unit-norm state.

    Raises :class:`ZeroSignalError` for an all-zero vector; the caller
    decides what "no signal at all" means (typically rest). Scaling by
    the largest magnitude first keeps the norm from under- or
    overflowing for extreme feature values.
    """
    values = fv.values
    peak = float(np.max(np.abs(values)))
    if peak == 0.0:
        raise ZeroSignalError("all-zero feature vector has no direction to encode")
    scaled = values / peak
    return QuantumState(scaled / float(np.linalg.norm(scaled)))


def inner_product(a: QuantumState, b: QuantumState) -> float:
    """Euclidean inner product of two states of the same dimension."""
    if a.dim != b.dim:
        raise DimensionError(f"state dimensions differ: {a.dim} vs {b.dim}")
    return float(np.dot(a.amplitudes, b.amplitudes))
