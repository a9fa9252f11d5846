"""Learning of per-DOF measurement operators from single-DOF training data.

For each degree of freedom and movement direction, the encoded training
states are combined into an angle-weighted prototype; its outer product
is the rank-1 measurement operator for that direction. A third operator
completes the set: identity minus the two direction operators. The
completion is not guaranteed positive when the direction prototypes
overlap; that defect is kept as-is and reported by the diagnostics
rather than clipped away, since clipping would change decoding.
"""

import enum
import json
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    DegeneratePrototypeError,
    DimensionError,
    InsufficientTrainingError,
)
from .features import FeatureVector
from .state import QuantumState, encode, inner_product

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-12
COMPLETENESS_TOL = 1e-10
OVERLAP_TOL = 1e-12

MODEL_FORMAT_VERSION = 1


class Dof(enum.Enum):
    """Wrist degrees of freedom, with their wire-format names."""

    FLEXION_EXTENSION = "d1"
    RADIAL_ULNAR = "d2"
    PRONATION_SUPINATION = "d3"

    def __lt__(self, other):
        return self.value < other.value


class Direction(enum.Enum):
    """Movement direction along one DOF.

    Positive is flexion / radial deviation / pronation, negative the
    opposite movement; rest means the DOF is inactive.
    """

    POSITIVE = "positive"
    NEGATIVE = "negative"
    REST = "rest"


class MovementPhase(enum.Enum):
    DIRECT = "direct"
    RETURN = "return"


@dataclass(frozen=True)
class TrainingSample:
    """One labeled training window: features plus the single active DOF."""

    features: FeatureVector
    dof: Dof
    direction: Direction
    angle: float
    movement_phase: MovementPhase = MovementPhase.DIRECT

    def __post_init__(self):
        if self.direction is Direction.REST:
            raise ValueError("training samples must have a positive or negative direction")
        if not self.angle > 0:
            raise ValueError(f"training angle must be > 0, got {self.angle}")


@dataclass(frozen=True)
class Operator:
    """Real symmetric matrix acting on encoded states."""

    matrix: np.ndarray

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise DimensionError(f"operator must be square, got shape {matrix.shape}")
        if not np.all(np.isfinite(matrix)):
            raise ValueError("operator entries must be finite")
        asym = float(np.max(np.abs(matrix - matrix.T)))
        if asym > SYMMETRY_TOL:
            raise ValueError(f"operator is not symmetric: max asymmetry {asym!r}")
        object.__setattr__(self, "matrix", matrix)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.matrix))


@dataclass(frozen=True)
class DecodeConfig:
    """Thresholds used when turning expectation values into decisions.

    ``rest_threshold`` is the deadzone on the difference of the two
    direction expectations below which a DOF is reported at rest.
    ``overlap_epsilon`` guards the 1/(1 - overlap) singularity of the
    proportional angle formula. ``block_vote`` selects how a block-level
    classification error is counted from its windows.
    """

    rest_threshold: float = 0.05
    overlap_epsilon: float = 1e-6
    block_vote: str = "majority"

    def __post_init__(self):
        if self.rest_threshold < 0:
            raise ValueError(f"rest_threshold must be >= 0, got {self.rest_threshold}")
        if not 0 < self.overlap_epsilon < 1:
            raise ValueError(
                f"overlap_epsilon must be in (0, 1), got {self.overlap_epsilon}"
            )
        if self.block_vote not in ("majority", "any", "all"):
            raise ValueError(f"unknown block_vote rule: {self.block_vote!r}")


@dataclass(frozen=True)
class DofOperators:
    """Learned operator triple for one DOF plus decoding constants."""

    proto_pos: QuantumState
    proto_neg: QuantumState
    p_pos: Operator
    p_neg: Operator
    p_zero: Operator
    theta_pos_max: float
    theta_neg_max: float
    overlap: float

    def __post_init__(self):
        dims = {
            self.proto_pos.dim,
            self.proto_neg.dim,
            self.p_pos.dim,
            self.p_neg.dim,
            self.p_zero.dim,
        }
        if len(dims) != 1:
            raise DimensionError(f"inconsistent operator dimensions: {sorted(dims)}")
        if not (self.theta_pos_max > 0 and self.theta_neg_max > 0):
            raise ValueError("maximal training angles must be > 0")
        total = self.p_pos.matrix + self.p_neg.matrix + self.p_zero.matrix
        dev = float(np.max(np.abs(total - np.eye(self.p_pos.dim))))
        if dev > COMPLETENESS_TOL:
            raise ValueError(f"operator triple does not sum to identity: max dev {dev!r}")
        trace_overlap = float(np.sum(self.p_pos.matrix * self.p_neg.matrix))
        if abs(self.overlap - trace_overlap) > OVERLAP_TOL:
            raise ValueError(
                f"cached overlap {self.overlap!r} disagrees with "
                f"Tr(p_pos p_neg) = {trace_overlap!r}"
            )

    @property
    def dim(self) -> int:
        return self.p_pos.dim

    def min_zero_eigenvalue(self) -> float:
        """Smallest eigenvalue of the completion operator.

        Negative values mean the learned triple is not positive, which
        happens whenever the direction prototypes overlap.
        """
        return float(np.linalg.eigvalsh(self.p_zero.matrix)[0])


@dataclass(frozen=True)
class ControllerModel:
    """All per-DOF operator sets plus the decode configuration."""

    dofs: dict[Dof, DofOperators]
    n_channels: int
    decode_config: DecodeConfig = field(default_factory=DecodeConfig)

    def __post_init__(self):
        if not self.dofs:
            raise InsufficientTrainingError("model has no trained DOFs")
        for dof, ops in self.dofs.items():
            if ops.dim != self.n_channels:
                raise DimensionError(
                    f"{dof.value}: operators are {ops.dim}-dimensional, "
                    f"model expects {self.n_channels} channels"
                )

    def sorted_dofs(self) -> list[Dof]:
        return sorted(self.dofs)


def build_prototype(samples: list[TrainingSample]) -> QuantumState:
    """Angle-weighted superposition of encoded training states.

    Each sample is encoded to a unit state, weighted by its share of the
    total training angle, summed, and the sum is renormalized so the
    resulting prototype is again a unit state.
    """
    if not samples:
        raise InsufficientTrainingError("cannot build a prototype from no samples")
    dofs = {s.dof for s in samples}
    directions = {s.direction for s in samples}
    if len(dofs) != 1 or len(directions) != 1:
        raise ValueError(
            f"prototype samples must share one DOF and direction, got "
            f"{sorted(d.value for d in dofs)} / {sorted(d.value for d in directions)}"
        )
    states = np.stack([encode(s.features).amplitudes for s in samples])
    angles = np.array([s.angle for s in samples], dtype=float)
    weights = angles / angles.sum()
    combined = weights @ states
    norm = float(np.linalg.norm(combined))
    if norm < 1e-12:
        dof, direction = samples[0].dof, samples[0].direction
        raise DegeneratePrototypeError(
            f"{dof.value} {direction.value}: weighted state sum cancelled to norm {norm!r}"
        )
    return QuantumState(combined / norm)


def build_direction_operator(prototype: QuantumState) -> Operator:
    """Rank-1 projector onto a prototype: symmetric, idempotent, trace 1."""
    p = prototype.amplitudes
    return Operator(np.outer(p, p))


def build_completeness_operator(p_pos: Operator, p_neg: Operator) -> Operator:
    """Identity minus both direction operators, so the triple sums to I."""
    if p_pos.dim != p_neg.dim:
        raise DimensionError(f"operator dimensions differ: {p_pos.dim} vs {p_neg.dim}")
    return Operator(np.eye(p_pos.dim) - p_pos.matrix - p_neg.matrix)


def _build_dof_operators(
    pos_samples: list[TrainingSample], neg_samples: list[TrainingSample]
) -> DofOperators:
    proto_pos = build_prototype(pos_samples)
    proto_neg = build_prototype(neg_samples)
    p_pos = build_direction_operator(proto_pos)
    p_neg = build_direction_operator(proto_neg)
    p_zero = build_completeness_operator(p_pos, p_neg)
    return DofOperators(
        proto_pos=proto_pos,
        proto_neg=proto_neg,
        p_pos=p_pos,
        p_neg=p_neg,
        p_zero=p_zero,
        theta_pos_max=max(s.angle for s in pos_samples),
        theta_neg_max=max(s.angle for s in neg_samples),
        overlap=inner_product(proto_pos, proto_neg) ** 2,
    )


def train(
    samples: list[TrainingSample],
    n_channels: int,
    dofs: list[Dof] | None = None,
    config: DecodeConfig | None = None,
) -> ControllerModel:
    """Train one operator triple per requested DOF.

    Only direct-phase samples are used; return-phase samples are dropped
    with a logged count. ``dofs`` defaults to every DOF present in the
    training data.
    """
    for s in samples:
        if s.features.n_channels != n_channels:
            raise DimensionError(
                f"sample has {s.features.n_channels} channels, expected {n_channels}"
            )
    direct = [s for s in samples if s.movement_phase is MovementPhase.DIRECT]
    n_dropped = len(samples) - len(direct)
    if n_dropped:
        logger.info("dropped %d return-phase samples from training", n_dropped)
    usable = [s for s in direct if np.any(s.features.values != 0.0)]
    n_zero = len(direct) - len(usable)
    if n_zero:
        logger.info("dropped %d zero-signal samples from training", n_zero)
    direct = usable

    if dofs is None:
        dofs = sorted({s.dof for s in direct})
    if not dofs:
        raise InsufficientTrainingError("no direct-phase training samples")

    by_group: dict[tuple[Dof, Direction], list[TrainingSample]] = {}
    for s in direct:
        by_group.setdefault((s.dof, s.direction), []).append(s)

    trained: dict[Dof, DofOperators] = {}
    for dof in sorted(dofs):
        for direction in (Direction.POSITIVE, Direction.NEGATIVE):
            if not by_group.get((dof, direction)):
                raise InsufficientTrainingError(
                    f"no {direction.value} training samples for {dof.value}"
                )
        trained[dof] = _build_dof_operators(
            by_group[(dof, Direction.POSITIVE)], by_group[(dof, Direction.NEGATIVE)]
        )
    return ControllerModel(
        dofs=trained,
        n_channels=n_channels,
        decode_config=config if config is not None else DecodeConfig(),
    )


def overlap_curve(
    samples: list[TrainingSample],
    batch_sizes: list[int],
    n_channels: int,
    dofs: list[Dof] | None = None,
) -> dict[Dof, list[float]]:
    """Retrain on growing prefixes and record each DOF's prototype overlap.

    The overlap settling down is the learning-sufficiency diagnostic: once
    it stops moving, more training data is not going to help. Batch sizes
    must be increasing and count prefix samples of the given list, so the
    list should interleave the actions (as the synthetic generator does).
    """
    if not batch_sizes:
        raise ValueError("batch_sizes must be non-empty")
    if any(b <= 0 for b in batch_sizes):
        raise ValueError(f"batch sizes must be positive, got {batch_sizes}")
    if list(batch_sizes) != sorted(set(batch_sizes)):
        raise ValueError(f"batch sizes must be strictly increasing, got {batch_sizes}")
    if batch_sizes[-1] > len(samples):
        raise ValueError(
            f"largest batch size {batch_sizes[-1]} exceeds the "
            f"{len(samples)} available samples"
        )
    curves: dict[Dof, list[float]] = {}
    for size in batch_sizes:
        model = train(samples[:size], n_channels, dofs=dofs)
        for dof, ops in model.dofs.items():
            curves.setdefault(dof, []).append(ops.overlap)
    return curves


def _state_to_list(state: QuantumState) -> list[float]:
    return [float(v) for v in state.amplitudes]


def _matrix_to_lists(op: Operator) -> list[list[float]]:
    return [[float(v) for v in row] for row in op.matrix]


def model_to_dict(model: ControllerModel) -> dict:
    """Plain-JSON representation of a model, full float precision."""
    return {
        "format_version": MODEL_FORMAT_VERSION,
        "n_channels": model.n_channels,
        "decode_config": {
            "rest_threshold": model.decode_config.rest_threshold,
            "overlap_epsilon": model.decode_config.overlap_epsilon,
            "block_vote": model.decode_config.block_vote,
        },
        "dofs": {
            dof.value: {
                "prototype_positive": _state_to_list(ops.proto_pos),
                "prototype_negative": _state_to_list(ops.proto_neg),
                "p_positive": _matrix_to_lists(ops.p_pos),
                "p_negative": _matrix_to_lists(ops.p_neg),
                "p_zero": _matrix_to_lists(ops.p_zero),
                "theta_positive_max": ops.theta_pos_max,
                "theta_negative_max": ops.theta_neg_max,
                "overlap": ops.overlap,
            }
            for dof, ops in sorted(model.dofs.items())
        },
    }


def model_from_dict(doc: dict) -> ControllerModel:
    version = doc.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model format version: {version!r}")
    cfg = DecodeConfig(**doc["decode_config"])
    dofs: dict[Dof, DofOperators] = {}
    for key, entry in doc["dofs"].items():
        dofs[Dof(key)] = DofOperators(
            proto_pos=QuantumState(np.array(entry["prototype_positive"], dtype=float)),
            proto_neg=QuantumState(np.array(entry["prototype_negative"], dtype=float)),
            p_pos=Operator(np.array(entry["p_positive"], dtype=float)),
            p_neg=Operator(np.array(entry["p_negative"], dtype=float)),
            p_zero=Operator(np.array(entry["p_zero"], dtype=float)),
            theta_pos_max=float(entry["theta_positive_max"]),
            theta_neg_max=float(entry["theta_negative_max"]),
            overlap=float(entry["overlap"]),
        )
    return ControllerModel(
        dofs=dofs, n_channels=int(doc["n_channels"]), decode_config=cfg
    )


def save_model(model: ControllerModel, path) -> None:
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh, indent=1)
        fh.write("\n")


def load_model(path) -> ControllerModel:
    with open(path) as fh:
        return model_from_dict(json.load(fh))


def with_decode_config(model: ControllerModel, config: DecodeConfig) -> ControllerModel:
    """Copy of a model with a different decode configuration."""
    return replace(model, decode_config=config)
