"""Experiment orchestration: train at one or more training-set sizes,
decode a test set, and summarize performance.

Reports are plain deterministic text/CSV (no timestamps) carrying the
seed and a hash of the configuration, so identical runs produce byte
identical output.
"""

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .control import DecodedAction, decode_features
from .datasets import FeatureDataset, to_blocks, to_training_samples
from .errors import ConfigurationError, DimensionError
from .evaluation import (
    BlockErrorReport,
    TrajectoryPair,
    block_errors,
    r_squared_dof,
    r_squared_global,
)
from .operators import ControllerModel, DecodeConfig, Dof, TrainingSample, train


@dataclass(frozen=True)
class ExperimentConfig:
    window_ms: float = 100.0
    sample_rate: float = 1024.0
    rest_threshold: float = 0.05
    overlap_epsilon: float = 1e-6
    block_vote: str = "majority"
    training_sizes: tuple[int, ...] = (500, 2000)
    seed: int = 0
    dofs: tuple[Dof, ...] | None = None

    def __post_init__(self):
        if not self.window_ms > 0:
            raise ValueError(f"window_ms must be > 0, got {self.window_ms}")
        if not self.sample_rate > 0:
            raise ValueError(f"sample_rate must be > 0, got {self.sample_rate}")
        if not self.training_sizes or any(s < 1 for s in self.training_sizes):
            raise ValueError(f"training sizes must be positive, got {self.training_sizes}")
        DecodeConfig(self.rest_threshold, self.overlap_epsilon, self.block_vote)

    def decode_config(self) -> DecodeConfig:
        return DecodeConfig(
            rest_threshold=self.rest_threshold,
            overlap_epsilon=self.overlap_epsilon,
            block_vote=self.block_vote,
        )

    def hash(self) -> str:
        doc = {
            "window_ms": self.window_ms,
            "sample_rate": self.sample_rate,
            "rest_threshold": self.rest_threshold,
            "overlap_epsilon": self.overlap_epsilon,
            "block_vote": self.block_vote,
            "training_sizes": list(self.training_sizes),
            "seed": self.seed,
            "dofs": None if self.dofs is None else [d.value for d in self.dofs],
        }
        digest = hashlib.sha256(json.dumps(doc, sort_keys=True).encode())
        return digest.hexdigest()[:16]


@dataclass(frozen=True)
class SizeResult:
    """Everything measured for one training-set size."""

    training_size: int
    model: ControllerModel
    overlaps: dict[Dof, float]
    r2_per_dof: dict[Dof, float]
    r2_global: float
    blocks: BlockErrorReport
    actions: list[DecodedAction]
    n_zero_signal: int
    n_clamped: int


@dataclass(frozen=True)
class ExperimentReport:
    config: ExperimentConfig | None
    config_hash: str
    dofs: list[Dof]
    n_channels: int
    n_windows: int
    n_blocks: int
    results: list[SizeResult]


def subset_per_action(
    samples: list[TrainingSample], size: int
) -> list[TrainingSample]:
    """First ``size`` samples of every (DOF, direction) group, in order."""
    taken: dict[tuple, int] = {}
    subset = []
    for s in samples:
        key = (s.dof, s.direction)
        if taken.get(key, 0) < size:
            taken[key] = taken.get(key, 0) + 1
            subset.append(s)
    for key, count in taken.items():
        if count < size:
            dof, direction = key
            raise ConfigurationError(
                f"training size {size} exceeds the {count} available "
                f"{dof.value} {direction.value} samples"
            )
    return subset


def evaluate_model(
    model: ControllerModel, test: FeatureDataset, training_size: int = 0
) -> SizeResult:
    """Decode a test dataset against one model and score it."""
    if test.n_rows == 0:
        raise ConfigurationError("test dataset is empty")
    if test.n_channels != model.n_channels:
        raise DimensionError(
            f"test dataset has {test.n_channels} channels, model expects "
            f"{model.n_channels}"
        )
    dofs = model.sorted_dofs()
    actions = [decode_features(fv, model) for fv in test.feature_vectors()]
    estimate = {
        dof: np.array([a.per_dof[dof].signed_angle() for a in actions]) for dof in dofs
    }
    truth = {dof: test.angles[dof] for dof in dofs}
    pair = TrajectoryPair(truth=truth, estimate=estimate, blocks=to_blocks(test, dofs))
    return SizeResult(
        training_size=training_size,
        model=model,
        overlaps={dof: model.dofs[dof].overlap for dof in dofs},
        r2_per_dof={dof: r_squared_dof(truth[dof], estimate[dof]) for dof in dofs},
        r2_global=r_squared_global(truth, estimate),
        blocks=block_errors(pair, model.decode_config),
        actions=actions,
        n_zero_signal=sum(1 for a in actions if a.diagnostics.zero_signal),
        n_clamped=sum(
            1 for a in actions if any(d.angle_clamped for d in a.per_dof.values())
        ),
    )


def run_experiment(
    cfg: ExperimentConfig, train_ds: FeatureDataset, test_ds: FeatureDataset
) -> ExperimentReport:
    """Train one model per configured size and evaluate each on the test set."""
    if train_ds.n_channels != test_ds.n_channels:
        raise DimensionError(
            f"train and test channel counts differ: "
            f"{train_ds.n_channels} vs {test_ds.n_channels}"
        )
    samples = to_training_samples(train_ds)
    dofs = list(cfg.dofs) if cfg.dofs is not None else sorted({s.dof for s in samples})
    pool = [s for s in samples if s.dof in dofs]
    results = []
    for size in cfg.training_sizes:
        subset = subset_per_action(pool, size)
        model = train(
            subset, train_ds.n_channels, dofs=dofs, config=cfg.decode_config()
        )
        results.append(evaluate_model(model, test_ds, training_size=size))
    return ExperimentReport(
        config=cfg,
        config_hash=cfg.hash(),
        dofs=sorted(dofs),
        n_channels=train_ds.n_channels,
        n_windows=test_ds.n_rows,
        n_blocks=len(to_blocks(test_ds, dofs)),
        results=results,
    )


def report_for_model(model: ControllerModel, test: FeatureDataset) -> ExperimentReport:
    """Single-model evaluation report (training size reported as 0)."""
    result = evaluate_model(model, test)
    return ExperimentReport(
        config=None,
        config_hash="-",
        dofs=model.sorted_dofs(),
        n_channels=model.n_channels,
        n_windows=test.n_rows,
        n_blocks=len(to_blocks(test, model.sorted_dofs())),
        results=[result],
    )


def render_report_text(report: ExperimentReport) -> str:
    lines = [
        "myoelectric controller evaluation",
        f"config_hash: {report.config_hash}",
    ]
    if report.config is not None:
        lines.append(f"seed: {report.config.seed}")
    lines += [
        f"dofs: {','.join(d.value for d in report.dofs)}",
        f"channels: {report.n_channels}",
        f"test_windows: {report.n_windows}",
        f"test_blocks: {report.n_blocks}",
    ]
    for res in report.results:
        lines.append("")
        lines.append(f"[training_size={res.training_size}]")
        for dof in report.dofs:
            lines.append(f"overlap_{dof.value}: {res.overlaps[dof]!r}")
        for dof in report.dofs:
            lines.append(f"r2_{dof.value}: {res.r2_per_dof[dof]!r}")
        lines.append(f"r2_global: {res.r2_global!r}")
        for dof in report.dofs:
            lines.append(
                f"block_errors_{dof.value}: {res.blocks.error_counts[dof]}"
            )
        lines.append(f"misclassified_blocks: {res.blocks.n_misclassified}")
        indices = ",".join(str(i) for i in res.blocks.misclassified_blocks)
        lines.append(f"misclassified_block_indices: {indices}")
        lines.append(f"zero_signal_windows: {res.n_zero_signal}")
        lines.append(f"clamped_windows: {res.n_clamped}")
    return "\n".join(lines) + "\n"


def render_report_csv(report: ExperimentReport) -> str:
    header = ["training_size"]
    for dof in report.dofs:
        header += [f"overlap_{dof.value}", f"r2_{dof.value}", f"block_errors_{dof.value}"]
    header += [
        "r2_global",
        "misclassified_blocks",
        "misclassified_block_indices",
        "zero_signal_windows",
        "clamped_windows",
    ]
    rows = [",".join(header)]
    for res in report.results:
        row = [str(res.training_size)]
        for dof in report.dofs:
            row += [
                repr(res.overlaps[dof]),
                repr(res.r2_per_dof[dof]),
                str(res.blocks.error_counts[dof]),
            ]
        row += [
            repr(res.r2_global),
            str(res.blocks.n_misclassified),
            ";".join(str(i) for i in res.blocks.misclassified_blocks),
            str(res.n_zero_signal),
            str(res.n_clamped),
        ]
        rows.append(",".join(row))
    return "\n".join(rows) + "\n"
