"""Decoding: from an encoded window to simultaneous proportional angles.

Each DOF's perceptron computes the three expectation values of its
operator triple. The winning direction's expectation margin, scaled by
the maximal training angle and corrected for prototype overlap, gives
the proportional angle command. With three trained DOFs the three
completion expectations additionally yield residual activations through
a fixed 3x3 linear system.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateOperatorsError,
    DimensionError,
    ModelError,
    ZeroSignalError,
)
from .features import FeatureVector
from .operators import ControllerModel, DecodeConfig, Dof, DofOperators, Direction, Operator
from .state import QuantumState, encode

EXPECTATION_BUDGET_TOL = 1e-10


@dataclass(frozen=True)
class DofDecision:
    """Decoded outcome for one DOF on one window."""

    expectation_pos: float
    expectation_neg: float
    expectation_zero: float
    direction: Direction
    angle: float
    raw_angle: float
    angle_clamped: bool
    zero_negative: bool

    def signed_angle(self) -> float:
        """Angle with sign by direction: positive +, negative -, rest 0."""
        if self.direction is Direction.NEGATIVE:
            return -self.angle
        return self.angle if self.direction is Direction.POSITIVE else 0.0


@dataclass(frozen=True)
class DecodeDiagnostics:
    zero_signal: bool = False
    residuals_note: str | None = None
    residual_inputs_clamped: tuple[Dof, ...] = ()


@dataclass(frozen=True)
class DecodedAction:
    """Full decision for one window across all trained DOFs."""

    per_dof: dict[Dof, DofDecision]
    residual_activations: dict[Dof, float] | None
    diagnostics: DecodeDiagnostics = field(default_factory=DecodeDiagnostics)


def expectation(state: QuantumState, op: Operator) -> float:
    """Quadratic form of the state under the operator."""
    if state.dim != op.dim:
        raise DimensionError(
            f"state dimension {state.dim} does not match operator dimension {op.dim}"
        )
    psi = state.amplitudes
    return float(psi @ op.matrix @ psi)


def decode_dof(state: QuantumState, ops: DofOperators, cfg: DecodeConfig) -> DofDecision:
    """Decide direction and proportional angle for one DOF.

    The margin between the two direction expectations picks the winner;
    within ``cfg.rest_threshold`` of a tie the DOF is at rest. The angle
    is the margin times the winner's maximal training angle over
    (1 - overlap), clamped to the physical range with a diagnostic flag.
    """
    if ops.overlap >= 1.0 - cfg.overlap_epsilon:
        raise DegenerateOperatorsError(
            f"prototype overlap {ops.overlap!r} leaves no margin; "
            "the direction pair is unlearnable"
        )
    e_pos = expectation(state, ops.p_pos)
    e_neg = expectation(state, ops.p_neg)
    e_zero = expectation(state, ops.p_zero)
    budget = e_pos + e_neg + e_zero
    if abs(budget - 1.0) > EXPECTATION_BUDGET_TOL:
        raise ModelError(
            f"expectation values sum to {budget!r}, not 1; operator triple is corrupt"
        )
    zero_negative = e_zero < 0.0

    margin = e_pos - e_neg
    if abs(margin) <= cfg.rest_threshold:
        return DofDecision(
            expectation_pos=e_pos,
            expectation_neg=e_neg,
            expectation_zero=e_zero,
            direction=Direction.REST,
            angle=0.0,
            raw_angle=0.0,
            angle_clamped=False,
            zero_negative=zero_negative,
        )
    direction = Direction.POSITIVE if margin > 0 else Direction.NEGATIVE
    theta_max = ops.theta_pos_max if direction is Direction.POSITIVE else ops.theta_neg_max
    raw_angle = abs(margin) * theta_max / (1.0 - ops.overlap)
    clamped = raw_angle > theta_max
    return DofDecision(
        expectation_pos=e_pos,
        expectation_neg=e_neg,
        expectation_zero=e_zero,
        direction=direction,
        angle=min(raw_angle, theta_max),
        raw_angle=raw_angle,
        angle_clamped=clamped,
        zero_negative=zero_negative,
    )


def residual_activations(z1: float, z2: float, z3: float) -> tuple[float, float, float]:
    """Solve the residual-activation system for three DOFs.

    Each completion expectation is read as the summed activation of the
    other two DOFs, giving three equations in three unknowns with the
    closed-form solution below (the coefficient matrix is fixed and
    invertible). Exact numeric types such as Fraction pass through
    without rounding.
    """
    d1 = (-z1 + z2 + z3) / 2
    d2 = (z1 - z2 + z3) / 2
    d3 = (z1 + z2 - z3) / 2
    return d1, d2, d3


_THREE_DOFS = (Dof.FLEXION_EXTENSION, Dof.RADIAL_ULNAR, Dof.PRONATION_SUPINATION)


def _rest_decision() -> DofDecision:
    return DofDecision(
        expectation_pos=0.0,
        expectation_neg=0.0,
        expectation_zero=1.0,
        direction=Direction.REST,
        angle=0.0,
        raw_angle=0.0,
        angle_clamped=False,
        zero_negative=False,
    )


def decode(state: QuantumState, model: ControllerModel) -> DecodedAction:
    """Decode one encoded window against every trained DOF."""
    if state.dim != model.n_channels:
        raise DimensionError(
            f"state dimension {state.dim} does not match the "
            f"{model.n_channels}-channel model"
        )
    cfg = model.decode_config
    per_dof = {dof: decode_dof(state, ops, cfg) for dof, ops in sorted(model.dofs.items())}

    residuals: dict[Dof, float] | None = None
    note: str | None = None
    clamped_inputs: tuple[Dof, ...] = ()
    if set(per_dof) == set(_THREE_DOFS):
        zeros = []
        clamped = []
        for dof in _THREE_DOFS:
            z = per_dof[dof].expectation_zero
            if z < 0.0:
                clamped.append(dof)
                z = 0.0
            zeros.append(z)
        values = residual_activations(*zeros)
        residuals = dict(zip(_THREE_DOFS, values))
        clamped_inputs = tuple(clamped)
    else:
        note = (
            "residual activations need all three DOFs trained; "
            f"model has {len(per_dof)}"
        )
    return DecodedAction(
        per_dof=per_dof,
        residual_activations=residuals,
        diagnostics=DecodeDiagnostics(
            residuals_note=note, residual_inputs_clamped=clamped_inputs
        ),
    )


def decode_features(fv: FeatureVector, model: ControllerModel) -> DecodedAction:
    """Encode and decode one feature window, mapping zero signal to rest.

    An all-zero feature vector cannot be normalized; it is reported as
    every DOF at rest with the zero-signal diagnostic set, and no
    residual activations are computed for it.
    """
    try:
        state = encode(fv)
    except ZeroSignalError:
        per_dof = {dof: _rest_decision() for dof in model.sorted_dofs()}
        return DecodedAction(
            per_dof=per_dof,
            residual_activations=None,
            diagnostics=DecodeDiagnostics(
                zero_signal=True,
                residuals_note="zero-signal window: no state to measure",
            ),
        )
    return decode(state, model)


def rest_threshold_from_rest_windows(
    model: ControllerModel, rest_features: list[FeatureVector], margin: float = 1.5
) -> float:
    """Calibrate the rest deadzone from rest-labeled windows.

    Returns ``margin`` times the largest direction-expectation gap seen
    on the rest windows, i.e. the smallest threshold (scaled for safety)
    that would have kept every given window at rest. Zero-signal windows
    contribute nothing.
    """
    if margin <= 0:
        raise ValueError(f"margin must be > 0, got {margin}")
    worst = 0.0
    for fv in rest_features:
        try:
            state = encode(fv)
        except ZeroSignalError:
            continue
        for ops in model.dofs.values():
            gap = abs(expectation(state, ops.p_pos) - expectation(state, ops.p_neg))
            worst = max(worst, gap)
    return margin * worst
