"""Expectation values, per-DOF decisions, residual activations, decoding."""

import math

import numpy as np
import pytest

from qmyo.control import (
    decode,
    decode_dof,
    decode_features,
    expectation,
    residual_activations,
    rest_threshold_from_rest_windows,
)
from qmyo.errors import DegenerateOperatorsError, DimensionError
from qmyo.features import FeatureKind, FeatureVector
from qmyo.operators import (
    DecodeConfig,
    Direction,
    Dof,
    DofOperators,
    Operator,
    TrainingSample,
    build_completeness_operator,
    build_direction_operator,
    train,
)
from qmyo.state import QuantumState

D1 = Dof.FLEXION_EXTENSION
D2 = Dof.RADIAL_ULNAR
D3 = Dof.PRONATION_SUPINATION


def unit(*values):
    v = np.array(values, dtype=float)
    return QuantumState(v / np.linalg.norm(v))


def triple(proto_pos, proto_neg, theta_pos=40.0, theta_neg=40.0):
    p_pos = build_direction_operator(proto_pos)
    p_neg = build_direction_operator(proto_neg)
    return DofOperators(
        proto_pos=proto_pos,
        proto_neg=proto_neg,
        p_pos=p_pos,
        p_neg=p_neg,
        p_zero=build_completeness_operator(p_pos, p_neg),
        theta_pos_max=theta_pos,
        theta_neg_max=theta_neg,
        overlap=float(np.dot(proto_pos.amplitudes, proto_neg.amplitudes)) ** 2,
    )


def simple_sample(values, dof, direction, angle=40.0):
    return TrainingSample(
        features=FeatureVector(np.array(values, dtype=float), FeatureKind.MAV),
        dof=dof,
        direction=direction,
        angle=angle,
    )


def orthogonal_model(n_dofs=2, theta=40.0, n_channels=None, config=None):
    dofs = (D1, D2, D3)[:n_dofs]
    n = n_channels or 2 * n_dofs
    samples = []
    for i, dof in enumerate(dofs):
        for j, direction in enumerate((Direction.POSITIVE, Direction.NEGATIVE)):
            values = np.zeros(n)
            values[2 * i + j] = 1.0
            samples.append(simple_sample(values, dof, direction, angle=theta))
    return train(samples, n, config=config)


class TestExpectation:
    def test_projector_on_own_ray(self):
        proto = unit(1.0, 2.0, 2.0)
        op = build_direction_operator(proto)
        assert expectation(proto, op) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal_state(self):
        op = build_direction_operator(unit(1.0, 0.0))
        assert expectation(unit(0.0, 1.0), op) == pytest.approx(0.0, abs=1e-15)

    def test_matrix_vector_oracle(self):
        op = Operator(np.array([[0.2, 0.4], [0.4, 0.8]]))
        state = unit(1.0, 0.0)
        assert expectation(state, op) == pytest.approx(0.2, abs=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            expectation(unit(1.0, 0.0, 0.0), Operator(np.eye(2)))


class TestDecodeDof:
    def test_positive_prototype_hits_theta_max(self):
        ops = triple(unit(1.0, 0.0), unit(0.0, 1.0), theta_pos=40.0)
        decision = decode_dof(ops.proto_pos, ops, DecodeConfig())
        assert decision.direction is Direction.POSITIVE
        assert decision.angle == pytest.approx(40.0, abs=1e-9)
        assert not decision.angle_clamped

    def test_tie_is_rest(self):
        ops = triple(unit(1.0, 0.0), unit(0.0, 1.0))
        decision = decode_dof(unit(1.0, 1.0), ops, DecodeConfig(rest_threshold=0.0))
        assert decision.direction is Direction.REST
        assert decision.angle == 0.0

    def test_overlap_corrected_angle(self):
        # overlap 0.5, expectations 0.6 and 0.2 -> (0.4 * 40) / 0.5 = 32
        s = 1 / math.sqrt(2)
        ops = triple(unit(1.0, 0.0, 0.0), QuantumState(np.array([s, s, 0.0])))
        assert ops.overlap == pytest.approx(0.5, abs=1e-12)
        x = math.sqrt(0.6)
        y = math.sqrt(0.4) - x
        z = math.sqrt(1.0 - x * x - y * y)
        state = QuantumState(np.array([x, y, z]))
        decision = decode_dof(state, ops, DecodeConfig())
        assert decision.expectation_pos == pytest.approx(0.6, abs=1e-12)
        assert decision.expectation_neg == pytest.approx(0.2, abs=1e-12)
        assert decision.angle == pytest.approx(32.0, abs=1e-9)

    def test_negative_direction(self):
        ops = triple(unit(1.0, 0.0), unit(0.0, 1.0), theta_neg=25.0)
        decision = decode_dof(unit(0.0, 1.0), ops, DecodeConfig())
        assert decision.direction is Direction.NEGATIVE
        assert decision.angle == pytest.approx(25.0, abs=1e-9)
        assert decision.signed_angle() == pytest.approx(-25.0, abs=1e-9)

    def test_rest_threshold_deadzone(self):
        ops = triple(unit(1.0, 0.0), unit(0.0, 1.0))
        state = unit(1.0, 0.9)
        margin = expectation(state, ops.p_pos) - expectation(state, ops.p_neg)
        decision = decode_dof(state, ops, DecodeConfig(rest_threshold=abs(margin) + 0.01))
        assert decision.direction is Direction.REST

    def test_clamping_flags_and_caps(self):
        # margin 0.88 with overlap 0.2 pushes the raw angle past theta_max
        q = QuantumState(np.array([math.sqrt(0.2), math.sqrt(0.8), 0.0]))
        ops = triple(unit(1.0, 0.0, 0.0), q, theta_pos=40.0)
        x = math.sqrt(0.9)
        y = -math.sqrt(1.0 - 0.9 - 1e-4)
        z = 0.01
        state = QuantumState(np.array([x, y, z]))
        decision = decode_dof(state, ops, DecodeConfig())
        assert decision.raw_angle > 40.0
        assert decision.angle == 40.0
        assert decision.angle_clamped

    def test_budget_sums_to_one(self):
        rng = np.random.default_rng(0)
        s = 1 / math.sqrt(2)
        ops = triple(unit(1.0, 0.0, 0.0), QuantumState(np.array([s, s, 0.0])))
        for _ in range(100):
            state = unit(*rng.normal(size=3))
            d = decode_dof(state, ops, DecodeConfig())
            total = d.expectation_pos + d.expectation_neg + d.expectation_zero
            assert abs(total - 1.0) < 1e-10
            assert -1e-12 <= d.expectation_pos <= 1.0 + 1e-12
            assert -1e-12 <= d.expectation_neg <= 1.0 + 1e-12

    def test_negative_zero_expectation_flagged(self):
        s = 1 / math.sqrt(2)
        ops = triple(unit(1.0, 0.0), QuantumState(np.array([s, s])))
        # halfway between the overlapping prototypes the completion dips negative
        state = unit(1.0 + s, s)
        decision = decode_dof(state, ops, DecodeConfig())
        assert decision.expectation_zero < 0.0
        assert decision.zero_negative

    def test_degenerate_overlap_rejected(self):
        nearly = QuantumState(
            np.array([1.0, 1e-9]) / np.linalg.norm(np.array([1.0, 1e-9]))
        )
        ops = triple(unit(1.0, 0.0), nearly)
        with pytest.raises(DegenerateOperatorsError):
            decode_dof(unit(1.0, 0.0), ops, DecodeConfig())


class TestResidualActivations:
    def test_worked_example_exact_over_rationals(self):
        from fractions import Fraction

        z = (Fraction(6, 10), Fraction(7, 10), Fraction(7, 10))
        assert residual_activations(*z) == (
            Fraction(4, 10),
            Fraction(3, 10),
            Fraction(3, 10),
        )

    def test_worked_example_float(self):
        result = residual_activations(0.6, 0.7, 0.7)
        np.testing.assert_allclose(result, (0.4, 0.3, 0.3), atol=1e-15)

    def test_equations_hold(self):
        z = (0.6, 0.7, 0.7)
        d = residual_activations(*z)
        assert z[0] == pytest.approx(d[1] + d[2], abs=1e-15)
        assert z[1] == pytest.approx(d[0] + d[2], abs=1e-15)
        assert z[2] == pytest.approx(d[0] + d[1], abs=1e-15)

    def test_zeros(self):
        assert residual_activations(0.0, 0.0, 0.0) == (0.0, 0.0, 0.0)

    def test_symmetric(self):
        assert residual_activations(1.0, 1.0, 1.0) == (0.5, 0.5, 0.5)

    def test_matches_linear_solver(self):
        rng = np.random.default_rng(1)
        coefficients = np.array([[0.0, 1.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 0.0]])
        for _ in range(1000):
            z = rng.uniform(-2.0, 2.0, size=3)
            expected = np.linalg.solve(coefficients, z)
            result = residual_activations(*z)
            np.testing.assert_allclose(result, expected, atol=1e-12)


class TestDecode:
    def test_prototype_activates_its_dof_only(self):
        model = orthogonal_model(n_dofs=2)
        action = decode(model.dofs[D1].proto_pos, model)
        assert action.per_dof[D1].direction is Direction.POSITIVE
        assert action.per_dof[D1].angle == pytest.approx(40.0, abs=1e-9)
        assert action.per_dof[D2].direction is Direction.REST

    def test_two_dof_model_omits_residuals(self):
        model = orthogonal_model(n_dofs=2)
        action = decode(model.dofs[D1].proto_pos, model)
        assert action.residual_activations is None
        assert "three DOFs" in action.diagnostics.residuals_note

    def test_three_dof_model_solves_residuals(self):
        model = orthogonal_model(n_dofs=3)
        action = decode(model.dofs[D1].proto_pos, model)
        residuals = action.residual_activations
        assert set(residuals) == {D1, D2, D3}
        z = [action.per_dof[d].expectation_zero for d in (D1, D2, D3)]
        assert residuals[D1] == pytest.approx((-z[0] + z[1] + z[2]) / 2, abs=1e-12)

    def test_residual_inputs_clamped_when_zero_negative(self):
        samples = []
        vectors = {
            (D1, Direction.POSITIVE): [1.0, 0.0, 0.0],
            (D1, Direction.NEGATIVE): [1.0, 0.2, 0.0],
            (D2, Direction.POSITIVE): [0.0, 1.0, 0.0],
            (D2, Direction.NEGATIVE): [0.0, 1.0, 0.2],
            (D3, Direction.POSITIVE): [0.0, 0.0, 1.0],
            (D3, Direction.NEGATIVE): [0.2, 0.0, 1.0],
        }
        for (dof, direction), values in vectors.items():
            samples.append(simple_sample(values, dof, direction))
        model = train(samples, 3)
        state = model.dofs[D1].proto_pos
        action = decode(state, model)
        flagged = [
            dof
            for dof in (D1, D2, D3)
            if action.per_dof[dof].expectation_zero < 0.0
        ]
        assert tuple(flagged) == action.diagnostics.residual_inputs_clamped
        if flagged:
            z = [max(action.per_dof[d].expectation_zero, 0.0) for d in (D1, D2, D3)]
            expected = residual_activations(*z)
            for dof, value in zip((D1, D2, D3), expected):
                assert action.residual_activations[dof] == pytest.approx(value, abs=1e-12)

    def test_all_rest_input(self):
        model = orthogonal_model(n_dofs=2)
        state = unit(1.0, 1.0, 1.0, 1.0)
        cfg = DecodeConfig(rest_threshold=0.6)
        action = decode(state, train_with_config(model, cfg))
        assert all(d.direction is Direction.REST for d in action.per_dof.values())
        assert all(d.angle == 0.0 for d in action.per_dof.values())

    def test_dimension_mismatch(self):
        model = orthogonal_model(n_dofs=2)
        with pytest.raises(DimensionError):
            decode(unit(1.0, 0.0), model)

    def test_deterministic(self):
        model = orthogonal_model(n_dofs=2)
        state = unit(0.3, 0.1, 0.9, 0.2)
        assert decode(state, model) == decode(state, model)


def train_with_config(model, cfg):
    from qmyo.operators import with_decode_config

    return with_decode_config(model, cfg)


class TestDecodeFeatures:
    def test_zero_signal_short_circuits_to_rest(self):
        model = orthogonal_model(n_dofs=2)
        action = decode_features(
            FeatureVector(np.zeros(4), FeatureKind.MAV), model
        )
        assert action.diagnostics.zero_signal
        assert action.residual_activations is None
        for decision in action.per_dof.values():
            assert decision.direction is Direction.REST
            assert decision.angle == 0.0
            total = (
                decision.expectation_pos
                + decision.expectation_neg
                + decision.expectation_zero
            )
            assert total == 1.0

    def test_nonzero_features_decode_normally(self):
        model = orthogonal_model(n_dofs=2)
        action = decode_features(
            FeatureVector(np.array([1.0, 0.0, 0.0, 0.0]), FeatureKind.MAV), model
        )
        assert not action.diagnostics.zero_signal
        assert action.per_dof[D1].direction is Direction.POSITIVE


class TestRestThresholdCalibration:
    def test_covers_observed_rest_gaps(self):
        model = orthogonal_model(n_dofs=2)
        rng = np.random.default_rng(3)
        rest = [
            FeatureVector(np.abs(rng.normal(0.0, 0.1, size=4)), FeatureKind.MAV)
            for _ in range(50)
        ]
        threshold = rest_threshold_from_rest_windows(model, rest, margin=1.0)
        cfg = DecodeConfig(rest_threshold=threshold)
        for fv in rest:
            action = decode_features(fv, train_with_config(model, cfg))
            assert all(
                d.direction is Direction.REST for d in action.per_dof.values()
            )

    def test_zero_signal_windows_ignored(self):
        model = orthogonal_model(n_dofs=2)
        rest = [FeatureVector(np.zeros(4), FeatureKind.MAV)]
        assert rest_threshold_from_rest_windows(model, rest) == 0.0
