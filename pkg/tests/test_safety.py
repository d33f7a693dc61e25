import numpy as np
import numpy.testing as npt
import pytest

from forcepush.safety import (SafetyConfig, clamp_displacement,
                              corrective_action, estop_check)
from forcepush.sim import PushEnv, SimConfig


class TestCorrectiveAction:
    def test_zero_gain_is_identity(self):
        npt.assert_array_equal(
            corrective_action([0.5, -0.2, 0.1], [30.0, 0.0, 10.0], 0.0),
            [0.5, -0.2, 0.1])

    def test_force_offset(self):
        npt.assert_allclose(
            corrective_action([0.5, 0.0, 0.0], [-20.0, 0.0, 0.0], 0.002),
            [0.46, 0.0, 0.0], atol=1e-15)

    def test_zero_force_is_identity(self):
        npt.assert_array_equal(
            corrective_action([0.3, 0.3, 0.3], np.zeros(3), 0.002),
            [0.3, 0.3, 0.3])


class TestClampDisplacement:
    def test_nominal_full_action_is_exactly_at_cap(self):
        delta = clamp_displacement([1.0, 0.0, 0.0], dt=0.1, v_max=0.1)
        npt.assert_allclose(delta, [0.01, 0.0, 0.0], atol=1e-15)

    def test_overshoot_is_rescaled(self):
        delta = clamp_displacement([2.0, 0.0, 0.0], dt=0.1, v_max=0.1)
        npt.assert_allclose(delta, [0.01, 0.0, 0.0], atol=1e-15)

    def test_direction_preserved(self):
        delta = clamp_displacement([3.0, 4.0, 0.0], dt=0.1, v_max=0.1)
        npt.assert_allclose(delta, [0.006, 0.008, 0.0], atol=1e-12)

    def test_zero_action(self):
        npt.assert_array_equal(clamp_displacement(np.zeros(3), 0.1, 0.1), np.zeros(3))

    def test_invalid_dt_rejected(self):
        with pytest.raises(ValueError):
            clamp_displacement([1.0, 0, 0], dt=0.0, v_max=0.1)


class TestEstopCheck:
    def test_above_threshold_halts(self):
        assert estop_check([120.0, 0.0, 0.0], 100.0)

    def test_below_threshold_continues(self):
        assert not estop_check([30.0, 0.0, 0.0], 100.0)

    def test_boundary_halts(self):
        assert estop_check([100.0, 0.0, 0.0], 100.0)

    def test_uses_vector_norm(self):
        assert estop_check([60.0, 80.0, 0.0], 100.0)


def test_config_validation():
    with pytest.raises(ValueError):
        SafetyConfig(k_ft=-1.0)
    with pytest.raises(ValueError):
        SafetyConfig(v_max=0.0)


def test_compliance_reduces_table_penetration():
    # zero policy action: the corrective term must lift the gripper out of
    # table contact on the next step
    env = PushEnv(SimConfig(), seed=0)
    env.reset()
    env.state.gripper_pos[...] = (0.2, 0.2, 0.05)
    state = env.step([0.0, 0.0, -0.045])  # commanded penetration of 5 mm
    assert state.ft_force[2] == pytest.approx(50.0)
    action = corrective_action(np.zeros(3), state.ft_force, 0.002)
    assert action[2] > 0
    delta = clamp_displacement(action, dt=0.1, v_max=0.1)
    state = env.step(delta)
    assert state.ft_force[2] == 0.0
    assert state.gripper_pos[2] > env.config.gripper_radius
