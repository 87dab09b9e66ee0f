import pytest

from zerofilter.models.params import ModelParams, StepControl


def test_model_params_validation():
    for bad in (
        {"alpha": -0.1},
        {"alpha": float("inf")},
        {"nu": -1.0},
        {"gamma": 2.5},
    ):
        with pytest.raises(ValueError):
            ModelParams(**bad)


def test_burgers_limit():
    assert ModelParams(alpha=0.0).is_burgers
    assert not ModelParams().is_burgers
    assert ModelParams().with_alpha(0).alpha == 0.0
    assert ModelParams(alpha=1.0).alpha == 1.0


def test_step_control_validation():
    for bad in (
        {"cfl": 0.0},
        {"t_end": 0.0},
        {"dt_max": -1.0},
        {"save_every": 0},
        {"breaking_slope_threshold": 1.0},
        {"integrator": "euler"},
        {"norm_indices": ()},
    ):
        with pytest.raises(ValueError):
            StepControl(**bad)


def test_integrator_selection():
    control = StepControl()
    assert not control.uses_integrating_factor(ModelParams(nu=0.0))
    assert control.uses_integrating_factor(ModelParams(nu=0.1))
    explicit = control.replace(integrator="rk4")
    assert not explicit.uses_integrating_factor(ModelParams(nu=0.1))
    assert control.replace(integrator="if_rk4").uses_integrating_factor(ModelParams())


def test_norm_indices_drive_the_cap():
    control = StepControl(norm_indices=(2.5, 1.5))
    assert control.cap_index == 2.5
    assert control.norm_indices == (2.5, 1.5)
