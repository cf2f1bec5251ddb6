# tests/test_model_library.py
import pytest

from app.schemas.vehicles import GimbalParams
from app.services.errors import NonPositiveParam, UnknownModel
from app.services.model_library import (
    BUILTIN_SOURCES, builtin_source, demo_scenario, double_pendulum_lagrangian, gimbal_angular_velocities,
    gimbal_lagrangian, library_system, pendulum_lagrangian,
)
from app.services.symbolic import evaluate


@pytest.mark.parametrize("name", sorted(BUILTIN_SOURCES))
def test_sample_files_match_builtin_sources(samples_dir, name):
    assert (samples_dir / f"{name}.acm").read_text() == builtin_source(name)


def test_unknown_names():
    with pytest.raises(UnknownModel):
        builtin_source("rocket")
    with pytest.raises(UnknownModel):
        library_system("rocket")
    with pytest.raises(UnknownModel):
        demo_scenario("rocket")


def test_library_systems():
    assert library_system("pendulum").coords == ("theta",)
    assert library_system("double_pendulum").coords == ("t_1", "t_2")
    assert library_system("gimbal").n == 3


@pytest.mark.parametrize("factory, kwargs", [
    (pendulum_lagrangian, {"l": 0.0}),
    (double_pendulum_lagrangian, {"m2": -1.0}),
])
def test_non_positive_parameters_are_rejected(factory, kwargs):
    with pytest.raises(NonPositiveParam):
        factory(**kwargs)


def test_gimbal_rejects_non_positive_inertia():
    with pytest.raises(NonPositiveParam):
        gimbal_lagrangian(GimbalParams(I2=0.0))


def test_gimbal_angular_velocities_at_zero_angles():
    omegas = gimbal_angular_velocities()
    rates = {"theta_1": 0.0, "theta_2": 0.0, "theta_3": 0.0, "theta_1'": 1.0, "theta_2'": 2.0, "theta_3'": 3.0}
    values = [[evaluate(c, rates) for c in omega.components()] for omega in omegas]
    assert values == [[1.0, 0.0, 0.0], [1.0, 0.0, 2.0], [1.0, 3.0, -2.0]]


def test_demo_scenarios():
    quad = demo_scenario("quadcopter")
    assert quad.entry == "QuadCopter"
    assert set(quad.config.overrides) == {"w1", "w2", "w3", "w4"}
    assert demo_scenario("pendulum").args == [1.0]
