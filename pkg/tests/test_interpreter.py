# tests/test_interpreter.py
import math

import numpy as np
import pytest

from app.services.errors import ArityMismatch, EvalError, InitError, UnknownClass
from app.services.interpreter import StatementFailure, evaluate_constant, instantiate, step, values_equal
from app.services.parser import parse_expression, parse_model

COUNTER = """
class Counter (start)
private
  n := start; x := 0; x' := 0; x'' := 0; y := 0
end
  n := n + 1;
  x'' = 2;
  y = x' + n
end
"""


def test_instantiate_binds_params_and_materializes_derivatives():
    model = parse_model("class A (k) private x := k end x'' = 1 end")
    obj = instantiate(model, "A", [3.0])
    assert obj.read("k") == 3.0
    assert obj.read("x") == 3.0
    assert obj.read("x'") == 0.0 and obj.read("x''") == 0.0


def test_private_inits_run_top_to_bottom():
    model = parse_model("class A () private a := 2; b := a * 3; c := [a, b, 1] end end")
    obj = instantiate(model, "A")
    assert obj.read("b") == 6.0
    assert np.array_equal(obj.read("c"), np.array([2.0, 6.0, 1.0]))


def test_arity_mismatch_and_unknown_class():
    model = parse_model("class A (p, q) private end end")
    with pytest.raises(ArityMismatch):
        instantiate(model, "A", [1.0])
    with pytest.raises(UnknownClass):
        instantiate(model, "B")


def test_failing_private_init_is_an_init_error():
    model = parse_model("class A () private x := 1 / 0 end end")
    with pytest.raises(InitError):
        instantiate(model, "A")


def test_overrides_apply_after_private_section():
    model = parse_model("class A () private w := 0; v := w + 1 end end")
    obj = instantiate(model, "A", overrides={"w": 5})
    assert obj.read("w") == 5.0
    assert obj.read("v") == 1.0


def test_override_of_unknown_slot_is_rejected():
    model = parse_model("class A () private w := 0 end end")
    with pytest.raises(InitError):
        instantiate(model, "A", overrides={"nope": 1})


def test_step_phases():
    obj = instantiate(parse_model(COUNTER), "Counter", [10.0])
    step(obj, 0.5)
    # discrete first, continuous in order with newest reads, then Euler from pre-step values
    assert obj.read("n") == 11.0
    assert obj.read("x''") == 2.0
    assert obj.read("y") == 11.0
    assert obj.read("x'") == 1.0
    assert obj.read("x") == 0.0
    step(obj, 0.5)
    assert obj.read("y") == 13.0
    assert obj.read("x") == 0.5


def test_guard_is_evaluated_once_per_step():
    model = parse_model("""
class A () private x := 0; hits := 0 end
  if x < 1
    x := x + 1;
    hits := hits + 1
  else
    x := x + 10
  end
end
""")
    obj = instantiate(model, "A")
    step(obj, 0.1)
    assert obj.read("x") == 1.0 and obj.read("hits") == 1.0
    step(obj, 0.1)
    assert obj.read("x") == 11.0 and obj.read("hits") == 1.0


def test_guard_selects_continuous_equations():
    model = parse_model("""
class A () private x := 0; x' := 0; on := true end
  if on x' = 1 else x' = -1 end
end
""")
    obj = instantiate(model, "A")
    step(obj, 0.25)
    assert obj.read("x") == pytest.approx(0.25)


def test_switch_runs_first_matching_case_only():
    model = parse_model("""
class A () private mode := 2; out := 0 end
  switch mode
    case 1 out := 10
    case 2 out := 20
    case 2 out := 30
  end
end
""")
    obj = instantiate(model, "A")
    step(obj, 1.0)
    assert obj.read("out") == 20.0


def test_parent_discrete_updates_run_before_children():
    model = parse_model("""
class Child () private seen := 0 end seen := seen + 1 end
class Parent () private c := create Child(); t := 0 end
  t := c.seen
end
""")
    root = instantiate(model, "Parent")
    step(root, 0.1)
    assert root.read("t") == 0.0
    assert root.read("c.seen") == 1.0
    step(root, 0.1)
    assert root.read("t") == 1.0
    assert [o.class_name for o in root.objects()] == ["Parent", "Child"]


def test_vector_arithmetic_and_builtins():
    model = parse_model("""
class A () private v := [1, 2, 3]; d := 0; c := [0, 0, 0]; n := 0 end
  d := dot(v, [1, 1, 1]);
  c := cross([1, 0, 0], [0, 1, 0]);
  n := norm([3, 4])
end
""")
    obj = instantiate(model, "A")
    step(obj, 0.1)
    assert obj.read("d") == 6.0
    assert np.array_equal(obj.read("c"), [0.0, 0.0, 1.0])
    assert obj.read("n") == 5.0


def test_vector_state_integrates_componentwise():
    model = parse_model("class A (P) private P' := [1, 0, -1] end P'' = [0, 0, 0] end")
    obj = instantiate(model, "A", [[0.0, 0.0, 0.0]])
    step(obj, 0.5)
    assert np.array_equal(obj.read("P"), [0.5, 0.0, -0.5])


def test_integration_requires_matching_kinds():
    model = parse_model("class A () private x := 0 end x'' = [1, 2] end")
    obj = instantiate(model, "A")
    with pytest.raises(EvalError) as info:
        step(obj, 0.1)
    message = str(info.value)
    assert "Real" in message and "Vector" in message

    model = parse_model("class A (P) private k := 0 end P' = [1, 2] end")
    with pytest.raises(EvalError, match="shape"):
        step(instantiate(model, "A", [[0.0, 0.0, 0.0]]), 0.1)


def test_missing_derivative_slots_take_the_variable_shape():
    model = parse_model("class A (P) private k := 0 end P'' = [0, 0, 2] end")
    obj = instantiate(model, "A", [[1.0, 1.0, 1.0]])
    assert np.array_equal(obj.read("P'"), [0.0, 0.0, 0.0])
    step(obj, 0.5)
    step(obj, 0.5)
    assert np.array_equal(obj.read("P"), [1.0, 1.0, 1.5])


def test_one_euler_step_of_a_harmonic_oscillator():
    model = parse_model("class A () private x := 1; x' := 0; x'' := 0 end x'' = -x end")
    obj = step(instantiate(model, "A"), 0.1)
    assert obj.read("x''") == -1.0
    assert obj.read("x'") == pytest.approx(-0.1, abs=1e-15)
    assert obj.read("x") == 1.0


def test_equilibrium_is_a_fixed_point_of_step():
    model = parse_model("class A () private x := 2; x' := 0; x'' := 0 end x'' = 4 - x * x end")
    obj = instantiate(model, "A")
    for _ in range(100):
        step(obj, 0.01)
        assert (obj.read("x"), obj.read("x'"), obj.read("x''")) == (2.0, 0.0, 0.0)


def test_type_errors_name_the_kinds():
    model = parse_model("class A () private v := [1, 2]; x := 0 end x := v + 1 end")
    obj = instantiate(model, "A")
    with pytest.raises(StatementFailure) as info:
        step(obj, 0.1)
    assert "Vector" in str(info.value.error)


def test_evaluate_constant():
    assert evaluate_constant(parse_expression("2^3 - 1")) == 7.0
    assert evaluate_constant(parse_expression("cos(pi)")) == pytest.approx(-1.0)
    assert values_equal(evaluate_constant(parse_expression("[1, 2] * 2")), np.array([2.0, 4.0]))
    with pytest.raises(EvalError):
        evaluate_constant(parse_expression("x + 1"))


def test_math_domain_errors_are_reported():
    model = parse_model("class A () private y := 0 end y := sqrt(-1) end")
    obj = instantiate(model, "A")
    with pytest.raises(StatementFailure) as info:
        step(obj, 0.1)
    assert "sqrt" in info.value.statement
    assert math.isfinite(obj.read("y"))
