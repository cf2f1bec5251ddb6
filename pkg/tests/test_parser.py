# tests/test_parser.py
import pytest

from app.schemas.ast import Binary, Continuous, Create, Discrete, If, MatrixLit, Switch, Unary, VectorLit
from app.services.errors import LoadError, ParseError
from app.services.model_library import BUILTIN_SOURCES
from app.services.parser import parse_expression, parse_expression_list, parse_model
from app.services.printer import format_expression, format_model

BALL = """
class Ball (h0)
private
  h := h0; h' := 0; h'' := 0;
  bounces := 0
end
  h'' = -9.81;
  if h < 0 && h' < 0
    h' := -0.8*h';
    bounces := bounces + 1
  end
end
"""


def test_power_is_right_associative_and_binds_tighter_than_unary_minus():
    expr = parse_expression("-2^3^2")
    assert isinstance(expr, Unary)
    power = expr.operand
    assert power.op == "^" and isinstance(power.right, Binary) and power.right.op == "^"


def test_negative_exponent_is_accepted():
    expr = parse_expression("2.98*10^(-6) + 10^-6")
    assert isinstance(expr, Binary) and expr.op == "+"


def test_precedence_of_logical_and_comparison():
    expr = parse_expression("a < 1 || b > 2 && c == 3")
    assert expr.op == "||"
    assert expr.right.op == "&&"


def test_bracket_literals_become_vectors_or_matrices():
    assert isinstance(parse_expression("[1, 2, 3]"), VectorLit)
    assert isinstance(parse_expression("[[1, 0], [0, 1]]"), MatrixLit)


def test_ragged_matrix_is_a_parse_error():
    with pytest.raises(ParseError):
        parse_expression("[[1, 0], [0]]")


def test_expression_list_for_constructor_arguments():
    items = parse_expression_list("[0,0,0], 0.1, -2")
    assert len(items) == 3 and isinstance(items[0], VectorLit)


def test_class_with_guard_and_discrete_updates():
    model = parse_model(BALL)
    ball = model.get("Ball")
    assert ball.params == ["h0"]
    assert all(isinstance(init, Discrete) for init in ball.private_inits)
    assert isinstance(ball.body[0], Continuous)
    guard = ball.body[1]
    assert isinstance(guard, If) and guard.else_branch is None
    assert [type(s) for s in guard.then_branch] == [Discrete, Discrete]


def test_switch_with_cases():
    model = parse_model("""
class Modes ()
private mode := "up"; x := 0; x' := 0 end
  switch mode
    case "up" x' = 1
    case "down" x' = -1
  end
end
""")
    switch = model.get("Modes").body[0]
    assert isinstance(switch, Switch)
    assert [c.literal.value for c in switch.cases] == ["up", "down"]


def test_create_only_in_private_section():
    source = """
class Child (a) private b := a end end
class Parent () private c := create Child(2) end
  c := create Child(3)
end
"""
    with pytest.raises(ParseError):
        parse_model(source)


def test_child_objects_are_created_in_private_section():
    model = parse_model("""
class Child (a) private b := a end end
class Parent () private c := create Child(2); y := 0 end
  y = c.b
end
""")
    assert isinstance(model.get("Parent").private_inits[0], Create)


def test_missing_semicolon_points_at_next_token():
    with pytest.raises(ParseError) as info:
        parse_model("class A ()\nprivate x := 0 end\n  x = 1\n  x = 2\nend")
    assert info.value.line == 4
    assert "';'" in info.value.message


def test_unknown_builtin_is_a_parse_error():
    with pytest.raises(ParseError):
        parse_expression("exp(1)")


def test_load_check_reports_undefined_variables():
    with pytest.raises(LoadError) as info:
        parse_model("class A () private x := 0 end x = y end")
    assert any("undefined variable 'y'" in p for p in info.value.problems)


def test_load_check_reports_cyclic_creation():
    with pytest.raises(LoadError) as info:
        parse_model("""
class A () private b := create B() end end
class B () private a := create A() end end
""")
    assert any("cyclic" in p for p in info.value.problems)


def test_load_check_rejects_mixed_orders():
    with pytest.raises(LoadError):
        parse_model("class A () private x := 0; x' := 0; x'' := 0 end x' = 1; x'' = 2 end")


def test_pi_is_predefined():
    parse_model("class A () private x := pi end x' = pi end")


@pytest.mark.parametrize("name", sorted(BUILTIN_SOURCES))
def test_builtin_listings_parse(name):
    model = parse_model(BUILTIN_SOURCES[name])
    assert len(model.classes) == 1


def test_quadcopter_listing_shape():
    quad = parse_model(BUILTIN_SOURCES["quadcopter"]).get("QuadCopter")
    assert quad.params == ["P", "phi", "theta", "psi"]
    assert sum(isinstance(s, Continuous) for s in quad.body) == 24


@pytest.mark.parametrize("name", sorted(BUILTIN_SOURCES))
def test_printed_model_parses_to_the_same_tree(name):
    model = parse_model(BUILTIN_SOURCES[name])
    assert parse_model(format_model(model)).model_dump() == model.model_dump()


def test_printer_uses_minimal_parentheses():
    assert format_expression(parse_expression("(a + b) * c - (d - e)")) == "(a + b) * c - (d - e)"
    assert format_expression(parse_expression("a - (b + c)")) == "a - (b + c)"
    assert format_expression(parse_expression("(-x)^2")) == "(-x)^2"


def test_long_operator_chains_parse_and_load_check():
    model = parse_model("class A () private x := 0 end x = " + "1 + " * 3000 + "x end")
    assert isinstance(model.classes[0].body[0].rhs, Binary)
    with pytest.raises(LoadError) as info:
        parse_model("class A () private x := 0 end x = " + "1 + " * 3000 + "y end")
    assert "'y'" in str(info.value)
