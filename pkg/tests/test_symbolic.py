# tests/test_symbolic.py
import math
import random

import pytest

from app.services.errors import MathError, SymbolicError, UnboundSymbol
from app.services.model_library import gimbal_angular_velocities
from app.services.parser import parse_expression
from app.services.symbolic import (
    ONE, ZERO, Add, Const, Div, Fun, Mul, Pow, Sub, Sym, SymVec3, compile_functions, cos, dot3, evaluate,
    from_lang, partial, simplify, sin, substitute, time_derivative, to_source,
)

NAMES = ("x", "y", "z")


def random_expression(rng: random.Random, depth: int):
    """
    Unsimplified trees built from raw nodes, defined everywhere: divisions
    only by 2 + sin(.). Identities such as 0*e, 1*e, e+0, e^1, e^0 and
    nested constants are planted throughout.
    """
    if depth == 0 or rng.random() < 0.2:
        if rng.random() < 0.3:
            return Const(round(rng.uniform(-1.0, 1.0), 2))
        return Sym(rng.choice(NAMES))
    a = random_expression(rng, depth - 1)
    choice = rng.randrange(12)
    if choice == 0:
        return Add(a, random_expression(rng, depth - 1))
    if choice == 1:
        return Sub(a, random_expression(rng, depth - 1))
    if choice == 2:
        return Mul(a, random_expression(rng, depth - 1))
    if choice == 3:
        return Div(a, Add(Const(2.0), Fun("sin", random_expression(rng, depth - 1))))
    if choice == 4:
        return Pow(a, 2.0)
    if choice == 5:
        return Fun("sin", a)
    if choice == 6:
        return Fun("cos", a)
    return with_identity(rng, a)


def with_identity(rng: random.Random, e):
    choice = rng.randrange(7)
    if choice == 0:
        return Mul(Const(0.0), e)
    if choice == 1:
        return Mul(Const(1.0), e)
    if choice == 2:
        return Add(e, Const(0.0))
    if choice == 3:
        return Pow(e, 1.0)
    if choice == 4:
        return Pow(e, 0.0)
    if choice == 5:
        return Add(Const(0.5), Add(Const(-1.25), e))
    return Mul(Const(2.0), Mul(Const(-0.5), e))


def central_difference(e, point, name, h):
    up, down = dict(point), dict(point)
    up[name] += h
    down[name] -= h
    return (evaluate(e, up) - evaluate(e, down)) / (2 * h)


def test_smart_constructors_fold_identities():
    x = Sym("x")
    assert x + 0 == x
    assert 0 * x == ZERO
    assert 1 * x == x
    assert x - x == ZERO
    assert Const(2) * Const(3) == Const(6.0)
    assert x ** 1 == x and x ** 0 == ONE
    assert sin(Const(0.0)) == ZERO


def test_division_by_constant_zero_is_rejected():
    with pytest.raises(SymbolicError):
        Sym("x") / 0


def test_partials_of_elementary_functions():
    x, y = Sym("x"), Sym("y")
    assert evaluate(partial(x * y, "x"), {"x": 2.0, "y": 5.0}) == 5.0
    assert evaluate(partial(sin(x), x), {"x": 0.3}) == pytest.approx(math.cos(0.3))
    assert evaluate(partial(x ** 3, "x"), {"x": 2.0}) == pytest.approx(12.0)
    assert partial(y * y, "x") == ZERO


def test_partials_match_central_differences():
    rng = random.Random(1234)
    for _ in range(1000):
        e = random_expression(rng, rng.randint(1, 6))
        point = {name: rng.uniform(-1.0, 1.0) for name in NAMES}
        scale = 1.0 + abs(evaluate(e, point))
        for name in NAMES:
            h = 1e-6 * (1.0 + abs(point[name]))
            exact = evaluate(partial(e, name), point)
            # Richardson combination of two central differences removes the h^2 term
            numeric = (4 * central_difference(e, point, name, h / 2) - central_difference(e, point, name, h)) / 3
            assert abs(exact - numeric) <= 1e-6 * max(1.0, abs(exact)) + 1e-6 * scale


def test_simplify_rewrites_and_preserves_value():
    rng = random.Random(99)
    for _ in range(200):
        e = with_identity(rng, random_expression(rng, 6))
        s = simplify(e)
        assert s != e
        assert simplify(s) == s
        both = compile_functions([e, s], list(NAMES))
        for _ in range(1000):
            original, simplified = both(*(rng.uniform(-2.0, 2.0) for _ in NAMES))
            assert simplified == pytest.approx(original, rel=1e-9, abs=1e-9)


def test_simplify_keeps_divisions_that_fold_to_zero():
    x, y = Sym("x"), Sym("y")
    e = Div(x, Sub(y, y))
    s = simplify(e)
    assert s == Div(x, ZERO)
    with pytest.raises(MathError):
        evaluate(s, {"x": 1.0})
    with pytest.raises(MathError):
        evaluate(e, {"x": 1.0, "y": 2.0})
    assert substitute(Div(x, y), {"y": 0.0}) == Div(x, ZERO)
    with pytest.raises(MathError):
        evaluate(partial(Div(x, Const(0.0)), "x"), {"x": 1.0})


def test_substitute_and_time_derivative():
    q, v = Sym("q"), Sym("q'")
    e = sin(q) * v
    assert substitute(e, {"q'": 2.0}) == sin(q) * 2
    rate = time_derivative(e, {"q": "q'", "q'": "q''"})
    value = evaluate(rate, {"q": 0.5, "q'": 2.0, "q''": 3.0})
    assert value == pytest.approx(math.cos(0.5) * 4.0 + math.sin(0.5) * 3.0)


def test_compiled_functions_agree_with_evaluate():
    rng = random.Random(5)
    exprs = [random_expression(rng, 4) for _ in range(50)]
    fn = compile_functions(exprs, list(NAMES))
    point = {"x": 0.3, "y": -0.7, "z": 1.1}
    values = fn(point["x"], point["y"], point["z"])
    assert values == [evaluate(e, point) for e in exprs]


def test_evaluation_errors():
    with pytest.raises(UnboundSymbol):
        evaluate(Sym("w"), {})
    with pytest.raises(MathError):
        evaluate(Sym("x") / Sym("y"), {"x": 1.0, "y": 0.0})
    with pytest.raises(UnboundSymbol):
        compile_functions([Sym("w")], ["x"])


def test_conversion_to_and_from_the_modeling_language():
    e = from_lang(parse_expression("0.5*m*l^2*theta'^2 - m*g*l*sin(theta)"))
    assert "theta'" in e.free_symbols
    again = from_lang(parse_expression(to_source(e)))
    point = {"m": 1.3, "l": 0.7, "g": 9.81, "theta": 0.4, "theta'": -1.2}
    assert evaluate(again, point) == pytest.approx(evaluate(e, point), rel=1e-12)


def test_non_scalar_constructs_are_rejected():
    with pytest.raises(SymbolicError):
        from_lang(parse_expression("[1, 2]"))
    with pytest.raises(SymbolicError):
        from_lang(parse_expression("x^y"))
    with pytest.raises(SymbolicError):
        from_lang(parse_expression("a.b + 1"))


def test_dot3():
    a = SymVec3.of(Sym("x"), 2, 0)
    b = SymVec3.of(Sym("y"), Sym("x"), 5)
    product = dot3(a, b)
    assert evaluate(product, {"x": 3.0, "y": 4.0}) == 18.0
    assert dot3(a, SymVec3.of(0, 0, 1)) == ZERO


def test_middle_ring_speed_ignores_its_own_angle():
    _, omega2, _ = gimbal_angular_velocities()
    squared = dot3(omega2, omega2)
    rng = random.Random(17)
    for _ in range(100):
        point = {name: rng.uniform(-math.pi, math.pi) for name in ("theta_2", "theta_1'", "theta_2'")}
        expected = point["theta_1'"] ** 2 + point["theta_2'"] ** 2
        assert evaluate(squared, point) == pytest.approx(expected, rel=1e-12, abs=1e-12)
