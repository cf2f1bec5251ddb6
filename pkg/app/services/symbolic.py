# app/services/symbolic.py
import math
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Dict, FrozenSet, List, Mapping, Sequence, Union

from app.schemas.ast import Binary, Call, Expression, NumberLit, Unary, VarRef
from app.services.errors import MathError, SymbolicError, UnboundSymbol

logger = logging.getLogger(__name__)

FUNCTIONS = ("sin", "cos", "tan", "sqrt", "asin")

_MATH_FUNCTIONS: Dict[str, Callable[[float], float]] = {
    "sin": math.sin, "cos": math.cos, "tan": math.tan, "sqrt": math.sqrt, "asin": math.asin,
}

Number = Union[int, float]


class SymExpr:
    """Immutable symbolic scalar. Arithmetic operators build simplified nodes."""

    @cached_property
    def free_symbols(self) -> FrozenSet[str]:
        return frozenset()

    def __add__(self, other):
        return add(self, lift(other))

    def __radd__(self, other):
        return add(lift(other), self)

    def __sub__(self, other):
        return sub(self, lift(other))

    def __rsub__(self, other):
        return sub(lift(other), self)

    def __mul__(self, other):
        return mul(self, lift(other))

    def __rmul__(self, other):
        return mul(lift(other), self)

    def __truediv__(self, other):
        return div(self, lift(other))

    def __rtruediv__(self, other):
        return div(lift(other), self)

    def __pow__(self, exponent):
        return power(self, exponent)

    def __neg__(self):
        return neg(self)

    def __str__(self) -> str:
        return to_source(self)


@dataclass(frozen=True, eq=True)
class Const(SymExpr):
    value: float


@dataclass(frozen=True, eq=True)
class Sym(SymExpr):
    name: str

    @cached_property
    def free_symbols(self) -> FrozenSet[str]:
        return frozenset((self.name,))


@dataclass(frozen=True, eq=True)
class _BinaryNode(SymExpr):
    left: SymExpr
    right: SymExpr

    @cached_property
    def free_symbols(self) -> FrozenSet[str]:
        return self.left.free_symbols | self.right.free_symbols


@dataclass(frozen=True, eq=True)
class Add(_BinaryNode):
    pass


@dataclass(frozen=True, eq=True)
class Sub(_BinaryNode):
    pass


@dataclass(frozen=True, eq=True)
class Mul(_BinaryNode):
    pass


@dataclass(frozen=True, eq=True)
class Div(_BinaryNode):
    pass


@dataclass(frozen=True, eq=True)
class Pow(SymExpr):
    base: SymExpr
    exponent: float

    @cached_property
    def free_symbols(self) -> FrozenSet[str]:
        return self.base.free_symbols


@dataclass(frozen=True, eq=True)
class Fun(SymExpr):
    name: str
    arg: SymExpr

    @cached_property
    def free_symbols(self) -> FrozenSet[str]:
        return self.arg.free_symbols


ZERO = Const(0.0)
ONE = Const(1.0)


def lift(value: Union[SymExpr, Number]) -> SymExpr:
    if isinstance(value, SymExpr):
        return value
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return Const(float(value))
    raise TypeError(f"cannot use {type(value).__name__} in a symbolic expression")


def is_const(e: SymExpr, value: float = None) -> bool:
    return isinstance(e, Const) and (value is None or e.value == value)


# --- smart constructors ----------------------------------------------------------

def add(a: SymExpr, b: SymExpr) -> SymExpr:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    if is_const(a, 0.0):
        return b
    if is_const(b, 0.0):
        return a
    if isinstance(b, Const):
        a, b = b, a
    if isinstance(a, Const) and isinstance(b, Add) and isinstance(b.left, Const):
        return add(Const(a.value + b.left.value), b.right)
    return Add(a, b)


def sub(a: SymExpr, b: SymExpr) -> SymExpr:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    if is_const(b, 0.0):
        return a
    if is_const(a, 0.0):
        return neg(b)
    if a == b:
        return ZERO
    return Sub(a, b)


def mul(a: SymExpr, b: SymExpr) -> SymExpr:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    if is_const(a, 0.0) or is_const(b, 0.0):
        return ZERO
    if is_const(a, 1.0):
        return b
    if is_const(b, 1.0):
        return a
    if isinstance(b, Const):
        a, b = b, a
    if isinstance(a, Const) and isinstance(b, Mul) and isinstance(b.left, Const):
        return mul(Const(a.value * b.left.value), b.right)
    return Mul(a, b)


def div(a: SymExpr, b: SymExpr) -> SymExpr:
    if is_const(b, 0.0):
        raise SymbolicError("division by the constant 0")
    if is_const(a, 0.0):
        return ZERO
    if is_const(b, 1.0):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value / b.value)
    return Div(a, b)


def _quotient(a: SymExpr, b: SymExpr) -> SymExpr:
    # A denominator that folds to 0 stays a Div node; evaluate reports it as a MathError.
    if is_const(b, 0.0):
        return Div(a, b)
    return div(a, b)


def neg(a: SymExpr) -> SymExpr:
    return mul(Const(-1.0), a)


def power(base: SymExpr, exponent: Union[Number, Const]) -> SymExpr:
    n = float(exponent.value if isinstance(exponent, Const) else exponent)
    if n == 1.0:
        return base
    if n == 0.0:
        return ONE
    if isinstance(base, Const):
        try:
            return Const(math.pow(base.value, n))
        except (ValueError, OverflowError, ZeroDivisionError):
            pass
    return Pow(base, n)


def fun(name: str, arg: SymExpr) -> SymExpr:
    if name not in _MATH_FUNCTIONS:
        raise SymbolicError(f"unsupported function '{name}'")
    if isinstance(arg, Const):
        try:
            return Const(_MATH_FUNCTIONS[name](arg.value))
        except (ValueError, OverflowError):
            pass
    return Fun(name, arg)


def sin(e) -> SymExpr:
    return fun("sin", lift(e))


def cos(e) -> SymExpr:
    return fun("cos", lift(e))


def tan(e) -> SymExpr:
    return fun("tan", lift(e))


def sqrt(e) -> SymExpr:
    return fun("sqrt", lift(e))


def asin(e) -> SymExpr:
    return fun("asin", lift(e))


# --- rewriting -------------------------------------------------------------------------

def _rebuild(e: SymExpr) -> SymExpr:
    if isinstance(e, Add):
        return add(_rebuild(e.left), _rebuild(e.right))
    if isinstance(e, Sub):
        return sub(_rebuild(e.left), _rebuild(e.right))
    if isinstance(e, Mul):
        return mul(_rebuild(e.left), _rebuild(e.right))
    if isinstance(e, Div):
        return _quotient(_rebuild(e.left), _rebuild(e.right))
    if isinstance(e, Pow):
        return power(_rebuild(e.base), e.exponent)
    if isinstance(e, Fun):
        return fun(e.name, _rebuild(e.arg))
    return e


def simplify(e: SymExpr) -> SymExpr:
    """
    Local rewriting to a fixpoint: constant folding, additive and
    multiplicative identities, zero products, and merging of constant
    factors/terms. No trigonometric identities.
    """
    current = e
    while True:
        rebuilt = _rebuild(current)
        if rebuilt == current:
            return rebuilt
        current = rebuilt


def substitute(e: SymExpr, mapping: Mapping[str, Union[SymExpr, Number]]) -> SymExpr:
    if e.free_symbols.isdisjoint(mapping):
        return e
    if isinstance(e, Sym):
        return lift(mapping[e.name])
    if isinstance(e, Add):
        return add(substitute(e.left, mapping), substitute(e.right, mapping))
    if isinstance(e, Sub):
        return sub(substitute(e.left, mapping), substitute(e.right, mapping))
    if isinstance(e, Mul):
        return mul(substitute(e.left, mapping), substitute(e.right, mapping))
    if isinstance(e, Div):
        return _quotient(substitute(e.left, mapping), substitute(e.right, mapping))
    if isinstance(e, Pow):
        return power(substitute(e.base, mapping), e.exponent)
    if isinstance(e, Fun):
        return fun(e.name, substitute(e.arg, mapping))
    return e


# --- differentiation ---------------------------------------------------------------------

def partial(e: SymExpr, s: Union[str, Sym]) -> SymExpr:
    """Partial derivative with every other symbol held constant."""
    name = s.name if isinstance(s, Sym) else s
    if name not in e.free_symbols:
        return ZERO
    if isinstance(e, Sym):
        return ONE
    if isinstance(e, Add):
        return add(partial(e.left, name), partial(e.right, name))
    if isinstance(e, Sub):
        return sub(partial(e.left, name), partial(e.right, name))
    if isinstance(e, Mul):
        return add(mul(partial(e.left, name), e.right), mul(e.left, partial(e.right, name)))
    if isinstance(e, Div):
        da, db = partial(e.left, name), partial(e.right, name)
        return sub(_quotient(da, e.right), _quotient(mul(e.left, db), power(e.right, 2)))
    if isinstance(e, Pow):
        return mul(mul(Const(e.exponent), power(e.base, e.exponent - 1.0)), partial(e.base, name))
    if isinstance(e, Fun):
        u, du = e.arg, partial(e.arg, name)
        if e.name == "sin":
            outer = fun("cos", u)
        elif e.name == "cos":
            outer = neg(fun("sin", u))
        elif e.name == "tan":
            outer = div(ONE, power(fun("cos", u), 2))
        elif e.name == "sqrt":
            outer = div(ONE, mul(Const(2.0), fun("sqrt", u)))
        else:
            outer = div(ONE, fun("sqrt", sub(ONE, power(u, 2))))
        return mul(outer, du)
    raise SymbolicError(f"cannot differentiate {type(e).__name__}")


def time_derivative(e: SymExpr, flow: Mapping[str, Union[str, SymExpr]]) -> SymExpr:
    """
    Total derivative along `flow` (symbol -> its time derivative).
    Symbols absent from `flow` are treated as constants.
    """
    total: SymExpr = ZERO
    for name in sorted(e.free_symbols):
        rate = flow.get(name)
        if rate is None:
            continue
        rate_expr = Sym(rate) if isinstance(rate, str) else lift(rate)
        total = add(total, mul(partial(e, name), rate_expr))
    return total


# --- vectors ------------------------------------------------------------------------------

@dataclass(frozen=True)
class SymVec3:
    x: SymExpr
    y: SymExpr
    z: SymExpr

    @classmethod
    def of(cls, x, y, z) -> "SymVec3":
        return cls(lift(x), lift(y), lift(z))

    def components(self) -> List[SymExpr]:
        return [self.x, self.y, self.z]


def dot3(a: SymVec3, b: SymVec3) -> SymExpr:
    return simplify(add(add(mul(a.x, b.x), mul(a.y, b.y)), mul(a.z, b.z)))


# --- numeric evaluation ---------------------------------------------------------------------

def _apply_function(name: str, x: float) -> float:
    try:
        return _MATH_FUNCTIONS[name](x)
    except (ValueError, OverflowError) as e:
        raise MathError(f"{name}({x:g}) is undefined ({e})")


def evaluate(e: SymExpr, bindings: Mapping[str, float]) -> float:
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Sym):
        try:
            return float(bindings[e.name])
        except KeyError:
            raise UnboundSymbol(e.name)
    if isinstance(e, Add):
        return evaluate(e.left, bindings) + evaluate(e.right, bindings)
    if isinstance(e, Sub):
        return evaluate(e.left, bindings) - evaluate(e.right, bindings)
    if isinstance(e, Mul):
        return evaluate(e.left, bindings) * evaluate(e.right, bindings)
    if isinstance(e, Div):
        numerator = evaluate(e.left, bindings)
        denominator = evaluate(e.right, bindings)
        if denominator == 0.0:
            raise MathError("division by zero")
        return numerator / denominator
    if isinstance(e, Pow):
        base = evaluate(e.base, bindings)
        try:
            return math.pow(base, e.exponent)
        except (ValueError, OverflowError, ZeroDivisionError) as err:
            raise MathError(f"{base:g}^{e.exponent:g} is undefined ({err})")
    if isinstance(e, Fun):
        return _apply_function(e.name, evaluate(e.arg, bindings))
    raise SymbolicError(f"cannot evaluate {type(e).__name__}")


def compile_functions(exprs: Sequence[SymExpr], names: Sequence[str]) -> Callable[..., List[float]]:
    """
    Generates one Python function computing every expression from positional
    arguments ordered as `names`. Shared subtrees are computed once; each node
    uses the same floating-point operation as `evaluate`.
    """
    index = {name: f"a{i}" for i, name in enumerate(names)}
    lines: List[str] = []
    memo: Dict[str, str] = {}

    def emit(key: str) -> str:
        if key not in memo:
            memo[key] = f"t{len(memo)}"
            lines.append(f"    {memo[key]} = {key}")
        return memo[key]

    def visit(e: SymExpr) -> str:
        if isinstance(e, Const):
            return repr(e.value)
        if isinstance(e, Sym):
            if e.name not in index:
                raise UnboundSymbol(e.name)
            return index[e.name]
        if isinstance(e, _BinaryNode):
            left, right = visit(e.left), visit(e.right)
            if isinstance(e, Div):
                return emit(f"_div({left}, {right})")
            op = {Add: "+", Sub: "-", Mul: "*"}[type(e)]
            return emit(f"{left} {op} {right}")
        if isinstance(e, Pow):
            return emit(f"_pow({visit(e.base)}, {e.exponent!r})")
        if isinstance(e, Fun):
            return emit(f"_fn_{e.name}({visit(e.arg)})")
        raise SymbolicError(f"cannot compile {type(e).__name__}")

    outputs = [visit(e) for e in exprs]
    params = ", ".join(index[name] for name in names)
    source = f"def _compiled({params}):\n" + "\n".join(lines) + f"\n    return [{', '.join(outputs)}]\n"

    def _div(a: float, b: float) -> float:
        if b == 0.0:
            raise MathError("division by zero")
        return a / b

    def _pow(a: float, n: float) -> float:
        try:
            return math.pow(a, n)
        except (ValueError, OverflowError, ZeroDivisionError) as err:
            raise MathError(f"{a:g}^{n:g} is undefined ({err})")

    namespace = {"_div": _div, "_pow": _pow}
    for name in FUNCTIONS:
        namespace[f"_fn_{name}"] = (lambda fname: lambda x: _apply_function(fname, x))(name)
    exec(compile(source, "<symbolic>", "exec"), namespace)
    compiled = namespace["_compiled"]
    logger.debug(f"Compiled {len(exprs)} expression(s) into {len(lines)} operations")

    def run(*args: float) -> List[float]:
        try:
            return compiled(*(float(a) for a in args))
        except OverflowError as err:
            raise MathError(str(err))

    return run


# --- conversion to and from the modeling language --------------------------------------------------

def split_symbol(name: str):
    stripped = name.rstrip("'")
    return stripped, len(name) - len(stripped)


def to_lang(e: SymExpr) -> Expression:
    """Expression tree in the modeling language, preserving evaluation order."""
    if isinstance(e, Const):
        return NumberLit(value=e.value)
    if isinstance(e, Sym):
        base, order = split_symbol(e.name)
        return VarRef(path=[base], order=order)
    if isinstance(e, Mul) and is_const(e.left, -1.0):
        return Unary(op="neg", operand=to_lang(e.right))
    if isinstance(e, _BinaryNode):
        op = {Add: "+", Sub: "-", Mul: "*", Div: "/"}[type(e)]
        return Binary(op=op, left=to_lang(e.left), right=to_lang(e.right))
    if isinstance(e, Pow):
        return Binary(op="^", left=to_lang(e.base), right=NumberLit(value=e.exponent))
    if isinstance(e, Fun):
        return Call(name=e.name, args=[to_lang(e.arg)])
    raise SymbolicError(f"cannot convert {type(e).__name__}")


def to_source(e: SymExpr) -> str:
    from app.services.printer import format_expression
    return format_expression(to_lang(e))


def from_lang(expr: Expression) -> SymExpr:
    """
    Converts a scalar modeling-language expression. Primed names become
    symbols spelled with their primes (`q1'`).
    """
    if isinstance(expr, NumberLit):
        return Const(float(expr.value))
    if isinstance(expr, VarRef):
        if len(expr.path) != 1:
            raise SymbolicError(f"dotted name '{expr.spelled()}' is not allowed here")
        return Sym(expr.spelled())
    if isinstance(expr, Unary):
        if expr.op != "neg":
            raise SymbolicError("logical operators are not allowed in energy expressions")
        return neg(from_lang(expr.operand))
    if isinstance(expr, Binary):
        left = from_lang(expr.left)
        right = from_lang(expr.right)
        if expr.op == "+":
            return add(left, right)
        if expr.op == "-":
            return sub(left, right)
        if expr.op == "*":
            return mul(left, right)
        if expr.op == "/":
            return div(left, right)
        if expr.op == "^":
            exponent = simplify(right)
            if not isinstance(exponent, Const):
                raise SymbolicError("exponents must be numeric constants")
            return power(left, exponent)
        raise SymbolicError(f"operator '{expr.op}' is not allowed in energy expressions")
    if isinstance(expr, Call):
        if expr.name not in FUNCTIONS:
            raise SymbolicError(f"function '{expr.name}' is not supported symbolically")
        return fun(expr.name, from_lang(expr.args[0]))
    raise SymbolicError(f"{type(expr).__name__} is not a scalar expression")
