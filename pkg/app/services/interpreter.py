# app/services/interpreter.py
import math
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from app.schemas.ast import (
    Binary, BoolLit, Call, ClassDef, Continuous, Create, Discrete, Expression, If, MatrixLit,
    Model, NumberLit, Statement, StringLit, Switch, Terminate, Unary, VarRef, VectorLit,
)
from app.services import numlin
from app.services.errors import (
    ArityMismatch, DimensionMismatch, EvalError, HybridLangError, InitError, MathError,
    NumericError, RuntimeModelError, UnknownClass, UnsupportedConstruct,
)
from app.services.model_checks import PREDEFINED_NAMES, highest_orders
from app.services.printer import format_expression

logger = logging.getLogger(__name__)

Value = Union[float, bool, str, np.ndarray]
Slot = Tuple[str, int]
Evaluator = Callable[["ObjectInstance"], Value]

CONSTANTS: Dict[str, float] = {"pi": math.pi}


# --- values --------------------------------------------------------------------

def is_real(value: Any) -> bool:
    return isinstance(value, (int, float, np.floating)) and not isinstance(value, (bool, np.bool_))


def kind_of(value: Value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "Bool"
    if is_real(value):
        return "Real"
    if isinstance(value, str):
        return "String"
    if isinstance(value, np.ndarray):
        return "Vector" if value.ndim == 1 else "Matrix"
    return type(value).__name__


def to_value(raw: Any) -> Value:
    """Converts host data (numbers, bools, strings, nested lists) into interpreter values."""
    if isinstance(raw, (bool, np.bool_)):
        return bool(raw)
    if is_real(raw):
        return float(raw)
    if isinstance(raw, str):
        return raw
    array = np.asarray(raw, dtype=float)
    if array.ndim not in (1, 2) or array.size == 0:
        raise EvalError(f"unsupported value of shape {array.shape}")
    return array


def values_equal(a: Value, b: Value) -> bool:
    if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
        return isinstance(a, np.ndarray) and isinstance(b, np.ndarray) and np.array_equal(a, b)
    if kind_of(a) != kind_of(b):
        return False
    return a == b


def _real(value: Value, context: str) -> float:
    if not is_real(value):
        raise EvalError(f"{context} expects a Real, got {kind_of(value)}")
    return float(value)


def _bool(value: Value, context: str) -> bool:
    if not isinstance(value, (bool, np.bool_)):
        raise EvalError(f"{context} expects a Bool, got {kind_of(value)}")
    return bool(value)


def _numeric(value: Value, context: str) -> Union[float, np.ndarray]:
    if isinstance(value, np.ndarray):
        return value
    return _real(value, context)


def _checked(result: float, context: str) -> float:
    if math.isnan(result) or math.isinf(result):
        raise MathError(f"{context} produced a non-finite value")
    return result


# --- operators -------------------------------------------------------------------

def _add(a: Value, b: Value, op: str) -> Value:
    a, b = _numeric(a, op), _numeric(b, op)
    if isinstance(a, np.ndarray) != isinstance(b, np.ndarray):
        raise EvalError(f"'{op}' cannot mix {kind_of(a)} and {kind_of(b)}")
    if isinstance(a, np.ndarray):
        return numlin.apply_builtin("add" if op == "+" else "sub", a, b)
    return a + b if op == "+" else a - b


def _multiply(a: Value, b: Value) -> Value:
    a, b = _numeric(a, "*"), _numeric(b, "*")
    a_arr, b_arr = isinstance(a, np.ndarray), isinstance(b, np.ndarray)
    if not a_arr and not b_arr:
        return a * b
    if not a_arr:
        return numlin.apply_builtin("scale", a, b)
    if not b_arr:
        return numlin.apply_builtin("scale", b, a)
    if a.ndim == 2 and b.ndim == 1:
        return numlin.apply_builtin("matvec", a, b)
    if a.ndim == 2 and b.ndim == 2:
        return numlin.apply_builtin("matmul", a, b)
    raise EvalError(f"'*' is undefined for {kind_of(a)} and {kind_of(b)}; use dot or cross")


def _divide(a: Value, b: Value) -> Value:
    a = _numeric(a, "/")
    divisor = _real(b, "/")
    if divisor == 0.0:
        raise MathError("division by zero")
    return a / divisor


def _power(a: Value, b: Value) -> float:
    base, exponent = _real(a, "^"), _real(b, "^")
    try:
        return _checked(math.pow(base, exponent), "^")
    except (ValueError, OverflowError, ZeroDivisionError) as e:
        raise MathError(f"{base:g}^{exponent:g} is undefined ({e})")


def _compare(op: str, a: Value, b: Value) -> bool:
    if op == "==":
        return values_equal(a, b)
    left, right = _real(a, op), _real(b, op)
    if op == "<":
        return left < right
    if op == ">":
        return left > right
    if op == "<=":
        return left <= right
    return left >= right


def _scalar_function(name: str, fn: Callable[[float], float]) -> Callable[[Value], float]:
    def apply(value: Value) -> float:
        x = _real(value, name)
        try:
            return _checked(fn(x), name)
        except (ValueError, OverflowError) as e:
            raise MathError(f"{name}({x:g}) is undefined ({e})")
    return apply


def _vector_builtin(name: str) -> Callable[..., Value]:
    def apply(*values: Value) -> Value:
        for value in values:
            if not isinstance(value, np.ndarray) or value.ndim != 1:
                raise EvalError(f"{name} expects Vector arguments, got {kind_of(value)}")
        return numlin.apply_builtin(name, *values)
    return apply


BUILTINS: Dict[str, Callable[..., Value]] = {
    "sin": _scalar_function("sin", math.sin),
    "cos": _scalar_function("cos", math.cos),
    "tan": _scalar_function("tan", math.tan),
    "asin": _scalar_function("asin", math.asin),
    "acos": _scalar_function("acos", math.acos),
    "sqrt": _scalar_function("sqrt", math.sqrt),
    "dot": _vector_builtin("dot"),
    "cross": _vector_builtin("cross"),
    "norm": _vector_builtin("norm"),
}


# --- compilation ---------------------------------------------------------------------

def compile_expression(expr: Expression) -> Evaluator:
    """Turns an expression tree into a closure over an object instance."""
    if isinstance(expr, NumberLit):
        constant = float(expr.value)
        return lambda obj: constant
    if isinstance(expr, BoolLit):
        flag = bool(expr.value)
        return lambda obj: flag
    if isinstance(expr, StringLit):
        text = expr.value
        return lambda obj: text
    if isinstance(expr, VarRef):
        return _compile_read(expr)
    if isinstance(expr, VectorLit):
        items = [compile_expression(item) for item in expr.items]

        def vector(obj):
            return np.array([_real(item(obj), "vector literal") for item in items], dtype=float)
        return vector
    if isinstance(expr, MatrixLit):
        rows = [[compile_expression(item) for item in row] for row in expr.rows]

        def matrix(obj):
            return np.array([[_real(item(obj), "matrix literal") for item in row] for row in rows], dtype=float)
        return matrix
    if isinstance(expr, Unary):
        operand = compile_expression(expr.operand)
        if expr.op == "neg":
            return lambda obj: -_numeric(operand(obj), "unary minus")
        return lambda obj: not _bool(operand(obj), "'!'")
    if isinstance(expr, Binary):
        return _compile_binary(expr)
    if isinstance(expr, Call):
        fn = BUILTINS[expr.name]
        args = [compile_expression(arg) for arg in expr.args]
        if len(args) == 1:
            only = args[0]
            return lambda obj: fn(only(obj))
        return lambda obj: fn(*(arg(obj) for arg in args))
    raise EvalError(f"cannot evaluate {type(expr).__name__}")


def _compile_binary(expr: Binary) -> Evaluator:
    left = compile_expression(expr.left)
    right = compile_expression(expr.right)
    op = expr.op
    if op in ("+", "-"):
        return lambda obj: _add(left(obj), right(obj), op)
    if op == "*":
        return lambda obj: _multiply(left(obj), right(obj))
    if op == "/":
        return lambda obj: _divide(left(obj), right(obj))
    if op == "^":
        return lambda obj: _power(left(obj), right(obj))
    if op == "&&":
        return lambda obj: _bool(left(obj), "'&&'") and _bool(right(obj), "'&&'")
    if op == "||":
        return lambda obj: _bool(left(obj), "'||'") or _bool(right(obj), "'||'")
    return lambda obj: _compare(op, left(obj), right(obj))


def _compile_read(ref: VarRef) -> Evaluator:
    path, order, spelled = list(ref.path), ref.order, ref.spelled()
    slot = (path[-1], order)
    constant = CONSTANTS.get(path[0]) if len(path) == 1 and order == 0 and path[0] in PREDEFINED_NAMES else None

    def read(obj: "ObjectInstance") -> Value:
        owner = obj.resolve_owner(path, spelled)
        try:
            return owner.store[slot]
        except KeyError:
            if constant is not None:
                return constant
            raise EvalError(f"undefined variable '{spelled}'")
    return read


@dataclass
class CompiledStatement:
    source: Statement
    kind: str
    target: Optional[VarRef] = None
    rhs: Optional[Evaluator] = None
    branches: List[Tuple[Optional[Callable[[Value], bool]], List["CompiledStatement"]]] = field(default_factory=list)

    @property
    def text(self) -> str:
        stmt = self.source
        if isinstance(stmt, (Continuous, Discrete)):
            op = "=" if isinstance(stmt, Continuous) else ":="
            return f"{stmt.lhs.spelled()} {op} {format_expression(stmt.rhs)}"
        if isinstance(stmt, If):
            return f"if {format_expression(stmt.cond)}"
        if isinstance(stmt, Switch):
            return f"switch {format_expression(stmt.subject)}"
        return f"terminate {stmt.target.spelled()}"


def compile_statements(statements: Sequence[Statement]) -> List[CompiledStatement]:
    compiled: List[CompiledStatement] = []
    for stmt in statements:
        if isinstance(stmt, Continuous):
            compiled.append(CompiledStatement(stmt, "continuous", stmt.lhs, compile_expression(stmt.rhs)))
        elif isinstance(stmt, Discrete):
            compiled.append(CompiledStatement(stmt, "discrete", stmt.lhs, compile_expression(stmt.rhs)))
        elif isinstance(stmt, If):
            node = CompiledStatement(stmt, "if", rhs=compile_expression(stmt.cond))
            node.branches.append((None, compile_statements(stmt.then_branch)))
            node.branches.append((None, compile_statements(stmt.else_branch or [])))
            compiled.append(node)
        elif isinstance(stmt, Switch):
            node = CompiledStatement(stmt, "switch", rhs=compile_expression(stmt.subject))
            for case in stmt.cases:
                literal = compile_expression(case.literal)(None)  # literals never read variables
                node.branches.append((lambda v, lit=literal: values_equal(v, lit), compile_statements(case.body)))
            compiled.append(node)
        elif isinstance(stmt, Terminate):
            compiled.append(CompiledStatement(stmt, "terminate", stmt.target))
    return compiled


@dataclass
class CompiledClass:
    definition: ClassDef
    body: List[CompiledStatement]
    highest_order: Dict[str, int]

    @property
    def name(self) -> str:
        return self.definition.name


class Program:
    """Compiled form of a loaded model; one per simulation run."""

    def __init__(self, model: Model):
        self.model = model
        self._classes: Dict[str, CompiledClass] = {}

    def compiled(self, class_name: str) -> CompiledClass:
        if class_name not in self._classes:
            definition = self.model.get(class_name)
            if definition is None:
                raise UnknownClass(class_name)
            self._classes[class_name] = CompiledClass(
                definition, compile_statements(definition.body), highest_orders(definition)
            )
        return self._classes[class_name]


# --- runtime objects -------------------------------------------------------------------

@dataclass
class ObjectInstance:
    class_name: str
    compiled: CompiledClass
    store: Dict[Slot, Value] = field(default_factory=dict)
    children: Dict[str, "ObjectInstance"] = field(default_factory=dict)

    @property
    def highest_order(self) -> Dict[str, int]:
        return self.compiled.highest_order

    def resolve_owner(self, path: Sequence[str], spelled: str) -> "ObjectInstance":
        owner = self
        for part in path[:-1]:
            child = owner.children.get(part)
            if child is None:
                raise EvalError(f"'{part}' is not a child object in '{spelled}'")
            owner = child
        return owner

    def read(self, path: str) -> Value:
        """Reads a dotted, primed path such as "theta'" or "s.p"."""
        names, order = split_path(path)
        owner = self.resolve_owner(names, path)
        try:
            return owner.store[(names[-1], order)]
        except KeyError:
            raise EvalError(f"undefined variable '{path}'")

    def write(self, path: str, value: Any) -> None:
        names, order = split_path(path)
        owner = self.resolve_owner(names, path)
        slot = (names[-1], order)
        if slot not in owner.store:
            raise InitError(f"cannot set '{path}': no such variable")
        owner.store[slot] = to_value(value)

    def objects(self) -> Iterator["ObjectInstance"]:
        """This object followed by its descendants, parents before children."""
        yield self
        for child in self.children.values():
            yield from child.objects()


def split_path(path: str) -> Tuple[List[str], int]:
    text = path.strip()
    stripped = text.rstrip("'")
    names = stripped.split(".")
    if not stripped or any(not name for name in names):
        raise EvalError(f"malformed variable path '{path}'")
    return names, len(text) - len(stripped)


def slot_name(name: str, order: int) -> str:
    return name + "'" * order


# --- instantiation -----------------------------------------------------------------------

def instantiate(model: Union[Model, Program], class_name: str, args: Sequence[Any] = (),
                overrides: Optional[Dict[str, Any]] = None) -> ObjectInstance:
    """
    Builds an object of `class_name`: binds parameters, runs the private section
    top to bottom (creating children as it goes), then materializes every
    derivative slot up to the highest order used by a continuous equation.
    """
    program = model if isinstance(model, Program) else Program(model)
    obj = _instantiate(program, class_name, [to_value(a) for a in args])
    for path, value in (overrides or {}).items():
        obj.write(path, value)
        logger.debug(f"Override {path} = {value}")
    return obj


def _instantiate(program: Program, class_name: str, args: List[Value]) -> ObjectInstance:
    compiled = program.compiled(class_name)
    definition = compiled.definition
    if len(args) != len(definition.params):
        raise ArityMismatch(class_name, len(definition.params), len(args))

    obj = ObjectInstance(class_name, compiled)
    for name, value in zip(definition.params, args):
        obj.store[(name, 0)] = value

    for init in definition.private_inits:
        try:
            if isinstance(init, Create):
                values = [compile_expression(arg)(obj) for arg in init.args]
                obj.children[init.target] = _instantiate(program, init.class_name, values)
            else:
                value = compile_expression(init.rhs)(obj)
                owner = obj.resolve_owner(init.lhs.path, init.lhs.spelled())
                owner.store[(init.lhs.name, init.lhs.order)] = value
        except (EvalError, MathError) as e:
            raise InitError(f"class {class_name}, line {init.line}: {e.message}")
        except NumericError as e:
            raise InitError(f"class {class_name}, line {init.line}: {e.message}")

    for name, highest in compiled.highest_order.items():
        base = obj.store.get((name, 0), 0.0)
        for order in range(highest + 1):
            # missing slots take the shape of the variable they derive from
            obj.store.setdefault((name, order), np.zeros_like(base) if isinstance(base, np.ndarray) else 0.0)
    return obj


# --- stepping ---------------------------------------------------------------------------------

class StatementFailure(Exception):
    """Carries the failing statement text alongside a runtime error."""

    def __init__(self, error: HybridLangError, statement: str):
        super().__init__(error.message)
        self.error = error
        self.statement = statement


def _run(statement: CompiledStatement, action: Callable[[], Any]) -> Any:
    try:
        return action()
    except DimensionMismatch as e:
        raise StatementFailure(EvalError(e.message), statement.text)
    except (RuntimeModelError, NumericError) as e:
        raise StatementFailure(e, statement.text)


def _assign(obj: ObjectInstance, target: VarRef, value: Value) -> None:
    owner = obj.resolve_owner(target.path, target.spelled())
    owner.store[(target.name, target.order)] = value


def _collect(obj: ObjectInstance, statements: List[CompiledStatement],
             active: List[Tuple[ObjectInstance, CompiledStatement]]) -> None:
    for stmt in statements:
        if stmt.kind == "continuous":
            active.append((obj, stmt))
        elif stmt.kind == "discrete":
            _run(stmt, lambda: _assign(obj, stmt.target, stmt.rhs(obj)))
        elif stmt.kind == "if":
            taken = _run(stmt, lambda: _bool(stmt.rhs(obj), "if condition"))
            _collect(obj, stmt.branches[0 if taken else 1][1], active)
        elif stmt.kind == "switch":
            subject = _run(stmt, lambda: stmt.rhs(obj))
            for matches, body in stmt.branches:
                if matches(subject):
                    _collect(obj, body, active)
                    break
        else:
            raise StatementFailure(UnsupportedConstruct("terminate is not supported"), stmt.text)


def _describe(value: Value) -> str:
    if isinstance(value, np.ndarray):
        return f"{kind_of(value)} of shape {value.shape}"
    return kind_of(value)


def _integrate(obj: ObjectInstance, dt: float) -> None:
    store = obj.store
    for name, highest in obj.highest_order.items():
        if highest == 0:
            continue
        previous = [store[(name, k)] for k in range(highest + 1)]
        for k in range(highest - 1, -1, -1):
            current, rate = previous[k], previous[k + 1]
            if not (is_real(current) or isinstance(current, np.ndarray)):
                raise EvalError(f"cannot integrate '{slot_name(name, k)}' of kind {kind_of(current)}")
            if kind_of(current) != kind_of(rate) or np.shape(current) != np.shape(rate):
                raise EvalError(
                    f"cannot integrate '{slot_name(name, k)}' of kind {_describe(current)} "
                    f"with '{slot_name(name, k + 1)}' of kind {_describe(rate)}"
                )
            store[(name, k)] = current + rate * dt


def step(root: ObjectInstance, dt: float) -> ObjectInstance:
    """
    Advances the object tree by one step:
    discrete updates and guard selection, continuous equations in textual
    order (reads see the newest value), then explicit Euler on every
    integrated variable using values from before the update.
    """
    active: List[Tuple[ObjectInstance, CompiledStatement]] = []
    for obj in root.objects():
        _collect(obj, obj.compiled.body, active)

    for obj, stmt in active:
        _run(stmt, lambda: _assign(obj, stmt.target, stmt.rhs(obj)))

    for obj in root.objects():
        _integrate(obj, dt)
    return root


def evaluate_constant(expr: Expression) -> Value:
    """Evaluates an expression that reads no variables, e.g. a constructor argument."""
    scratch = ObjectInstance("<constant>", CompiledClass(ClassDef(name="<constant>"), [], {}))
    try:
        return compile_expression(expr)(scratch)
    except DimensionMismatch as e:
        raise EvalError(e.message)
