# app/services/printer.py
from typing import List

from app.schemas.ast import (
    Binary, BoolLit, Call, ClassDef, Continuous, Create, Discrete, Expression, If, MatrixLit,
    Model, NumberLit, Statement, StringLit, Switch, Terminate, Unary, VarRef, VectorLit,
)

# Binding power per operator; higher binds tighter.
_PRECEDENCE = {
    "||": 1, "&&": 2,
    "<": 3, ">": 3, "<=": 3, ">=": 3, "==": 3,
    "+": 4, "-": 4,
    "*": 5, "/": 5,
}
_UNARY = 6
_POWER = 7
_ATOM = 8

INDENT = "  "


def format_number(value: float) -> str:
    if float(value).is_integer() and abs(value) < 1e16:
        return str(int(value))
    return repr(float(value))


def _precedence(expr: Expression) -> int:
    if isinstance(expr, Binary):
        return _POWER if expr.op == "^" else _PRECEDENCE[expr.op]
    if isinstance(expr, Unary):
        return _UNARY
    if isinstance(expr, NumberLit) and expr.value < 0:
        return _UNARY
    return _ATOM


def _wrap(expr: Expression, minimum: int) -> str:
    text = format_expression(expr)
    return f"({text})" if _precedence(expr) < minimum else text


def format_expression(expr: Expression) -> str:
    """Renders an expression in the modeling language with minimal parentheses."""
    if isinstance(expr, NumberLit):
        return format_number(expr.value)
    if isinstance(expr, BoolLit):
        return "true" if expr.value else "false"
    if isinstance(expr, StringLit):
        return f'"{expr.value}"'
    if isinstance(expr, VarRef):
        return expr.spelled()
    if isinstance(expr, VectorLit):
        return "[" + ", ".join(format_expression(item) for item in expr.items) + "]"
    if isinstance(expr, MatrixLit):
        rows = ("[" + ", ".join(format_expression(item) for item in row) + "]" for row in expr.rows)
        return "[" + ", ".join(rows) + "]"
    if isinstance(expr, Call):
        return f"{expr.name}(" + ", ".join(format_expression(arg) for arg in expr.args) + ")"
    if isinstance(expr, Unary):
        symbol = "-" if expr.op == "neg" else "!"
        return symbol + _wrap(expr.operand, _UNARY)
    if isinstance(expr, Binary):
        if expr.op == "^":
            # base must be atomic; exponent may be another power or a unary minus
            return f"{_wrap(expr.left, _ATOM)}^{_wrap(expr.right, _UNARY)}"
        level = _PRECEDENCE[expr.op]
        left = _wrap(expr.left, level)
        right = _wrap(expr.right, level + 1)
        return f"{left} {expr.op} {right}"
    raise TypeError(f"cannot format {type(expr).__name__}")


def _format_statement(stmt: Statement, depth: int) -> List[str]:
    pad = INDENT * depth
    if isinstance(stmt, Continuous):
        return [f"{pad}{stmt.lhs.spelled()} = {format_expression(stmt.rhs)}"]
    if isinstance(stmt, Discrete):
        return [f"{pad}{stmt.lhs.spelled()} := {format_expression(stmt.rhs)}"]
    if isinstance(stmt, Terminate):
        return [f"{pad}terminate {stmt.target.spelled()}"]
    if isinstance(stmt, If):
        lines = [f"{pad}if {format_expression(stmt.cond)}"]
        lines += _format_block(stmt.then_branch, depth + 1)
        if stmt.else_branch is not None:
            lines.append(f"{pad}else")
            lines += _format_block(stmt.else_branch, depth + 1)
        lines.append(f"{pad}end")
        return lines
    if isinstance(stmt, Switch):
        lines = [f"{pad}switch {format_expression(stmt.subject)}"]
        for case in stmt.cases:
            lines.append(f"{pad}case {format_expression(case.literal)}")
            lines += _format_block(case.body, depth + 1)
        lines.append(f"{pad}end")
        return lines
    raise TypeError(f"cannot format {type(stmt).__name__}")


def _format_block(statements: List[Statement], depth: int) -> List[str]:
    lines: List[str] = []
    for index, stmt in enumerate(statements):
        rendered = _format_statement(stmt, depth)
        if index < len(statements) - 1:
            rendered[-1] += ";"
        lines += rendered
    return lines


def _format_init(init, depth: int) -> str:
    pad = INDENT * depth
    if isinstance(init, Create):
        args = ", ".join(format_expression(arg) for arg in init.args)
        return f"{pad}{init.target} := create {init.class_name}({args})"
    return f"{pad}{init.lhs.spelled()} := {format_expression(init.rhs)}"


def format_class(cls: ClassDef) -> str:
    lines = [f"class {cls.name} ({', '.join(cls.params)})", "private"]
    inits = [_format_init(init, 1) for init in cls.private_inits]
    lines += [line + (";" if i < len(inits) - 1 else "") for i, line in enumerate(inits)]
    lines.append("end")
    lines += _format_block(cls.body, 1)
    lines.append("end")
    return "\n".join(lines)


def format_model(model: Model) -> str:
    return "\n\n".join(format_class(cls) for cls in model.classes) + "\n"
