# app/services/model_checks.py
import logging
from typing import Dict, Iterator, List, Set

from app.schemas.ast import (
    Binary, Call, ClassDef, Continuous, Create, Discrete, Expression, If, MatrixLit, Model,
    Statement, Switch, Terminate, Unary, VarRef, VectorLit,
)
from app.services.errors import LoadError

logger = logging.getLogger(__name__)

PREDEFINED_NAMES = {"pi"}


def walk_statements(statements: List[Statement]) -> Iterator[Statement]:
    """Depth-first over a statement list, entering if/switch branches."""
    for stmt in statements:
        yield stmt
        if isinstance(stmt, If):
            yield from walk_statements(stmt.then_branch)
            if stmt.else_branch:
                yield from walk_statements(stmt.else_branch)
        elif isinstance(stmt, Switch):
            for case in stmt.cases:
                yield from walk_statements(case.body)


def var_refs(expr: Expression) -> Iterator[VarRef]:
    """Variable references in source order, walked without recursion."""
    stack = [expr]
    while stack:
        node = stack.pop()
        if isinstance(node, VarRef):
            yield node
        elif isinstance(node, Unary):
            stack.append(node.operand)
        elif isinstance(node, Binary):
            stack.extend((node.right, node.left))
        elif isinstance(node, Call):
            stack.extend(reversed(node.args))
        elif isinstance(node, VectorLit):
            stack.extend(reversed(node.items))
        elif isinstance(node, MatrixLit):
            for row in reversed(node.rows):
                stack.extend(reversed(row))


def statement_expressions(stmt: Statement) -> Iterator[Expression]:
    if isinstance(stmt, (Continuous, Discrete)):
        yield stmt.rhs
    elif isinstance(stmt, If):
        yield stmt.cond
    elif isinstance(stmt, Switch):
        yield stmt.subject
        for case in stmt.cases:
            yield case.literal


def declared_names(cls: ClassDef) -> Set[str]:
    names = set(cls.params)
    for init in cls.private_inits:
        if isinstance(init, Create):
            names.add(init.target)
        elif len(init.lhs.path) == 1:
            names.add(init.lhs.name)
    return names


def children_of(cls: ClassDef) -> Dict[str, str]:
    return {init.target: init.class_name for init in cls.private_inits if isinstance(init, Create)}


def highest_orders(cls: ClassDef) -> Dict[str, int]:
    """Highest derivative order of each local variable assigned by a continuous equation."""
    orders: Dict[str, int] = {}
    for stmt in walk_statements(cls.body):
        if isinstance(stmt, Continuous) and len(stmt.lhs.path) == 1:
            name = stmt.lhs.name
            orders[name] = max(orders.get(name, 0), stmt.lhs.order)
    return orders


def _check_class(cls: ClassDef, model: Model, problems: List[str]) -> None:
    declared = declared_names(cls)
    children = children_of(cls)

    if len(set(cls.params)) != len(cls.params):
        problems.append(f"class {cls.name}: duplicate parameter names")
    for init in cls.private_inits:
        if isinstance(init, Create):
            if init.target in cls.params:
                problems.append(f"class {cls.name}: '{init.target}' is both a parameter and a child object")
            if model.get(init.class_name) is None:
                problems.append(f"class {cls.name}: create of undefined class '{init.class_name}'")
        elif len(init.lhs.path) == 1 and init.lhs.order == 0 and init.lhs.name in cls.params:
            problems.append(f"class {cls.name}: '{init.lhs.name}' is both a parameter and a private variable")

    def check_ref(ref: VarRef, where: str) -> None:
        root = ref.path[0]
        if len(ref.path) == 1:
            if root not in declared and root not in PREDEFINED_NAMES:
                problems.append(f"class {cls.name}: undefined variable '{ref.spelled()}' {where} (line {ref.line})")
            return
        child_class = children.get(root)
        if child_class is None:
            problems.append(f"class {cls.name}: '{root}' is not a child object in '{ref.spelled()}' (line {ref.line})")
            return
        target = model.get(child_class)
        if target is not None and len(ref.path) == 2 and ref.path[1] not in declared_names(target):
            problems.append(f"class {cls.name}: class {child_class} has no variable '{ref.path[1]}' (line {ref.line})")

    for stmt in walk_statements(cls.body):
        for expr in statement_expressions(stmt):
            for ref in var_refs(expr):
                check_ref(ref, "read")
        if isinstance(stmt, (Continuous, Discrete, Terminate)):
            target = stmt.lhs if not isinstance(stmt, Terminate) else stmt.target
            check_ref(target, "assigned")

    continuous_orders: Dict[str, Set[int]] = {}
    for stmt in walk_statements(cls.body):
        if isinstance(stmt, Continuous):
            continuous_orders.setdefault(stmt.lhs.spelled().rstrip("'"), set()).add(stmt.lhs.order)
    for name, orders in continuous_orders.items():
        if len(orders) > 1:
            listed = ", ".join(str(o) for o in sorted(orders))
            problems.append(f"class {cls.name}: continuous equations for '{name}' at several orders ({listed})")


def _check_create_cycles(model: Model, problems: List[str]) -> None:
    graph = {cls.name: set(children_of(cls).values()) for cls in model.classes}
    state: Dict[str, int] = {}  # 1 visiting, 2 done

    def visit(name: str, trail: List[str]) -> None:
        if state.get(name) == 2 or name not in graph:
            return
        if state.get(name) == 1:
            cycle = trail[trail.index(name):] + [name]
            problems.append(f"cyclic create chain: {' -> '.join(cycle)}")
            return
        state[name] = 1
        for child in sorted(graph[name]):
            visit(child, trail + [name])
        state[name] = 2

    for name in graph:
        visit(name, [])


def check_model(model: Model) -> None:
    """Load-time checks; raises LoadError listing every problem found."""
    problems: List[str] = []
    names = model.class_names
    duplicates = sorted({n for n in names if names.count(n) > 1})
    for name in duplicates:
        problems.append(f"duplicate class name '{name}'")
    for cls in model.classes:
        _check_class(cls, model, problems)
    _check_create_cycles(model, problems)
    if problems:
        logger.warning(f"Model failed load checks with {len(problems)} problem(s)")
        raise LoadError(problems)
