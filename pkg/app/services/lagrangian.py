# app/services/lagrangian.py
import re
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.integrate import solve_ivp

from app.config.settings import LINEARITY_SPOT_CHECKS, MAX_EMIT_COORDS
from app.schemas.ast import ClassDef, Continuous, Discrete, NumberLit, VarRef, VectorLit
from app.services import numlin
from app.services.errors import (
    LagrangianSpecError, LangError, MathError, NonlinearInAccel, Singular, SingularMass,
    SingularSymbolicDet, SymbolicError, TooManyCoords, UnboundSymbol,
)
from app.services.parser import parse_expression
from app.services.printer import format_class, format_number
from app.services.symbolic import (
    ZERO, Const, SymExpr, add, compile_functions, div, evaluate, from_lang, is_const, mul, neg,
    partial, simplify, sub, substitute, time_derivative, to_lang, to_source,
)

logger = logging.getLogger(__name__)

_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


@dataclass(frozen=True)
class LagrangianSystem:
    """
    Generalized coordinates with kinetic energy T, potential energy V and
    generalized forces Q. Velocity and acceleration symbols are the
    coordinate names with one and two primes.
    """

    name: str
    coords: Tuple[str, ...]
    T: SymExpr
    V: SymExpr
    params: Dict[str, float] = field(default_factory=dict)
    Q: Tuple[SymExpr, ...] = ()
    init: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(self.coords))
        if not self.Q:
            object.__setattr__(self, "Q", tuple(ZERO for _ in self.coords))
        object.__setattr__(self, "Q", tuple(self.Q))
        self._validate()

    def _validate(self) -> None:
        if not self.coords:
            raise LagrangianSpecError("at least one coordinate is required")
        for name in list(self.coords) + list(self.params):
            if not _NAME_RE.match(name):
                raise LagrangianSpecError(f"'{name}' is not a valid name")
        if len(set(self.coords)) != len(self.coords):
            raise LagrangianSpecError("duplicate coordinate names")
        clash = set(self.coords) & set(self.params)
        if clash:
            raise LagrangianSpecError(f"'{sorted(clash)[0]}' is both a coordinate and a parameter")
        if len(self.Q) != len(self.coords):
            raise LagrangianSpecError(f"expected {len(self.coords)} generalized forces, got {len(self.Q)}")

        allowed = set(self.coords) | set(self.velocities) | set(self.params)
        for label, expr in [("T", self.T), ("V", self.V)] + [(f"Q[{i}]", q) for i, q in enumerate(self.Q)]:
            unknown = expr.free_symbols - allowed
            if unknown:
                raise LagrangianSpecError(f"{label} references unknown symbol '{sorted(unknown)[0]}'")
        if self.V.free_symbols & set(self.velocities):
            raise LagrangianSpecError("V must not depend on velocities")
        for name in self.init:
            if name not in self.coords and name not in self.velocities:
                raise LagrangianSpecError(f"init names unknown coordinate '{name}'")

    @property
    def n(self) -> int:
        return len(self.coords)

    @property
    def velocities(self) -> List[str]:
        return [f"{q}'" for q in self.coords]

    @property
    def accelerations(self) -> List[str]:
        return [f"{q}''" for q in self.coords]

    @property
    def flow(self) -> Dict[str, str]:
        rates = {q: v for q, v in zip(self.coords, self.velocities)}
        rates.update({v: a for v, a in zip(self.velocities, self.accelerations)})
        return rates

    @property
    def state_names(self) -> List[str]:
        return list(self.coords) + self.velocities + sorted(self.params)

    def bindings(self, state: Mapping[str, float]) -> Dict[str, float]:
        merged = dict(self.params)
        merged.update(state)
        return merged


@dataclass
class ImplicitEOM:
    """Residuals r = M(q) q'' + c(q, q') of the Euler-Lagrange equations."""

    system: LagrangianSystem
    residuals: List[SymExpr]
    mass_matrix: List[List[SymExpr]]
    bias: List[SymExpr]

    @cached_property
    def _numeric(self) -> Callable[..., List[float]]:
        flat = [entry for row in self.mass_matrix for entry in row] + list(self.bias)
        return compile_functions(flat, self.system.state_names)

    def evaluate_numeric(self, state: Mapping[str, float]) -> Tuple[np.ndarray, np.ndarray]:
        """Mass matrix and bias at `state` (coordinates, velocities, optionally parameters)."""
        bound = self.system.bindings(state)
        missing = [name for name in self.system.state_names if name not in bound]
        if missing:
            raise UnboundSymbol(missing[0])
        values = self._numeric(*(bound[name] for name in self.system.state_names))
        n = self.system.n
        return np.array(values[: n * n]).reshape(n, n), np.array(values[n * n:])


def euler_lagrange(sys: LagrangianSystem, seed: int = 0) -> ImplicitEOM:
    """
    Builds r_i = d/dt(dL/dq_i') - dL/dq_i - Q_i with L = T - V, then splits
    r into M q'' + c. Affinity in q'' is checked symbolically and at
    random states.
    """
    lagrangian = sub(sys.T, sys.V)
    flow = sys.flow
    residuals = []
    for q, v, force in zip(sys.coords, sys.velocities, sys.Q):
        momentum = simplify(partial(lagrangian, v))
        r = sub(sub(time_derivative(momentum, flow), partial(lagrangian, q)), force)
        residuals.append(simplify(r))

    accels = sys.accelerations
    mass = [[simplify(partial(r, a)) for a in accels] for r in residuals]
    at_rest = {a: ZERO for a in accels}
    bias = [simplify(substitute(r, at_rest)) for r in residuals]

    symbolic_ok = all(
        is_const(simplify(partial(entry, a)), 0.0)
        for row in mass for entry in row for a in accels
        if a in entry.free_symbols
    )
    numeric_ok = _spot_check(sys, residuals, mass, bias, seed)
    if not numeric_ok:
        raise NonlinearInAccel(f"{sys.name}: residuals are not affine in the accelerations")
    if not symbolic_ok:
        logger.warning(f"{sys.name}: symbolic affinity check inconclusive; numeric check passed")

    logger.info(f"Derived equations of motion for {sys.name} ({sys.n} coordinate(s))")
    return ImplicitEOM(sys, residuals, mass, bias)


def _spot_check(sys: LagrangianSystem, residuals, mass, bias, seed: int) -> bool:
    rng = np.random.default_rng(seed)
    names = list(sys.coords) + sys.velocities + sys.accelerations
    checked = 0
    for _ in range(LINEARITY_SPOT_CHECKS):
        state = sys.bindings(dict(zip(names, rng.uniform(-1.0, 1.0, len(names)))))
        qdd = [state[a] for a in sys.accelerations]
        try:
            for i, r in enumerate(residuals):
                direct = evaluate(r, state)
                terms = [evaluate(mass[i][j], state) * qdd[j] for j in range(sys.n)]
                c = evaluate(bias[i], state)
                scale = 1.0 + abs(direct) + abs(c) + sum(abs(t) for t in terms)
                if abs(direct - (sum(terms) + c)) > 1e-8 * scale:
                    return False
        except MathError:
            continue
        checked += 1
    if checked == 0:
        logger.warning(f"{sys.name}: every affinity sample hit a domain error")
    return True


def accelerations(eom: ImplicitEOM, state: Mapping[str, float]) -> List[float]:
    """Solves M q'' = -c at `state` by Gaussian elimination."""
    m, c = eom.evaluate_numeric(state)
    try:
        return [float(x) for x in numlin.gaussian_solve(m, -c)]
    except Singular as e:
        raise SingularMass(f"{eom.system.name}: mass matrix is singular ({e.message})")


def determinant(matrix: Sequence[Sequence[SymExpr]]) -> SymExpr:
    """Cofactor expansion along the first row."""
    n = len(matrix)
    if n == 1:
        return matrix[0][0]
    if n == 2:
        return sub(mul(matrix[0][0], matrix[1][1]), mul(matrix[0][1], matrix[1][0]))
    total: SymExpr = ZERO
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in matrix[1:]]
        term = mul(matrix[0][j], determinant(minor))
        total = add(total, term) if j % 2 == 0 else sub(total, term)
    return total


def explicit_accelerations(eom: ImplicitEOM) -> List[SymExpr]:
    """q'' = M^-1 (-c) in closed form by Cramer's rule."""
    n = eom.system.n
    if n > MAX_EMIT_COORDS:
        raise TooManyCoords(f"{eom.system.name}: {n} coordinates, at most {MAX_EMIT_COORDS} supported")
    det = simplify(determinant(eom.mass_matrix))
    if is_const(det, 0.0):
        raise SingularSymbolicDet(f"{eom.system.name}: mass matrix determinant is identically 0")
    rhs = [neg(c) for c in eom.bias]
    solution = []
    for i in range(n):
        replaced = [[rhs[r] if j == i else eom.mass_matrix[r][j] for j in range(n)] for r in range(n)]
        solution.append(simplify(div(determinant(replaced), det)))
    return solution


def emit_explicit_source(sys: LagrangianSystem, class_name: Optional[str] = None,
                         eom: Optional[ImplicitEOM] = None) -> str:
    """
    Model source for `sys` in explicit form: parameters, coordinates and
    their derivatives are private variables, and each q'' gets one
    continuous equation.
    """
    eom = eom or euler_lagrange(sys)
    solution = explicit_accelerations(eom)

    inits = [Discrete(lhs=VarRef(path=[name]), rhs=NumberLit(value=value))
             for name, value in sys.params.items()]
    for q in sys.coords:
        for order in range(3):
            start = sys.init.get(q + "'" * order, 0.0) if order < 2 else 0.0
            inits.append(Discrete(lhs=VarRef(path=[q], order=order), rhs=NumberLit(value=start)))
    body = [Continuous(lhs=VarRef(path=[q], order=2), rhs=to_lang(x)) for q, x in zip(sys.coords, solution)]

    cls = ClassDef(name=class_name or sys.name, params=[], private_inits=inits, body=body)
    return format_class(cls) + "\n"


def format_implicit(eom: ImplicitEOM) -> str:
    lines = []
    for i, r in enumerate(eom.residuals):
        lines.append(f"r[{i}] = {to_source(r)}")
    for i, row in enumerate(eom.mass_matrix):
        for j, entry in enumerate(row):
            lines.append(f"M[{i}][{j}] = {to_source(entry)}")
    for i, c in enumerate(eom.bias):
        lines.append(f"c[{i}] = {to_source(c)}")
    return "\n".join(lines) + "\n"


# --- energy and reference trajectories ----------------------------------------------------

def total_energy(sys: LagrangianSystem, state: Mapping[str, float]) -> float:
    return evaluate(add(sys.T, sys.V), sys.bindings(state))


def explicit_rhs(eom: ImplicitEOM) -> Callable[[float, np.ndarray], np.ndarray]:
    """f(t, y) for y = (q, q') usable with scipy.integrate."""
    sys = eom.system
    params = [sys.params[name] for name in sorted(sys.params)]
    n = sys.n

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        values = eom._numeric(*y, *params)
        m = np.array(values[: n * n]).reshape(n, n)
        c = np.array(values[n * n:])
        try:
            qdd = numlin.gaussian_solve(m, -c)
        except Singular as e:
            raise SingularMass(f"{sys.name}: mass matrix is singular at t={t:g} ({e.message})")
        return np.concatenate([y[n:], qdd])

    return rhs


def reference_trajectory(eom: ImplicitEOM, state0: Optional[Mapping[str, float]] = None, t_end: float = 1.0,
                         t_eval: Optional[Sequence[float]] = None, rtol: float = 1e-12,
                         atol: float = 1e-12) -> pd.DataFrame:
    """High-accuracy DOP853 solution of the explicit equations, one row per output time."""
    sys = eom.system
    start = dict(sys.init)
    start.update(state0 or {})
    y0 = [float(start.get(name, 0.0)) for name in list(sys.coords) + sys.velocities]
    solution = solve_ivp(explicit_rhs(eom), (0.0, t_end), y0, method="DOP853",
                         t_eval=t_eval, rtol=rtol, atol=atol)
    if not solution.success:
        raise SymbolicError(f"{sys.name}: reference integration failed ({solution.message})")
    frame = pd.DataFrame(solution.y.T, columns=list(sys.coords) + sys.velocities)
    frame.insert(0, "time", solution.t)
    return frame


# --- Lagrangian spec files ---------------------------------------------------------------------

_DIRECTIVE_RE = re.compile(
    r"^(?:(?P<kw>coords|name)\s+(?P<names>.+)"
    r"|(?P<valued>param|init)\s+(?P<target>[A-Za-z_][A-Za-z0-9_]*'*)\s*=\s*(?P<value>.+)"
    r"|(?P<energy>T|V|Q)\s*=\s*(?P<expr>.+))$"
)


def _logical_lines(text: str) -> List[Tuple[int, str]]:
    """Strips comments and joins indented continuation lines onto their directive."""
    lines: List[Tuple[int, str]] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("//", 1)[0].rstrip()
        if not content.strip():
            continue
        if raw[:1] in (" ", "\t") and lines:
            first, previous = lines[-1]
            lines[-1] = (first, f"{previous} {content.strip()}")
        else:
            lines.append((number, content.strip()))
    return lines


def _expression(text: str, line: int) -> SymExpr:
    try:
        return from_lang(parse_expression(text))
    except LangError as e:
        raise LagrangianSpecError(e.message, line)
    except SymbolicError as e:
        raise LagrangianSpecError(e.message, line)


def _constant(text: str, line: int) -> float:
    value = simplify(_expression(text, line))
    if not isinstance(value, Const):
        raise LagrangianSpecError(f"'{text}' is not a numeric constant", line)
    return value.value


def parse_lagrangian_spec(text: str, default_name: str = "system") -> LagrangianSystem:
    """
    Reads a Lagrangian spec: `coords q1 q2`, `param NAME = REAL`, `T = EXPR`,
    `V = EXPR`, optional `Q = [EXPR, ...]`, `init NAME = REAL` and `name NAME`.
    """
    name = default_name
    coords: Optional[List[str]] = None
    params: Dict[str, float] = {}
    init: Dict[str, float] = {}
    energies: Dict[str, SymExpr] = {}
    forces: Tuple[SymExpr, ...] = ()

    for line, content in _logical_lines(text):
        match = _DIRECTIVE_RE.match(content)
        if match is None:
            raise LagrangianSpecError(f"unrecognised line '{content}'", line)
        if match.group("kw") == "coords":
            coords = [part for part in re.split(r"[\s,]+", match.group("names")) if part]
        elif match.group("kw") == "name":
            name = match.group("names").strip()
        elif match.group("valued") == "param":
            params[match.group("target")] = _constant(match.group("value"), line)
        elif match.group("valued") == "init":
            init[match.group("target")] = _constant(match.group("value"), line)
        elif match.group("energy") == "Q":
            try:
                vector = parse_expression(match.group("expr"))
            except LangError as e:
                raise LagrangianSpecError(e.message, line)
            if not isinstance(vector, VectorLit):
                raise LagrangianSpecError("Q must be a list [EXPR, ...]", line)
            try:
                forces = tuple(from_lang(item) for item in vector.items)
            except SymbolicError as e:
                raise LagrangianSpecError(e.message, line)
        else:
            key = match.group("energy")
            if key in energies:
                raise LagrangianSpecError(f"{key} is defined twice", line)
            energies[key] = _expression(match.group("expr"), line)

    if coords is None:
        raise LagrangianSpecError("missing 'coords' line")
    for key in ("T", "V"):
        if key not in energies:
            raise LagrangianSpecError(f"missing '{key} = ...' line")
    system = LagrangianSystem(name=name, coords=tuple(coords), T=energies["T"], V=energies["V"],
                              params=params, Q=forces, init=init)
    logger.info(f"Loaded Lagrangian spec '{name}' with {system.n} coordinate(s)")
    return system


def format_lagrangian_spec(sys: LagrangianSystem) -> str:
    lines = [f"name {sys.name}", f"coords {' '.join(sys.coords)}"]
    lines += [f"param {name} = {format_number(value)}" for name, value in sys.params.items()]
    lines += [f"init {name} = {format_number(value)}" for name, value in sys.init.items()]
    lines.append(f"T = {to_source(sys.T)}")
    lines.append(f"V = {to_source(sys.V)}")
    if any(not is_const(force, 0.0) for force in sys.Q):
        lines.append("Q = [" + ", ".join(to_source(force) for force in sys.Q) + "]")
    return "\n".join(lines) + "\n"
