# app/services/errors.py
from typing import Any, List, Optional, Sequence


class HybridLangError(Exception):
    """Root of every error raised by the services layer."""

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message
        self.source: Optional[str] = None

    def with_source(self, source: str) -> "HybridLangError":
        self.source = source
        return self

    def __str__(self) -> str:
        if self.source:
            return f"{self.source}: {self.message}"
        return self.message


class PositionedError(HybridLangError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(message)
        self.line = line
        self.col = col

    def __str__(self) -> str:
        prefix = f"{self.source}:" if self.source else ""
        return f"{prefix}{self.line}:{self.col}: {self.message}"


# --- modeling language -------------------------------------------------------

class LangError(HybridLangError):
    pass


class LexError(PositionedError, LangError):
    def __init__(self, char: str, line: int, col: int):
        super().__init__(f"illegal character {char!r}", line, col)
        self.char = char


class ParseError(PositionedError, LangError):
    def __init__(self, expected: str, found: str, line: int, col: int):
        super().__init__(f"expected {expected}, found {found}", line, col)
        self.expected = expected
        self.found = found


class LoadError(LangError):
    def __init__(self, problems: Sequence[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


# --- interpreter ---------------------------------------------------------------

class RuntimeModelError(HybridLangError):
    pass


class UnknownClass(RuntimeModelError):
    def __init__(self, name: str):
        super().__init__(f"unknown class '{name}'")
        self.name = name


class ArityMismatch(RuntimeModelError):
    def __init__(self, name: str, expected: int, got: int):
        super().__init__(f"class '{name}' takes {expected} argument(s), got {got}")
        self.expected = expected
        self.got = got


class InitError(RuntimeModelError):
    pass


class EvalError(RuntimeModelError):
    pass


class MathError(RuntimeModelError):
    pass


class UnsupportedConstruct(RuntimeModelError):
    pass


class SimulationError(RuntimeModelError):
    """A runtime error annotated with where in the run it happened."""

    def __init__(self, cause: HybridLangError, step_index: int, time: float, statement: Optional[str] = None):
        where = f"step {step_index} (t={time:g})"
        if statement:
            where += f" in '{statement}'"
        super().__init__(f"{where}: {cause.message}")
        self.cause = cause
        self.step_index = step_index
        self.time = time
        self.statement = statement


# --- numeric kernel -------------------------------------------------------------

class NumericError(HybridLangError):
    pass


class DimensionMismatch(NumericError):
    def __init__(self, op: str, *shapes: Any):
        rendered = " vs ".join(str(tuple(s)) for s in shapes)
        super().__init__(f"{op}: incompatible shapes {rendered}")
        self.shapes = shapes


class Singular(NumericError):
    def __init__(self, column: int, pivot: float):
        super().__init__(f"matrix is singular (pivot {pivot:.3g} in column {column})")
        self.column = column
        self.pivot = pivot


# --- symbolic engine ---------------------------------------------------------------

class SymbolicError(HybridLangError):
    pass


class UnboundSymbol(SymbolicError):
    def __init__(self, name: str):
        super().__init__(f"unbound symbol '{name}'")
        self.name = name


class NonlinearInAccel(SymbolicError):
    pass


class SingularMass(SymbolicError):
    pass


class TooManyCoords(SymbolicError):
    pass


class SingularSymbolicDet(SymbolicError):
    pass


class LagrangianSpecError(SymbolicError):
    def __init__(self, message: str, line: int = 0):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


# --- model library -------------------------------------------------------------------

class ModelLibraryError(HybridLangError):
    pass


class UnknownModel(ModelLibraryError):
    def __init__(self, name: str, known: List[str]):
        super().__init__(f"unknown model '{name}' (known: {', '.join(known)})")
        self.name = name


class NonPositiveParam(ModelLibraryError):
    def __init__(self, name: str, value: float):
        super().__init__(f"parameter '{name}' must be strictly positive, got {value}")
        self.name = name
        self.value = value


class GimbalLock(ModelLibraryError):
    def __init__(self, theta: float):
        super().__init__(f"gimbal lock: cos(theta) vanishes at theta={theta}")
        self.theta = theta
