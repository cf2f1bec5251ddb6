# app/schemas/ast.py
from typing import Annotated, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

BUILTIN_ARITY: Dict[str, int] = {
    "sin": 1, "cos": 1, "tan": 1, "asin": 1, "acos": 1, "sqrt": 1,
    "dot": 2, "cross": 2, "norm": 1,
}

BINARY_OPS = ("+", "-", "*", "/", "^", "&&", "||", "<", ">", "<=", ">=", "==")


class Node(BaseModel):
    model_config = ConfigDict(frozen=True)

    # Source position; excluded from dumps so structural comparison ignores layout.
    line: int = Field(default=0, exclude=True)
    col: int = Field(default=0, exclude=True)


# --- expressions -------------------------------------------------------------

class NumberLit(Node):
    kind: Literal["number"] = "number"
    value: float


class BoolLit(Node):
    kind: Literal["bool"] = "bool"
    value: bool


class StringLit(Node):
    kind: Literal["string"] = "string"
    value: str


class VectorLit(Node):
    kind: Literal["vector"] = "vector"
    items: List["Expression"]

    @field_validator("items")
    @classmethod
    def _non_empty(cls, items):
        if not items:
            raise ValueError("vector literal must not be empty")
        return items


class MatrixLit(Node):
    kind: Literal["matrix"] = "matrix"
    rows: List[List["Expression"]]

    @field_validator("rows")
    @classmethod
    def _rectangular(cls, rows):
        if not rows or not rows[0]:
            raise ValueError("matrix literal must not be empty")
        if any(len(row) != len(rows[0]) for row in rows):
            raise ValueError("matrix rows must have equal length")
        return rows


class VarRef(Node):
    kind: Literal["var"] = "var"
    path: List[str]
    order: int = 0  # number of primes

    @model_validator(mode="after")
    def _valid(self):
        if not self.path:
            raise ValueError("variable path must not be empty")
        if self.order < 0:
            raise ValueError("derivative order must be >= 0")
        return self

    @property
    def name(self) -> str:
        return self.path[-1]

    def spelled(self) -> str:
        return ".".join(self.path) + "'" * self.order


class Unary(Node):
    kind: Literal["unary"] = "unary"
    op: Literal["neg", "not"]
    operand: "Expression"


class Binary(Node):
    kind: Literal["binary"] = "binary"
    op: Literal["+", "-", "*", "/", "^", "&&", "||", "<", ">", "<=", ">=", "=="]
    left: "Expression"
    right: "Expression"


class Call(Node):
    kind: Literal["call"] = "call"
    name: str
    args: List["Expression"]

    @model_validator(mode="after")
    def _arity(self):
        expected = BUILTIN_ARITY.get(self.name)
        if expected is None:
            raise ValueError(f"unknown builtin '{self.name}'")
        if len(self.args) != expected:
            raise ValueError(f"{self.name} takes {expected} argument(s), got {len(self.args)}")
        return self


Expression = Annotated[
    Union[NumberLit, BoolLit, StringLit, VectorLit, MatrixLit, VarRef, Unary, Binary, Call],
    Field(discriminator="kind"),
]


# --- statements ------------------------------------------------------------------

class Continuous(Node):
    kind: Literal["continuous"] = "continuous"
    lhs: VarRef
    rhs: Expression


class Discrete(Node):
    kind: Literal["discrete"] = "discrete"
    lhs: VarRef
    rhs: Expression


class Create(Node):
    kind: Literal["create"] = "create"
    target: str
    class_name: str
    args: List[Expression] = Field(default_factory=list)


class Terminate(Node):
    kind: Literal["terminate"] = "terminate"
    target: VarRef


class If(Node):
    kind: Literal["if"] = "if"
    cond: Expression
    then_branch: List["Statement"] = Field(default_factory=list)
    else_branch: Optional[List["Statement"]] = None


class Case(Node):
    literal: Expression
    body: List["Statement"] = Field(default_factory=list)


class Switch(Node):
    kind: Literal["switch"] = "switch"
    subject: Expression
    cases: List[Case] = Field(default_factory=list)


Statement = Annotated[
    Union[Continuous, Discrete, Terminate, If, Switch],
    Field(discriminator="kind"),
]

PrivateInit = Annotated[Union[Discrete, Create], Field(discriminator="kind")]


class ClassDef(Node):
    name: str
    params: List[str] = Field(default_factory=list)
    private_inits: List[PrivateInit] = Field(default_factory=list)
    body: List[Statement] = Field(default_factory=list)


class Model(Node):
    classes: List[ClassDef] = Field(default_factory=list)

    def get(self, name: str) -> Optional[ClassDef]:
        for cls in self.classes:
            if cls.name == name:
                return cls
        return None

    @property
    def class_names(self) -> List[str]:
        return [cls.name for cls in self.classes]


for _model in (VectorLit, MatrixLit, Unary, Binary, Call, Continuous, Discrete, Create,
               If, Case, Switch, ClassDef, Model):
    _model.model_rebuild()
