# app/services/parser.py
import logging
from typing import Callable, List, Optional, Sequence

from pydantic import ValidationError

from app.schemas.ast import (
    BUILTIN_ARITY, Binary, BoolLit, Call, Case, ClassDef, Continuous, Create, Discrete,
    Expression, If, MatrixLit, Model, NumberLit, Statement, StringLit, Switch, Terminate,
    Unary, VarRef, VectorLit,
)
from app.services.errors import LoadError, ParseError
from app.services.lexer import Token, end_token, tokenize

logger = logging.getLogger(__name__)

COMPARISON_OPS = {"Lt": "<", "Gt": ">", "LtEq": "<=", "GtEq": ">=", "EqEq": "=="}
ADDITIVE_OPS = {"Plus": "+", "Minus": "-"}
MULTIPLICATIVE_OPS = {"Star": "*", "Slash": "/"}


class Parser:
    """Recursive-descent parser over the token list of one source text."""

    def __init__(self, source: str):
        self.tokens = tokenize(source)
        self.eof = end_token(self.tokens, source)
        self.pos = 0

    # --- token helpers ---------------------------------------------------------

    def peek(self, offset: int = 0) -> Token:
        index = self.pos + offset
        return self.tokens[index] if index < len(self.tokens) else self.eof

    def advance(self) -> Token:
        token = self.peek()
        if token.kind != "EOF":
            self.pos += 1
        return token

    def at(self, kind: str, value: Optional[str] = None) -> bool:
        token = self.peek()
        return token.kind == kind and (value is None or token.value == value)

    def at_keyword(self, *words: str) -> bool:
        token = self.peek()
        return token.kind == "Keyword" and token.value in words

    def accept(self, kind: str, value: Optional[str] = None) -> Optional[Token]:
        if self.at(kind, value):
            return self.advance()
        return None

    def expect(self, kind: str, value: Optional[str] = None, what: Optional[str] = None) -> Token:
        if self.at(kind, value):
            return self.advance()
        self.fail(what or (f"'{value}'" if value else kind))

    def fail(self, expected: str, token: Optional[Token] = None):
        token = token or self.peek()
        raise ParseError(expected, token.describe(), token.line, token.col)

    # --- model structure ---------------------------------------------------------

    def parse_model(self) -> Model:
        classes = []
        while not self.at("EOF"):
            classes.append(self.parse_class())
        return Model(classes=classes)

    def parse_class(self) -> ClassDef:
        start = self.expect("Keyword", "class")
        name = self.expect("Ident", what="class name")
        if name.order:
            self.fail("class name without quotes", name)
        self.expect("LParen")
        params: List[str] = []
        if not self.at("RParen"):
            params.append(self.parse_plain_name("parameter name"))
            while self.accept("Comma"):
                params.append(self.parse_plain_name("parameter name"))
        self.expect("RParen", what="')'")
        self.expect("Keyword", "private")
        inits = self.parse_sequence(self.parse_private_init, ("end",))
        self.expect("Keyword", "end")
        body = self.parse_sequence(self.parse_statement, ("end",))
        self.expect("Keyword", "end")
        logger.debug(f"Parsed class {name.value} with {len(params)} params, {len(inits)} inits, {len(body)} statements")
        return ClassDef(name=name.value, params=params, private_inits=inits, body=body,
                        line=start.line, col=start.col)

    def parse_plain_name(self, what: str) -> str:
        token = self.expect("Ident", what=what)
        if token.order:
            self.fail(f"{what} without quotes", token)
        return token.value

    def parse_sequence(self, item: Callable[[], object], terminators: Sequence[str]) -> list:
        """
        Items separated by ';'. A trailing ';' before a terminator is optional, and
        a block statement closed by 'end' may be followed directly by the next item.
        """
        items = []
        while True:
            while self.accept("Semi"):
                pass
            if self.at("EOF") or self.at_keyword(*terminators):
                return items
            node = item()
            items.append(node)
            if self.accept("Semi") or isinstance(node, (If, Switch)):
                continue
            if self.at("EOF") or self.at_keyword(*terminators):
                return items
            self.fail("';'")

    def parse_private_init(self):
        lhs = self.parse_var_ref()
        op = self.peek()
        if op.kind != "ColonEq":
            self.fail("':=' in private section")
        self.advance()
        if self.at_keyword("create"):
            if lhs.order or len(lhs.path) != 1:
                self.fail("plain variable name as create target", op)
            return self.parse_create(lhs)
        rhs = self.parse_expression()
        return Discrete(lhs=lhs, rhs=rhs, line=lhs.line, col=lhs.col)

    def parse_create(self, target: VarRef) -> Create:
        self.expect("Keyword", "create")
        class_name = self.parse_plain_name("class name")
        self.expect("LParen")
        args = self.parse_arguments("RParen")
        return Create(target=target.name, class_name=class_name, args=args, line=target.line, col=target.col)

    def parse_arguments(self, closing: str) -> List[Expression]:
        args: List[Expression] = []
        if not self.at(closing):
            args.append(self.parse_expression())
            while self.accept("Comma"):
                args.append(self.parse_expression())
        self.expect(closing, what=f"',' or '{']' if closing == 'RBracket' else ')'}'")
        return args

    # --- statements ----------------------------------------------------------------

    def parse_statement(self) -> Statement:
        token = self.peek()
        if self.at_keyword("if"):
            return self.parse_if()
        if self.at_keyword("switch"):
            return self.parse_switch()
        if self.at_keyword("terminate"):
            self.advance()
            return Terminate(target=self.parse_var_ref(), line=token.line, col=token.col)
        if self.at_keyword("create"):
            self.fail("statement ('create' is only allowed in the private section)")
        if token.kind != "Ident":
            self.fail("statement")
        lhs = self.parse_var_ref()
        if self.accept("Eq"):
            return Continuous(lhs=lhs, rhs=self.parse_expression(), line=token.line, col=token.col)
        if self.accept("ColonEq"):
            if self.at_keyword("create"):
                self.fail("expression ('create' is only allowed in the private section)")
            return Discrete(lhs=lhs, rhs=self.parse_expression(), line=token.line, col=token.col)
        self.fail("'=' or ':='")

    def parse_if(self) -> If:
        start = self.expect("Keyword", "if")
        cond = self.parse_expression()
        then_branch = self.parse_sequence(self.parse_statement, ("else", "end"))
        else_branch = None
        if self.accept("Keyword", "else"):
            else_branch = self.parse_sequence(self.parse_statement, ("end",))
        self.expect("Keyword", "end")
        return If(cond=cond, then_branch=then_branch, else_branch=else_branch, line=start.line, col=start.col)

    def parse_switch(self) -> Switch:
        start = self.expect("Keyword", "switch")
        subject = self.parse_expression()
        cases = []
        while self.at_keyword("case"):
            case_token = self.advance()
            literal = self.parse_case_literal()
            body = self.parse_sequence(self.parse_statement, ("case", "end"))
            cases.append(Case(literal=literal, body=body, line=case_token.line, col=case_token.col))
        self.expect("Keyword", "end", what="'case' or 'end'")
        return Switch(subject=subject, cases=cases, line=start.line, col=start.col)

    def parse_case_literal(self) -> Expression:
        token = self.peek()
        if token.kind == "Minus" and self.peek(1).kind == "Num":
            self.advance()
            number = self.advance()
            return Unary(op="neg", operand=NumberLit(value=number.value, line=number.line, col=number.col),
                         line=token.line, col=token.col)
        if token.kind in ("Num", "String") or self.at_keyword("true", "false", "True", "False"):
            return self.parse_primary()
        self.fail("literal after 'case'")

    def parse_var_ref(self) -> VarRef:
        first = self.expect("Ident", what="variable")
        path = [first.value]
        order = first.order
        while self.at("Dot"):
            if order:
                self.fail("end of variable reference", self.peek())
            self.advance()
            part = self.expect("Ident", what="field name")
            path.append(part.value)
            order = part.order
        return VarRef(path=path, order=order, line=first.line, col=first.col)

    # --- expressions -------------------------------------------------------------------

    def parse_expression(self) -> Expression:
        return self.parse_or()

    def _left_assoc(self, operand: Callable[[], Expression], ops: dict) -> Expression:
        left = operand()
        while self.peek().kind in ops:
            op_token = self.advance()
            right = operand()
            left = Binary(op=ops[op_token.kind], left=left, right=right, line=op_token.line, col=op_token.col)
        return left

    def parse_or(self) -> Expression:
        return self._left_assoc(self.parse_and, {"OrOr": "||"})

    def parse_and(self) -> Expression:
        return self._left_assoc(self.parse_comparison, {"AndAnd": "&&"})

    def parse_comparison(self) -> Expression:
        return self._left_assoc(self.parse_additive, COMPARISON_OPS)

    def parse_additive(self) -> Expression:
        return self._left_assoc(self.parse_multiplicative, ADDITIVE_OPS)

    def parse_multiplicative(self) -> Expression:
        return self._left_assoc(self.parse_unary, MULTIPLICATIVE_OPS)

    def parse_unary(self) -> Expression:
        token = self.peek()
        if token.kind == "Minus":
            self.advance()
            return Unary(op="neg", operand=self.parse_unary(), line=token.line, col=token.col)
        if token.kind == "Bang":
            self.advance()
            return Unary(op="not", operand=self.parse_unary(), line=token.line, col=token.col)
        return self.parse_power()

    def parse_power(self) -> Expression:
        base = self.parse_primary()
        if self.at("Caret"):
            op_token = self.advance()
            # Right operand at unary level: right-associative, and 10^-6 is accepted.
            exponent = self.parse_unary()
            return Binary(op="^", left=base, right=exponent, line=op_token.line, col=op_token.col)
        return base

    def parse_primary(self) -> Expression:
        token = self.peek()
        if token.kind == "Num":
            self.advance()
            return NumberLit(value=token.value, line=token.line, col=token.col)
        if token.kind == "String":
            self.advance()
            return StringLit(value=token.value, line=token.line, col=token.col)
        if self.at_keyword("true", "True", "false", "False"):
            self.advance()
            return BoolLit(value=token.value in ("true", "True"), line=token.line, col=token.col)
        if token.kind == "LParen":
            self.advance()
            inner = self.parse_expression()
            self.expect("RParen", what="')'")
            return inner
        if token.kind == "LBracket":
            return self.parse_bracket()
        if token.kind == "Ident":
            if self.peek(1).kind == "LParen" and token.order == 0:
                return self.parse_call()
            return self.parse_var_ref()
        self.fail("expression")

    def parse_call(self) -> Call:
        name = self.advance()
        expected = BUILTIN_ARITY.get(name.value)
        if expected is None:
            self.fail(f"builtin function (one of {', '.join(sorted(BUILTIN_ARITY))})", name)
        self.expect("LParen")
        args = self.parse_arguments("RParen")
        if len(args) != expected:
            self.fail(f"{expected} argument(s) to {name.value}", name)
        return Call(name=name.value, args=args, line=name.line, col=name.col)

    def parse_bracket(self) -> Expression:
        start = self.expect("LBracket")
        if self.at("RBracket"):
            self.fail("vector element")
        items = self.parse_arguments("RBracket")
        if all(isinstance(item, VectorLit) for item in items):
            width = len(items[0].items)
            if any(len(item.items) != width for item in items):
                self.fail("rows of equal length in matrix literal", start)
            return MatrixLit(rows=[item.items for item in items], line=start.line, col=start.col)
        return VectorLit(items=items, line=start.line, col=start.col)


def _guarded(action: Callable[[Parser], object], source: str):
    parser = Parser(source)
    try:
        return action(parser)
    except RecursionError:
        token = parser.peek()
        raise ParseError("shallower nesting", token.describe(), token.line, token.col)
    except ValidationError as e:
        token = parser.peek()
        raise ParseError("well-formed construct", str(e.errors()[0].get("msg")), token.line, token.col)


def parse_model(source: str) -> Model:
    """
    Parses a model source text and runs the load checks. Raises LexError,
    ParseError or LoadError; never anything else for bad input.
    """
    from app.services.model_checks import check_model

    model = _guarded(lambda p: p.parse_model(), source)
    try:
        check_model(model)
    except RecursionError:
        raise LoadError(["statements nested too deeply to check"])
    logger.info(f"Parsed model with {len(model.classes)} class(es): {', '.join(model.class_names)}")
    return model


def parse_expression(source: str) -> Expression:
    """Parses a single expression covering the whole text."""
    def action(parser: Parser):
        expr = parser.parse_expression()
        if not parser.at("EOF"):
            parser.fail("end of expression")
        return expr
    return _guarded(action, source)


def parse_expression_list(source: str) -> List[Expression]:
    """Comma-separated expressions, as used for command-line constructor arguments."""
    def action(parser: Parser):
        items = []
        if parser.at("EOF"):
            return items
        items.append(parser.parse_expression())
        while parser.accept("Comma"):
            items.append(parser.parse_expression())
        if not parser.at("EOF"):
            parser.fail("',' or end of argument list")
        return items
    return _guarded(action, source)
