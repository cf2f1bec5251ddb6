# app/services/lexer.py
import re
import logging
from dataclasses import dataclass
from typing import List, Optional, Union

from app.services.errors import LexError

logger = logging.getLogger(__name__)

KEYWORDS = {
    "class", "private", "end", "if", "else", "switch", "case",
    "create", "terminate", "true", "false", "True", "False",
}

# Longest operators first so ":=" wins over ":" and "<=" over "<".
PUNCTUATION = {
    ":=": "ColonEq", "==": "EqEq", "<=": "LtEq", ">=": "GtEq", "&&": "AndAnd", "||": "OrOr",
    "=": "Eq", "<": "Lt", ">": "Gt", "+": "Plus", "-": "Minus", "*": "Star", "/": "Slash",
    "^": "Caret", "!": "Bang", "(": "LParen", ")": "RParen", "[": "LBracket", "]": "RBracket",
    ",": "Comma", ";": "Semi", ".": "Dot",
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>//[^\n]*)
  | (?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)(?P<primes>'*)
  | (?P<string>"[^"\n]*")
  | (?P<punct>:=|==|<=|>=|&&|\|\||[=<>+\-*/^!()\[\],;.])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # Ident, Keyword, Num, String or a punctuation name such as Semi
    value: Union[str, float, None]
    line: int
    col: int
    order: int = 0  # primes folded into an Ident

    def describe(self) -> str:
        if self.kind == "Ident":
            return f"identifier '{self.value}{chr(39) * self.order}'"
        if self.kind == "Keyword":
            return f"'{self.value}'"
        if self.kind == "Num":
            return f"number {self.value:g}"
        if self.kind == "String":
            return f"string \"{self.value}\""
        if self.kind == "EOF":
            return "end of input"
        return f"'{self.value}'"


def tokenize(source: str) -> List[Token]:
    """
    Splits model source into tokens. Whitespace and // comments are dropped;
    trailing quotes on an identifier become its derivative order.
    """
    tokens: List[Token] = []
    pos = 0
    line = 1
    line_start = 0
    length = len(source)
    while pos < length:
        match = _TOKEN_RE.match(source, pos)
        col = pos - line_start + 1
        if match is None:
            raise LexError(source[pos], line, col)
        group = match.lastgroup
        text = match.group(0)
        if group == "ws" or group == "comment":
            pass
        elif group == "num":
            tokens.append(Token("Num", float(text), line, col))
        elif group in ("ident", "primes"):
            name = match.group("ident")
            order = len(match.group("primes"))
            if name in KEYWORDS:
                if order:
                    raise LexError("'", line, col + len(name))
                tokens.append(Token("Keyword", name, line, col))
            else:
                tokens.append(Token("Ident", name, line, col, order))
        elif group == "string":
            tokens.append(Token("String", text[1:-1], line, col))
        else:
            tokens.append(Token(PUNCTUATION[text], text, line, col))

        newlines = text.count("\n")
        if newlines:
            line += newlines
            line_start = pos + text.rfind("\n") + 1
        pos = match.end()
    return tokens


def end_token(tokens: List[Token], source: Optional[str] = None) -> Token:
    """Sentinel marking the end of the token stream, positioned after the last token."""
    if source is not None:
        lines = source.split("\n")
        return Token("EOF", None, len(lines), len(lines[-1]) + 1)
    if tokens:
        last = tokens[-1]
        return Token("EOF", None, last.line, last.col + 1)
    return Token("EOF", None, 1, 1)
