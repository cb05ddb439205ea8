"""
Expression trees for condition headers and the HDL subset.

Grammar (loosest to tightest binding):

    ternary   := logic_or ('?' ternary ':' ternary)?
    logic_or  := logic_and ('||' logic_and)*
    logic_and := bit_or ('&&' bit_or)*
    bit_or    := bit_xor ('|' bit_xor)*
    bit_xor   := bit_and ('^' bit_and)*
    bit_and   := equality ('&' equality)*
    equality  := relation (('==' | '!=') relation)*
    relation  := unary (('<' | '<=' | '>' | '>=') unary)*
    unary     := ('~' | '!')* primary
    primary   := identifier | literal | '(' ternary ')' | '{' list '}'

Rendering is fully parenthesized; two expressions are considered the same
condition iff their renderings are byte-identical.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Optional

from .model import BitVector, LctError, parse_literal


class ExprError(LctError):
    """Malformed expression or evaluation failure."""


@dataclass(frozen=True)
class Ident:
    name: str


@dataclass(frozen=True)
class Num:
    value: int
    width: Optional[int]  # None for bare decimals


@dataclass(frozen=True)
class Unary:
    op: str
    arg: object


@dataclass(frozen=True)
class Binary:
    op: str
    lhs: object
    rhs: object


@dataclass(frozen=True)
class Ternary:
    cond: object
    then: object
    other: object


@dataclass(frozen=True)
class Concat:
    parts: tuple


_TOKEN_RE = re.compile(r"""
    \s*(?:
      (?P<lit>\d+'[bdh][0-9a-fA-F_]+)
    | (?P<num>\d+)
    | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<op><=|>=|==|!=|&&|\|\||[-&|^~!<>(){}?:,])
    )""", re.VERBOSE)


def tokenize(text: str) -> list:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            rest = text[pos:].strip()
            if not rest:
                break
            raise ExprError(f"bad token at {rest[:12]!r}")
        pos = m.end()
        for kind in ("lit", "num", "ident", "op"):
            if m.group(kind) is not None:
                tokens.append((kind, m.group(kind)))
                break
    return tokens


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None)

    def take(self, value=None):
        kind, text = self.peek()
        if kind is None:
            raise ExprError("unexpected end of expression")
        if value is not None and text != value:
            raise ExprError(f"expected {value!r}, found {text!r}")
        self.i += 1
        return kind, text

    def ternary(self):
        cond = self.binary(0)
        if self.peek()[1] == "?":
            self.take("?")
            then = self.ternary()
            self.take(":")
            other = self.ternary()
            return Ternary(cond, then, other)
        return cond

    _LEVELS = (("||",), ("&&",), ("|",), ("^",), ("&",),
               ("==", "!="), ("<", "<=", ">", ">="))

    def binary(self, level):
        if level >= len(self._LEVELS):
            return self.unary()
        node = self.binary(level + 1)
        while self.peek()[1] in self._LEVELS[level]:
            op = self.take()[1]
            node = Binary(op, node, self.binary(level + 1))
        return node

    def unary(self):
        if self.peek()[1] in ("~", "!"):
            op = self.take()[1]
            return Unary(op, self.unary())
        return self.primary()

    def primary(self):
        kind, text = self.peek()
        if text == "(":
            self.take("(")
            node = self.ternary()
            self.take(")")
            return node
        if text == "{":
            self.take("{")
            parts = [self.ternary()]
            while self.peek()[1] == ",":
                self.take(",")
                parts.append(self.ternary())
            self.take("}")
            return Concat(tuple(parts))
        if kind == "ident":
            self.take()
            return Ident(text)
        if kind == "lit":
            self.take()
            bv = parse_literal(text)
            return Num(bv.value, bv.width)
        if kind == "num":
            self.take()
            return Num(int(text), None)
        raise ExprError(f"unexpected token {text!r}")


def parse_expr(text: str):
    try:
        parser = _Parser(tokenize(text))
        node = parser.ternary()
    except LctError as e:
        raise ExprError(f"in expression {text!r}: {e}")
    if parser.i != len(parser.tokens):
        raise ExprError(f"trailing tokens in expression {text!r}")
    return node


def render(node) -> str:
    """Canonical fully-parenthesized rendering."""
    if isinstance(node, Ident):
        return node.name
    if isinstance(node, Num):
        if node.width is None:
            return str(node.value)
        return f"{node.width}'d{node.value}"
    if isinstance(node, Unary):
        return f"({node.op}{render(node.arg)})"
    if isinstance(node, Binary):
        return f"({render(node.lhs)} {node.op} {render(node.rhs)})"
    if isinstance(node, Ternary):
        return (f"({render(node.cond)} ? {render(node.then)}"
                f" : {render(node.other)})")
    if isinstance(node, Concat):
        return "{" + ", ".join(render(p) for p in node.parts) + "}"
    raise ExprError(f"cannot render {node!r}")


def identifiers(node) -> frozenset:
    if isinstance(node, Ident):
        return frozenset((node.name,))
    if isinstance(node, Num):
        return frozenset()
    if isinstance(node, Unary):
        return identifiers(node.arg)
    if isinstance(node, Binary):
        return identifiers(node.lhs) | identifiers(node.rhs)
    if isinstance(node, Ternary):
        return (identifiers(node.cond) | identifiers(node.then)
                | identifiers(node.other))
    if isinstance(node, Concat):
        out = frozenset()
        for p in node.parts:
            out |= identifiers(p)
        return out
    raise ExprError(f"cannot walk {node!r}")


_COMPARISONS = ("==", "!=", "<", "<=", ">", ">=")


def _widths_agree(a: Optional[int], b: Optional[int], op: str) -> int:
    if a is None and b is None:
        return 32
    if a is None:
        return b
    if b is None:
        return a
    if a != b:
        raise ExprError(f"width mismatch {a} vs {b} for operator {op!r}")
    return a


def evaluate(node, inputs: Mapping[str, BitVector]) -> BitVector:
    """Unsigned evaluation over concrete inputs.  Comparisons and logical
    operators yield 1-bit results; bitwise operators require equal widths
    (bare decimals adopt the other operand's width)."""
    width, value = _eval(node, inputs)
    if width is None:
        width = max(1, value.bit_length())
    return BitVector(width, value)


def _eval(node, inputs):
    if isinstance(node, Ident):
        bv = inputs.get(node.name)
        if bv is None:
            raise ExprError(f"unbound identifier {node.name!r}")
        return bv.width, bv.value
    if isinstance(node, Num):
        return node.width, node.value
    if isinstance(node, Unary):
        w, v = _eval(node.arg, inputs)
        if node.op == "~":
            if w is None:
                w = max(1, v.bit_length())
            return w, (~v) & ((1 << w) - 1)
        return 1, 0 if v else 1  # '!'
    if isinstance(node, Ternary):
        _, c = _eval(node.cond, inputs)
        return _eval(node.then if c else node.other, inputs)
    if isinstance(node, Concat):
        width = 0
        value = 0
        for part in node.parts:
            w, v = _eval(part, inputs)
            if w is None:
                raise ExprError("unsized literal inside concatenation")
            width += w
            value = (value << w) | v
        return width, value
    if isinstance(node, Binary):
        lw, lv = _eval(node.lhs, inputs)
        rw, rv = _eval(node.rhs, inputs)
        op = node.op
        if op in _COMPARISONS:
            result = {
                "==": lv == rv, "!=": lv != rv,
                "<": lv < rv, "<=": lv <= rv,
                ">": lv > rv, ">=": lv >= rv,
            }[op]
            return 1, int(result)
        if op == "&&":
            return 1, int(bool(lv) and bool(rv))
        if op == "||":
            return 1, int(bool(lv) or bool(rv))
        w = _widths_agree(lw, rw, op)
        if op == "&":
            return w, lv & rv
        if op == "|":
            return w, lv | rv
        if op == "^":
            return w, lv ^ rv
        raise ExprError(f"unsupported operator {op!r}")
    raise ExprError(f"cannot evaluate {node!r}")


def truth(node, inputs: Mapping[str, BitVector]) -> int:
    """Evaluate an expression as a condition: nonzero becomes 1."""
    return int(evaluate(node, inputs).value != 0)
