"""
Parser for the supported Verilog subset: one module with ANSI port
declarations, wire/reg declarations, continuous assignments, and
edge-triggered or combinational always blocks containing if/else,
case/casez, and blocking/nonblocking assignments.

Anything outside the subset fails with the construct named and located.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from .model import Clocking, Direction, LctError
from . import expr as ex


class HdlError(LctError):
    """Syntax error or unsupported construct, with source coordinates."""

    def __init__(self, message: str, line: Optional[int] = None,
                 col: Optional[int] = None):
        where = f" (line {line}, column {col})" if line is not None else ""
        super().__init__(message + where)
        self.line = line
        self.col = col


UNSUPPORTED = {
    "for", "while", "repeat", "forever", "function", "task", "generate",
    "genvar", "initial", "fork", "join", "specify", "primitive", "table",
    "real", "event", "deassign", "force", "release", "wait", "disable",
}

KEYWORDS = {
    "module", "endmodule", "input", "output", "inout", "wire", "reg",
    "always", "assign", "begin", "end", "if", "else", "case", "casez",
    "casex", "endcase", "default", "posedge", "negedge", "or", "integer",
    "signed", "parameter", "localparam",
} | UNSUPPORTED


@dataclass(frozen=True)
class Token:
    kind: str  # ident, lit, num, op
    text: str
    line: int
    col: int


_HDL_TOKEN_RE = re.compile(r"""
      (?P<ws>\s+|//[^\n]*|/\*.*?\*/)
    | (?P<lit>\d+'[bdhBDH][0-9a-fA-F_?zZxX]+)
    | (?P<num>\d+)
    | (?P<ident>[A-Za-z_][A-Za-z0-9_$]*)
    | (?P<op><=|>=|==|!=|&&|\|\||[@#.(){}\[\],;:?=<>&|^~!*+-])
    """, re.VERBOSE | re.DOTALL)


def tokenize(text: str) -> List[Token]:
    tokens = []
    pos = 0
    line = 1
    line_start = 0
    while pos < len(text):
        m = _HDL_TOKEN_RE.match(text, pos)
        if not m:
            col = pos - line_start + 1
            raise HdlError(f"unexpected character {text[pos]!r}", line, col)
        chunk = m.group(0)
        if m.lastgroup != "ws":
            tokens.append(Token(m.lastgroup, chunk, line,
                                pos - line_start + 1))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rfind("\n") + 1
        pos = m.end()
    return tokens


# ---------------------------------------------------------------------------
# AST

@dataclass(frozen=True)
class CasePattern:
    """A casez arm label containing wildcard bits, e.g. 3'b0??."""
    width: int
    bits: str  # one char per bit, msb first: 0, 1, or ?


@dataclass
class HdlPort:
    direction: Direction
    name: str
    width: int
    is_reg: bool
    line: int


@dataclass
class HAssign:
    lhs: str
    rhs: object
    nonblocking: bool
    line: int


@dataclass
class HIf:
    cond: object
    then: list
    els: Optional[list]
    line: int


@dataclass
class HCaseArm:
    patterns: Optional[list]  # None for the default arm
    body: list


@dataclass
class HCase:
    subject: object
    arms: List[HCaseArm]
    wildcard: bool  # casez
    line: int


@dataclass
class HdlProcess:
    kind: Clocking
    clocks: List[str]
    resets: List[str]  # negedge/extra-edge signals (async reset style)
    body: list
    line: int


@dataclass
class HdlModule:
    name: str
    ports: List[HdlPort]
    nets: dict = field(default_factory=dict)  # internal wire/reg -> width
    processes: List[HdlProcess] = field(default_factory=list)
    assigns: List[HAssign] = field(default_factory=list)

    def port(self, name: str) -> Optional[HdlPort]:
        for p in self.ports:
            if p.name == name:
                return p
        return None


# ---------------------------------------------------------------------------
# Parser

class _Parser:
    def __init__(self, tokens: List[Token]):
        self.tokens = tokens
        self.i = 0

    def peek(self, ahead: int = 0) -> Optional[Token]:
        j = self.i + ahead
        return self.tokens[j] if j < len(self.tokens) else None

    def at(self, text: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.text == text

    def take(self, text: Optional[str] = None) -> Token:
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else None
            raise HdlError("unexpected end of input",
                           last.line if last else None,
                           last.col if last else None)
        if text is not None and tok.text != text:
            raise HdlError(f"expected {text!r}, found {tok.text!r}",
                           tok.line, tok.col)
        self.i += 1
        return tok

    def take_ident(self) -> Token:
        tok = self.take()
        if tok.kind != "ident" or tok.text in KEYWORDS:
            raise HdlError(f"expected identifier, found {tok.text!r}",
                           tok.line, tok.col)
        return tok

    def check_supported(self, tok: Token):
        if tok.text in UNSUPPORTED:
            raise HdlError(f"unsupported construct {tok.text!r}",
                           tok.line, tok.col)

    # -- module structure ---------------------------------------------------

    def module(self) -> HdlModule:
        self.take("module")
        name = self.take_ident().text
        module = HdlModule(name=name, ports=[])
        self.take("(")
        if not self.at(")"):
            while True:
                self.port_decl(module)
                if self.at(","):
                    self.take(",")
                else:
                    break
        self.take(")")
        self.take(";")
        while not self.at("endmodule"):
            tok = self.peek()
            if tok is None:
                raise HdlError("missing endmodule")
            self.check_supported(tok)
            if tok.text in ("wire", "reg", "integer"):
                self.net_decl(module)
            elif tok.text == "assign":
                self.cont_assign(module)
            elif tok.text == "always":
                module.processes.append(self.always_block())
            else:
                raise HdlError(f"unsupported module item {tok.text!r}",
                               tok.line, tok.col)
        self.take("endmodule")
        return module

    def port_decl(self, module: HdlModule):
        tok = self.take()
        try:
            direction = Direction(tok.text)
        except ValueError:
            raise HdlError(f"expected port direction, found {tok.text!r}",
                           tok.line, tok.col)
        is_reg = False
        if self.peek() and self.peek().text in ("wire", "reg"):
            is_reg = self.take().text == "reg"
        width = self.opt_range()
        name = self.take_ident()
        module.ports.append(HdlPort(direction, name.text, width, is_reg,
                                    name.line))

    def opt_range(self) -> int:
        if not self.at("["):
            return 1
        self.take("[")
        msb = int(self.take().text)
        self.take(":")
        lsb = int(self.take().text)
        self.take("]")
        if lsb != 0 or msb < 0:
            raise HdlError(f"only [N:0] ranges are supported, got "
                           f"[{msb}:{lsb}]")
        return msb + 1

    def net_decl(self, module: HdlModule):
        self.take()  # wire / reg / integer
        width = self.opt_range()
        while True:
            name = self.take_ident().text
            if module.port(name) is None:
                module.nets[name] = width
            if self.at(","):
                self.take(",")
            else:
                break
        self.take(";")

    def cont_assign(self, module: HdlModule):
        tok = self.take("assign")
        lhs = self.take_ident().text
        self.take("=")
        rhs = self.expression()
        self.take(";")
        module.assigns.append(HAssign(lhs, rhs, False, tok.line))

    def always_block(self) -> HdlProcess:
        tok = self.take("always")
        self.take("@")
        clocks: List[str] = []
        resets: List[str] = []
        combinational = False
        if self.at("*"):
            self.take("*")
            combinational = True
        else:
            self.take("(")
            if self.at("*"):
                self.take("*")
                combinational = True
            else:
                while True:
                    item = self.peek()
                    if item.text == "posedge":
                        self.take()
                        clocks.append(self.take_ident().text)
                    elif item.text == "negedge":
                        self.take()
                        resets.append(self.take_ident().text)
                    else:
                        self.take_ident()
                        combinational = True
                    if self.peek() and self.peek().text in (",", "or"):
                        self.take()
                    else:
                        break
            self.take(")")
        if clocks and combinational:
            raise HdlError("mixed edge and level sensitivity", tok.line,
                           tok.col)
        kind = Clocking.CLOCKED if clocks else Clocking.COMBINATIONAL
        body = self.statement_block()
        return HdlProcess(kind, clocks, resets, body, tok.line)

    # -- statements ---------------------------------------------------------

    def statement_block(self) -> list:
        if self.at("begin"):
            self.take("begin")
            stmts = []
            while not self.at("end"):
                if self.peek() is None:
                    raise HdlError("missing end")
                stmts.extend(self.statement())
            self.take("end")
            return stmts
        return self.statement()

    def statement(self) -> list:
        tok = self.peek()
        if tok is None:
            raise HdlError("unexpected end of input in statement")
        self.check_supported(tok)
        if tok.text == ";":
            self.take(";")
            return []
        if tok.text == "if":
            return [self.if_statement()]
        if tok.text in ("case", "casez", "casex"):
            return [self.case_statement()]
        if tok.text == "begin":
            return self.statement_block()
        if tok.kind == "ident" and tok.text not in KEYWORDS:
            name = self.take_ident()
            op = self.take()
            if op.text not in ("=", "<="):
                raise HdlError(f"expected assignment, found {op.text!r}",
                               op.line, op.col)
            rhs = self.expression()
            self.take(";")
            return [HAssign(name.text, rhs, op.text == "<=", name.line)]
        raise HdlError(f"unsupported statement {tok.text!r}", tok.line,
                       tok.col)

    def if_statement(self) -> HIf:
        tok = self.take("if")
        self.take("(")
        cond = self.expression()
        self.take(")")
        then = self.statement_block()
        els = None
        if self.at("else"):
            self.take("else")
            els = self.statement_block()
        return HIf(cond, then, els, tok.line)

    def case_statement(self) -> HCase:
        tok = self.take()
        if tok.text == "casex":
            raise HdlError("unsupported construct 'casex'", tok.line, tok.col)
        wildcard = tok.text == "casez"
        self.take("(")
        subject = self.expression()
        self.take(")")
        arms: List[HCaseArm] = []
        while not self.at("endcase"):
            if self.peek() is None:
                raise HdlError("missing endcase")
            if self.at("default"):
                self.take("default")
                self.take(":")
                arms.append(HCaseArm(None, self.statement()))
                continue
            patterns = [self.case_label(wildcard)]
            while self.at(","):
                self.take(",")
                patterns.append(self.case_label(wildcard))
            self.take(":")
            arms.append(HCaseArm(patterns, self.statement()))
        self.take("endcase")
        return HCase(subject, arms, wildcard, tok.line)

    def case_label(self, wildcard: bool):
        tok = self.peek()
        if tok.kind == "lit" and re.search(r"[?zZxX]", tok.text):
            self.take()
            m = re.match(r"(\d+)'[bB]([01?zZxX_]+)\Z", tok.text)
            if not m or not wildcard:
                raise HdlError(f"bad case label {tok.text!r}", tok.line,
                               tok.col)
            width = int(m.group(1))
            bits = m.group(2).replace("_", "").lower().replace("z", "?")
            if "x" in bits:
                raise HdlError(f"x bits are not supported in {tok.text!r}",
                               tok.line, tok.col)
            if len(bits) != width:
                raise HdlError(f"case label width mismatch in {tok.text!r}",
                               tok.line, tok.col)
            return CasePattern(width, bits)
        return self.expression()

    # -- expressions --------------------------------------------------------

    _LEVELS = (("||",), ("&&",), ("|",), ("^",), ("&",),
               ("==", "!="), ("<", "<=", ">", ">="))

    def expression(self):
        cond = self.binary(0)
        if self.at("?"):
            self.take("?")
            then = self.expression()
            self.take(":")
            other = self.expression()
            return ex.Ternary(cond, then, other)
        return cond

    def binary(self, level: int):
        if level >= len(self._LEVELS):
            return self.unary()
        node = self.binary(level + 1)
        while self.peek() and self.peek().text in self._LEVELS[level]:
            op = self.take().text
            node = ex.Binary(op, node, self.binary(level + 1))
        return node

    def unary(self):
        if self.peek() and self.peek().text in ("~", "!"):
            op = self.take().text
            return ex.Unary(op, self.unary())
        return self.primary()

    def primary(self):
        tok = self.peek()
        if tok is None:
            raise HdlError("unexpected end of expression")
        if tok.text == "(":
            self.take("(")
            node = self.expression()
            self.take(")")
            return node
        if tok.text == "{":
            self.take("{")
            parts = [self.expression()]
            while self.at(","):
                self.take(",")
                parts.append(self.expression())
            self.take("}")
            return ex.Concat(tuple(parts))
        if tok.kind == "lit":
            self.take()
            m = re.match(r"(\d+)'([bdhBDH])([0-9a-fA-F_]+)\Z", tok.text)
            if not m:
                raise HdlError(f"bad literal {tok.text!r}", tok.line, tok.col)
            base = {"b": 2, "d": 10, "h": 16}[m.group(2).lower()]
            return ex.Num(int(m.group(3).replace("_", ""), base),
                          int(m.group(1)))
        if tok.kind == "num":
            self.take()
            return ex.Num(int(tok.text), None)
        if tok.kind == "ident" and tok.text not in KEYWORDS:
            self.take()
            return ex.Ident(tok.text)
        self.check_supported(tok)
        raise HdlError(f"unexpected token {tok.text!r}", tok.line, tok.col)


def parse_hdl(text: str) -> HdlModule:
    """Parse one module within the supported subset."""
    tokens = tokenize(text)
    if not tokens:
        raise HdlError("empty input")
    parser = _Parser(tokens)
    if not parser.at("module"):
        tok = parser.peek()
        raise HdlError(f"expected 'module', found {tok.text!r}", tok.line,
                       tok.col)
    module = parser.module()
    return module
