"""Concrete syntax for ICaml.

Grammar::

    expr  ::= "let" IDENT "=" expr "in" expr | seq
    seq   ::= asn (";" asn)*
    asn   ::= add [":=" asn]
    add   ::= unary ("+" unary)*
    unary ::= "!" unary | "ref" unary | "incr" unary | atom
    atom  ::= INT | "true" | "false" | "()" | IDENT | "(" expr ")"

``let`` is also accepted wherever an operand is expected and then extends
as far right as possible, as in OCaml.  ``;`` chains nest to the right.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from . import corecalc as cc
from .base import BOOL, INT, UNIT, Span
from .diagnostics import ParseError
from .icaml import App1, App2, Const, IExpr, Let, Seq, Var

KEYWORDS = {"let", "in", "ref", "incr", "true", "false"}

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<comment>\(\*.*?\*\))"
    r"|(?P<int>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<sym>:=|\(\)|[()!+;=])",
    re.S,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "int", "ident", "kw", "sym", "eof"
    text: str
    span: Span


def tokenize(src: str) -> list[Token]:
    out = []
    pos, line, line_start = 0, 1, 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            raise ParseError(f"unexpected character {src[pos]!r}", Span(line, pos - line_start + 1))
        kind, text = m.lastgroup, m.group()
        span = Span(line, pos - line_start + 1)
        if kind == "nl":
            line, line_start = line + 1, m.end()
        elif kind == "comment":
            line += text.count("\n")
            if "\n" in text:
                line_start = pos + text.rindex("\n") + 1
        elif kind != "ws":
            if kind == "ident" and text in KEYWORDS:
                kind = "kw"
            out.append(Token(kind, text, span))
        pos = m.end()
    out.append(Token("eof", "", Span(line, pos - line_start + 1)))
    return out


class _Parser:
    def __init__(self, src: str):
        self.toks = tokenize(src)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def at(self, text: str) -> bool:
        return self.tok.kind in ("sym", "kw") and self.tok.text == text

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected {text!r}")
        return self.advance()

    def fail(self, what: str):
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise ParseError(f"{what}, found {found}", t.span)

    def program(self) -> IExpr:
        e = self.expr()
        if self.tok.kind != "eof":
            self.fail("expected end of input")
        return e

    def expr(self) -> IExpr:
        if self.at("let"):
            return self.let()
        return self.seq()

    def let(self) -> IExpr:
        start = self.expect("let").span
        if self.tok.kind != "ident":
            self.fail("expected identifier")
        name = self.advance().text
        self.expect("=")
        rhs = self.expr()
        self.expect("in")
        body = self.expr()
        return Let(name, rhs, body, span=start)

    def seq(self) -> IExpr:
        items = [self.asn()]
        spans = []
        while self.at(";"):
            spans.append(self.advance().span)
            items.append(self.expr() if self.at("let") else self.asn())
        e = items[-1]
        for item, span in zip(reversed(items[:-1]), reversed(spans)):
            e = Seq(item, e, span=item.span)
        return e

    def asn(self) -> IExpr:
        left = self.add()
        if self.at(":="):
            op = self.advance()
            right = self.expr() if self.at("let") else self.asn()
            return App2(":=", left, right, span=left.span or op.span)
        return left

    def add(self) -> IExpr:
        e = self.unary()
        while self.at("+"):
            self.advance()
            e = App2("+", e, self.unary(), span=e.span)
        return e

    def unary(self) -> IExpr:
        t = self.tok
        if self.at("!") or self.at("ref") or self.at("incr"):
            self.advance()
            return App1(t.text, self.unary(), span=t.span)
        if self.at("let"):
            return self.let()
        return self.atom()

    def atom(self) -> IExpr:
        t = self.tok
        if t.kind == "int":
            self.advance()
            return Const(str(int(t.text)), span=t.span)
        if self.at("true") or self.at("false") or self.at("()"):
            self.advance()
            return Const(t.text, span=t.span)
        if t.kind == "ident":
            self.advance()
            return Var(t.text, span=t.span)
        if self.at("("):
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        self.fail("expected an expression")


def parse(src: str) -> IExpr:
    """Parse surface syntax into an unannotated ICaml tree."""
    return _Parser(src).program()


# ---------------------------------------------------------------------------
# Printing

# Context levels: 0 = anywhere, 1 = sequence element, 2 = operand of +/:=
# left side, 3 = operand of a prefix constant or right side of +.
_EXPR, _ASN, _ADD, _UNARY = range(4)


def show(e: IExpr) -> str:
    """Render ``e`` so that ``parse(show(e)) == strip_types(e)``."""
    return _show(e, _EXPR)


def _paren(text: str, needed: bool) -> str:
    return f"({text})" if needed else text


def _show(e: IExpr, ctx: int) -> str:
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Const):
        return e.name
    if isinstance(e, App1):
        sep = "" if e.op == "!" else " "
        return f"{e.op}{sep}{_show(e.arg, _UNARY)}"
    if isinstance(e, App2):
        if e.op == "+":
            return _paren(f"{_show(e.left, _ADD)} + {_show(e.right, _UNARY)}", ctx > _ADD)
        return _paren(f"{_show(e.left, _ADD)} {e.op} {_show(e.right, _ASN)}", ctx > _ASN)
    if isinstance(e, Seq):
        return _paren(f"{_show(e.first, _ASN)}; {_show(e.second, _EXPR)}", ctx > _EXPR)
    if isinstance(e, Let):
        text = f"let {e.name} = {_show(e.rhs, _EXPR)} in {_show(e.body, _EXPR)}"
        return _paren(text, ctx > _EXPR)
    raise TypeError(f"not an ICaml expression: {e!r}")


# ---------------------------------------------------------------------------
# CoreC / CoreCE notation, the inverse of corecalc.show
#
#   expr  ::= type IDENT ["[1]"] ["=" init] ";" expr | asn [";" expr]
#   type  ::= ["const"] "ptr"* ("int" | "bool" | "unit")
#   init  ::= "{" asn "}" | asn
#   asn   ::= IDENT ":=" asn | add [("←" | "<-") asn]
#   add   ::= unary ("+" unary)*
#   unary ::= "*" unary | "&" IDENT | "incr" unary | atom

_CTOKEN = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<nl>\n)"
    r"|(?P<int>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<sym>:=|<-|←|\(\)|\[1\]|[()+;=*&{}])",
)
_C_KEYWORDS = {"const", "ptr", "int", "bool", "unit", "incr", "true", "false"}
_C_BASES = {"int": INT, "bool": BOOL, "unit": UNIT}


def _tokenize_core(src: str) -> list[Token]:
    out = []
    pos, line, line_start = 0, 1, 0
    while pos < len(src):
        m = _CTOKEN.match(src, pos)
        if m is None:
            raise ParseError(f"unexpected character {src[pos]!r}", Span(line, pos - line_start + 1))
        kind, text = m.lastgroup, m.group()
        span = Span(line, pos - line_start + 1)
        if kind == "nl":
            line, line_start = line + 1, m.end()
        elif kind != "ws":
            if kind == "ident" and text in _C_KEYWORDS:
                kind = "kw"
            out.append(Token(kind, "←" if text == "<-" else text, span))
        pos = m.end()
    out.append(Token("eof", "", Span(line, pos - line_start + 1)))
    return out


class _CoreParser(_Parser):
    def __init__(self, src: str):
        self.toks = _tokenize_core(src)
        self.i = 0

    def at_type(self) -> bool:
        return self.tok.kind == "kw" and self.tok.text in ("const", "ptr", "int", "bool", "unit")

    def expr(self):
        if self.at_type():
            return self.decl()
        first = self.asn()
        if self.at(";"):
            span = self.advance().span
            return cc.Seq(first, self.expr(), span=first.span or span)
        return first

    def binder_type(self) -> cc.BinderType:
        is_const = self.at("const")
        if is_const:
            self.advance()
        depth = 0
        while self.at("ptr"):
            self.advance()
            depth += 1
        if not (self.tok.kind == "kw" and self.tok.text in _C_BASES):
            self.fail("expected a base type")
        t = _C_BASES[self.advance().text]
        for _ in range(depth):
            t = cc.Ptr(t)
        return cc.BinderType(t, is_const=is_const)

    def decl(self):
        start = self.tok.span
        b = self.binder_type()
        if self.tok.kind != "ident":
            self.fail("expected identifier")
        name = self.advance().text
        if self.at("[1]"):
            self.advance()
            b = cc.BinderType(b.base, is_const=b.is_const, is_array=True)
        init = None
        if self.at("="):
            self.advance()
            if b.is_array:
                self.expect("{")
                init = self.asn()
                self.expect("}")
            else:
                init = self.asn()
        self.expect(";")
        return cc.Decl(b, name, init, self.expr(), span=start)

    def asn(self):
        t = self.tok
        if t.kind == "ident" and self.toks[self.i + 1].text == ":=":
            self.advance()
            self.advance()
            return cc.Assign(t.text, self.asn(), span=t.span)
        left = self.add()
        if self.at("←"):
            self.advance()
            return cc.App2(cc.STORE, left, self.asn(), span=left.span)
        return left

    def add(self):
        e = self.unary()
        while self.at("+"):
            self.advance()
            e = cc.App2("+", e, self.unary(), span=e.span)
        return e

    def unary(self):
        t = self.tok
        if self.at("*") or self.at("incr"):
            self.advance()
            return cc.App1(cc.LOAD if t.text == "*" else "incr", self.unary(), span=t.span)
        if self.at("&"):
            self.advance()
            if self.tok.kind != "ident":
                self.fail("expected identifier after &")
            return cc.AddrOf(self.advance().text, span=t.span)
        return self.atom()

    def atom(self):
        t = self.tok
        if t.kind == "int":
            self.advance()
            return cc.Const(str(int(t.text)), span=t.span)
        if self.at("true") or self.at("false") or self.at("()"):
            self.advance()
            return cc.Const(t.text, span=t.span)
        if t.kind == "ident":
            self.advance()
            return cc.Var(t.text, span=t.span)
        if self.at("("):
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        self.fail("expected an expression")


def parse_core(src: str) -> cc.CExpr:
    """Parse CoreC/CoreCE notation, e.g. ``int x = 0; &x ← *&x + 1``."""
    return _CoreParser(src).program()
