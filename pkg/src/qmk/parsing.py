"""Reader and printer for ``.qmk`` chart documents.

A document declares one chart and names objects on it::

    coord x parity=even weight=0;
    coord xi parity=odd weight=1;
    field Q { x = xi; }
    map s { xi = 2*xi; }

Two-layer tables written by the ``two-layer`` command use the extra
statements ``structure``, ``basis``, ``bracket``, ``d``, ``derived`` and
``anchor``; ``run`` lines hold command directives.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .graded_algebra import EVEN, ODD, Coordinate, GradedContext, Polynomial
from .vector_fields import VectorField


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}" if line else message)


_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^(){};=,])
    """,
    re.VERBOSE,
)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    column: int
    offset: int = 0


def tokenize(text: str) -> List[Token]:
    out = []
    line, start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            start = m.end()
        elif kind not in ("ws", "comment"):
            out.append(Token(kind, m.group(), line, pos - start + 1, pos))
        pos = m.end()
    out.append(Token("eof", "", line, pos - start + 1, pos))
    return out


class _Stream:
    def __init__(self, tokens: List[Token]):
        self.tokens = tokens
        self.i = 0

    def peek(self) -> Token:
        return self.tokens[self.i]

    def next(self) -> Token:
        t = self.tokens[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def error(self, msg, tok: Optional[Token] = None):
        tok = tok or self.peek()
        return ParseError(msg, tok.line, tok.column)

    def accept(self, text) -> Optional[Token]:
        if self.peek().text == text and self.peek().kind != "eof":
            return self.next()
        return None

    def expect(self, text) -> Token:
        t = self.peek()
        if t.text != text or t.kind == "eof":
            found = "end of input" if t.kind == "eof" else repr(t.text)
            raise self.error(f"expected {text!r}, found {found}")
        return self.next()

    def ident(self, what="identifier") -> Token:
        t = self.peek()
        if t.kind != "ident":
            found = "end of input" if t.kind == "eof" else repr(t.text)
            raise self.error(f"expected {what}, found {found}")
        return self.next()


# -- expressions ------------------------------------------------------------


class _ExprParser:
    """Recursive descent over ``+ - * ^``, parentheses, identifiers and
    rational literals ``p`` or ``p/q``."""

    def __init__(self, stream: _Stream, ctx: GradedContext):
        self.s = stream
        self.ctx = ctx

    def expr(self) -> Polynomial:
        value = self.term()
        while self.s.peek().text in ("+", "-") and self.s.peek().kind == "op":
            op = self.s.next().text
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> Polynomial:
        value = self.unary()
        while self.s.accept("*"):
            value = value * self.unary()
        return value

    def unary(self) -> Polynomial:
        if self.s.accept("-"):
            return -self.unary()
        if self.s.accept("+"):
            return self.unary()
        return self.power()

    def power(self) -> Polynomial:
        base = self.atom()
        if self.s.accept("^"):
            t = self.s.peek()
            if t.kind != "int":
                raise self.s.error("exponent must be a non-negative integer literal")
            self.s.next()
            base = base ** int(t.text)
        return base

    def atom(self) -> Polynomial:
        t = self.s.peek()
        if t.kind == "int":
            self.s.next()
            num = int(t.text)
            if self.s.accept("/"):
                d = self.s.peek()
                if d.kind != "int":
                    raise self.s.error("denominator must be an integer literal")
                self.s.next()
                if int(d.text) == 0:
                    raise ParseError("division by zero in rational literal", d.line, d.column)
                return self.ctx.const(Fraction(num, int(d.text)))
            return self.ctx.const(num)
        if t.kind == "ident":
            self.s.next()
            if t.text not in self.ctx:
                raise ParseError(f"unknown identifier {t.text!r}", t.line, t.column)
            return self.ctx.var(t.text)
        if self.s.accept("("):
            v = self.expr()
            self.s.expect(")")
            return v
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise self.s.error(f"expected an expression, found {found}")


def parse_expression(text: str, ctx: GradedContext) -> Polynomial:
    s = _Stream(tokenize(text))
    v = _ExprParser(s, ctx).expr()
    if s.peek().kind != "eof":
        raise s.error(f"unexpected {s.peek().text!r} after expression")
    return v


# -- documents ----------------------------------------------------------------


@dataclass
class TableData:
    """Raw two-layer tables as read from a document; basis entries are
    referenced by name."""

    structure: str = "Q"
    basis: Dict[str, VectorField] = field(default_factory=dict)
    bracket: Dict[Tuple[str, str], Dict[str, Polynomial]] = field(default_factory=dict)
    differential: Dict[str, Dict[str, Polynomial]] = field(default_factory=dict)
    derived: Dict[Tuple[str, str], Dict[str, Polynomial]] = field(default_factory=dict)
    anchor: Dict[str, VectorField] = field(default_factory=dict)


@dataclass
class ChartDocument:
    context: GradedContext
    fields: Dict[str, VectorField] = field(default_factory=dict)
    maps: Dict[str, Dict[str, Polynomial]] = field(default_factory=dict)
    commands: List[List[str]] = field(default_factory=list)
    tables: Optional[TableData] = None


_PARITY = {"even": EVEN, "odd": ODD}


class _DocParser:
    def __init__(self, text: str):
        self.text = text
        self.s = _Stream(tokenize(text))
        self.coords: List[Coordinate] = []
        self.ctx = GradedContext([])
        self.fields: Dict[str, VectorField] = {}
        self.maps: Dict[str, Dict[str, Polynomial]] = {}
        self.commands: List[List[str]] = []
        self.tables: Optional[TableData] = None
        self.names: Dict[str, str] = {}
        self._lc_ctx = None

    def _claim(self, tok: Token, kind: str):
        if tok.text in self.names:
            raise ParseError(f"duplicate name {tok.text!r} (already a {self.names[tok.text]})",
                             tok.line, tok.column)
        self.names[tok.text] = kind

    def parse(self) -> ChartDocument:
        s = self.s
        while s.peek().kind != "eof":
            t = s.ident("a statement keyword")
            handler = getattr(self, "_st_" + t.text, None)
            if handler is None:
                raise ParseError(f"unknown statement {t.text!r}", t.line, t.column)
            handler(t)
        return ChartDocument(self.ctx, self.fields, self.maps, self.commands, self.tables)

    # coord x parity=even weight=0;
    def _st_coord(self, kw):
        s = self.s
        if self.fields or self.maps or self.tables:
            raise ParseError("coordinates must be declared before fields, maps and tables",
                             kw.line, kw.column)
        name = s.ident("coordinate name")
        self._claim(name, "coordinate")
        attrs = {}
        while s.peek().text != ";":
            key = s.ident("'parity' or 'weight'")
            if key.text not in ("parity", "weight"):
                raise ParseError(f"unknown attribute {key.text!r}", key.line, key.column)
            if key.text in attrs:
                raise ParseError(f"attribute {key.text!r} given twice", key.line, key.column)
            s.expect("=")
            if key.text == "parity":
                v = s.peek()
                if v.text not in _PARITY:
                    raise s.error("parity must be 'even' or 'odd'")
                s.next()
                attrs["parity"] = _PARITY[v.text]
            else:
                neg = bool(s.accept("-"))
                v = s.peek()
                if v.kind != "int":
                    raise s.error("weight must be an integer")
                s.next()
                attrs["weight"] = -int(v.text) if neg else int(v.text)
        for need in ("parity", "weight"):
            if need not in attrs:
                raise ParseError(f"coordinate {name.text!r} lacks {need}=", name.line, name.column)
        s.expect(";")
        self.coords.append(Coordinate(name.text, attrs["parity"], attrs["weight"]))
        self.ctx = GradedContext(self.coords)

    def _block(self, ctx=None) -> Dict[str, Polynomial]:
        s = self.s
        ctx = ctx or self.ctx
        s.expect("{")
        out: Dict[str, Polynomial] = {}
        while not s.accept("}"):
            c = s.ident("coordinate name")
            if c.text not in self.ctx:
                raise ParseError(f"unknown coordinate {c.text!r}", c.line, c.column)
            if c.text in out:
                raise ParseError(f"component {c.text!r} given twice", c.line, c.column)
            s.expect("=")
            out[c.text] = _ExprParser(s, ctx).expr()
            s.expect(";")
        return out

    def _field_block(self, tok) -> VectorField:
        comps = self._block()
        try:
            return VectorField(self.ctx, comps)
        except ValueError as exc:
            raise ParseError(str(exc), tok.line, tok.column) from exc

    def _st_field(self, kw):
        name = self.s.ident("field name")
        self._claim(name, "field")
        self.fields[name.text] = self._field_block(name)

    def _st_map(self, kw):
        name = self.s.ident("map name")
        self._claim(name, "map")
        comps = self._block()
        self.maps[name.text] = {c.name: comps.get(c.name, self.ctx.var(c.name)) for c in self.ctx}

    def _st_run(self, kw):
        s = self.s
        first = s.peek()
        while s.peek().text != ";":
            if s.peek().kind == "eof":
                raise s.error("expected ';' after run directive")
            s.next()
        words = self.text[first.offset:s.peek().offset].split()
        s.expect(";")
        if not words:
            raise ParseError("empty run directive", kw.line, kw.column)
        self.commands.append(words)

    # -- tables --

    def _tab(self) -> TableData:
        if self.tables is None:
            self.tables = TableData()
        return self.tables

    def _st_structure(self, kw):
        name = self.s.ident("structure name")
        self.s.expect(";")
        self._tab().structure = name.text

    def _st_basis(self, kw):
        name = self.s.ident("basis element name")
        self._claim(name, "basis element")
        self._tab().basis[name.text] = self._field_block(name)
        self._lc_ctx = None

    def _basis_ref(self) -> str:
        t = self.s.ident("basis element name")
        if self.tables is None or t.text not in self.tables.basis:
            raise ParseError(f"unknown basis element {t.text!r}", t.line, t.column)
        return t.text

    def _lc(self) -> Dict[str, Polynomial]:
        """A combination ``sum coeff * e`` of basis elements; basis names act
        as extra even weight-0 symbols placed after every coordinate."""
        tab = self._tab()
        if self._lc_ctx is None:
            self._lc_ctx = self.ctx.extend(Coordinate(n, EVEN, 0) for n in tab.basis)
        lctx = self._lc_ctx
        start = self.s.peek()
        poly = _ExprParser(self.s, lctx).expr()
        n0 = len(self.ctx)
        out: Dict[str, Dict] = {}
        for m, c in poly.items():
            es = [(i, e) for i, e in m if i >= n0]
            if len(es) != 1 or es[0][1] != 1:
                raise ParseError("each term must contain exactly one basis element",
                                 start.line, start.column)
            rest = tuple((i, e) for i, e in m if i < n0)
            out.setdefault(lctx.coordinates[es[0][0]].name, {})[rest] = c
        return {k: Polynomial(self.ctx, t) for k, t in out.items()}

    def _st_bracket(self, kw):
        a, b = self._basis_ref(), self._basis_ref()
        self.s.expect("=")
        self._tab().bracket[(a, b)] = self._lc()
        self.s.expect(";")

    def _st_derived(self, kw):
        a, b = self._basis_ref(), self._basis_ref()
        self.s.expect("=")
        self._tab().derived[(a, b)] = self._lc()
        self.s.expect(";")

    def _st_d(self, kw):
        a = self._basis_ref()
        self.s.expect("=")
        self._tab().differential[a] = self._lc()
        self.s.expect(";")

    def _st_anchor(self, kw):
        a = self._basis_ref()
        self._tab().anchor[a] = self._field_block(kw)


def parse_document(text: str) -> ChartDocument:
    return _DocParser(text).parse()


# -- printing -----------------------------------------------------------------


def format_coordinates(ctx: GradedContext) -> List[str]:
    return [f"coord {c.name} parity={'odd' if c.parity else 'even'} weight={c.weight};" for c in ctx]


def format_block(keyword: str, name: str, comps: Dict[str, Polynomial], ctx: GradedContext,
                 keep_zero: bool = False) -> List[str]:
    body = [f"  {c.name} = {comps[c.name]};" for c in ctx
            if c.name in comps and (keep_zero or comps[c.name])]
    if not body:
        return [f"{keyword} {name} {{ }}"]
    return [f"{keyword} {name} {{"] + body + ["}"]


def format_field(name: str, X: VectorField) -> List[str]:
    return format_block("field", name, X.components, X.context)


def format_document(doc: ChartDocument) -> str:
    ctx = doc.context
    lines = format_coordinates(ctx)
    for name, X in doc.fields.items():
        lines += format_field(name, X)
    for name, m in doc.maps.items():
        nontrivial = {k: v for k, v in m.items() if v != ctx.var(k)}
        lines += format_block("map", name, nontrivial, ctx, keep_zero=True)
    for words in doc.commands:
        lines.append("run " + " ".join(words) + ";")
    return "\n".join(lines) + "\n"
