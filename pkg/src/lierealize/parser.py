"""Tokenizer and recursive-descent parser for expressions and vector fields.

Grammar (whitespace insignificant)::

    field     := component (';' component)*
    component := sum                      # must be linear in d<a>
    sum       := product (('+' | '-') product)*
    product   := unary ('*' unary)*
    unary     := '-' unary | '+' unary | power
    power     := atom ('^' exponent)?
    exponent  := INT ('^' exponent)?      # right-associative, literal only
    atom      := NUMBER | VAR | PARAM | DERIV
               | FUNC '(' VAR ')' | '(' sum ')'

``NUMBER`` is an integer or a rational literal ``p/q``; ``VAR`` is ``x<k>``,
``DERIV`` is ``d<k>`` (fields only), ``FUNC`` is one of sin, cos, tan, sec.
Any other identifier is a parameter.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .symexpr import Expr, Ratio

__all__ = [
    "Token",
    "ParseDiagnostic",
    "ParseError",
    "tokenize",
    "parse_expr",
    "parse_field",
    "parse_field_list",
]

FUNCTIONS = ("sin", "cos", "tan", "sec")
MAX_VARIABLE = 64
MAX_EXPONENT = 64
MAX_DIGITS = 1000

_VAR = re.compile(r"x([0-9]+)\Z")
_DERIV = re.compile(r"d([0-9]+)\Z")


@dataclass(frozen=True)
class Token:
    kind: str  # number | ident | funcname | op | paren | sep | end
    lexeme: str
    pos: int


@dataclass(frozen=True)
class ParseDiagnostic:
    message: str
    position: int  # 0-based offset into the line
    expected: tuple[str, ...] = ()
    line: int = 1

    @property
    def column(self) -> int:
        return self.position + 1

    def __str__(self):
        text = f"line {self.line}, column {self.column}: {self.message}"
        if self.expected:
            text += f" (expected {', '.join(self.expected)})"
        return text


class ParseError(ValueError):
    def __init__(self, diagnostic: ParseDiagnostic):
        self.diagnostic = diagnostic
        super().__init__(str(diagnostic))


def _fail(message, pos, expected=(), line=1):
    raise ParseError(ParseDiagnostic(message, pos, tuple(expected), line))


def tokenize(text: str, line: int = 1) -> list[Token]:
    """Maximal-munch tokens; a final ``end`` token marks the input length."""
    tokens: list[Token] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch.isascii() and ch.isdigit():
            j = i
            while j < n and text[j].isascii() and text[j].isdigit():
                j += 1
            if j - i > MAX_DIGITS:
                _fail("integer literal too long", i, line=line)
            if j < n and text[j] == "/":
                k = j + 1
                while k < n and text[k].isascii() and text[k].isdigit():
                    k += 1
                if k == j + 1:
                    _fail("rational literal needs a denominator", j + 1, ["integer"], line)
                if k - j - 1 > MAX_DIGITS:
                    _fail("integer literal too long", j + 1, line=line)
                j = k
            tokens.append(Token("number", text[i:j], i))
            i = j
        elif (ch.isascii() and ch.isalpha()) or ch == "_":
            j = i
            while j < n and (text[j].isascii() and (text[j].isalnum() or text[j] == "_")):
                j += 1
            word = text[i:j]
            tokens.append(Token("funcname" if word in FUNCTIONS else "ident", word, i))
            i = j
        elif ch in "+-*^":
            tokens.append(Token("op", ch, i))
            i += 1
        elif ch in "()":
            tokens.append(Token("paren", ch, i))
            i += 1
        elif ch == ";":
            tokens.append(Token("sep", ch, i))
            i += 1
        elif ch == "/":
            _fail("division is only allowed inside rational literals p/q", i, line=line)
        else:
            _fail(f"illegal character {ch!r}", i, line=line)
    tokens.append(Token("end", "", n))
    return tokens


class _Field(dict):
    """Partial vector field: derivative index -> coefficient Expr."""


class _Parser:
    def __init__(self, tokens, n, allow_fields, line):
        self.toks = tokens
        self.i = 0
        self.n = n
        self.allow_fields = allow_fields
        self.line = line
        self.max_index = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def advance(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def fail(self, message, expected=(), tok=None):
        tok = tok or self.tok
        _fail(message, tok.pos, expected, self.line)

    def expect(self, kind, lexeme=None):
        t = self.tok
        if t.kind != kind or (lexeme is not None and t.lexeme != lexeme):
            what = repr(lexeme) if lexeme else kind
            found = repr(t.lexeme) if t.lexeme else "end of input"
            self.fail(f"unexpected {found}", [what])
        return self.advance()

    # grammar --------------------------------------------------------------
    def sum(self):
        value = self.product()
        while self.tok.kind == "op" and self.tok.lexeme in "+-":
            op = self.advance()
            rhs = self.product()
            value = self.combine_add(value, rhs, op)
        return value

    def product(self):
        value = self.unary()
        while self.tok.kind == "op" and self.tok.lexeme == "*":
            op = self.advance()
            rhs = self.unary()
            value = self.combine_mul(value, rhs, op)
        return value

    def unary(self):
        if self.tok.kind == "op" and self.tok.lexeme in "+-":
            op = self.advance()
            value = self.unary()
            if op.lexeme == "+":
                return value
            if isinstance(value, _Field):
                return _Field({a: -c for a, c in value.items()})
            return -value
        return self.power()

    def power(self):
        start = self.tok
        base = self.atom()
        if self.tok.kind == "op" and self.tok.lexeme == "^":
            self.advance()
            e = self.exponent()
            if isinstance(base, _Field):
                self.fail("a derivative symbol cannot be raised to a power", tok=start)
            return base**e
        return base

    def exponent(self) -> int:
        t = self.tok
        if t.kind != "number" or "/" in t.lexeme:
            self.fail("exponent must be a non-negative integer literal", ["integer"])
        self.advance()
        e = int(t.lexeme)
        if self.tok.kind == "op" and self.tok.lexeme == "^":
            self.advance()
            inner = self.exponent()
            if e > 1 and inner > 6:
                _fail("exponent too large", t.pos, line=self.line)
            e = e**inner
        if e > MAX_EXPONENT:
            _fail(f"exponent {e} exceeds limit {MAX_EXPONENT}", t.pos, line=self.line)
        return e

    def atom(self):
        t = self.tok
        if t.kind == "number":
            self.advance()
            num, _, den = t.lexeme.partition("/")
            if den and int(den) == 0:
                _fail("zero denominator in rational literal", t.pos, line=self.line)
            return Expr.const(Fraction(int(num), int(den) if den else 1))
        if t.kind == "ident":
            self.advance()
            return self.identifier(t)
        if t.kind == "funcname":
            self.advance()
            self.expect("paren", "(")
            arg = self.tok
            if arg.kind != "ident" or not _VAR.match(arg.lexeme):
                self.fail(f"{t.lexeme} takes a single variable x<k>", ["variable"])
            self.advance()
            v = self.var_index(arg)
            self.expect("paren", ")")
            return getattr(Expr, t.lexeme)(v)
        if t.kind == "paren" and t.lexeme == "(":
            self.advance()
            value = self.sum()
            self.expect("paren", ")")
            return value
        found = repr(t.lexeme) if t.lexeme else "end of input"
        self.fail(f"unexpected {found}", ["number", "variable", "parameter", "function", "'('"])

    def identifier(self, t: Token):
        if _VAR.match(t.lexeme):
            return Expr.var(self.var_index(t))
        m = _DERIV.match(t.lexeme)
        if m:
            if not self.allow_fields:
                _fail(f"derivative symbol {t.lexeme} in a scalar expression", t.pos, line=self.line)
            a = self.var_index(t)
            return _Field({a: Expr.const(1)})
        return Expr.param(t.lexeme)

    def var_index(self, t: Token) -> int:
        digits = t.lexeme[1:]
        k = int(digits) if len(digits) <= 6 else MAX_VARIABLE + 1
        if k < 1:
            _fail(f"index of {t.lexeme} must be at least 1", t.pos, line=self.line)
        limit = self.n if self.n is not None else MAX_VARIABLE
        if k > limit:
            _fail(f"{t.lexeme} is out of range (n = {limit})", t.pos, line=self.line)
        self.max_index = max(self.max_index, k)
        return k

    # field-aware combination --------------------------------------------
    def combine_add(self, a, b, op: Token):
        fa, fb = isinstance(a, _Field), isinstance(b, _Field)
        if fa != fb:
            self.fail("cannot add a scalar to a derivative term", tok=op)
        if op.lexeme == "-":
            b = _Field({k: -c for k, c in b.items()}) if fb else -b
        if not fa:
            return a + b
        out = _Field(a)
        for k, c in b.items():
            out[k] = out.get(k, Expr()) + c
        return out

    def combine_mul(self, a, b, op: Token):
        fa, fb = isinstance(a, _Field), isinstance(b, _Field)
        if fa and fb:
            self.fail("product of two derivative symbols", tok=op)
        if fa:
            return _Field({k: c * b for k, c in a.items()})
        if fb:
            return _Field({k: a * c for k, c in b.items()})
        return a * b


def parse_expr(text: str, n: int | None = None, line: int = 1) -> Expr:
    """Parse a scalar expression; variable indices must not exceed ``n``."""
    p = _Parser(tokenize(text, line), n, allow_fields=False, line=line)
    value = p.sum()
    if p.tok.kind != "end":
        p.fail(f"unexpected {p.tok.lexeme!r}", ["operator", "end of input"])
    return value


def _parse_field_parts(text: str, n: int | None, line: int) -> tuple[dict[int, Expr], int]:
    tokens = tokenize(text, line)
    p = _Parser(tokens, n, allow_fields=True, line=line)
    total: dict[int, Expr] = {}
    while True:
        if p.tok.kind in ("sep", "end"):
            p.fail("empty component", ["component"])
        start = p.tok
        value = p.sum()
        if not isinstance(value, _Field):
            p.fail("component has no derivative symbol d<k>", ["d<k>"], tok=start)
        for a, c in value.items():
            total[a] = total.get(a, Expr()) + c
        if p.tok.kind == "end":
            break
        if p.tok.kind != "sep":
            p.fail(f"unexpected {p.tok.lexeme!r}", ["';'", "operator", "end of input"])
        p.advance()
    return total, p.max_index


def parse_field(text: str, n: int | None = None, line: int = 1):
    """Parse one vector field; ``n`` defaults to the largest index seen."""
    from .liefield import VectorField

    parts, max_index = _parse_field_parts(text, n, line)
    width = n if n is not None else max(max_index, 1)
    return VectorField(width, [Ratio(parts.get(a, Expr())) for a in range(1, width + 1)])


def parse_field_list(text: str, n: int | None = None) -> list:
    """Parse newline-separated fields sharing one variable count.

    Blank lines and ``#`` comment lines are skipped.  The common ``n`` is the
    largest index seen unless overridden.
    """
    from .liefield import VectorField

    parsed = []
    max_index = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts, m = _parse_field_parts(raw, n, lineno)
        parsed.append(parts)
        max_index = max(max_index, m)
    width = n if n is not None else max(max_index, 1)
    return [
        VectorField(width, [Ratio(parts.get(a, Expr())) for a in range(1, width + 1)])
        for parts in parsed
    ]
