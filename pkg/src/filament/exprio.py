"""Text syntax for curvature polynomials, fields and functionals.

Grammar (whitespace insignificant, ASCII only)::

    expr     := term (('+'|'-') term)*
    term     := factor (('*'|<juxtaposition>) factor)*
    factor   := atom ('^' nat)? | '-' factor | '(' expr ')' ('^' nat)?
    atom     := rational | 'G' | 'k' "'"* | 'k^(' nat ')'
    rational := nat ('/' nat)?

The printer emits terms in the canonical monomial order of
:class:`~filament.diffalg.DiffPoly`, so ``parse(format_poly(p)) == p``.
"""

from __future__ import annotations

from fractions import Fraction

from .diffalg import DiffPoly, Functional, G, kder

MAX_EXPONENT = 1024
MAX_ORDER = 1024


class ParseError(ValueError):
    def __init__(self, message: str, offset: int, expected: set[str] | frozenset[str] = frozenset()):
        self.message = message
        self.offset = offset  # 1-based byte offset
        self.expected = frozenset(expected)
        hint = f" (expected one of: {', '.join(sorted(self.expected))})" if self.expected else ""
        super().__init__(f"at offset {offset}: {message}{hint}")


_SINGLE = set("+-*/^()'G")
_FACTOR_START = {"nat", "G", "k", "("}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    data = text.encode("utf-8")
    tokens = []
    i = 0
    while i < len(data):
        ch = chr(data[i])
        if ch.isspace():
            i += 1
        elif ch.isdigit():
            j = i
            while j < len(data) and chr(data[j]).isdigit():
                j += 1
            tokens.append(("nat", data[i:j].decode(), i + 1))
            i = j
        elif ch in _SINGLE or ch == "k":
            tokens.append((ch, ch, i + 1))
            i += 1
        else:
            raise ParseError(f"unexpected character {data[i:i + 1]!r}", i + 1,
                             {"number", "k", "G", "(", "-"})
    tokens.append(("eof", "", len(data) + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self, ahead: int = 0) -> tuple[str, str, int]:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def take(self, kind: str, expected: set[str] | None = None) -> tuple[str, str, int]:
        tok = self.peek()
        if tok[0] != kind:
            self.fail(tok, expected or {kind})
        self.pos += 1
        return tok

    def fail(self, tok, expected):
        what = "end of input" if tok[0] == "eof" else repr(tok[1])
        raise ParseError(f"unexpected {what}", tok[2], expected)

    def nat(self, limit: int | None = None, what: str = "exponent") -> int:
        tok = self.take("nat", {"natural number"})
        value = int(tok[1])
        if limit is not None and value > limit:
            raise ParseError(f"{what} {value} exceeds limit {limit}", tok[2])
        return value

    def parse(self) -> DiffPoly:
        result = self.expr()
        tok = self.peek()
        if tok[0] != "eof":
            self.fail(tok, {"+", "-", "*", "end of input"})
        return result

    def expr(self) -> DiffPoly:
        result = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.take(self.peek()[0])[0]
            rhs = self.term()
            result = result + rhs if op == "+" else result - rhs
        return result

    def term(self) -> DiffPoly:
        result = self.factor()
        while True:
            kind = self.peek()[0]
            if kind == "*":
                self.pos += 1
            elif kind not in _FACTOR_START:
                return result
            result = result * self.factor()

    def factor(self) -> DiffPoly:
        tok = self.peek()
        if tok[0] == "-":
            self.pos += 1
            return -self.factor()
        if tok[0] == "(":
            self.pos += 1
            base = self.expr()
            self.take(")", {")", "+", "-", "*"})
        else:
            base = self.atom()
        if self.peek()[0] == "^":
            self.pos += 1
            base = base ** self.nat(MAX_EXPONENT)
        return base

    def atom(self) -> DiffPoly:
        tok = self.peek()
        kind = tok[0]
        if kind == "nat":
            num = self.nat()
            if self.peek()[0] == "/":
                self.pos += 1
                den_tok = self.peek()
                den = self.nat()
                if den == 0:
                    raise ParseError("zero denominator", den_tok[2])
                return DiffPoly.const(Fraction(num, den))
            return DiffPoly.const(num)
        if kind == "G":
            self.pos += 1
            return G
        if kind == "k":
            self.pos += 1
            if self.peek()[0] == "^" and self.peek(1)[0] == "(":
                self.pos += 2
                order = self.nat(MAX_ORDER, "derivative order")
                self.take(")")
                return kder(order)
            order = 0
            while self.peek()[0] == "'":
                self.pos += 1
                order += 1
            if order > MAX_ORDER:
                raise ParseError(f"derivative order {order} exceeds limit {MAX_ORDER}", tok[2])
            return kder(order)
        self.fail(tok, {"number", "k", "G", "(", "-"})


def parse(text: str) -> DiffPoly:
    """Parse ASCII text into a canonical :class:`DiffPoly`."""
    return _Parser(text).parse()


def _factor_str(m: int, e: int) -> str:
    base = "k" + "'" * m if m <= 3 else f"k^({m})"
    return base if e == 1 else f"{base}^{e}"


def _coeff_str(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_poly(p: DiffPoly) -> str:
    """Canonical text for ``p``; ``"0"`` for the zero polynomial."""
    if p.is_zero:
        return "0"
    pieces = []
    for i, mono in enumerate(p.terms):
        c = mono.coeff
        sign = "-" if c < 0 else "+"
        c = abs(c)
        factors = []
        if mono.g_power:
            factors.append("G" if mono.g_power == 1 else f"G^{mono.g_power}")
        factors.extend(_factor_str(m, e) for m, e in mono.factors)
        if c != 1 or not factors:
            factors.insert(0, _coeff_str(c))
        body = " ".join(factors)
        if i == 0:
            pieces.append(f"-{body}" if sign == "-" else body)
        else:
            pieces.append(f" {sign} {body}")
    return "".join(pieces)


def parse_field(text: str) -> tuple[DiffPoly, DiffPoly]:
    """Parse ``"f | g"`` into tangential and normal components."""
    parts = text.split("|")
    if len(parts) != 2:
        raise ParseError("a field is written 'tangential | normal'", 1, {"|"})
    f = parse(parts[0])
    try:
        g = parse(parts[1])
    except ParseError as err:
        shift = len(parts[0].encode()) + 1
        raise ParseError(err.message, err.offset + shift, err.expected) from None
    return f, g


def format_field(v) -> str:
    return f"{format_poly(v.f)} | {format_poly(v.g)}"


def format_functional(F: Functional) -> str:
    return f"int({format_poly(F.normal_form)}) ds"


def parse_functional(text: str) -> Functional:
    """Accepts ``int(expr) ds`` or a bare integrand."""
    stripped = text.strip()
    if stripped.startswith("int(") and stripped.endswith("ds"):
        inner = stripped[len("int("):-2].rstrip()
        if not inner.endswith(")"):
            raise ParseError("unbalanced 'int(' wrapper", len(text.encode()), {")"})
        return Functional(parse(inner[:-1]))
    return Functional(parse(text))


__all__ = [
    "ParseError", "parse", "format_poly", "parse_field", "format_field",
    "format_functional", "parse_functional",
]
