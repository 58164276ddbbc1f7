"""Parser for the tuple notation of structure equations and form expressions.

``(e15,-e25,-e35,e45,0,0)`` lists d e^1, ..., d e^6. A form expression is a
signed sum of terms ``[coeff][*]e<ijk>`` where the coefficient is a product of
decimals, fractions ``p/q``, ``sqrt(N)`` and named parameters. Indices are
single digits (dimension at most 8); ``e^{15}`` and ``e^15`` are accepted too.
"""
import math
import re

from .errors import ParseError

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<basis>e(?:\^\{(?P<b1>\d+)\}|\^(?P<b2>\d+)|(?P<b3>\d+)))
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:E[+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[(),+\-*/])
    """,
    re.VERBOSE,
)


def _tokenize(text):
    text = text.replace("−", "-")
    pos, out = 0, []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        if kind in ("b1", "b2", "b3"):
            kind = "basis"
        if kind != "ws":
            if kind == "basis":
                digits = m.group("b1") or m.group("b2") or m.group("b3")
                out.append(("basis", tuple(int(ch) for ch in digits), pos))
            else:
                out.append((kind, m.group(0), pos))
        pos = m.end()
    out.append(("end", None, len(text)))
    return text, out


class _Parser:
    def __init__(self, text, params):
        self.text, self.tokens = _tokenize(text)
        self.i = 0
        self.params = dict(params or {})

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        return ParseError(msg, self.text, tok[2])

    def expect(self, value):
        tok = self.take()
        if tok[0] != "op" or tok[1] != value:
            found = "end of input" if tok[0] == "end" else repr(tok[1])
            raise self.error(f"expected {value!r}, found {found}", tok)
        return tok

    # grammar ------------------------------------------------------------

    def tuple_(self):
        self.expect("(")
        exprs = [self.expr()]
        while self.peek()[0] == "op" and self.peek()[1] == ",":
            self.take()
            exprs.append(self.expr())
        self.expect(")")
        self.finish()
        return exprs

    def finish(self):
        tok = self.peek()
        if tok[0] != "end":
            raise self.error(f"unexpected trailing input {tok[1]!r}", tok)

    def expr(self):
        """List of (coefficient, index-tuple or None, position) terms."""
        terms = []
        sign = 1.0
        tok = self.peek()
        if tok[0] == "op" and tok[1] in "+-":
            self.take()
            sign = -1.0 if tok[1] == "-" else 1.0
        terms.append(self.term(sign))
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            sign = -1.0 if self.take()[1] == "-" else 1.0
            terms.append(self.term(sign))
        return terms

    def term(self, sign):
        start = self.peek()
        coeff, idx = sign, None
        seen = False
        while True:
            tok = self.peek()
            if tok[0] == "basis":
                if idx is not None:
                    raise self.error("two basis monomials in one term", tok)
                self.take()
                idx = tok[1]
            elif tok[0] in ("number", "name") or (tok[0] == "op" and tok[1] == "("):
                if idx is not None:
                    raise self.error("coefficient must precede the basis monomial", tok)
                coeff *= self.factor()
            else:
                if not seen:
                    raise self.error("expected a term")
                break
            seen = True
            nxt = self.peek()
            if nxt[0] == "op" and nxt[1] == "*":
                self.take()
                after = self.peek()
                if after[0] == "end" or (after[0] == "op" and after[1] in ",)+-*/"):
                    raise self.error("expected a factor after '*'", after)
        return coeff, idx, start[2]

    def factor(self):
        tok = self.take()
        if tok[0] == "number":
            val = float(tok[1])
            nxt = self.peek()
            if nxt[0] == "op" and nxt[1] == "/":
                self.take()
                den = self.take()
                if den[0] != "number":
                    raise self.error("expected a denominator", den)
                if float(den[1]) == 0.0:
                    raise self.error("division by zero", den)
                val /= float(den[1])
            return val
        if tok[0] == "name":
            if tok[1] == "sqrt":
                self.expect("(")
                arg = self.take()
                if arg[0] != "number":
                    raise self.error("sqrt expects a number", arg)
                self.expect(")")
                return math.sqrt(float(arg[1]))
            if tok[1] not in self.params:
                raise self.error(f"unbound parameter {tok[1]!r}", tok)
            return float(self.params[tok[1]])
        if tok[0] == "op" and tok[1] == "(":
            inner = self.expr()
            self.expect(")")
            if any(idx is not None for _, idx, _ in inner):
                raise self.error("basis monomial inside a parenthesised coefficient", tok)
            return sum(c for c, _, _ in inner)
        raise self.error("expected a coefficient", tok)


def _assemble(parser, terms, dim, deg):
    from .exterior import KForm

    out = None
    for coeff, idx, pos in terms:
        if idx is None:
            if coeff != 0.0:
                if deg == 0:
                    term = KForm.scalar(dim, coeff)
                else:
                    raise ParseError("constant term in a form expression", parser.text, pos)
            else:
                continue
        else:
            bad = [i for i in idx if not 1 <= i <= dim]
            if bad:
                raise ParseError(f"index {bad[0]} out of range 1..{dim}", parser.text, pos)
            if deg is not None and len(idx) != deg:
                raise ParseError(f"expected a {deg}-form, got e{''.join(map(str, idx))}", parser.text, pos)
            deg = len(idx)
            term = KForm.basis_form(dim, idx, coeff)
        out = term if out is None else out + term
    if out is None:
        if deg is None:
            return None
        return KForm(dim, deg)
    return out


def parse_form(text, dim, params=None, deg=None):
    """Parse a single form expression on R^dim; ``"0"`` needs ``deg``."""
    p = _Parser(text, params)
    terms = p.expr()
    p.finish()
    form = _assemble(p, terms, dim, deg)
    if form is None:
        raise ParseError("cannot infer the degree of the zero form; pass deg", p.text, 0)
    return form


def parse_tuple(text, params=None, deg=2):
    """Parse ``(expr, expr, ...)`` into a list of forms of degree ``deg``."""
    p = _Parser(text, params)
    exprs = p.tuple_()
    dim = len(exprs)
    return [_assemble(p, terms, dim, deg) for terms in exprs]


def format_coefficient(c):
    return f"{c:.17G}"


def format_tuple(forms):
    """Canonical text of a list of 2-forms; inverse of :func:`parse_tuple`."""
    parts = []
    for f in forms:
        items = []
        for idx, v in f.terms.items():
            name = "e" + "".join(str(i) for i in idx)
            mag = abs(v)
            body = name if mag == 1.0 else f"{format_coefficient(mag)}*{name}"
            items.append(("-" if v < 0 else "+", body))
        if not items:
            parts.append("0")
            continue
        s = ("-" if items[0][0] == "-" else "") + items[0][1]
        s += "".join(f"{sg}{b}" for sg, b in items[1:])
        parts.append(s)
    return "(" + ",".join(parts) + ")"
