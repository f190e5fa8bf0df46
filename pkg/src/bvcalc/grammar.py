"""Textual grammar for expressions and model files.

The printer emits canonical forms; ``parse_expr(print(e)) == e`` for every
canonical expression.  Grammar sketch:

    expr    := term (('+'|'-') term)*
    term    := '-'* factor ('*' factor)*
    factor  := atom ('^' int)?
    atom    := rational | 'i' | 'hbar' | ident suffix?
             | 'dag' '(' ident ')' suffix?
             | ('sin'|'cos'|'exp') '(' factor-jetvar ')'
             | 'D' '[' int ']' '(' expr ')'
             | 'at' '(' expr ')'
             | 'frz' '[' label ':' coords (';' label ':' coords)* ']' '(' expr ')'
             | '(' expr ')'
    suffix  := '_' ('{' coord+ '}' | x-run) | "'"+

Coordinates are x1..xn; for a one-dimensional base the printer uses the
compact run form q_x, q_xx, ...
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import List, Tuple

from .coeff import Coefficient
from .algebra import Atom, Attach, BaseVar, Expr, JetVar, Trig, make_attach


class ParseError(ValueError):
    def __init__(self, message: str, pos: int = -1, line: int = -1):
        loc = ""
        if line >= 0:
            loc = f" (line {line})"
        elif pos >= 0:
            loc = f" (column {pos + 1})"
        super().__init__(message + loc)
        self.pos = pos
        self.line = line


# ---------------------------------------------------------------------------
# printer


def _gauss_str(re_part: Fraction, im_part: Fraction) -> str:
    if im_part == 0:
        return str(re_part)
    if re_part == 0:
        if im_part == 1:
            return "i"
        if im_part == -1:
            return "-i"
        return f"{im_part}*i"
    sign = "+" if im_part > 0 else "-"
    mag = abs(im_part)
    istr = "i" if mag == 1 else f"{mag}*i"
    return f"({re_part} {sign} {istr})"


def format_coefficient(c: Coefficient) -> str:
    if c.is_zero():
        return "0"
    parts = []
    for d in sorted(c.terms):
        re_part, im_part = c.terms[d]
        g = _gauss_str(re_part, im_part)
        if d == 0:
            parts.append(g)
            continue
        h = "hbar" if d == 1 else f"hbar^{d}"
        if g == "1":
            parts.append(h)
        elif g == "-1":
            parts.append(f"-{h}")
        else:
            parts.append(f"{g}*{h}")
    out = parts[0]
    for p in parts[1:]:
        if p.startswith("-"):
            out += " - " + p[1:]
        else:
            out += " + " + p
    return out


def _coeff_prefix(c: Coefficient) -> str:
    """Coefficient rendered as a leading factor ('' for 1, '-' for -1)."""
    if c == Coefficient.one():
        return ""
    if c == -Coefficient.one():
        return "-"
    s = format_coefficient(c)
    if len(c.terms) > 1 or " " in s:
        return f"({s})*"
    return f"{s}*"


def _index_tokens(index: Tuple[int, ...]) -> List[str]:
    toks = []
    for i, k in enumerate(index):
        toks.extend([f"x{i + 1}"] * k)
    return toks


def _jet_str(a: JetVar) -> str:
    base = f"dag({a.field})" if a.dagger else a.field
    order = sum(a.index)
    if order == 0:
        return base
    if len(a.index) == 1:
        return base + "_" + "x" * order
    return base + "_{" + " ".join(_index_tokens(a.index)) + "}"


def format_atom(a: Atom) -> str:
    if isinstance(a, JetVar):
        return _jet_str(a)
    if isinstance(a, BaseVar):
        return f"x{a.coord + 1}"
    if isinstance(a, Trig):
        return f"{a.tag}({_jet_str(a.arg)})"
    if isinstance(a, Attach):
        inner = format_expr(a.inner)
        if not a.pending:
            return f"at({inner})"
        specs = "; ".join(
            f"{lab}:{' '.join(_index_tokens(idx))}" for lab, idx in a.pending
        )
        return f"frz[{specs}]({inner})"
    raise TypeError(f"unknown atom {a!r}")


def format_expr(e: Expr) -> str:
    if e.is_zero():
        return "0"
    pieces = []
    for key in sorted(e.terms):
        m = e.terms[key]
        factors = []
        for a, k in m.factors():
            s = format_atom(a)
            factors.append(s if k == 1 else f"{s}^{k}")
        if factors:
            body = _coeff_prefix(m.coeff) + "*".join(factors)
        else:
            s = format_coefficient(m.coeff)
            body = f"({s})" if " " in s else s
        pieces.append(body)
    out = pieces[0]
    for p in pieces[1:]:
        if p.startswith("-"):
            out += " - " + p[1:]
        else:
            out += " + " + p
    return out


# ---------------------------------------------------------------------------
# tokenizer

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<ident>[A-Za-z][A-Za-z0-9]*)"
    r"|(?P<op>[-+*^()\[\]{}_;:=',]))"
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise ParseError(f"unexpected character {stripped[0]!r}", pos)
        if m.lastgroup is not None:
            kind = m.lastgroup
            tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, model):
        self.text = text
        self.model = model
        self.tokens = _tokenize(text)
        self.i = 0

    # -- token helpers ----------------------------------------------

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, value: str):
        kind, val, pos = self.next()
        if val != value:
            raise ParseError(f"expected {value!r}, found {val or 'end of input'!r}", pos)

    def at(self, value: str) -> bool:
        return self.peek()[1] == value

    # -- grammar -----------------------------------------------------

    def parse(self) -> Expr:
        e = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(f"trailing input starting at {val!r}", pos)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.next()[1]
            t = self.term()
            e = e + t if op == "+" else e - t
        return e

    def term(self) -> Expr:
        sign = 1
        while self.at("-"):
            self.next()
            sign = -sign
        e = self.factor()
        while self.at("*"):
            self.next()
            neg = False
            while self.at("-"):
                self.next()
                neg = not neg
            f = self.factor()
            e = e * (-f if neg else f)
        return e if sign > 0 else -e

    def factor(self) -> Expr:
        e = self.atom()
        if self.at("^"):
            self.next()
            neg = False
            if self.at("-"):
                self.next()
                neg = True
            kind, val, pos = self.next()
            if kind != "num" or "/" in val:
                raise ParseError("exponent must be an integer", pos)
            n = int(val)
            if neg:
                # negative powers only for invertible scalars
                if len(e.terms) != 1 or next(iter(e.monomials())).factors():
                    raise ParseError("negative exponent on a non-scalar", pos)
                c = next(iter(e.monomials())).coeff
                return Expr.scalar(_coeff_pow(c.inverse(), n))
            return e ** n
        return e

    def atom(self) -> Expr:
        kind, val, pos = self.next()
        if kind == "num":
            if "/" in val:
                a, b = val.split("/")
                return Expr.scalar(Fraction(int(a), int(b)))
            return Expr.scalar(int(val))
        if val == "(":
            e = self.expr()
            self.expect(")")
            return e
        if kind != "ident":
            raise ParseError(f"unexpected token {val!r}", pos)
        if val == "i":
            return Expr.scalar(Coefficient.imag_unit())
        if val == "hbar":
            return Expr.scalar(Coefficient.hbar())
        if val in ("sin", "cos", "exp"):
            self.expect("(")
            arg = self.jetvar_atom()
            self.expect(")")
            try:
                return Expr.from_atom(Trig(val, arg))
            except ValueError as exc:
                raise ParseError(str(exc), pos)
        if val == "dag":
            self.expect("(")
            kind2, name, pos2 = self.next()
            if kind2 != "ident":
                raise ParseError("expected field name in dag(...)", pos2)
            self.expect(")")
            index = self.opt_suffix()
            return self.model.jet(name, index, dagger=True)
        if val == "D":
            self.expect("[")
            kind2, num, pos2 = self.next()
            if kind2 != "num" or "/" in num:
                raise ParseError("expected coordinate number in D[...]", pos2)
            j = int(num)
            if not 1 <= j <= self.model.base_dim:
                raise ParseError(f"coordinate {j} out of range", pos2)
            self.expect("]")
            self.expect("(")
            e = self.expr()
            self.expect(")")
            from .jetcalc import total_derivative
            return total_derivative(e, j - 1)
        if val == "at":
            self.expect("(")
            e = self.expr()
            self.expect(")")
            return make_attach((), e)
        if val == "frz":
            self.expect("[")
            pending = [self.pending_spec()]
            while self.at(";"):
                self.next()
                pending.append(self.pending_spec())
            self.expect("]")
            self.expect("(")
            e = self.expr()
            self.expect(")")
            return make_attach(tuple(pending), e)
        if re.fullmatch(r"x\d+", val):
            j = int(val[1:])
            if not 1 <= j <= self.model.base_dim:
                raise ParseError(f"coordinate {val} out of range", pos)
            return self.model.x(j - 1)
        # jet variable
        index = self.opt_suffix()
        try:
            return self.model.jet(val, index)
        except KeyError:
            raise ParseError(f"unknown field {val!r}", pos)

    def jetvar_atom(self) -> JetVar:
        kind, val, pos = self.next()
        dagger = False
        if val == "dag":
            self.expect("(")
            kind, val, pos = self.next()
            if kind != "ident":
                raise ParseError("expected field name in dag(...)", pos)
            self.expect(")")
            dagger = True
        elif kind != "ident":
            raise ParseError("expected a jet variable", pos)
        index = self.opt_suffix()
        try:
            return self.model.jet_atom(val, index, dagger)
        except KeyError:
            raise ParseError(f"unknown field {val!r}", pos)

    def pending_spec(self):
        kind, val, pos = self.next()
        if kind != "num" or "/" in val:
            raise ParseError("expected channel label", pos)
        self.expect(":")
        idx = [0] * self.model.base_dim
        saw = False
        while True:
            kind2, val2, pos2 = self.peek()
            if kind2 == "ident" and re.fullmatch(r"x\d+", val2):
                self.next()
                j = int(val2[1:])
                if not 1 <= j <= self.model.base_dim:
                    raise ParseError(f"coordinate {val2} out of range", pos2)
                idx[j - 1] += 1
                saw = True
            else:
                break
        if not saw:
            raise ParseError("empty multi-index in frz[...]", pos)
        return (int(val), tuple(idx))

    def opt_suffix(self) -> Tuple[int, ...]:
        n = self.model.base_dim
        idx = [0] * n
        if self.at("'"):
            while self.at("'"):
                self.next()
                idx[0] += 1
            return tuple(idx)
        if not self.at("_"):
            return tuple(idx)
        self.next()
        kind, val, pos = self.next()
        if val == "{":
            saw = False
            while True:
                kind2, val2, pos2 = self.next()
                if val2 == "}":
                    break
                if kind2 != "ident" or not re.fullmatch(r"x\d+", val2):
                    raise ParseError(f"expected coordinate in index, found {val2!r}", pos2)
                j = int(val2[1:])
                if not 1 <= j <= n:
                    raise ParseError(f"coordinate {val2} out of range", pos2)
                idx[j - 1] += 1
                saw = True
            if not saw:
                raise ParseError("empty multi-index", pos)
            return tuple(idx)
        if kind == "ident" and re.fullmatch(r"x+", val):
            if n != 1:
                raise ParseError("run-form index q_xx needs base dimension 1", pos)
            idx[0] = len(val)
            return tuple(idx)
        raise ParseError(f"malformed derivative suffix at {val!r}", pos)


def _coeff_pow(c: Coefficient, n: int) -> Coefficient:
    out = Coefficient.one()
    for _ in range(n):
        out = out * c
    return out


def parse_expr(text: str, model) -> Expr:
    return _Parser(text, model).parse()


# ---------------------------------------------------------------------------
# model files


def parse_model_file(text: str):
    """Parse a model file; returns (BvModel, sections) where sections maps a
    section name to {(field, dagger): raw trig-polynomial string}."""
    from .jetcalc import BvModel

    base_dim = None
    fields = []
    sections = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if line == "[base]":
                current = "base"
            elif line == "[fields]":
                current = "fields"
            elif line == "[sections]":
                current = "sections"
            else:
                raise ParseError(f"unknown section header {line!r}", line=lineno)
            continue
        if current == "base":
            m = re.fullmatch(r"dim\s*=\s*(\d+)", line)
            if not m:
                raise ParseError(f"expected 'dim = n', found {line!r}", line=lineno)
            base_dim = int(m.group(1))
        elif current == "fields":
            m = re.fullmatch(r"([A-Za-z][A-Za-z0-9]*)\s+ghost\s*=\s*(-?\d+)", line)
            if not m:
                raise ParseError(
                    f"expected '<name> ghost = <int>', found {line!r}", line=lineno
                )
            fields.append((m.group(1), int(m.group(2))))
        elif current == "sections":
            m = re.fullmatch(
                r"([A-Za-z][A-Za-z0-9]*)\s*:\s*(dag\(([A-Za-z][A-Za-z0-9]*)\)|[A-Za-z][A-Za-z0-9]*)\s*=\s*(.+)",
                line,
            )
            if not m:
                raise ParseError(
                    f"expected '<section>: <field> = <trig poly>', found {line!r}",
                    line=lineno,
                )
            sec = m.group(1)
            if m.group(3):
                key = (m.group(3), True)
            else:
                key = (m.group(2), False)
            sections.setdefault(sec, {})[key] = m.group(4).strip()
        else:
            raise ParseError(f"content outside any section: {line!r}", line=lineno)
    if base_dim is None:
        raise ParseError("missing [base] section with 'dim = n'", line=0)
    if not fields:
        raise ParseError("missing [fields] section", line=0)
    return BvModel(base_dim, fields), sections
