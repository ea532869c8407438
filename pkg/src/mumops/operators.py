"""
Differential operators in theta normal form ``sum_k t^k P_k(theta)``.

``theta = t d/dt`` and the commutation rule ``theta t^k = t^k (theta + k)``
keep every product in normal form.  Also here: the operator grammar parser,
log-series and their action, and exact annihilator reconstruction.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial, gcd, lcm
from typing import Iterable, Sequence

from .series import RationalSeries, SeriesError, as_fraction

ZERO = Fraction(0)
ONE = Fraction(1)


def _trim(cs: list[Fraction]) -> tuple[Fraction, ...]:
    while cs and cs[-1] == 0:
        cs.pop()
    return tuple(cs)


def _fmt_rational(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"({c})"


class ThetaPolynomial:
    """Polynomial in one variable with rational coefficients; index = power."""

    __slots__ = ("_c",)

    def __init__(self, coeffs: Iterable = ()):
        self._c = _trim([as_fraction(c) for c in coeffs])

    @classmethod
    def constant(cls, c) -> ThetaPolynomial:
        return cls([c])

    @classmethod
    def theta(cls) -> ThetaPolynomial:
        return cls([0, 1])

    @classmethod
    def from_roots(cls, roots: Iterable, lead=1) -> ThetaPolynomial:
        p = cls([lead])
        for r in roots:
            p = p * cls([-as_fraction(r), 1])
        return p

    @property
    def coeffs(self) -> tuple[Fraction, ...]:
        return self._c

    @property
    def degree(self) -> int:
        return len(self._c) - 1

    def is_zero(self) -> bool:
        return not self._c

    def __getitem__(self, i: int) -> Fraction:
        return self._c[i] if 0 <= i < len(self._c) else ZERO

    def leading(self) -> Fraction:
        return self._c[-1] if self._c else ZERO

    def __eq__(self, other) -> bool:
        if isinstance(other, ThetaPolynomial):
            return self._c == other._c
        return NotImplemented

    def __hash__(self):
        return hash(self._c)

    def __add__(self, other: ThetaPolynomial) -> ThetaPolynomial:
        n = max(len(self._c), len(other._c))
        return ThetaPolynomial([self[i] + other[i] for i in range(n)])

    def __neg__(self) -> ThetaPolynomial:
        return ThetaPolynomial([-c for c in self._c])

    def __sub__(self, other: ThetaPolynomial) -> ThetaPolynomial:
        return self + (-other)

    def scale(self, c) -> ThetaPolynomial:
        c = as_fraction(c)
        return ThetaPolynomial([c * x for x in self._c])

    def __mul__(self, other) -> ThetaPolynomial:
        if not isinstance(other, ThetaPolynomial):
            return self.scale(other)
        if not self._c or not other._c:
            return ThetaPolynomial()
        out = [ZERO] * (len(self._c) + len(other._c) - 1)
        for i, a in enumerate(self._c):
            if a:
                for j, b in enumerate(other._c):
                    out[i + j] += a * b
        return ThetaPolynomial(out)

    __rmul__ = scale

    def __pow__(self, k: int) -> ThetaPolynomial:
        out = ThetaPolynomial([1])
        for _ in range(k):
            out = out * self
        return out

    def __call__(self, x) -> Fraction:
        acc = ZERO
        for c in reversed(self._c):
            acc = acc * x + c
        return acc

    def affine(self, a, b) -> ThetaPolynomial:
        """``P(a*theta + b)``."""
        lin = ThetaPolynomial([b, a])
        acc = ThetaPolynomial()
        for c in reversed(self._c):
            acc = acc * lin + ThetaPolynomial([c])
        return acc

    def shift(self, b) -> ThetaPolynomial:
        return self.affine(1, b)

    def derivative(self) -> ThetaPolynomial:
        return ThetaPolynomial([i * c for i, c in enumerate(self._c)][1:])

    def to_text(self, var: str = "theta") -> str:
        if not self._c:
            return "0"
        parts = []
        for i in range(len(self._c) - 1, -1, -1):
            c = self._c[i]
            if not c:
                continue
            mono = "" if i == 0 else (var if i == 1 else f"{var}^{i}")
            a = abs(c)
            if mono:
                body = mono if a == 1 else f"{_fmt_rational(a)}*{mono}"
            else:
                body = _fmt_rational(a)
            parts.append(("-" if c < 0 else "+", body))
        s = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            s += f" {sign} {body}"
        return s

    def __repr__(self) -> str:
        return f"ThetaPolynomial({self.to_text()})"


class LogSeries:
    """``sum_j ell^j F_j(t)`` where ell is a formal logarithm of t."""

    __slots__ = ("_parts",)

    def __init__(self, parts: Sequence[RationalSeries]):
        parts = list(parts)
        if not parts:
            raise SeriesError("LogSeries needs at least one part")
        n = min(p.truncation for p in parts)
        parts = [p.truncate(n) for p in parts]
        while len(parts) > 1 and parts[-1].is_zero():
            parts.pop()
        self._parts = tuple(parts)

    @property
    def parts(self) -> tuple[RationalSeries, ...]:
        return self._parts

    @property
    def truncation(self) -> int:
        return self._parts[0].truncation

    @property
    def log_degree(self) -> int:
        return len(self._parts) - 1

    def __getitem__(self, j: int) -> RationalSeries:
        if 0 <= j < len(self._parts):
            return self._parts[j]
        return RationalSeries.zero(self.truncation)

    def __add__(self, other: LogSeries) -> LogSeries:
        n = max(len(self._parts), len(other._parts))
        return LogSeries([self[j] + other[j] for j in range(n)])

    def scale(self, c) -> LogSeries:
        return LogSeries([p * c for p in self._parts])

    def is_zero(self) -> bool:
        return all(p.is_zero() for p in self._parts)

    def is_constant(self) -> bool:
        """True when ell-free and t-free."""
        p0 = self._parts[0]
        return len(self._parts) == 1 and all(c == 0 for c in p0.coeffs[1:])

    def __repr__(self) -> str:
        return f"LogSeries(log_degree={self.log_degree}, truncation={self.truncation})"


class ThetaOperator:
    """Operator ``sum_k t^k P_k(theta)`` stored as its blocks P_0..P_K."""

    __slots__ = ("_blocks",)

    def __init__(self, blocks: Iterable[ThetaPolynomial]):
        bs = [b if isinstance(b, ThetaPolynomial) else ThetaPolynomial(b) for b in blocks]
        while bs and bs[-1].is_zero():
            bs.pop()
        self._blocks = tuple(bs)

    @classmethod
    def theta(cls) -> ThetaOperator:
        return cls([ThetaPolynomial.theta()])

    @classmethod
    def t(cls) -> ThetaOperator:
        return cls([ThetaPolynomial(), ThetaPolynomial([1])])

    @classmethod
    def constant(cls, c) -> ThetaOperator:
        return cls([ThetaPolynomial([c])])

    @property
    def blocks(self) -> tuple[ThetaPolynomial, ...]:
        return self._blocks

    def block(self, k: int) -> ThetaPolynomial:
        return self._blocks[k] if 0 <= k < len(self._blocks) else ThetaPolynomial()

    @property
    def t_degree(self) -> int:
        return len(self._blocks) - 1

    @property
    def order(self) -> int:
        return max((b.degree for b in self._blocks), default=-1)

    def is_zero(self) -> bool:
        return not self._blocks

    def __eq__(self, other) -> bool:
        if isinstance(other, ThetaOperator):
            return self._blocks == other._blocks
        return NotImplemented

    def __hash__(self):
        return hash(self._blocks)

    # algebra

    def __add__(self, other: ThetaOperator) -> ThetaOperator:
        n = max(len(self._blocks), len(other._blocks))
        return ThetaOperator([self.block(k) + other.block(k) for k in range(n)])

    def __neg__(self) -> ThetaOperator:
        return ThetaOperator([-b for b in self._blocks])

    def __sub__(self, other: ThetaOperator) -> ThetaOperator:
        return self + (-other)

    def scale(self, c) -> ThetaOperator:
        return ThetaOperator([b.scale(c) for b in self._blocks])

    def __mul__(self, other) -> ThetaOperator:
        if not isinstance(other, ThetaOperator):
            return self.scale(other)
        if self.is_zero() or other.is_zero():
            return ThetaOperator([])
        out = [ThetaPolynomial() for _ in range(len(self._blocks) + len(other._blocks) - 1)]
        # (t^a P(theta)) (t^b Q(theta)) = t^(a+b) P(theta+b) Q(theta)
        for b, q in enumerate(other._blocks):
            if q.is_zero():
                continue
            for a, p in enumerate(self._blocks):
                if not p.is_zero():
                    out[a + b] = out[a + b] + p.shift(b) * q
        return ThetaOperator(out)

    def __rmul__(self, c) -> ThetaOperator:
        return self.scale(c)

    def __pow__(self, k: int) -> ThetaOperator:
        out = ThetaOperator.constant(1)
        for _ in range(k):
            out = out * self
        return out

    # action on series

    def apply(self, f: RationalSeries) -> RationalSeries:
        """Exact ``L f``; every output coefficient up to f's truncation is known."""
        T = f.truncation
        out = [ZERO] * (T + 1)
        for k, p in enumerate(self._blocks):
            if p.is_zero():
                continue
            for m in range(k, T + 1):
                c = f[m - k]
                if c:
                    out[m] += p(m - k) * c
        return RationalSeries(out, T)

    def apply_log(self, F: LogSeries) -> LogSeries:
        """Action on a log-series: theta acts as theta_t + d/d(ell)."""
        n = F.log_degree
        T = F.truncation
        result = [RationalSeries.zero(T) for _ in range(n + 1)]
        for k, p in enumerate(self._blocks):
            if p.is_zero():
                continue
            deriv = p
            for i in range(n + 1):
                if deriv.is_zero():
                    break
                block = ThetaOperator([ThetaPolynomial()] * k + [deriv])
                fi = factorial(i)
                for j in range(i, n + 1):
                    g = F[j]
                    if g.is_zero():
                        continue
                    term = block.apply(g)
                    coef = Fraction(factorial(j), factorial(j - i) * fi)
                    result[j - i] = result[j - i] + term * coef
                deriv = deriv.derivative()
        return LogSeries(result)

    # structural transformations

    def borel_shift(self) -> ThetaOperator:
        """``theta * L`` in normal form."""
        return ThetaOperator.theta() * self

    def adjoint(self) -> ThetaOperator:
        """Formal adjoint, blockwise ``t^k P_k(-theta-k-1)``."""
        return ThetaOperator([p.affine(-1, -k - 1) for k, p in enumerate(self._blocks)])

    def is_mum(self) -> bool:
        if self.is_zero():
            return False
        p0 = self.block(0)
        n = self.order
        return p0.degree == n and all(c == 0 for c in p0.coeffs[:-1])

    def monic(self) -> ThetaOperator:
        lead = self.block(0).leading()
        if lead == 0:
            raise ValueError("P_0 vanishes; cannot normalise")
        return self.scale(1 / lead)

    def primitive(self) -> ThetaOperator:
        """Scale to coprime integer coefficients with positive leading P_0 coefficient."""
        coeffs = [c for b in self._blocks for c in b.coeffs if c]
        if not coeffs:
            return self
        den = lcm(*(c.denominator for c in coeffs))
        num = 0
        for c in coeffs:
            num = gcd(num, c.numerator * (den // c.denominator))
        s = Fraction(den, num)
        lead = self.block(0).leading() or coeffs[-1]
        if lead < 0:
            s = -s
        return self.scale(s)

    def pullback(self, k: int) -> ThetaOperator:
        """Substitute ``t = s^k`` and renormalise P_0 to be monic."""
        if k < 1:
            raise ValueError("pullback exponent must be positive")
        inv = Fraction(1, k)
        blocks = [ThetaPolynomial()] * (k * self.t_degree + 1)
        blocks = list(blocks)
        for j, p in enumerate(self._blocks):
            blocks[k * j] = p.affine(inv, 0)
        return ThetaOperator(blocks).monic()

    # d/dt conversion

    def to_dt(self) -> list[list[Fraction]]:
        """Coefficients a_i(t) (as coefficient lists) with ``L = sum a_i(t) D^i``."""
        n = self.order
        out = [[ZERO] * (self.t_degree + n + 1) for _ in range(n + 1)]
        for k, p in enumerate(self._blocks):
            for j, c in enumerate(p.coeffs):
                if not c:
                    continue
                for i in range(j + 1):
                    s = stirling2(j, i)
                    if s:
                        out[i][k + i] += c * s
        return [list(_trim(a)) for a in out]

    @classmethod
    def from_dt(cls, coeffs: Sequence[Sequence]) -> ThetaOperator:
        """Normal form of ``sum_i a_i(t) D^i`` up to a left factor ``t^e``."""
        polys = [[as_fraction(c) for c in a] for a in coeffs]
        shift = 0
        for i, a in enumerate(polys):
            v = next((e for e, c in enumerate(a) if c), None)
            if v is not None:
                shift = max(shift, i - v)
        # t^shift * a_i(t) * t^-i * falling(theta, i)
        terms: dict[int, ThetaPolynomial] = {}
        for i, a in enumerate(polys):
            fall = ThetaPolynomial.from_roots(range(i))
            for e, c in enumerate(a):
                if c:
                    p = e + shift - i
                    terms[p] = terms.get(p, ThetaPolynomial()) + fall.scale(c)
        lo = min((p for p, b in terms.items() if not b.is_zero()), default=0)
        size = max(terms, default=0) - lo + 1
        return cls([terms.get(lo + k, ThetaPolynomial()) for k in range(size)])

    # text

    def to_text(self) -> str:
        if self.is_zero():
            return "0"
        parts = []
        for k, p in enumerate(self._blocks):
            if p.is_zero():
                continue
            tpow = "" if k == 0 else ("t" if k == 1 else f"t^{k}")
            sign = "-" if p.leading() < 0 else "+"
            q = -p if sign == "-" else p
            nonzero = [c for c in q.coeffs if c]
            if not tpow:
                body = q.to_text()
                if sign == "-":
                    body = f"({body})"
            elif len(nonzero) == 1 and q.coeffs[-1] == 1:
                body = tpow if q.degree == 0 else f"{tpow}*{q.to_text()}"
            elif len(nonzero) == 1 and q.degree == 0:
                body = f"{_fmt_rational(q.coeffs[0])}*{tpow}"
            else:
                body = f"{tpow}*({q.to_text()})"
            parts.append((sign, body))
        s = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            s += f" {sign} {body}"
        return s

    def __str__(self) -> str:
        return self.to_text()

    def __repr__(self) -> str:
        return f"ThetaOperator({self.to_text()!r})"


def stirling2(n: int, k: int) -> int:
    if n == k:
        return 1
    if k == 0 or k > n:
        return 0
    row = [1] + [0] * k
    for i in range(1, n + 1):
        for j in range(min(i, k), 0, -1):
            row[j] = j * row[j] + row[j - 1]
        row[0] = 0
    return row[k]


def dt_adjoint(coeffs: Sequence[Sequence]) -> list[list[Fraction]]:
    """Adjoint ``sum (-1)^i D^i a_i`` of a d/dt-form operator, back in d/dt form."""
    polys = [[as_fraction(c) for c in a] for a in coeffs]
    n = len(polys) - 1
    width = max((len(a) for a in polys), default=0)
    out = [[ZERO] * width for _ in range(n + 1)]
    for i, a in enumerate(polys):
        sign = -1 if i % 2 else 1
        der = list(a)
        # D^i a = sum_r binom(i, r) a^(r) D^(i-r)
        for r in range(i + 1):
            for e, c in enumerate(der):
                out[i - r][e] += sign * comb(i, r) * c
            der = [e * c for e, c in enumerate(der)][1:]
    return [list(_trim(a)) for a in out]


def log_series_from_h(h: Sequence[RationalSeries], j: int) -> LogSeries:
    """``sum_k binom(j,k) h_k ell^(j-k)``."""
    return LogSeries([h[j - p] * comb(j, p) for p in range(j + 1)])


# ---------------------------------------------------------------- parser


class OperatorParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    toks = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(_Token("int", text[i:j], i))
            i = j
        elif text.startswith("theta", i):
            toks.append(_Token("theta", "theta", i))
            i += 5
        elif ch == "t" and not (i + 1 < n and (text[i + 1].isalnum() or text[i + 1] == "_")):
            toks.append(_Token("t", "t", i))
            i += 1
        elif ch in "+-*/^()":
            toks.append(_Token(ch, ch, i))
            i += 1
        else:
            raise OperatorParseError(f"unexpected character {ch!r}", i)
    toks.append(_Token("end", "", n))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> _Token:
        return self.toks[self.i]

    def take(self, kind: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            want = "end of input" if kind == "end" else repr(kind)
            got = "end of input" if tok.kind == "end" else repr(tok.text)
            raise OperatorParseError(f"expected {want}, found {got}", tok.pos)
        self.i += 1
        return tok

    def expr(self) -> ThetaOperator:
        sign = 1
        if self.peek().kind in "+-":
            sign = -1 if self.take(self.peek().kind).kind == "-" else 1
        acc = self.term().scale(sign)
        while self.peek().kind in ("+", "-"):
            op = self.take(self.peek().kind).kind
            rhs = self.term()
            acc = acc + rhs if op == "+" else acc - rhs
        return acc

    def term(self) -> ThetaOperator:
        acc = self.factor()
        while True:
            kind = self.peek().kind
            if kind == "*":
                self.take("*")
                acc = acc * self.factor()
            elif kind in ("int", "theta", "t", "("):
                acc = acc * self.factor()
            elif kind == "/":
                raise OperatorParseError("division is only allowed inside rational literals", self.peek().pos)
            else:
                return acc

    def factor(self) -> ThetaOperator:
        base = self.base()
        if self.peek().kind == "^":
            self.take("^")
            tok = self.peek()
            if tok.kind != "int":
                raise OperatorParseError("exponent must be a non-negative integer", tok.pos)
            self.take("int")
            return base ** int(tok.text)
        return base

    def base(self) -> ThetaOperator:
        tok = self.peek()
        if tok.kind == "theta":
            self.take("theta")
            return ThetaOperator.theta()
        if tok.kind == "t":
            self.take("t")
            return ThetaOperator.t()
        if tok.kind == "int":
            self.take("int")
            value = Fraction(int(tok.text))
            if self.peek().kind == "/":
                slash = self.take("/")
                den = self.peek()
                if den.kind != "int":
                    raise OperatorParseError("only integer denominators are allowed", slash.pos)
                self.take("int")
                if int(den.text) == 0:
                    raise OperatorParseError("zero denominator", den.pos)
                value /= int(den.text)
            return ThetaOperator.constant(value)
        if tok.kind == "(":
            self.take("(")
            inner = self.expr()
            self.take(")")
            return inner
        if tok.kind == "/":
            raise OperatorParseError("division is only allowed inside rational literals", tok.pos)
        what = "end of input" if tok.kind == "end" else repr(tok.text)
        raise OperatorParseError(f"unexpected {what}", tok.pos)


def parse_operator(text: str) -> ThetaOperator:
    """Parse the theta grammar into normal form."""
    p = _Parser(text)
    if p.peek().kind == "end":
        raise OperatorParseError("empty operator expression", p.peek().pos)
    op = p.expr()
    p.take("end")
    return op


def parse_polynomial(text: str, var: str = "t") -> list[Fraction]:
    """Polynomial in ``t`` (same grammar, no theta) as a coefficient list."""
    op = parse_operator(text)
    if op.order > 0:
        raise OperatorParseError("theta is not allowed in a polynomial", text.find("theta"))
    return [b[0] for b in op.blocks]


# ---------------------------------------------------------------- linear algebra


def _rref(rows: list[list[Fraction]], ncols: int) -> tuple[list[list[Fraction]], list[int]]:
    rows = [r[:] for r in rows]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


@dataclass(frozen=True)
class AnnihilatorResult:
    operator: ThetaOperator
    ambiguous: bool
    nullity: int


def annihilator_search(f: RationalSeries, order: int, degree: int, margin: int = 8) -> AnnihilatorResult | None:
    """Find ``sum_{k<=degree} t^k P_k`` of order *order*, P_0 monic of that degree, killing f.

    Free parameters are set to zero with unknowns ordered by increasing t-power,
    so higher t-blocks are dropped whenever the solution is not unique.
    """
    n, K = order, degree
    need = (n + 1) * (K + 1) + margin
    if f.truncation + 1 < need:
        raise ValueError(f"truncation {f.truncation} too small for order {n}, degree {K}: need {need - 1}")
    cols = [(k, i) for k in range(K + 1) for i in range(n + 1) if (k, i) != (0, n)]
    rows = []
    for m in range(f.truncation + 1):
        row = []
        for k, i in cols:
            row.append(Fraction((m - k) ** i) * f[m - k] if m >= k else ZERO)
        rhs = -Fraction(m ** n) * f[m]
        row.append(rhs)
        rows.append(row)
    red, pivots = _rref(rows, len(cols) + 1)
    if len(cols) in pivots:
        return None
    sol = [ZERO] * len(cols)
    for row, c in zip(red, pivots):
        sol[c] = row[-1]
    blocks = [[ZERO] * (n + 1) for _ in range(K + 1)]
    blocks[0][n] = ONE
    for (k, i), v in zip(cols, sol):
        blocks[k][i] = v
    nullity = len(cols) + 1 - len(pivots)
    return AnnihilatorResult(ThetaOperator([ThetaPolynomial(b) for b in blocks]), nullity > 1, nullity)
