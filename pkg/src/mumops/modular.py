"""
Exact q-expansions of eta quotients, Eisenstein series, theta constants,
character-twisted Lambert sums and the j-function.

A :class:`QExpansion` is ``q^offset * series(q)``.  Generators take an
argument multiplier m, meaning the function evaluated at ``m * tau``.
A small expression language (see :func:`evaluate`) combines them.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb

from .series import RationalSeries, SeriesError, as_fraction


class QExpansionError(ValueError):
    pass


class QExpansion:
    __slots__ = ("offset", "series")

    def __init__(self, offset, series: RationalSeries):
        self.offset = as_fraction(offset)
        self.series = series

    @property
    def truncation(self) -> int:
        return self.series.truncation

    @property
    def precision(self) -> Fraction:
        """Exponent of the first unknown coefficient."""
        return self.offset + self.series.truncation + 1

    def coefficient(self, exponent) -> Fraction:
        k = as_fraction(exponent) - self.offset
        if k.denominator != 1 or k < 0:
            return Fraction(0)
        return self.series[int(k)]

    def normalized(self) -> QExpansion:
        """Move the valuation of the series into the offset."""
        v = self.series.valuation()
        if not v:
            return self
        return QExpansion(self.offset + v, self.series.divide_by_t(v))

    def _aligned(self, other: QExpansion) -> tuple[Fraction, RationalSeries, RationalSeries]:
        diff = other.offset - self.offset
        if diff.denominator != 1:
            raise QExpansionError(f"offsets {self.offset} and {other.offset} differ by a non-integer")
        a, b = self.series, other.series
        d = int(diff)
        if d >= 0:
            b = RationalSeries([0] * d + list(b.coeffs), b.truncation + d)
            return self.offset, a, b
        a = RationalSeries([0] * (-d) + list(a.coeffs), a.truncation - d)
        return other.offset, a, b

    def __add__(self, other) -> QExpansion:
        if not isinstance(other, QExpansion):
            other = constant(other, self.precision)
        off, a, b = self._aligned(other)
        return QExpansion(off, a + b)

    __radd__ = __add__

    def __neg__(self) -> QExpansion:
        return QExpansion(self.offset, -self.series)

    def __sub__(self, other) -> QExpansion:
        return self + (-other)

    def __rsub__(self, other) -> QExpansion:
        return (-self) + other

    def __mul__(self, other) -> QExpansion:
        if not isinstance(other, QExpansion):
            return QExpansion(self.offset, self.series * as_fraction(other))
        return QExpansion(self.offset + other.offset, self.series * other.series)

    __rmul__ = __mul__

    def inv(self) -> QExpansion:
        n = self.normalized()
        if n.series[0] == 0:
            raise QExpansionError("cannot invert an expansion with no known nonzero coefficient")
        return QExpansion(-n.offset, n.series.inv())

    def __truediv__(self, other) -> QExpansion:
        if not isinstance(other, QExpansion):
            return self * (1 / as_fraction(other))
        return self * other.inv()

    def __rtruediv__(self, other) -> QExpansion:
        return self.inv() * other

    def __pow__(self, k: int) -> QExpansion:
        if k < 0:
            return self.inv() ** (-k)
        return QExpansion(self.offset * k, self.series ** k)

    def __repr__(self) -> str:
        return f"QExpansion(offset={self.offset}, series={self.series!r})"


def constant(c, precision) -> QExpansion:
    """The constant c known up to (but excluding) exponent *precision*."""
    n = int(as_fraction(precision)) - 1
    return QExpansion(0, RationalSeries([c], max(n, 0)))


def as_qexpansion(s: RationalSeries) -> QExpansion:
    return QExpansion(0, s)


# ---------------------------------------------------------------- number theory


@lru_cache(maxsize=None)
def bernoulli(n: int) -> Fraction:
    """B_n with B_1 = -1/2."""
    B = [Fraction(1)]
    for m in range(1, n + 1):
        B.append(-sum(comb(m + 1, k) * B[k] for k in range(m)) / (m + 1))
    return B[n]


def sigma(n: int, k: int) -> int:
    return sum(d ** k for d in range(1, n + 1) if n % d == 0)


CHARACTERS: dict[str, tuple[int, ...]] = {
    # values on residues 0..p-1
    "chi-3": (0, 1, -1),
    "chi-4": (0, 1, 0, -1),
    "mod5a": (0, 3, 1, -1, -3),
    "mod5b": (0, 2, 1, -1, -2),
    "leg5": (0, 1, -1, -1, 1),
}


# ---------------------------------------------------------------- generators


def _dilate(s: RationalSeries, m: int, T: int) -> RationalSeries:
    return s.substitute_power(m, T) if m > 1 else s.truncate(T)


@lru_cache(maxsize=256)
def _euler_product(T: int) -> RationalSeries:
    # prod (1 - q^n) via the pentagonal number theorem
    out = [0] * (T + 1)
    k = 0
    while True:
        sign = -1 if k % 2 else 1
        hit = False
        for p in {k * (3 * k - 1) // 2, k * (3 * k + 1) // 2}:
            if p <= T:
                out[p] += sign
                hit = True
        if not hit:
            break
        k += 1
    return RationalSeries(out, T)


def eta(m: int, T: int) -> QExpansion:
    """Dedekind eta at m*tau."""
    return QExpansion(Fraction(m, 24), _dilate(_euler_product(T), m, T))


def eisenstein(k: int, m: int, T: int) -> QExpansion:
    """Normalised E_k(m*tau) = 1 - (2k/B_k) sum sigma_{k-1}(n) q^n, k in {2,4,6}."""
    if k not in (2, 4, 6):
        raise QExpansionError(f"unsupported Eisenstein weight {k}")
    c = -2 * k / bernoulli(k)
    base = RationalSeries([1] + [c * sigma(n, k - 1) for n in range(1, T + 1)], T)
    return QExpansion(0, _dilate(base, m, T))


def G2(m: int, T: int) -> QExpansion:
    return eisenstein(2, m, T) * Fraction(-1, 24)


def G4(m: int, T: int) -> QExpansion:
    return eisenstein(4, m, T) * Fraction(1, 240)


def theta3(m: int, T: int) -> QExpansion:
    """sum over integers n of q^(m n^2 / 2); needs m even for integral exponents."""
    if m % 2:
        raise QExpansionError("theta3(m) has half-integral exponents unless m is even")
    step = m // 2
    out = [0] * (T + 1)
    n = 0
    while step * n * n <= T:
        out[step * n * n] += 1 if n == 0 else 2
        n += 1
    return QExpansion(0, RationalSeries(out, T))


def theta2(m: int, T: int) -> QExpansion:
    """sum over integers n of q^(m (n+1/2)^2 / 2), offset m/8."""
    out = [0] * (T + 1)
    n = 0
    while m * n * (n + 1) // 2 <= T:
        out[m * n * (n + 1) // 2] += 2
        n += 1
    return QExpansion(Fraction(m, 8), RationalSeries(out, T))


def char_lambert(chi, weight: int, scale, m: int, T: int) -> QExpansion:
    """``1 + scale * sum chi(n) n^w q^n / (1 - q^n)`` at m*tau.

    *chi* is a name from :data:`CHARACTERS` or a tuple of values on residues.
    """
    table = _table(chi)
    p = len(table)
    scale = as_fraction(scale)
    out = [Fraction(0)] * (T + 1)
    out[0] = Fraction(1)
    for n in range(1, T + 1):
        c = table[n % p]
        if c:
            v = scale * c * n ** weight
            for e in range(n, T + 1, n):
                out[e] += v
    return QExpansion(0, _dilate(RationalSeries(out, T), m, T))


def _table(chi) -> tuple[int, ...]:
    if isinstance(chi, str):
        if chi not in CHARACTERS:
            raise QExpansionError(f"unknown character {chi!r}")
        return CHARACTERS[chi]
    return tuple(chi)


def char_product(chi, exponent, m: int, T: int) -> QExpansion:
    """``prod_n (1 - q^n)^(exponent * chi(n))`` at m*tau."""
    table = _table(chi)
    p = len(table)
    e = as_fraction(exponent)
    # log of the product is -sum_n a_n sum_r q^(nr)/r
    log = [Fraction(0)] * (T + 1)
    for n in range(1, T + 1):
        a = e * table[n % p]
        if a:
            for r in range(1, T // n + 1):
                log[n * r] -= a / r
    return QExpansion(0, _dilate(RationalSeries(log, T).exp(), m, T))


def j_invariant(T: int) -> QExpansion:
    """E_4^3 / eta^24, offset -1."""
    return eisenstein(4, 1, T) ** 3 / eta(1, T) ** 24


def qexp_generator(name: str, *args, truncation: int = 40) -> QExpansion:
    """Dispatch by generator name: eta, E2, E4, E6, G2, G4, theta2, theta3, char, charprod, q, j."""
    T = truncation
    if name == "eta":
        return eta(int(args[0]), T)
    if name in ("E2", "E4", "E6"):
        return eisenstein(int(name[1]), int(args[0]) if args else 1, T)
    if name == "G2":
        return G2(int(args[0]) if args else 1, T)
    if name == "G4":
        return G4(int(args[0]) if args else 1, T)
    if name == "theta2":
        return theta2(int(args[0]), T)
    if name == "theta3":
        return theta3(int(args[0]), T)
    if name == "char":
        chi, w, scale = args[:3]
        m = int(args[3]) if len(args) > 3 else 1
        return char_lambert(chi, int(w), scale, m, T)
    if name == "charprod":
        chi, e = args[:2]
        m = int(args[2]) if len(args) > 2 else 1
        return char_product(chi, e, m, T)
    if name == "q":
        return QExpansion(1, RationalSeries([1], T))
    if name == "j":
        return j_invariant(T)
    raise QExpansionError(f"unsupported generator {name!r}")


# ---------------------------------------------------------------- checking


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    exponent: Fraction | None = None
    lhs: Fraction | None = None
    rhs: Fraction | None = None
    message: str = ""

    def __bool__(self) -> bool:
        return self.ok


def identity_check(lhs: QExpansion, rhs: QExpansion, truncation: int | None = None) -> CheckResult:
    """Compare two expansions coefficient by coefficient over their common precision."""
    diff = rhs.offset - lhs.offset
    if diff.denominator != 1:
        return CheckResult(False, None, None, None, f"offsets {lhs.offset} and {rhs.offset} are incompatible")
    start = min(lhs.offset, rhs.offset)
    stop = min(lhs.precision, rhs.precision)
    if truncation is not None:
        stop = min(stop, start + truncation + 1)
    e = start
    while e < stop:
        a, b = lhs.coefficient(e), rhs.coefficient(e)
        if a != b:
            return CheckResult(False, e, a, b, f"first mismatch at q^{e}: {a} != {b}")
        e += 1
    return CheckResult(True, message=f"agree through q^{stop - 1}")


# ---------------------------------------------------------------- expressions

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_\-]*)|(?P<op>[-+*/^(),]))")


class _QParser:
    """expr := term (('+'|'-') term)*; term := factor (('*'|'/') factor)*;
    factor := unary ('^' ['-'] int)?; unary := '-' unary | atom;
    atom := number | call | '(' expr ')'."""

    def __init__(self, text: str, T: int):
        self.text = text
        self.T = T
        self.toks = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            mt = _TOKEN.match(text, pos)
            if not mt or mt.end() == pos:
                raise QExpansionError(f"bad character at position {pos} in {text!r}")
            kind = mt.lastgroup
            self.toks.append((kind, mt.group(kind), mt.start(kind)))
            pos = mt.end()
        self.toks.append(("end", "", len(text)))
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, value=None):
        tok = self.toks[self.i]
        if value is not None and tok[1] != value:
            raise QExpansionError(f"expected {value!r} at position {tok[2]} in {self.text!r}")
        self.i += 1
        return tok

    def parse(self):
        v = self.expr()
        if self.peek()[0] != "end":
            raise QExpansionError(f"trailing input at position {self.peek()[2]} in {self.text!r}")
        return v

    def expr(self):
        v = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            w = self.term()
            v = v + w if op == "+" else v - w
        return v

    def term(self):
        v = self.factor()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            w = self.factor()
            v = v * w if op == "*" else v / w
        return v

    def factor(self):
        v = self.unary()
        if self.peek()[1] == "^":
            self.take("^")
            neg = False
            if self.peek()[1] == "-":
                self.take("-")
                neg = True
            k = int(self.take()[1])
            return v ** (-k if neg else k)
        return v

    def unary(self):
        if self.peek()[1] == "-":
            self.take("-")
            return -self.unary()
        return self.atom()

    def atom(self):
        kind, val, pos = self.peek()
        if kind == "num":
            self.take()
            return Fraction(int(val))
        if val == "(":
            self.take("(")
            v = self.expr()
            self.take(")")
            return v
        if kind == "name":
            self.take()
            args = []
            if self.peek()[1] == "(":
                self.take("(")
                while self.peek()[1] != ")":
                    args.append(self.argument())
                    if self.peek()[1] == ",":
                        self.take(",")
                self.take(")")
            return qexp_generator(val, *args, truncation=self.T)
        raise QExpansionError(f"unexpected {val!r} at position {pos} in {self.text!r}")

    def argument(self):
        kind, val, pos = self.peek()
        if kind == "name" and val in CHARACTERS:
            self.take()
            return val
        v = self.expr()
        if isinstance(v, QExpansion):
            raise QExpansionError(f"generator argument at position {pos} must be a number")
        return v


def evaluate(text: str, truncation: int = 40) -> QExpansion:
    """Evaluate a q-expression such as ``eta(2)^6*eta(3)/(eta(1)^3*eta(6)^2)``.

    Generators: eta(m), E2(m), E4(m), E6(m), G2(m), G4(m), theta2(m),
    theta3(m), char(chi, w, scale[, m]), charprod(chi, e[, m]), q, j.  Rational constants are allowed.
    Extra internal precision covers negative offsets in denominators.
    """
    T = truncation
    v = _QParser(text, T + 8).parse()
    if isinstance(v, Fraction):
        return QExpansion(0, RationalSeries([v], T))
    keep = min(v.truncation, (T - v.offset).__floor__())
    if keep < 0:
        raise QExpansionError(f"expansion starts at q^{v.offset}, beyond truncation {T}")
    return QExpansion(v.offset, v.series.truncate(keep))
