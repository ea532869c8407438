"""
Truncated univariate power series with exact rational coefficients.

A :class:`RationalSeries` stores the coefficients of ``t^0 .. t^T`` and the
truncation order ``T``.  Coefficients of higher powers are unknown, never
implicitly zero, so every binary operation keeps the smaller truncation.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence

DEFAULT_TRUNCATION = 40


class SeriesError(ValueError):
    """Raised when an analytic primitive is applied outside its domain."""


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x)


def _common_scale(coeffs: Sequence[Fraction]) -> tuple[list[int], int]:
    # integer numerators over a shared denominator, for fast convolution
    den = 1
    for c in coeffs:
        if c.denominator != 1:
            den = lcm(den, c.denominator)
    if den == 1:
        return [c.numerator for c in coeffs], 1
    return [c.numerator * (den // c.denominator) for c in coeffs], den


def _convolve(a: Sequence[int], b: Sequence[int], n: int) -> list[int]:
    out = [0] * n
    nb = len(b)
    for i, ai in enumerate(a[:n]):
        if not ai:
            continue
        for j in range(min(nb, n - i)):
            bj = b[j]
            if bj:
                out[i + j] += ai * bj
    return out


class RationalSeries:
    """Power series ``sum c_m t^m + O(t^(T+1))`` over the rationals.

    Instances are immutable.  ``len(s.coeffs) == s.truncation + 1`` always.
    """

    __slots__ = ("_coeffs", "_trunc")

    def __init__(self, coeffs: Iterable, truncation: int | None = None):
        cs = [as_fraction(c) for c in coeffs]
        if truncation is None:
            truncation = len(cs) - 1
        if truncation < 0:
            raise SeriesError("truncation must be non-negative")
        if len(cs) > truncation + 1:
            cs = cs[: truncation + 1]
        else:
            cs.extend([Fraction(0)] * (truncation + 1 - len(cs)))
        self._coeffs = tuple(cs)
        self._trunc = truncation

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, truncation: int = DEFAULT_TRUNCATION) -> RationalSeries:
        return cls([], truncation)

    @classmethod
    def one(cls, truncation: int = DEFAULT_TRUNCATION) -> RationalSeries:
        return cls([1], truncation)

    @classmethod
    def monomial(cls, power: int, coeff=1, truncation: int = DEFAULT_TRUNCATION) -> RationalSeries:
        cs = [0] * (truncation + 1)
        if power <= truncation:
            cs[power] = coeff
        return cls(cs, truncation)

    @classmethod
    def variable(cls, truncation: int = DEFAULT_TRUNCATION) -> RationalSeries:
        return cls.monomial(1, 1, truncation)

    @classmethod
    def from_function(cls, fn, truncation: int = DEFAULT_TRUNCATION) -> RationalSeries:
        """Series whose m-th coefficient is ``fn(m)``."""
        return cls([fn(m) for m in range(truncation + 1)], truncation)

    # -- basic access -------------------------------------------------

    @property
    def coeffs(self) -> tuple[Fraction, ...]:
        return self._coeffs

    @property
    def truncation(self) -> int:
        return self._trunc

    def __getitem__(self, m: int) -> Fraction:
        if m < 0:
            return Fraction(0)
        if m > self._trunc:
            raise IndexError(f"coefficient t^{m} lies beyond truncation {self._trunc}")
        return self._coeffs[m]

    def __len__(self) -> int:
        return self._trunc + 1

    def __iter__(self):
        return iter(self._coeffs)

    def valuation(self) -> int | None:
        """Index of the first nonzero coefficient, or None if all known ones vanish."""
        for i, c in enumerate(self._coeffs):
            if c:
                return i
        return None

    def is_zero(self) -> bool:
        return self.valuation() is None

    def truncate(self, truncation: int) -> RationalSeries:
        if truncation > self._trunc:
            raise SeriesError(f"cannot extend truncation {self._trunc} to {truncation}")
        return RationalSeries(self._coeffs[: truncation + 1], truncation)

    def __eq__(self, other) -> bool:
        if isinstance(other, RationalSeries):
            return self._trunc == other._trunc and self._coeffs == other._coeffs
        return NotImplemented

    def __hash__(self):
        return hash((self._trunc, self._coeffs))

    def agrees(self, other: RationalSeries, upto: int | None = None) -> bool:
        """Coefficientwise equality up to the common (or given) truncation."""
        n = min(self._trunc, other.truncation)
        if upto is not None:
            n = min(n, upto)
        return all(self._coeffs[i] == other[i] for i in range(n + 1))

    def __repr__(self) -> str:
        shown = ", ".join(str(c) for c in self._coeffs[:8])
        more = ", ..." if self._trunc >= 8 else ""
        return f"RationalSeries([{shown}{more}], truncation={self._trunc})"

    def __str__(self) -> str:
        return format_series(self)

    # -- ring operations ----------------------------------------------

    def _coerce(self, other) -> RationalSeries:
        if isinstance(other, RationalSeries):
            return other
        return RationalSeries([other], self._trunc)

    def __add__(self, other) -> RationalSeries:
        other = self._coerce(other)
        n = min(self._trunc, other._trunc)
        return RationalSeries([self._coeffs[i] + other._coeffs[i] for i in range(n + 1)], n)

    __radd__ = __add__

    def __neg__(self) -> RationalSeries:
        return RationalSeries([-c for c in self._coeffs], self._trunc)

    def __sub__(self, other) -> RationalSeries:
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> RationalSeries:
        return self._coerce(other) - self

    def scale(self, c) -> RationalSeries:
        c = as_fraction(c)
        return RationalSeries([c * x for x in self._coeffs], self._trunc)

    def __mul__(self, other) -> RationalSeries:
        if not isinstance(other, RationalSeries):
            return self.scale(other)
        n = min(self._trunc, other._trunc)
        a, da = _common_scale(self._coeffs[: n + 1])
        b, db = _common_scale(other._coeffs[: n + 1])
        prod = _convolve(a, b, n + 1)
        den = da * db
        return RationalSeries([Fraction(x, den) for x in prod], n)

    def __rmul__(self, other) -> RationalSeries:
        return self.scale(other)

    def __truediv__(self, other) -> RationalSeries:
        if isinstance(other, RationalSeries):
            return self * other.inv()
        return self.scale(1 / as_fraction(other))

    def __pow__(self, k: int) -> RationalSeries:
        if not isinstance(k, int):
            return self.pow(k)
        if k < 0:
            return self.inv() ** (-k)
        result = RationalSeries.one(self._trunc)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def shift(self, k: int) -> RationalSeries:
        """Multiply by ``t^k``; the truncation order is unchanged."""
        if k < 0:
            raise SeriesError("negative shift; use divide_by_t")
        return RationalSeries([0] * k + list(self._coeffs[: self._trunc + 1 - k]), self._trunc)

    def divide_by_t(self, k: int = 1) -> RationalSeries:
        """Exact division by ``t^k``; the result loses k orders of truncation."""
        if any(self._coeffs[:k]):
            raise SeriesError(f"series is not divisible by t^{k}")
        if k > self._trunc:
            raise SeriesError("division by t exhausts the known coefficients")
        return RationalSeries(self._coeffs[k:], self._trunc - k)

    # -- analytic primitives ------------------------------------------

    def derivative(self) -> RationalSeries:
        """d/dt; truncation drops by one."""
        if self._trunc == 0:
            raise SeriesError("derivative of a series truncated at order 0")
        return RationalSeries([m * self._coeffs[m] for m in range(1, self._trunc + 1)], self._trunc - 1)

    def theta(self) -> RationalSeries:
        """Logarithmic derivative t d/dt, which keeps the truncation."""
        return RationalSeries([m * c for m, c in enumerate(self._coeffs)], self._trunc)

    def inv(self) -> RationalSeries:
        c0 = self._coeffs[0]
        if c0 == 0:
            raise SeriesError("inv: input has zero constant term")
        n = self._trunc
        out = [Fraction(0)] * (n + 1)
        out[0] = 1 / c0
        a = self._coeffs
        for m in range(1, n + 1):
            s = sum((a[k] * out[m - k] for k in range(1, m + 1) if a[k]), Fraction(0))
            out[m] = -s / c0
        return RationalSeries(out, n)

    def log(self) -> RationalSeries:
        if self._coeffs[0] != 1:
            raise SeriesError(f"log: input constant term is {self._coeffs[0]}, expected 1")
        # log f = integral of theta(f)/f, via f * g' relation coefficientwise
        return _integrate_theta(self.theta() * self.inv())

    def exp(self) -> RationalSeries:
        if self._coeffs[0] != 0:
            raise SeriesError(f"exp: input has nonzero constant term {self._coeffs[0]}")
        n = self._trunc
        d = self.theta()._coeffs
        out = [Fraction(0)] * (n + 1)
        out[0] = Fraction(1)
        # theta(E) = theta(f) * E
        for m in range(1, n + 1):
            s = sum((d[k] * out[m - k] for k in range(1, m + 1) if d[k]), Fraction(0))
            out[m] = s / m
        return RationalSeries(out, n)

    def pow(self, r) -> RationalSeries:
        """``f^r`` for rational r; needs constant term 1 unless r is a non-negative integer."""
        r = as_fraction(r)
        if r.denominator == 1 and r >= 0:
            return self ** int(r)
        if self._coeffs[0] != 1:
            raise SeriesError(f"pow: rational exponent {r} needs constant term 1, got {self._coeffs[0]}")
        n = self._trunc
        a = self._coeffs
        out = [Fraction(0)] * (n + 1)
        out[0] = Fraction(1)
        # J.C.P. Miller recurrence: m g_m = sum_k ((r+1)k - m) a_k g_{m-k}
        for m in range(1, n + 1):
            s = Fraction(0)
            for k in range(1, m + 1):
                if a[k]:
                    s += ((r + 1) * k - m) * a[k] * out[m - k]
            out[m] = s / m
        return RationalSeries(out, n)

    def compose(self, g: RationalSeries) -> RationalSeries:
        """``f(g(t))`` for g with zero constant term (Horner scheme)."""
        if g[0] != 0:
            raise SeriesError("compose: inner series must have zero constant term")
        n = min(self._trunc, g.truncation)
        g = g.truncate(n)
        acc = RationalSeries([self._coeffs[n]], n)
        for m in range(n - 1, -1, -1):
            acc = acc * g + self._coeffs[m]
        return acc

    def __call__(self, g: RationalSeries) -> RationalSeries:
        return self.compose(g)

    def substitute_power(self, k: int, truncation: int | None = None) -> RationalSeries:
        """``f(t^k)``; known to order ``k*T + k - 1``, capped by *truncation*."""
        n = k * self._trunc + (k - 1)
        if truncation is not None:
            n = min(n, truncation)
        out = [Fraction(0)] * (n + 1)
        for m, c in enumerate(self._coeffs):
            if k * m <= n:
                out[k * m] = c
        return RationalSeries(out, n)

    def revert(self) -> RationalSeries:
        """Compositional inverse g with ``f(g(q)) = q`` to truncation.

        Uses Lagrange inversion, ``[q^m] g = (1/m) [z^(m-1)] (z/f(z))^m``.
        """
        if self._coeffs[0] != 0:
            raise SeriesError("revert: series must vanish at 0")
        if self._trunc < 1 or self._coeffs[1] == 0:
            raise SeriesError("revert: zero linear coefficient, reversion impossible")
        n = self._trunc
        h = self.divide_by_t(1).inv()  # z/f(z), truncation n-1
        out = [Fraction(0)] * (n + 1)
        power = RationalSeries.one(n - 1)
        for m in range(1, n + 1):
            power = power * h
            out[m] = power[m - 1] / m
        return RationalSeries(out, n)

    def hadamard(self, other: RationalSeries) -> RationalSeries:
        """Coefficientwise product."""
        n = min(self._trunc, other.truncation)
        return RationalSeries([self._coeffs[i] * other[i] for i in range(n + 1)], n)


def _integrate_theta(g: RationalSeries) -> RationalSeries:
    # inverse of theta on series with g_0 = 0
    if g[0] != 0:
        raise SeriesError("theta-integration needs zero constant term")
    return RationalSeries([0] + [g[m] / m for m in range(1, g.truncation + 1)], g.truncation)


def hadamard(f: RationalSeries, g: RationalSeries) -> RationalSeries:
    return f.hadamard(g)


def revert(f: RationalSeries) -> RationalSeries:
    return f.revert()


def format_series(s: RationalSeries, var: str = "t", terms: int | None = None) -> str:
    parts = []
    n = s.truncation if terms is None else min(terms - 1, s.truncation)
    for m in range(n + 1):
        c = s[m]
        if not c:
            continue
        mono = "" if m == 0 else (var if m == 1 else f"{var}^{m}")
        if mono and c in (1, -1):
            body = mono
        else:
            cs = str(abs(c)) if c.denominator == 1 else f"({abs(c)})"
            body = cs + (f"*{mono}" if mono else "")
        sign = "-" if c < 0 else "+"
        parts.append((sign, body))
    if not parts:
        text = "0"
    else:
        first_sign, first_body = parts[0]
        text = ("-" if first_sign == "-" else "") + first_body
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
    return f"{text} + O({var}^{s.truncation + 1})"
