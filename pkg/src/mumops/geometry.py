"""
Weierstrass models to Picard-Fuchs operators, Hadamard twists, and the family catalog.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources

from .operators import ThetaOperator, ThetaPolynomial, parse_operator, parse_polynomial
from .series import RationalSeries, as_fraction

Poly = ThetaPolynomial  # used here as a polynomial in t


def poly_divmod(a: Poly, b: Poly) -> tuple[Poly, Poly]:
    if b.is_zero():
        raise ZeroDivisionError("polynomial division by zero")
    q = [Fraction(0)] * max(a.degree - b.degree + 1, 1)
    r = list(a.coeffs)
    lead = b.leading()
    while len(r) - 1 >= b.degree and any(r):
        shift = len(r) - 1 - b.degree
        c = r[-1] / lead
        q[shift] = c
        for i, bc in enumerate(b.coeffs):
            r[shift + i] -= c * bc
        r.pop()
        while r and r[-1] == 0:
            r.pop()
    return Poly(q), Poly(r)


def poly_gcd(a: Poly, b: Poly) -> Poly:
    while not b.is_zero():
        a, b = b, poly_divmod(a, b)[1]
    return a.scale(1 / a.leading()) if not a.is_zero() else a


class RationalFunction:
    """num/den with polynomial num and den, reduced on construction."""

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly | None = None):
        den = den if den is not None else Poly([1])
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        g = poly_gcd(num, den) if not num.is_zero() else den
        if g.degree > 0:
            num = poly_divmod(num, g)[0]
            den = poly_divmod(den, g)[0]
        if num.is_zero():
            den = Poly([1])
        lead = den.leading()
        self.num = num.scale(1 / lead)
        self.den = den.scale(1 / lead)

    def __add__(self, o: RationalFunction) -> RationalFunction:
        return RationalFunction(self.num * o.den + o.num * self.den, self.den * o.den)

    def __neg__(self) -> RationalFunction:
        return RationalFunction(-self.num, self.den)

    def __sub__(self, o: RationalFunction) -> RationalFunction:
        return self + (-o)

    def __mul__(self, o) -> RationalFunction:
        if not isinstance(o, RationalFunction):
            return RationalFunction(self.num.scale(o), self.den)
        return RationalFunction(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, o: RationalFunction) -> RationalFunction:
        return RationalFunction(self.num * o.den, self.den * o.num)

    def derivative(self) -> RationalFunction:
        n, d = self.num, self.den
        return RationalFunction(n.derivative() * d - n * d.derivative(), d * d)

    def is_zero(self) -> bool:
        return self.num.is_zero()


@dataclass(frozen=True)
class WeierstrassData:
    """``y^2 = 4x^3 - g2(t) x - g3(t)``."""

    g2: Poly
    g3: Poly

    def __post_init__(self):
        if self.discriminant().is_zero():
            raise ValueError("discriminant g2^3 - 27 g3^2 vanishes identically")

    @classmethod
    def parse(cls, g2: str, g3: str) -> WeierstrassData:
        return cls(Poly(parse_polynomial(g2)), Poly(parse_polynomial(g3)))

    def discriminant(self) -> Poly:
        return self.g2 ** 3 - (self.g3 * self.g3).scale(27)

    def delta(self) -> Poly:
        return (self.g3 * self.g2.derivative()).scale(3) - (self.g2 * self.g3.derivative()).scale(2)


def derive_pf(w: WeierstrassData) -> ThetaOperator:
    """Second order operator for omega_0 from the Weierstrass period system.

    The system is ``omega_0' = a omega_0 + b omega_1``, ``omega_1' = c omega_0 + d omega_1``
    with a = -D'/(12 D), b = 3 delta/(2 D), c = -g2 delta/(8 D), d = -a.
    """
    D = w.discriminant()
    dlt = w.delta()
    RF = RationalFunction
    a = RF(D.derivative(), D) * Fraction(-1, 12)
    b = RF(dlt, D) * Fraction(3, 2)
    c = RF(w.g2 * dlt, D) * Fraction(-1, 8)
    d = -a
    if b.is_zero():
        raise ValueError("period system decouples (delta vanishes identically)")
    bl = b.derivative() / b
    A = a + bl + d
    B = a.derivative() - a * bl - a * d + b * c
    # omega'' - A omega' - B omega = 0; clear denominators
    den = A.den * B.den
    den = poly_divmod(den, poly_gcd(A.den, B.den))[0]
    a2 = den
    a1 = -poly_divmod(A.num * den, A.den)[0]
    a0 = -poly_divmod(B.num * den, B.den)[0]
    g = poly_gcd(poly_gcd(a2, a1), a0)
    if g.degree > 0:
        a2, a1, a0 = (poly_divmod(p, g)[0] for p in (a2, a1, a0))
    op = ThetaOperator.from_dt([a0.coeffs, a1.coeffs, a2.coeffs])
    if not op.is_mum():
        raise ValueError(f"derived operator is not MUM at t=0: {op}")
    return op.monic()


# ---------------------------------------------------------------- twists


def hypergeometric_coefficients(i: int, j: int, T: int) -> list[Fraction]:
    """``((i+j)m)! / ((im)! (jm)!)`` built from Pochhammer term ratios."""
    n = i + j
    upper = [Fraction(k, n) for k in range(1, n)]
    lower = [Fraction(k, i) for k in range(1, i)] + [Fraction(k, j) for k in range(1, j)]
    kappa = Fraction(n ** n, i ** i * j ** j)
    out = [Fraction(1)]
    for m in range(T):
        r = kappa / (m + 1)
        for u in upper:
            r *= m + u
        for v in lower:
            r /= m + v
        out.append(out[-1] * r)
    return out


def twist_series(i: int, j: int, f: RationalSeries, arg_scale=1, alpha=1) -> RationalSeries:
    """Hadamard product of ``f(arg_scale * t)`` with the (i, j) coefficient sequence."""
    if as_fraction(alpha) != 1:
        raise ValueError("only the alpha = 1 twist is supported")
    if not (1 <= i <= 6 and 1 <= j <= 6):
        raise ValueError(f"twist indices must lie in 1..6, got ({i}, {j})")
    s = as_fraction(arg_scale)
    T = f.truncation
    c = hypergeometric_coefficients(i, j, T)
    return RationalSeries([f[m] * s ** m * c[m] for m in range(T + 1)], T)


# ---------------------------------------------------------------- catalog


class CatalogError(KeyError):
    def __str__(self) -> str:
        return self.args[0] if self.args else ""


def parse_rationals(text: str) -> tuple[Fraction, ...]:
    return tuple(Fraction(tok.strip()) for tok in text.split(",") if tok.strip())


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    kind: str  # "elliptic" or "k3"
    level: int
    index: int
    operator: ThetaOperator | None
    data: dict = field(compare=False, repr=False)

    def get(self, key: str, default=None):
        return self.data.get(key, default)

    def rationals(self, key: str) -> tuple[Fraction, ...] | None:
        v = self.data.get(key)
        return parse_rationals(v) if v is not None else None

    def rational(self, key: str, default=None) -> Fraction | None:
        v = self.data.get(key)
        return Fraction(v) if v is not None else default

    def provenance(self, key: str) -> str | None:
        return self.data.get(f"{key}.source") or self.data.get("source")

    @property
    def quantum(self) -> ThetaOperator | None:
        text = self.data.get("quantum")
        if text:
            return parse_operator(text)
        return self.operator.borel_shift() if self.operator is not None else None

    @property
    def weierstrass(self) -> WeierstrassData | None:
        if "g2" in self.data:
            return WeierstrassData.parse(self.data["g2"], self.data["g3"])
        return None

    @property
    def instanton_weight(self) -> int:
        return int(self.data.get("instantons.weight", 2 if self.kind == "elliptic" else 3))

    @property
    def dual_weight(self) -> int:
        return int(self.data.get("duals.weight", 3 if self.kind == "elliptic" else 2))


@dataclass(frozen=True)
class Catalog:
    version: str
    entries: tuple[CatalogEntry, ...]

    def ids(self) -> list[str]:
        return [e.id for e in self.entries]

    def lookup(self, family: str) -> CatalogEntry:
        for e in self.entries:
            if e.id == family:
                return e
        raise CatalogError(f"unknown family {family!r}; available: {', '.join(self.ids())}")


def load_catalog_text(text: str) -> Catalog:
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",))
    cp.optionxform = str
    cp.read_string(text)
    version = cp.get("catalog", "version", fallback="?")
    entries = []
    for sec in cp.sections():
        if sec == "catalog":
            continue
        data = dict(cp.items(sec))
        op_text = data.get("operator")
        op = parse_operator(op_text) if op_text else None
        entries.append(
            CatalogEntry(sec, data.get("kind", "k3"), int(data.get("level", 0)), int(data.get("index", 1)), op, data)
        )
    # resolve pullback operators now that every base entry exists
    by_id = {e.id: e for e in entries}
    resolved = []
    for e in entries:
        base = e.data.get("pullback.of")
        if e.operator is None and base:
            op = by_id[base].operator.pullback(int(e.data["pullback.power"]))
            e = CatalogEntry(e.id, e.kind, e.level, e.index, op, e.data)
        resolved.append(e)
    return Catalog(version, tuple(resolved))


@lru_cache(maxsize=1)
def load_catalog() -> Catalog:
    text = resources.files("mumops").joinpath("catalog.ini").read_text(encoding="utf-8")
    return load_catalog_text(text)


def catalog_lookup(family: str) -> CatalogEntry:
    return load_catalog().lookup(family)
