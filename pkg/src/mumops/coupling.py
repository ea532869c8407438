"""
Prepotentials, virtual Yukawa couplings and Lambert-series instanton numbers.

Everything is expressed in the flat coordinate q.  The formal logarithm ell
of t becomes ``lam - (h_1/h_0)(t(q))`` where lam stands for log q.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial, lcm

from .frobenius import FrobeniusBasis, MirrorMap, frobenius_basis, mirror_map
from .operators import ThetaOperator
from .series import RationalSeries, SeriesError, as_fraction


class PurityError(ArithmeticError):
    """A lam-dependent term survived where the result must be lam-free."""


@dataclass(frozen=True)
class InstantonSequence:
    """N_1, N_2, ... with the weight used to extract them."""

    values: tuple[Fraction, ...]
    weight: int
    period: int | None = None
    denominator: int | None = None
    params: dict = field(default_factory=dict, compare=False)

    def scaled(self) -> tuple[int, ...]:
        """``m * N_k`` as integers, m the detected denominator."""
        m = self.denominator or 1
        return tuple(int(v * m) for v in self.values)

    def __getitem__(self, k: int) -> Fraction:
        """1-based access, ``s[1]`` is N_1."""
        if k < 1:
            raise IndexError("instanton index starts at 1")
        return self.values[k - 1]

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class CouplingResult:
    yukawa: RationalSeries
    prepotential_tail: RationalSeries
    operator: ThetaOperator


# polynomials in lam with q-series coefficients are lists indexed by lam-degree


def _lam_theta(poly: list[RationalSeries]) -> list[RationalSeries]:
    """q d/dq on ``sum lam^j c_j(q)``, with q d/dq lam = 1."""
    out = [c.theta() for c in poly]
    for j in range(1, len(poly)):
        out[j - 1] = out[j - 1] + poly[j] * j
    return out


def period_ratio_in_q(basis: FrobeniusBasis, mirror: MirrorMap, j: int) -> list[RationalSeries]:
    """``omega_j / omega_0`` as a polynomial in lam over q-series."""
    tq = mirror.t_of_q
    T = min(basis.truncation, tq.truncation)
    inv_h0 = basis.h[0].inv()
    g = [(basis.h[k] * inv_h0).compose(tq).truncate(T) for k in range(j + 1)]
    shift = -g[1] if j >= 1 else RationalSeries.zero(T)  # ell = lam + shift
    out = [RationalSeries.zero(T) for _ in range(j + 1)]
    for k in range(j + 1):
        # binom(j,k) g_k (lam + shift)^(j-k)
        e = j - k
        spow = RationalSeries.one(T)
        powers = [spow]
        for _ in range(e):
            spow = spow * shift
            powers.append(spow)
        for r in range(e + 1):
            out[r] = out[r] + g[k] * powers[e - r] * (comb(j, k) * comb(e, r))
    return out


def q_derivative_power(poly: list[RationalSeries], n: int) -> list[RationalSeries]:
    for _ in range(n):
        poly = _lam_theta(poly)
    return poly


def _lam_free(poly: list[RationalSeries], what: str) -> RationalSeries:
    for j, c in enumerate(poly[1:], start=1):
        if not c.is_zero():
            raise PurityError(f"{what}: lam^{j} coefficient does not vanish (first term {c})")
    return poly[0]


def virtual_yukawa(D: ThetaOperator, truncation: int) -> CouplingResult:
    """Yukawa series of a MUM operator of order n+1, normalised to constant term 1."""
    if D.order < 2:
        raise ValueError(f"virtual Yukawa needs order >= 2, got {D.order}")
    n = D.order - 1
    basis = frobenius_basis(D, truncation)
    mm = mirror_map(basis)
    ratio = period_ratio_in_q(basis, mm, n)
    scale = Fraction(1, factorial(n))
    tail = ratio[0] * scale
    y = _lam_free(q_derivative_power(ratio, n), "virtual Yukawa") * scale
    return CouplingResult(y, tail, D)


def classical_coupling(L: ThetaOperator, truncation: int) -> RationalSeries:
    """``(q d/dq)^2 (omega_2 / omega_0)``; constant 2 for second and third order operators.

    A second order operator has no omega_2 solution; ``omega_1^2 / omega_0`` is used instead.
    """
    basis = frobenius_basis(L, truncation)
    if basis.order == 2:
        h0, h1 = basis.h
        basis = FrobeniusBasis((h0, h1, h1 * h1 * h0.inv()), L, truncation)
    ratio = period_ratio_in_q(basis, mirror_map(basis), 2)
    return _lam_free(q_derivative_power(ratio, 2), "classical coupling")


def yukawa_factorization(L: ThetaOperator, truncation: int) -> RationalSeries:
    """``F * (q dt/dq) / t`` with F = h_0(t(q)) and t = t(q) from L."""
    basis = frobenius_basis(L, truncation + 1)
    tq = mirror_map(basis).t_of_q
    F = basis.h[0].compose(tq).truncate(truncation)
    log_deriv = tq.theta().divide_by_t() * tq.divide_by_t().inv()
    return F * log_deriv


# Lambert series


def lambert_extract(Y: RationalSeries, weight: int, min_repeats: int = 2) -> InstantonSequence:
    """N_k with ``Y = 1 + sum_k k^w N_k q^k / (1 - q^k)``."""
    if Y[0] != 1:
        raise SeriesError(f"Lambert extraction needs constant term 1, got {Y[0]}")
    T = Y.truncation
    N = [Fraction(0)] * (T + 1)
    for m in range(1, T + 1):
        s = Y[m]
        for d in _proper_divisors(m):
            s -= d ** weight * N[d]
        N[m] = s / m ** weight
    values = tuple(N[1:])
    m, p = normalize_instantons(values, min_repeats)
    return InstantonSequence(values, weight, p, m)


def lambert_rebuild(values, weight: int, truncation: int) -> RationalSeries:
    out = [Fraction(0)] * (truncation + 1)
    out[0] = Fraction(1)
    for k, v in enumerate(values, start=1):
        if k > truncation:
            break
        if v:
            c = k ** weight * v
            for m in range(k, truncation + 1, k):
                out[m] += c
    return RationalSeries(out, truncation)


def _proper_divisors(m: int) -> list[int]:
    small, large = [], []
    d = 1
    while d * d <= m:
        if m % d == 0:
            small.append(d)
            if d * d != m:
                large.append(m // d)
        d += 1
    return [x for x in small + large[::-1] if x != m]


def normalize_instantons(values, min_repeats: int = 2) -> tuple[int, int | None]:
    """Least common denominator and smallest period seen at least *min_repeats* times."""
    vals = [as_fraction(v) for v in values]
    m = lcm(1, *(v.denominator for v in vals))
    period = None
    for p in range(1, len(vals) // min_repeats + 1):
        if all(vals[k + p] == vals[k] for k in range(len(vals) - p)):
            period = p
            break
    return m, period


def dual_instantons(
    Y: RationalSeries,
    w_dual: int,
    beta=-1,
    nu: int = 1,
    mu=1,
    min_repeats: int = 2,
) -> InstantonSequence:
    """Dual numbers from ``Q d/dQ log q = 1/Y`` with ``Q = beta q exp(...)``."""
    beta = as_fraction(beta)
    mu = as_fraction(mu)
    if beta == 0:
        raise ValueError("beta must be nonzero")
    if nu < 1:
        raise ValueError("nu must be a positive integer")
    if Y[0] != 1:
        raise SeriesError(f"dual instantons need constant term 1, got {Y[0]}")
    T = Y.truncation
    bad = [m for m in range(1, T + 1) if Y[m] and m % nu]
    if bad:
        raise ValueError(f"Y - 1 has q^{bad[0]} outside multiples of nu={nu}")
    # u = Q/beta = q exp(sum a_m q^m / m)
    integral = RationalSeries([0] + [Y[m] / m for m in range(1, T + 1)], T)
    u = integral.exp().shift(1)
    q_of_u = u.revert()
    S = Y.inv().compose(q_of_u)
    # Q^k coefficient is the u^k coefficient over beta^k
    in_Q = [S[k] / beta ** k for k in range(T + 1)]
    reduced = RationalSeries(in_Q[::nu], T // nu)
    base = lambert_extract(reduced, w_dual, min_repeats)
    values = tuple(v * mu for v in base.values)
    m, p = normalize_instantons(values, min_repeats)
    params = {"beta": beta, "nu": nu, "mu": mu, "weight": w_dual}
    return InstantonSequence(values, w_dual, p, m, params)


def dual_roundtrip(Y: RationalSeries, beta=-1) -> bool:
    """Swapping q and Q twice gives the identity: q(Q(q)) = q."""
    beta = as_fraction(beta)
    T = Y.truncation
    integral = RationalSeries([0] + [Y[m] / m for m in range(1, T + 1)], T)
    Q = integral.exp().shift(1) * beta
    # rescale so the linear coefficient is one before reverting, then undo
    unit = Q * (1 / beta)
    q_of_u = unit.revert()
    q_of_Q = RationalSeries([q_of_u[k] / beta ** k for k in range(T + 1)], T)
    S = Y.inv().compose(q_of_u)
    # rebuild: Q d/dQ log q = S, so q = beta^-1 Q exp(int (S-1)/Q dQ)
    integral2 = RationalSeries([0] + [S[k] / k for k in range(1, T + 1)], T)
    back_u = integral2.exp().shift(1)
    return back_u.agrees(q_of_u) and q_of_Q.compose(Q).agrees(RationalSeries.variable(T))
