"""
Frobenius bases at a MUM point, mirror maps and nonhomogeneous solves.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial

from .operators import LogSeries, ThetaOperator, log_series_from_h
from .series import RationalSeries, SeriesError


class NotMUMError(ValueError):
    pass


@dataclass(frozen=True)
class FrobeniusBasis:
    """Holomorphic parts h_0..h_{n-1} of the canonical solutions at t = 0."""

    h: tuple[RationalSeries, ...]
    operator: ThetaOperator
    truncation: int

    @property
    def order(self) -> int:
        return len(self.h)

    def solution(self, j: int) -> LogSeries:
        """The log-stripped solution ``sum_k binom(j,k) h_k ell^(j-k)``."""
        return log_series_from_h(self.h, j)


@dataclass(frozen=True)
class MirrorMap:
    q_of_t: RationalSeries
    t_of_q: RationalSeries


def _eps_mul(a: list[Fraction], b: list[Fraction], n: int) -> list[Fraction]:
    out = [Fraction(0)] * n
    for i, x in enumerate(a):
        if x:
            for j in range(n - i):
                if b[j]:
                    out[i + j] += x * b[j]
    return out


def _check_mum(L: ThetaOperator) -> Fraction:
    if not L.is_mum():
        raise NotMUMError(f"operator is not MUM at t=0: P_0 = {L.block(0).to_text()}")
    return L.block(0).leading()


def frobenius_basis(L: ThetaOperator, truncation: int) -> FrobeniusBasis:
    """Solve the epsilon-deformed recursion modulo eps^n."""
    lead = _check_mum(L)
    n = L.order
    K = L.t_degree
    # P_k(eps + s) truncated to eps^n, cached per shift s
    shifted: dict[tuple[int, int], list[Fraction]] = {}

    def block_at(k: int, s: int) -> list[Fraction]:
        key = (k, s)
        if key not in shifted:
            p = L.block(k).shift(s)
            shifted[key] = [p[i] / lead for i in range(n)]
        return shifted[key]

    c = [[Fraction(1)] + [Fraction(0)] * (n - 1)]
    for m in range(1, truncation + 1):
        acc = [Fraction(0)] * n
        for k in range(1, min(m, K) + 1):
            if L.block(k).is_zero():
                continue
            term = _eps_mul(block_at(k, m - k), c[m - k], n)
            acc = [a + b for a, b in zip(acc, term)]
        # (m + eps)^(-n) = sum_i binom(-n, i) m^(-n-i) eps^i
        inv = [Fraction(comb(n + i - 1, i) * (-1) ** i, m ** (n + i)) for i in range(n)]
        c.append([-x for x in _eps_mul(acc, inv, n)])
    h = tuple(
        RationalSeries([factorial(j) * cm[j] for cm in c], truncation) for j in range(n)
    )
    return FrobeniusBasis(h, L, truncation)


def mirror_map(basis: FrobeniusBasis) -> MirrorMap:
    if basis.order < 2:
        raise ValueError("mirror map needs a logarithmic solution (order >= 2)")
    h0, h1 = basis.h[0], basis.h[1]
    q = (h1 * h0.inv()).exp().shift(1)
    return MirrorMap(q, q.revert())


def solve_nonhomogeneous(L: ThetaOperator, rhs: RationalSeries) -> RationalSeries:
    """The solution of ``L y = rhs`` with ``y(0) = 0``."""
    lead = _check_mum(L)
    if rhs[0] != 0:
        raise SeriesError(f"right-hand side has nonzero constant term {rhs[0]}")
    n = L.order
    T = rhs.truncation
    y = [Fraction(0)] * (T + 1)
    for m in range(1, T + 1):
        s = rhs[m]
        for k in range(1, min(m, L.t_degree) + 1):
            p = L.block(k)
            if not p.is_zero() and y[m - k]:
                s -= p(m - k) * y[m - k]
        y[m] = s / (lead * m ** n)
    return RationalSeries(y, T)


def symmetric_square_check(basis: FrobeniusBasis) -> bool:
    """``h_0 h_2 == h_1^2``, the log-free form of omega_0 omega_2 = omega_1^2."""
    if basis.order != 3:
        raise ValueError(f"symmetric square check needs order 3, got {basis.order}")
    h0, h1, h2 = basis.h
    return (h0 * h2 - h1 * h1).is_zero()
