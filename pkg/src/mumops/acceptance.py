"""
The golden acceptance suite, shared by ``mumops verify-all`` and the tests.

Each criterion is a function of the truncation returning a
:class:`CriterionResult`; individual checks are recorded in order so the
first failure can be named.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb

from . import coupling, frobenius, modular
from .geometry import derive_pf, load_catalog, twist_series
from .operators import ThetaOperator, annihilator_search, parse_operator
from .series import RationalSeries

PERIODIC_K3 = ("K3-N2", "K3-N3", "K3-N4", "K3-N5", "K3-N6", "K3-N7", "K3-N8", "K3-N9", "K3-N11")
ELLIPTIC = ("EC-X0(3)", "EC-X0(4)", "EC-X1(5)", "EC-X0(6)")
K3_BLOCKS = ("K3-N2", "K3-N3", "K3-N4", "K3-N5", "K3-N6-twisted", "K3-BeukersPeters")
K3_FAMILIES = PERIODIC_K3 + ("K3-N6-twisted", "K3-BeukersPeters")


@dataclass
class CriterionResult:
    number: int
    title: str
    checks: list[tuple[str, bool, str]] = field(default_factory=list)

    def check(self, name: str, ok: bool, detail: str = "") -> bool:
        self.checks.append((name, bool(ok), detail))
        return ok

    @property
    def ok(self) -> bool:
        return all(ok for _, ok, _ in self.checks)

    @property
    def first_failure(self) -> str | None:
        for name, ok, detail in self.checks:
            if not ok:
                return f"{name}: {detail}" if detail else name
        return None

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        tail = f" ({len(self.checks)} checks)" if self.ok else f" -- {self.first_failure}"
        return f"[{status}] criterion {self.number}: {self.title}{tail}"


# ---------------------------------------------------------------- cached pipeline


@lru_cache(maxsize=None)
def basis(op: ThetaOperator, T: int) -> frobenius.FrobeniusBasis:
    return frobenius.frobenius_basis(op, T)


@lru_cache(maxsize=None)
def mirror(op: ThetaOperator, T: int) -> frobenius.MirrorMap:
    return frobenius.mirror_map(basis(op, T))


@lru_cache(maxsize=None)
def yukawa(op: ThetaOperator, T: int) -> RationalSeries:
    return coupling.virtual_yukawa(op, T).yukawa


@lru_cache(maxsize=None)
def qexpr(text: str, T: int) -> modular.QExpansion:
    return modular.evaluate(text, T)


def entry(family: str):
    return load_catalog().lookup(family)


def _prefix(series: RationalSeries, expect) -> tuple[bool, str]:
    got = [series[i] for i in range(len(expect))]
    ok = got == list(expect)
    return ok, "" if ok else f"got {[str(x) for x in got]}, expected {[str(x) for x in expect]}"


def _seq(got, expect) -> tuple[bool, str]:
    got = list(got)[: len(expect)]
    ok = got == list(expect)
    return ok, "" if ok else f"got {[str(x) for x in got]}, expected {[str(x) for x in expect]}"


def _qcheck(lhs: modular.QExpansion, rhs: modular.QExpansion, T: int) -> tuple[bool, str]:
    r = modular.identity_check(lhs, rhs, T)
    return r.ok, r.message


def dual_sequence(family: str, T: int) -> coupling.InstantonSequence:
    e = entry(family)
    T = int(e.get("duals.truncation", T))
    Y = yukawa(e.quantum, T)
    return coupling.dual_instantons(
        Y,
        e.dual_weight,
        e.rational("duals.beta", Fraction(-1)),
        int(e.get("duals.nu", 1)),
        e.rational("duals.mu", Fraction(1)),
    )


def apery_a(n: int) -> int:
    return sum(comb(n, k) ** 2 * comb(n + k, k) ** 2 for k in range(n + 1))


def apery_zeta2(n: int) -> int:
    return sum(comb(n, k) ** 2 * comb(n + k, k) for k in range(n + 1))


# ---------------------------------------------------------------- criteria


def criterion_1(T: int = 40) -> CriterionResult:
    r = CriterionResult(1, "Apery sequences and nonhomogeneous solutions")
    for fam in ("K3-BeukersPeters", "EC-X1(5)"):
        e = entry(fam)
        a = e.rationals("sequence.a.expect")
        b = e.rationals("sequence.b.expect")
        rhs = RationalSeries(e.rationals("sequence.b.rhs"), T)
        r.check(f"{fam} h_0", *_prefix(basis(e.operator, T).h[0], a))
        r.check(f"{fam} inhomogeneous", *_prefix(frobenius.solve_nonhomogeneous(e.operator, rhs), b))
    return r


def criterion_2(T: int = 40) -> CriterionResult:
    r = CriterionResult(2, "binomial-sum closed forms match h_0")
    bp = basis(entry("K3-BeukersPeters").operator, T).h[0]
    z2 = basis(entry("EC-X1(5)").operator, T).h[0]
    r.check("zeta(3) sum", *_seq(bp.coeffs, [Fraction(apery_a(n)) for n in range(T + 1)]))
    r.check("zeta(2) sum", *_seq(z2.coeffs, [Fraction(apery_zeta2(n)) for n in range(T + 1)]))
    return r


def criterion_3(T: int = 40) -> CriterionResult:
    r = CriterionResult(3, "virtual Yukawa golden series")
    for fam in ("K3-N6", "K3-N2"):
        e = entry(fam)
        Y = yukawa(e.quantum, T)
        r.check(f"{fam} truncation", Y.truncation == T, f"truncation {Y.truncation}")
        r.check(f"{fam} series", *_prefix(Y, e.rationals("yukawa.expect")))
    return r


def criterion_4(T: int = 40) -> CriterionResult:
    r = CriterionResult(4, "periodic K3 instantons and Eisenstein forms")
    for fam in PERIODIC_K3:
        e = entry(fam)
        N = e.level
        Y = yukawa(e.quantum, T)
        s = coupling.lambert_extract(Y, 3, min_repeats=3)
        scale = e.rational("instantons.scale")
        listed = e.rationals("instantons.scaled")
        r.check(f"{fam} period", s.period == N and len(s) >= 3 * N, f"period {s.period} from {len(s)} terms")
        r.check(f"{fam} m_N*N_k", *_seq([v * scale for v in s.values[:N]], listed))
        r.check(f"{fam} denominators", (scale % s.denominator) == 0, f"minimal m={s.denominator}, listed {scale}")
        r.check(f"{fam} Eisenstein", *_qcheck(modular.as_qexpansion(Y), qexpr(e.get("yukawa.modular"), T), T))
    return r


def criterion_5(T: int = 40) -> CriterionResult:
    r = CriterionResult(5, "Yukawa factorization Y = F t'/t")
    for fam in PERIODIC_K3 + ELLIPTIC:
        e = entry(fam)
        r.check(f"{fam} quantum = theta L", e.quantum == e.operator.borel_shift())
        Y = yukawa(e.quantum, T)
        F = coupling.yukawa_factorization(e.operator, T)
        r.check(f"{fam} factorization", Y == F, "series differ")
    return r


def _block_checks(r: CriterionResult, fam: str, T: int) -> None:
    e = entry(fam)
    L = e.operator
    tq = mirror(L, T).t_of_q
    h = basis(e.quantum, T).h
    haupt = qexpr(e.get("hauptmodul"), T)
    r.check(f"{fam} Hauptmodul expansion", *_qcheck(haupt, modular.as_qexpansion(RationalSeries(e.rationals("hauptmodul.expect"))), T))
    r.check(f"{fam} Hauptmodul = t(q)", *_qcheck(haupt, modular.as_qexpansion(tq), T))
    period = qexpr(e.get("period"), T)
    h0q = basis(L, T).h[0].compose(tq)
    r.check(f"{fam} period expansion", *_qcheck(period, modular.as_qexpansion(RationalSeries(e.rationals("period.expect"))), T))
    r.check(f"{fam} period = h_0(t(q))", *_qcheck(period, modular.as_qexpansion(h0q), T))
    top = e.rationals("h_top.expect")
    r.check(f"{fam} h_{len(h) - 1}", *_seq(h[-1].coeffs[1:], top))
    duals = dual_sequence(fam, T)
    r.check(f"{fam} duals", *_seq(duals.values, e.rationals("duals.expect")))


def criterion_6(T: int = 40) -> CriterionResult:
    r = CriterionResult(6, "elliptic data blocks")
    for fam in ELLIPTIC:
        e = entry(fam)
        _block_checks(r, fam, T)
        Y = yukawa(e.quantum, T)
        r.check(f"{fam} Yukawa", *_prefix(Y, e.rationals("yukawa.expect")))
        r.check(f"{fam} Yukawa character form", *_qcheck(modular.as_qexpansion(Y), qexpr(e.get("yukawa.modular"), T), T))
        s = coupling.lambert_extract(Y, e.instanton_weight)
        sign = e.rational("instantons.sign", Fraction(1))
        r.check(f"{fam} instantons", *_seq([sign * v for v in s.values], e.rationals("instantons.expect")))
        r.check(f"{fam} instanton period", s.period == e.level, f"period {s.period}")
    return r


def criterion_7(T: int = 40) -> CriterionResult:
    r = CriterionResult(7, "K3 data blocks")
    for fam in K3_BLOCKS:
        _block_checks(r, fam, T)
    e = entry("K3-BeukersPeters")
    tq = mirror(e.operator, T + 1).t_of_q
    H = tq.theta().divide_by_t() * tq.divide_by_t().inv()
    r.check("K3-BeukersPeters theta-hex log derivative", *_qcheck(qexpr(e.get("log_derivative"), T), modular.as_qexpansion(H), T))
    return r


def criterion_8(T: int = 40) -> CriterionResult:
    r = CriterionResult(8, "K_P3 normalized dual instantons")
    e = entry("P3-pullback")
    r.check("pullback operator", e.operator == parse_operator(e.get("operator.expect")), str(e.operator))
    s = dual_sequence("P3-pullback", T)
    r.check("twelve invariants", *_seq(s.values, e.rationals("duals.expect")))
    return r


def relations(N: list[Fraction], D: list[Fraction]) -> list[tuple[Fraction, Fraction]]:
    """The five (virtual, dual) identities; each pair must agree."""
    d1, d2, d3, d4, d5 = D[:5]
    rhs = [
        d1,
        d1 ** 2 / 4 - d1 / 4 - d2 / 2,
        d1 ** 3 / 6 - d1 ** 2 / 6 - Fraction(2, 3) * d1 * d2 + d3 / 3,
        d1 ** 4 / 6 - d1 ** 3 / 4 + (1 - 12 * d2) * d1 ** 2 / 12 + (3 * d2 + 9 * d3) * d1 / 12 + d2 ** 2 / 2 - d4 / 4,
        Fraction(5, 24) * d1 ** 5
        - Fraction(5, 12) * d1 ** 4
        + (35 - 200 * d2) * d1 ** 3 / 120
        + (120 * d2 + 180 * d3 - 10) * d1 ** 2 / 120
        + (240 * d2 ** 2 - 40 * d2 - 36 * d3 - 96 * d4) * d1 / 120
        - Fraction(6, 5) * d2 * d3
        + d5 / 5,
    ]
    return list(zip(N[:5], rhs))


def criterion_9(T: int = 40) -> CriterionResult:
    r = CriterionResult(9, "virtual to dual instanton relations")
    for fam in K3_FAMILIES:
        e = entry(fam)
        Y = yukawa(e.quantum, T)
        N = coupling.lambert_extract(Y, 3).values
        D = coupling.dual_instantons(Y, 2, -1).values
        for k, (lhs, rhs) in enumerate(relations(list(N), list(D)), start=1):
            r.check(f"{fam} N_{k}", lhs == rhs, f"{lhs} != {rhs}")
    return r


def criterion_10(T: int = 40) -> CriterionResult:
    r = CriterionResult(10, "property suites")
    cat = load_catalog()
    for e in cat.entries:
        L = e.operator
        D = e.quantum
        for name, op in (("L", L), ("D", D)):
            B = basis(op, T)
            K = op.t_degree
            ok = all(op.apply_log(B.solution(j)).is_zero() for j in range(op.order))
            r.check(f"{e.id} {name} annihilates basis", ok)
        r.check(f"{e.id} adjoint involution", L.adjoint().adjoint() == L)
        r.check(f"{e.id} MUM preserved", L.is_mum() and D.is_mum())
        mm = mirror(L, T)
        ident = RationalSeries.variable(T)
        r.check(f"{e.id} mirror roundtrip", mm.q_of_t.compose(mm.t_of_q) == ident and mm.t_of_q.compose(mm.q_of_t) == ident)
        if L.order == 3 and e.id.startswith("K3-N") and e.id != "K3-N6-twisted":
            r.check(f"{e.id} symmetric square", frobenius.symmetric_square_check(basis(L, T)))
        if L.order in (2, 3):
            c = coupling.classical_coupling(L, T)
            r.check(f"{e.id} classical coupling", c == RationalSeries([2], T), str(c))
        Y = yukawa(D, T)  # raises on a lam-purity failure
        s = coupling.lambert_extract(Y, e.dual_weight + 1 if e.kind == "k3" else 2)
        r.check(f"{e.id} Lambert roundtrip", coupling.lambert_rebuild(s.values, s.weight, T) == Y)
        r.check(f"{e.id} dual roundtrip", coupling.dual_roundtrip(Y, -1))
    return r


def criterion_11(T: int = 40) -> CriterionResult:
    r = CriterionResult(11, "Weierstrass derivation")
    for fam in ELLIPTIC:
        e = entry(fam)
        op = derive_pf(e.weierstrass)
        period = basis(e.operator, T).h[0]
        r.check(f"{fam} annihilates period", op.apply(period).is_zero())
        r.check(f"{fam} matches catalog operator", op == e.operator, str(op))
    return r


def criterion_12(T: int = 40) -> CriterionResult:
    r = CriterionResult(12, "Hadamard twists")
    for fam in ("K3-N3", "K3-N4", "K3-N5", "K3-N6-twisted"):
        e = entry(fam)
        src = entry(e.get("twist.source_family"))
        f = basis(src.operator, T).h[0]
        tw = twist_series(1, 1, f, e.rational("twist.arg_scale", Fraction(1)))
        r.check(f"{fam} annihilated", e.operator.apply(tw).is_zero())
        found = annihilator_search(tw, e.operator.order, e.operator.t_degree)
        r.check(f"{fam} reconstructed", found is not None and found.operator == e.operator and not found.ambiguous,
                str(found.operator if found else None))
    e = entry("K3-N2")
    src = basis(entry(e.get("twist.source_family")).operator, T).h[0]
    i, j = (int(x) for x in e.get("twist.ij").split(","))
    tw = twist_series(i, j, src, e.rational("twist.arg_scale"))
    r.check("K3-N2 (3,1) twist annihilated by L_{3,2}", e.operator.apply(tw).is_zero())
    comp = parse_operator(e.get("twist.companion"))
    hyper = twist_series(i, j, RationalSeries([1] * (T + 1), T))
    r.check("K3-N2 companion annihilates the (3,1) factor", comp.apply(hyper).is_zero())
    return r


CRITERIA = (
    criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
    criterion_7, criterion_8, criterion_9, criterion_10, criterion_11, criterion_12,
)


def run_criterion(number: int, T: int = 40) -> CriterionResult:
    return CRITERIA[number - 1](T)
