from fractions import Fraction
from math import factorial

import pytest

from mumops.frobenius import frobenius_basis
from mumops.geometry import (
    CatalogError,
    Poly,
    RationalFunction,
    WeierstrassData,
    catalog_lookup,
    derive_pf,
    hypergeometric_coefficients,
    load_catalog,
    load_catalog_text,
    poly_divmod,
    poly_gcd,
    twist_series,
)
from mumops.operators import parse_operator
from mumops.series import RationalSeries

T = 30


def test_poly_division_and_gcd():
    a = Poly([-1, 0, 1])  # t^2 - 1
    b = Poly([1, 1])
    q, r = poly_divmod(a, b)
    assert q == Poly([-1, 1]) and r.is_zero()
    assert poly_gcd(a * Poly([2, 1]), b * Poly([2, 1])) == Poly([2, 1]) * Poly([1, 1])


def test_rational_function_reduces():
    f = RationalFunction(Poly([-1, 0, 1]), Poly([1, 1]))
    assert f.num == Poly([-1, 1]) and f.den == Poly([1])
    assert (f - f).is_zero()
    assert RationalFunction(Poly([0, 1]), Poly([1])).derivative().num == Poly([1])


def test_derive_pf_x03_literal():
    op = derive_pf(catalog_lookup("EC-X0(3)").weierstrass)
    assert op == parse_operator("theta^2 - 3*t*(3*theta+1)*(3*theta+2)")


def test_derive_pf_x15_annihilates_binomial_sum():
    op = derive_pf(catalog_lookup("EC-X1(5)").weierstrass)
    assert op.apply(RationalSeries([1, 3, 19, 147], 3)).is_zero()


def test_derive_pf_x06_literal():
    op = derive_pf(catalog_lookup("EC-X0(6)").weierstrass)
    assert op == parse_operator("theta^2 - t*(10*theta^2+10*theta+3) + 9*t^2*(theta+1)^2")


def test_derive_pf_period_matches_catalog_period():
    for fam in ("EC-X0(3)", "EC-X0(4)", "EC-X1(5)", "EC-X0(6)"):
        e = catalog_lookup(fam)
        derived = frobenius_basis(derive_pf(e.weierstrass), T).h[0]
        assert derived == frobenius_basis(e.operator, T).h[0]


def test_weierstrass_errors():
    with pytest.raises(ValueError, match="discriminant"):
        WeierstrassData.parse("3", "1")
    with pytest.raises(ValueError, match="decouples"):
        derive_pf(WeierstrassData.parse("3", "0"))


def test_catalog_weierstrass_text():
    w = catalog_lookup("EC-X1(5)").weierstrass
    assert w.g2 == Poly([1, -12, 14, 12, 1]).scale(Fraction(1, 12))


def test_hypergeometric_coefficients_factorial_oracle():
    for i, j in ((1, 1), (3, 1), (2, 1), (2, 2)):
        got = hypergeometric_coefficients(i, j, 12)
        want = [Fraction(factorial((i + j) * m), factorial(i * m) * factorial(j * m)) for m in range(13)]
        assert got == want
    assert hypergeometric_coefficients(1, 1, 4) == [1, 2, 6, 20, 70]
    assert hypergeometric_coefficients(3, 1, 3) == [1, 4, 28, 220]


def test_twist_of_x03_period():
    f = frobenius_basis(catalog_lookup("EC-X0(3)").operator, T).h[0]
    tw = twist_series(1, 1, f)
    assert list(tw.coeffs[:3]) == [1, 12, 540]
    assert catalog_lookup("K3-N3").operator.apply(tw).is_zero()


def test_twist_errors():
    f = RationalSeries.one(4)
    with pytest.raises(ValueError, match="alpha"):
        twist_series(1, 1, f, alpha=2)
    with pytest.raises(ValueError):
        twist_series(0, 1, f)


def test_twist_arg_scale():
    f = RationalSeries([1] * 6, 5)
    tw = twist_series(1, 1, f, Fraction(1, 4))
    assert list(tw.coeffs) == [Fraction(c, 4 ** m) for m, c in enumerate([1, 2, 6, 20, 70, 252])]


def test_catalog_lookup():
    e = catalog_lookup("K3-N6")
    assert e.operator == parse_operator("theta^3 - t*(2*theta+1)*(17*theta^2+17*theta+5) + t^2*(theta+1)^3")
    assert e.quantum == e.operator.borel_shift()
    with pytest.raises(CatalogError) as info:
        catalog_lookup("nope")
    assert "K3-N6" in str(info.value) and "nope" in str(info.value)


def test_catalog_ids_and_provenance():
    cat = load_catalog()
    assert len(cat.ids()) == len(set(cat.ids()))
    for want in ("K3-N2", "K3-N11", "K3-BeukersPeters", "K3-N6-twisted", "EC-X0(3)", "EC-X1(5)", "P3-pullback"):
        assert want in cat.ids()
    assert catalog_lookup("K3-N2").provenance("operator")


def test_pullback_entries_have_no_goldens():
    for fam in ("EC-X0(8)", "EC-X0(9)"):
        e = catalog_lookup(fam)
        base = catalog_lookup(e.get("pullback.of"))
        assert e.operator == base.operator.pullback(int(e.get("pullback.power")))
        assert not any(k.endswith(".expect") for k in e.data)


def test_p3_pullback_operator():
    e = catalog_lookup("P3-pullback")
    assert e.operator == parse_operator(
        "theta^3 - t^4*(256*theta^3 + 1536*theta^2 + 2816*theta + 1536)"
    )


def test_load_catalog_text_minimal():
    cat = load_catalog_text(
        "[catalog]\nversion = 7\n\n[X]\nkind = k3\nlevel = 2\noperator = theta^2 - t*(theta+1)^2\n"
    )
    assert cat.version == "7" and cat.lookup("X").operator.order == 2
