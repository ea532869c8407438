from fractions import Fraction

from hypothesis import settings, strategies as st

from mumops.series import RationalSeries

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

small_rationals = st.builds(
    Fraction, st.integers(-9, 9), st.integers(1, 5)
)


@st.composite
def series(draw, truncation=st.integers(1, 8), constant=None, linear=None):
    T = draw(truncation) if not isinstance(truncation, int) else truncation
    cs = draw(st.lists(small_rationals, min_size=T + 1, max_size=T + 1))
    if constant is not None:
        cs[0] = Fraction(constant)
    if linear is not None:
        cs[1] = Fraction(linear)
    return RationalSeries(cs, T)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
