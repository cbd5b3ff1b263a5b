import numpy as np
import pytest
from hypothesis import strategies as st

from pharma_bertrand import BASE_CASE, MarketParams
from pharma_bertrand.cli import parse_scenario

# draws closer than this to a vanishing denominator are treated as degenerate
DENOM_MARGIN = 0.01


@pytest.fixture
def base():
    return BASE_CASE


@pytest.fixture
def feasible():
    return parse_scenario("feasible").params


def admissible(alpha, theta):
    return (
        2 * alpha - theta - 1 >= DENOM_MARGIN
        and DENOM_MARGIN <= theta <= 1 - DENOM_MARGIN
        and alpha <= 1 - DENOM_MARGIN
    )


def draw_params(rng, n):
    """Random scenarios over the sensitivity ranges that satisfy the optimality condition."""
    out = []
    while len(out) < n:
        alpha, theta = rng.uniform(0.8, 1.0), rng.uniform(0.0, 0.8)
        if not admissible(alpha, theta):
            continue
        out.append(MarketParams(
            alpha=alpha, theta=theta, beta=rng.uniform(0.01, 1.0), m=rng.uniform(0.01, 1.0),
            t=rng.uniform(0, 20), x=rng.uniform(0, 10), mu1=rng.uniform(0, 200), mu2=rng.uniform(0, 200),
            c1=rng.uniform(119, 231), c2=rng.uniform(49, 231), c3=rng.uniform(49, 231),
        ))
    return out


@st.composite
def valid_params(draw):
    theta = draw(st.floats(DENOM_MARGIN, 0.8 - 3 * DENOM_MARGIN))
    alpha = draw(st.floats((1 + theta + DENOM_MARGIN) / 2, 1 - DENOM_MARGIN))
    money = st.floats(0.0, 200.0)
    return MarketParams(
        alpha=alpha, theta=theta,
        beta=draw(st.floats(0.01, 1.0)), m=draw(st.floats(0.01, 1.0)),
        t=draw(st.floats(0.0, 20.0)), x=draw(st.floats(0.0, 10.0)),
        mu1=draw(money), mu2=draw(money),
        c1=draw(st.floats(119.0, 231.0)), c2=draw(st.floats(49.0, 231.0)), c3=draw(st.floats(49.0, 231.0)),
    )


@st.composite
def any_prices(draw, hi=300.0):
    p = st.floats(0.0, hi)
    return (draw(p), draw(p), draw(p))


@pytest.fixture
def rng():
    return np.random.default_rng(20261018)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.verdict_lines():
        terminalreporter.write_line(line)
