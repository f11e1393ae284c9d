import random

import pytest

from domineering.dyadic import Dyadic
from domineering.notation import parse_value
from domineering.thermo import PiecewiseLinear, mean_value, temperature, thermograph
from domineering.values import GameStore

ZERO = Dyadic(0)


@pytest.fixture
def S():
    return GameStore()


@pytest.mark.parametrize(
    "text, t",
    [("{1|-1}", 1), ("{2|-2}", 2), ("*", 0), ("^", 0), ("v", 0), ("*2", 0), ("{3|1}", 1), ("tiny(2)", 0)],
)
def test_temperatures(S, text, t):
    assert temperature(parse_value(text, S)) == Dyadic(t)


@pytest.mark.parametrize("text", ["0", "1", "-3/4", "5/8"])
def test_numbers_are_masts_from_minus_one(S, text):
    g = parse_value(text, S)
    th = thermograph(g)
    assert th.temperature == Dyadic(-1)
    assert th.mast_value == g.num
    assert th.left_boundary() == [(Dyadic(-1), g.num)]


def test_switch_walls(S):
    th = thermograph(parse_value("{3|1}", S))
    assert th.mast_value == Dyadic(2)
    assert th.left_boundary() == [(Dyadic(-1), Dyadic(4)), (Dyadic(1), Dyadic(2))]
    assert th.right_boundary() == [(Dyadic(-1), Dyadic(0)), (Dyadic(1), Dyadic(2))]


def test_fractional_temperature(S):
    # {1 | 0} cools to 1/2 at temperature 1/2
    th = thermograph(parse_value("{1|0}", S))
    assert th.temperature == Dyadic(1, 1)
    assert th.mast_value == Dyadic(1, 1)


def test_piecewise_linear_evaluation():
    f = PiecewiseLinear([(Dyadic(-1), Dyadic(2)), (Dyadic(1), Dyadic(0))], 0)
    assert f(Dyadic(0)) == Dyadic(1)
    assert f(Dyadic(5)) == Dyadic(0)
    assert f.taxed(1)(Dyadic(0)) == Dyadic(1)
    assert f.slope_after(Dyadic(-1)) == -1


def test_walls_at_zero_are_the_stops(db12):
    for g in db12.store.games():
        th = thermograph(g)
        assert th.left_wall(ZERO) == g.ls
        assert th.right_wall(ZERO) == g.rs


def test_mean_is_additive(db12):
    rng = random.Random(3)
    st = db12.store
    games = [g for g in st.games() if len(g.left) + len(g.right) <= 4]
    for _ in range(150):
        g, h = rng.choice(games), rng.choice(games)
        s = st.add(g, h)
        assert mean_value(s) == mean_value(g) + mean_value(h)
        assert not max(temperature(g), temperature(h)) < temperature(s)


def test_negation_mirrors_the_thermograph(db12):
    st = db12.store
    for g in list(st.games())[:2000]:
        a, b = thermograph(g), thermograph(st.negate(g))
        assert b.temperature == a.temperature
        assert b.mast_value == -a.mast_value
