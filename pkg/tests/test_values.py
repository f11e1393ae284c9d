import random

import pytest
from hypothesis import given, settings, strategies as st

from domineering.dyadic import Dyadic
from domineering.notation import parse_value
from domineering.values import (
    GameStore,
    Kind,
    StoreCapacityError,
    StoreError,
    ValueClass,
    classify,
    is_infinitesimal,
    nim_add,
    stops,
)


@pytest.fixture
def S():
    return GameStore()


def v(S, text):
    return parse_value(text, S)


# -- construction ------------------------------------------------------


def test_make_game_examples(S):
    zero = S.make_game([], [])
    assert zero is S.zero and zero.num == Dyadic(0)
    star = S.make_game([zero], [zero])
    assert star is S.star
    assert S.make_game([zero, star], [zero, star]) is S.nimber(2)
    one, m1 = S.number(1), S.number(-1)
    pm1 = S.make_game([one], [m1])
    assert pm1.left == (one,) and pm1.right == (m1,)


def test_simplicity_rule(S):
    assert S.make_game([S.zero], [S.number(1)]) is S.number(Dyadic(1, 1))
    for n in range(1, 7):
        assert S.make_game([S.number(n - 1)], []) is S.number(n)
        assert S.make_game([], [S.number(-n + 1)]) is S.number(-n)
    assert S.make_game([S.number(Dyadic(1, 1))], [S.number(1)]) is S.number(Dyadic(3, 2))
    # {1 | 1} is 1* and not a number
    g = S.make_game([S.number(1)], [S.number(1)])
    assert g.num is None and g is S.add(S.number(1), S.star)


def test_dominated_and_reversible(S):
    one, two = S.number(1), S.number(2)
    # dominated Left option 1 < 2 disappears
    assert S.make_game([one, two], [S.number(5)]) is S.number(3)
    # {0, * | 0} = up-ish: 0 and * are incomparable, both stay
    g = S.make_game([S.zero, S.star], [S.zero])
    assert len(g.left) == 2
    # {^ | } has reversible option ^ (its Right option * <= {^|}) -> 1
    assert S.make_game([S.up], []) is S.number(1)


def test_foreign_store_rejected(S):
    other = GameStore()
    with pytest.raises(StoreError):
        S.make_game([other.zero], [])


def test_capacity(S):
    small = GameStore(capacity=4)
    with pytest.raises(StoreCapacityError):
        for k in range(10):
            small.number(k)


# -- order -------------------------------------------------------------


def test_leq_examples(S):
    up, star = S.up, S.star
    assert S.leq(S.zero, up) and not S.leq(up, S.zero)
    assert not S.leq(S.zero, star) and not S.leq(star, S.zero)
    assert S.leq(star, S.add(up, up))
    assert not S.leq(up, star) and not S.leq(star, up)


def test_scale_of_tinies(S):
    tinies = {x: v(S, f"tiny({x})") for x in ["1/2", "1", "2", "3"]}
    xs = sorted(tinies, key=Dyadic.parse)
    for i, x in enumerate(xs):
        for y in xs[i + 1 :]:
            ty, tx = tinies[y], tinies[x]
            assert S.leq(ty, tx) and ty is not tx
            acc = S.zero
            for n in range(1, 17):
                acc = S.add(acc, ty)
                assert S.leq(acc, tx), (x, y, n)
    up = S.up
    assert S.leq(tinies["1"], up) and not S.leq(up, tinies["1"])


# -- algebra -----------------------------------------------------------


def test_negate_examples(S):
    assert S.negate(S.number(1)) is S.number(-1)
    assert S.negate(S.nimber(2)) is S.nimber(2)
    assert S.negate(S.up) is S.make_game([S.star], [S.zero])


def test_add_examples(S):
    assert S.add(S.star, S.star) is S.zero
    assert S.add(S.number(Dyadic(1, 1)), S.number(Dyadic(1, 2))) is S.number(Dyadic(3, 2))
    upup = S.add(S.up, S.up)
    assert upup.left == (S.zero,)
    assert upup.right == (S.add(S.up, S.star),)


def test_nim_add():
    assert nim_add(1, 2) == 3
    assert nim_add(1, 3) == 2
    for n in range(16):
        assert nim_add(n, n) == 0


def test_nimber_laws_exhaustive(S):
    for a in range(8):
        assert S.negate(S.nimber(a)) is S.nimber(a)
        for b in range(8):
            assert S.add(S.nimber(a), S.nimber(b)) is S.nimber(a ^ b)


def test_stops_examples(S):
    pm1 = S.make_game([S.number(1)], [S.number(-1)])
    assert stops(pm1) == (Dyadic(1), Dyadic(-1))
    assert stops(S.up) == (Dyadic(0), Dyadic(0))
    assert stops(S.number(Dyadic(7, 3))) == (Dyadic(7, 3), Dyadic(7, 3))


def test_sums_of_database_values_cancel(db12):
    st = db12.store
    for n in range(1, 9):
        for g in set(db12.layers[n].values):
            assert st.add(g, st.negate(g)) is st.zero
            assert st.negate(st.negate(g)) is g


def test_canonical_idempotence(db12):
    st = db12.store
    for g in st.games():
        assert st.make_game(g.left, g.right) is g
        assert st.lookup(g.left, g.right) is g


def _random_games(store, rng, count):
    games = [store.zero, store.star, store.up, store.number(1), store.number(-1)]
    while len(games) < count:
        left = rng.sample(games, rng.randint(0, 2))
        right = rng.sample(games, rng.randint(0, 2))
        games.append(store.make_game(left, right))
    return games


def test_order_and_group_laws_sampled():
    S = GameStore()
    rng = random.Random(7)
    games = _random_games(S, rng, 40)
    for _ in range(400):
        g, h, k = (rng.choice(games) for _ in range(3))
        assert S.leq(g, g)
        if S.leq(g, h) and S.leq(h, k):
            assert S.leq(g, k)
        if S.leq(g, h) and S.leq(h, g):
            assert g is h
        assert S.add(g, h) is S.add(h, g)
        assert S.add(S.add(g, h), k) is S.add(g, S.add(h, k))
        assert S.add(g, S.zero) is g
        assert S.sub(S.add(g, h), h) is g


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_leq_matches_difference_sign(seed):
    S = GameStore()
    rng = random.Random(seed)
    games = _random_games(S, rng, 12)
    g, h = rng.choice(games), rng.choice(games)
    d = S.sub(h, g)
    # g <= h iff Left wins h - g moving second iff no Right option of h-g is <= 0
    assert S.leq(g, h) == all(not S.leq(r, S.zero) for r in d.right) == S.leq(S.zero, d)


# -- classification ----------------------------------------------------


def test_classify_examples(S):
    assert classify(S.zero) == ValueClass(Kind.ZERO)
    assert classify(S.number(Dyadic(3, 2))) == ValueClass(Kind.NUMBER, Dyadic(3, 2))
    assert classify(S.make_game([S.zero], [S.star])) == ValueClass(Kind.UP, n=1)
    assert classify(v(S, "{0|{0|-2}}")) == ValueClass(Kind.TINY, Dyadic(2))
    assert classify(v(S, "{{2|0}|0}")) == ValueClass(Kind.MINY, Dyadic(2))
    assert classify(v(S, "{1|-1}")).kind is Kind.OTHER
    assert classify(v(S, "{0,*|0,*}")) == ValueClass(Kind.NIMBER, n=2)
    assert classify(v(S, "^3*")) == ValueClass(Kind.UP, n=3, star=True)
    assert classify(v(S, "tiny(2+*)")) == ValueClass(Kind.TINY, Dyadic(2), star=True)
    assert classify(v(S, "1/2+tiny(1)")).kind is Kind.INFINITESIMAL
    assert classify(v(S, "{1|*}")).kind is Kind.OTHER


def test_classification_mirrors_under_negation(db12):
    st = db12.store
    for g in st.games():
        assert classify(st.negate(g)) == classify(g).mirror()


def test_classification_is_a_partition(db12):
    # every value gets exactly one kind and the pattern kinds are exclusive
    st = db12.store
    for g in st.games():
        c = classify(g)
        is_num = g.num is not None
        is_nim = st.nimber_value(g) is not None
        assert (c.kind in (Kind.ZERO, Kind.NUMBER)) == is_num
        assert (c.kind is Kind.NIMBER) == (is_nim and g is not st.zero)
        if c.kind in (Kind.UP, Kind.TINY, Kind.MINY, Kind.NIMBER, Kind.ZERO):
            assert is_infinitesimal(g)


def test_up_limit(S):
    ninefold = S.sum([S.up] * 9)
    assert classify(ninefold).kind is Kind.INFINITESIMAL
    assert classify(ninefold, up_limit=9) == ValueClass(Kind.UP, n=9)
