"""Canonical short partizan games.

Games are interned in a :class:`GameStore`: two games are equal exactly when
they are the same Python object.  Options of a stored game are canonical
games of the same store, deduplicated and ordered by a structural digest
that does not depend on the order in which games were created.
"""

from __future__ import annotations

import enum
import hashlib
import threading
from dataclasses import dataclass
from typing import Iterable, Sequence

from .dyadic import ZERO, Dyadic, simplest_between


class StoreError(Exception):
    """Misuse of a game store (foreign options, exhausted capacity)."""


class StoreCapacityError(StoreError, MemoryError):
    pass


class Game:
    """An interned canonical game.  Never construct directly."""

    __slots__ = ("id", "left", "right", "num", "ls", "rs", "store", "digest", "_neg")

    def __repr__(self):
        from .notation import format_value

        return f"<Game #{self.id} {format_value(self)}>"

    def __str__(self):
        from .notation import format_value

        return format_value(self)

    def __reduce__(self):
        raise TypeError("games are store-bound; serialize through a Database")

    @property
    def is_number(self) -> bool:
        return self.num is not None

    def stops(self) -> tuple[Dyadic, Dyadic]:
        return self.ls, self.rs


def _digest(left: Sequence[Game], right: Sequence[Game]) -> bytes:
    h = hashlib.blake2b(digest_size=16)
    for g in left:
        h.update(g.digest)
    h.update(b"|")
    for g in right:
        h.update(g.digest)
    return h.digest()


def _order(opts: Iterable[Game]) -> tuple[Game, ...]:
    return tuple(sorted(opts, key=lambda g: (g.digest, g.id)))


class GameStore:
    """Interning table plus memo caches for ``leq`` and ``add``.

    Interning is serialized by a lock; lookups and memo reads are plain dict
    reads.  Memo writes are idempotent so concurrent workers may race on them.
    ``cache_cap`` bounds each memo; a full memo is cleared wholesale.
    """

    def __init__(self, capacity: int | None = None, cache_cap: int | None = None):
        self.capacity = capacity
        self.cache_cap = cache_cap
        self._table: dict[tuple, Game] = {}
        self._games: list[Game] = []
        self._lock = threading.Lock()
        self._leq: dict[int, bool] = {}
        self._add: dict[int, Game] = {}
        self._numbers: dict[Dyadic, Game] = {}
        self._nimbers: dict[int, Game] = {}
        self._updown: dict[int, tuple[int, bool]] | None = None
        self._updown_limit = 0
        self.zero = self._intern((), ())
        self._numbers[ZERO] = self.zero

    def __len__(self):
        return len(self._games)

    def __getitem__(self, gid: int) -> Game:
        return self._games[gid]

    def games(self) -> list[Game]:
        return list(self._games)

    # ------------------------------------------------------------------
    # interning

    def _intern(self, left: Sequence[Game], right: Sequence[Game]) -> Game:
        key = (tuple(sorted(g.id for g in left)), tuple(sorted(g.id for g in right)))
        g = self._table.get(key)
        if g is not None:
            return g
        with self._lock:
            g = self._table.get(key)
            if g is not None:
                return g
            if self.capacity is not None and len(self._games) >= self.capacity:
                raise StoreCapacityError(f"game store full ({self.capacity} games)")
            g = Game()
            g.id = len(self._games)
            g.left = _order(left)
            g.right = _order(right)
            g.store = self
            g._neg = None
            g.digest = _digest(g.left, g.right)
            g.num = self._number_value(left, right)
            if g.num is not None:
                g.ls = g.rs = g.num
            else:
                g.ls = max(o.rs for o in left)
                g.rs = min(o.ls for o in right)
            self._games.append(g)
            self._table[key] = g
        return g

    @staticmethod
    def _number_value(left, right) -> Dyadic | None:
        for o in left:
            if o.num is None:
                return None
        for o in right:
            if o.num is None:
                return None
        lo = max((o.num for o in left), default=None)
        hi = min((o.num for o in right), default=None)
        if lo is not None and hi is not None and not lo < hi:
            return None
        return simplest_between(lo, hi)

    def check(self, games: Iterable[Game]) -> None:
        for g in games:
            if g.store is not self:
                raise StoreError("option belongs to a different store")

    def intern_canonical(self, left: Sequence[Game], right: Sequence[Game]) -> Game:
        """Intern an option pair already known to be canonical (no checks)."""
        return self._intern(left, right)

    def lookup(self, left: Sequence[Game], right: Sequence[Game]) -> Game | None:
        key = (tuple(sorted(g.id for g in left)), tuple(sorted(g.id for g in right)))
        return self._table.get(key)

    # ------------------------------------------------------------------
    # constructors

    def number(self, x) -> Game:
        if not isinstance(x, Dyadic):
            x = Dyadic.from_fraction(x)
        g = self._numbers.get(x)
        if g is not None:
            return g
        if x.exp == 0:
            step = 1 if x.num > 0 else -1
            g = self.zero
            for k in range(step, x.num + step, step):
                k = Dyadic(k)
                h = self._numbers.get(k)
                if h is None:
                    h = self._intern((g,), ()) if step > 0 else self._intern((), (g,))
                    self._numbers[k] = h
                g = h
            return g
        unit = Dyadic(1, x.exp)
        g = self._intern((self.number(x - unit),), (self.number(x + unit),))
        self._numbers[x] = g
        return g

    def nimber(self, n: int) -> Game:
        g = self._nimbers.get(n)
        if g is None:
            if n == 0:
                g = self.zero
            else:
                opts = [self.nimber(k) for k in range(n)]
                g = self._intern(opts, opts)
            self._nimbers[n] = g
        return g

    @property
    def star(self) -> Game:
        return self.nimber(1)

    @property
    def up(self) -> Game:
        return self._intern((self.zero,), (self.star,))

    def switch(self, a, b) -> Game:
        return self.make_game([self.number(a)], [self.number(b)])

    # ------------------------------------------------------------------
    # order

    def _memo_put(self, memo: dict, key, value):
        if self.cache_cap is not None and len(memo) >= self.cache_cap:
            memo.clear()
        memo[key] = value

    def leq(self, g: Game, h: Game) -> bool:
        if g is h:
            return True
        gn = g.num
        hn = h.num
        if gn is not None:
            if hn is not None:
                return not hn < gn
            # number against non-number: decided by the right stop unless tied
            if gn < h.rs:
                return True
            if h.rs < gn:
                return False
            for hr in h.right:
                if self.leq(hr, g):
                    return False
            return True
        if hn is not None:
            if g.ls < hn:
                return True
            if hn < g.ls:
                return False
            for gl in g.left:
                if self.leq(h, gl):
                    return False
            return True
        # stops are monotone in the order
        if h.ls < g.ls or h.rs < g.rs:
            return False
        key = (g.id << 32) | h.id
        r = self._leq.get(key)
        if r is None:
            r = True
            for gl in g.left:
                if self.leq(h, gl):
                    r = False
                    break
            if r:
                for hr in h.right:
                    if self.leq(hr, g):
                        r = False
                        break
            self._memo_put(self._leq, key, r)
        return r

    def _leq_to_form(self, x: Game, L, R, memo) -> bool:
        """x <= {L | R}"""
        key = (0, x.id)
        r = memo.get(key)
        if r is None:
            r = True
            for gr in R:
                if self.leq(gr, x):
                    r = False
                    break
            if r:
                for xl in x.left:
                    if self._form_leq(L, R, xl, memo):
                        r = False
                        break
            memo[key] = r
        return r

    def _form_leq(self, L, R, y: Game, memo) -> bool:
        """{L | R} <= y"""
        key = (1, y.id)
        r = memo.get(key)
        if r is None:
            r = True
            for gl in L:
                if self.leq(y, gl):
                    r = False
                    break
            if r:
                for yr in y.right:
                    if self._leq_to_form(yr, L, R, memo):
                        r = False
                        break
            memo[key] = r
        return r

    # ------------------------------------------------------------------
    # canonical form

    def make_game(self, left: Iterable[Game], right: Iterable[Game]) -> Game:
        """Canonical form of ``{left | right}`` for canonical options."""
        L = list(dict.fromkeys(left))
        R = list(dict.fromkeys(right))
        self.check(L)
        self.check(R)
        if all(o.num is not None for o in L) and all(o.num is not None for o in R):
            if not L and not R:
                return self.zero
            lo = max((o.num for o in L), default=None)
            hi = min((o.num for o in R), default=None)
            if lo is None or hi is None or lo < hi:
                return self.number(simplest_between(lo, hi))
            return self._intern((self.number(lo),), (self.number(hi),))
        leq = self.leq
        while True:
            if len(L) > 1:
                L = [a for a in L if not any(b is not a and leq(a, b) for b in L)]
            if len(R) > 1:
                R = [a for a in R if not any(b is not a and leq(b, a) for b in R)]
            memo: dict = {}
            changed = False
            newL: list[Game] = []
            for a in L:
                for ar in a.right:
                    if self._leq_to_form(ar, L, R, memo):
                        newL.extend(ar.left)
                        changed = True
                        break
                else:
                    newL.append(a)
            newR: list[Game] = []
            for b in R:
                for bl in b.left:
                    if self._form_leq(L, R, bl, memo):
                        newR.extend(bl.right)
                        changed = True
                        break
                else:
                    newR.append(b)
            if not changed:
                return self._intern(L, R)
            L = list(dict.fromkeys(newL))
            R = list(dict.fromkeys(newR))

    # ------------------------------------------------------------------
    # arithmetic

    def negate(self, g: Game) -> Game:
        n = g._neg
        if n is None:
            if g.num is not None:
                n = self.number(-g.num)
            else:
                n = self._intern(
                    [self.negate(o) for o in g.right], [self.negate(o) for o in g.left]
                )
            g._neg = n
            n._neg = g
        return n

    def add(self, g: Game, h: Game) -> Game:
        if g.num is not None:
            if h.num is not None:
                return self.number(g.num + h.num)
            if g is self.zero:
                return h
        elif h is self.zero:
            return g
        if g.id > h.id:
            g, h = h, g
        key = (g.id << 32) | h.id
        r = self._add.get(key)
        if r is not None:
            return r
        add = self.add
        if g.num is not None:
            # a number never needs to be moved in while the other summand is hot
            r = self.make_game([add(g, o) for o in h.left], [add(g, o) for o in h.right])
        elif h.num is not None:
            r = self.make_game([add(o, h) for o in g.left], [add(o, h) for o in g.right])
        else:
            r = self.make_game(
                [add(o, h) for o in g.left] + [add(g, o) for o in h.left],
                [add(o, h) for o in g.right] + [add(g, o) for o in h.right],
            )
        self._memo_put(self._add, key, r)
        return r

    def sum(self, games: Iterable[Game]) -> Game:
        total = self.zero
        for g in games:
            total = self.add(total, g)
        return total

    def sub(self, g: Game, h: Game) -> Game:
        return self.add(g, self.negate(h))

    # ------------------------------------------------------------------
    # recognizers

    def nimber_value(self, g: Game) -> int | None:
        """n if g is the nimber *n, else None."""
        if g is self.zero:
            return 0
        if g.left != g.right or g.num is not None:
            return None
        heaps = set()
        for o in g.left:
            k = self.nimber_value(o)
            if k is None:
                return None
            heaps.add(k)
        n = len(g.left)
        return n if heaps == set(range(n)) else None

    def updown_table(self, limit: int = 8) -> dict[int, tuple[int, bool]]:
        if self._updown is None or self._updown_limit < limit:
            table: dict[int, tuple[int, bool]] = {}
            up, down, star = self.up, self.negate(self.up), self.star
            for base, sign in ((up, 1), (down, -1)):
                g = self.zero
                for n in range(1, limit + 1):
                    g = self.add(g, base)
                    table[g.id] = (sign * n, False)
                    table[self.add(g, star).id] = (sign * n, True)
            self._updown = table
            self._updown_limit = limit
        return self._updown


# ----------------------------------------------------------------------
# classification


class Kind(enum.Enum):
    ZERO = "zero"
    NUMBER = "number"
    NIMBER = "nimber"
    UP = "updown"
    TINY = "tiny"
    MINY = "miny"
    INFINITESIMAL = "number+infinitesimal"
    OTHER = "other"


@dataclass(frozen=True)
class ValueClass:
    """Classification verdict.

    ``number`` holds the value of a Number and the numeric part of a tiny or
    miny subscript; ``n`` is the nimber heap or the signed up multiple;
    ``star`` flags ``n.^ + *`` and starred subscripts such as tiny(2+*).
    """

    kind: Kind
    number: Dyadic | None = None
    n: int = 0
    star: bool = False

    def mirror(self) -> "ValueClass":
        k = self.kind
        if k in (Kind.NUMBER, Kind.INFINITESIMAL):
            return ValueClass(k, -self.number)
        if k is Kind.UP:
            return ValueClass(k, n=-self.n, star=self.star)
        if k is Kind.TINY:
            return ValueClass(Kind.MINY, self.number, star=self.star)
        if k is Kind.MINY:
            return ValueClass(Kind.TINY, self.number, star=self.star)
        return self


def _subscript(x: Game, sign: int) -> tuple[Dyadic, bool] | None:
    """Read the tiny subscript from the far option: ``-x`` (tiny) or ``x`` (miny)."""
    if x.num is not None:
        v = x.num * sign
        return (v, False) if ZERO < v else None
    # number plus star is {y | y}
    if len(x.left) == 1 and x.left == x.right and x.left[0].num is not None:
        v = x.left[0].num * sign
        return (v, True) if ZERO < v else None
    return None


def classify(g: Game, up_limit: int = 8) -> ValueClass:
    store = g.store
    if g is store.zero:
        return ValueClass(Kind.ZERO)
    if g.num is not None:
        return ValueClass(Kind.NUMBER, g.num)
    n = store.nimber_value(g)
    if n is not None:
        return ValueClass(Kind.NIMBER, n=n)
    ud = store.updown_table(up_limit).get(g.id)
    if ud is not None:
        return ValueClass(Kind.UP, n=ud[0], star=ud[1])
    zero = store.zero
    # tiny: {0 || 0 | -x}
    if g.left == (zero,) and len(g.right) == 1:
        h = g.right[0]
        if h.left == (zero,) and len(h.right) == 1:
            sub = _subscript(h.right[0], -1)
            if sub is not None:
                return ValueClass(Kind.TINY, sub[0], star=sub[1])
    # miny: {x | 0 || 0}
    if g.right == (zero,) and len(g.left) == 1:
        h = g.left[0]
        if h.right == (zero,) and len(h.left) == 1:
            sub = _subscript(h.left[0], 1)
            if sub is not None:
                return ValueClass(Kind.MINY, sub[0], star=sub[1])
    if g.ls == g.rs:
        return ValueClass(Kind.INFINITESIMAL, g.ls)
    return ValueClass(Kind.OTHER)


def is_infinitesimal(g: Game) -> bool:
    """Both stops zero (the independent test, numbers excluded except 0)."""
    return g.ls == ZERO and g.rs == ZERO


# ----------------------------------------------------------------------
# module-level API on the default store

_default = GameStore()


def default_store() -> GameStore:
    return _default


def make_game(left: Sequence[Game] = (), right: Sequence[Game] = (), store: GameStore | None = None) -> Game:
    opts = list(left) + list(right)
    if store is None:
        store = opts[0].store if opts else _default
    return store.make_game(left, right)


def leq(g: Game, h: Game) -> bool:
    if g.store is not h.store:
        raise StoreError("games from different stores")
    return g.store.leq(g, h)


def negate(g: Game) -> Game:
    return g.store.negate(g)


def add(g: Game, h: Game) -> Game:
    if g.store is not h.store:
        raise StoreError("games from different stores")
    return g.store.add(g, h)


def nim_add(a: int, b: int) -> int:
    return a ^ b


def stops(g: Game) -> tuple[Dyadic, Dyadic]:
    return g.ls, g.rs


def number(x, store: GameStore | None = None) -> Game:
    return (store or _default).number(x)


def nimber(n: int, store: GameStore | None = None) -> Game:
    return (store or _default).nimber(n)
