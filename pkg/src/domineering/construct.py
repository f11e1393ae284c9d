"""Positions with prescribed values, built from certified fragments.

A cell ``x`` outside a fragment ``G`` is *explosive* when adding it does not
change the value.  Fragments joined through a common explosive square, and
otherwise sharing no edges, add their values; one explosive side suffices
when the two fragments meet the square on opposite sides.  Constructors find
concrete fragments by search, join them this way and then evaluate the result
(the bridge-aware engine re-checks every explosivity condition it relies on).
Nothing is returned unverified.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from itertools import permutations, product
from typing import Iterable, Iterator, Sequence

from .board import (
    D2,
    Position,
    bb_symkey,
    cell_components,
    format_position,
)
from .dyadic import Dyadic
from .engine import EvalContext
from .values import Game, GameStore, default_store

log = logging.getLogger(__name__)

Cell = tuple[int, int]
_SIDES = ((-1, 0), (1, 0), (0, -1), (0, 1))


class ConstructionError(Exception):
    pass


class GeometryError(ConstructionError, ValueError):
    pass


class SearchFailure(ConstructionError):
    def __init__(self, message: str, bound: int | None = None):
        if bound is not None:
            message = f"{message} (search bound {bound})"
        super().__init__(message)
        self.bound = bound


class VerificationFailure(ConstructionError):
    pass


def _nbrs(cell: Cell) -> list[Cell]:
    r, c = cell
    return [(r + dr, c + dc) for dr, dc in _SIDES]


def _touching(cells, cell: Cell) -> list[Cell]:
    return [q for q in _nbrs(cell) if q in cells]


def _map_cell(sigma: str, h: int, w: int, cell: Cell) -> Cell:
    r, c = cell
    if sigma == "identity":
        return r, c
    if sigma == "mirror_x":
        return r, w - 1 - c
    if sigma == "mirror_y":
        return h - 1 - r, c
    if sigma == "rot180":
        return h - 1 - r, w - 1 - c
    if sigma == "rot90":
        return c, h - 1 - r
    if sigma == "rot270":
        return w - 1 - c, r
    raise GeometryError(f"unknown transform {sigma!r}")


def _bounds(cells) -> tuple[int, int, int, int]:
    rs = [r for r, _ in cells]
    cs = [c for _, c in cells]
    return min(rs), min(cs), max(rs) - min(rs) + 1, max(cs) - min(cs) + 1


def _rotate_cells(cells, extra: Iterable[Cell] = ()) -> tuple[frozenset, list[Cell]]:
    """Quarter turn of ``cells`` (value negation); ``extra`` cells follow along."""
    r0, c0, h, _ = _bounds(cells)
    f = lambda q: (q[1] - c0, h - 1 - (q[0] - r0))
    return frozenset(map(f, cells)), [f(q) for q in extra]


# ----------------------------------------------------------------------
# fragments


@dataclass(frozen=True)
class AnchoredFragment:
    """A fragment with an explosive attachment square ``anchor``.

    ``head`` optionally names a second explosive square; a fragment with both
    is certified for the pair jointly, so it can sit inside a chain.
    """

    position: Position
    anchor: Cell | None
    certified: bool = False
    head: Cell | None = None
    value: Game | None = None

    def transformed(self, sigma: str) -> "AnchoredFragment":
        """Image under a D2 symmetry (values are invariant)."""
        if sigma not in D2:
            raise GeometryError(f"{sigma} is not a value-preserving symmetry")
        p = self.position
        if not p.cells:
            return self
        m = lambda q: None if q is None else _map_cell(sigma, p.height, p.width, q)
        cells = frozenset(m(q) for q in p.cells)
        return AnchoredFragment(
            Position(p.height, p.width, cells), m(self.anchor), self.certified, m(self.head), self.value
        )

    def reversed(self) -> "AnchoredFragment":
        if self.head is None:
            return self
        return AnchoredFragment(self.position, self.head, self.certified, self.anchor, self.value)

    def __str__(self):
        return f"{format_position(self.position)} anchor={self.anchor} head={self.head}"


class Workbench:
    """Evaluation context, database and discovery caches shared by constructors."""

    def __init__(self, db=None, store: GameStore | None = None, snake_bound: int = 24, word_bound: int = 14):
        self.db = db
        self.store = db.store if db is not None else (store or default_store())
        self.snake_bound = snake_bound
        self.word_bound = word_bound
        self.ctx = EvalContext(self.store, database=db, use_bridges=True, node_budget=None)
        self.fragments: dict = {}

    # -- evaluation -----------------------------------------------------

    def value(self, cells, hints: Iterable[Cell] = ()) -> Game:
        """Value of an absolute cell set, splitting at explosive bridges."""
        cells = frozenset(cells)
        saved = self.ctx.hints
        self.ctx.hints = frozenset(hints)
        try:
            return self.ctx.region_cells(cells)
        finally:
            self.ctx.hints = saved

    def database(self, size: int):
        """A database covering ``size``, built in memory when missing."""
        if self.db is None or self.db.max_size < size:
            from .database import build

            log.info("building an in-memory database to size %d", size)
            self.db = build(max(size, 8), store=self.store, base=self.db)
            self.ctx.database = self.db
        return self.db

    def smallest(self, v: Game) -> Position | None:
        """Smallest stored position of value ``v`` (least key within a size)."""
        if self.db is None:
            return None
        index = self.fragments.get(("smallest", id(self.db)))
        if index is None:
            index = {}
            for n in self.db.sizes():
                for k, g in self.db.layers[n].records():
                    index.setdefault(g.id, k)
            self.fragments[("smallest", id(self.db))] = index
        k = index.get(v.id)
        return None if k is None else Position.from_bits(k)

    def verify(self, cells, expected: Game, hints: Iterable[Cell] = ()) -> Position:
        """Evaluate a constructed region; it must be one component of value ``expected``."""
        cells = frozenset(cells)
        if len(cell_components(cells)) != 1:
            raise VerificationFailure("constructed region is not connected")
        got = self.value(cells, hints)
        if got is not expected:
            raise VerificationFailure(f"constructed value {got}, expected {expected}")
        return Position.from_cells(cells)

    # -- explosive squares ----------------------------------------------

    def explosive_cells(self, cells: frozenset, value: Game | None = None) -> list[Cell]:
        """Outside cells meeting ``cells`` on exactly one side that keep the value."""
        if value is None:
            value = self.value(cells)
        out = []
        cand = {q for p in cells for q in _nbrs(p) if q not in cells}
        for q in sorted(cand):
            if len(_touching(cells, q)) == 1 and self.value(cells | {q}) is value:
                out.append(q)
        return out

    def anchor_pairs(self, cells: frozenset, value: Game) -> list[tuple[Cell, Cell]]:
        """Jointly explosive pairs of non-adjacent squares, chainable pairs first."""
        ex = self.explosive_cells(cells, value)
        pairs = []
        for i, a in enumerate(ex):
            for b in ex[i + 1 :]:
                if abs(a[0] - b[0]) + abs(a[1] - b[1]) <= 1:
                    continue
                if self.value(cells | {a, b}) is value:
                    pairs.append((a, b))
        r0, c0, h, w = _bounds(cells)
        outside = lambda q: not (r0 <= q[0] < r0 + h and c0 <= q[1] < c0 + w)
        return sorted(
            pairs,
            key=lambda ab: (
                not _translates(cells, *ab),
                -outside(ab[0]) - outside(ab[1]),
                -abs(ab[0][0] - ab[1][0]) - abs(ab[0][1] - ab[1][1]),
                ab,
            ),
        )

    def certify(self, p: Position, anchor: Cell, head: Cell | None = None) -> AnchoredFragment:
        v = self.value(p.cells)
        ok = is_explosive(p, anchor, self) and (head is None or is_explosive(p, head, self))
        if ok and head is not None:
            ok = self.value(p.cells | {anchor, head}) is v
        return AnchoredFragment(p, anchor, ok, head, v)

    def variants(self, f: AnchoredFragment) -> list[AnchoredFragment]:
        """``f`` re-anchored at each of its jointly explosive pairs, ``f`` first."""
        key = ("variants", f.position.cells, f.anchor, f.head)
        if key not in self.fragments:
            out = [f]
            for a, b in self.anchor_pairs(f.position.cells, f.value):
                if {a, b} != {f.anchor, f.head}:
                    out.append(AnchoredFragment(f.position, a, True, b, f.value))
            self.fragments[key] = out
        return self.fragments[key]

    # -- fragment discovery ---------------------------------------------

    def find_fragment(self, v: Game, max_size: int = 12, paths_only: bool = False) -> AnchoredFragment:
        """Smallest database position of value ``v`` with a jointly explosive pair."""
        key = ("fragment", v.id, paths_only)
        if key in self.fragments:
            return self.fragments[key]
        from .database import find_by_value

        for size in range(1, max_size + 1):
            db = self.database(size)
            for p, _ in find_by_value(db, v, size):
                if paths_only and not _is_path(p.cells):
                    continue
                frag = self._anchor(p, v)
                if frag is not None:
                    self.fragments[key] = frag
                    return frag
        raise SearchFailure(f"no anchored fragment of value {v}", max_size)

    def _anchor(self, p: Position, v: Game, chainable: bool = False) -> AnchoredFragment | None:
        """``p`` with its preferred jointly explosive pair; with ``chainable``
        only a pair along which copies chain by translation is accepted."""
        seen = set()
        for sigma in D2:
            q = AnchoredFragment(p, None).transformed(sigma).position
            if q.cells in seen:
                continue
            seen.add(q.cells)
            pairs = self.anchor_pairs(q.cells, v)
            if pairs and (not chainable or _translates(q.cells, *pairs[0])):
                a, b = pairs[0]
                return AnchoredFragment(q, a, True, b, v)
        return None

    def find_snake(self, n: int) -> AnchoredFragment:
        """A path fragment of value 1/2^n whose copies chain by translation.

        The value of a path depends only on its word of step types, so the
        search runs over words, shortest first: every word up to
        ``word_bound`` steps, then longer extensions of the shortest word of
        value 1/2^(n-1).  Hits are realized as staircases.
        """
        key = ("snake", n)
        if key in self.fragments:
            return self.fragments[key]
        target = self.store.number(Dyadic(1, n))
        if n <= 3:
            frag = self.find_fragment(target, paths_only=True)
            self.fragments[("snake-word", n)] = _step_word(_path_order(frag.position.cells))
        else:
            self.find_snake(n - 1)
            prev = self.fragments[("snake-word", n - 1)]
            frag = None
            for w in _snake_words(prev, self.snake_bound - 1, self.word_bound):
                if self.word_value(w) is not target:
                    continue
                self.fragments.setdefault(("snake-word", n), w)
                frag = self._anchor(Position.from_cells(_walk(_staircase(w))), target, chainable=True)
                if frag is not None:
                    break
        if frag is None:
            raise SearchFailure(f"no snake of value 1/2^{n}", self.snake_bound)
        self.fragments[key] = frag
        return frag

    def word_value(self, w: str) -> Game:
        """Value of a path whose consecutive steps are ``w`` (V vertical, H horizontal)."""
        memo = self.fragments.setdefault("words", {"": self.store.zero})
        g = memo.get(w)
        if g is not None:
            return g
        st = self.store
        left, right = [], []
        for i, e in enumerate(w):
            # a domino on step i also removes the steps on either side
            rest = st.add(self.word_value(w[: max(i - 1, 0)]), self.word_value(w[i + 2 :]))
            (left if e == "V" else right).append(rest)
        g = memo[w] = st.make_game(left, right)
        return g


def _step_word(path: Sequence[Cell]) -> str:
    return "".join("V" if a[1] == b[1] else "H" for a, b in zip(path, path[1:]))


def _staircase(word: str) -> str:
    return word.replace("V", "D").replace("H", "L")


def _snake_words(prev: str, max_len: int, exhaustive: int, max_extra: int = 9) -> Iterator[str]:
    """Words by length: all of them up to ``exhaustive``, then extensions of ``prev``."""
    ext: dict[int, set] = {}
    for k in range(1, max_extra + 1):
        for u in product("VH", repeat=k):
            u = "".join(u)
            for w in (prev + u, u + prev):
                ext.setdefault(len(w), set()).add(w)
    for n in range(1, max_len + 1):
        if n <= exhaustive:
            yield from ("".join(u) for u in product("VH", repeat=n))
        else:
            yield from sorted(ext.get(n, ()))


def _translates(cells: frozenset, a: Cell, b: Cell, copies: int = 3) -> bool:
    """Whether translating by ``b - a`` chains ``copies`` copies without contact."""
    d = (b[0] - a[0], b[1] - a[1])
    placed = set(cells) | {a}
    for i in range(1, copies):
        sh = {(r + i * d[0], c + i * d[1]) for r, c in cells}
        if not _compatible(placed, sh, (a[0] + i * d[0], a[1] + i * d[1])):
            return False
        placed |= sh | {(a[0] + (i + 1) * d[0], a[1] + (i + 1) * d[1])}
    return True


def _compatible(placed: set, new: set, bridge: Cell) -> bool:
    """``new`` meets ``placed`` only through ``bridge``, on one side each."""
    if placed & new:
        return False
    for q in new:
        for x in _nbrs(q):
            if x in placed and x != bridge:
                return False
    return len(_touching(new, bridge)) == 1


# ----------------------------------------------------------------------
# path polyominoes


_STEP = {"U": (-1, 0), "D": (1, 0), "L": (0, -1), "R": (0, 1)}


def _walk(moves: str) -> list[Cell] | None:
    """Cells of a walk if it is an induced path (no contacts but consecutive)."""
    path = [(0, 0)]
    index = {(0, 0): 0}
    for m in moves:
        dr, dc = _STEP[m]
        r, c = path[-1]
        q = (r + dr, c + dc)
        if q in index:
            return None
        for x in _nbrs(q):
            j = index.get(x)
            if j is not None and j != len(path) - 1:
                return None
        index[q] = len(path)
        path.append(q)
    return path


def _is_path(cells) -> bool:
    deg = [len(_touching(cells, q)) for q in cells]
    if len(cells) == 1:
        return True
    return max(deg) <= 2 and deg.count(1) == 2 and len(cell_components(cells)) == 1


def _path_order(cells) -> list[Cell]:
    cells = set(cells)
    ends = sorted(q for q in cells if len(_touching(cells, q)) <= 1)
    path = [ends[0]]
    prev = None
    while len(path) < len(cells):
        nxt = [q for q in _touching(cells, path[-1]) if q != prev]
        prev = path[-1]
        path.append(nxt[0])
    return path


def _path_moves(path: Sequence[Cell]) -> str:
    inv = {v: k for k, v in _STEP.items()}
    return "".join(inv[(b[0] - a[0], b[1] - a[1])] for a, b in zip(path, path[1:]))


def path_polyominoes(size: int) -> Iterator[Position]:
    """Width-1 path polyominoes of ``size`` cells, one per D2 class (fits 15x15)."""
    seen: set[int] = set()

    def rec(path, cells):
        if len(path) == size:
            p = Position.from_cells(path)
            if p.fits_bitboard():
                k = bb_symkey(p.bits)
                if k not in seen:
                    seen.add(k)
                    yield p
            return
        for q in _nbrs(path[-1]):
            if q in cells or len(_touching(cells, q)) != 1:
                continue
            cells.add(q)
            path.append(q)
            yield from rec(path, cells)
            path.pop()
            cells.discard(q)

    if size == 1:
        yield Position.from_cells([(0, 0)])
        return
    for first in ((0, 1), (1, 0)):
        yield from rec([(0, 0), first], {(0, 0), first})


# ----------------------------------------------------------------------
# public operations

_benches: dict[int, Workbench] = {}


def workbench(db=None) -> Workbench:
    """Shared workbench per database (or for the default store)."""
    key = id(db)
    wb = _benches.get(key)
    if wb is None or wb.db is not db and db is not None:
        wb = _benches[key] = Workbench(db)
    return wb


def _wb(bench, db) -> Workbench:
    return bench if bench is not None else workbench(db)


def is_explosive(p: Position, cell: Cell, bench: Workbench | None = None) -> bool:
    """Whether adding ``cell`` to ``p`` leaves the value unchanged."""
    cell = tuple(cell)
    if cell in p.cells:
        raise GeometryError(f"{cell} is already in the region")
    if not _touching(p.cells, cell):
        raise GeometryError(f"{cell} is not adjacent to the region")
    wb = _wb(bench, None)
    return wb.value(p.cells | {cell}) is wb.value(p.cells)


def compose_bridge(
    a: AnchoredFragment,
    b: AnchoredFragment,
    geometry: str = "identity",
    bench: Workbench | None = None,
) -> Position:
    """Join ``b`` (after the D2 symmetry ``geometry``) to ``a`` at ``a.anchor``.

    ``b.anchor`` is placed on ``a.anchor``.  An empty ``b`` just adds the
    square.  The result is evaluated and must equal value(a) + value(b).
    """
    wb = _wb(bench, None)
    if a.anchor is None:
        raise GeometryError("first fragment has no anchor")
    if not a.certified:
        raise GeometryError("first fragment is not certified")
    x = a.anchor
    cells = set(a.position.cells)
    if len(_touching(cells, x)) != 1:
        raise GeometryError("anchor must meet the fragment on exactly one side")
    va = a.value if a.value is not None else wb.value(a.position.cells)
    if b.position.cells:
        if not b.certified or b.anchor is None:
            raise GeometryError("second fragment is not certified")
        bb = b.transformed(geometry)
        dr, dc = x[0] - bb.anchor[0], x[1] - bb.anchor[1]
        new = {(r + dr, c + dc) for r, c in bb.position.cells}
        if new & (cells | {x}):
            raise GeometryError("fragments overlap")
        if not _compatible(cells, new, x):
            raise GeometryError("fragments share an edge away from the bridge")
        vb = b.value if b.value is not None else wb.value(b.position.cells)
    else:
        new = set()
        vb = wb.store.zero
    total = frozenset(cells | new | {x})
    return wb.verify(total, wb.store.add(va, vb), hints=[x])


@dataclass(frozen=True)
class BridgeTrial:
    g: frozenset
    h: frozenset
    bridge: Cell
    expected: Game
    actual: Game

    @property
    def ok(self) -> bool:
        return self.expected is self.actual

    @property
    def joined(self) -> Position:
        return Position.from_cells(self.g | self.h | {self.bridge})


def bridge_trials(
    db,
    samples: int = 1000,
    seed: int = 0,
    max_fragment: int = 7,
    opposite: bool = False,
) -> list[BridgeTrial]:
    """Random bridge compositions of database records, checked by plain evaluation.

    ``G`` is a record with a random explosive square ``c``.  By default ``H``
    is a record (any D2 image) placed so that one of its own explosive
    squares lands on ``c``, and the expected value is ``G + H``.  With
    ``opposite`` any ``H`` meeting ``c`` on the side facing away from ``G``
    is used and the expected value is ``G + (c plus H)``.  Fragments never
    share an edge.  The actual value comes from an evaluator that does not
    split at bridges.
    """
    rng = random.Random(seed)
    st = db.store
    ctx = EvalContext(st, database=db)
    val = lambda cells: ctx.region_cells(frozenset(cells))
    pool = [k for n in db.sizes() if n <= max_fragment for k in db.layers[n].keys]
    explosive: dict = {}

    def squares(cells: frozenset) -> list[Cell]:
        if cells not in explosive:
            v = val(cells)
            cand = sorted({q for p in cells for q in _nbrs(p) if q not in cells})
            explosive[cells] = [q for q in cand if len(_touching(cells, q)) == 1 and val(cells | {q}) is v]
        return explosive[cells]

    def record() -> frozenset:
        p = Position.from_bits(rng.choice(pool))
        return AnchoredFragment(p, None).transformed(rng.choice(D2)).position.cells

    out = []
    tries = 0
    while len(out) < samples:
        tries += 1
        if tries > 200 * samples:
            raise SearchFailure("too few compatible fragment pairs", max_fragment)
        g = record()
        ex = squares(g)
        if not ex:
            continue
        c = rng.choice(ex)
        side = _touching(g, c)[0]
        h0 = record()
        if opposite:
            far = (2 * c[0] - side[0], 2 * c[1] - side[1])
            x = rng.choice(sorted(h0))
            dr, dc = far[0] - x[0], far[1] - x[1]
        else:
            hx = squares(h0)
            if not hx:
                continue
            e = rng.choice(hx)
            dr, dc = c[0] - e[0], c[1] - e[1]
        h = frozenset((r + dr, cc + dc) for r, cc in h0)
        if not _compatible(set(g), set(h), c) or c in h:
            continue
        if opposite:
            expected = st.add(val(g), val(h | {c}))
        else:
            expected = st.add(val(g), val(h))
        out.append(BridgeTrial(g, h, c, expected, val(g | h | {c})))
    return out


def make_integer(k: int, bench: Workbench | None = None) -> Position:
    """A straight chain: 2k vertical cells, 2|k| horizontal cells, or one cell."""
    if k == 0:
        cells = [(0, 0)]
    elif k > 0:
        cells = [(r, 0) for r in range(2 * k)]
    else:
        cells = [(0, c) for c in range(-2 * k)]
    wb = _wb(bench, None)
    return wb.verify(cells, wb.store.number(k))


@dataclass
class _Chain:
    cells: set = field(default_factory=set)
    bridges: list = field(default_factory=list)
    tail: Cell | None = None
    head: Cell | None = None

    def blocked(self) -> set:
        return self.cells | set(self.bridges)


def _placements(ch: _Chain, variants: Sequence[AnchoredFragment]):
    """Ways to attach a fragment at the chain head, farthest new head first."""
    x = ch.head
    placed = ch.blocked()
    out = []
    for f, sigma, flip in product(variants, D2, (False, True)):
        g = f.transformed(sigma)
        if flip:
            g = g.reversed()
        dr, dc = x[0] - g.anchor[0], x[1] - g.anchor[1]
        new = {(r + dr, c + dc) for r, c in g.position.cells}
        head = (g.head[0] + dr, g.head[1] + dc)
        if not _compatible(placed | {ch.tail}, new, x):
            continue
        if head in placed or head == ch.tail or any(q in placed or q == ch.tail for q in _nbrs(head)):
            continue
        dist = abs(head[0] - ch.tail[0]) + abs(head[1] - ch.tail[1])
        out.append((-dist, len(out), new, head))
    out.sort(key=lambda t: t[:2])
    return [(new, head) for _, _, new, head in out]


def _chain(frags: Sequence, max_steps: int = 20000) -> _Chain:
    """Place fragments tail-to-head by backtracking.

    Each entry is a fragment or a list of alternative anchorings of one
    fragment; each link may use any D2 image of any alternative.
    """
    links = [f if isinstance(f, (list, tuple)) else [f] for f in frags]
    first = links[0][0]
    ch = _Chain(set(first.position.cells), [], first.anchor, first.head)
    steps = 0

    def rec(i: int) -> bool:
        nonlocal steps
        if i == len(links):
            return True
        x = ch.head
        for new, head in _placements(ch, links[i]):
            steps += 1
            if steps > max_steps:
                return False
            ch.cells |= new
            ch.bridges.append(x)
            ch.head = head
            if rec(i + 1):
                return True
            ch.cells -= new
            ch.bridges.pop()
            ch.head = x
        return False

    if not rec(1):
        raise GeometryError(f"cannot place {len(links)} links without contact")
    return ch


def _hang_integer(ch: _Chain, k: int) -> None:
    """Hang a vertical chain of 2k cells off the free head or tail square."""
    for end in (ch.head, ch.tail):
        side = _touching(ch.cells, end)[0]
        for dr in (1, -1):
            if side == (end[0] + dr, end[1]):
                continue
            new = {(end[0] + dr * t, end[1]) for t in range(1, 2 * k + 1)}
            others = ch.blocked() | {ch.head, ch.tail}
            if new & others:
                continue
            if any(q in others and q != end for p in new for q in _nbrs(p)):
                continue
            ch.cells |= new
            ch.bridges.append(end)
            return
    raise GeometryError(f"no room to attach an integer chain of length {2 * k}")


def _assemble(parts: list[int], frag: dict, whole: int, wb: Workbench, max_orders: int = 720) -> _Chain:
    """Chain the fragments for ``parts``, trying link orders until one fits."""
    seen = set()
    for order in permutations(parts):
        if order in seen:
            continue
        seen.add(order)
        if len(seen) > max_orders:
            break
        try:
            ch = _chain([wb.variants(frag[j]) for j in order])
            if whole:
                _hang_integer(ch, whole)
            return ch
        except GeometryError:
            continue
    raise GeometryError(f"no link order of {len(parts)} fragments fits without contact")


def make_fraction(
    q,
    db=None,
    strategy: str = "copies",
    bench: Workbench | None = None,
    use_database: bool = True,
) -> Position:
    """A single connected region of value ``q`` (a dyadic rational).

    With ``use_database`` a value already stored in the database is returned
    as its smallest stored position.  Otherwise the fractional part m/2^n is
    a chain of fragments: m copies of the 1/2^n fragment
    (``strategy="copies"``) or one 1/2^j fragment per binary digit
    (``strategy="binary"``, much smaller).  The integer part hangs off a free
    explosive end as an even vertical chain.  Negative values are quarter
    turns of the positive construction.
    """
    wb = _wb(bench, db)
    q = q if isinstance(q, Dyadic) else Dyadic.from_fraction(q) if not isinstance(q, str) else Dyadic.parse(q)
    if strategy not in ("copies", "binary"):
        raise ValueError(f"unknown strategy {strategy!r}")
    target = wb.store.number(q)
    if use_database:
        p = wb.smallest(target)
        if p is not None:
            return wb.verify(p.cells, target)
    if q.exp == 0:
        return make_integer(q.num, wb)
    neg = q < Dyadic(0)
    x = -q if neg else q
    whole = x.floor()
    frac_num, n = x.num - (whole << x.exp), x.exp
    if strategy == "binary":
        parts = [n - j for j in range(n) if frac_num >> j & 1]
    else:
        parts = [n] * frac_num
    frag = {j: wb.find_snake(j) if j > 3 else wb.find_fragment(wb.store.number(Dyadic(1, j))) for j in set(parts)}
    ch = _assemble(parts, frag, whole, wb)
    cells, hints = frozenset(ch.cells | set(ch.bridges)), list(ch.bridges)
    if neg:
        cells, hints = _rotate_cells(cells, hints)
    return wb.verify(cells, target, hints)


def make_up(n: int, db=None, bench: Workbench | None = None) -> Position:
    """n.^ (or |n|.v for n < 0) as one region of 1 + 5|n| cells."""
    if n == 0:
        raise ValueError("n must be nonzero")
    wb = _wb(bench, db)
    unit, step, common = _up_step(wb)
    cells = set()
    for i in range(abs(n)):
        cells |= {(r + i * step[0], c + i * step[1]) for r, c in unit}
    hints = [(common[0] + i * step[0], common[1] + i * step[1]) for i in range(abs(n) - 1)]
    if len(cells) != 1 + 5 * abs(n) or len(cell_components(cells)) != 1:
        raise VerificationFailure("up chain lost its shape")
    if n < 0:
        cells, hints = _rotate_cells(cells, hints)
    st = wb.store
    target = st.sum([st.up if n > 0 else st.negate(st.up)] * abs(n))
    return wb.verify(cells, target, hints)


def _up_step(wb: Workbench):
    """The size-6 up region, a translation overlapping it in one cell, that cell.

    Steps are tried vertical first, then shortest; a step is accepted when two
    copies are worth 2.^ and three copies stay a single 16-cell region.
    """
    if "up" in wb.fragments:
        return wb.fragments["up"]
    from .database import find_by_value

    db = wb.database(max(6, wb.db.max_size if wb.db else 6))
    up2 = wb.store.add(wb.store.up, wb.store.up)
    cands = []
    for p, _ in find_by_value(db, wb.store.up, 6):
        for k, sigma in enumerate(D2):
            u = AnchoredFragment(p, None).transformed(sigma).position.cells
            for dr in range(-3, 4):
                for dc in range(-3, 4):
                    sh = {(r + dr, c + dc) for r, c in u}
                    common = sh & u
                    if len(common) != 1 or not 0 < dr * 4 + dc:
                        continue
                    cands.append(((abs(dc) > abs(dr), abs(dr) + abs(dc), k, dr, dc), u, (dr, dc), min(common)))
    cands.sort(key=lambda t: t[0])
    for _, u, (dr, dc), common in cands:
        two = frozenset(u | {(r + dr, c + dc) for r, c in u})
        three = two | {(r + 2 * dr, c + 2 * dc) for r, c in u}
        if len(three) != 16 or len(cell_components(three)) != 1:
            continue
        if wb.value(two) is up2:
            wb.fragments["up"] = (u, (dr, dc), common)
            return wb.fragments["up"]
    raise SearchFailure("no overlapping chain of size-6 up regions", 6)


# ----------------------------------------------------------------------
# nimbers

# *1 pieces: the corner (L-tromino) and the small T (T-tetromino), all turns
_STAR_PIECES = {
    "corner": frozenset({(0, 0), (1, 0), (1, 1)}),
    "small-T": frozenset({(0, 0), (0, 1), (0, 2), (1, 1)}),
}


def _orientations(cells: frozenset) -> list[frozenset]:
    out = []
    h, w = _bounds(cells)[2:]
    for sigma in ("identity", "mirror_x", "mirror_y", "rot180", "rot90", "rot270"):
        img = frozenset(_map_cell(sigma, h, w, q) for q in cells)
        r0, c0, _, _ = _bounds(img)
        img = frozenset((r - r0, c - c0) for r, c in img)
        # rot90 of a mirror covers the two remaining symmetries
        for extra in (img, frozenset((c, r) for r, c in img)):
            if extra not in out:
                out.append(extra)
    return out


def make_star(k: int, db=None, bench: Workbench | None = None) -> Position:
    """*k for k = 0..3: one cell, the corner, the size-11 *2 region, that plus a *1 piece."""
    wb = _wb(bench, db)
    if k == 0:
        return wb.verify([(0, 0)], wb.store.zero)
    if k == 1:
        return wb.verify(_STAR_PIECES["corner"], wb.store.star)
    if k == 2:
        return _star2(wb)
    if k == 3:
        return extend_star(_star2(wb), 1, bench=wb)
    raise ValueError("make_star supports k in 0..3")


def _star2(wb: Workbench) -> Position:
    if "star2" in wb.fragments:
        return wb.fragments["star2"]
    from .database import find_by_value

    db = wb.database(11)
    hits = [p for p, _ in find_by_value(db, wb.store.nimber(2), 11)]
    if not hits:
        raise SearchFailure("no *2 region of size 11", 11)
    p = wb.verify(hits[0].cells, wb.store.nimber(2))
    wb.fragments["star2"] = p
    return p


def _attachments(cells: frozenset, recent: frozenset):
    """Candidate (bridge, piece cells, added cells), four added cells first.

    A bridge is either a leaf cell of the region or an outside square meeting
    it on one side; squares near ``recent`` come first.
    """
    def near(x):
        return min((abs(x[0] - r) + abs(x[1] - c) for r, c in recent), default=0)

    bridges = []
    for x in cells:
        if len(_touching(cells, x)) == 1 and len(cell_components(cells - {x})) == 1:
            bridges.append((x, True))
    for x in {q for p in cells for q in _nbrs(p) if q not in cells}:
        if len(_touching(cells, x)) == 1:
            bridges.append((x, False))
    out = []
    for x, inside in bridges:
        body = cells if inside else cells | {x}
        for name, piece in _STAR_PIECES.items():
            for img in _orientations(piece):
                for pr, pc in img:
                    for dr, dc in _SIDES:
                        # piece cell (pr, pc) sits next to the bridge
                        sr, sc = x[0] + dr - pr, x[1] + dc - pc
                        new = frozenset((r + sr, c + sc) for r, c in img)
                        if new & body:
                            continue
                        if len(_touching(new, x)) != 1:
                            continue
                        if any(q in body and q != x for p in new for q in _nbrs(p)):
                            continue
                        added = len(new) + (0 if inside else 1)
                        out.append(((added != 4, added, near(x), x, sorted(new)), x, new, body))
    out.sort(key=lambda t: t[0])
    return out


def extend_star(p: Position, pieces: int = 1, db=None, bench: Workbench | None = None) -> Position:
    """Attach ``pieces`` certified *1 pieces in turn; each adds * to the value."""
    wb = _wb(bench, db)
    cells = frozenset(p.cells)
    value = wb.value(cells)
    hints: list[Cell] = list(wb.fragments.get(("star-hints", cells), []))
    recent = cells
    for _ in range(pieces):
        target = wb.store.add(value, wb.store.star)
        for _, x, new, body in _attachments(cells, recent):
            trial = body | new
            try:
                got = wb.value(trial, hints + [x])
            except MemoryError:
                continue
            if got is target:
                cells, value, recent = frozenset(trial), got, new
                hints.append(x)
                break
        else:
            raise GeometryError("no legal attachment for a *1 piece")
    out = Position.from_cells(cells)
    r0, c0 = _bounds(cells)[:2]
    wb.fragments[("star-hints", out.cells)] = [(r - r0, c - c0) for r, c in hints]
    return out


# ----------------------------------------------------------------------
# reachability in standard play


@dataclass(frozen=True)
class Reachability:
    reachable: bool
    board: tuple[int, int] | None = None
    offset: Cell | None = None
    dominoes: tuple[tuple[str, int, int], ...] = ()

    def __bool__(self):
        return self.reachable

    def witness(self) -> str:
        return " ".join(f"{k}({r},{c})" for k, r, c in self.dominoes)


def _enclosed_holes(p: Position) -> list[frozenset]:
    box = {(r, c) for r in range(p.height) for c in range(p.width)} - p.cells
    out = []
    for comp in cell_components(box):
        if all(0 < r < p.height - 1 and 0 < c < p.width - 1 for r, c in comp):
            out.append(comp)
    return out


def _tile(free: frozenset, rows: int, cols: int):
    """Domino tiling of ``free`` with #vertical - #horizontal in {0, 1}."""
    memo: set = set()

    def rec(remaining: frozenset, d: int):
        if not remaining:
            return [] if d in (0, 1) else None
        left = len(remaining) // 2
        # d + v' - h' with v' + h' = left must be able to land in {0, 1}
        if d + left < 0 or d - left > 1:
            return None
        key = (remaining, d)
        if key in memo:
            return None
        r, c = min(remaining)
        for kind, other, dd in (("V", (r + 1, c), 1), ("H", (r, c + 1), -1)):
            if other in remaining:
                sub = rec(remaining - {(r, c), other}, d + dd)
                if sub is not None:
                    return [(kind, r, c)] + sub
        memo.add(key)
        return None

    return rec(free, 0)


def reachable_standard(p: Position, max_board: int = 8) -> Reachability:
    """Whether ``p`` is the uncovered region after some legal game on an m x n board.

    Boards are tried by area, then shape, then offset.  Disjoint dominoes can
    be played in any order, so a tiling of the complement with as many
    vertical as horizontal dominoes (or one more vertical) is a game.
    """
    if max_board > 10:
        raise ValueError("max_board is limited to 10")
    for hole in _enclosed_holes(p):
        if len(hole) % 2 or _tile_any(hole) is None:
            return Reachability(False)
    boards = sorted(
        ((m * n, m, n) for m in range(p.height, max_board + 1) for n in range(p.width, max_board + 1)),
    )
    for _, m, n in boards:
        if (m * n - p.size) % 2:
            continue
        for r0 in range(m - p.height + 1):
            for c0 in range(n - p.width + 1):
                occupied = {(r + r0, c + c0) for r, c in p.cells}
                free = frozenset((r, c) for r in range(m) for c in range(n) if (r, c) not in occupied)
                tiling = _tile(free, m, n)
                if tiling is not None:
                    return Reachability(True, (m, n), (r0, c0), tuple(tiling))
    return Reachability(False)


def _tile_any(free: frozenset):
    memo: set = set()

    def rec(remaining):
        if not remaining:
            return True
        if remaining in memo:
            return False
        r, c = min(remaining)
        for other in ((r + 1, c), (r, c + 1)):
            if other in remaining and rec(remaining - {(r, c), other}):
                return True
        memo.add(remaining)
        return False

    return True if rec(free) else None
