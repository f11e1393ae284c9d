"""Exact evaluation of Domineering regions.

The value of a region is ``{ values after Vertical moves | values after
Horizontal moves }`` where the value after a move is the sum of the values of
the remaining edge-connected components.  Component values come from the
context memo, an optional database, or recursion.

With ``use_bridges`` the context additionally splits large regions at
*explosive* cut cells: a cut cell ``c`` whose removal leaves components each
touching ``c`` on one side, and for which adding ``c`` back to a component
does not change that component's value.  Then the region's value is the sum
of the component values (and, for two components on opposite sides of ``c``,
one explosive side suffices: the value is ``G + (c plus H)``).  Every
explosivity condition is itself checked by evaluation, so the result is still
exact.  Only regions above ``bridge_threshold`` cells are split this way.

Contexts may be shared between threads.  Memo entries are exact and written
idempotently, so racing writers store the same value; last write wins.
"""

from __future__ import annotations

from typing import Iterable, Sequence

from .board import (
    MAX_DIM,
    STRIDE,
    Position,
    bb_bits,
    bb_components,
    bb_normalize,
    bb_symkey,
    cell_components,
)
from .values import Game, GameStore, default_store


class EvaluationBudgetExceeded(MemoryError):
    """Raised when an evaluation expands more regions than its node budget."""


_SIDES = ((-1, 0), (1, 0), (0, -1), (0, 1))


def _bits_of(cells: Iterable[tuple[int, int]]) -> int:
    b = 0
    for r, c in cells:
        b |= 1 << (STRIDE * r + c)
    return b


def _normalized(cells: frozenset) -> tuple[frozenset, int, int]:
    r0 = min(r for r, _ in cells)
    c0 = min(c for _, c in cells)
    if r0 == 0 and c0 == 0:
        return cells, 0, 0
    return frozenset((r - r0, c - c0) for r, c in cells), r0, c0


def _fits(cells: frozenset) -> bool:
    return (
        max(r for r, _ in cells) < MAX_DIM and max(c for _, c in cells) < MAX_DIM
    )


class EvalContext:
    """Store, memo and lookup sources for :func:`evaluate`.

    ``symmetric`` keys the memo by the D2 symmetry key; with ``symmetric=False``
    only exact (translated) shapes share memo entries, which keeps mirror
    images independent for invariance checks.
    """

    def __init__(
        self,
        store: GameStore | None = None,
        database=None,
        symmetric: bool = True,
        node_budget: int | None = 10**8,
        use_bridges: bool = False,
        bridge_threshold: int = 14,
        bridge_hints: Iterable[tuple[int, int]] = (),
    ):
        if database is not None:
            store = database.store
        self.store = store or default_store()
        self.database = database
        self.symmetric = symmetric
        self.node_budget = node_budget
        self.use_bridges = use_bridges
        self.bridge_threshold = bridge_threshold
        self.hints = frozenset(bridge_hints)
        self.memo: dict[int, Game] = {}
        self._raw: dict[int, Game] = {}
        self._big: dict[frozenset, Game] = {}
        self.nodes = 0

    # ------------------------------------------------------------------
    # bitboard path

    def _tick(self):
        self.nodes += 1
        if self.node_budget is not None and self.nodes > self.node_budget:
            raise EvaluationBudgetExceeded(
                f"node budget of {self.node_budget} expanded regions exhausted"
            )

    def value_bits(self, b: int) -> Game:
        """Value of a normalized, connected bitboard region."""
        g = self._raw.get(b)
        if g is not None:
            return g
        db = self.database
        size = b.bit_count()
        if db is not None and size <= db.max_size:
            g = db.lookup_bits(b)
            if g is not None:
                self._raw[b] = g
                return g
        key = None
        if self.symmetric:
            key = bb_symkey(b)
            g = self.memo.get(key)
            if g is not None:
                self._raw[b] = g
                return g
        if self.use_bridges and size > self.bridge_threshold:
            g = self._value_cells(frozenset(divmod(i, STRIDE) for i in bb_bits(b)))
        else:
            g = self._expand_bits(b)
        self._raw[b] = g
        if key is not None:
            self.memo[key] = g
        return g

    def region_bits(self, b: int) -> Game:
        """Value of any bitboard region (possibly disconnected, unnormalized)."""
        if not b:
            return self.store.zero
        comps = bb_components(b)
        if len(comps) == 1:
            return self.value_bits(bb_normalize(b))
        store = self.store
        total = store.zero
        for c in comps:
            total = store.add(total, self.value_bits(bb_normalize(c)))
        return total

    def _expand_bits(self, b: int) -> Game:
        self._tick()
        region = self.region_bits
        left = []
        pairs = b & (b >> STRIDE)
        while pairs:
            low = pairs & -pairs
            left.append(region(b & ~(low | low << STRIDE)))
            pairs ^= low
        right = []
        pairs = b & (b >> 1)
        while pairs:
            low = pairs & -pairs
            right.append(region(b & ~(low | low << 1)))
            pairs ^= low
        return self.store.make_game(left, right)

    # ------------------------------------------------------------------
    # generic path (absolute cell coordinates, any extent)

    def region_cells(self, cells: frozenset) -> Game:
        if not cells:
            return self.store.zero
        comps = cell_components(cells)
        store = self.store
        total = store.zero
        for c in comps:
            total = store.add(total, self._value_cells(c))
        return total

    def _value_cells(self, cells: frozenset) -> Game:
        norm, _, _ = _normalized(cells)
        g = self._big.get(norm)
        if g is not None:
            return g
        small = not (self.use_bridges and len(cells) > self.bridge_threshold)
        if small and _fits(norm):
            g = self.value_bits(_bits_of(norm))
        else:
            g = None
            if self.use_bridges and len(cells) > self.bridge_threshold:
                g = self._split_at_bridge(cells)
            if g is None:
                g = self._expand_cells(cells)
        self._big[norm] = g
        return g

    def _expand_cells(self, cells: frozenset) -> Game:
        self._tick()
        left, right = [], []
        for r, c in cells:
            if (r + 1, c) in cells:
                left.append(self.region_cells(cells - {(r, c), (r + 1, c)}))
            if (r, c + 1) in cells:
                right.append(self.region_cells(cells - {(r, c), (r, c + 1)}))
        return self.store.make_game(left, right)

    def _cut(self, cells: frozenset, cell):
        """Components of ``cells - {cell}`` if each meets ``cell`` on exactly one side."""
        r, c = cell
        nbrs = [(r + dr, c + dc) for dr, dc in _SIDES if (r + dr, c + dc) in cells]
        if len(nbrs) < 2:
            return None
        comps = cell_components(cells - {cell})
        if len(comps) != len(nbrs):
            return None
        return comps, nbrs

    def _try_cut(self, cell, comps, nbrs) -> Game | None:
        vals = [self._value_cells(x) for x in comps]
        ext = [self._value_cells(x | {cell}) for x in comps]
        if all(e is v for e, v in zip(ext, vals)):
            return self.store.sum(vals)
        if len(comps) == 2:
            (r0, c0), (r1, c1) = nbrs
            if r0 == r1 or c0 == c1:  # opposite sides
                for i in (0, 1):
                    if ext[i] is vals[i]:
                        return self.store.add(vals[i], ext[1 - i])
        return None

    def _split_at_bridge(self, cells: frozenset) -> Game | None:
        """Try hinted cut cells first, then every cut cell, most balanced first."""
        tried = set()
        for group in (sorted(self.hints & cells), sorted(cells)):
            found = []
            for cell in group:
                if cell in tried:
                    continue
                tried.add(cell)
                cut = self._cut(cells, cell)
                if cut is not None:
                    found.append((-min(len(x) for x in cut[0]), cell, cut))
            found.sort(key=lambda t: t[:2])
            for _, cell, (comps, nbrs) in found:
                g = self._try_cut(cell, comps, nbrs)
                if g is not None:
                    return g
        return None

    # ------------------------------------------------------------------

    def evaluate(self, p: Position) -> Game:
        if not p.cells:
            return self.store.zero
        if p.fits_bitboard() and not (self.use_bridges and p.size > self.bridge_threshold):
            return self.region_bits(p.bits)
        return self.region_cells(p.cells)


def evaluate(p: Position, ctx: EvalContext | None = None) -> Game:
    """Exact canonical value of ``p`` (any region, connected or not)."""
    return (ctx or EvalContext()).evaluate(p)


def evaluate_sum(ps: Sequence[Position], ctx: EvalContext | None = None) -> Game:
    ctx = ctx or EvalContext()
    return ctx.store.sum(ctx.evaluate(p) for p in ps)
