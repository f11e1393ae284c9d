"""Domineering regions on the square lattice.

A :class:`Position` is the set of empty cells of a fragment, translated so
that its bounding box starts at row 0, column 0.  Vertical (Left) places
dominoes on two vertically adjacent cells, Horizontal (Right) on two
horizontally adjacent cells.

Hot paths work on *bitboards*: Python ints with 16 bits per row
(``bit = 16*row + col``).  A bitboard is valid for regions whose bounding
box fits in 15x15; column 15 is always empty so shifts never wrap between
rows.  The D2 symmetry key of such a region is the least of the four
bitboards of its images under identity, left-right mirror, top-bottom
mirror and 180 degree rotation.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterator

STRIDE = 16
MAX_DIM = 15
ROW = (1 << STRIDE) - 1


class PositionError(ValueError):
    pass


class Player(enum.Enum):
    VERTICAL = "V"
    HORIZONTAL = "H"

    @property
    def opponent(self) -> "Player":
        return Player.HORIZONTAL if self is Player.VERTICAL else Player.VERTICAL


LEFT = Player.VERTICAL
RIGHT = Player.HORIZONTAL


def _lanes(pattern: int) -> int:
    out = 0
    for r in range(STRIDE):
        out |= pattern << (STRIDE * r)
    return out


_M1 = _lanes(0x5555)
_M2 = _lanes(0x3333)
_M4 = _lanes(0x0F0F)
_M8 = _lanes(0x00FF)
_L1 = sum(ROW << (32 * k) for k in range(8))
_L2 = sum((ROW | ROW << 16) << (64 * k) for k in range(4))
_L4 = sum(((1 << 64) - 1) << (128 * k) for k in range(2))
_L8 = (1 << 128) - 1


# ----------------------------------------------------------------------
# bitboard primitives


def bb_fold(b: int) -> int:
    """OR of all rows (column occupancy mask)."""
    b |= b >> 128
    b |= b >> 64
    b |= b >> 32
    b |= b >> 16
    return b & ROW


def bb_normalize(b: int) -> int:
    if not b:
        return 0
    low = (b & -b).bit_length() - 1
    b >>= STRIDE * (low >> 4)
    m = bb_fold(b)
    return b >> ((m & -m).bit_length() - 1)


def bb_dims(b: int) -> tuple[int, int]:
    """(height, width) of a normalized bitboard."""
    if not b:
        return 0, 0
    return (b.bit_length() - 1) // STRIDE + 1, bb_fold(b).bit_length()


def _rev_cols(b: int) -> int:
    b = ((b >> 1) & _M1) | ((b & _M1) << 1)
    b = ((b >> 2) & _M2) | ((b & _M2) << 2)
    b = ((b >> 4) & _M4) | ((b & _M4) << 4)
    return ((b >> 8) & _M8) | ((b & _M8) << 8)


def _rev_rows(b: int) -> int:
    b = ((b >> 16) & _L1) | ((b & _L1) << 16)
    b = ((b >> 32) & _L2) | ((b & _L2) << 32)
    b = ((b >> 64) & _L4) | ((b & _L4) << 64)
    return ((b >> 128) & _L8) | ((b & _L8) << 128)


def bb_mirror_x(b: int, h: int, w: int) -> int:
    """Left-right mirror of a normalized bitboard."""
    return _rev_cols(b) >> (STRIDE - w)


def bb_mirror_y(b: int, h: int, w: int) -> int:
    """Top-bottom mirror of a normalized bitboard."""
    return _rev_rows(b) >> (STRIDE * (STRIDE - h))


def bb_d2_images(b: int) -> tuple[int, int, int, int]:
    h, w = bb_dims(b)
    mx = _rev_cols(b) >> (STRIDE - w)
    sh = STRIDE * (STRIDE - h)
    return b, mx, _rev_rows(b) >> sh, _rev_rows(mx) >> sh


def bb_symkey(b: int) -> int:
    return min(bb_d2_images(b))


def bb_components(b: int) -> list[int]:
    """Edge-connected components (not normalized)."""
    out = []
    while b:
        comp = b & -b
        while True:
            grown = (comp | comp << 1 | comp >> 1 | comp << STRIDE | comp >> STRIDE) & b
            if grown == comp:
                break
            comp = grown
        out.append(comp)
        b ^= comp
    return out


def bb_is_connected(b: int) -> bool:
    if not b:
        return False
    comp = b & -b
    while True:
        grown = (comp | comp << 1 | comp >> 1 | comp << STRIDE | comp >> STRIDE) & b
        if grown == comp:
            return comp == b
        comp = grown


def bb_bits(b: int) -> Iterator[int]:
    while b:
        low = b & -b
        yield low.bit_length() - 1
        b ^= low


def bb_vertical_moves(b: int) -> int:
    """Mask of cells whose lower neighbour is also in the region."""
    return b & (b >> STRIDE)


def bb_horizontal_moves(b: int) -> int:
    """Mask of cells whose right neighbour is also in the region."""
    return b & (b >> 1)


def bb_rot90(b: int, h: int, w: int) -> int:
    """Clockwise quarter turn: (r, c) -> (c, h - 1 - r)."""
    out = 0
    for i in bb_bits(b):
        r, c = divmod(i, STRIDE)
        out |= 1 << (STRIDE * c + h - 1 - r)
    return out


# ----------------------------------------------------------------------
# positions


@dataclass(frozen=True)
class Position:
    height: int
    width: int
    cells: frozenset

    @classmethod
    def from_cells(cls, cells) -> "Position":
        cells = list(cells)
        if not cells:
            return EMPTY
        r0 = min(r for r, _ in cells)
        c0 = min(c for _, c in cells)
        norm = frozenset((r - r0, c - c0) for r, c in cells)
        return cls(
            max(r for r, _ in norm) + 1, max(c for _, c in norm) + 1, norm
        )

    @classmethod
    def from_bits(cls, b: int) -> "Position":
        return cls.from_cells(divmod(i, STRIDE) for i in bb_bits(b))

    @property
    def size(self) -> int:
        return len(self.cells)

    def fits_bitboard(self) -> bool:
        return self.height <= MAX_DIM and self.width <= MAX_DIM

    @property
    def bits(self) -> int:
        if not self.fits_bitboard():
            raise PositionError(f"{self.height}x{self.width} region exceeds 15x15")
        out = 0
        for r, c in self.cells:
            out |= 1 << (STRIDE * r + c)
        return out

    def __contains__(self, cell) -> bool:
        return tuple(cell) in self.cells

    def __len__(self):
        return len(self.cells)

    def __str__(self):
        return format_position(self)

    def __lt__(self, other: "Position"):
        return _order_key(self) < _order_key(other)

    def with_cells(self, extra) -> "Position":
        return Position.from_cells(set(self.cells) | set(extra))

    def without_cells(self, gone) -> "Position":
        return Position.from_cells(set(self.cells) - set(gone))

    def neighbours(self) -> set[tuple[int, int]]:
        """Cells outside the region edge-adjacent to it (may be negative)."""
        out = set()
        for r, c in self.cells:
            for q in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
                if q not in self.cells:
                    out.add(q)
        return out


EMPTY = Position(0, 0, frozenset())


def _order_key(p: Position):
    return (p.size, p.height, p.width, sorted(p.cells))


def parse_position(text: str) -> Position:
    rows = [r.strip() for r in text.strip().replace("\n", "/").split("/")]
    if not rows or any(len(r) != len(rows[0]) for r in rows):
        raise PositionError(f"ragged rows in {text!r}")
    cells = []
    for r, row in enumerate(rows):
        for c, ch in enumerate(row):
            if ch == "o":
                cells.append((r, c))
            elif ch != ".":
                raise PositionError(f"bad character {ch!r} in {text!r}")
    if not cells:
        raise PositionError("empty region")
    return Position.from_cells(cells)


def format_position(p: Position) -> str:
    if not p.cells:
        return ""
    return "/".join(
        "".join("o" if (r, c) in p.cells else "." for c in range(p.width))
        for r in range(p.height)
    )


def moves(p: Position, player: Player) -> list[Position]:
    """One resulting region per domino placement, in row-major order."""
    dr, dc = (1, 0) if player is Player.VERTICAL else (0, 1)
    out = []
    for r, c in sorted(p.cells):
        other = (r + dr, c + dc)
        if other in p.cells:
            out.append(Position.from_cells(p.cells - {(r, c), other}))
    return out


def domino_placements(p: Position, player: Player) -> list[tuple[int, int]]:
    dr, dc = (1, 0) if player is Player.VERTICAL else (0, 1)
    return [(r, c) for r, c in sorted(p.cells) if (r + dr, c + dc) in p.cells]


def cell_components(cells) -> list[frozenset]:
    cells = set(cells)
    out = []
    while cells:
        start = min(cells)
        stack = [start]
        comp = {start}
        cells.discard(start)
        while stack:
            r, c = stack.pop()
            for q in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
                if q in cells:
                    cells.discard(q)
                    comp.add(q)
                    stack.append(q)
        out.append(frozenset(comp))
    return out


def components(p: Position) -> list[Position]:
    return [Position.from_cells(c) for c in cell_components(p.cells)]


def is_connected(p: Position) -> bool:
    return len(cell_components(p.cells)) == 1


TRANSFORMS = ("identity", "mirror_x", "mirror_y", "rot180", "rot90", "rot270")
D2 = ("identity", "mirror_x", "mirror_y", "rot180")


def transform(p: Position, sigma: str) -> Position:
    h, w = p.height, p.width
    maps = {
        "identity": lambda r, c: (r, c),
        "mirror_x": lambda r, c: (r, w - 1 - c),
        "mirror_y": lambda r, c: (h - 1 - r, c),
        "rot180": lambda r, c: (h - 1 - r, w - 1 - c),
        "rot90": lambda r, c: (c, h - 1 - r),
        "rot270": lambda r, c: (w - 1 - c, r),
    }
    try:
        f = maps[sigma]
    except KeyError:
        raise PositionError(f"unknown transform {sigma!r}") from None
    return Position.from_cells(f(r, c) for r, c in p.cells)


def sym_key(p: Position) -> int:
    return bb_symkey(p.bits)


def canonical(p: Position) -> Position:
    """The D2 image of ``p`` whose bitboard is the symmetry key."""
    return Position.from_bits(sym_key(p))
