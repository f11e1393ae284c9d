"""Endgame databases of single-component Domineering positions.

Layer ``n`` holds one record per D2 class of edge-connected ``n``-cell
regions, keyed by the region's symmetry key and sorted by it.  Layers are
grown from the previous layer by adding one adjacent cell, and evaluated by
expanding every move; the components left by a move are at least two cells
smaller and are read from the lower layers.

File format (little-endian)::

    header   b"DCGT" | version u32 | max_size u8 | complete u8
    layer    size u8 | count u64 | count x (w u8, h u8, bitset, value u32) | crc32
    values   count u64 | count x (nl u16, nr u16, (nl + nr) x child u32) | crc32

The bitset packs the w*h box row-major, least significant bit first.  Value
ids index the value table, which lists games children-first in the order of a
depth-first walk from the records, so files do not depend on how a build was
scheduled.  ``complete`` is written last; a file without it is rejected.
"""

from __future__ import annotations

import csv
import io
import logging
import multiprocessing
import struct
import zlib
from bisect import bisect_left
from collections import Counter
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Callable, Iterable, Iterator

from .board import (
    MAX_DIM,
    STRIDE,
    Position,
    bb_d2_images,
    bb_dims,
    bb_normalize,
    bb_symkey,
)
from .engine import EvalContext
from .values import Game, GameStore, Kind, ValueClass, classify, is_infinitesimal

log = logging.getLogger(__name__)

MAGIC = b"DCGT"
VERSION = 1
MAX_SIZE = 15


class DatabaseError(Exception):
    pass


class CorruptDatabase(DatabaseError):
    pass


class VersionMismatch(DatabaseError):
    pass


class SizeOutOfRange(DatabaseError, ValueError):
    pass


class BuildError(DatabaseError):
    def __init__(self, message: str, completed: int):
        super().__init__(f"{message} (layers 1..{completed} complete)")
        self.completed = completed


# ----------------------------------------------------------------------
# enumeration


def grow_layer(previous: Iterable[int]) -> list[int]:
    """Symmetry keys of all D2 classes one cell larger than ``previous``."""
    seen: set[int] = set()
    out: list[int] = []
    for b in previous:
        s = b << (STRIDE + 1)
        cand = (s << 1 | s >> 1 | s << STRIDE | s >> STRIDE) & ~s
        while cand:
            low = cand & -cand
            cand ^= low
            c = bb_normalize(s | low)
            if c in seen:
                continue
            images = bb_d2_images(c)
            seen.update(images)
            out.append(min(images))
    out.sort()
    return out


def enumerate_keys(n: int, previous: Iterable[int] | None = None) -> list[int]:
    if n < 1:
        raise SizeOutOfRange(f"size {n} < 1")
    if n == 1:
        return [1]
    if previous is None:
        previous = enumerate_keys(n - 1)
    return grow_layer(previous)


def enumerate_layer(n: int, previous: Iterable[int] | None = None) -> Iterator[Position]:
    for k in enumerate_keys(n, previous):
        yield Position.from_bits(k)


# ----------------------------------------------------------------------
# layers and the database object


@dataclass
class Layer:
    size: int
    keys: list[int]
    values: list[Game]

    @property
    def count(self) -> int:
        return len(self.keys)

    def get(self, key: int) -> Game | None:
        i = bisect_left(self.keys, key)
        if i < len(self.keys) and self.keys[i] == key:
            return self.values[i]
        return None

    def records(self) -> Iterator[tuple[int, Game]]:
        return zip(self.keys, self.values)


class Database:
    def __init__(self, store: GameStore, max_size: int = 0):
        self.store = store
        self.max_size = max_size
        self.layers: dict[int, Layer] = {}

    def __repr__(self):
        return f"<Database sizes 1..{self.max_size}, {self.total()} records>"

    def total(self) -> int:
        return sum(layer.count for layer in self.layers.values())

    def sizes(self) -> list[int]:
        return sorted(self.layers)

    def lookup_bits(self, b: int) -> Game | None:
        layer = self.layers.get(b.bit_count())
        if layer is None:
            return None
        return layer.get(bb_symkey(b))

    def query(self, p: Position) -> Game:
        if not 1 <= p.size <= self.max_size:
            raise SizeOutOfRange(f"size {p.size} outside 1..{self.max_size}")
        if not p.fits_bitboard():
            raise SizeOutOfRange("region exceeds 15x15")
        g = self.lookup_bits(p.bits)
        if g is None:
            raise DatabaseError(f"{p} is not a single-component region in the database")
        return g

    def records(self, size: int | None = None) -> Iterator[tuple[Position, Game]]:
        for n in ([size] if size is not None else self.sizes()):
            layer = self.layers.get(n)
            if layer is None:
                raise SizeOutOfRange(f"size {n} not built")
            for k, g in layer.records():
                yield Position.from_bits(k), g

    def save(self, path) -> None:
        save(self, path)


# ----------------------------------------------------------------------
# building

_worker_ctx: EvalContext | None = None
_worker_keys: list[int] = []
_worker_base = 0


def _eval_chunk(bounds: tuple[int, int]):
    lo, hi = bounds
    ctx = _worker_ctx
    base = _worker_base
    results = [ctx._expand_bits(k) for k in _worker_keys[lo:hi]]
    nodes = []
    done: set[int] = set()
    for g in results:
        stack = [(g, False)]
        while stack:
            h, ready = stack.pop()
            if h.id < base or h.id in done:
                continue
            if ready:
                done.add(h.id)
                nodes.append((h.id, [o.id for o in h.left], [o.id for o in h.right]))
            else:
                stack.append((h, True))
                stack.extend((o, False) for o in h.left + h.right)
    return [g.id for g in results], nodes


def _evaluate_parallel(ctx: EvalContext, keys: list[int], workers: int, chunk: int) -> list[Game]:
    global _worker_ctx, _worker_keys, _worker_base
    store = ctx.store
    _worker_ctx, _worker_keys, _worker_base = ctx, keys, len(store)
    bounds = [(i, min(i + chunk, len(keys))) for i in range(0, len(keys), chunk)]
    out: list[Game] = []
    mp = multiprocessing.get_context("fork")
    try:
        with mp.Pool(workers) as pool:
            for ids, nodes in pool.imap(_eval_chunk, bounds):
                local: dict[int, Game] = {}

                def resolve(i):
                    return store[i] if i < _worker_base else local[i]

                for gid, left, right in nodes:
                    local[gid] = store.intern_canonical(
                        [resolve(i) for i in left], [resolve(i) for i in right]
                    )
                out.extend(resolve(i) for i in ids)
    finally:
        _worker_ctx, _worker_keys = None, []
    return out


def build(
    max_size: int,
    workers: int = 1,
    path=None,
    store: GameStore | None = None,
    progress: Callable[[int, int], None] | None = None,
    chunk: int = 2048,
    base: Database | None = None,
) -> Database:
    """Enumerate and evaluate all layers ``1..max_size``; optionally save.

    With ``base`` the missing layers are added to that database in place.
    """
    if not 1 <= max_size <= MAX_SIZE:
        raise SizeOutOfRange(f"max_size must be in 1..{MAX_SIZE}")
    if base is not None:
        db, store = base, base.store
    else:
        store = store or GameStore()
        db = Database(store, 0)
    ctx = EvalContext(store, symmetric=False, node_budget=None)
    keys: list[int] = db.layers[db.max_size].keys if db.max_size else []
    for m in db.sizes():
        if m <= max_size - 2:
            for k, g in db.layers[m].records():
                for im in bb_d2_images(k):
                    ctx._raw[im] = g
    n = db.max_size
    try:
        for n in range(db.max_size + 1, max_size + 1):
            keys = enumerate_keys(n, keys)
            if workers > 1 and len(keys) > chunk:
                values = _evaluate_parallel(ctx, keys, workers, chunk)
            else:
                values = [ctx._expand_bits(k) for k in keys]
            db.layers[n] = Layer(n, keys, values)
            db.max_size = n
            if n <= max_size - 2:
                raw = ctx._raw
                for k, g in zip(keys, values):
                    for im in bb_d2_images(k):
                        raw[im] = g
            log.info("layer %d: %d positions, %d games", n, len(keys), len(store))
            if progress:
                progress(n, len(keys))
    except MemoryError as e:
        raise BuildError(f"out of memory in layer {n}: {e}", n - 1) from e
    ctx._raw.clear()
    if path is not None:
        try:
            save(db, path)
        except OSError as e:
            raise BuildError(f"could not write {path}: {e}", db.max_size) from e
    return db


# ----------------------------------------------------------------------
# persistence


def _pack_key(k: int) -> bytes:
    h, w = bb_dims(k)
    bits = 0
    for r in range(h):
        bits |= ((k >> (STRIDE * r)) & ((1 << w) - 1)) << (r * w)
    return bytes((w, h)) + bits.to_bytes((w * h + 7) // 8, "little")


def _unpack_key(buf: memoryview, off: int) -> tuple[int, int]:
    w, h = buf[off], buf[off + 1]
    if not (1 <= w <= MAX_DIM and 1 <= h <= MAX_DIM):
        raise CorruptDatabase(f"bad record dimensions {w}x{h}")
    nb = (w * h + 7) // 8
    bits = int.from_bytes(buf[off + 2 : off + 2 + nb], "little")
    k = 0
    mask = (1 << w) - 1
    for r in range(h):
        k |= ((bits >> (r * w)) & mask) << (STRIDE * r)
    return k, off + 2 + nb


def _value_order(db: Database) -> list[Game]:
    order: list[Game] = []
    seen: set[int] = set()
    for n in db.sizes():
        for g in db.layers[n].values:
            if g.id in seen:
                continue
            stack = [(g, False)]
            while stack:
                h, ready = stack.pop()
                if ready:
                    if h.id not in seen:
                        seen.add(h.id)
                        order.append(h)
                    continue
                if h.id in seen:
                    continue
                stack.append((h, True))
                # reversed so children are emitted in stored option order
                for o in reversed(h.left + h.right):
                    if o.id not in seen:
                        stack.append((o, False))
    return order


def save(db: Database, path) -> None:
    path = Path(path)
    order = _value_order(db)
    index = {g.id: i for i, g in enumerate(order)}
    with open(path, "wb") as f:
        f.write(MAGIC + struct.pack("<IBB", VERSION, db.max_size, 0))
        for n in db.sizes():
            layer = db.layers[n]
            body = bytearray(struct.pack("<BQ", n, layer.count))
            for k, g in layer.records():
                body += _pack_key(k)
                body += struct.pack("<I", index[g.id])
            f.write(body)
            f.write(struct.pack("<I", zlib.crc32(body)))
        body = bytearray(struct.pack("<Q", len(order)))
        for g in order:
            body += struct.pack("<HH", len(g.left), len(g.right))
            body += struct.pack(f"<{len(g.left) + len(g.right)}I", *(index[o.id] for o in g.left + g.right))
        f.write(body)
        f.write(struct.pack("<I", zlib.crc32(body)))
        f.flush()
        f.seek(len(MAGIC) + 5)
        f.write(b"\x01")


def load(path, store: GameStore | None = None) -> Database:
    data = Path(path).read_bytes()
    buf = memoryview(data)
    if data[:4] != MAGIC:
        raise CorruptDatabase("bad magic")
    if len(data) < 10:
        raise CorruptDatabase("truncated header")
    version, max_size, complete = struct.unpack_from("<IBB", data, 4)
    if version != VERSION:
        raise VersionMismatch(f"file version {version}, expected {VERSION}")
    if complete != 1:
        raise CorruptDatabase("incomplete file (build did not finish)")
    if not 1 <= max_size <= MAX_SIZE:
        raise CorruptDatabase(f"max size {max_size}")
    off = 10
    raw_layers = []
    try:
        for expected in range(1, max_size + 1):
            start = off
            n, count = struct.unpack_from("<BQ", data, off)
            if n != expected:
                raise CorruptDatabase(f"layer {n} where {expected} expected")
            off += 9
            keys, ids = [], []
            for _ in range(count):
                k, off = _unpack_key(buf, off)
                keys.append(k)
                ids.append(struct.unpack_from("<I", data, off)[0])
                off += 4
            (crc,) = struct.unpack_from("<I", data, off)
            if crc != zlib.crc32(buf[start:off]):
                raise CorruptDatabase(f"checksum mismatch in layer {n}")
            off += 4
            raw_layers.append((n, keys, ids))
        start = off
        (count,) = struct.unpack_from("<Q", data, off)
        off += 8
        table = []
        for _ in range(count):
            nl, nr = struct.unpack_from("<HH", data, off)
            off += 4
            kids = struct.unpack_from(f"<{nl + nr}I", data, off)
            off += 4 * (nl + nr)
            table.append((kids[:nl], kids[nl:]))
        (crc,) = struct.unpack_from("<I", data, off)
        if crc != zlib.crc32(buf[start:off]):
            raise CorruptDatabase("checksum mismatch in value table")
    except struct.error as e:
        raise CorruptDatabase(f"truncated file: {e}") from e
    store = store or GameStore()
    games: list[Game] = []
    for left, right in table:
        if any(i >= len(games) for i in left + right):
            raise CorruptDatabase("value table is not children-first")
        games.append(store.intern_canonical([games[i] for i in left], [games[i] for i in right]))
    db = Database(store, max_size)
    for n, keys, ids in raw_layers:
        if any(i >= len(games) for i in ids):
            raise CorruptDatabase(f"dangling value id in layer {n}")
        db.layers[n] = Layer(n, keys, [games[i] for i in ids])
    return db


# ----------------------------------------------------------------------
# census


CENSUS_COLUMNS = (
    "zero",
    "num_nonzero",
    "num_total",
    "updown",
    "tiny",
    "nimber",
    "inf_total",
    "comb",
    "total",
)


@dataclass
class Census:
    """Per-size counts.  The first nine fields are the published columns.

    ``updown`` counts pure multiples n.^ only; ``comb`` counts values equal to
    a number plus (n.^ + *m) or a number plus a single tiny or miny.
    Diagnostics: ``stop_equal`` (left stop = right stop), ``infinitesimal``
    (both stops 0) and ``updown_star`` (n.^ + *).
    """

    size: int
    zero: int = 0
    num_nonzero: int = 0
    num_total: int = 0
    updown: int = 0
    tiny: int = 0
    nimber: int = 0
    inf_total: int = 0
    comb: int = 0
    total: int = 0
    stop_equal: int = 0
    infinitesimal: int = 0
    updown_star: int = 0

    def row(self) -> tuple[int, ...]:
        return tuple(getattr(self, c) for c in CENSUS_COLUMNS)

    def as_dict(self) -> dict[str, int]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


class Classifier:
    """Memoized per-game classification for census work."""

    def __init__(self, store: GameStore, up_limit: int = 8, star_limit: int = 8):
        self.store = store
        self.up_limit = up_limit
        self._cls: dict[int, ValueClass] = {}
        self._comb: dict[int, bool] = {}
        st = store
        # n.^ + *m for |n| <= up_limit, m < star_limit
        group = set()
        for sign in (1, -1):
            base = st.up if sign > 0 else st.negate(st.up)
            g = st.zero
            for n in range(0, up_limit + 1):
                for m in range(star_limit):
                    group.add(st.add(g, st.nimber(m)).id)
                g = st.add(g, base)
        self._group = group

    def classify(self, g: Game) -> ValueClass:
        vc = self._cls.get(g.id)
        if vc is None:
            vc = self._cls[g.id] = classify(g, self.up_limit)
        return vc

    def is_combination(self, g: Game) -> bool:
        r = self._comb.get(g.id)
        if r is None:
            if g.ls != g.rs:
                r = False
            else:
                st = self.store
                rest = st.sub(g, st.number(g.ls))
                r = rest.id in self._group or self.classify(rest).kind in (Kind.TINY, Kind.MINY)
            self._comb[g.id] = r
        return r


def census_layer(layer: Layer, clf: Classifier) -> Census:
    c = Census(layer.size)
    for g in layer.values:
        vc = clf.classify(g)
        k = vc.kind
        c.total += 1
        if k is Kind.ZERO:
            c.zero += 1
        elif k is Kind.NUMBER:
            c.num_nonzero += 1
        elif k is Kind.NIMBER:
            c.nimber += 1
        elif k is Kind.UP:
            if vc.star:
                c.updown_star += 1
            else:
                c.updown += 1
        elif k in (Kind.TINY, Kind.MINY):
            c.tiny += 1
        if g.ls == g.rs:
            c.stop_equal += 1
        if is_infinitesimal(g):
            c.infinitesimal += 1
        if clf.is_combination(g):
            c.comb += 1
    c.num_total = c.zero + c.num_nonzero
    c.inf_total = c.zero + c.updown + c.tiny + c.nimber
    return c


# Published census rows (sizes 2..15), columns as CENSUS_COLUMNS.
REFERENCE_CENSUS: dict[int, tuple[int, ...]] = {
    2: (0, 2, 2, 0, 0, 0, 0, 2, 2),
    3: (0, 2, 2, 0, 0, 1, 1, 3, 3),
    4: (0, 4, 4, 0, 0, 2, 2, 6, 9),
    5: (5, 4, 9, 0, 0, 1, 6, 16, 21),
    6: (10, 16, 26, 2, 0, 0, 12, 38, 68),
    7: (13, 48, 61, 4, 0, 13, 30, 106, 208),
    8: (16, 194, 210, 6, 4, 46, 72, 320, 730),
    9: (116, 386, 502, 2, 6, 104, 228, 950, 2542),
    10: (515, 1262, 1777, 94, 8, 136, 753, 3125, 9287),
    11: (1061, 3570, 4631, 336, 0, 462, 1859, 9867, 34053),
    12: (2074, 14700, 16774, 764, 28, 3618, 6484, 32990, 127112),
    13: (5012, 45018, 50030, 1392, 188, 13768, 20360, 108994, 476849),
    14: (27816, 155410, 183226, 5018, 820, 24002, 57656, 367330, 1803636),
    15: (135539, 437718, 573257, 23752, 1988, 46254, 207533, 1237853, 6851960),
}
REFERENCE_GRAND_TOTAL = (172177, 658334, 830511, 31370, 3042, 88407, 294996, 1761600, 9306480)
# columns whose definition is an interpretation; the rest admit no tolerance
INTERPRETED_COLUMNS = frozenset({"updown", "tiny", "inf_total", "comb"})


@dataclass(frozen=True)
class Mismatch:
    size: int
    column: str
    expected: int
    actual: int
    interpreted: bool

    def as_dict(self) -> dict:
        return {
            "size": self.size,
            "column": self.column,
            "expected": self.expected,
            "actual": self.actual,
            "interpreted": self.interpreted,
        }


def compare_census(rows: dict[int, Census], reference=REFERENCE_CENSUS) -> list[Mismatch]:
    """Cell-by-cell differences from the reference rows for the sizes present in both."""
    out = []
    for n in sorted(rows):
        ref = reference.get(n)
        if ref is None:
            continue
        for col, want, got in zip(CENSUS_COLUMNS, ref, rows[n].row()):
            if want != got:
                out.append(Mismatch(n, col, want, got, col in INTERPRETED_COLUMNS))
    return out


def stop_equality_report(rows: dict[int, Census], reference=REFERENCE_CENSUS) -> list[Mismatch]:
    """How the plain "left stop = right stop" reading of Comb. compares."""
    out = []
    for n in sorted(rows):
        ref = reference.get(n)
        if ref is not None and rows[n].stop_equal != ref[CENSUS_COLUMNS.index("comb")]:
            out.append(Mismatch(n, "comb(stop_equal)", ref[7], rows[n].stop_equal, True))
    return out


def census(db: Database, up_limit: int = 8) -> dict[int, Census]:
    clf = Classifier(db.store, up_limit)
    return {n: census_layer(db.layers[n], clf) for n in db.sizes()}


def census_csv(rows: dict[int, Census]) -> str:
    """CSV text: a header, then one line per size."""
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(("size",) + CENSUS_COLUMNS)
    for n in sorted(rows):
        out.writerow((n,) + rows[n].row())
    return buf.getvalue()


def tiny_frequencies(db: Database, sizes: Iterable[int] | None = None) -> Counter:
    """Counts of tinies by subscript ``(x, starred)``; minies are their mirror images."""
    clf = Classifier(db.store)
    freq: Counter = Counter()
    for n in (sizes if sizes is not None else db.sizes()):
        for g in db.layers[n].values:
            vc = clf.classify(g)
            if vc.kind is Kind.TINY:
                freq[(vc.number, vc.star)] += 1
    return freq


# tiny counts by subscript over all sizes up to 15; 1521 in all
REFERENCE_TINIES: dict[tuple[str, bool], int] = {
    ("2", False): 1037,
    ("2", True): 4,
    ("3/2", False): 11,
    ("3/2", True): 3,
    ("1", False): 25,
    ("1", True): 19,
    ("3/4", False): 29,
    ("1/2", False): 231,
    ("1/2", True): 115,
    ("1/4", False): 39,
    ("1/4", True): 8,
}


# ----------------------------------------------------------------------
# queries


def _matcher(v, clf: Classifier):
    if isinstance(v, Game):
        return lambda g: g is v
    if isinstance(v, Kind):
        return lambda g: clf.classify(g).kind is v
    if isinstance(v, ValueClass):
        return lambda g: clf.classify(g) == v
    if callable(v):
        return v
    raise TypeError(f"cannot match values against {v!r}")


def find_by_value(db: Database, v, size: int | None = None) -> Iterator[tuple[Position, Game]]:
    """Records whose value is ``v`` (a Game), or matches a Kind/ValueClass/predicate."""
    match = _matcher(v, Classifier(db.store))
    for n in ([size] if size is not None else db.sizes()):
        layer = db.layers.get(n)
        if layer is None:
            raise SizeOutOfRange(f"size {n} not built")
        for k, g in layer.records():
            if match(g):
                yield Position.from_bits(k), g


def count_canonical_options(db: Database, size: int | None = None) -> Counter:
    """Histogram of (#Left + #Right canonical options) over records."""
    hist: Counter = Counter()
    for n in ([size] if size is not None else db.sizes()):
        for g in db.layers[n].values:
            hist[len(g.left) + len(g.right)] += 1
    return hist


def max_option_positions(db: Database, size: int | None = None) -> tuple[int, list[tuple[Position, Game]]]:
    best, found = -1, []
    for n in ([size] if size is not None else db.sizes()):
        for k, g in db.layers[n].records():
            m = len(g.left) + len(g.right)
            if m > best:
                best, found = m, []
            if m == best:
                found.append((Position.from_bits(k), g))
    return best, found


@dataclass
class TemperatureSweep:
    max_temperature: object
    hottest: list[tuple[Position, Game]] = field(default_factory=list)
    histogram: Counter = field(default_factory=Counter)


def temperature_sweep(db: Database, sizes: Iterable[int] | None = None) -> TemperatureSweep:
    from .thermo import temperature

    temps: dict[int, object] = {}
    sweep = TemperatureSweep(None)
    for n in (sizes if sizes is not None else db.sizes()):
        for k, g in db.layers[n].records():
            t = temps.get(g.id)
            if t is None:
                t = temps[g.id] = temperature(g)
            sweep.histogram[t] += 1
            if sweep.max_temperature is None or sweep.max_temperature < t:
                sweep.max_temperature = t
                sweep.hottest = []
            if t == sweep.max_temperature:
                sweep.hottest.append((Position.from_bits(k), g))
    return sweep
