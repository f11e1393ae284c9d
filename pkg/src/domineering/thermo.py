"""Thermographs with exact dyadic breakpoints.

Walls are continuous piecewise-linear functions of the temperature ``t`` on
``[-1, inf)``.  Numbers are vertical masts from ``t = -1`` and report
temperature -1.  For any other game the left scaffold is the max over Left
options of their right walls taxed by ``-t`` and the right scaffold is the
min over Right options of their left walls taxed by ``+t``; the walls follow
the scaffolds until they meet and continue as a vertical mast.
"""

from __future__ import annotations

from dataclasses import dataclass

from .dyadic import Dyadic
from .values import Game

MINUS_ONE = Dyadic(-1)


class PiecewiseLinear:
    """Breakpoints ``[(t, v), ...]`` starting at t = -1, then a tail slope."""

    __slots__ = ("points", "tail")

    def __init__(self, points, tail: int = 0):
        self.points = points
        self.tail = tail

    @classmethod
    def constant(cls, v: Dyadic) -> "PiecewiseLinear":
        return cls([(MINUS_ONE, v)], 0)

    def __call__(self, t: Dyadic) -> Dyadic:
        pts = self.points
        if not t < pts[-1][0]:
            t1, v1 = pts[-1]
            return v1 + (t - t1) * self.tail
        for (t0, v0), (t1, v1) in zip(pts, pts[1:]):
            if not t1 < t:
                # slope between breakpoints is an integer
                slope = _slope(t0, v0, t1, v1)
                return v0 + (t - t0) * slope
        raise AssertionError("unreachable")

    def slope_after(self, t: Dyadic) -> int:
        pts = self.points
        for (t0, v0), (t1, v1) in zip(pts, pts[1:]):
            if t0 <= t < t1:
                return _slope(t0, v0, t1, v1)
        return self.tail

    def taxed(self, k: int) -> "PiecewiseLinear":
        """The function ``v(t) + k*t``."""
        return PiecewiseLinear([(t, v + t * k) for t, v in self.points], self.tail + k)

    def breakpoints(self) -> list[Dyadic]:
        return [t for t, _ in self.points]

    def __eq__(self, other):
        return self.points == other.points and self.tail == other.tail

    def __repr__(self):
        pts = ", ".join(f"({t}, {v})" for t, v in self.points)
        return f"PL([{pts}], tail={self.tail})"


def _slope(t0, v0, t1, v1) -> int:
    d = (v1 - v0).as_fraction() / (t1 - t0).as_fraction()
    if d.denominator != 1:
        raise ArithmeticError(f"non-integral slope {d}")
    return int(d)


def _simplify(points):
    out = [points[0]]
    for p in points[1:]:
        if p[0] == out[-1][0]:
            continue
        if len(out) >= 2:
            (t0, v0), (t1, v1) = out[-2], out[-1]
            if _slope(t0, v0, t1, v1) == _slope(t1, v1, *p):
                out[-1] = p
                continue
        out.append(p)
    return out


def _crossing(f: PiecewiseLinear, g: PiecewiseLinear, a: Dyadic, b: Dyadic | None):
    """t in (a, b) where f - g changes sign, assuming both are linear there."""
    da = f(a) - g(a)
    sf, sg = f.slope_after(a), g.slope_after(a)
    ds = sf - sg
    if ds == 0 or da == 0:
        return None
    # f(a) - g(a) + ds * (t - a) = 0
    num = -da
    if ds not in (1, -1, 2, -2):
        raise ArithmeticError(f"slope difference {ds}")
    step = num if abs(ds) == 1 else num.half()
    if ds < 0:
        step = -step
    t = a + step
    if not a < t or (b is not None and not t < b):
        return None
    return t


def _combine(fs: list[PiecewiseLinear], pick) -> PiecewiseLinear:
    out = fs[0]
    for g in fs[1:]:
        out = _combine2(out, g, pick)
    return out


def _combine2(f: PiecewiseLinear, g: PiecewiseLinear, pick) -> PiecewiseLinear:
    ts = sorted(set(f.breakpoints()) | set(g.breakpoints()))
    pts = []
    for i, t in enumerate(ts):
        pts.append((t, pick(f(t), g(t))))
        nxt = ts[i + 1] if i + 1 < len(ts) else None
        x = _crossing(f, g, t, nxt)
        if x is not None:
            pts.append((x, f(x)))
    # no crossing remains after the last point, so one function wins the tail
    beyond = pts[-1][0] + 1
    fb, gb = f(beyond), g(beyond)
    if fb == gb:
        tail = pick(f.tail, g.tail)
    else:
        tail = f.tail if pick(fb, gb) == fb else g.tail
    return PiecewiseLinear(_simplify(pts), tail)


@dataclass(frozen=True)
class Thermograph:
    left_wall: PiecewiseLinear
    right_wall: PiecewiseLinear
    mast_value: Dyadic
    temperature: Dyadic

    def left_boundary(self) -> list[tuple[Dyadic, Dyadic]]:
        return list(self.left_wall.points)

    def right_boundary(self) -> list[tuple[Dyadic, Dyadic]]:
        return list(self.right_wall.points)


def _cache(g: Game) -> dict:
    store = g.store
    c = getattr(store, "_thermographs", None)
    if c is None:
        c = store._thermographs = {}
    return c


def _meet(ls: PiecewiseLinear, rs: PiecewiseLinear) -> Dyadic:
    """First t >= -1 with ls(t) <= rs(t); ls - rs is non-increasing."""
    if not rs(MINUS_ONE) < ls(MINUS_ONE):
        return MINUS_ONE
    ts = sorted(set(ls.breakpoints()) | set(rs.breakpoints()))
    for i, t in enumerate(ts):
        if not rs(t) < ls(t):
            return t
        nxt = ts[i + 1] if i + 1 < len(ts) else None
        x = _crossing(ls, rs, t, nxt)
        if x is not None:
            return x
    raise ArithmeticError("scaffolds never meet")


def _clip(f: PiecewiseLinear, T: Dyadic, mast: Dyadic) -> PiecewiseLinear:
    pts = [(t, v) for t, v in f.points if t < T]
    pts.append((T, mast))
    return PiecewiseLinear(_simplify(pts), 0)


def thermograph(g: Game) -> Thermograph:
    cache = _cache(g)
    th = cache.get(g.id)
    if th is not None:
        return th
    if g.num is not None:
        wall = PiecewiseLinear.constant(g.num)
        th = Thermograph(wall, wall, g.num, MINUS_ONE)
    else:
        ls = _combine([thermograph(o).right_wall.taxed(-1) for o in g.left], max)
        rs = _combine([thermograph(o).left_wall.taxed(1) for o in g.right], min)
        T = _meet(ls, rs)
        mast = ls(T)
        if rs(T) < mast:
            # scaffolds already ordered at t = -1 (cannot happen for canonical hot games)
            mast = rs(T)
        th = Thermograph(_clip(ls, T, mast), _clip(rs, T, mast), mast, T)
    cache[g.id] = th
    return th


def temperature(g: Game) -> Dyadic:
    return thermograph(g).temperature


def mean_value(g: Game) -> Dyadic:
    return thermograph(g).mast_value
