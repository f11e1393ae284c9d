"""Text notation for game values.

Grammar (ASCII)::

    value   := term (('+' | '-') term)*
    term    := number | nimber | updown | tiny | brace
    number  := ['-'] int ['/' int]          denominator a power of two
    nimber  := '*' [int]
    updown  := ('^' | 'v') [int] ['*']
    tiny    := ('tiny' | 'miny') '(' value ')'
    brace   := '{' list (bars list)+ '}'
    list    := [value (',' value)*]
    bars    := ('|' | '\u2016')+      '\u2016' counts as two bars

In a brace, the longest run of bars splits Left from Right options and
shorter runs nest inside, so ``{0||0|-2}`` is ``{0|{0|-2}}``.

A leading '-' may also negate any other term.  ``format_value`` uses the
shorthands whenever :func:`classify` recognizes the value and falls back to
braces otherwise, so ``parse_value(format_value(g)) is g``.
"""

from __future__ import annotations

from .dyadic import Dyadic
from .values import Game, GameStore, Kind, classify, default_store


class ValueParseError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


class _Parser:
    def __init__(self, text: str, store: GameStore):
        self.s = text
        self.i = 0
        self.store = store

    def error(self, msg):
        raise ValueParseError(msg, self.i)

    def peek(self) -> str:
        while self.i < len(self.s) and self.s[self.i].isspace():
            self.i += 1
        return self.s[self.i] if self.i < len(self.s) else ""

    def take(self, ch: str):
        if self.peek() != ch:
            self.error(f"expected {ch!r}")
        self.i += 1

    def integer(self) -> int | None:
        self.peek()
        j = self.i
        while self.i < len(self.s) and self.s[self.i].isdigit():
            self.i += 1
        return int(self.s[j : self.i]) if self.i > j else None

    def parse(self) -> Game:
        g = self.value()
        if self.peek():
            self.error("trailing input")
        return g

    def value(self) -> Game:
        st = self.store
        g = self.term()
        while self.peek() in ("+", "-"):
            op = self.s[self.i]
            self.i += 1
            t = self.term()
            g = st.add(g, t) if op == "+" else st.sub(g, t)
        return g

    def term(self) -> Game:
        st = self.store
        c = self.peek()
        if c == "-":
            self.i += 1
            return st.negate(self.term())
        if c.isdigit():
            n = self.integer()
            if self.peek() == "/":
                self.i += 1
                pos = self.i
                d = self.integer()
                if d is None:
                    self.error("expected denominator")
                if d <= 0 or d & (d - 1):
                    raise ValueParseError("denominator must be a power of two", pos)
                return st.number(Dyadic(n, d.bit_length() - 1))
            return st.number(Dyadic(n))
        if c == "*":
            self.i += 1
            n = self.integer()
            return st.nimber(1 if n is None else n)
        if c in ("^", "v"):
            self.i += 1
            n = self.integer()
            n = 1 if n is None else n
            base = st.up if c == "^" else st.negate(st.up)
            g = st.zero
            for _ in range(n):
                g = st.add(g, base)
            if self.s.startswith("*", self.i) and not self.s[self.i + 1 : self.i + 2].isdigit():
                self.i += 1
                g = st.add(g, st.star)
            return g
        if self.s.startswith("tiny", self.i) or self.s.startswith("miny", self.i):
            word = self.s[self.i : self.i + 4]
            self.i += 4
            self.take("(")
            x = self.value()
            self.take(")")
            far = st.make_game([st.zero], [st.negate(x)])
            if word == "tiny":
                return st.make_game([st.zero], [far])
            return st.negate(st.make_game([st.zero], [far]))
        if c == "{":
            self.i += 1
            lists, seps = [self.options()], []
            while self.peek() in _BARS:
                seps.append(self.bars())
                lists.append(self.options())
            if not seps:
                self.error("expected '|'")
            self.take("}")
            return self.nest(lists, seps)
        self.error("expected a value")

    def options(self) -> list[Game]:
        out: list[Game] = []
        if self.peek() in _BARS or self.peek() == "}":
            return out
        out.append(self.value())
        while self.peek() == ",":
            self.i += 1
            out.append(self.value())
        return out

    def bars(self) -> int:
        k = 0
        while self.i < len(self.s) and self.s[self.i] in _BARS:
            k += _BARS[self.s[self.i]]
            self.i += 1
        return k

    def nest(self, lists: list, seps: list[int]) -> Game:
        """``{a || b | c}`` is ``{a | {b | c}}``: more bars bind more loosely."""
        top = max(seps)
        if seps.count(top) > 1:
            self.error("ambiguous separators")
        k = seps.index(top)

        def side(ls, ss):
            return ls[0] if not ss else [self.nest(ls, ss)]

        left = side(lists[: k + 1], seps[:k])
        right = side(lists[k + 1 :], seps[k + 1 :])
        return self.store.make_game(left, right)


_BARS = {"|": 1, "\u2016": 2}


def parse_value(text: str, store: GameStore | None = None) -> Game:
    return _Parser(text, store or default_store()).parse()


def _fmt_updown(n: int, star: bool) -> str:
    s = "^" if n > 0 else "v"
    if abs(n) != 1:
        s += str(abs(n))
    return s + ("*" if star else "")


def _fmt_subscript(x: Dyadic, star: bool) -> str:
    return f"{x}+*" if star else str(x)


def _shorthand(g: Game) -> str | None:
    vc = classify(g)
    k = vc.kind
    if k is Kind.ZERO:
        return "0"
    if k is Kind.NUMBER:
        return str(vc.number)
    if k is Kind.NIMBER:
        return "*" if vc.n == 1 else f"*{vc.n}"
    if k is Kind.UP:
        return _fmt_updown(vc.n, vc.star)
    if k is Kind.TINY:
        return f"tiny({_fmt_subscript(vc.number, vc.star)})"
    if k is Kind.MINY:
        return f"miny({_fmt_subscript(vc.number, vc.star)})"
    if k is Kind.INFINITESIMAL:
        st = g.store
        rest = st.sub(g, st.number(vc.number))
        inner = classify(rest).kind
        if inner in (Kind.NIMBER, Kind.UP, Kind.TINY, Kind.MINY):
            return f"{vc.number}+{_shorthand(rest)}"
    return None


def format_value(g: Game) -> str:
    s = _shorthand(g)
    if s is not None:
        return s
    left = ",".join(format_value(o) for o in g.left)
    right = ",".join(format_value(o) for o in g.right)
    return "{" + left + "|" + right + "}"
