"""Command-line interface.

Exit codes: 0 success, 1 verification mismatch, 2 usage error, 3 resource
error.  Errors go to standard error as one line with a stable prefix
(``usage error:``, ``mismatch:``, ``resource error:``).  The default
database path comes from ``$DOMINEERING_DB``.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass

from . import construct as C
from . import database as D
from .board import D2, Position, PositionError, format_position, parse_position, transform
from .dyadic import Dyadic
from .engine import EvalContext, EvaluationBudgetExceeded
from .notation import ValueParseError, format_value, parse_value
from .thermo import thermograph
from .values import GameStore, nim_add

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3
DB_ENV = "DOMINEERING_DB"


class UsageError(Exception):
    pass


class Mismatch(Exception):
    pass


@dataclass
class Config:
    db_path: str | None = None
    max_size: int = 12
    workers: int = 1
    snake_bound: int = 24
    star_radius: int = 2
    max_board: int = 8
    fmt: str = "text"

    def check(self) -> None:
        for name in ("max_size", "workers", "snake_bound", "star_radius", "max_board"):
            if getattr(self, name) < 1:
                raise UsageError(f"{name} must be positive")
        if self.max_size > 15:
            raise UsageError("max size must be at most 15")
        if self.fmt not in ("text", "csv", "jsonl"):
            raise UsageError(f"unknown output format {self.fmt!r}")


def _config(args) -> Config:
    fmt = "csv" if getattr(args, "csv", False) else "jsonl" if getattr(args, "jsonl", False) else "text"
    cfg = Config(
        db_path=getattr(args, "db", None) or os.environ.get(DB_ENV),
        max_size=getattr(args, "max_size", None) or 12,
        workers=getattr(args, "threads", None) or 1,
        snake_bound=getattr(args, "snake_bound", None) or 24,
        max_board=getattr(args, "max_board", None) or 8,
        fmt=fmt,
    )
    cfg.check()
    return cfg


def _open_db(cfg: Config, required: bool = True):
    if cfg.db_path is None:
        if required:
            raise UsageError(f"no database given (use --db or set {DB_ENV})")
        return None
    return D.load(cfg.db_path)


def _position(text: str):
    try:
        return parse_position(text)
    except PositionError as e:
        raise UsageError(str(e)) from None


def _value(text: str, store=None):
    try:
        return parse_value(text, store)
    except ValueParseError as e:
        raise UsageError(str(e)) from None


# ----------------------------------------------------------------------
# verification suites (each returns a list of failure descriptions)


def suite_algebra(db=None, up_to: int = 8) -> list[str]:
    """g + (-g) = 0 and -(-g) = g over database values; nim addition for a, b <= 7."""
    if db is None:
        db = D.build(up_to)
    st = db.store
    bad = []
    seen = set()
    for n in db.sizes():
        if n > up_to:
            continue
        for g in db.layers[n].values:
            if g.id in seen:
                continue
            seen.add(g.id)
            if st.add(g, st.negate(g)) is not st.zero:
                bad.append(f"g + (-g) != 0 for g = {format_value(g)}")
            if st.negate(st.negate(g)) is not g:
                bad.append(f"-(-g) != g for g = {format_value(g)}")
    for a in range(8):
        for b in range(8):
            if st.add(st.nimber(a), st.nimber(b)) is not st.nimber(nim_add(a, b)):
                bad.append(f"*{a} + *{b} != *{nim_add(a, b)}")
    return bad


def suite_symmetry(up_to: int = 8) -> list[str]:
    """Mirror images keep the value and quarter turns negate it, for every position."""
    st = GameStore()
    ctx = EvalContext(st, symmetric=False)
    bad = []
    keys: list[int] = []
    for n in range(1, up_to + 1):
        keys = D.enumerate_keys(n, keys if n > 1 else None)
        for k in keys:
            p = Position.from_bits(k)
            g = ctx.evaluate(p)
            for sigma in D2:
                if ctx.evaluate(transform(p, sigma)) is not g:
                    bad.append(f"{sigma} changes the value of {format_position(p)}")
            for sigma in ("rot90", "rot270"):
                if ctx.evaluate(transform(p, sigma)) is not st.negate(g):
                    bad.append(f"{sigma} does not negate {format_position(p)}")
    return bad


def suite_bridge(db=None, samples: int = 1000, seed: int = 0) -> list[str]:
    if db is None:
        db = D.build(8)
    bad = []
    for opposite in (False, True):
        for t in C.bridge_trials(db, samples, seed, opposite=opposite):
            if not t.ok:
                bad.append(
                    f"{format_position(t.joined)}: expected {format_value(t.expected)}, got {format_value(t.actual)}"
                )
    return bad


def suite_table1(db=None, up_to: int = 12) -> list[D.Mismatch]:
    if db is None or db.max_size < up_to:
        db = D.build(up_to)
    rows = {n: r for n, r in D.census(db).items() if 2 <= n <= up_to}
    return D.compare_census(rows)


# ----------------------------------------------------------------------
# subcommands


def cmd_build(args, cfg: Config, out) -> int:
    if cfg.db_path is None:
        raise UsageError(f"no output path given (use --db or set {DB_ENV})")

    def progress(n, count):
        print(f"size {n}: {count}", file=out, flush=True)

    db = D.build(args.max_size, workers=cfg.workers, path=cfg.db_path, progress=progress)
    print(f"total {db.total()}", file=out)
    return EXIT_OK


def cmd_stats(args, cfg: Config, out) -> int:
    db = _open_db(cfg)
    rows = D.census(db)
    if cfg.fmt == "csv":
        out.write(D.census_csv(rows))
    elif cfg.fmt == "jsonl":
        for n in sorted(rows):
            print(json.dumps({"size": n, **dict(zip(D.CENSUS_COLUMNS, rows[n].row()))}), file=out)
    else:
        print("size " + " ".join(f"{c:>10}" for c in D.CENSUS_COLUMNS), file=out)
        for n in sorted(rows):
            print(f"{n:>4} " + " ".join(f"{x:>10}" for x in rows[n].row()), file=out)
        total = [sum(r.row()[i] for n, r in rows.items() if n >= 2) for i in range(len(D.CENSUS_COLUMNS))]
        print(" sum " + " ".join(f"{x:>10}" for x in total), file=out)
        for m in D.compare_census(rows):
            print("differs: " + json.dumps(m.as_dict()), file=out)
    return EXIT_OK


def cmd_query(args, cfg: Config, out) -> int:
    db = _open_db(cfg)
    print(format_value(db.query(_position(args.pos))), file=out)
    return EXIT_OK


def cmd_eval(args, cfg: Config, out) -> int:
    db = _open_db(cfg, required=False)
    p = _position(args.pos)
    ctx = EvalContext(database=db, use_bridges=args.bridges)
    print(format_value(ctx.evaluate(p)), file=out)
    return EXIT_OK


def cmd_find(args, cfg: Config, out) -> int:
    db = _open_db(cfg)
    v = _value(args.value, db.store)
    n = 0
    for p, g in D.find_by_value(db, v, args.size):
        if cfg.fmt == "jsonl":
            print(json.dumps({"size": p.size, "position": format_position(p), "value": format_value(g)}), file=out)
        else:
            print(f"{p.size} {format_position(p)}", file=out)
        n += 1
        if args.limit and n >= args.limit:
            break
    if cfg.fmt == "text":
        print(f"found {n}", file=out)
    return EXIT_OK


def cmd_options(args, cfg: Config, out) -> int:
    db = _open_db(cfg)
    hist = D.count_canonical_options(db, args.size)
    for k in sorted(hist):
        print(f"{k} {hist[k]}", file=out)
    best, found = D.max_option_positions(db, args.size)
    print(f"max {best}: {len(found)} positions", file=out)
    for p, g in found[: args.show]:
        print(f"  {format_position(p)} {format_value(g)}", file=out)
    return EXIT_OK


def cmd_construct(args, cfg: Config, out) -> int:
    db = _open_db(cfg, required=False)
    bench = C.Workbench(db, snake_bound=cfg.snake_bound)
    if args.kind == "number":
        try:
            q = Dyadic.parse(args.arg)
        except ValueError as e:
            raise UsageError(str(e)) from None
        p = C.make_fraction(q, bench=bench, strategy=args.strategy)
    elif args.kind == "up":
        p = C.make_up(_int(args.arg), bench=bench)
    else:
        k = _int(args.arg)
        if k > 3:
            p = C.extend_star(C.make_star(2, bench=bench), k - 2, bench=bench)
        else:
            p = C.make_star(k, bench=bench)
    print(format_position(p), file=out)
    print(f"size {p.size}", file=out)
    print(format_value(bench.value(p.cells)), file=out)
    return EXIT_OK


def _int(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise UsageError(f"not an integer: {text!r}") from None


def cmd_thermo(args, cfg: Config, out) -> int:
    if args.pos is not None:
        g = EvalContext().evaluate(_position(args.pos))
    else:
        g = _value(args.value)
    th = thermograph(g)
    print(f"value {format_value(g)}", file=out)
    print(f"temperature {th.temperature}", file=out)
    print(f"mean {th.mast_value}", file=out)
    for side, pts in (("left", th.left_boundary()), ("right", th.right_boundary())):
        for t, v in pts:
            print(f"{side} t={t} v={v}", file=out)
    return EXIT_OK


def cmd_reach(args, cfg: Config, out) -> int:
    if cfg.max_board > 10:
        raise UsageError("max board must be at most 10")
    r = C.reachable_standard(_position(args.pos), cfg.max_board)
    if r:
        print(f"reachable on {r.board[0]}x{r.board[1]}", file=out)
        print(r.witness() or "(no dominoes)", file=out)
    else:
        print(f"not reachable within {cfg.max_board}x{cfg.max_board}", file=out)
    return EXIT_OK


def cmd_verify(args, cfg: Config, out) -> int:
    suite = args.suite
    db = _open_db(cfg, required=False)
    if suite == "algebra":
        bad = suite_algebra(db, args.up_to)
    elif suite == "symmetry":
        bad = suite_symmetry(args.up_to)
    elif suite == "bridge":
        bad = suite_bridge(db, args.samples, args.seed)
    else:
        found = suite_table1(db, args.up_to)
        bad = [json.dumps(m.as_dict()) for m in found]
    for line in bad:
        print(line, file=out)
    if bad:
        raise Mismatch(f"{suite}: {len(bad)} failures")
    print(f"{suite}: ok", file=out)
    return EXIT_OK


# ----------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="domineering", description="Domineering endgame database workbench")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def db_arg(p):
        p.add_argument("--db", help=f"database file (default ${DB_ENV})")

    p = sub.add_parser("build", help="build and save a database")
    p.add_argument("--max-size", type=int, required=True)
    p.add_argument("--threads", "--workers", type=int, default=1)
    db_arg(p)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("stats", help="census by size")
    db_arg(p)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--csv", action="store_true")
    g.add_argument("--jsonl", action="store_true")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("query", help="stored value of a position")
    db_arg(p)
    p.add_argument("--pos", required=True)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("eval", help="evaluate a position directly")
    p.add_argument("--pos", required=True)
    p.add_argument("--bridges", action="store_true", help="split at explosive cut cells")
    db_arg(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("find", help="positions with a given value")
    db_arg(p)
    p.add_argument("--value", required=True)
    p.add_argument("--size", type=int)
    p.add_argument("--limit", type=int, default=0)
    p.add_argument("--jsonl", action="store_true")
    p.set_defaults(func=cmd_find)

    p = sub.add_parser("options", help="histogram of canonical option counts")
    db_arg(p)
    p.add_argument("--size", type=int)
    p.add_argument("--show", type=int, default=10)
    p.set_defaults(func=cmd_options)

    p = sub.add_parser("construct", help="build a position with a given value")
    p.add_argument("kind", choices=("number", "up", "star"))
    p.add_argument("arg")
    p.add_argument("--strategy", choices=("binary", "copies"), default="binary")
    p.add_argument("--snake-bound", type=int, default=24)
    db_arg(p)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("thermo", help="thermograph of a position or value")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--pos")
    g.add_argument("--value")
    p.set_defaults(func=cmd_thermo)

    p = sub.add_parser("reach", help="reachability in standard Domineering")
    p.add_argument("--pos", required=True)
    p.add_argument("--max-board", type=int, default=8)
    p.set_defaults(func=cmd_reach)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("--suite", choices=("algebra", "symmetry", "bridge", "table1"), required=True)
    p.add_argument("--up-to", type=int, default=8)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    db_arg(p)
    p.set_defaults(func=cmd_verify)
    return ap


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=err)
        cfg = _config(args)
        return args.func(args, cfg, out)
    except UsageError as e:
        print(f"usage error: {e}", file=err)
        return EXIT_USAGE
    except (ValueError, C.GeometryError) as e:
        # bad values reaching an operation (e.g. a size outside the database)
        print(f"usage error: {e}", file=err)
        return EXIT_USAGE
    except (Mismatch, C.VerificationFailure) as e:
        print(f"mismatch: {e}", file=err)
        return EXIT_MISMATCH
    except (D.DatabaseError, C.SearchFailure, EvaluationBudgetExceeded, MemoryError, OSError) as e:
        print(f"resource error: {e}", file=err)
        return EXIT_RESOURCE


def main() -> None:
    sys.exit(run())
