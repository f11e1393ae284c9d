"""Domineering endgame databases, exact game values and constructions."""

from .board import Player, Position, format_position, parse_position
from .dyadic import Dyadic
from .engine import EvalContext, evaluate, evaluate_sum
from .notation import format_value, parse_value
from .thermo import temperature, thermograph
from .values import (
    Game,
    GameStore,
    Kind,
    ValueClass,
    add,
    classify,
    leq,
    make_game,
    negate,
    nim_add,
    nimber,
    number,
    stops,
)

__all__ = [
    "Dyadic",
    "EvalContext",
    "Game",
    "GameStore",
    "Kind",
    "Player",
    "Position",
    "ValueClass",
    "add",
    "classify",
    "evaluate",
    "evaluate_sum",
    "format_position",
    "format_value",
    "leq",
    "make_game",
    "negate",
    "nim_add",
    "nimber",
    "number",
    "parse_position",
    "parse_value",
    "stops",
    "temperature",
    "thermograph",
]
