"""Parse target strings such as ``sphere:2``, ``op2``, ``product:sphere:2+ball:3``."""
from __future__ import annotations

from .bundles import HopfTarget, ProductSpace
from .crosses import Ball, cross_space

_CROSS = ("sphere", "rp", "cp", "hp")


def _int_param(kind, arg):
    try:
        n = int(arg)
    except ValueError:
        raise ValueError(f"target {kind!r} needs an integer parameter, got {arg!r}") from None
    if n < 1:
        raise ValueError(f"target {kind!r} parameter must be >= 1")
    return n


def parse_target(text: str):
    text = text.strip()
    kind, _, arg = text.partition(":")
    if kind == "product":
        if not arg:
            raise ValueError("product target needs factors, e.g. product:sphere:2+sphere:2")
        return ProductSpace([parse_target(t) for t in arg.split("+")])
    if kind == "op2":
        if arg:
            raise ValueError("op2 takes no parameter")
        return cross_space("op2")
    if kind in _CROSS:
        return cross_space(kind, _int_param(kind, arg))
    if kind == "ball":
        return Ball(_int_param(kind, arg))
    if kind == "hopf":
        return HopfTarget(_int_param(kind, arg))
    raise ValueError(f"unknown target {text!r}")
