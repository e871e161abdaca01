"""Bit-operation accounting for the cost model T(n).

Arithmetic in :mod:`app.dyadic` charges the active meter; oracle queries
charge the reading cost of their answer. Meters nest: closing an inner meter
adds its totals to the enclosing one, so a per-pixel meter sees every oracle
and kernel call made on behalf of that pixel.
"""
from __future__ import annotations

import contextvars
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Iterator


@dataclass
class CostMeter:
    bit_ops: int = 0
    queries: int = 0


_active: contextvars.ContextVar[CostMeter | None] = contextvars.ContextVar(
    "bitcanvas_cost_meter", default=None
)


def charge(bits: int) -> None:
    meter = _active.get()
    if meter is not None:
        meter.bit_ops += bits


def count_query() -> None:
    meter = _active.get()
    if meter is not None:
        meter.queries += 1


@contextmanager
def metered() -> Iterator[CostMeter]:
    parent = _active.get()
    meter = CostMeter()
    token = _active.set(meter)
    try:
        yield meter
    finally:
        _active.reset(token)
        if parent is not None:
            parent.bit_ops += meter.bit_ops
            parent.queries += meter.queries
