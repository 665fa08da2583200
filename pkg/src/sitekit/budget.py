"""Size guards shared by every engine.

Enumeration downstream is exponential in arrows per object, so every public
operation that enumerates checks its input against a :class:`Budget` first.
The defaults can be overridden with the ``SITEKIT_BUDGET`` environment
variable, e.g. ``SITEKIT_BUDGET="max_arrows=128,max_topologies=50000"``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace


class SizeGuard(Exception):
    """Raised when an input exceeds a configured budget."""

    def __init__(self, what: str, count: int, limit: int):
        super().__init__(f"{what} = {count} exceeds budget {limit}")
        self.what = what
        self.count = count
        self.limit = limit


@dataclass(frozen=True)
class Budget:
    max_objects: int = 16
    max_arrows: int = 64
    max_arrows_into: int = 16
    max_sieves: int = 4096
    max_topologies: int = 20000
    max_card: int = 4
    max_structure_size: int = 8

    def check(self, what: str, count: int) -> None:
        limit = getattr(self, what)
        if count > limit:
            raise SizeGuard(what, count, limit)


def parse_budget(text: str, base: Budget | None = None) -> Budget:
    base = base or Budget()
    known = {f.name for f in fields(Budget)}
    updates = {}
    for item in text.replace(";", ",").split(","):
        item = item.strip()
        if not item:
            continue
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or key not in known:
            raise ValueError(f"bad budget entry {item!r}")
        updates[key] = int(value)
    return replace(base, **updates)


def default_budget() -> Budget:
    text = os.environ.get("SITEKIT_BUDGET", "")
    return parse_budget(text) if text else Budget()
