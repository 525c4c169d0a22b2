"""Size caps and search budgets.

Defaults can be overridden with the ``LINAT_CAP`` environment variable, either
as a single integer (applied to every element cap) or as a comma separated list
of ``name=value`` pairs, e.g. ``LINAT_CAP=wreath=5000,table=2000``.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace


class CapExceeded(RuntimeError):
    """A construction would exceed a configured size cap."""

    def __init__(self, what: str, size: int, cap: int):
        super().__init__(f"{what}: size {size} exceeds cap {cap}")
        self.what = what
        self.size = size
        self.cap = cap


@dataclass(frozen=True)
class Caps:
    closure: int = 10**6  # elements generated by a closure
    wreath: int = 10**5  # elements of a wreath product semigroup
    table: int = 4096  # largest semigroup whose Cayley table is materialized
    assoc_check: int = 512  # associativity is verified on construction up to this order
    oracle_budget: int = 200_000  # default divisor-oracle step budget
    group_order: int = 2000  # brute-force normal subgroup enumeration
    oracle_host: int = 512  # pipeline claims are sent to the oracle only for hosts up to this order

    def as_dict(self) -> dict[str, int]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


ELEMENT_CAPS = ("closure", "wreath", "table")


def parse_caps(raw: str, base: Caps | None = None) -> Caps:
    """Apply an override string (one integer, or ``name=value`` pairs) to ``base``."""
    caps = base or Caps()
    raw = raw.strip()
    if not raw:
        return caps
    if raw.isdigit():
        n = int(raw)
        return replace(caps, **{k: n for k in ELEMENT_CAPS})
    names = {f.name for f in fields(Caps)}
    updates = {}
    for part in raw.split(","):
        key, _, value = part.partition("=")
        key = key.strip()
        if key not in names or not value.strip().isdigit():
            raise ValueError(f"bad cap entry {part!r}")
        updates[key] = int(value)
    return replace(caps, **updates)


def _from_env() -> Caps:
    return parse_caps(os.environ.get("LINAT_CAP", ""))


CAPS = _from_env()


def get_caps() -> Caps:
    return CAPS


def set_caps(caps: Caps) -> None:
    global CAPS
    CAPS = caps


def check_cap(what: str, size: int, cap_name: str) -> None:
    cap = getattr(CAPS, cap_name)
    if size > cap:
        raise CapExceeded(what, size, cap)
