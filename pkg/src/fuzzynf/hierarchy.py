"""Finite levels of the cumulative hierarchy and finite degree grids.

Hereditarily finite sets are stored by their Ackermann code: the set with
children ``c1, c2, ...`` has code ``2**code(c1) + 2**code(c2) + ...``. The code
is canonical, so equality and ordering are integer comparisons, and ``V_n`` is
exactly the codes ``0 .. |V_n| - 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

DEFAULT_CAP = 4
HARD_CAP = 5  # |V_6| = 2**65536


class CapExceeded(ValueError):
    pass


@dataclass(frozen=True, order=True)
class HFSet:
    code: int

    def __post_init__(self) -> None:
        if self.code < 0:
            raise ValueError("HF codes are non-negative")

    @property
    def children(self) -> tuple[HFSet, ...]:
        """Elements in canonical (code) order."""
        c, out, i = self.code, [], 0
        while c:
            if c & 1:
                out.append(HFSet(i))
            c >>= 1
            i += 1
        return tuple(out)

    def __contains__(self, other: HFSet) -> bool:
        return crisp_in(other, self)

    @property
    def rank(self) -> int:
        kids = self.children
        return 1 + max(k.rank for k in kids) if kids else 0

    @classmethod
    def of(cls, *children: HFSet) -> HFSet:
        return cls(sum(1 << c.code for c in set(children)))

    def render(self) -> str:
        """Nested-brace text, e.g. ``{{},{{}}}``."""
        return "{" + ",".join(k.render() for k in self.children) + "}"

    def __str__(self) -> str:
        return self.render()


EMPTY = HFSet(0)


def parse_hf(text: str) -> HFSet:
    """Inverse of :meth:`HFSet.render`."""
    pos = 0

    def go() -> HFSet:
        nonlocal pos
        if pos >= len(text) or text[pos] != "{":
            raise ValueError(f"bad HF set text {text!r}")
        pos += 1
        kids = []
        while pos < len(text) and text[pos] != "}":
            kids.append(go())
            if pos < len(text) and text[pos] == ",":
                pos += 1
        if pos >= len(text):
            raise ValueError(f"unterminated HF set text {text!r}")
        pos += 1
        return HFSet.of(*kids)

    hf = go()
    if pos != len(text):
        raise ValueError(f"trailing characters in HF set text {text!r}")
    return hf


def crisp_in(a: HFSet, b: HFSet) -> bool:
    return bool((b.code >> a.code) & 1)


def level_size(n: int) -> int:
    size = 0
    for _ in range(n):
        size = 2**size
    return size


@dataclass(frozen=True)
class HFUniverse:
    level: int
    elements: tuple[HFSet, ...]

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, item: HFSet) -> bool:
        return isinstance(item, HFSet) and item.code < len(self.elements)


def build_vn(n: int, cap: int = DEFAULT_CAP, allow_large: bool = False) -> HFUniverse:
    """All hereditarily finite sets of rank below ``n``.

    ``n`` above ``cap`` needs ``allow_large``; nothing above level 5 is built.
    """
    if n < 0:
        raise ValueError("level must be non-negative")
    limit = HARD_CAP if allow_large else cap
    if n > limit:
        raise CapExceeded(
            f"level {n} exceeds the cap of {limit}"
            + ("" if allow_large or n > HARD_CAP else " (pass allow_large to build level 5)")
        )
    return HFUniverse(n, tuple(HFSet(c) for c in range(level_size(n))))


@dataclass(frozen=True)
class DegreeGrid:
    resolution: int
    values: tuple[Fraction, ...]

    def __iter__(self):
        return iter(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def __contains__(self, d: Fraction) -> bool:
        return d in self.values


def build_grid(k: int) -> DegreeGrid:
    """``{0, 1/k, ..., 1}`` in increasing order."""
    if k < 1:
        raise ValueError("grid resolution must be at least 1")
    return DegreeGrid(k, tuple(Fraction(i, k) for i in range(k + 1)))
