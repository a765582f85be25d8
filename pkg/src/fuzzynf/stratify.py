"""Stratification: integer types for set terms with ``type(x) = type(z) - 1``.

Each ``in(x, z)`` and each ``mu(x, z) = d`` asks for ``type(x) = type(z) - 1``;
each set equality asks for equal types. Degree terms are outside the set
typing altogether. The constraints are difference constraints, solved with a
union-find whose links carry type offsets; an inconsistent constraint closes a
cycle of nonzero total offset, which is returned as the certificate.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Union

from .syntax import (
    Const,
    CrispIn,
    Formula,
    MuEq,
    SetEq,
    Var,
    atoms,
    to_text,
)

SetName = Union[Var, Const]


@dataclass(frozen=True)
class StratConstraint:
    """``type(a) = type(b) + delta``; ``delta == 0`` is an equality constraint."""

    a: SetName
    b: SetName
    delta: int
    origin: object = field(default=None, compare=False)

    @property
    def kind(self) -> str:
        return "Eq" if self.delta == 0 else "Diff"

    def describe(self) -> str:
        if self.origin is not None:
            return to_text(self.origin)
        return f"type({self.a}) = type({self.b}) {self.delta:+d}"


def Diff(a: SetName, b: SetName, delta: int, origin=None) -> StratConstraint:
    return StratConstraint(a, b, delta, origin)


def Eq(a: SetName, b: SetName, origin=None) -> StratConstraint:
    return StratConstraint(a, b, 0, origin)


@dataclass(frozen=True)
class StratTyping:
    assignment: dict

    def __getitem__(self, key: SetName) -> int:
        return self.assignment[key]

    def by_name(self) -> dict[str, int]:
        return {k.name: v for k, v in self.assignment.items()}

    def satisfies(self, cs: list[StratConstraint]) -> bool:
        return all(self.assignment[c.a] == self.assignment[c.b] + c.delta for c in cs)


@dataclass(frozen=True)
class CycleStep:
    """One traversed constraint; ``delta`` is ``type(src) - type(dst)`` it demands."""

    constraint: StratConstraint
    src: SetName
    dst: SetName
    delta: int


@dataclass(frozen=True)
class InconsistencyCertificate:
    cycle: tuple[CycleStep, ...]

    @property
    def total(self) -> int:
        return sum(step.delta for step in self.cycle)

    def to_json(self) -> dict:
        return {
            "cycle": [
                {
                    "atom": step.constraint.describe(),
                    "pos": getattr(step.constraint.origin, "pos", None),
                    "from": step.src.name,
                    "to": step.dst.name,
                    "delta": step.delta,
                }
                for step in self.cycle
            ],
            "sum": self.total,
        }

    def describe(self) -> str:
        steps = ", ".join(f"{s.constraint.describe()} [{s.delta:+d}]" for s in self.cycle)
        return f"cycle {steps} sums to {self.total}"


def collect_constraints(f: Formula) -> list[StratConstraint]:
    """Constraints in atom order.

    Binders are unique per formula after parsing, so a variable name
    identifies one typed entity.
    """
    out = []
    for a in atoms(f):
        if isinstance(a, CrispIn):
            out.append(Diff(a.lhs, a.rhs, -1, a))
        elif isinstance(a, MuEq):
            out.append(Diff(a.elem, a.set, -1, a))
        elif isinstance(a, SetEq):
            out.append(Eq(a.a, a.b, a))
    return out


class _OffsetUnionFind:
    """Union-find keeping ``type(node) - type(parent)`` on each link."""

    def __init__(self) -> None:
        self.parent: dict = {}
        self.offset: dict = {}

    def add(self, x) -> None:
        if x not in self.parent:
            self.parent[x] = x
            self.offset[x] = 0

    def find(self, x):
        """Root of ``x`` and ``type(x) - type(root)``."""
        path = []
        while self.parent[x] != x:
            path.append(x)
            x = self.parent[x]
        root = x
        # compress, accumulating offsets from the node nearest the root outward
        acc = 0
        for node in reversed(path):
            acc += self.offset[node]
            self.offset[node] = acc
            self.parent[node] = root
        return root, (self.offset[path[0]] if path else 0)

    def union(self, a, b, delta: int) -> bool:
        """Impose ``type(a) = type(b) + delta``; False when it contradicts."""
        ra, oa = self.find(a)
        rb, ob = self.find(b)
        if ra == rb:
            return oa - ob == delta
        # type(ra) - type(rb) = (type(a) - oa) - (type(b) - ob) = delta - oa + ob
        self.parent[ra] = rb
        self.offset[ra] = delta - oa + ob
        return True


def solve_constraints(cs: list[StratConstraint]) -> StratTyping | InconsistencyCertificate:
    uf = _OffsetUnionFind()
    tree: dict = {}  # accepted constraints as an undirected forest

    for c in cs:
        uf.add(c.a)
        uf.add(c.b)
        tree.setdefault(c.a, [])
        tree.setdefault(c.b, [])
        if not uf.union(c.a, c.b, c.delta):
            return InconsistencyCertificate(_close_cycle(tree, c))
        tree[c.a].append((c.b, c, c.delta))
        tree[c.b].append((c.a, c, -c.delta))

    raw = {}
    for x in uf.parent:
        root, off = uf.find(x)
        raw[x] = (root, off)
    lows: dict = {}
    for root, off in raw.values():
        lows[root] = min(lows.get(root, off), off)
    return StratTyping({x: off - lows[root] for x, (root, off) in raw.items()})


def _close_cycle(tree: dict, bad: StratConstraint) -> tuple[CycleStep, ...]:
    """The offending constraint a->b followed by the forest path b->a."""
    first = CycleStep(bad, bad.a, bad.b, bad.delta)
    if bad.a == bad.b:
        return (first,)
    prev: dict = {bad.b: None}
    queue = deque([bad.b])
    while queue:
        node = queue.popleft()
        if node == bad.a:
            break
        for nxt, c, d in tree[node]:
            if nxt not in prev:
                prev[nxt] = (node, c, d)
                queue.append(nxt)
    steps = []
    node = bad.a
    while prev[node] is not None:
        src, c, d = prev[node]
        steps.append(CycleStep(c, src, node, d))
        node = src
    return (first, *reversed(steps))


@dataclass(frozen=True)
class StratResult:
    stratified: bool
    typing: StratTyping | None = None
    certificate: InconsistencyCertificate | None = None

    def __bool__(self) -> bool:
        return self.stratified

    def to_json(self) -> dict:
        if self.stratified:
            return {"stratified": True, "typing": dict(sorted(self.typing.by_name().items()))}
        return {"stratified": False, "certificate": self.certificate.to_json()}


def is_stratified(f: Formula) -> StratResult:
    res = solve_constraints(collect_constraints(f))
    if isinstance(res, StratTyping):
        return StratResult(True, typing=res)
    return StratResult(False, certificate=res)


class UnstratifiedFormula(ValueError):
    def __init__(self, label: str, certificate: InconsistencyCertificate):
        self.label = label
        self.certificate = certificate
        super().__init__(f"{label} is not stratified: {certificate.describe()}")
