"""Powerset join semi-lattice over unique tags.

An element is a ``frozenset`` of tags, each tag an ``(origin, nonce)`` pair.
Join is union, the order is inclusion and the bottom is the empty set.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Tuple

Tag = Tuple[int, int]
Element = frozenset  # frozenset[Tag]

BOTTOM: Element = frozenset()

_TAG_RE = re.compile(r"^\s*(\d+)\s*:\s*(\d+)\s*$")


def element(*tags: Tag) -> Element:
    return frozenset(tags)


def join(u: Element, v: Element) -> Element:
    return u | v


def leq(u: Element, v: Element) -> bool:
    return u <= v


def comparable(u: Element, v: Element) -> bool:
    return u <= v or v <= u


def join_all(values: Iterable[Element]) -> Element:
    """Join of any finite collection; the empty join is the bottom element."""
    return BOTTOM.union(*values)


def height(v: Element) -> int:
    return len(v)


@lru_cache(maxsize=1 << 16)
def sort_key(v: Element) -> tuple:
    """Canonical total order: lexicographic on the sorted tag list."""
    return tuple(sorted(v))


def canonical(values: Iterable[Element]) -> list:
    return sorted(set(values), key=sort_key)


def member_of_generated(generators: Iterable[Element], v: Element) -> bool:
    """True iff ``v`` is the join of a nonempty subset of ``generators``.

    In a powerset lattice the largest such join below ``v`` is the join of
    every generator contained in ``v``, so one pass decides membership.
    """
    below = [m for m in generators if m <= v]
    return bool(below) and BOTTOM.union(*below) == v


def generated_by_enumeration(generators: Iterable[Element]) -> set:
    """Every join of a nonempty subset of ``generators`` (exponential)."""
    closure: set = set()
    for g in set(generators):
        closure |= {g | c for c in closure}
        closure.add(g)
    return closure


@dataclass(frozen=True)
class Universe:
    """The finite tag set whose powerset is the lattice X."""

    tags: frozenset

    @classmethod
    def first(cls, n: int, size: int) -> "Universe":
        """The first ``size`` tags in nonce-major order ``(0,0), (1,0), ... (n-1,0), (0,1), ...``."""
        return cls(frozenset((k % n, k // n) for k in range(size)))

    @property
    def height(self) -> int:
        return len(self.tags)

    @property
    def top(self) -> Element:
        return self.tags

    def contains(self, v: Element) -> bool:
        return v <= self.tags


def encode(v: Element) -> str:
    """``{1:0,3:2}`` style text form, tags sorted."""
    return "{" + ",".join(f"{o}:{k}" for o, k in sorted(v)) + "}"


def decode(text: str) -> Element:
    body = text.strip()
    if not (body.startswith("{") and body.endswith("}")):
        raise ValueError(f"not an element encoding: {text!r}")
    body = body[1:-1].strip()
    if not body:
        return BOTTOM
    tags = []
    for part in body.split(","):
        m = _TAG_RE.match(part)
        if m is None:
            raise ValueError(f"bad tag {part!r} in {text!r}")
        tags.append((int(m.group(1)), int(m.group(2))))
    return frozenset(tags)
