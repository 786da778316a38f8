"""Antichains: Pareto fronts of minimal elements.

An antichain is a finite set of pairwise incomparable points of a poset.
Fronts of minimal resources are compared by reverse inclusion of their
upper sets: S1 is below S2 when every point of S2 is dominated by some
point of S1 (S1 offers at least everything S2 offers).  Under this order
the empty antichain is the greatest element and encodes infeasibility,
while {bottom} is the least.
"""

from .errors import DomainError
from .posets import Poset, product, concat_elements


def _minimize(points, poset):
    # drop duplicates first so only strict domination remains
    unique = list(dict.fromkeys(points))
    kept = []
    for i, p in enumerate(unique):
        dominated = False
        for j, q in enumerate(unique):
            if i != j and poset.leq(q, p):
                dominated = True
                break
        if not dominated:
            kept.append(p)
    return kept


def min_elements(points, poset: Poset) -> "Antichain":
    """Antichain of minimal elements of an arbitrary finite point set."""
    return Antichain(poset, points)


class Antichain:
    """Immutable antichain over a poset; construction minimizes."""

    __slots__ = ("poset", "points")

    def __init__(self, poset: Poset, points=()):
        points = list(points)
        for p in points:
            poset.check_member(p)
        object.__setattr__(self, "poset", poset)
        object.__setattr__(self, "points", frozenset(_minimize(points, poset)))

    def __setattr__(self, name, value):
        raise AttributeError("antichains are immutable")

    @property
    def is_empty(self) -> bool:
        return not self.points

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __eq__(self, other):
        return (
            isinstance(other, Antichain)
            and other.poset == self.poset
            and other.points == self.points
        )

    def __hash__(self):
        return hash((self.poset, self.points))

    def _check_same_space(self, other: "Antichain"):
        if self.poset != other.poset:
            raise DomainError(
                "antichains live in different posets: %s vs %s"
                % (self.poset.describe(), other.poset.describe())
            )

    def leq(self, other: "Antichain") -> bool:
        """True when self's upper set contains other's upper set.

        Every point of `other` must be dominated by some point of self.
        Consequences: anything <= empty, and empty <= S only for empty S.
        """
        self._check_same_space(other)
        return all(
            any(self.poset.leq(s1, s2) for s1 in self.points) for s2 in other.points
        )

    def union_min(self, other: "Antichain") -> "Antichain":
        """Minimal elements of the union; the meet of the two fronts."""
        self._check_same_space(other)
        return Antichain(self.poset, list(self.points) + list(other.points))

    def cross(self, other: "Antichain") -> "Antichain":
        """Antichain product over the flat product poset."""
        prod = product(self.poset, other.poset)
        pts = [
            concat_elements(self.poset, a, other.poset, b)
            for a in self.points
            for b in other.points
        ]
        return Antichain(prod, pts)

    def filter_above(self, r) -> "Antichain":
        """Points of the front that dominate r."""
        self.poset.check_member(r)
        return Antichain(self.poset, [p for p in self.points if self.poset.leq(r, p)])

    def up_contains(self, r) -> bool:
        """Whether r belongs to the upper set of the front."""
        self.poset.check_member(r)
        return any(self.poset.leq(p, r) for p in self.points)

    def sorted_points(self) -> list:
        return sorted(self.points, key=self.poset.sort_key)

    def to_json(self) -> list:
        return [self.poset.render(p) for p in self.sorted_points()]

    def format(self) -> str:
        return ";".join(self.poset.format(p) for p in self.sorted_points())

    def __repr__(self):
        inner = ", ".join(self.poset.format(p) for p in self.sorted_points())
        return "Antichain{%s}" % inner
