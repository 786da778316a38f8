"""Partially ordered value spaces.

Functionality and resource quantities live in posets.  Three kinds are
supported: nonnegative real chains with a unit tag (including +inf as the
top element), finite posets given by an explicit order-pair list, and
flat n-ary products ordered componentwise.

Products are kept flat: the product of two products concatenates their
factor lists, and elements of a product are plain tuples with one slot
per factor.  Scalars are never wrapped in 1-tuples.
"""

import math
from .errors import DomainError


class Poset:
    """Base class: a set of admissible elements plus a partial order."""

    def contains(self, x) -> bool:
        raise NotImplementedError

    def check_member(self, x):
        """Raise DomainError unless x is an element of this poset."""
        if not self.contains(x):
            raise DomainError("%r is not an element of %s" % (x, self.describe()))

    def leq(self, a, b) -> bool:
        raise NotImplementedError

    def bottom(self):
        raise NotImplementedError

    def meet(self, a, b):
        """Greatest lower bound of a and b."""
        raise NotImplementedError

    @property
    def is_finite(self) -> bool:
        raise NotImplementedError

    def elements(self) -> list:
        raise NotImplementedError

    @property
    def factors(self) -> tuple:
        """Scalar posets count as a single factor of themselves."""
        return (self,)

    def describe(self) -> str:
        raise NotImplementedError

    def render(self, x):
        """JSON-ready rendering of an element."""
        raise NotImplementedError

    def format(self, x) -> str:
        """Compact text rendering of an element (CSV cells, messages)."""
        raise NotImplementedError

    def sort_key(self, x):
        """Total-order key used only to make rendered output deterministic."""
        raise NotImplementedError

    def __repr__(self):
        return "<%s %s>" % (type(self).__name__, self.describe())


class RealPlus(Poset):
    """Chain of nonnegative reals with a unit tag; +inf is the top."""

    __slots__ = ("unit",)

    def __init__(self, unit: str = ""):
        self.unit = unit

    def contains(self, x) -> bool:
        if isinstance(x, bool) or not isinstance(x, (int, float)):
            return False
        return not math.isnan(x) and x >= 0

    def leq(self, a, b) -> bool:
        self.check_member(a)
        self.check_member(b)
        return a <= b

    def bottom(self):
        return 0.0

    def meet(self, a, b):
        self.check_member(a)
        self.check_member(b)
        return min(a, b)

    @property
    def is_finite(self) -> bool:
        return False

    def elements(self) -> list:
        raise DomainError("cannot enumerate the infinite poset %s" % self.describe())

    def describe(self) -> str:
        return "R+[%s]" % self.unit if self.unit else "R+"

    def render(self, x):
        v = float(x)
        return {"value": "inf" if math.isinf(v) else v, "unit": self.unit}

    def format(self, x) -> str:
        v = float(x)
        return "inf" if math.isinf(v) else repr(v)

    def sort_key(self, x):
        return float(x)

    def __eq__(self, other):
        return isinstance(other, RealPlus) and other.unit == self.unit

    def __hash__(self):
        return hash(("R+", self.unit))


class FinitePoset(Poset):
    """Finite poset built from an order-pair list.

    The constructor takes the reflexive-transitive closure of the given
    pairs, rejects antisymmetry violations, and requires a unique least
    element.  Label declaration order is kept for deterministic output.
    """

    def __init__(self, labels, pairs=(), name: str = ""):
        labels = list(labels)
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate labels in finite poset")
        if not labels:
            raise ValueError("finite poset needs at least one element")
        self.name = name
        self._labels = labels
        self._index = {x: i for i, x in enumerate(labels)}
        up = {x: {x} for x in labels}
        for a, b in pairs:
            if a not in self._index or b not in self._index:
                raise ValueError("order pair (%r, %r) uses undeclared labels" % (a, b))
            up[a].add(b)
        # Warshall closure; n is small by design
        for k in labels:
            for a in labels:
                if k in up[a]:
                    up[a] |= up[k]
        for a in labels:
            for b in up[a]:
                if a != b and a in up[b]:
                    raise ValueError("antisymmetry violated: %r and %r" % (a, b))
        self._up = {a: frozenset(s) for a, s in up.items()}
        self._down = {
            b: frozenset(a for a in labels if b in self._up[a]) for b in labels
        }
        bottoms = [a for a in labels if len(self._up[a]) == len(labels)]
        if len(bottoms) != 1:
            raise ValueError("finite poset must have a unique least element")
        self._bottom = bottoms[0]
        self._key = (tuple(labels), frozenset((a, b) for a in labels for b in self._up[a]))

    @classmethod
    def chain(cls, labels, name: str = ""):
        """Total order in declaration order."""
        labels = list(labels)
        pairs = [(labels[i], labels[i + 1]) for i in range(len(labels) - 1)]
        return cls(labels, pairs, name=name)

    def contains(self, x) -> bool:
        try:
            return x in self._index
        except TypeError:
            return False

    def leq(self, a, b) -> bool:
        self.check_member(a)
        self.check_member(b)
        return b in self._up[a]

    def bottom(self):
        return self._bottom

    def meet(self, a, b):
        self.check_member(a)
        self.check_member(b)
        common = self._down[a] & self._down[b]
        greatest = [c for c in common if all(d in self._down[c] for d in common)]
        if len(greatest) != 1:
            raise DomainError(
                "no unique greatest lower bound of %r and %r in %s"
                % (a, b, self.describe())
            )
        return greatest[0]

    @property
    def is_finite(self) -> bool:
        return True

    def elements(self) -> list:
        return list(self._labels)

    def describe(self) -> str:
        if self.name:
            return self.name
        return "poset{%s}" % ",".join(str(x) for x in self._labels)

    def render(self, x):
        return x

    def format(self, x) -> str:
        return str(x)

    def sort_key(self, x):
        return self._index[x]

    def __eq__(self, other):
        return isinstance(other, FinitePoset) and other._key == self._key

    def __hash__(self):
        return hash(self._key)


class ProductPoset(Poset):
    """Flat product of two or more scalar posets, ordered componentwise."""

    def __init__(self, factors):
        flat = []
        for p in factors:
            flat.extend(p.factors)
        if len(flat) < 2:
            raise ValueError("product poset needs at least two factors")
        self._factors = tuple(flat)

    @property
    def factors(self) -> tuple:
        return self._factors

    def contains(self, x) -> bool:
        if not isinstance(x, tuple) or len(x) != len(self._factors):
            return False
        return all(p.contains(v) for p, v in zip(self._factors, x))

    def leq(self, a, b) -> bool:
        self.check_member(a)
        self.check_member(b)
        return all(p.leq(u, v) for p, u, v in zip(self._factors, a, b))

    def bottom(self):
        return tuple(p.bottom() for p in self._factors)

    def meet(self, a, b):
        self.check_member(a)
        self.check_member(b)
        return tuple(p.meet(u, v) for p, u, v in zip(self._factors, a, b))

    @property
    def is_finite(self) -> bool:
        return all(p.is_finite for p in self._factors)

    def elements(self) -> list:
        import itertools

        if not self.is_finite:
            raise DomainError("cannot enumerate the infinite poset %s" % self.describe())
        return [tuple(t) for t in itertools.product(*(p.elements() for p in self._factors))]

    def describe(self) -> str:
        return " x ".join(p.describe() for p in self._factors)

    def render(self, x):
        return [p.render(v) for p, v in zip(self._factors, x)]

    def format(self, x) -> str:
        return "(%s)" % ",".join(p.format(v) for p, v in zip(self._factors, x))

    def sort_key(self, x):
        return tuple(p.sort_key(v) for p, v in zip(self._factors, x))

    def __eq__(self, other):
        return isinstance(other, ProductPoset) and other._factors == self._factors

    def __hash__(self):
        return hash(self._factors)


def product(p1: Poset, p2: Poset) -> ProductPoset:
    """Flat product of two posets (factor lists concatenate)."""
    return ProductPoset((p1, p2))


def arity(p: Poset) -> int:
    return len(p.factors)


def element_parts(p: Poset, x) -> tuple:
    """View an element as the tuple of its factor components."""
    return tuple(x) if isinstance(p, ProductPoset) else (x,)


def concat_elements(p1: Poset, x1, p2: Poset, x2):
    """Element of product(p1, p2) from elements of the two operands."""
    return element_parts(p1, x1) + element_parts(p2, x2)


def split_element(p1: Poset, p2: Poset, x) -> tuple:
    """Inverse of concat_elements: split a flat tuple along (p1, p2)."""
    n1 = arity(p1)
    a = x[:n1] if isinstance(p1, ProductPoset) else x[0]
    b = x[n1:] if isinstance(p2, ProductPoset) else x[n1]
    return a, b
