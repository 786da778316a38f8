"""Exception types shared across the package."""


class CodesignError(Exception):
    """Base class for all library errors."""


class DomainError(CodesignError):
    """An element is outside its poset, or two spaces do not match."""


class CompositionError(CodesignError):
    """Design problems were wired together with mismatched interfaces."""
