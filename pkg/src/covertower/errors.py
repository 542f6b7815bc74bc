"""Exception types shared across the package.

Every error that can escape a public operation lives here so the CLI can
map each class to a stable exit code.
"""


class CovertowerError(Exception):
    """Base class for all package-specific errors."""


class BudgetExceeded(CovertowerError):
    """A search or enumeration hit its configured node/size budget."""


class RelatorViolated(CovertowerError):
    """A permutation assignment does not satisfy the defining relators."""


class NotTransitive(CovertowerError):
    """A coset table is not transitive from its basepoint."""


class NotNormal(CovertowerError):
    """An operation requiring a normal subgroup was given a non-normal one."""


class NotInvariant(CovertowerError):
    """A subgroup is not invariant under the supplied automorphism."""


class IdentificationInvalid(CovertowerError):
    """Cover identification data does not define an isomorphism."""


class NotAnIsomorphism(CovertowerError):
    """A lattice map is not a bijective identification."""


class SingularMatrix(CovertowerError):
    """An integer matrix that must be invertible has determinant zero."""


class NotRestrictable(CovertowerError):
    """A virtual automorphism cannot be restricted to the requested cover."""


class NotInvertible(CovertowerError):
    """No inverse witness is available and bounded solving failed."""


class IndexOverflow(CovertowerError):
    """A constructed subgroup would exceed the configured index cap."""


class IntersectionIndexOverflow(IndexOverflow):
    """An iterated intersection grew past the configured index cap."""


class IncompatibleTower(CovertowerError):
    """Tower arrows carry degree labels that do not multiply consistently."""


class InconsistentInput(CovertowerError):
    """Mixed presentations or malformed build steps."""


class SchemaError(CovertowerError):
    """A serialized document has the wrong schema tag or shape."""
