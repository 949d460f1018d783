"""
Core ergoprobe - Exceptions
Error hierarchy shared by every module and the CLI
"""


class ErgoprobeError(Exception):
    """Base class for all library errors"""


class IndeterminateResult(ErgoprobeError):
    """A search or a precision budget ran out; the question stays open (CLI exit code 2)"""


class GrammarError(ErgoprobeError, ValueError):
    """A textual form (sequence, element, family, set) could not be parsed"""


# --- exact_sequences ---

class SequenceError(ErgoprobeError):
    pass


class InvalidSequenceSpec(SequenceError, ValueError):
    """Spec violates g(n) >= 1 or has malformed parameters"""


class PrecisionExhausted(SequenceError, IndeterminateResult):
    """
    Floor or fractional part could not be separated from an integer boundary
    within the precision cap. The uncertified result is attached as .result
    """

    def __init__(self, message: str, result=None):
        super().__init__(message)
        self.result = result


# --- density_sets ---

class DensityError(ErgoprobeError):
    pass


class FamilyExceedsWindow(DensityError, ValueError):
    """A Folner set reaches outside the window of the set it measures"""


class GapNotFound(DensityError, IndeterminateResult):
    """No run of non-members of the requested length below the search bound"""


class CoverNotFound(DensityError, IndeterminateResult):
    """No translate cover with at most l_max translates"""


# --- semigroups ---

class SemigroupError(ErgoprobeError):
    pass


class TagMismatch(SemigroupError, TypeError):
    """Operands belong to different (semi)groups"""


class NotAGroup(SemigroupError, TypeError):
    """Inverse requested in a semigroup without inverses"""


class PrimeUniverseOverflow(SemigroupError, ValueError):
    """Integer has a prime factor outside the configured prime universe"""


class InvalidElement(SemigroupError, ValueError):
    pass


# --- folner ---

class FolnerError(ErgoprobeError):
    pass


class EnumerationTooLarge(FolnerError):
    """Brute-force enumeration would exceed the configured cardinality cap"""


class NotNondecreasing(FolnerError, ValueError):
    pass


class NotDivergent(FolnerError, ValueError):
    """f is constant on the tail of the scanned range, so f -> infinity fails there"""


# --- dynamics ---

class DynamicsError(ErgoprobeError):
    pass


class BoundaryAmbiguous(DynamicsError, IndeterminateResult):
    """Orbit point lies within the precision radius of an arc endpoint"""
