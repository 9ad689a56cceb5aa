"""Exception hierarchy shared by every sgx module."""


class SgxError(Exception):
    """Base class for all toolkit errors."""


class FormatError(SgxError):
    pass


class SizeOverflow(SgxError):
    pass


class MemoryBudgetExceeded(SgxError):
    pass


class DuplicateLabel(SgxError):
    pass


class NotAssociative(SgxError):
    def __init__(self, witness):
        x, y, z = witness
        super().__init__(f"(xy)z != x(yz) at x={x}, y={y}, z={z}")
        self.witness = witness


class NotACongruence(SgxError):
    def __init__(self, witness):
        super().__init__(f"partition is not compatible with the product: {witness}")
        self.witness = witness


class NotAnIdeal(SgxError):
    def __init__(self, witness):
        super().__init__(f"set is not closed under multiplication by S: {witness}")
        self.witness = witness


class NotAMonoid(SgxError):
    pass


class ArityMismatch(SgxError):
    pass


class ArityTooSmall(SgxError):
    pass


class NotAPower(SgxError):
    """A unary restriction is not induced by any power x^e."""

    def __init__(self, variable, message=None):
        super().__init__(message or f"restriction to x{variable} is not a power of x{variable}")
        self.variable = variable


class CycleFound(SgxError):
    def __init__(self, cycle):
        super().__init__(f"digraph has a cycle: {cycle}")
        self.cycle = cycle


class BadPromise(SgxError):
    """The input function violates the hypotheses a synthesizer relies on."""


class RestrictionNotInduced(BadPromise):
    pass


class ShapeConflict(BadPromise):
    pass


class UseCommutativePath(SgxError):
    """Raised by the 4-nilpotent synthesizer on commutative input."""


class InconsistentConstraints(SgxError):
    pass
