class SchurkitError(Exception):
    """Base class for all toolkit errors."""


class InputError(SchurkitError, ValueError):
    """Malformed or inconsistent input (shapes, non-finite entries, bad parameters)."""


class DecompositionError(SchurkitError, ArithmeticError):
    """A factorization routine failed to converge."""


class RangeInclusionError(SchurkitError):
    """A range inclusion required by the operation does not hold."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual


class NotComplementableError(SchurkitError):
    def __init__(self, message: str, residual_c: float, residual_b: float):
        super().__init__(
            f"{message} (residual R(C)<=R(D): {residual_c:.3e}, "
            f"residual R(B^T)<=R(D^T): {residual_b:.3e})"
        )
        self.residual_c = residual_c
        self.residual_b = residual_b


class SingularBlockError(SchurkitError, ArithmeticError):
    pass


class MembershipError(SchurkitError):
    """A phi-class precondition failed."""


class SequenceError(SchurkitError):
    """A term of an operator sequence violates the operation's precondition."""

    def __init__(self, message: str, index: int):
        super().__init__(f"{message} (first failing index n={index})")
        self.index = index


class SeriesDivergenceError(SchurkitError, ArithmeticError):
    pass
