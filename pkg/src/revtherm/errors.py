"""Exception types shared across the library.

The CLI maps these onto its exit-code contract: ShapeError and
ContractError are invalid-input conditions (exit 3), NumericHealthError
is a numerical breakdown (exit 5). NonDiagonalizable is internal control
flow: callers that can fall back to an eigendecomposition-free method
catch it.
"""


class ShapeError(ValueError):
    """Operands have incompatible or non-conforming dimensions."""


class ContractError(ValueError):
    """An input violates a documented precondition."""


class NonDiagonalizable(ArithmeticError):
    """Matrix is defective within tolerance; spectral formulas unavailable."""


class NumericHealthError(ArithmeticError):
    """A computed quantity violated a health gate (trace, positivity)."""
