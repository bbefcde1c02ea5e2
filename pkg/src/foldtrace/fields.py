"""Built-in residual fields.

A residual field is any callable f(x, y) -> float whose zero set is the
curve being traced; it may raise FieldEvaluationError where it cannot be
evaluated.
"""

from __future__ import annotations

from .turnpoint import ResidualField


def circle_field(radius: float = 1.0) -> ResidualField:
    """f(x, y) = x^2 + y^2 - radius^2."""
    r2 = radius * radius

    def f(x: float, y: float) -> float:
        return x * x + y * y - r2

    return f
