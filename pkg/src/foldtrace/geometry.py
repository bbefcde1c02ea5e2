"""Plane geometry primitives: points, axis directions, turning-point kinds."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum


def cbrt(v: float) -> float:
    """Real cube root, defined for negative arguments."""
    return math.copysign(abs(v) ** (1.0 / 3.0), v)


@dataclass(frozen=True)
class Point2:
    """A coordinate pair in the trace plane."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite coordinates ({self.x}, {self.y})")

    def distance_to(self, other: "Point2") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


class Axis(Enum):
    X = "x"
    Y = "y"

    @property
    def other(self) -> "Axis":
        return Axis.Y if self is Axis.X else Axis.X


@dataclass(frozen=True)
class StepDirection:
    """A signed axis direction for continuation stepping."""

    axis: Axis
    sign: int

    def __post_init__(self):
        if self.sign not in (-1, 1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")

    def __str__(self) -> str:
        return ("+" if self.sign > 0 else "-") + self.axis.value

    @classmethod
    def parse(cls, text: str) -> "StepDirection":
        """Parse '+x', '-y', etc. (case-insensitive, sign optional for '+')."""
        t = text.strip().lower()
        sign = 1
        if t and t[0] in "+-":
            sign = 1 if t[0] == "+" else -1
            t = t[1:]
        if t not in ("x", "y"):
            raise ValueError(f"cannot parse direction {text!r}")
        return cls(Axis(t), sign)


PLUS_X = StepDirection(Axis.X, 1)
MINUS_X = StepDirection(Axis.X, -1)
PLUS_Y = StepDirection(Axis.Y, 1)
MINUS_Y = StepDirection(Axis.Y, -1)


class TurningPointKind(Enum):
    """Which open half-plane around a turning point contains no solutions.

    TYPE1 blocks east (+x), TYPE2 north (+y), TYPE3 west (-x), TYPE4
    south (-y); the boundary scan therefore samples the opposite half-disk.
    """

    TYPE1 = 1
    TYPE2 = 2
    TYPE3 = 3
    TYPE4 = 4

    @property
    def blocked(self) -> StepDirection:
        return _BLOCKED[self]

    @classmethod
    def from_blocked(cls, direction: StepDirection) -> "TurningPointKind":
        for kind, blocked in _BLOCKED.items():
            if blocked == direction:
                return kind
        raise ValueError(f"no kind blocks {direction}")


_BLOCKED = {
    TurningPointKind.TYPE1: PLUS_X,
    TurningPointKind.TYPE2: PLUS_Y,
    TurningPointKind.TYPE3: MINUS_X,
    TurningPointKind.TYPE4: MINUS_Y,
}


@dataclass(frozen=True)
class Box:
    """Axis-aligned rectangle used as an optional tracing domain."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self):
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise ValueError("box bounds out of order")

    def contains(self, p: Point2) -> bool:
        return self.x_min <= p.x <= self.x_max and self.y_min <= p.y <= self.y_max


def coordinate(p: Point2, axis: Axis) -> float:
    return p.x if axis is Axis.X else p.y


def with_coordinate(p: Point2, axis: Axis, value: float) -> Point2:
    if axis is Axis.X:
        return Point2(value, p.y)
    return Point2(p.x, value)
