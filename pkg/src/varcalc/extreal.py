"""Extended-real scalars for one-sided variational quantities.

Values live in (-inf, +inf]: finite reals plus a single absorbing +inf.
Minus infinity is deliberately unrepresentable -- every quantity in this
package (function values, directional quotients, second-order quantities)
is either finite or diverges upward, and an arithmetic path that would
produce -inf is a logic error worth surfacing immediately.

Conventions:
  * finite + finite -> finite, x + inf -> inf
  * 0 * inf -> 0 (the standard convention for indicator penalties)
  * c * inf -> inf for c > 0, error for c < 0
  * inf - inf and -inf-producing negations raise ExtRealError
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import total_ordering


class ExtRealError(ArithmeticError):
    """An operation tried to leave (-inf, +inf]."""


@total_ordering
@dataclass(frozen=True, slots=True)
class ExtReal:
    """A real number or +inf, with saturating arithmetic."""

    raw: float

    def __post_init__(self) -> None:
        v = float(self.raw)
        if math.isnan(v):
            raise ExtRealError("NaN is not an extended real")
        if v == -math.inf:
            raise ExtRealError("-inf is not representable")
        if v == 0.0:
            v = 0.0  # collapse -0.0 so reports and comparisons see one zero
        object.__setattr__(self, "raw", v)

    # -- constructors -------------------------------------------------

    @staticmethod
    def of(value: float | int | "ExtReal") -> "ExtReal":
        if isinstance(value, ExtReal):
            return value
        return ExtReal(float(value))

    # -- predicates ---------------------------------------------------

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.raw)

    @property
    def is_inf(self) -> bool:
        return self.raw == math.inf

    # -- arithmetic ---------------------------------------------------

    def __add__(self, other: "ExtReal | float | int") -> "ExtReal":
        o = ExtReal.of(other)
        return ExtReal(self.raw + o.raw)

    __radd__ = __add__

    def __sub__(self, other: "ExtReal | float | int") -> "ExtReal":
        o = ExtReal.of(other)
        if self.is_inf and o.is_inf:
            raise ExtRealError("inf - inf is undefined")
        if o.is_inf:
            raise ExtRealError("subtracting +inf would produce -inf")
        return ExtReal(self.raw - o.raw)

    def __mul__(self, scalar: float | int) -> "ExtReal":
        c = float(scalar)
        if math.isnan(c):
            raise ExtRealError("NaN scalar")
        if self.is_inf:
            if c > 0:
                return ExtReal(math.inf)
            if c == 0:
                return ExtReal(0.0)
            raise ExtRealError("negative scalar times +inf would produce -inf")
        return ExtReal(self.raw * c)

    __rmul__ = __mul__

    def __neg__(self) -> "ExtReal":
        if self.is_inf:
            raise ExtRealError("negating +inf would produce -inf")
        return ExtReal(-self.raw)

    # -- order --------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (ExtReal, float, int)):
            return self.raw == ExtReal.of(other).raw
        return NotImplemented

    def __lt__(self, other: "ExtReal | float | int") -> bool:
        return self.raw < ExtReal.of(other).raw

    def __hash__(self) -> int:
        return hash(self.raw)

    # -- conversions ----------------------------------------------------

    def __float__(self) -> float:
        return self.raw

    def finite_value(self) -> float:
        """The float value, raising if +inf."""
        if self.is_inf:
            raise ExtRealError("value is +inf")
        return self.raw

    def __repr__(self) -> str:
        return "ExtReal(+inf)" if self.is_inf else f"ExtReal({self.raw!r})"


INF = ExtReal(math.inf)
ZERO = ExtReal(0.0)


def ext_min(*values: ExtReal | float | int) -> ExtReal:
    """Minimum of extended reals (at least one argument)."""
    items = [ExtReal.of(v) for v in values]
    return min(items, key=lambda e: e.raw)


def ext_max(*values: ExtReal | float | int) -> ExtReal:
    items = [ExtReal.of(v) for v in values]
    return max(items, key=lambda e: e.raw)
