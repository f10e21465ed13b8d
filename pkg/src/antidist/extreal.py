"""Tagged extended-real values for divergences and exponents.

Divergence-type quantities in this package can legitimately be +infinity
(empty common support, orthogonal states, kappa = 0).  Instead of letting
IEEE inf leak through arithmetic, such results are returned as an
:class:`ExtReal`: either a finite float or an explicit infinity tag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class ExtReal:
    """A value in (-inf, +inf) or the single point +inf.

    ``ExtReal(x)`` wraps a finite float; ``ExtReal.inf()`` is the
    infinite value.  Comparisons against plain numbers work the way the
    extended order suggests.
    """

    value: float = 0.0
    infinite: bool = False

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))
        if not self.infinite and not math.isfinite(self.value):
            raise ValueError("finite ExtReal requires a finite float; "
                             "use ExtReal.inf() for infinity")

    @classmethod
    def inf(cls) -> "ExtReal":
        return cls(0.0, True)

    @property
    def is_finite(self) -> bool:
        return not self.infinite

    def __float__(self) -> float:
        return math.inf if self.infinite else self.value

    def _key(self, other) -> float:
        if isinstance(other, ExtReal):
            return float(other)
        return float(other)

    def __lt__(self, other):
        return float(self) < self._key(other)

    def __le__(self, other):
        return float(self) <= self._key(other)

    def __gt__(self, other):
        return float(self) > self._key(other)

    def __ge__(self, other):
        return float(self) >= self._key(other)

    def __str__(self) -> str:
        return "inf" if self.infinite else repr(self.value)


def neg_log(x: float, zero_threshold: float = 0.0) -> ExtReal:
    """-ln(x) as an ExtReal; values at or below ``zero_threshold``
    (default: exactly zero) map to +inf."""
    if x <= zero_threshold:
        return ExtReal.inf()
    return ExtReal(-math.log(x))


def ext_max(values) -> ExtReal:
    """Maximum of a nonempty iterable of ExtReal."""
    values = list(values)
    if not values:
        raise ValueError("ext_max of empty sequence")
    if any(v.infinite for v in values):
        return ExtReal.inf()
    return ExtReal(max(v.value for v in values))
