"""Exact bit strings, circular distance and binary-fraction windows.

Bit indices are 1-based with index 1 the most significant bit. Nothing here
touches floating point.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd


@dataclass(frozen=True, order=True)
class BitString:
    """A fixed-width binary word; ``value`` is the word read as an integer."""

    width: int
    value: int

    def __post_init__(self):
        if self.width < 1:
            raise ValueError(f"width must be positive, got {self.width}")
        if not 0 <= self.value < (1 << self.width):
            raise ValueError(f"value {self.value} does not fit in {self.width} bits")

    @classmethod
    def from_str(cls, bits: str) -> BitString:
        if not bits or set(bits) - {"0", "1"}:
            raise ValueError(f"not a bit string: {bits!r}")
        return cls(len(bits), int(bits, 2))

    def __str__(self) -> str:
        return format(self.value, f"0{self.width}b")

    def __len__(self) -> int:
        return self.width

    def __add__(self, other: BitString) -> BitString:
        """Catenation (``self`` supplies the high bits)."""
        if not isinstance(other, BitString):
            return NotImplemented
        return BitString(self.width + other.width, (self.value << other.width) | other.value)

    def to_json(self) -> dict:
        return {"bits": str(self), "width": self.width}


@dataclass(frozen=True)
class PhaseFraction:
    """An exact rational phase in [0, 1), kept in lowest terms."""

    numerator: int
    denominator: int = 1

    def __post_init__(self):
        if self.denominator < 1:
            raise ValueError("denominator must be positive")
        if not 0 <= self.numerator < self.denominator:
            raise ValueError(f"{self.numerator}/{self.denominator} is not in [0, 1)")
        g = gcd(self.numerator, self.denominator)
        if g != 1:
            object.__setattr__(self, "numerator", self.numerator // g)
            object.__setattr__(self, "denominator", self.denominator // g)

    @classmethod
    def wrap(cls, x) -> PhaseFraction:
        """Fractional part of an int/Fraction/PhaseFraction."""
        if isinstance(x, PhaseFraction):
            return x
        x = Fraction(x)
        return cls(x.numerator % x.denominator, x.denominator)

    def as_fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    def __str__(self) -> str:
        return f"{self.numerator}/{self.denominator}"


def as_phase(omega) -> PhaseFraction:
    if isinstance(omega, PhaseFraction):
        return omega
    omega = Fraction(omega)
    if not 0 <= omega < 1:
        raise ValueError(f"phase {omega} is not in [0, 1)")
    return PhaseFraction(omega.numerator, omega.denominator)


def dt_distance(x: BitString, y: BitString) -> int:
    """Circular distance ``min(|x-y|, 2^t - |x-y|)`` between two t-bit words."""
    if x.width != y.width:
        raise ValueError(f"width mismatch: {x.width} vs {y.width}")
    diff = abs(x.value - y.value)
    return min(diff, (1 << x.width) - diff)


def frac_bits(omega, i: int, j: int) -> BitString:
    """Bits ``i..j`` of the truncated binary expansion of ``omega`` in [0, 1).

    Dyadic rationals use the terminating expansion, so their tail is zeros.
    """
    if not 1 <= i <= j:
        raise ValueError(f"need 1 <= i <= j, got i={i}, j={j}")
    w = as_phase(omega)
    window = ((w.numerator << j) // w.denominator) & ((1 << (j - i + 1)) - 1)
    return BitString(j - i + 1, window)


def slice_bits(x: BitString, i: int, j: int) -> BitString:
    """Sub-word ``a_i..a_j`` of ``x`` (1-indexed from the most significant bit)."""
    if not 1 <= i <= j <= x.width:
        raise ValueError(f"slice [{i},{j}] out of range for width {x.width}")
    n = j - i + 1
    return BitString(n, (x.value >> (x.width - j)) & ((1 << n) - 1))
