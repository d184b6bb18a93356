"""
Arithmetic backends for the uncertainty-set oracles
"""

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Union

Number = Union[Fraction, float]


class ArithMode(Enum):
    """Number representation used inside the oracles"""
    EXACT = "exact"
    FLOAT = "float"


def parse_rational(text: Union[str, int, float, Fraction]) -> Fraction:
    """
    Parse a probability, radius or coefficient into an exact rational

    Accepts ``"p/q"``, decimal strings (``"0.25"``), integers and Fractions.
    Floats are converted through their shortest decimal representation so that
    ``0.1`` becomes ``1/10`` rather than the binary expansion.

    Args:
        text: Value to parse

    Returns:
        Exact rational value
    """
    if isinstance(text, Fraction):
        return text
    if isinstance(text, bool):
        raise ValueError(f"Not a rational: {text!r}")
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, float):
        return Fraction(repr(text))
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as e:
        raise ValueError(f"Not a rational: {text!r}") from e


def format_rational(value: Fraction) -> str:
    """Serialize a rational as ``"p/q"``"""
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class FeasibilityBackend:
    """
    Comparison semantics for oracle computations

    Exact mode works on Fractions and never rounds. Float mode converts every
    input to float and treats magnitudes up to ``tolerance`` as zero.
    """
    mode: ArithMode = ArithMode.EXACT
    tolerance: float = 1e-9

    @classmethod
    def from_name(cls, name: str, tolerance: float = 1e-9) -> 'FeasibilityBackend':
        try:
            mode = ArithMode(name)
        except ValueError:
            raise ValueError(f"Unknown arithmetic mode '{name}'. Expected exact or float")
        return cls(mode=mode, tolerance=tolerance)

    @property
    def exact(self) -> bool:
        return self.mode is ArithMode.EXACT

    @property
    def eps(self) -> Number:
        return 0 if self.exact else self.tolerance

    def num(self, value: Number) -> Number:
        """Convert a model value into the backend's representation"""
        return Fraction(value) if self.exact else float(value)

    def is_zero(self, value: Number) -> bool:
        return value == 0 if self.exact else abs(value) <= self.tolerance

    def positive(self, value: Number) -> bool:
        return value > self.eps

    def leq(self, lhs: Number, rhs: Number) -> bool:
        return lhs <= rhs + self.eps


EXACT = FeasibilityBackend()
