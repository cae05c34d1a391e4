"""Exact rational arithmetic.

Every polytope and LP code path in this package computes with exact
rationals; floating point appears nowhere in those paths.  gmpy2.mpq is
used when available (roughly an order of magnitude faster than
fractions.Fraction for the simplex inner loops), with Fraction as a
drop-in fallback.  Both keep values in lowest terms with a positive
denominator.
"""

from __future__ import annotations

try:
    from gmpy2 import mpq as _make

    BACKEND = "gmpy2"
except ImportError:  # pragma: no cover - exercised only without gmpy2
    from fractions import Fraction as _make

    BACKEND = "fractions"


def rat(numerator, denominator=1):
    """Build a rational in lowest terms."""
    return _make(numerator, denominator)


Rational = type(rat(0))

ZERO = rat(0)
ONE = rat(1)
HALF = rat(1, 2)


def parse_rational(text: str):
    """Parse 'p/q' or 'p' into a rational."""
    text = text.strip()
    if "/" in text:
        num, den = text.split("/", 1)
        return rat(int(num), int(den))
    return rat(int(text))


def format_rational(value) -> str:
    """Render as 'p/q', or 'p' when the denominator is 1."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def decimal_str(value, digits: int = 5) -> str:
    """Fixed-point decimal rendering for display, computed in integers."""
    num, den = value.numerator, value.denominator
    sign = "-" if num < 0 else ""
    num = abs(num)
    whole, rem = divmod(num, den)
    frac = (rem * 10**digits) // den
    return f"{sign}{whole}.{frac:0{digits}d}"
