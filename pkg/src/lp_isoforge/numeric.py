"""Number substrate: exact rationals plus fixed-precision reals.

Two kinds of scalars flow through this package:

* exact rationals (`fractions.Fraction`), used wherever the inputs are
  rational and the result must be bit-for-bit reproducible (moment
  identities, certificate residual re-evaluation, bracket checks);
* binary floats of configurable precision (`mpmath.mpf`), used for the
  Newton iteration and anything involving irrational roots.

Precision discipline: every mpf computation runs inside an explicit
``workprec`` context and the precision in force is recorded alongside any
serialized value.  Conversion from Fraction to mpf goes through
:func:`to_mpf`, built on ``mpmath.libmp.from_rational`` which rounds
correctly to nearest; the obvious ``mpmathify(Fraction)`` path does not
(it is off by up to a couple of ulps) and is never used.  Conversion the
other way (:func:`mpf_to_fraction`) is exact because every finite binary
float is a dyadic rational.

Decimal serialization uses enough digits that parsing the string at the
same precision reproduces the identical mpf, so certificates survive a
round trip byte-for-byte.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence, Union

import mpmath
from mpmath import mp, mpf, workprec
from mpmath.libmp import from_rational, prec_to_dps, round_nearest

from .errors import SingularJacobianError

Scalar = Union[int, Fraction, mpmath.mpf]

DEFAULT_PRECISION_BITS = 256
MIN_PRECISION_BITS = 128

__all__ = [
    "Scalar",
    "DEFAULT_PRECISION_BITS",
    "MIN_PRECISION_BITS",
    "workprec",
    "validate_precision",
    "to_mpf",
    "mpf_to_fraction",
    "frac_to_str",
    "parse_fraction",
    "real_to_str",
    "parse_real",
    "det_exact",
    "det_mpf",
    "solve_linear_mpf",
]


def validate_precision(bits: int) -> int:
    if not isinstance(bits, int) or bits < MIN_PRECISION_BITS:
        raise ValueError(
            f"precision must be an integer >= {MIN_PRECISION_BITS} bits, got {bits!r}"
        )
    return bits


def to_mpf(x: Scalar, prec: int | None = None) -> mpmath.mpf:
    """Convert x to mpf, correctly rounded at `prec` (current context if None)."""
    if prec is None:
        prec = mp.prec
    if isinstance(x, mpmath.mpf):
        return +x  # re-round into the active context
    if isinstance(x, int):
        x = Fraction(x)
    if isinstance(x, Fraction):
        return mpf(from_rational(x.numerator, x.denominator, prec, round_nearest))
    raise TypeError(f"cannot convert {type(x).__name__} to mpf")


def mpf_to_fraction(x: Scalar) -> Fraction:
    """Exact rational value of a finite mpf (or pass rationals through)."""
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if not mpmath.isfinite(x):
        raise ValueError(f"cannot convert non-finite value {x} to Fraction")
    sign, man, exp, _ = x._mpf_
    if man == 0:
        return Fraction(0)
    fr = Fraction(man) * Fraction(2) ** exp
    return -fr if sign else fr


# ---------------------------------------------------------------------------
# string forms
# ---------------------------------------------------------------------------

def frac_to_str(q: Fraction | int) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def parse_fraction(s: str) -> Fraction:
    return Fraction(s.strip())


def _serialization_digits(prec: int) -> int:
    # prec_to_dps underestimates on purpose; +6 guarantees the decimal
    # string pins down a unique mpf at the same precision.
    return prec_to_dps(prec) + 6


def real_to_str(x: Scalar, prec: int) -> str:
    """Decimal string that parses back to the identical mpf at `prec` bits."""
    with workprec(prec):
        v = to_mpf(x, prec)
        return mpmath.nstr(v, _serialization_digits(prec))


def parse_real(s: str, prec: int) -> mpmath.mpf:
    with workprec(prec):
        return mpf(s.strip())


# ---------------------------------------------------------------------------
# small dense linear algebra (k x k with k <= 8; no library pulls its weight)
# ---------------------------------------------------------------------------

def det_exact(rows: Sequence[Sequence[Scalar]]) -> Fraction:
    """Determinant by fraction-free elimination; exact for rational entries."""
    n = len(rows)
    a = [[Fraction(v) for v in row] for row in rows]
    if any(len(row) != n for row in a):
        raise ValueError("matrix must be square")
    sign = 1
    for col in range(n):
        pivot_row = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot_row is None:
            return Fraction(0)
        if pivot_row != col:
            a[col], a[pivot_row] = a[pivot_row], a[col]
            sign = -sign
        pivot = a[col][col]
        for r in range(col + 1, n):
            factor = a[r][col] / pivot
            for c in range(col, n):
                a[r][c] -= factor * a[col][c]
    det = Fraction(sign)
    for i in range(n):
        det *= a[i][i]
    return det


def _pivoted_elimination(rows, rhs=None):
    """Partial-pivot Gaussian elimination over mpf. Returns (det, solution)."""
    n = len(rows)
    a = [[to_mpf(v) for v in row] for row in rows]
    b = [to_mpf(v) for v in rhs] if rhs is not None else None
    max_entry = max((abs(v) for row in a for v in row), default=mpf(0))
    guard = mpf(2) ** (-(mp.prec // 2)) * (max_entry if max_entry > 0 else mpf(1))
    det = mpf(1)
    for col in range(n):
        pivot_row = max(range(col, n), key=lambda r: abs(a[r][col]))
        if abs(a[pivot_row][col]) <= guard:
            raise SingularJacobianError(
                f"pivot magnitude {mpmath.nstr(abs(a[pivot_row][col]), 8)} below "
                f"guard band at {mp.prec} bits"
            )
        if pivot_row != col:
            a[col], a[pivot_row] = a[pivot_row], a[col]
            if b is not None:
                b[col], b[pivot_row] = b[pivot_row], b[col]
            det = -det
        pivot = a[col][col]
        det *= pivot
        for r in range(col + 1, n):
            factor = a[r][col] / pivot
            for c in range(col, n):
                a[r][c] -= factor * a[col][c]
            if b is not None:
                b[r] -= factor * b[col]
    solution = None
    if b is not None:
        solution = [mpf(0)] * n
        for i in range(n - 1, -1, -1):
            acc = b[i]
            for j in range(i + 1, n):
                acc -= a[i][j] * solution[j]
            solution[i] = acc / a[i][i]
    return det, solution


def det_mpf(rows: Sequence[Sequence[Scalar]]) -> mpmath.mpf:
    det, _ = _pivoted_elimination(rows)
    return det


def solve_linear_mpf(rows: Sequence[Sequence[Scalar]], rhs: Sequence[Scalar]) -> list:
    _, sol = _pivoted_elimination(rows, rhs)
    return sol
