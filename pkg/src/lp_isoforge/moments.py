"""Even moments of sums of independent symmetric three-valued variables.

A symmetric three-valued variable f takes values +a, 0, -a with
P(f = a) = P(f = -a) = mass/2, so its moments are

    E f^(2l) = a^(2l) * mass,   E f^(2l+1) = 0.

For independent symmetric f_1, ..., f_n all odd cross terms of
(f_1 + ... + f_n)^(2k) vanish and the multinomial expansion collapses to

    E (sum f_j)^(2k)
        = sum_{k_1+...+k_n=k} (2k)! / prod_j (2k_j)! * prod_j E f_j^(2k_j),

with the convention E f^0 = 1 for zero parts.  Everything here is exact
when the inputs are rational: coefficients are integers and the per-term
moments are Fractions.

`convolve` is the independent oracle for the same quantity: it builds the
full distribution of the sum by direct convolution (atoms merged on equal
values) and integrates powers against it.  The two routes share no code
beyond the scalar type, which is what makes the cross-check meaningful.

Variables may carry irrational scales (e.g. n**-0.5).  Even moments only
ever consume scale**2, so a variable can be given an exact `scale_sq`
alongside a floating `scale`; moment computations then stay exact while
the convolution, which needs the signed values themselves, uses `scale`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

import mpmath
from mpmath import mp

from .errors import CapExceededError, DegenerateInputError
from .numeric import Scalar, frac_to_str, parse_fraction, parse_real, real_to_str, to_mpf

DEFAULT_ATOM_CAP = 3 ** 16

__all__ = [
    "SymmetricAtomVariable",
    "IndependentSumSpec",
    "DiscreteDistribution",
    "DEFAULT_ATOM_CAP",
    "even_moment_single",
    "moment_coefficients",
    "even_moment_of_sum",
    "even_moment_from_tables",
    "convolve",
    "abs_moment",
]


def _is_rational(x) -> bool:
    return isinstance(x, (int, Fraction))


def _as_number(x):
    """Normalize ints to Fraction; leave Fraction and mpf alone."""
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, (Fraction, mpmath.mpf)):
        return x
    raise TypeError(f"expected int, Fraction or mpf, got {type(x).__name__}")


@dataclass(frozen=True)
class SymmetricAtomVariable:
    """Symmetric variable on {+scale, 0, -scale} with P(|f| = scale) = mass.

    scale_sq defaults to scale*scale; pass it explicitly when the scale is
    irrational but its square is exact (scale n**-0.5, scale_sq 1/n).
    """

    scale: Scalar
    mass: Scalar
    scale_sq: Scalar = None  # type: ignore[assignment]

    def __post_init__(self):
        scale = _as_number(self.scale)
        mass = _as_number(self.mass)
        if not scale > 0:
            raise DegenerateInputError(f"scale must be positive, got {self.scale}")
        if not (0 < mass <= 1):
            raise DegenerateInputError(f"mass must lie in (0, 1], got {self.mass}")
        if self.scale_sq is None:
            scale_sq = scale * scale
        else:
            scale_sq = _as_number(self.scale_sq)
            # consistency within float tolerance; exact inputs must match exactly
            approx = to_mpf(scale) ** 2
            if abs(approx - to_mpf(scale_sq)) > mpmath.mpf(2) ** (-(mp.prec - 8)) * to_mpf(scale_sq):
                raise DegenerateInputError("scale_sq inconsistent with scale")
        object.__setattr__(self, "scale", scale)
        object.__setattr__(self, "mass", mass)
        object.__setattr__(self, "scale_sq", scale_sq)


@dataclass(frozen=True)
class IndependentSumSpec:
    """An ordered list of independent symmetric three-valued summands."""

    terms: tuple

    def __init__(self, terms: Sequence[SymmetricAtomVariable]):
        terms = tuple(terms)
        if not terms:
            raise DegenerateInputError("sum spec needs at least one term")
        if not all(isinstance(t, SymmetricAtomVariable) for t in terms):
            raise TypeError("terms must be SymmetricAtomVariable instances")
        object.__setattr__(self, "terms", terms)

    def __len__(self) -> int:
        return len(self.terms)


def even_moment_single(v: SymmetricAtomVariable, order: int) -> Scalar:
    """E v^order for even order >= 0 (order 0 returns 1 by convention)."""
    if order < 0 or order % 2 != 0:
        raise ValueError(f"order must be even and >= 0, got {order}")
    if order == 0:
        return Fraction(1)
    return v.scale_sq ** (order // 2) * v.mass


def _compositions(k: int, n: int) -> Iterator[tuple]:
    """All n-tuples of nonnegative integers summing to k, lexicographic."""
    if n == 1:
        yield (k,)
        return
    for first in range(k + 1):
        for rest in _compositions(k - first, n - 1):
            yield (first,) + rest


@lru_cache(maxsize=None)
def _even_multinomial(parts: tuple) -> int:
    """(2k)! / prod (2k_i)! via a telescoping product of even binomials."""
    remaining = 2 * sum(parts)
    coeff = 1
    for part in parts:
        coeff *= math.comb(remaining, 2 * part)
        remaining -= 2 * part
    return coeff


def moment_coefficients(k: int, n: int) -> list[tuple[tuple, int]]:
    """All compositions of k into n nonnegative parts with their coefficients."""
    if k < 0 or n < 1:
        raise ValueError("need k >= 0 and n >= 1")
    return [(comp, _even_multinomial(comp)) for comp in _compositions(k, n)]


def _positive_supports(k: int, n: int) -> Iterator[tuple[tuple, tuple]]:
    """(indices, positive parts) pairs; equivalent to skipping zero parts."""

    def rec(start: int, remaining: int):
        for idx in range(start, n):
            for part in range(1, remaining + 1):
                if part == remaining:
                    yield (idx,), (part,)
                else:
                    for tail_idx, tail_parts in rec(idx + 1, remaining - part):
                        yield (idx,) + tail_idx, (part,) + tail_parts

    if k == 0:
        return
    yield from rec(0, k)


def _combine_tables(tables, k: int, supports=None) -> Scalar:
    """Multinomial combination of per-term even-moment tables at order 2k."""
    total = Fraction(0)
    if supports is None:
        supports = _positive_supports(k, len(tables))
    for indices, parts in supports:
        term = Fraction(_even_multinomial(parts))
        for idx, part in zip(indices, parts):
            term = term * tables[idx][part]
        total = total + term
    return total


def even_moment_from_tables(tables, order: int) -> Scalar:
    """E (sum)^order from per-term moment tables, tables[i][l] = E f_i^(2l).

    The entries need not come from probability-valid variables; the
    expansion only consumes the numbers.  tables[i][0] is ignored (the
    zero-part convention contributes a factor 1) but must be present so
    that index l addresses order 2l.
    """
    if order < 2 or order % 2 != 0:
        raise ValueError(f"order must be even and >= 2, got {order}")
    k = order // 2
    if any(len(t) < k + 1 for t in tables):
        raise ValueError(f"each table must cover orders up to {order}")
    return _combine_tables(tables, k)


def even_moment_of_sum(spec: IndependentSumSpec, order: int) -> Scalar:
    """E (sum of spec)^order for even order >= 2, by the multinomial formula."""
    if order < 2 or order % 2 != 0:
        raise ValueError(f"order must be even and >= 2, got {order}")
    k = order // 2
    tables = [
        [Fraction(1)] + [even_moment_single(t, 2 * l) for l in range(1, k + 1)]
        for t in spec.terms
    ]
    return _combine_tables(tables, k)


def convolve(spec: IndependentSumSpec, cap: int = DEFAULT_ATOM_CAP) -> "DiscreteDistribution":
    """Distribution of the sum by direct convolution, atoms merged on value.

    The product space has 3**n sign patterns; specs whose product space
    exceeds `cap` are rejected up front rather than ground through.
    """
    n = len(spec)
    if 3 ** n > cap:
        raise CapExceededError(f"product space 3^{n} exceeds the atom cap {cap}")
    exact = all(_is_rational(t.scale) for t in spec.terms)
    dist: dict = {Fraction(0) if exact else to_mpf(0): Fraction(1)}
    for t in spec.terms:
        scale = t.scale if exact else to_mpf(t.scale)
        half = t.mass / 2
        stay = 1 - t.mass
        new: dict = {}
        for value, prob in dist.items():
            for delta, weight in ((scale, half), (-scale, half), (0, stay)):
                if weight == 0:
                    continue
                key = value + delta
                new[key] = new.get(key, Fraction(0)) + prob * weight
        dist = new
    atoms = tuple(sorted((v, p) for v, p in dist.items() if p != 0))
    return DiscreteDistribution(atoms)


@dataclass(frozen=True)
class DiscreteDistribution:
    """Finitely supported distribution: atoms are (value, prob), value-sorted."""

    atoms: tuple

    def __post_init__(self):
        atoms = tuple((_as_number(v), _as_number(p)) for v, p in self.atoms)
        if not atoms:
            raise DegenerateInputError("distribution needs at least one atom")
        values = [v for v, _ in atoms]
        if any(values[i] >= values[i + 1] for i in range(len(values) - 1)):
            atoms = tuple(sorted(atoms))
            values = [v for v, _ in atoms]
            if any(values[i] >= values[i + 1] for i in range(len(values) - 1)):
                raise DegenerateInputError("atom values must be distinct")
        if any(p < 0 for _, p in atoms):
            raise DegenerateInputError("probabilities must be nonnegative")
        total = sum((p for _, p in atoms), Fraction(0))
        if all(isinstance(p, (int, Fraction)) for _, p in atoms):
            if total != 1:
                raise DegenerateInputError(f"probabilities sum to {total}, not 1")
        else:
            if abs(to_mpf(total) - 1) > mpmath.mpf(2) ** (-(mp.prec - 16)):
                raise DegenerateInputError("probabilities do not sum to 1")
        object.__setattr__(self, "atoms", atoms)

    def moment(self, order: int) -> Scalar:
        """E X^order, exact for rational atoms."""
        if order < 0:
            raise ValueError("order must be >= 0")
        return sum((p * v ** order for v, p in self.atoms), Fraction(0))

    def to_dict(self, precision_bits: int) -> list[dict]:
        out = []
        for v, p in self.atoms:
            value = frac_to_str(v) if _is_rational(v) else real_to_str(v, precision_bits)
            prob = frac_to_str(p) if _is_rational(p) else real_to_str(p, precision_bits)
            out.append({"value": value, "prob": prob})
        return out

    @staticmethod
    def from_dict(rows: Sequence[dict], precision_bits: int) -> "DiscreteDistribution":
        atoms = []
        for row in rows:
            atoms.append((_parse_number(row["value"], precision_bits),
                          _parse_number(row["prob"], precision_bits)))
        return DiscreteDistribution(tuple(atoms))


def _parse_number(s: str, precision_bits: int):
    s = s.strip()
    if "/" in s:
        return parse_fraction(s)
    try:
        return Fraction(int(s))
    except ValueError:
        return parse_real(s, precision_bits)


def abs_moment(dist: DiscreteDistribution, r) -> Scalar:
    """E |X|^r for r > 0; exact when r is an even integer and atoms rational.

    Fractional r goes through mpf powers at the active working precision.
    """
    if isinstance(r, float):
        r = Fraction(r).limit_denominator(10 ** 12)
    r = _as_number(r) if not isinstance(r, mpmath.mpf) else r
    if not r > 0:
        raise ValueError(f"r must be positive, got {r}")
    if isinstance(r, Fraction) and r.denominator == 1:
        n = r.numerator
        exact = all(_is_rational(v) and _is_rational(p) for v, p in dist.atoms)
        if exact:
            return sum((p * abs(v) ** n for v, p in dist.atoms), Fraction(0))
    total = mpmath.mpf(0)
    rr = to_mpf(r) if not isinstance(r, mpmath.mpf) else r
    for v, p in dist.atoms:
        av = abs(to_mpf(v))
        if av == 0:
            continue
        total += to_mpf(p) * av ** rr
    return total
