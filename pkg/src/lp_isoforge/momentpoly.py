"""Moment polynomials of mass vectors, their gradients, and determinants.

For unit-scale symmetric three-valued variables with masses
mu = (mu_1, ..., mu_k) the 2m-th moment of the sum is a polynomial in the
masses alone:

    H_m(mu) = sum_{alpha=1}^{m} C_{m,alpha} * e_alpha(mu),

where e_alpha is the elementary symmetric polynomial and

    C_{m,alpha} = sum_{n_1+...+n_alpha = m, n_i >= 1} (2m)! / prod (2n_i)!

counts ordered ways to distribute the moment order over a support of size
alpha.  (Each variable contributes the same factor mu_i regardless of its
positive exponent, which is why only the support size matters.)

Adding one extra summand of scale j and mass nu perturbs the moment to

    F_m^(j)(mu, nu) = H_m(mu)
        + nu * sum_{l=1}^{m} binom(2m, 2l) j^(2l) H_{m-l}(mu),   H_0 = 1.

Gradients are exact as well: with P_{beta,alpha} the elementary symmetric
polynomial in the masses excluding mu_beta,

    dH_m/dmu_beta = sum_{alpha=1}^{m} C_{m,alpha} * P_{beta,alpha-1}.

At nu = 0 the Jacobian of (F_1, ..., F_k) in mu factors through the
Vandermonde matrix of the masses: a lower-triangular change of basis with
diagonal C_{m,m} * (-1)^(m-1) multiplies V, so

    det J / det V = (-1)^(k(k-1)/2) * prod_{m=1}^{k} C_{m,m}

identically in mu.  `vandermonde_check` computes both determinants
independently and confirms the ratio, which exercises every coefficient
of the gradient layer at once.

All functions evaluate exactly on Fraction inputs and in the active
mpmath precision on mpf inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import mpmath
from mpmath import mp

from .errors import DegenerateInputError, SingularJacobianError
from .numeric import Scalar, det_exact, det_mpf, to_mpf, workprec

__all__ = [
    "CmAlphaTable",
    "MuVector",
    "JacobianF",
    "VandermondeCheck",
    "cm_alpha_table",
    "elem_sym",
    "elem_sym_excl",
    "eval_H",
    "eval_F",
    "grad_H",
    "jacobian_F",
    "vandermonde_check",
]


def _positive_compositions(m: int, alpha: int) -> Iterator[tuple]:
    """Ordered tuples of alpha positive integers summing to m."""
    if alpha == 1:
        yield (m,)
        return
    for first in range(1, m - alpha + 2):
        for rest in _positive_compositions(m - first, alpha - 1):
            yield (first,) + rest


def _even_multinomial(parts: Sequence[int]) -> int:
    remaining = 2 * sum(parts)
    coeff = 1
    for part in parts:
        coeff *= math.comb(remaining, 2 * part)
        remaining -= 2 * part
    return coeff


@dataclass(frozen=True)
class CmAlphaTable:
    """C_{m,alpha} for 1 <= alpha <= m <= k, plus the order k it was built for."""

    k: int
    entries: dict

    def get(self, m: int, alpha: int) -> int:
        if not (1 <= alpha <= m <= self.k):
            raise KeyError(f"C_{{{m},{alpha}}} outside table of order {self.k}")
        return self.entries[(m, alpha)]

    def diagonal_product(self) -> int:
        """prod_{m=1}^{k} C_{m,m}; the constant in the determinant identity."""
        out = 1
        for m in range(1, self.k + 1):
            out *= self.entries[(m, m)]
        return out


def cm_alpha_table(k: int) -> CmAlphaTable:
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    entries = {}
    for m in range(1, k + 1):
        for alpha in range(1, m + 1):
            entries[(m, alpha)] = sum(
                _even_multinomial(comp) for comp in _positive_compositions(m, alpha)
            )
    return CmAlphaTable(k=k, entries=entries)


@dataclass(frozen=True)
class MuVector:
    """Mass vector mu_1, ..., mu_k, each in (0, 1].

    `strictly_decreasing` records whether mu_1 > mu_2 > ... > mu_k holds;
    most of the solver's theory needs it, but evaluation does not, so it
    is a flag rather than a hard precondition.
    """

    values: tuple
    strictly_decreasing: bool = None  # type: ignore[assignment]

    def __post_init__(self):
        values = tuple(self.values)
        if not values:
            raise DegenerateInputError("mu vector must be nonempty")
        for v in values:
            if not 0 < v <= 1:
                raise DegenerateInputError(f"masses must lie in (0, 1], got {v}")
        dec = all(values[i] > values[i + 1] for i in range(len(values) - 1))
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "strictly_decreasing", dec)

    @property
    def k(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __len__(self) -> int:
        return len(self.values)


def _values(mu) -> tuple:
    return tuple(mu.values) if isinstance(mu, MuVector) else tuple(mu)


def elem_sym(mu, alpha: int) -> Scalar:
    """Elementary symmetric polynomial e_alpha(mu); e_0 = 1, e_alpha = 0 for alpha > k."""
    values = _values(mu)
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    return _elem_sym_all(values)[alpha] if alpha <= len(values) else Fraction(0)


def _elem_sym_all(values: tuple) -> list:
    """[e_0, e_1, ..., e_k] by the product recurrence, one pass, exact."""
    e = [Fraction(1)] + [Fraction(0)] * len(values)
    top = 0
    for v in values:
        top += 1
        for a in range(top, 0, -1):
            e[a] = e[a] + v * e[a - 1]
    return e


def elem_sym_excl(mu, beta: int, alpha: int) -> Scalar:
    """e_alpha of the masses with the beta-th left out (beta is 1-based).

    Uses the alternating reduction
        P_{beta,alpha} = sum_{t=0}^{alpha} (-mu_beta)^t e_{alpha-t}(mu),
    which needs only the full-vector elementary symmetric values.
    """
    values = _values(mu)
    k = len(values)
    if not 1 <= beta <= k:
        raise ValueError(f"beta must be in 1..{k}, got {beta}")
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    if alpha > k - 1:
        return Fraction(0)
    e = _elem_sym_all(values)
    mu_beta = values[beta - 1]
    acc = e[alpha]
    sign_term = Fraction(1)
    for t in range(1, alpha + 1):
        sign_term = sign_term * (-mu_beta)
        acc = acc + sign_term * e[alpha - t]
    return acc


def _excl_row(values: tuple, beta: int, e: list, upto: int) -> list:
    """[P_{beta,0}, ..., P_{beta,upto}] sharing one e-table."""
    mu_beta = values[beta - 1]
    row = [Fraction(1)]
    for alpha in range(1, upto + 1):
        if alpha > len(values) - 1:
            row.append(Fraction(0))
            continue
        # recurrence P_{beta,alpha} = e_alpha - mu_beta * P_{beta,alpha-1}
        row.append(e[alpha] - mu_beta * row[alpha - 1])
    return row


def eval_H(m: int, mu, table: CmAlphaTable) -> Scalar:
    """H_m(mu), the 2m-th moment polynomial of the mass vector."""
    if not 1 <= m <= table.k:
        raise ValueError(f"m must be in 1..{table.k}, got {m}")
    values = _values(mu)
    e = _elem_sym_all(values)
    acc = Fraction(0)
    for alpha in range(1, m + 1):
        if alpha > len(values):
            break
        acc = acc + table.get(m, alpha) * e[alpha]
    return acc


def eval_F(m: int, j: int, mu, nu, table: CmAlphaTable) -> Scalar:
    """F_m^(j)(mu, nu) = H_m + nu * sum_l binom(2m,2l) j^(2l) H_{m-l}."""
    if not isinstance(j, int) or j < 1:
        raise ValueError(f"j must be a positive integer, got {j}")
    if not 0 <= nu <= 1:
        raise ValueError(f"nu must lie in [0, 1], got {nu}")
    if not 1 <= m <= table.k:
        raise ValueError(f"m must be in 1..{table.k}, got {m}")
    h = eval_H(m, mu, table)
    jsq = j * j
    acc = h
    jpow = 1
    h_lower = [None] + [eval_H(i, mu, table) for i in range(1, m)]
    for l in range(1, m + 1):
        jpow *= jsq
        lower = h_lower[m - l] if m - l >= 1 else Fraction(1)
        acc = acc + nu * math.comb(2 * m, 2 * l) * jpow * lower
    return acc


def grad_H(m: int, beta: int, mu, table: CmAlphaTable) -> Scalar:
    """dH_m/dmu_beta (beta 1-based)."""
    if not 1 <= m <= table.k:
        raise ValueError(f"m must be in 1..{table.k}, got {m}")
    values = _values(mu)
    if not 1 <= beta <= len(values):
        raise ValueError(f"beta must be in 1..{len(values)}, got {beta}")
    e = _elem_sym_all(values)
    row = _excl_row(values, beta, e, m - 1)
    acc = Fraction(0)
    for alpha in range(1, m + 1):
        acc = acc + table.get(m, alpha) * row[alpha - 1]
    return acc


@dataclass(frozen=True)
class JacobianF:
    """Jacobian of (F_1, ..., F_k) at (mu, nu) for a fixed extra scale j.

    `matrix[m-1][beta-1]` is dF_m/dmu_beta and `nu_column[m-1]` is
    dF_m/dnu.  Entries share the scalar type of the inputs.
    """

    j: int
    nu: Scalar
    matrix: tuple
    nu_column: tuple

    @property
    def k(self) -> int:
        return len(self.matrix)


def jacobian_F(j: int, mu, nu, table: CmAlphaTable) -> JacobianF:
    if not isinstance(j, int) or j < 1:
        raise ValueError(f"j must be a positive integer, got {j}")
    k = table.k
    values = _values(mu)
    if len(values) != k:
        raise ValueError(f"mu must have length {k}, got {len(values)}")
    e = _elem_sym_all(values)
    excl = [_excl_row(values, beta, e, k - 1) for beta in range(1, k + 1)]
    # gradH[m][beta-1], m = 0 row unused
    gradH = [[Fraction(0)] * k]
    for m in range(1, k + 1):
        row = []
        for b in range(k):
            acc = Fraction(0)
            for alpha in range(1, m + 1):
                acc = acc + table.get(m, alpha) * excl[b][alpha - 1]
            row.append(acc)
        gradH.append(row)
    hvals = [Fraction(1)] + [
        sum(
            (table.get(m, alpha) * e[alpha] for alpha in range(1, m + 1)),
            Fraction(0),
        )
        for m in range(1, k + 1)
    ]
    jsq = j * j
    matrix = []
    nu_column = []
    for m in range(1, k + 1):
        row = list(gradH[m])
        dnu = Fraction(0)
        jpow = 1
        for l in range(1, m + 1):
            jpow *= jsq
            c = math.comb(2 * m, 2 * l)
            dnu = dnu + c * jpow * hvals[m - l]
            if m - l >= 1:
                for b in range(k):
                    row[b] = row[b] + nu * c * jpow * gradH[m - l][b]
        matrix.append(tuple(row))
        nu_column.append(dnu)
    return JacobianF(j=j, nu=nu, matrix=tuple(matrix), nu_column=tuple(nu_column))


@dataclass(frozen=True)
class VandermondeCheck:
    det_jacobian: Scalar
    det_vandermonde: Scalar
    ratio: Scalar
    expected_magnitude: int
    precision_bits: int | None  # None when the computation was exact


def vandermonde_check(mu, table: CmAlphaTable) -> VandermondeCheck:
    """det J(mu, nu=0) against the Vandermonde determinant of the masses.

    Requires strictly decreasing masses (the Vandermonde factor pairs are
    then nonzero).  Exact on rational input; on mpf input the determinant
    is guarded against cancellation and the precision is doubled up to
    twice before giving up.
    """
    values = _values(mu)
    k = len(values)
    if len(set(values)) != k or any(
        values[i] <= values[i + 1] for i in range(k - 1)
    ):
        raise DegenerateInputError("mu must be strictly decreasing for this check")
    if table.k != k:
        raise ValueError("table order must match len(mu)")
    jac = jacobian_F(1, values, Fraction(0), table)
    exact = all(isinstance(v, (int, Fraction)) for v in values)
    expected = table.diagonal_product()
    if exact:
        det_j = det_exact(jac.matrix)
        det_v = Fraction(1)
        for i in range(k):
            for jj in range(i + 1, k):
                det_v *= values[jj] - values[i]
        if det_j == 0:
            raise SingularJacobianError("exact Jacobian determinant is zero")
        return VandermondeCheck(det_j, det_v, det_j / det_v, expected, None)
    prec = mp.prec
    for attempt in range(3):
        bits = prec * (2 ** attempt)
        with workprec(bits):
            vals = [to_mpf(v) for v in values]
            jac_b = jacobian_F(1, vals, mpmath.mpf(0), table)
            max_entry = max(abs(v) for row in jac_b.matrix for v in row)
            try:
                det_j = det_mpf(jac_b.matrix)
            except SingularJacobianError:
                continue
            if abs(det_j) <= mpmath.mpf(2) ** (-(bits // 2)) * max_entry:
                continue
            det_v = mpmath.mpf(1)
            for i in range(k):
                for jj in range(i + 1, k):
                    det_v *= vals[jj] - vals[i]
            return VandermondeCheck(det_j, det_v, det_j / det_v, expected, bits)
    raise SingularJacobianError(
        f"Jacobian determinant below guard band even after escalating to {prec * 4} bits"
    )
