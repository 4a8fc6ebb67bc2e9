"""Polynomial layer: C-table, symmetric functions, H/F, derivatives, rank."""

import math
import random
from fractions import Fraction
from itertools import combinations

import mpmath
import pytest
from mpmath import workprec

from lp_isoforge.errors import DegenerateInputError
from lp_isoforge.moments import (
    IndependentSumSpec,
    SymmetricAtomVariable,
    even_moment_of_sum,
)
from lp_isoforge.momentpoly import (
    MuVector,
    cm_alpha_table,
    elem_sym,
    elem_sym_excl,
    eval_F,
    eval_H,
    grad_H,
    jacobian_F,
    vandermonde_check,
)
from lp_isoforge.numeric import to_mpf


def rand_mu(rng, k, max_den=40):
    return tuple(
        Fraction(rng.randint(1, max_den), max_den + rng.randint(0, max_den))
        for _ in range(k)
    )


def h_spec(mu):
    return IndependentSumSpec([SymmetricAtomVariable(1, m) for m in mu])


def f_spec(mu, j, nu):
    terms = [SymmetricAtomVariable(1, m) for m in mu]
    terms.append(SymmetricAtomVariable(j, nu))
    return IndependentSumSpec(terms)


def test_cm_table_frozen():
    t2 = cm_alpha_table(2)
    assert t2.get(1, 1) == 1
    assert t2.get(2, 1) == 1
    assert t2.get(2, 2) == 6
    t3 = cm_alpha_table(3)
    # 6!/(2!2!2!) = 90
    assert t3.get(3, 3) == 90
    for k in range(1, 7):
        assert cm_alpha_table(k).get(1, 1) == 1
    with pytest.raises(KeyError):
        t2.get(2, 3)
    with pytest.raises(KeyError):
        t2.get(3, 1)


def test_diagonal_product():
    assert cm_alpha_table(2).diagonal_product() == 6
    assert cm_alpha_table(3).diagonal_product() == 540


def test_mu_vector_validation():
    v = MuVector((Fraction(2, 3), Fraction(1, 3)))
    assert v.strictly_decreasing
    assert not MuVector((Fraction(1, 3), Fraction(1, 3))).strictly_decreasing
    with pytest.raises(DegenerateInputError):
        MuVector(())
    with pytest.raises(DegenerateInputError):
        MuVector((Fraction(0),))
    with pytest.raises(DegenerateInputError):
        MuVector((Fraction(3, 2),))


def test_elem_sym_frozen():
    mu = (Fraction(2, 3), Fraction(1, 3))
    assert elem_sym(mu, 1) == 1
    assert elem_sym(mu, 2) == Fraction(2, 9)
    assert elem_sym(mu, 0) == 1
    assert elem_sym(mu, 3) == 0  # too few variables, not an error
    with pytest.raises(ValueError):
        elem_sym(mu, -1)


def test_elem_sym_excl_frozen():
    mu = (Fraction(2, 3), Fraction(1, 3))
    assert elem_sym_excl(mu, 1, 1) == Fraction(1, 3)
    assert elem_sym_excl(mu, 2, 0) == 1
    mu3 = (Fraction(1, 2), Fraction(1, 3), Fraction(1, 4))
    assert elem_sym_excl(mu3, 2, 2) == Fraction(1, 8)


def test_elem_sym_excl_matches_direct_subsets():
    rng = random.Random(11)
    for k in (2, 3, 4, 5):
        mu = rand_mu(rng, k)
        for beta in range(1, k + 1):
            rest = [mu[i] for i in range(k) if i != beta - 1]
            for alpha in range(0, k):
                direct = sum(
                    (math.prod(sub, start=Fraction(1))
                     for sub in combinations(rest, alpha)),
                    Fraction(0),
                )
                assert elem_sym_excl(mu, beta, alpha) == direct


def test_eval_h_frozen():
    t = cm_alpha_table(2)
    mu = (Fraction(2, 3), Fraction(1, 3))
    assert eval_H(1, mu, t) == 1
    assert eval_H(2, mu, t) == Fraction(7, 3)
    assert eval_H(2, (Fraction(1, 2), Fraction(1, 3)), t) == Fraction(11, 6)
    with pytest.raises(ValueError):
        eval_H(3, mu, t)


def test_eval_h_matches_moments():
    rng = random.Random(7)
    for k in range(2, 6):
        t = cm_alpha_table(k)
        for _ in range(5):
            mu = rand_mu(rng, k)
            for m in range(1, k + 1):
                assert eval_H(m, mu, t) == even_moment_of_sum(h_spec(mu), 2 * m)


def test_eval_f_frozen():
    t2 = cm_alpha_table(2)
    mu = (Fraction(2, 3), Fraction(1, 3))
    for m in (1, 2):
        assert eval_F(m, 3, mu, Fraction(0), t2) == eval_H(m, mu, t2)
    t1 = cm_alpha_table(1)
    assert eval_F(1, 2, (Fraction(2, 5),), Fraction(1, 7), t1) == Fraction(2, 5) + 4 * Fraction(1, 7)
    # brute-force E(h + g')^4 with g' mass 1/10 at scale 1
    assert eval_F(2, 1, mu, Fraction(1, 10), t2) == Fraction(91, 30)
    with pytest.raises(ValueError):
        eval_F(2, 1, mu, Fraction(11, 10), t2)
    with pytest.raises(ValueError):
        eval_F(2, 1, mu, Fraction(-1, 10), t2)
    with pytest.raises(ValueError):
        eval_F(2, 0, mu, Fraction(1, 10), t2)


def test_eval_f_matches_moments():
    rng = random.Random(13)
    for k in (2, 3, 4):
        t = cm_alpha_table(k)
        for _ in range(4):
            mu = rand_mu(rng, k)
            j = rng.randint(1, 5)
            nu = Fraction(rng.randint(1, 30), 1000)
            s = f_spec(mu, j, nu)
            for m in range(1, k + 1):
                assert eval_F(m, j, mu, nu, t) == even_moment_of_sum(s, 2 * m)


def test_grad_h_frozen():
    t = cm_alpha_table(2)
    mu = (Fraction(2, 3), Fraction(1, 3))
    assert grad_H(1, 1, mu, t) == 1
    assert grad_H(1, 2, mu, t) == 1
    # d/d mu_1 of (mu_1 + mu_2 + 6 mu_1 mu_2)
    assert grad_H(2, 1, mu, t) == 3


def finite_diff(fn, x, h):
    return (fn(x + h) - fn(x - h)) / (2 * h)


def test_grad_h_finite_differences():
    rng = random.Random(17)
    with workprec(256):
        h = mpmath.mpf(2) ** -64
        for k in (2, 3, 4):
            t = cm_alpha_table(k)
            for _ in range(3):
                mu = [to_mpf(v) for v in rand_mu(rng, k)]
                for beta in range(1, k + 1):
                    m = rng.randint(1, k)

                    def h_of(x, _beta=beta, _m=m):
                        pt = list(mu)
                        pt[_beta - 1] = x
                        return eval_H(_m, pt, t)

                    want = finite_diff(h_of, mu[beta - 1], h)
                    # m = 1 rows are the exact constant 1; normalize types
                    got = to_mpf(grad_H(m, beta, mu, t))
                    assert abs(got - want) < mpmath.mpf(10) ** -20


def test_jacobian_frozen():
    t = cm_alpha_table(2)
    mu = (Fraction(2, 3), Fraction(1, 3))
    jac = jacobian_F(1, mu, Fraction(0), t)
    assert jac.matrix == ((Fraction(1), Fraction(1)), (Fraction(3), Fraction(5)))
    # nu = 0 reduces every row to grad_H
    for m in (1, 2):
        for b in (1, 2):
            assert jac.matrix[m - 1][b - 1] == grad_H(m, b, mu, t)


def test_jacobian_nu_column_finite_differences():
    rng = random.Random(19)
    with workprec(256):
        h = mpmath.mpf(2) ** -64
        for k in (2, 3):
            t = cm_alpha_table(k)
            mu = [to_mpf(v) for v in rand_mu(rng, k)]
            j = rng.randint(1, 4)
            nu0 = to_mpf(Fraction(1, 50))
            jac = jacobian_F(j, mu, nu0, t)
            for m in range(1, k + 1):
                def f_of(x, _m=m):
                    return eval_F(_m, j, mu, x, t)

                want = finite_diff(f_of, nu0, h)
                assert abs(to_mpf(jac.nu_column[m - 1]) - want) < mpmath.mpf(10) ** -20


def test_vandermonde_frozen():
    t = cm_alpha_table(2)
    chk = vandermonde_check((Fraction(2, 3), Fraction(1, 3)), t)
    assert chk.det_jacobian == 2
    assert chk.det_vandermonde == Fraction(-1, 3)
    assert chk.ratio == -6
    assert chk.expected_magnitude == 6
    assert chk.precision_bits is None
    with pytest.raises(DegenerateInputError):
        vandermonde_check((Fraction(1, 2), Fraction(1, 2)), t)


def test_vandermonde_constant_magnitude():
    rng = random.Random(23)
    for k in (2, 3, 4):
        t = cm_alpha_table(k)
        expect = t.diagonal_product()
        for _ in range(10):
            vals = set()
            while len(vals) < k:
                vals.add(Fraction(rng.randint(1, 999), 1000))
            mu = tuple(sorted(vals, reverse=True))
            chk = vandermonde_check(mu, t)
            assert abs(chk.ratio) == expect
