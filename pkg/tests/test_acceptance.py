"""Acceptance gate: eleven end-to-end properties, each with a runtime budget.

One test per criterion, so `pytest -v` prints one pass/fail line for each.
Every check uses an oracle independent of the code path under test:
convolution for the moment engine, exact rational finite differences for
derivatives, the quadratic closed form for the Newton solver, a dense
grid search for the projection norm, and subprocess reruns for
determinism.
"""

import random
import subprocess
import sys
import time
from fractions import Fraction

import mpmath
from mpmath import workprec

from lp_isoforge.analysis import (
    FiniteSpan,
    build_projection,
    isometry_check,
    projection_norm_grid_search,
    projection_norm_lower_bound,
    uncomplemented_certificate,
    vpl_check,
)
from lp_isoforge.errors import LpIsoforgeError
from lp_isoforge.momentpoly import (
    cm_alpha_table,
    eval_F,
    eval_H,
    grad_H,
    jacobian_F,
    vandermonde_check,
)
from lp_isoforge.moments import (
    IndependentSumSpec,
    SymmetricAtomVariable,
    convolve,
    even_moment_of_sum,
)
from lp_isoforge.numeric import mpf_to_fraction, to_mpf
from lp_isoforge.p4 import build_p4_table, log_sq, render_p4_report
from lp_isoforge.solver import (
    ball_params,
    closed_form_k2,
    default_base_point,
    solve_mu,
    target_h,
)


def test_criterion_01_even_moment_engine_matches_convolution():
    t0 = time.monotonic()
    rng = random.Random(101)
    for _ in range(200):
        n = rng.randint(1, 4)
        k = rng.randint(1, 4)
        terms = []
        for _ in range(n):
            scale = Fraction(rng.randint(1, 9), rng.randint(1, 9))
            den = rng.randint(1, 12)
            terms.append(SymmetricAtomVariable(scale, Fraction(rng.randint(1, den), den)))
        spec = IndependentSumSpec(terms)
        dist = convolve(spec)
        for order in range(2, 2 * k + 1, 2):
            assert even_moment_of_sum(spec, order) == dist.moment(order)
    assert time.monotonic() - t0 < 10


def test_criterion_02_mass_polynomials_match_direct_moments():
    t0 = time.monotonic()
    rng = random.Random(202)
    for _ in range(100):
        k = rng.randint(1, 4)
        table = cm_alpha_table(k)
        mu = tuple(Fraction(rng.randint(1, 24), 24) for _ in range(k))
        nu = Fraction(rng.randint(1, 24), 24)
        j = rng.randint(1, 5)
        base = [SymmetricAtomVariable(1, m) for m in mu]
        h_spec = IndependentSumSpec(base)
        f_spec = IndependentSumSpec(base + [SymmetricAtomVariable(j, nu)])
        for m in range(1, k + 1):
            assert eval_H(m, mu, table) == even_moment_of_sum(h_spec, 2 * m)
            assert eval_F(m, j, mu, nu, table) == even_moment_of_sum(f_spec, 2 * m)
    assert time.monotonic() - t0 < 10


def test_criterion_03_derivatives_and_vandermonde_ratio():
    t0 = time.monotonic()
    rng = random.Random(303)
    step = Fraction(1, 2 ** 64)
    tol = mpmath.mpf("1e-20")
    with workprec(256):
        for _ in range(50):
            k = rng.randint(2, 4)
            table = cm_alpha_table(k)
            mu = tuple(Fraction(rng.randint(2, 40), 64) for _ in range(k))
            nu = Fraction(rng.randint(1, 32), 64)
            j = rng.randint(1, 5)
            m = rng.randint(1, k)
            beta = rng.randint(1, k)
            # the difference quotient is exact (polynomials at rational
            # points); only the final comparison is rounded
            up = list(mu)
            dn = list(mu)
            up[beta - 1] += step
            dn[beta - 1] -= step
            fd_h = (eval_H(m, up, table) - eval_H(m, dn, table)) / (2 * step)
            assert abs(to_mpf(grad_H(m, beta, mu, table) - fd_h)) < tol
            jac = jacobian_F(j, mu, nu, table)
            fd_f = (eval_F(m, j, up, nu, table) - eval_F(m, j, dn, nu, table)) / (2 * step)
            assert abs(to_mpf(jac.matrix[m - 1][beta - 1] - fd_f)) < tol
            fd_nu = (
                eval_F(m, j, mu, nu + step, table) - eval_F(m, j, mu, nu - step, table)
            ) / (2 * step)
            assert abs(to_mpf(jac.nu_column[m - 1] - fd_nu)) < tol
    for k in (2, 3, 4):
        table = cm_alpha_table(k)
        expected = table.diagonal_product()
        for _ in range(10):
            vals = set()
            while len(vals) < k:
                vals.add(Fraction(rng.randint(1, 999), 1000))
            chk = vandermonde_check(tuple(sorted(vals, reverse=True)), table)
            assert chk.precision_bits is None  # exact path, deviation is zero
            assert abs(chk.ratio) == expected
    assert time.monotonic() - t0 < 30


def test_criterion_04_p6_certificate_residuals_bracket_ordering(cert_p6_timed):
    cert, build_seconds = cert_p6_timed
    assert cert.complete and cert.p == 6 and len(cert.entries) == 20
    delta = cert.ball.delta
    tol = Fraction(1, 2 ** 128)
    for e in cert.entries:
        assert all(abs(r) < tol for r in e.residuals)
        assert delta / 2 / Fraction(e.j) ** 4 < e.nu < delta / Fraction(e.j) ** 4
        mu = [mpf_to_fraction(v) for v in e.mu]
        assert mu[0] > mu[1] > mu[2] > delta
    assert build_seconds < 60


def test_criterion_05_newton_matches_quadratic_closed_form():
    t0 = time.monotonic()
    rng = random.Random(505)
    table = cm_alpha_table(2)
    mu_bar = default_base_point(2)
    ball = ball_params(mu_bar, 2, 4)
    target = target_h(mu_bar, table)
    tol = mpmath.mpf(2) ** -120
    solved = failed = 0
    with workprec(256):
        for _ in range(100):
            j = rng.randint(1, 20)
            nu = Fraction(rng.randint(501, 999), 1000) * ball.delta / j ** 2
            try:
                closed = closed_form_k2(j, nu, target, 256)
            except LpIsoforgeError:
                closed = None
            try:
                res = solve_mu(j, nu, target, mu_bar, table, 256)
            except LpIsoforgeError:
                res = None
            # the two independent paths must agree on failure as well
            if closed is None or res is None:
                assert closed is None and res is None
                failed += 1
                continue
            solved += 1
            for a, b in zip(res.mu.values, closed.values):
                assert abs(to_mpf(a) - to_mpf(b)) < tol
    assert solved > 0 and failed > 0 and solved + failed == 100
    assert time.monotonic() - t0 < 30


def test_criterion_06_isometry_spot_check(cert_p6):
    t0 = time.monotonic()
    res = isometry_check(cert_p6, trials=100, seed=0)
    assert res.trials == 100
    assert res.max_rel_residual <= res.bound
    assert res.bound < Fraction(1, 2 ** 100)
    assert time.monotonic() - t0 < 60


def test_criterion_07_p4_table_exact_and_printed_residual():
    t0 = time.monotonic()
    rows = build_p4_table(100, precision=256)
    assert len(rows) == 99
    for row in rows:
        assert row.residual_2 == 0 and row.residual_4 == 0
        L = log_sq(row.n, 256)
        assert row.residual_4_printed == Fraction(-4) / (row.n * row.n * L)
        assert row.residual_4_printed != 0
    report = render_p4_report(rows)
    assert "-4/(n^2 log^2 n)" in report
    assert "binom(4,2) = 6" in report and "coefficient of 2" in report
    assert time.monotonic() - t0 < 10


def test_criterion_08_projection_identities_and_norm_oracle():
    t0 = time.monotonic()
    masses = default_base_point(3).values
    span3 = FiniteSpan.build(6, [[SymmetricAtomVariable(1, m)] for m in masses])
    P3 = build_projection(span3)
    assert P3.atom_count == 27
    rng = random.Random(808)
    for _ in range(100):
        f = tuple(
            Fraction(rng.randint(-60, 60), rng.randint(1, 60)) for _ in range(27)
        )
        Pf = P3.apply(f)
        assert P3.apply(Pf) == Pf
        assert P3.abs_power_moment(Pf, 2) <= P3.abs_power_moment(f, 2)
    for b in P3.basis:
        assert P3.apply(b) == tuple(b)
    assert P3.apply((Fraction(1),) * 27) == (Fraction(0),) * 27

    span2 = FiniteSpan.build(4, [[SymmetricAtomVariable(1, m)] for m in masses[:2]])
    P2 = build_projection(span2)
    est = projection_norm_lower_bound(P2, 4, starts=8, iters=60, seed=0)
    grid = projection_norm_grid_search(P2, 4)
    assert est >= 1
    assert abs(float(est) - grid) / grid < 0.01
    assert time.monotonic() - t0 < 30


def test_criterion_09_norm_product_bound():
    t0 = time.monotonic()
    for k in range(2, 7):
        chk = vpl_check(k, default_base_point(k), 2 * k)
        assert chk.holds and chk.lhs < chk.rhs
    chk2 = vpl_check(2, (Fraction(2, 3), Fraction(1, 3)), 4)
    with workprec(256):
        lhs_indep = to_mpf(Fraction(7, 3)) ** Fraction(1, 4) * (
            (to_mpf(2) ** to_mpf(Fraction(7, 3)) + 10) / 18
        ) ** Fraction(3, 4)
        rhs_indep = to_mpf(8) ** Fraction(1, 4)
        assert abs(chk2.lhs - lhs_indep) < 1e-6
        assert abs(chk2.rhs - rhs_indep) < 1e-6
    assert chk2.holds and chk2.lhs < chk2.rhs
    assert time.monotonic() - t0 < 10


def test_criterion_10_weight_sequence_hypotheses(cert_p6, cert_p4):
    t0 = time.monotonic()
    uc6 = uncomplemented_certificate(cert_p6, comparator_N=10 ** 6)
    assert uc6.valid and uc6.convergence_certified
    assert uc6.sum_nu_total_bound == uc6.sum_nu_partial + uc6.sum_nu_tail_bound
    assert uc6.divergence_certified
    assert uc6.comparator_partial_N == 10 ** 6
    assert uc6.comparator_partial_sum > uc6.comparator_reference > 13  # ln 1e6
    with workprec(256):
        # reported constant is sqrt(1/delta)
        assert abs(uc6.comparator_constant ** 2 * to_mpf(cert_p6.ball.delta) - 1) < mpmath.mpf(2) ** -100

    uc4 = uncomplemented_certificate(cert_p4)
    assert uc4.valid and uc4.convergence_certified
    assert not uc4.divergence_certified
    assert "divergence not certified by this comparator" in uc4.divergence_note
    assert time.monotonic() - t0 < 10


def test_criterion_11_construct_is_byte_deterministic(tmp_path):
    certs = []
    stdouts = []
    for name in ("first", "second"):
        workdir = tmp_path / name
        workdir.mkdir()
        proc = subprocess.run(
            [
                sys.executable, "-m", "lp_isoforge.cli",
                "construct", "--p", "6", "--j-max", "10", "--seed", "7",
            ],
            cwd=workdir,
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0, proc.stderr
        certs.append((workdir / "certificate.json").read_bytes())
        stdouts.append(proc.stdout)
    assert certs[0] == certs[1]
    assert stdouts[0] == stdouts[1]
