"""Verification layer: isometry spot checks, projections, series certificates.

Everything here consumes a ConstructionCertificate or a finite span of
generators and produces evidence:

* `isometry_check` compares even moments of random rational combinations
  of the reference generators h_j (masses mu_bar) against the perturbed
  generators f~_j (masses mu^(j) plus one atom of scale j, mass nu_j).
  Both sides are exact rationals, so the reported maximum relative
  residual is exact, and it is accompanied by a propagation bound:
  every term of the even-moment expansion is positive, so the relative
  error of the sum is at most the worst relative error of a factor,
  giving  max_rel <= (1 + eps_hat/H_min)^k - 1  with eps_hat the largest
  certificate residual and H_min the smallest moment target.

* `build_projection` realizes the orthogonal L_2 projection onto the
  span of the generators on the finite product space of their atom
  distributions.  In exact arithmetic it is exactly idempotent, fixes
  the generators, kills constants (generators have mean zero), and is a
  contraction in the 2-norm.  `projection_norm_lower_bound` turns it
  into an empirical L_p bound by normalized fixed-point ascent
  f <- psi_q(Pf), psi_q(x) = sign(x)|x|^(q-1), q = p/(p-1): at a
  maximizer of ||Pf||_p/||f||_p the optimality condition places the
  p-dual of f inside the range of P, so maximizers live in the family
  psi_q(span) that the iteration explores.  A dense angular grid search
  over that family is provided as an oracle for two-generator spans.

* `vpl_check` tests ||h||_p * ||h||_q <= C_k^(1/p) * ||h||_2^2 for the
  base generator, with C_k = sum_alpha binom(k,alpha) C_{k,alpha} (equal
  to H_k at all-ones masses).

* `uncomplemented_certificate` checks the mass-sequence hypotheses:
  nu_j inside (delta/2, delta) * j^(2-p), the derived weights
  w_j = nu_j^(-1/p) / j inside ((1/delta)^(1/p), (2/delta)^(1/p)) *
  j^(-2/p) (checked exactly on p-th powers), convergence of sum nu_j via
  an explicit integral tail bound, and divergence of sum w_j^(2p/(p-2))
  by comparison with (1/delta)^(2/(p-2)) * sum j^(-4/(p-2)), a series
  that diverges iff 4/(p-2) <= 1, i.e. p >= 6.  For p = 4 the
  comparator converges and the certificate says so instead of guessing.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import comb, lcm, log

import mpmath

from .errors import CapExceededError, DegenerateInputError
from .moments import (
    IndependentSumSpec,
    SymmetricAtomVariable,
    _combine_tables,
    _positive_supports,
    abs_moment,
    convolve,
    even_moment_of_sum,
)
from .momentpoly import CmAlphaTable, MuVector, cm_alpha_table, eval_H
from .numeric import (
    DEFAULT_PRECISION_BITS,
    Scalar,
    mpf_to_fraction,
    to_mpf,
    validate_precision,
    workprec,
)
from .solver import ConstructionCertificate, target_h

DEFAULT_SPACE_CAP = 3 ** 9

__all__ = [
    "FiniteSpan",
    "IsometryCheckResult",
    "ProjectionOperator",
    "UncomplementedCertificate",
    "UncomplementedRow",
    "VplCheck",
    "DEFAULT_SPACE_CAP",
    "reference_span",
    "certificate_span",
    "span_norm",
    "isometry_check",
    "c_k_constant",
    "vpl_check",
    "build_projection",
    "projection_norm_lower_bound",
    "projection_norm_grid_search",
    "uncomplemented_certificate",
    "render_uncomplemented_report",
]


# ---------------------------------------------------------------------------
# finite spans and isometry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FiniteSpan:
    """Independent generators with their even-moment tables, orders 2..p.

    tables[i][l] = E g_i^(2l) for l = 0..p/2 (exact when the generator
    data is rational), computed through the moments engine.
    """

    p: int
    generators: tuple
    tables: tuple

    @classmethod
    def build(cls, p: int, generators) -> "FiniteSpan":
        if p < 2 or p % 2 != 0:
            raise ValueError(f"p must be even and >= 2, got {p}")
        generators = tuple(
            g if isinstance(g, IndependentSumSpec) else IndependentSumSpec(g)
            for g in generators
        )
        if not generators:
            raise DegenerateInputError("span needs at least one generator")
        k = p // 2
        tables = tuple(
            tuple(
                [Fraction(1)]
                + [even_moment_of_sum(g, 2 * l) for l in range(1, k + 1)]
            )
            for g in generators
        )
        return cls(p=p, generators=generators, tables=tables)

    @property
    def n(self) -> int:
        return len(self.generators)

    @property
    def k(self) -> int:
        return self.p // 2


def reference_span(cert: ConstructionCertificate) -> FiniteSpan:
    """The h_j side: one k-atom generator per certificate entry, masses mu_bar."""
    mu_bar = cert.ball.mu_bar
    gen = IndependentSumSpec(
        [SymmetricAtomVariable(1, m) for m in mu_bar.values]
    )
    return FiniteSpan.build(cert.p, [gen] * len(cert.entries))


def certificate_span(cert: ConstructionCertificate) -> FiniteSpan:
    """The f~_j side: masses mu^(j) plus one atom of scale j and mass nu_j.

    The stored mu are dyadic, so the moment tables are exact rationals;
    nothing is trusted from the solve itself.
    """
    gens = []
    for e in cert.entries:
        mu_frac = [mpf_to_fraction(v) for v in e.mu]
        terms = [SymmetricAtomVariable(1, m) for m in mu_frac]
        if e.nu != 0:
            # nu = 0 would be an a.s.-zero summand; skip it rather than
            # build a degenerate variable
            terms.append(SymmetricAtomVariable(e.j, e.nu))
        gens.append(IndependentSumSpec(terms))
    return FiniteSpan.build(cert.p, gens)


def span_norm(span: FiniteSpan, c, order: int) -> Scalar:
    """||sum c_i g_i||_order^order for even order = 2m, m <= p/2.

    Scaling c_i multiplies the 2l-th moment of g_i by c_i^(2l); the
    combination is then the same multinomial expansion the moments
    module uses.  Exact for rational c.
    """
    c = tuple(c)
    if len(c) != span.n:
        raise ValueError(f"coefficient vector has length {len(c)}, span has {span.n}")
    if order < 2 or order % 2 != 0 or order > span.p:
        raise ValueError(f"order must be even in 2..{span.p}, got {order}")
    m = order // 2
    scaled = []
    for ci, table in zip(c, span.tables):
        csq = ci * ci
        row = [Fraction(1)]
        power = Fraction(1) if isinstance(csq, (int, Fraction)) else to_mpf(1)
        for l in range(1, m + 1):
            power = power * csq
            row.append(power * table[l])
        scaled.append(row)
    return _combine_tables(scaled, m)


@dataclass(frozen=True)
class IsometryCheckResult:
    max_rel_residual: Fraction
    bound: Fraction
    trials: int
    seed: int
    orders_checked: tuple


def isometry_check(cert: ConstructionCertificate, trials: int = 100, seed: int = 0) -> IsometryCheckResult:
    """Exact relative moment residuals of random combinations, both spans.

    Coefficients are rational with entries in [-1, 1] and denominators
    <= 1000; each is scaled by the common denominator before evaluation
    (the relative residual is homogeneous, so this costs nothing and
    keeps the integer arithmetic shallow).  The returned bound is the
    positivity propagation constant (1 + eps_hat/H_min)^k - 1; the
    residual can never exceed it while the certificate is honest.
    """
    if not cert.entries:
        raise DegenerateInputError("certificate has no solved entries")
    k = cert.k
    n = len(cert.entries)
    ref = reference_span(cert)
    per = certificate_span(cert)

    targets = tuple(cert.target.values)
    eps_hat = Fraction(0)
    for tab in per.tables:
        for l in range(1, k + 1):
            r = abs(tab[l] - targets[l - 1])
            if r > eps_hat:
                eps_hat = r
    h_min = min(targets)
    bound = (1 + eps_hat / h_min) ** k - 1

    supports = {m: list(_positive_supports(m, n)) for m in range(1, k + 1)}
    rng = random.Random(seed)
    worst = Fraction(0)
    for _ in range(trials):
        while True:
            c = []
            for _ in range(n):
                den = rng.randint(1, 1000)
                c.append(Fraction(rng.randint(-den, den), den))
            if any(c):
                break
        scale = lcm(*(q.denominator for q in c))
        c_int = [int(q * scale) for q in c]
        for m in range(1, k + 1):
            ref_tabs = []
            per_tabs = []
            for ci, rt, pt in zip(c_int, ref.tables, per.tables):
                csq = ci * ci
                row_r = [Fraction(1)]
                row_p = [Fraction(1)]
                power = 1
                for l in range(1, m + 1):
                    power *= csq
                    row_r.append(power * rt[l])
                    row_p.append(power * pt[l])
                ref_tabs.append(row_r)
                per_tabs.append(row_p)
            v = _combine_tables(ref_tabs, m, supports[m])
            u = _combine_tables(per_tabs, m, supports[m])
            rel = abs(u - v) / v
            if rel > worst:
                worst = rel
    return IsometryCheckResult(
        max_rel_residual=worst,
        bound=bound,
        trials=trials,
        seed=seed,
        orders_checked=tuple(2 * m for m in range(1, k + 1)),
    )


# ---------------------------------------------------------------------------
# the C_k bound
# ---------------------------------------------------------------------------

def c_k_constant(k: int, table: CmAlphaTable | None = None) -> int:
    """C_k = sum_{alpha=1}^{k} binom(k, alpha) C_{k,alpha}, an integer."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if table is None:
        table = cm_alpha_table(k)
    return sum(comb(k, alpha) * table.get(k, alpha) for alpha in range(1, k + 1))


@dataclass(frozen=True)
class VplCheck:
    k: int
    p: int
    lhs: Scalar
    rhs: Scalar
    holds: bool
    precision_bits: int


def vpl_check(k: int, mu_bar, p: int, precision: int = DEFAULT_PRECISION_BITS) -> VplCheck:
    """||h||_p * ||h||_q <= C_k^(1/p) * ||h||_2^2 for h with masses mu_bar.

    q = p/(p-1).  The norms go through the convolution of the k unit
    atoms and abs_moment, not through H_k, so the two sides share no
    machinery.  `holds` allows an additive 2^-(precision/2) slack for
    the equality boundary (k = 1 is an exact equality that float
    rounding may tip either way); away from equality the margin is
    macroscopic and the slack is irrelevant.
    """
    if p != 2 * k:
        raise ValueError(f"p must equal 2k, got p={p}, k={k}")
    validate_precision(precision)
    mu = MuVector(tuple(Fraction(v) for v in (mu_bar.values if isinstance(mu_bar, MuVector) else mu_bar)))
    if mu.k != k:
        raise ValueError(f"mu_bar must have length {k}")
    dist = convolve(IndependentSumSpec([SymmetricAtomVariable(1, m) for m in mu.values]))
    ck = c_k_constant(k)
    with workprec(precision):
        q = Fraction(p, p - 1)
        mp_p = abs_moment(dist, p)   # exact Fraction (even integer order)
        mq = abs_moment(dist, q)     # mpf
        m2 = abs_moment(dist, 2)     # exact Fraction
        # abs_moment returns an exact Fraction when q is integral (k = 1);
        # Fraction ** mpf would fall back to float pow and wreck the slack
        lhs = to_mpf(mp_p) ** (Fraction(1, p)) * (to_mpf(mq) ** (1 / to_mpf(q)))
        rhs = to_mpf(ck) ** (Fraction(1, p)) * to_mpf(m2)
        slack = mpmath.mpf(2) ** (-(precision // 2)) * max(mpmath.mpf(1), rhs)
        holds = bool(lhs <= rhs + slack)
    return VplCheck(k=k, p=p, lhs=lhs, rhs=rhs, holds=holds, precision_bits=precision)


# ---------------------------------------------------------------------------
# projection on the finite product space
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProjectionOperator:
    """Orthogonal projection onto span{h_i} on the product of atom spaces.

    probs[a] is the probability of atom a; basis[i][a] the value of
    generator i there; norms_sq[i] = ||h_i||_2^2.  All exact for
    rational generator data, so P o P = P is an identity, not an
    approximation.
    """

    probs: tuple
    basis: tuple
    norms_sq: tuple

    @property
    def atom_count(self) -> int:
        return len(self.probs)

    @property
    def n(self) -> int:
        return len(self.basis)

    def inner(self, f, g) -> Scalar:
        return sum((fa * ga * pa for fa, ga, pa in zip(f, g, self.probs)), Fraction(0))

    def apply(self, f) -> tuple:
        f = tuple(f)
        if len(f) != self.atom_count:
            raise ValueError("function vector length mismatch")
        coeffs = [self.inner(f, b) / ns for b, ns in zip(self.basis, self.norms_sq)]
        out = []
        for a in range(self.atom_count):
            acc = Fraction(0)
            for ci, b in zip(coeffs, self.basis):
                acc = acc + ci * b[a]
            out.append(acc)
        return tuple(out)

    def abs_power_moment(self, f, r) -> Scalar:
        """E |f|^r against the atom probabilities; exact for even integer r."""
        if isinstance(r, int) and r % 2 == 0:
            return sum((pa * fa ** r for fa, pa in zip(f, self.probs)), Fraction(0))
        rr = to_mpf(r)
        acc = mpmath.mpf(0)
        for fa, pa in zip(f, self.probs):
            va = abs(to_mpf(fa))
            if va != 0:
                acc += to_mpf(pa) * va ** rr
        return acc

    def norm(self, f, r) -> Scalar:
        moment = self.abs_power_moment(f, r)
        return to_mpf(moment) ** (1 / to_mpf(r))


def build_projection(span: FiniteSpan, cap: int = DEFAULT_SPACE_CAP) -> ProjectionOperator:
    """Materialize the generators on their joint finite probability space."""
    dists = [convolve(g) for g in span.generators]
    size = 1
    for d in dists:
        size *= len(d.atoms)
        if size > cap:
            raise CapExceededError(
                f"product space needs more than {cap} atoms"
            )
    probs = []
    basis = [[] for _ in dists]
    for combo in product(*[d.atoms for d in dists]):
        prob = Fraction(1)
        for i, (value, pa) in enumerate(combo):
            prob = prob * pa
            basis[i].append(value)
        probs.append(prob)
    op = ProjectionOperator(
        probs=tuple(probs),
        basis=tuple(tuple(b) for b in basis),
        norms_sq=tuple(),
    )
    norms_sq = tuple(op.inner(b, b) for b in op.basis)
    if any(ns == 0 for ns in norms_sq):
        raise DegenerateInputError("a generator vanishes on the product space")
    return ProjectionOperator(probs=op.probs, basis=op.basis, norms_sq=norms_sq)


def _signed_power(vec, expo):
    out = []
    for v in vec:
        av = abs(v)
        if av == 0:
            out.append(mpmath.mpf(0))
        else:
            s = 1 if v > 0 else -1
            out.append(s * av ** expo)
    return tuple(out)


def projection_norm_lower_bound(
    P: ProjectionOperator,
    p: int,
    starts: int = 8,
    iters: int = 60,
    seed: int = 0,
    precision: int = DEFAULT_PRECISION_BITS,
) -> Scalar:
    """Lower bound for ||P||_{L_p -> L_p} by fixed-point ascent.

    The first candidate is the first generator, evaluated in exact
    arithmetic: P fixes it, so the bound starts at exactly 1 and the
    random starts can only raise it.  Each start then iterates
    f <- psi_q(Pf) (q = p/(p-1)) at `precision` bits, tracking the best
    ratio ||Pf||_p / ||f||_p seen at any iterate.  Every reported value
    is a genuinely attained ratio, hence a valid lower bound.
    """
    if p < 2:
        raise ValueError("p must be >= 2")
    validate_precision(precision)
    rng = random.Random(seed)
    q_exp = Fraction(1, p - 1)  # q - 1
    with workprec(precision):
        best = mpmath.mpf(1)  # exact: P(basis[0]) == basis[0]
        start_vectors = []
        for _ in range(starts):
            start_vectors.append(
                tuple(mpmath.mpf(rng.uniform(-1, 1)) for _ in range(P.atom_count))
            )
        # random span combinations reach the maximizer family directly
        for _ in range(max(1, starts // 2)):
            coeffs = [mpmath.mpf(rng.uniform(-1, 1)) for _ in P.basis]
            vec = []
            for a in range(P.atom_count):
                acc = mpmath.mpf(0)
                for ci, b in zip(coeffs, P.basis):
                    acc += ci * to_mpf(b[a])
                vec.append(acc)
            start_vectors.append(tuple(_signed_power(vec, to_mpf(q_exp))))
        for f in start_vectors:
            for _ in range(iters):
                g = P.apply([mpf_to_fraction(v) for v in f])
                g = tuple(to_mpf(v) for v in g)
                ng = P.norm(g, p)
                nf = P.norm(f, p)
                if ng == 0 or nf == 0:
                    break
                ratio = ng / nf
                if ratio > best:
                    best = ratio
                nxt = _signed_power(g, to_mpf(q_exp))
                nn = P.norm(nxt, p)
                if nn == 0:
                    break
                f = tuple(v / nn for v in nxt)
        return best


def projection_norm_grid_search(
    P: ProjectionOperator,
    p: int,
    grid: int = 2000,
    refine: int = 60,
) -> float:
    """Dense angular oracle for two-generator spans, float precision.

    Maximizers of ||Pf||_p/||f||_p have the form psi_q(w) with w in the
    span (the p-dual of a maximizer must lie in range(P)), so for two
    generators a single angle parametrizes the family: w = cos(phi) h_1
    + sin(phi) h_2.  A dense sweep plus ternary refinement around the
    best angle pins the maximum far below the 1% comparison tolerance.
    """
    if P.n != 2:
        raise ValueError("grid oracle is for spans of exactly two generators")
    if p < 2:
        raise ValueError("p must be >= 2")
    import math as _math

    probs = [float(v) for v in P.probs]
    b1 = [float(v) for v in P.basis[0]]
    b2 = [float(v) for v in P.basis[1]]
    n1 = float(P.norms_sq[0])
    n2 = float(P.norms_sq[1])
    qe = 1.0 / (p - 1)

    def ratio(phi: float) -> float:
        w = [b1[a] * _math.cos(phi) + b2[a] * _math.sin(phi) for a in range(len(probs))]
        f = [_math.copysign(abs(v) ** qe, v) if v != 0 else 0.0 for v in w]
        c1 = sum(fa * ba * pa for fa, ba, pa in zip(f, b1, probs)) / n1
        c2 = sum(fa * ba * pa for fa, ba, pa in zip(f, b2, probs)) / n2
        pf = [c1 * b1[a] + c2 * b2[a] for a in range(len(probs))]
        num = sum(pa * abs(v) ** p for v, pa in zip(pf, probs)) ** (1.0 / p)
        den = sum(pa * abs(v) ** p for v, pa in zip(f, probs)) ** (1.0 / p)
        return num / den if den > 0 else 0.0

    step = _math.pi / grid
    best_phi, best = 0.0, 0.0
    for i in range(grid):
        r = ratio(i * step)
        if r > best:
            best, best_phi = r, i * step
    lo, hi = best_phi - step, best_phi + step
    for _ in range(refine):
        m1 = lo + (hi - lo) / 3
        m2 = hi - (hi - lo) / 3
        if ratio(m1) < ratio(m2):
            lo = m1
        else:
            hi = m2
    return max(best, ratio((lo + hi) / 2))


# ---------------------------------------------------------------------------
# series hypotheses for the weight sequence
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UncomplementedRow:
    j: int
    nu: Fraction
    bracket_ok: bool
    w: Scalar
    w_lower: Scalar
    w_upper: Scalar
    bounds_ok: bool


@dataclass(frozen=True)
class UncomplementedCertificate:
    p: int
    delta: Fraction
    precision_bits: int
    rows: tuple
    offending_js: tuple
    valid: bool
    sum_nu_partial: Fraction
    sum_nu_tail_bound: Fraction
    sum_nu_total_bound: Fraction
    convergence_certified: bool
    comparator_exponent: Fraction
    comparator_constant: Scalar
    comparator_partial_N: int
    comparator_partial_sum: float
    comparator_reference: float
    divergence_certified: bool
    divergence_note: str
    typo_note: str


def uncomplemented_certificate(
    cert: ConstructionCertificate,
    comparator_N: int = 10 ** 6,
) -> UncomplementedCertificate:
    """Certify the mass/weight sequence hypotheses from a certificate.

    All bracket and weight-bound checks are exact rational comparisons
    (the weight bounds are checked on p-th powers: w_j^p = 1/(nu_j j^p)
    must lie strictly between (1/delta) j^-2 and (2/delta) j^-2, which
    is the bracket again).  Convergence of sum nu_j is certified with
    the integral tail bound delta * J^(3-p)/(p-3).  Divergence of
    sum w_j^(2p/(p-2)) reduces to the comparator exponent 4/(p-2): for
    p >= 6 it is <= 1 and the comparison series diverges; for p = 4 it
    equals 2 and this comparator proves nothing, which is reported
    verbatim rather than papered over.
    """
    p = cert.p
    delta = cert.ball.delta
    rows = []
    offending = []
    with workprec(cert.precision_bits):
        for e in cert.entries:
            j = e.j
            lower = delta / 2 / Fraction(j) ** (p - 2)
            upper = delta / Fraction(j) ** (p - 2)
            bracket_ok = lower < e.nu < upper
            # exact p-th-power comparison of the weight bounds
            w_p = 1 / (e.nu * Fraction(j) ** p)
            bounds_ok = (1 / delta) / j ** 2 < w_p < (2 / delta) / j ** 2
            w = to_mpf(e.nu) ** (-Fraction(1, p)) / j
            w_lower = to_mpf(1 / delta) ** (Fraction(1, p)) * mpmath.mpf(j) ** (-Fraction(2, p))
            w_upper = to_mpf(2 / delta) ** (Fraction(1, p)) * mpmath.mpf(j) ** (-Fraction(2, p))
            if not (bracket_ok and bounds_ok):
                offending.append(j)
            rows.append(
                UncomplementedRow(
                    j=j, nu=e.nu, bracket_ok=bracket_ok,
                    w=w, w_lower=w_lower, w_upper=w_upper, bounds_ok=bounds_ok,
                )
            )
        J = max((e.j for e in cert.entries), default=0)
        sum_nu_partial = sum((e.nu for e in cert.entries), Fraction(0))
        # sum_{j>J} j^(2-p) < integral_J^inf x^(2-p) dx = J^(3-p)/(p-3)
        tail = delta * Fraction(1, J ** (p - 3) * (p - 3)) if J else Fraction(0)
        exponent = Fraction(4, p - 2)
        constant = to_mpf(1 / delta) ** (Fraction(2, p - 2))
    valid = not offending
    partial = 0.0
    for j in range(1, comparator_N + 1):
        partial += j ** (-float(exponent))
    if exponent == 1:
        reference = log(comparator_N)
        note = (
            "comparator exponent 4/(p-2) = 1: the comparison series is the "
            "harmonic series times (1/delta)^(2/(p-2)); divergence certified."
        )
        certified = valid
    elif exponent < 1:
        reference = ((comparator_N + 1) ** (1 - float(exponent)) - 1) / (1 - float(exponent))
        note = (
            f"comparator exponent 4/(p-2) = {exponent} < 1: comparison series "
            "diverges like N^(1-4/(p-2)); divergence certified."
        )
        certified = valid
    else:
        reference = 0.0
        note = (
            f"comparator exponent 4/(p-2) = {exponent} > 1: the comparison "
            "series converges, so divergence not certified by this "
            "comparator (consistent with the p >= 6 restriction). The "
            "alternative mass schedule nu_j ~ j^(-3/2) suggested for p = 4 "
            "is recorded as not automated here."
        )
        certified = False
    return UncomplementedCertificate(
        p=p,
        delta=delta,
        precision_bits=cert.precision_bits,
        rows=tuple(rows),
        offending_js=tuple(offending),
        valid=valid,
        sum_nu_partial=sum_nu_partial,
        sum_nu_tail_bound=tail,
        sum_nu_total_bound=sum_nu_partial + tail,
        convergence_certified=valid,
        comparator_exponent=exponent,
        comparator_constant=constant,
        comparator_partial_N=comparator_N,
        comparator_partial_sum=partial,
        comparator_reference=reference,
        divergence_certified=certified,
        divergence_note=note,
        typo_note=(
            "The source derivation prints the divergence claim for this sum "
            "as '>= infinity'; that is read as 'diverges' and flagged here as "
            "a typo rather than silently reinterpreted."
        ),
    )


def render_uncomplemented_report(uc: UncomplementedCertificate) -> str:
    lines = [
        f"Weight-sequence hypothesis certificate (p = {uc.p}, delta = {uc.delta})",
        "",
        f"{'j':>4}  {'nu_j':>14}  {'bracket':>8}  {'w_j':>12}  {'w bounds':>9}",
    ]
    with workprec(uc.precision_bits):
        for r in uc.rows:
            lines.append(
                f"{r.j:>4}  {mpmath.nstr(to_mpf(r.nu), 8):>14}  "
                f"{'ok' if r.bracket_ok else 'FAIL':>8}  "
                f"{mpmath.nstr(to_mpf(r.w), 8):>12}  "
                f"{'ok' if r.bounds_ok else 'FAIL':>9}"
            )
        lines += [
            "",
            f"sum nu_j over certified j: {mpmath.nstr(to_mpf(uc.sum_nu_partial), 10)}",
            f"analytic tail bound delta * J^(3-p)/(p-3): {mpmath.nstr(to_mpf(uc.sum_nu_tail_bound), 10)}",
            f"=> sum nu_j < {mpmath.nstr(to_mpf(uc.sum_nu_total_bound), 10)}  "
            f"(convergence {'certified' if uc.convergence_certified else 'NOT certified'})",
            "",
            f"divergence comparator: w_j^(2p/(p-2)) > (1/delta)^(2/(p-2)) * j^(-4/(p-2))",
            f"  constant c = {mpmath.nstr(to_mpf(uc.comparator_constant), 10)}, "
            f"exponent = {uc.comparator_exponent}",
            f"  comparison partial sum at N = {uc.comparator_partial_N}: "
            f"{uc.comparator_partial_sum:.6f} vs reference "
            f"{uc.comparator_reference:.6f}",
            f"  {uc.divergence_note}",
            "",
            uc.typo_note,
        ]
        if uc.offending_js:
            lines.insert(1, f"INVALID: bracket/bound failures at j = {list(uc.offending_js)}")
    return "\n".join(lines)
