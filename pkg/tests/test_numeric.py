"""Round-trip and exactness guarantees of the numeric layer."""

import random
from fractions import Fraction

import mpmath
import pytest
from mpmath import workprec

from lp_isoforge.errors import SingularJacobianError
from lp_isoforge.numeric import (
    det_exact,
    det_mpf,
    frac_to_str,
    mpf_to_fraction,
    parse_fraction,
    parse_real,
    real_to_str,
    solve_linear_mpf,
    to_mpf,
    validate_precision,
)


def test_to_mpf_correctly_rounded_rational():
    # 1/3 at 8 mantissa bits: 2^9/3 = 170.67 rounds to 171, so the nearest
    # representable is 171/512 (a float() detour would give a different bit)
    with workprec(8):
        x = to_mpf(Fraction(1, 3))
    assert mpf_to_fraction(x) == Fraction(171, 512)


def test_to_mpf_exact_on_dyadics():
    q = Fraction(12345, 2 ** 40)
    with workprec(256):
        assert mpf_to_fraction(to_mpf(q)) == q


def test_mpf_to_fraction_exact_binary():
    with workprec(53):
        x = mpmath.mpf(1) / 7
    f = mpf_to_fraction(x)
    with workprec(53):
        assert to_mpf(f) == x
    # the fraction is the dyadic the float stores, not a re-rounding
    assert f.denominator & (f.denominator - 1) == 0


@pytest.mark.parametrize("prec", [128, 192, 256, 320])
def test_real_string_round_trip_bit_exact(prec):
    rng = random.Random(prec)
    with workprec(prec):
        for _ in range(25):
            num = rng.getrandbits(prec) or 1
            x = to_mpf(Fraction(num, 3 ** 40)) * (-1) ** rng.randint(0, 1)
            s = real_to_str(x, prec)
            assert parse_real(s, prec) == x


def test_real_to_str_accepts_fractions():
    s = real_to_str(Fraction(7, 3), 256)
    with workprec(256):
        assert parse_real(s, 256) == to_mpf(Fraction(7, 3))


def test_fraction_strings():
    assert frac_to_str(Fraction(-7, 3)) == "-7/3"
    assert frac_to_str(5) == "5/1"
    assert parse_fraction("-7/3") == Fraction(-7, 3)
    assert parse_fraction("5") == Fraction(5)
    with pytest.raises(ValueError):
        parse_fraction("7/3/2")
    with pytest.raises(ValueError):
        parse_fraction("three halves")


def test_validate_precision():
    assert validate_precision(128) == 128
    for bad in (0, 64, 127, -256, "256"):
        with pytest.raises(ValueError):
            validate_precision(bad)


def test_to_mpf_rejects_floats():
    with pytest.raises(TypeError):
        to_mpf(0.1)


def test_det_exact_small_matrices():
    assert det_exact([[Fraction(1), Fraction(1)], [Fraction(3), Fraction(5)]]) == 2
    assert det_exact([[2]]) == 2
    assert det_exact([[1, 2], [2, 4]]) == 0
    # zero leading pivot forces a row swap
    assert det_exact([[0, 1, 2], [1, 0, 1], [2, 3, 0]]) == 8


def test_det_mpf_matches_exact():
    rng = random.Random(3)
    with workprec(256):
        for _ in range(10):
            m = [[Fraction(rng.randint(-9, 9), rng.randint(1, 9)) for _ in range(3)]
                 for _ in range(3)]
            want = det_exact(m)
            got = det_mpf([[to_mpf(v) for v in row] for row in m])
            assert abs(got - to_mpf(want)) <= abs(to_mpf(want)) * mpmath.mpf(2) ** -200 + mpmath.mpf(2) ** -240


def test_det_mpf_rejects_singular():
    with workprec(256):
        with pytest.raises(SingularJacobianError):
            det_mpf([[to_mpf(1), to_mpf(2)], [to_mpf(2), to_mpf(4)]])


def test_solve_linear_mpf():
    with workprec(256):
        rows = [[to_mpf(1), to_mpf(1)], [to_mpf(3), to_mpf(5)]]
        rhs = [to_mpf(3), to_mpf(11)]
        x = solve_linear_mpf(rows, rhs)
        assert abs(x[0] - 2) < mpmath.mpf(2) ** -250
        assert abs(x[1] - 1) < mpmath.mpf(2) ** -250
