from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, strategies as st

from distshor.bitmath import BitString, PhaseFraction, dt_distance, frac_bits, slice_bits

B = BitString.from_str


def test_bitstring_roundtrip():
    assert str(B("0101")) == "0101"
    assert B("0101") == BitString(4, 5)
    assert B("01") + B("10") == B("0110")
    with pytest.raises(ValueError):
        BitString(3, 8)
    with pytest.raises(ValueError):
        B("012")


def test_phase_fraction_normalises():
    w = PhaseFraction(2, 4)
    assert (w.numerator, w.denominator) == (1, 2)
    assert PhaseFraction.wrap(Fraction(7, 3)) == PhaseFraction(1, 3)
    with pytest.raises(ValueError):
        PhaseFraction(3, 3)


@pytest.mark.parametrize(
    "x, y, expected",
    [("000", "111", 1), ("0110", "0110", 0), ("0001", "1110", 3)],
)
def test_dt_distance_examples(x, y, expected):
    assert dt_distance(B(x), B(y)) == expected


def test_dt_distance_width_mismatch():
    with pytest.raises(ValueError):
        dt_distance(B("00"), B("000"))


@pytest.mark.parametrize(
    "omega, i, j, expected",
    [(Fraction(1, 3), 1, 4, "0101"), (Fraction(1, 2), 1, 3, "100"), (Fraction(3, 8), 2, 4, "110")],
)
def test_frac_bits_examples(omega, i, j, expected):
    assert str(frac_bits(omega, i, j)) == expected


def test_frac_bits_rejects_reversed_window():
    with pytest.raises(ValueError):
        frac_bits(Fraction(1, 3), 4, 2)


@pytest.mark.parametrize("i, j, expected", [(1, 2, "01"), (3, 4, "01"), (1, 4, "0101")])
def test_slice_examples(i, j, expected):
    assert str(slice_bits(B("0101"), i, j)) == expected


@pytest.mark.parametrize("i, j", [(0, 2), (3, 2), (2, 5)])
def test_slice_out_of_range(i, j):
    with pytest.raises(ValueError):
        slice_bits(B("0101"), i, j)


def test_dt_matches_min_over_offsets():
    # min |b| over b in (-(2^t-1), 2^t-1) with (x+b) mod 2^t = y
    for t in range(1, 7):
        for xv, yv in product(range(1 << t), repeat=2):
            best = min(abs(b) for b in range(-(1 << t) + 1, 1 << t) if (xv + b) % (1 << t) == yv)
            assert dt_distance(BitString(t, xv), BitString(t, yv)) == best


@pytest.mark.parametrize("t", range(1, 11))
def test_metric_identity_and_symmetry(t):
    words = [BitString(t, v) for v in range(1 << t)]
    step = max(1, len(words) // 64)
    for x in words[::step]:
        for y in words:
            d = dt_distance(x, y)
            assert (d == 0) == (x == y)
            assert d == dt_distance(y, x)


@pytest.mark.parametrize("t", range(1, 6))
def test_triangle_inequality_exhaustive(t):
    words = [BitString(t, v) for v in range(1 << t)]
    for x, y, z in product(words, repeat=3):
        assert dt_distance(x, z) <= dt_distance(x, y) + dt_distance(y, z)


@given(st.integers(1, 10).flatmap(
    lambda t: st.tuples(st.just(t), *(st.integers(0, (1 << t) - 1) for _ in range(3)))
))
def test_triangle_inequality_random(args):
    t, a, b, c = args
    x, y, z = BitString(t, a), BitString(t, b), BitString(t, c)
    assert dt_distance(x, z) <= dt_distance(x, y) + dt_distance(y, z)


@pytest.mark.parametrize("t", range(2, 9))
def test_truncation_lemma_exhaustive(t):
    for t0 in range(1, t):
        for xv, yv in product(range(1 << t), repeat=2):
            x, y = BitString(t, xv), BitString(t, yv)
            if dt_distance(x, y) < 1 << (t - t0):
                assert dt_distance(slice_bits(x, 1, t0), slice_bits(y, 1, t0)) <= 1


@given(
    st.integers(1, 10**6).flatmap(lambda d: st.tuples(st.integers(0, d - 1), st.just(d))),
    st.integers(1, 40),
    st.integers(0, 40),
    st.integers(1, 40),
)
def test_frac_bits_composition(frac, i, extra, n):
    omega = Fraction(*frac)
    j = i + extra
    assert frac_bits(omega, i, j) + frac_bits(omega, j + 1, j + n) == frac_bits(omega, i, j + n)


@given(st.integers(1, 2000).flatmap(lambda d: st.tuples(st.integers(0, d - 1), st.just(d))), st.integers(1, 60))
def test_frac_bits_is_truncation(frac, j):
    omega = Fraction(*frac)
    value = frac_bits(omega, 1, j).value
    assert Fraction(value, 1 << j) <= omega < Fraction(value + 1, 1 << j)


def test_dyadic_tail_is_zero():
    assert frac_bits(Fraction(5, 8), 4, 20).value == 0
    assert str(frac_bits(Fraction(5, 8), 1, 5)) == "10100"
