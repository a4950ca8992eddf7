import pickle

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from amdrelay.gf import (
    GF,
    PRESETS,
    REDUCTION_TABLE,
    FieldMismatchError,
    ParseError,
    fe_add,
    fe_deserialize,
    fe_inv,
    fe_mul,
    fe_pow,
    fe_serialize,
    field_from_name,
    is_irreducible_gf2,
    is_prime,
    rabin_irreducible_gf2,
    table_polynomial,
)
from amdrelay.rng import Rng


def schoolbook_mul(a: int, b: int, poly: int) -> int:
    """Carry-less product then long division, bit by bit."""
    prod = 0
    for i in range(b.bit_length()):
        if b >> i & 1:
            prod ^= a << i
    m = poly.bit_length() - 1
    for k in range(prod.bit_length() - 1, m - 1, -1):
        if prod >> k & 1:
            prod ^= poly << (k - m)
    return prod


def sympy_irreducible(poly: int) -> bool:
    x = sympy.symbols("x")
    expr = sum(x ** k for k in range(poly.bit_length()) if poly >> k & 1)
    return sympy.Poly(expr, x, modulus=2).is_irreducible


# -- construction ----------------------------------------------------------

def test_aes_field_known_product():
    F = GF(2, 8)
    assert F.poly == 0x11B
    assert (F(0x57) * F(0x83)).value == 0xC1   # FIPS-197 worked example
    assert (F(0x57) * F(0x13)).value == 0xFE


@pytest.mark.parametrize("m", sorted(REDUCTION_TABLE))
def test_table_polynomials_irreducible(m):
    poly = table_polynomial(m)
    assert poly.bit_length() - 1 == m
    assert rabin_irreducible_gf2(poly)
    if m <= 32:
        assert is_irreducible_gf2(poly)


@pytest.mark.parametrize("m", [8, 16, 64, 86, 128])
def test_table_polynomials_match_sympy(m):
    assert sympy_irreducible(table_polynomial(m))


def test_reducible_polynomials_rejected():
    assert not is_irreducible_gf2(0b101)           # (x+1)^2
    assert not rabin_irreducible_gf2((1 << 64) | 1)  # x^64 + 1
    with pytest.raises(ValueError):
        GF(2, 8, 0x101)
    with pytest.raises(ValueError):
        GF(2, 64, (1 << 64) | 1)


def test_rejects_bad_parameters():
    for bad in [(4,), (1,), (0,), (9,)]:
        with pytest.raises(ValueError):
            GF(*bad)
    with pytest.raises(ValueError):
        GF(3, 2)
    with pytest.raises(ValueError):
        GF(7, 1, 0x13)
    with pytest.raises(ValueError):
        GF(2, 8, 0x13)  # degree 4 polynomial for m=8
    with pytest.raises(ValueError):
        GF(2, 200)      # no table entry


def test_is_prime_small_and_large():
    primes = [p for p in range(200) if is_prime(p)]
    assert primes == list(sympy.primerange(0, 200))
    assert is_prime(2 ** 61 - 1)
    assert not is_prime(2 ** 61 + 1)


def test_presets_resolve():
    for name, (p, m) in PRESETS.items():
        F = field_from_name(name)
        assert (F.p, F.m) == (p, m)
    assert field_from_name("GF2_86") is GF(2, 86)
    assert field_from_name("gf31").order == 31
    with pytest.raises(ValueError):
        field_from_name("gf4x")


def test_field_cache_and_pickle():
    assert GF(2, 16) is GF(2, 16)
    F = GF(2, 86)
    a = F.random(Rng(0))
    assert pickle.loads(pickle.dumps(F)) == F
    assert pickle.loads(pickle.dumps(a)) == a


def test_golden_random_element():
    # first 11 bytes of the seed-0 stream, masked to 86 bits
    assert GF(2, 86).random(Rng(0)).hex() == "2043399cf1c2ae2a13d485"


# -- arithmetic against the schoolbook reference ---------------------------

@pytest.mark.parametrize("m", [3, 4, 8, 16, 17, 64, 86, 128])
def test_mul_matches_schoolbook(m):
    F = GF(2, m)
    rng = Rng(("mul", m).__repr__())
    for _ in range(300):
        a, b = rng.randbits(m), rng.randbits(m)
        assert F.mul(a, b) == schoolbook_mul(a, b, F.poly)


def test_small_field_tables_exhaustive():
    F = GF(2, 4)
    for a in range(16):
        for b in range(16):
            assert F.mul(a, b) == schoolbook_mul(a, b, F.poly)


def test_prime_field_arithmetic_exhaustive():
    F = GF(7)
    for a in range(7):
        for b in range(7):
            assert (F(a) + F(b)).value == (a + b) % 7
            assert (F(a) - F(b)).value == (a - b) % 7
            assert (F(a) * F(b)).value == a * b % 7
        if a:
            assert (F(a) * F(a).inverse()).value == 1


@pytest.mark.parametrize("spec", [(7, 1), (2, 8), (2, 16), (2, 24), (2, 86)])
def test_inverse_and_pow(spec):
    F = GF(*spec)
    rng = Rng(f"inv{spec}")
    for _ in range(50):
        a = F.random_nonzero(rng)
        assert a * a.inverse() == F.one
        assert a ** (F.order - 1) == F.one
        assert a ** 0 == F.one
        assert a ** -1 == a.inverse()
        assert a / a == F.one


def test_zero_has_no_inverse():
    for F in (GF(7), GF(2, 8), GF(2, 86)):
        with pytest.raises(ZeroDivisionError):
            F.zero.inverse()
        with pytest.raises(ZeroDivisionError):
            F.one / F.zero


def test_mixed_fields_refused():
    with pytest.raises(FieldMismatchError):
        GF(2, 8).one + GF(2, 16).one
    with pytest.raises(FieldMismatchError):
        GF(7).one * GF(2, 3).one
    with pytest.raises(TypeError):
        GF(7).one + 1


fields = st.sampled_from([GF(7), GF(2, 8), GF(2, 16), GF(2, 86), GF(2 ** 61 - 1)])


@settings(max_examples=60, deadline=None)
@given(fields, st.data())
def test_field_axioms(F, data):
    el = st.integers(0, F.order - 1).map(F)
    a, b, c = data.draw(el), data.draw(el), data.draw(el)
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == F.zero
    assert a + (-a) == F.zero
    assert a * F.one == a


@settings(max_examples=60, deadline=None)
@given(fields, st.data())
def test_serialization_roundtrip(F, data):
    a = F(data.draw(st.integers(0, F.order - 1)))
    assert fe_deserialize(F, fe_serialize(a)) == a
    assert F.from_hex(a.hex()) == a
    assert len(a.hex()) == 2 * F.nbytes
    assert a.hex() == a.hex().lower()


def test_parse_errors():
    F = GF(2, 86)
    with pytest.raises(ParseError):
        F.from_hex("00")
    with pytest.raises(ParseError):
        F.from_hex("zz" * 11)
    with pytest.raises(ParseError):
        F.from_hex("ff" * 11)           # 88 bits set, beyond 2^86
    with pytest.raises(ParseError):
        GF(7).from_bytes(b"\x07")
    with pytest.raises(ValueError):
        GF(7)(7)


def test_function_aliases():
    F = GF(2, 8)
    a, b = F(3), F(7)
    assert fe_add(a, b) == a + b
    assert fe_mul(a, b) == a * b
    assert fe_inv(a) == a.inverse()
    assert fe_pow(a, 5) == a ** 5


def test_random_vector_uniform_low_bits():
    from scipy import stats
    F = GF(2, 3)
    counts = [0] * 8
    r = Rng(99)
    for _ in range(4000):
        for e in F.random_vector(r, 5):
            counts[e.value] += 1
    assert stats.chisquare(counts).pvalue > 1e-4
