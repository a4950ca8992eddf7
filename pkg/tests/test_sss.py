from collections import Counter
from itertools import combinations, product

import pytest
from hypothesis import given, settings, strategies as st

from amdrelay.amd import AmdParams
from amdrelay.gf import GF
from amdrelay.rng import Rng
from amdrelay.sss import (
    AccessStructure,
    SharingScheme,
    ShareLengthError,
    ShareVector,
    additive_shares,
    lagrange_at_zero,
    recover,
    recover_star,
    recovery_coefficients,
    shamir_shares,
    share,
    share_star,
    vec_add,
    vec_scale,
    vec_sub,
)

F7 = GF(7)


def test_access_structure_validation():
    with pytest.raises(ValueError):
        AccessStructure("majority", 3, 2)
    with pytest.raises(ValueError):
        AccessStructure.threshold(4, 3)
    with pytest.raises(ValueError):
        AccessStructure("additive", 3, 2)
    with pytest.raises(ValueError):
        AccessStructure.threshold(2, 7).check_field(F7)
    st3 = AccessStructure.threshold(2, 3)
    assert st3.is_qualified([1, 3])
    assert not st3.is_qualified([2, 2])
    assert not st3.is_qualified([4, 5])
    assert AccessStructure.additive(3).is_qualified([1, 2, 3])
    assert not AccessStructure.additive(3).is_qualified([1, 2])


def test_vector_helpers_absorb_missing():
    a = (F7(1), F7(2))
    assert vec_add(a, None) is None
    assert vec_sub(None, a) is None
    assert vec_scale(F7(3), None) is None
    assert vec_add(a, a) == (F7(2), F7(4))
    with pytest.raises(ShareLengthError):
        vec_add(a, (F7(1),))


def test_additive_single_share_hides_secret_exhaustively():
    # over all randomness, each pair of shares is uniform for every secret
    for secret in range(7):
        seen = Counter()
        for r1, r2 in product(range(7), repeat=2):
            sv = additive_shares((F7(secret),), [(F7(r1),), (F7(r2),)])
            for i, j in combinations(range(3), 2):
                seen[(i, j, sv[i][0].value, sv[j][0].value)] += 1
        assert set(seen.values()) == {1}


def test_shamir_single_share_hides_secret_exhaustively():
    for secret in range(7):
        for i in range(3):
            vals = Counter(
                shamir_shares((F7(secret),), [(F7(a),)], 3)[i][0].value for a in range(7)
            )
            assert vals == Counter(range(7))


def test_shamir_matches_direct_polynomial():
    F = GF(13)
    s = (F(5), F(9))
    coeffs = [(F(2), F(0)), (F(7), F(1))]
    sv = shamir_shares(s, coeffs, 4)
    for i in range(1, 5):
        for c in range(2):
            expect = s[c] + coeffs[0][c] * F(i) + coeffs[1][c] * F(i) ** 2
            assert sv[i - 1][c] == expect


def test_lagrange_reconstructs_polynomial_value():
    F = GF(2, 16)
    pts = [2, 5, 9]
    lam = lagrange_at_zero(F, pts)
    poly = [F(0x1234), F(0x0F0F), F(0xBEEF)]
    vals = [poly[0] + poly[1] * F(x) + poly[2] * F(x) ** 2 for x in pts]
    assert sum((l * v for l, v in zip(lam, vals)), F.zero) == poly[0]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 9), st.integers(2, 5), st.data())
def test_threshold_recovers_from_every_qualified_subset(seed, n, data):
    t = data.draw(st.integers(1, n))
    F = GF(2, 16)
    structure = AccessStructure.threshold(t, n)
    rng = Rng(seed)
    secret = F.random_vector(rng, 3)
    sv = share(structure, secret, rng)
    for k in range(n + 1):
        for present in combinations(range(1, n + 1), k):
            partial = ShareVector(tuple(sv[i - 1] if i in present else None for i in range(1, n + 1)))
            out = recover(structure, partial)
            if k >= t:
                assert out == secret
            else:
                assert out is None


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 9), st.integers(1, 6))
def test_additive_roundtrip_and_missing(seed, n):
    F = GF(2, 86)
    structure = AccessStructure.additive(n)
    rng = Rng(seed)
    secret = F.random_vector(rng, 2)
    sv = share(structure, secret, rng)
    assert recover(structure, sv) == secret
    assert recover(structure, sv.with_entry(n, None)) is None


def test_recovery_coefficients():
    F = GF(7)
    st_add = AccessStructure.additive(3)
    assert recovery_coefficients(st_add, F, [1, 2, 3]) == {1: F.one, 2: F.one, 3: F.one}
    assert recovery_coefficients(st_add, F, [1, 2]) is None
    st_thr = AccessStructure.threshold(2, 3)
    coeffs = recovery_coefficients(st_thr, F, [3, 1, 2])
    assert set(coeffs) == {1, 2}
    assert coeffs[1] * F(1) + coeffs[2] * F(2) == F.zero      # kills the linear term
    assert coeffs[1] + coeffs[2] == F.one                       # keeps the constant


def test_share_vector_json_and_width():
    F = GF(2, 8)
    sv = ShareVector(((F(1), F(2)), None, (F(3), F(4))))
    assert sv.present() == [1, 3]
    assert sv.width() == 2
    assert ShareVector.from_json(F, sv.to_json()) == sv
    assert sv.to_json() == {"entries": [["01", "02"], None, ["03", "04"]]}
    with pytest.raises(ShareLengthError):
        ShareVector(((F(1),), (F(1), F(2)))).width()
    assert ShareVector((None, None)).width() is None


def test_robust_sharing_roundtrip_and_detection():
    F = GF(2, 86)
    P = AmdParams(F, 3)
    structure = AccessStructure.additive(3)
    rng = Rng(21)
    for _ in range(20):
        s = F.random_vector(rng, 3)
        sv = share_star(structure, P, s, rng)
        assert sv.width() == 5
        assert recover_star(structure, P, sv) == s
        offset = F.random_vector(rng, 5)
        tampered = sv.with_entry(2, vec_add(sv[1], offset))
        assert recover_star(structure, P, tampered) is None


def test_sharing_scheme_wrapper():
    F = GF(2, 16)
    robust = SharingScheme.robust(AccessStructure.threshold(2, 3), AmdParams(F, 3))
    assert robust.secret_length == 3 and robust.share_length == 5
    plain = SharingScheme(AccessStructure.additive(3), F, secret_length=2)
    assert plain.share_length == 2
    rng = Rng(4)
    for scheme in (robust, plain):
        s = scheme.random_secret(rng)
        sv = scheme.share(s, rng)
        assert scheme.recover(sv) == s
        with pytest.raises(ShareLengthError):
            scheme.share(s + s, rng)
    with pytest.raises(ValueError):
        SharingScheme(AccessStructure.additive(3), GF(7), AmdParams(F, 3))
