"""Finite fields GF(p) and GF(2^m).

Elements are immutable values tied to a :class:`FieldSpec`.  Arithmetic is
plain Python integer work: no constant-time guarantees, so nothing here is
fit for protecting real data.

>>> F = GF(2, 3)                       # x^3 + x + 1
>>> F(0b010) * F(0b100) == F(0b011)
True
>>> GF(7)(3) + GF(7)(5)
GF(7)(0x01)
"""

from __future__ import annotations

import functools
import math

from .rng import Rng

__all__ = [
    "FieldSpec",
    "FieldElement",
    "FieldMismatchError",
    "ParseError",
    "GF",
    "PRESETS",
    "field_from_name",
    "is_prime",
    "is_irreducible_gf2",
    "rabin_irreducible_gf2",
    "fe_add",
    "fe_sub",
    "fe_neg",
    "fe_mul",
    "fe_inv",
    "fe_pow",
    "fe_random",
    "fe_serialize",
    "fe_deserialize",
]


class FieldMismatchError(ValueError):
    """Operands belong to different fields."""


class ParseError(ValueError):
    """Byte or hex input is not the canonical encoding of a field element."""


# Reduction polynomials as (degree, middle exponents...); the x^m and 1 terms
# are implicit.  All entries pass Rabin's test (see tests/test_gf.py).
REDUCTION_TABLE: dict[int, tuple[int, ...]] = {
    2: (1,), 3: (1,), 4: (1,), 5: (2,), 6: (1,), 7: (1,),
    8: (4, 3, 1), 9: (1,), 10: (3,), 11: (2,), 12: (3,), 13: (5, 2, 1),
    14: (5,), 15: (1,), 16: (5, 3, 1), 17: (3,), 18: (3,), 19: (5, 2, 1),
    20: (3,), 21: (2,), 22: (1,), 23: (5,), 24: (7, 2, 1), 25: (3,),
    26: (6, 2, 1), 27: (5, 2, 1), 28: (1,), 29: (2,), 30: (1,), 31: (3,),
    32: (22, 2, 1), 64: (4, 3, 1), 86: (21,), 128: (7, 2, 1),
}

# Fields up to this degree multiply through log/antilog tables.
_TABLE_MAX_DEGREE = 16
_EXHAUSTIVE_MAX_DEGREE = 32


def table_polynomial(m: int) -> int:
    try:
        middle = REDUCTION_TABLE[m]
    except KeyError:
        raise ValueError(f"no built-in reduction polynomial for degree {m}") from None
    poly = (1 << m) | 1
    for e in middle:
        poly |= 1 << e
    return poly


# -- integer helpers -------------------------------------------------------

def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for n < 3.3e24."""
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
    for p in small:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _prime_factors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def _pmod(a: int, m: int) -> int:
    dm = m.bit_length() - 1
    while a and a.bit_length() - 1 >= dm:
        a ^= m << (a.bit_length() - 1 - dm)
    return a


def _pgcd(a: int, b: int) -> int:
    while b:
        a, b = b, _pmod(a, b)
    return a


def _clmul_mod(a: int, b: int, m: int, poly: int) -> int:
    r = 0
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if a >> m:
            a ^= poly
    return r


@functools.lru_cache(maxsize=None)
def is_irreducible_gf2(poly: int) -> bool:
    """Exhaustive trial division by every polynomial of degree <= m/2."""
    m = poly.bit_length() - 1
    if m < 1:
        return False
    if m == 1:
        return True
    if not poly & 1:
        return False
    for cand in range(3, 1 << (m // 2 + 1), 2):
        if _pmod(poly, cand) == 0:
            return False
    return True


def rabin_irreducible_gf2(poly: int) -> bool:
    """Rabin's test: x^(2^m) = x mod f, and gcd(f, x^(2^(m/r)) - x) = 1 for primes r | m."""
    m = poly.bit_length() - 1
    if m < 1:
        return False

    def frob(k: int) -> int:
        x = 2
        for _ in range(k):
            x = _clmul_mod(x, x, m, poly)
        return x

    if frob(m) != 2:
        return False
    return all(_pgcd(poly, frob(m // r) ^ 2) == 1 for r in _prime_factors(m))


# -- the field -------------------------------------------------------------

class FieldSpec:
    """GF(p) for prime p, or GF(2^m) modulo an irreducible ``poly``.

    Construct through :func:`GF`, which caches instances so identical
    parameters share one object.
    """

    __slots__ = ("p", "m", "poly", "order", "nbytes", "zero", "one",
                 "_exp", "_log", "__weakref__")

    def __init__(self, p: int, m: int = 1, poly: int | None = None):
        if m < 1:
            raise ValueError("extension degree must be >= 1")
        if not is_prime(p):
            raise ValueError(f"characteristic {p} is not prime")
        if p >= 1 << 64:
            raise ValueError("prime fields are limited to p < 2^64")
        if p != 2 and m > 1:
            raise ValueError("extension fields are only supported in characteristic 2")
        if m == 1:
            if poly is not None:
                raise ValueError("prime fields take no reduction polynomial")
        else:
            if poly is None:
                poly = table_polynomial(m)
            if poly.bit_length() - 1 != m:
                raise ValueError(f"reduction polynomial has degree {poly.bit_length() - 1}, expected {m}")
            if m <= _EXHAUSTIVE_MAX_DEGREE:
                if not is_irreducible_gf2(poly):
                    raise ValueError(f"polynomial {poly:#x} is reducible")
            elif m not in REDUCTION_TABLE or poly != table_polynomial(m):
                if not rabin_irreducible_gf2(poly):
                    raise ValueError(f"polynomial {poly:#x} is reducible")
        self.p = p
        self.m = m
        self.poly = poly
        self.order = p ** m
        bits = m if m > 1 else p.bit_length()
        self.nbytes = (bits + 7) // 8
        self._exp = self._log = None
        if m > 1 and m <= _TABLE_MAX_DEGREE:
            self._build_tables()
        self.zero = _new(self, 0)
        self.one = _new(self, 1)
        if m > _EXHAUSTIVE_MAX_DEGREE:
            self._check_frobenius()

    # construction helpers

    def _build_tables(self) -> None:
        q1 = self.order - 1
        factors = _prime_factors(q1)
        g = 2
        while True:
            if all(self._slow_pow(g, q1 // r) != 1 for r in factors):
                break
            g += 1
        exp = [0] * (2 * q1)
        log = [0] * self.order
        x = 1
        for k in range(q1):
            exp[k] = x
            log[x] = k
            x = _clmul_mod(x, g, self.m, self.poly)
        for k in range(q1, 2 * q1):
            exp[k] = exp[k - q1]
        self._exp = exp
        self._log = log

    def _slow_pow(self, a: int, e: int) -> int:
        r = 1
        while e:
            if e & 1:
                r = _clmul_mod(r, a, self.m, self.poly)
            a = _clmul_mod(a, a, self.m, self.poly)
            e >>= 1
        return r

    def _check_frobenius(self) -> None:
        rng = Rng(b"frobenius-check")
        for _ in range(4):
            a = rng.randbits(self.m)
            x = a
            for _ in range(self.m):
                x = self.mul(x, x)
            if x != a:
                raise ValueError(f"Frobenius identity fails for {self.poly:#x}")

    # identity

    def _key(self):
        return (self.p, self.m, self.poly)

    def __eq__(self, other):
        if not isinstance(other, FieldSpec):
            return NotImplemented
        return self is other or self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        if self.m == 1:
            return f"GF({self.p})"
        return f"GF(2^{self.m})"

    def __reduce__(self):
        return (GF, (self.p, self.m, self.poly))

    @property
    def characteristic(self) -> int:
        return self.p

    @property
    def is_binary(self) -> bool:
        return self.p == 2

    # raw integer arithmetic (canonical ints in, canonical ints out)

    def add(self, a: int, b: int) -> int:
        if self.p == 2:
            return a ^ b
        s = a + b
        return s - self.p if s >= self.p else s

    def sub(self, a: int, b: int) -> int:
        if self.p == 2:
            return a ^ b
        s = a - b
        return s + self.p if s < 0 else s

    def neg(self, a: int) -> int:
        if self.p == 2 or a == 0:
            return a
        return self.p - a

    def mul(self, a: int, b: int) -> int:
        if self.m == 1:
            return a * b % self.p
        if self._log is not None:
            if a == 0 or b == 0:
                return 0
            return self._exp[self._log[a] + self._log[b]]
        return _clmul_mod(a, b, self.m, self.poly)

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        if self.m == 1:
            return pow(a, -1, self.p)
        if self._log is not None:
            return self._exp[(self.order - 1 - self._log[a]) % (self.order - 1)]
        # extended Euclid over GF(2)[x]
        r0, r1 = self.poly, a
        s0, s1 = 0, 1
        while r1:
            shift = r0.bit_length() - r1.bit_length()
            if shift < 0:
                r0, r1 = r1, r0
                s0, s1 = s1, s0
                continue
            r0 ^= r1 << shift
            s0 ^= s1 << shift
        return _pmod(s0, self.poly)

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            a, e = self.inv(a), -e
        if self.m == 1:
            return pow(a, e, self.p)
        if self._log is not None:
            if e == 0:
                return 1
            if a == 0:
                return 0
            return self._exp[self._log[a] * e % (self.order - 1)]
        r = 1
        while e:
            if e & 1:
                r = self.mul(r, a)
            a = self.mul(a, a)
            e >>= 1
        return r

    # element construction and I/O

    def __call__(self, value: int) -> FieldElement:
        if not isinstance(value, int) or isinstance(value, bool):
            raise TypeError("field elements are built from ints")
        if not 0 <= value < self.order:
            raise ValueError(f"{value} is not a canonical element of {self!r}")
        return _new(self, value)

    def elements(self):
        """Iterate over the whole field (small fields only)."""
        return (_new(self, v) for v in range(self.order))

    def random(self, rng: Rng) -> FieldElement:
        if self.p == 2 and self.m > 1:
            return _new(self, rng.randbits(self.m))
        return _new(self, rng.randbelow(self.p))

    def random_vector(self, rng: Rng, k: int) -> tuple[FieldElement, ...]:
        if self.p == 2 and self.m > 1:
            # one draw for the whole vector; masking keeps each entry uniform
            nb = (self.m + 7) // 8
            raw = rng.random_bytes(k * nb)
            mask = (1 << self.m) - 1
            return tuple(_new(self, int.from_bytes(raw[i:i + nb], "big") & mask)
                         for i in range(0, k * nb, nb))
        return tuple(self.random(rng) for _ in range(k))

    def random_nonzero(self, rng: Rng) -> FieldElement:
        while True:
            a = self.random(rng)
            if a.value:
                return a

    def from_bytes(self, data: bytes) -> FieldElement:
        if len(data) != self.nbytes:
            raise ParseError(f"{repr(self)} elements take {self.nbytes} bytes, got {len(data)}")
        v = int.from_bytes(data, "big")
        if v >= self.order:
            raise ParseError(f"value {v:#x} is not canonical in {self!r}")
        return _new(self, v)

    def from_hex(self, text: str) -> FieldElement:
        text = text.strip().lower()
        if text.startswith("0x"):
            text = text[2:]
        if len(text) != 2 * self.nbytes:
            raise ParseError(f"{self!r} hex form has {2 * self.nbytes} digits, got {len(text)}")
        try:
            data = bytes.fromhex(text)
        except ValueError as exc:
            raise ParseError(str(exc)) from None
        return self.from_bytes(data)

    @property
    def bits(self) -> float:
        """log2 of the field order."""
        return self.m * math.log2(self.p)


def _new(field: FieldSpec, value: int) -> FieldElement:
    el = object.__new__(FieldElement)
    el.field = field
    el.value = value
    return el


class FieldElement:
    """Immutable element of a :class:`FieldSpec`."""

    __slots__ = ("field", "value")

    def __init__(self, field: FieldSpec, value: int):
        el = field(value)
        self.field = field
        self.value = el.value

    def _check(self, other) -> FieldSpec:
        if not isinstance(other, FieldElement):
            raise TypeError(f"cannot combine field element with {type(other).__name__}")
        f = self.field
        if other.field is not f and other.field != f:
            raise FieldMismatchError(f"{f!r} vs {other.field!r}")
        return f

    def __add__(self, other):
        f = self.field
        if other.__class__ is not FieldElement or other.field is not f:
            f = self._check(other)
        el = object.__new__(FieldElement)
        el.field = f
        el.value = self.value ^ other.value if f.p == 2 else f.add(self.value, other.value)
        return el

    def __sub__(self, other):
        f = self.field
        if other.__class__ is not FieldElement or other.field is not f:
            f = self._check(other)
        el = object.__new__(FieldElement)
        el.field = f
        el.value = self.value ^ other.value if f.p == 2 else f.sub(self.value, other.value)
        return el

    def __mul__(self, other):
        f = self._check(other)
        return _new(f, f.mul(self.value, other.value))

    def __truediv__(self, other):
        f = self._check(other)
        return _new(f, f.mul(self.value, f.inv(other.value)))

    def __neg__(self):
        return _new(self.field, self.field.neg(self.value))

    def __pow__(self, e: int):
        return _new(self.field, self.field.pow(self.value, e))

    def inverse(self) -> FieldElement:
        return _new(self.field, self.field.inv(self.value))

    def __eq__(self, other):
        if not isinstance(other, FieldElement):
            return NotImplemented
        return self.value == other.value and (self.field is other.field or self.field == other.field)

    def __hash__(self):
        return hash((self.field, self.value))

    def __bool__(self):
        return self.value != 0

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"{self.field!r}(0x{self.hex()})"

    def __reduce__(self):
        return (_new, (self.field, self.value))

    def to_bytes(self) -> bytes:
        return self.value.to_bytes(self.field.nbytes, "big")

    def hex(self) -> str:
        return self.to_bytes().hex()


@functools.lru_cache(maxsize=None)
def GF(p: int, m: int = 1, poly: int | None = None) -> FieldSpec:
    """Cached field constructor: ``GF(7)``, ``GF(2, 86)``."""
    if m > 1 and poly is None:
        poly = table_polynomial(m)
    return FieldSpec(p, m, poly)


PRESETS: dict[str, tuple[int, int]] = {
    "gf2": (2, 1),
    "gf3": (3, 1),
    "gf7": (7, 1),
    "gf8": (2, 3),
    "gf16": (2, 4),
    "gf2_8": (2, 8),
    "gf2_16": (2, 16),
    "gf2_64": (2, 64),
    "gf2_86": (2, 86),
    "gf2_128": (2, 128),
}


def field_from_name(name: str) -> FieldSpec:
    """Resolve a preset name, ``gf2_<m>`` or ``gf<p>`` for prime p."""
    key = name.strip().lower()
    if key in PRESETS:
        return GF(*PRESETS[key])
    if key.startswith("gf2_") and key[4:].isdigit():
        return GF(2, int(key[4:]))
    if key.startswith("gf") and key[2:].isdigit():
        return GF(int(key[2:]))
    raise ValueError(f"unknown field {name!r}; presets: {', '.join(PRESETS)}")


# Function-style aliases for the element operations.

def fe_add(a: FieldElement, b: FieldElement) -> FieldElement:
    return a + b


def fe_sub(a: FieldElement, b: FieldElement) -> FieldElement:
    return a - b


def fe_neg(a: FieldElement) -> FieldElement:
    return -a


def fe_mul(a: FieldElement, b: FieldElement) -> FieldElement:
    return a * b


def fe_inv(a: FieldElement) -> FieldElement:
    return a.inverse()


def fe_pow(a: FieldElement, e: int) -> FieldElement:
    return a ** e


def fe_random(field: FieldSpec, rng: Rng) -> FieldElement:
    return field.random(rng)


def fe_serialize(a: FieldElement) -> bytes:
    return a.to_bytes()


def fe_deserialize(field: FieldSpec, data: bytes) -> FieldElement:
    return field.from_bytes(data)
