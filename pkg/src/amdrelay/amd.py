"""Algebraic manipulation detection code over a finite field.

A message ``s`` of ``d`` field elements is encoded systematically as
``(s, x, f(x, s))`` with ``x`` uniform and

    f(x, s) = x^(d+2) + s_1 x + s_2 x^2 + ... + s_d x^d.

Decoding recomputes the tag and returns ``None`` (the rejection symbol) on a
mismatch.  Any fixed additive offset applied to a codeword slips through
undetected with probability at most ``(d+1)/q`` over the choice of ``x``;
:func:`delta_oracle` computes the exact worst case for small fields by
enumeration.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .gf import FieldElement, FieldSpec, _new
from .rng import Rng

Message = tuple[FieldElement, ...]


class CodewordLengthError(ValueError):
    """Message or codeword has the wrong number of field elements."""


@dataclass(frozen=True)
class AmdParams:
    field: FieldSpec
    d: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("message length d must be positive")
        if (self.d + 2) % self.field.p == 0:
            raise ValueError(
                f"d+2 = {self.d + 2} is divisible by the characteristic {self.field.p}"
            )

    @property
    def codeword_length(self) -> int:
        return self.d + 2

    @property
    def overhead_elements(self) -> int:
        return 2

    def conjectured_delta(self) -> Fraction:
        """Closed-form bound (d+1)/q; exact values come from :func:`delta_oracle`."""
        return Fraction(self.d + 1, self.field.order)


@dataclass(frozen=True)
class AmdCodeword:
    s: Message
    x: FieldElement
    tag: FieldElement

    def as_vector(self) -> Message:
        return (*self.s, self.x, self.tag)

    @classmethod
    def from_vector(cls, params: AmdParams, vec: Sequence[FieldElement]) -> AmdCodeword:
        if len(vec) != params.codeword_length:
            raise CodewordLengthError(
                f"codeword has {len(vec)} elements, expected {params.codeword_length}"
            )
        *s, x, tag = vec
        return cls(tuple(s), x, tag)

    def __add__(self, other: AmdCodeword) -> AmdCodeword:
        if len(self.s) != len(other.s):
            raise CodewordLengthError("codewords of different length")
        return AmdCodeword(
            tuple(a + b for a, b in zip(self.s, other.s)),
            self.x + other.x,
            self.tag + other.tag,
        )

    def to_json(self) -> dict:
        return {"s": [e.hex() for e in self.s], "x": self.x.hex(), "tag": self.tag.hex()}

    @classmethod
    def from_json(cls, params: AmdParams, obj: dict) -> AmdCodeword:
        F = params.field
        s = tuple(F.from_hex(h) for h in obj["s"])
        if len(s) != params.d:
            raise CodewordLengthError(f"codeword message part has {len(s)} elements, expected {params.d}")
        return cls(s, F.from_hex(obj["x"]), F.from_hex(obj["tag"]))


def _check_message(params: AmdParams, s: Sequence[FieldElement]) -> None:
    if len(s) != params.d:
        raise CodewordLengthError(f"message has {len(s)} elements, expected {params.d}")


def tag_eval(params: AmdParams, x: FieldElement, s: Sequence[FieldElement]) -> FieldElement:
    """f(x, s) by Horner's rule, highest-degree coefficient first."""
    _check_message(params, s)
    F = params.field
    xv = x.value
    # f/x = x^(d+1) + s_d x^(d-1) + ... + s_1; seeding with x covers the
    # leading 1 and the zero x^d coefficient.
    acc = xv
    for coef in reversed(s):
        acc = F.add(F.mul(acc, xv), coef.value)
    return _new(F, F.mul(acc, xv))


def tag_eval_naive(params: AmdParams, x: FieldElement, s: Sequence[FieldElement]) -> FieldElement:
    """Power-sum evaluation, kept as an independent check on :func:`tag_eval`."""
    _check_message(params, s)
    total = x ** (params.d + 2)
    for i, si in enumerate(s, start=1):
        total = total + si * x ** i
    return total


def amd_encode(params: AmdParams, s: Sequence[FieldElement], rng: Rng) -> AmdCodeword:
    s = tuple(s)
    x = params.field.random(rng)
    return AmdCodeword(s, x, tag_eval(params, x, s))


def amd_decode(params: AmdParams, c: AmdCodeword | Sequence[FieldElement]) -> Optional[Message]:
    """Message if the tag verifies, else ``None``.

    A codeword of the wrong shape raises :class:`CodewordLengthError`; ``None``
    is reserved for a well-formed codeword that fails verification.
    """
    if not isinstance(c, AmdCodeword):
        c = AmdCodeword.from_vector(params, tuple(c))
    _check_message(params, c.s)
    if tag_eval(params, c.x, c.s) == c.tag:
        return c.s
    return None


# -- exhaustive delta oracle ----------------------------------------------

ORACLE_MAX_ORDER = 64
ORACLE_MAX_D = 2
ORACLE_MAX_WORK = 1 << 26


class OracleTooLargeError(ValueError):
    pass


def _mul_table(F: FieldSpec) -> np.ndarray:
    q = F.order
    t = np.empty((q, q), dtype=np.int64)
    for a in range(q):
        for b in range(q):
            t[a, b] = F.mul(a, b)
    return t


def delta_oracle(params: AmdParams) -> Fraction:
    """Exact max over s and nonzero offsets of Pr_x[undetected manipulation].

    For a message ``s`` and offset ``(ds, dx, dt)`` the decoder is fooled by
    exactly those ``x`` with ``f(x+dx, s+ds) - f(x, s) = dt`` (and ``ds`` must
    be nonzero, otherwise decoding returns ``s`` itself).  So for each
    ``(s, ds, dx)`` the worst ``dt`` is the most frequent value of that
    difference as ``x`` ranges over the field.  Enumerated in full.
    """
    F, d = params.field, params.d
    q = F.order
    if q > ORACLE_MAX_ORDER or d > ORACLE_MAX_D or q ** (2 * d + 2) > ORACLE_MAX_WORK:
        raise OracleTooLargeError(
            f"exhaustive oracle refuses q={q}, d={d} (limits q<={ORACLE_MAX_ORDER}, "
            f"d<={ORACLE_MAX_D}, q^(2d+2)<={ORACLE_MAX_WORK})"
        )
    mul = _mul_table(F)
    if F.p == 2:
        add = np.bitwise_xor.outer(np.arange(q), np.arange(q))
    else:
        add = np.add.outer(np.arange(q), np.arange(q)) % q
    neg = np.array([F.neg(v) for v in range(q)])
    xs = np.arange(q)
    powers = [np.ones(q, dtype=np.int64)]
    for _ in range(d + 2):
        powers.append(mul[powers[-1], xs])

    def f_vals(xv: np.ndarray, s: tuple[int, ...]) -> np.ndarray:
        # tag values for a fixed s over the array of x values
        pw = [np.ones_like(xv)]
        for _ in range(d + 2):
            pw.append(mul[pw[-1], xv])
        acc = pw[d + 2]
        for i, si in enumerate(s, start=1):
            acc = add[acc, mul[si, pw[i]]]
        return acc

    messages = list(np.ndindex(*([q] * d)))
    worst = 0
    for s in messages:
        base = f_vals(xs, s)
        for dx in range(q):
            shifted_x = add[xs, dx]
            for ds in messages:
                if not any(ds):
                    continue
                s2 = tuple(add[a, b] for a, b in zip(s, ds))
                diff = add[f_vals(shifted_x, s2), neg[base]]
                worst = max(worst, int(np.bincount(diff, minlength=q).max()))
                if worst == q:
                    return Fraction(1)
    return Fraction(worst, q)


def overhead_bits(params: AmdParams) -> float:
    """Encoded length minus message length, in bits."""
    return params.overhead_elements * params.field.bits
