"""Linear secret sharing: additive n-of-n and Shamir t-of-n.

Vector secrets are shared coordinate by coordinate, so every share is a tuple
with the same length as the secret.  A missing share is ``None``; sums that
touch a missing share are missing too.

The robust variant encodes the secret with the AMD code first and shares the
codeword (:func:`share_star`), then decodes after recovery
(:func:`recover_star`).
"""

from __future__ import annotations

import operator
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .amd import AmdParams, amd_decode, amd_encode
from .gf import FieldElement, FieldSpec
from .rng import Rng

Vector = tuple[FieldElement, ...]

ADDITIVE = "additive"
THRESHOLD = "threshold"


class ShareLengthError(ValueError):
    """Present shares disagree in length, or the vector has the wrong size."""


@dataclass(frozen=True)
class AccessStructure:
    kind: str
    n: int
    t: int

    def __post_init__(self):
        if self.kind not in (ADDITIVE, THRESHOLD):
            raise ValueError(f"unknown scheme kind {self.kind!r}")
        if self.n < 1:
            raise ValueError("need at least one share")
        if not 1 <= self.t <= self.n:
            raise ValueError(f"threshold {self.t} outside 1..{self.n}")
        if self.kind == ADDITIVE and self.t != self.n:
            raise ValueError("additive sharing is n-of-n")

    @classmethod
    def additive(cls, n: int) -> AccessStructure:
        return cls(ADDITIVE, n, n)

    @classmethod
    def threshold(cls, t: int, n: int) -> AccessStructure:
        return cls(THRESHOLD, n, t)

    def is_qualified(self, indices: Iterable[int]) -> bool:
        """Whether the 1-based share indices determine the secret."""
        return len({i for i in indices if 1 <= i <= self.n}) >= self.t

    def check_field(self, field: FieldSpec) -> None:
        if self.kind == THRESHOLD and self.n >= field.order:
            raise ValueError(f"Shamir sharing needs n < q, got n={self.n}, q={field.order}")


@dataclass(frozen=True)
class ShareVector:
    entries: tuple[Optional[Vector], ...]

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, k):
        return self.entries[k]

    def present(self) -> list[int]:
        """1-based indices of the shares that are not missing."""
        return [i for i, e in enumerate(self.entries, start=1) if e is not None]

    def width(self) -> Optional[int]:
        lengths = {len(e) for e in self.entries if e is not None}
        if len(lengths) > 1:
            raise ShareLengthError(f"present shares have lengths {sorted(lengths)}")
        return lengths.pop() if lengths else None

    def __add__(self, other: ShareVector) -> ShareVector:
        if len(self) != len(other):
            raise ShareLengthError("share vectors of different size")
        return ShareVector(tuple(vec_add(a, b) for a, b in zip(self.entries, other.entries)))

    def with_entry(self, i: int, value: Optional[Vector]) -> ShareVector:
        entries = list(self.entries)
        entries[i - 1] = value
        return ShareVector(tuple(entries))

    def to_json(self) -> dict:
        return {"entries": [None if e is None else [x.hex() for x in e] for e in self.entries]}

    @classmethod
    def from_json(cls, field: FieldSpec, obj: dict) -> ShareVector:
        return cls(tuple(
            None if e is None else tuple(field.from_hex(h) for h in e)
            for e in obj["entries"]
        ))


def vec_add(a: Optional[Vector], b: Optional[Vector]) -> Optional[Vector]:
    """Componentwise sum with ``None`` absorbing."""
    if a is None or b is None:
        return None
    if len(a) != len(b):
        raise ShareLengthError(f"cannot add vectors of length {len(a)} and {len(b)}")
    return tuple(map(operator.add, a, b))


def vec_sub(a: Optional[Vector], b: Optional[Vector]) -> Optional[Vector]:
    if a is None or b is None:
        return None
    if len(a) != len(b):
        raise ShareLengthError(f"cannot subtract vectors of length {len(a)} and {len(b)}")
    return tuple(map(operator.sub, a, b))


def vec_scale(c: FieldElement, a: Optional[Vector]) -> Optional[Vector]:
    if a is None:
        return None
    return tuple(c * x for x in a)


def _field_of(secret: Sequence[FieldElement]) -> FieldSpec:
    if not secret:
        raise ValueError("secret must be non-empty")
    return secret[0].field


def additive_shares(secret: Sequence[FieldElement], randoms: Sequence[Vector]) -> ShareVector:
    """Complete ``n-1`` given random shares with the balancing last share."""
    last = tuple(secret)
    for r in randoms:
        last = vec_sub(last, r)
    return ShareVector((*(tuple(r) for r in randoms), last))


def shamir_shares(
    secret: Sequence[FieldElement], coefficients: Sequence[Vector], n: int
) -> ShareVector:
    """Evaluate per-coordinate polynomials at 1..n.

    ``coefficients[k][c]`` is the coefficient of x^(k+1) for coordinate ``c``;
    the constant term of coordinate ``c`` is ``secret[c]``.
    """
    F = _field_of(secret)
    entries = []
    for i in range(1, n + 1):
        xi = F(i % F.order)
        share = []
        for c, s in enumerate(secret):
            acc = F.zero
            for k in range(len(coefficients) - 1, -1, -1):
                acc = (acc + coefficients[k][c]) * xi
            share.append(acc + s)
        entries.append(tuple(share))
    return ShareVector(tuple(entries))


def share(structure: AccessStructure, secret: Sequence[FieldElement], rng: Rng) -> ShareVector:
    F = _field_of(secret)
    structure.check_field(F)
    width = len(secret)
    if structure.kind == ADDITIVE:
        randoms = [F.random_vector(rng, width) for _ in range(structure.n - 1)]
        return additive_shares(secret, randoms)
    coeffs = [F.random_vector(rng, width) for _ in range(structure.t - 1)]
    return shamir_shares(secret, coeffs, structure.n)


def lagrange_at_zero(field: FieldSpec, points: Sequence[int]) -> list[FieldElement]:
    """Coefficients l_k with P(0) = sum l_k P(points[k])."""
    xs = [field(p % field.order) for p in points]
    out = []
    for k, xk in enumerate(xs):
        num, den = field.one, field.one
        for m, xm in enumerate(xs):
            if m != k:
                num = num * xm
                den = den * (xm - xk)
        out.append(num / den)
    return out


def recovery_coefficients(
    structure: AccessStructure, field: FieldSpec, present: Sequence[int]
) -> Optional[dict[int, FieldElement]]:
    """Linear map used by :func:`recover` for a given presence pattern.

    Returns ``{index: coefficient}`` over the shares actually combined, or
    ``None`` when the present shares are not enough to recover.
    """
    present = sorted(present)
    if structure.kind == ADDITIVE:
        if len(present) < structure.n:
            return None
        return {i: field.one for i in present}
    if len(present) < structure.t:
        return None
    chosen = present[:structure.t]
    return dict(zip(chosen, lagrange_at_zero(field, chosen)))


def recover(structure: AccessStructure, shares: ShareVector) -> Optional[Vector]:
    if len(shares) != structure.n:
        raise ShareLengthError(f"expected {structure.n} shares, got {len(shares)}")
    width = shares.width()
    if width is None:
        return None
    present = shares.present()
    if structure.kind == ADDITIVE:
        if len(present) < structure.n:
            return None
        total = shares[0]
        for e in shares.entries[1:]:
            total = vec_add(total, e)
        return total
    field = next(e for e in shares.entries if e is not None)[0].field
    coeffs = recovery_coefficients(structure, field, present)
    if coeffs is None:
        return None
    total = None
    for i, lam in coeffs.items():
        term = vec_scale(lam, shares[i - 1])
        total = term if total is None else vec_add(total, term)
    return total


def share_star(
    structure: AccessStructure, params: AmdParams, secret: Sequence[FieldElement], rng: Rng
) -> ShareVector:
    codeword = amd_encode(params, secret, rng)
    return share(structure, codeword.as_vector(), rng)


def recover_star(
    structure: AccessStructure, params: AmdParams, shares: ShareVector
) -> Optional[Vector]:
    combined = recover(structure, shares)
    if combined is None:
        return None
    return amd_decode(params, combined)


@dataclass(frozen=True)
class SharingScheme:
    """A sharing scheme as the games see it: plain, or AMD-robust when ``amd`` is set."""

    structure: AccessStructure
    field: FieldSpec
    amd: Optional[AmdParams] = None
    secret_length: int = 1

    def __post_init__(self):
        self.structure.check_field(self.field)
        if self.amd is not None:
            if self.amd.field != self.field:
                raise ValueError("AMD field differs from sharing field")
            object.__setattr__(self, "secret_length", self.amd.d)

    @classmethod
    def robust(cls, structure: AccessStructure, params: AmdParams) -> SharingScheme:
        return cls(structure, params.field, params)

    @property
    def n(self) -> int:
        return self.structure.n

    @property
    def share_length(self) -> int:
        return self.amd.codeword_length if self.amd else self.secret_length

    def is_qualified(self, indices: Iterable[int]) -> bool:
        return self.structure.is_qualified(indices)

    def random_secret(self, rng: Rng) -> Vector:
        return self.field.random_vector(rng, self.secret_length)

    def share(self, secret: Sequence[FieldElement], rng: Rng) -> ShareVector:
        if len(secret) != self.secret_length:
            raise ShareLengthError(f"secret has {len(secret)} elements, expected {self.secret_length}")
        if self.amd is not None:
            return share_star(self.structure, self.amd, secret, rng)
        return share(self.structure, secret, rng)

    def recover(self, shares: ShareVector) -> Optional[Vector]:
        if self.amd is not None:
            return recover_star(self.structure, self.amd, shares)
        return recover(self.structure, shares)
