"""The SECOQC parity-check integrity protocol and a key-shift attack on it.

Alice and Bob first agree on a bit string ``S = k1 || k2 || k3 || s`` through
plain XOR secret sharing over ``n`` paths, so Bob actually holds ``S'``.
Alice then picks a random binary matrix ``L``, computes parity bits
``r = L s`` and a Wegman-Carter tag ``T = f_k1(L || r) xor k2``, and sends
``(L, r, T)`` down every path.  Bob checks each path against his own ``S'``.

The attack is a single XOR.  An adversary on path ``n`` adds ``delta2`` to the
``k2`` part of Bob's share and to the tag it forwards.  Bob's pad becomes
``k2 xor delta2``, so the forged tag verifies and every honest tag does not.
The honest paths end up blamed and the corrupted one looks clean.

Bit strings are plain ints together with an explicit bit length.  Bit 0 of a
string is its most significant bit, matching the order in which blocks are
cut for hashing.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import NamedTuple, Optional

from .gf import GF, FieldSpec
from .rng import Rng


class MessageTooLongError(ValueError):
    """Message exceeds the configured MAC input length."""


class Bits(NamedTuple):
    value: int
    length: int

    def __add__(self, other: Bits) -> Bits:  # concatenation
        return Bits((self.value << other.length) | other.value, self.length + other.length)

    def hex(self) -> str:
        return format(self.value, f"0{(self.length + 3) // 4}x") if self.length else ""


@dataclass(frozen=True)
class WcMacKey:
    """``k1`` picks the hash function, ``k2`` and ``k3`` are one-time pads."""

    k1: int
    k2: int
    k3: int
    m: int

    def __post_init__(self):
        for name in ("k1", "k2", "k3"):
            v = getattr(self, name)
            if not 0 <= v < 1 << self.m:
                raise ValueError(f"{name} does not fit in {self.m} bits")

    @classmethod
    def from_bits(cls, key: Bits, m: int) -> WcMacKey:
        if key.length != 3 * m:
            raise ValueError(f"MAC key needs {3 * m} bits, got {key.length}")
        mask = (1 << m) - 1
        return cls(key.value >> 2 * m, (key.value >> m) & mask, key.value & mask, m)

    def to_bits(self) -> Bits:
        return Bits((self.k1 << 2 * self.m) | (self.k2 << self.m) | self.k3, 3 * self.m)


DEFAULT_MAX_BLOCKS = 1 << 16


def poly_hash(k1: int, msg: Bits, field_: FieldSpec, max_blocks: int = DEFAULT_MAX_BLOCKS) -> int:
    """Polynomial-evaluation hash of ``msg`` at ``k1`` over GF(2^m).

    The message is cut into m-bit blocks (the last one zero-padded on the
    right) followed by a block holding the bit length, and the blocks are the
    coefficients of a polynomial evaluated by Horner's rule.  The length block
    keeps messages that differ only in trailing zeros apart.  Two distinct
    messages of at most ``B`` blocks collide with XOR difference ``c`` for at
    most ``B + 1`` values of ``k1``.
    """
    m = field_.m
    nblocks = -(-msg.length // m)
    if nblocks > max_blocks:
        raise MessageTooLongError(f"message of {msg.length} bits exceeds {max_blocks} blocks of {m} bits")
    if msg.length >= 1 << m:
        raise MessageTooLongError(f"bit length {msg.length} does not fit in one block")
    padded = msg.value << (nblocks * m - msg.length)
    mask = (1 << m) - 1
    mul = field_.mul
    acc = 0
    for b in range(nblocks - 1, -1, -1):
        acc = mul(acc ^ ((padded >> (b * m)) & mask), k1)
    return mul(acc ^ msg.length, k1)


def wc_mac(key: WcMacKey, msg: Bits, pad: str = "k2", max_blocks: int = DEFAULT_MAX_BLOCKS) -> int:
    """``f_k1(msg) xor pad``; the first message uses ``k2``, the reply ``k3``."""
    if pad not in ("k2", "k3"):
        raise ValueError("pad must be 'k2' or 'k3'")
    return poly_hash(key.k1, msg, GF(2, key.m), max_blocks) ^ getattr(key, pad)


# -- protocol ----------------------------------------------------------------

@dataclass(frozen=True)
class SecoqcParams:
    n: int = 3          # paths
    m: int = 64         # MAC block size in bits
    m_pc: int = 32      # parity checks
    n_s: int = 128      # secret bits kept after the parity leak

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one path")
        if self.m_pc < 1 or self.n_s < 0:
            raise ValueError("parity dimensions must be positive")
        GF(2, self.m)  # rejects unsupported block sizes early

    @property
    def s_bits(self) -> int:
        return self.n_s + self.m_pc

    @property
    def share_bits(self) -> int:
        return 3 * self.m + self.s_bits

    @property
    def field(self) -> FieldSpec:
        return GF(2, self.m)


def split_secret(params: SecoqcParams, S: Bits) -> tuple[WcMacKey, Bits]:
    key = Bits(S.value >> params.s_bits, 3 * params.m)
    s = Bits(S.value & ((1 << params.s_bits) - 1), params.s_bits)
    return WcMacKey.from_bits(key, params.m), s


def xor_shares(params: SecoqcParams, S: Bits, rng: Rng) -> list[Bits]:
    w = params.share_bits
    parts = [Bits(rng.randbits(w), w) for _ in range(params.n - 1)]
    last = S.value
    for p in parts:
        last ^= p.value
    return parts + [Bits(last, w)]


def xor_combine(shares: list[Bits]) -> Bits:
    acc = 0
    for s in shares:
        acc ^= s.value
    return Bits(acc, shares[0].length)


def parity(rows: tuple[int, ...], s: Bits) -> Bits:
    """``r = L s`` over GF(2); each row is a bit mask over ``s``."""
    v = 0
    for row in rows:
        v = (v << 1) | (bin(row & s.value).count("1") & 1)
    return Bits(v, len(rows))


def mac_message(rows: tuple[int, ...], r: Bits, width: int) -> Bits:
    msg = Bits(0, 0)
    for row in rows:
        msg = msg + Bits(row, width)
    return msg + r


@dataclass(frozen=True)
class PathMessage:
    rows: tuple[int, ...]
    r: Bits
    tag: int


@dataclass
class PathVerdict:
    path: int
    parity_ok: bool
    tag_ok: bool
    tag: str

    @property
    def verdict(self) -> str:
        return "honest" if self.parity_ok and self.tag_ok else "malicious"


@dataclass
class SecoqcRun:
    params: SecoqcParams
    alice_tag: int
    verdicts: list[PathVerdict]
    accept: bool
    reply_ok: bool
    removed_bits: int = 0   # privacy amplification is a placeholder

    def to_json(self) -> dict:
        hexw = self.params.m // 4
        return {
            "params": asdict(self.params),
            "alice_tag": format(self.alice_tag, f"0{hexw}x"),
            "paths": [{"path": v.path, "parity_ok": v.parity_ok, "tag_ok": v.tag_ok,
                       "tag": v.tag, "verdict": v.verdict} for v in self.verdicts],
            "accept": self.accept,
            "reply_ok": self.reply_ok,
            "removed_bits": self.removed_bits,
        }


def run_protocol(
    params: SecoqcParams,
    rng: Rng,
    key_shift: int = 0,
    tag_shift: Optional[dict[int, int]] = None,
    s_flip: Optional[int] = None,
) -> SecoqcRun:
    """One execution; the keyword arguments describe what the adversary does.

    ``key_shift`` is XORed into the ``k2`` part of Bob's copy of share ``n``.
    ``tag_shift[i]`` is XORed into the tag delivered on path ``i``.
    ``s_flip`` flips that bit of ``s`` in Bob's copy of share 1.
    """
    tag_shift = tag_shift or {}
    p = params
    w = p.share_bits
    S = Bits(rng.spawn("secret").randbits(w), w)
    shares = xor_shares(p, S, rng.spawn("shares"))

    # step 1: Bob's view of the shares
    bob_shares = list(shares)
    if key_shift:
        pos = p.m + p.s_bits  # k2 sits above k3 and s
        bob_shares[-1] = Bits(bob_shares[-1].value ^ (key_shift << pos), w)
    if s_flip is not None:
        if not 0 <= s_flip < p.s_bits:
            raise ValueError(f"bit {s_flip} outside s")
        bob_shares[0] = Bits(bob_shares[0].value ^ (1 << (p.s_bits - 1 - s_flip)), w)
    key, s = split_secret(p, S)
    key_b, s_b = split_secret(p, xor_combine(bob_shares))

    # step 2: parity check and tag, same message on every path
    r_lam = rng.spawn("parity-matrix")
    rows = tuple(r_lam.randbits(p.s_bits) for _ in range(p.m_pc))
    r = parity(rows, s)
    T = wc_mac(key, mac_message(rows, r, p.s_bits))
    verdicts = []
    hexw = p.m // 4
    for i in range(1, p.n + 1):
        got = PathMessage(rows, r, T ^ tag_shift.get(i, 0))
        parity_ok = parity(got.rows, s_b) == got.r
        tag_ok = wc_mac(key_b, mac_message(got.rows, got.r, p.s_bits)) == got.tag
        verdicts.append(PathVerdict(i, parity_ok, tag_ok, format(got.tag, f"0{hexw}x")))
    accept = any(v.parity_ok and v.tag_ok for v in verdicts)

    # step 3: Bob authenticates his decision with the second pad
    b = Bits(int(accept), 1)
    reply_ok = wc_mac(key, b, pad="k3") == wc_mac(key_b, b, pad="k3")
    # step 4: bit removal for the parity leak is not modelled
    return SecoqcRun(p, T, verdicts, accept, reply_ok)


def secoqc_honest_run(params: SecoqcParams, rng: Rng) -> SecoqcRun:
    return run_protocol(params, rng)


@dataclass
class AttackReport:
    params: SecoqcParams
    delta2: int
    run: SecoqcRun
    identities: list[dict] = field(default_factory=list)

    @property
    def attacked_path(self) -> int:
        return self.params.n

    @property
    def success(self) -> bool:
        """Bob accepts, trusts the corrupted path and blames every other one."""
        v = self.run.verdicts
        return (
            self.run.accept
            and v[-1].tag_ok
            and all(not x.tag_ok for x in v[:-1])
        )

    def to_json(self) -> dict:
        out = self.run.to_json()
        out.update(
            delta2=format(self.delta2, f"0{self.params.m // 4}x"),
            attacked_path=self.attacked_path,
            identities=self.identities,
            success=self.success,
        )
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def secoqc_attack(params: SecoqcParams, delta2: int, rng: Rng) -> AttackReport:
    """Shift Bob's ``k2`` and path n's tag by ``delta2``.

    ``delta2 = 0`` is allowed and shows the degenerate case where nothing
    changes and every path verifies.
    """
    if not 0 <= delta2 < 1 << params.m:
        raise ValueError(f"delta2 must fit in {params.m} bits")
    n = params.n
    run = run_protocol(params, rng, key_shift=delta2, tag_shift={n: delta2})
    hexw = params.m // 4
    tn = int(run.verdicts[-1].tag, 16)
    identities = []
    for v in run.verdicts[:-1]:
        diff = int(v.tag, 16) ^ tn
        identities.append({
            "path": v.path,
            "statement": f"T_{v.path} xor T_{n} = {diff:0{hexw}x}",
            "equals_delta2": diff == delta2,
        })
    return AttackReport(params, delta2, run, identities)
