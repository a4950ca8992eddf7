"""Built-in adversary strategies.

The suite is a lower bound on what an adversary can do.  Most strategies are
generic: they guess, drop, or add offsets.  :class:`TightShift` is the
exception.  It builds a codeword offset that the AMD decoder accepts for
exactly ``d+1`` values of the hidden ``x``, so its win rate sits right on the
``(d+1)/q`` line.  That makes the bound checks discriminating rather than
trivially satisfied.
"""

from __future__ import annotations

from typing import Optional

from ..gf import FieldElement
from ..sss import (
    SharingScheme,
    ShareVector,
    Vector,
    recovery_coefficients,
    vec_add,
    vec_scale,
    vec_sub,
)
from .core import FORGE_RELAY, IND_RELAY, IND_SSS, SHIFT_ROBUST, RelaySetting


class Adversary:
    name = "adversary"
    games: tuple[str, ...] = ()

    def begin(self, setting, rng) -> None:
        self.setting = setting
        self.rng = rng
        self.scheme: SharingScheme = setting.scheme if isinstance(setting, RelaySetting) else setting
        self.F = self.scheme.field
        self.width = self.scheme.share_length

    # helpers

    def zeros(self) -> Vector:
        return (self.F.zero,) * self.width

    def random_vector(self, k: Optional[int] = None) -> Vector:
        return self.F.random_vector(self.rng, self.width if k is None else k)

    def random_nonzero_vector(self) -> Vector:
        while True:
            v = self.random_vector()
            if any(v):
                return v

    def random_secret(self) -> Vector:
        return self.scheme.random_secret(self.rng)

    def lengths(self) -> tuple[int, ...]:
        return self.setting.lengths

    def __repr__(self):
        return f"<{self.name}>"


def forward(oracles, c, lengths, tamper=None, skip=()) -> list[Optional[Vector]]:
    """Relay every path honestly, adding ``tamper[(i, j)]`` on edge j of path i."""
    tamper = tamper or {}
    out = []
    for i, ci in enumerate(c, start=1):
        if i in skip:
            out.append(None)
            continue
        cur = ci
        for j in range(1, lengths[i - 1] + 1):
            if (i, j) in tamper:
                cur = vec_add(cur, tamper[(i, j)])
            if j < lengths[i - 1]:
                cur = oracles.relay(i, j + 1, cur)
        out.append(cur)
    return out


# -- distinguishers ----------------------------------------------------------

class RandomGuesser(Adversary):
    name = "random-guesser"
    games = (IND_SSS, IND_RELAY)

    def choose_pair(self):
        return self.random_secret(), self.random_secret()

    def guess(self, *args):
        return self.rng.coin()


class Passive(Adversary):
    """Makes no oracle calls and answers with a fixed function of what it sees."""

    name = "passive"
    games = (IND_SSS, IND_RELAY)

    def choose_pair(self):
        k = self.scheme.secret_length
        return (self.F.zero,) * k, (self.F.one,) * k

    def guess(self, *args):
        if len(args) == 2:  # relay game: (c, oracles)
            return args[0][0][0].value & 1
        return 0


class Corrupter(Adversary):
    """Corrupts the first ``k`` paths (or shares) and exploits what it learns.

    Distinguishing: with a qualified view it recovers the secret outright;
    otherwise it guesses from the parity of the learned shares.  Forging: with
    a qualified view it substitutes a complete sharing of another secret;
    otherwise it replaces its shares with learned values plus a random offset
    and relays the rest honestly.
    """

    games = (IND_SSS, IND_RELAY, SHIFT_ROBUST, FORGE_RELAY)

    def __init__(self, k: int, name: Optional[str] = None):
        self.k = k
        self.name = name or f"corrupt-{k}"

    def targets(self) -> list[int]:
        n = self.scheme.n
        paths = range(1, min(self.k, n) + 1)
        if isinstance(self.setting, RelaySetting):
            return [i for i in paths if self.setting.lengths[i - 1] >= 2]
        return list(paths)

    def choose_pair(self):
        k = self.scheme.secret_length
        self.pair = ((self.F.zero,) * k, (self.F.one,) * k)
        return self.pair

    def choose_secret(self):
        self.secret = self.random_secret()
        return self.secret

    def _learn_relay(self, c, oracles) -> tuple[dict, dict]:
        learned, bob_keys = {}, {}
        for i in self.targets():
            l = self.setting.lengths[i - 1]
            q_first, q_mid = oracles.corrupt(i, 2)
            learned[i] = vec_sub(c[i - 1], q_first)
            if l == 2:
                bob_keys[i] = q_mid
            else:
                bob_keys[i] = oracles.corrupt(i, l)[1]
        return learned, bob_keys

    def _decide(self, learned: dict) -> int:
        entries = tuple(learned.get(i) for i in range(1, self.scheme.n + 1))
        if self.scheme.is_qualified(learned):
            out = self.scheme.recover(ShareVector(entries))
            return 1 if out == self.pair[1] else 0
        parity = 0
        for v in learned.values():
            parity ^= v[0].value & 1
        return parity

    def guess(self, *args):
        if len(args) == 2:
            c, oracles = args
            learned, _ = self._learn_relay(c, oracles)
        else:
            (oracles,) = args
            learned = {i: oracles.corrupt(i) for i in self.targets()}
        return self._decide(learned)

    def _replacements(self, learned: dict) -> dict:
        if self.scheme.is_qualified(learned):
            other = self.random_secret()
            while other == self.secret:
                other = self.random_secret()
            fresh = self.scheme.share(other, self.rng)
            return {i: fresh[i - 1] for i in learned}
        return {i: vec_add(s, self.random_nonzero_vector()) for i, s in learned.items()}

    def shift(self, oracles):
        learned = {i: oracles.corrupt(i) for i in self.targets()}
        repl = self._replacements(learned)
        return [repl.get(i, self.zeros()) for i in range(1, self.scheme.n + 1)]

    def forge(self, c, oracles):
        learned, bob_keys = self._learn_relay(c, oracles)
        repl = self._replacements(learned)
        out = forward(oracles, c, self.setting.lengths, skip=set(repl))
        for i, share in repl.items():
            out[i - 1] = vec_add(share, bob_keys[i])
        return out


class FullCorrupter(Corrupter):
    def __init__(self):
        super().__init__(10 ** 9, "full-corrupter")


class Replay(Corrupter):
    """Largest unqualified corruption, plus a replayed relay query on the honest path."""

    def __init__(self):
        super().__init__(0, "replay")

    def begin(self, setting, rng):
        super().begin(setting, rng)
        self.k = self.scheme.structure.t - 1

    def forge(self, c, oracles):
        out = super().forge(c, oracles)
        honest = [i for i in range(1, self.scheme.n + 1)
                  if i not in self.targets() and self.setting.lengths[i - 1] >= 2]
        if honest:
            i = honest[0]
            # node 2 already relayed; a second query must come back empty
            again = oracles.relay(i, 2, vec_add(c[i - 1], self.random_nonzero_vector()))
            self.replay_refused = again is None
        return out


# -- integrity attackers --------------------------------------------------

class Honest(Adversary):
    """Forwards everything untouched (all-zero shifts in the sharing game)."""

    name = "honest"
    games = (SHIFT_ROBUST, FORGE_RELAY)

    def choose_secret(self):
        self.secret = self.random_secret()
        return self.secret

    def shift(self, oracles):
        return [self.zeros() for _ in range(self.scheme.n)]

    def forge(self, c, oracles):
        return forward(oracles, c, self.setting.lengths)


class BlindShift(Honest):
    """Adds an offset to one ciphertext (one share) without corrupting anything."""

    def __init__(self, path: int = 1, edge: int = 1, delta: Optional[Vector] = None,
                 name: str = "blind-shift"):
        self.path = path
        self.edge = edge
        self.delta = delta
        self.name = name

    def _delta(self) -> Vector:
        return tuple(self.delta) if self.delta is not None else self.random_nonzero_vector()

    def shift(self, oracles):
        out = [self.zeros() for _ in range(self.scheme.n)]
        out[self.path - 1] = self._delta()
        return out

    def forge(self, c, oracles):
        edge = min(self.edge, self.setting.lengths[self.path - 1])
        return forward(oracles, c, self.setting.lengths, {(self.path, edge): self._delta()})


class DropPath(Honest):
    def __init__(self, path: Optional[int] = None):
        self.path = path
        self.name = "drop-path"

    def _target(self) -> int:
        return self.path or self.scheme.n

    def shift(self, oracles):
        out: list = [self.zeros() for _ in range(self.scheme.n)]
        out[self._target() - 1] = None
        return out

    def forge(self, c, oracles):
        return forward(oracles, c, self.setting.lengths, skip={self._target()})


class RandomForger(Honest):
    """Delivers fresh uniform values on every path without relaying."""

    name = "random-forger"

    def shift(self, oracles):
        return [self.random_vector() for _ in range(self.scheme.n)]

    def forge(self, c, oracles):
        return [self.random_vector() for _ in range(self.scheme.n)]


# polynomial helpers: lists of canonical ints, lowest degree first

def _pmul(a: list, b: list, F) -> list:
    add, mul = F.add, F.mul
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = add(out[i + j], mul(x, y))
    return out


def _padd(a: list, b: list, F) -> list:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for k, y in enumerate(b):
        out[k] = F.add(out[k], y)
    return out


def _pneg(a: list, F) -> list:
    return [F.neg(x) for x in a]


def _compose_shift(P: list, a: int, F) -> list:
    """Coefficients in y of P(y - a)."""
    out = [0]
    lin = [F.neg(a), 1]
    for coef in reversed(P):
        out = _padd(_pmul(out, lin, F), [coef], F)
    return out


def tight_offset(params, s: Vector, rng) -> tuple[Vector, tuple[FieldElement, ...]]:
    """Codeword offset accepted for exactly d+1 values of the encoder's x.

    Returns ``(offset, roots)``.  ``offset`` is a vector of length d+2 and
    ``roots`` are the x values for which decoding yields ``s + offset[:d]``.

    With offset (ds, a, e) the decoder accepts exactly when
    f(x + a, s + ds) - f(x, s) = e.  The left side minus e is a polynomial of
    degree d+1 in x with leading coefficient (d+2)a, so choosing ds and e to
    make it equal (d+2)a * prod(x - r) pins the accepted x to the roots r.
    """
    F, d = params.field, params.d
    if F.order < d + 2:
        raise ValueError("field too small for d+1 distinct roots")
    sv = [e.value for e in s]
    while True:
        a = F.random_nonzero(rng).value
        roots: list[int] = []
        while len(roots) < d + 1:
            r = F.random(rng).value
            if r not in roots:
                roots.append(r)
        target = [F.mul((d + 2) % F.p, a)]
        for r in roots:
            target = _pmul(target, [F.neg(r), 1], F)
        # f(x + a, s) - f(x, s), which does not depend on ds
        pows = [[1]]
        for _ in range(d + 2):
            pows.append(_pmul(pows[-1], [a, 1], F))
        known = _padd(pows[d + 2], _pneg([0] * (d + 2) + [1], F), F)
        for i, si in enumerate(sv, start=1):
            if si:
                term = _padd(pows[i], _pneg([0] * i + [1], F), F)
                known = _padd(known, [F.mul(si, t) for t in term], F)
        H = _padd(target, _pneg(known, F), F)
        if any(H[d + 1:]):
            raise AssertionError("leading terms failed to cancel")
        # H(x) must equal sum ds_i (x + a)^i - e, i.e. h(y) = H(y - a)
        h = _compose_shift(H[:d + 1], a, F)
        h += [0] * (d + 1 - len(h))
        ds = h[1:d + 1]
        if any(ds):
            return (tuple(F(v) for v in ds) + (F(a), F(F.neg(h[0])))), tuple(F(r) for r in roots)


class TightShift(Honest):
    """Offsets one share so the recovered codeword moves by :func:`tight_offset`."""

    name = "tight-shift"

    def begin(self, setting, rng):
        super().begin(setting, rng)
        if self.scheme.amd is None:
            raise ValueError("tight-shift needs an AMD-robust scheme")

    def choose_secret(self):
        self.secret = self.random_secret()
        return self.secret

    def _share_offset(self) -> Vector:
        offset, self.roots = tight_offset(self.scheme.amd, self.secret, self.rng)
        coeffs = recovery_coefficients(self.scheme.structure, self.F,
                                       list(range(1, self.scheme.n + 1)))
        return vec_scale(coeffs[1].inverse(), offset)

    def shift(self, oracles):
        out = [self.zeros() for _ in range(self.scheme.n)]
        out[0] = self._share_offset()
        return out

    def forge(self, c, oracles):
        return forward(oracles, c, self.setting.lengths, {(1, 1): self._share_offset()})


# -- registry --------------------------------------------------------------

def _factories():
    return {
        "passive": Passive,
        "random-guesser": RandomGuesser,
        "honest": Honest,
        "blind-shift": BlindShift,
        "drop-path": DropPath,
        "random-forger": RandomForger,
        "tight-shift": TightShift,
        "replay": Replay,
        "full-corrupter": FullCorrupter,
    }


ADVERSARY_NAMES = tuple(_factories())


def make_adversary(name: str):
    """Instantiate a built-in strategy; ``corrupt-<k>`` picks a corruption budget."""
    if name.startswith("corrupt-") and name[8:].isdigit():
        return Corrupter(int(name[8:]))
    try:
        return _factories()[name]()
    except KeyError:
        raise ValueError(
            f"unknown adversary {name!r}; choose from {', '.join(ADVERSARY_NAMES)} or corrupt-<k>"
        ) from None


def adversaries_for(game: str, scheme: SharingScheme, qualified: bool = False) -> list:
    """Built-in suite for ``game``; qualified (gate-defeated) strategies only on request."""
    n, t = scheme.n, scheme.structure.t
    suite: list = []
    if game in (IND_SSS, IND_RELAY):
        suite = [Passive(), RandomGuesser(), Corrupter(t - 1), Replay()]
    elif game in (SHIFT_ROBUST, FORGE_RELAY):
        suite = [Honest(), BlindShift(), DropPath(), RandomForger(), Replay(),
                 Corrupter(max(t - 1, 0))]
        if scheme.amd is not None:
            suite.append(TightShift())
        if game == FORGE_RELAY:
            suite.append(BlindShift(path=n, edge=10 ** 9, name="blind-shift-last-edge"))
    else:
        raise ValueError(f"unknown game {game!r}")
    if qualified:
        suite.append(FullCorrupter())
    return suite
