"""The four security games and a Monte Carlo driver.

Each ``*_trial`` function plays one game and returns a :class:`Trial`.  The
trial generator is split into named child streams ("challenge", "share",
"keys", "adversary"), so two games given the same trial generator share
exactly the randomness they have in common.  The coupling harness in
:mod:`amdrelay.games.reductions` relies on that.

Adversaries follow a small duck-typed protocol.  ``begin(setting, rng)``
resets per-trial state.  The stage methods depend on the game:

============  =======================  =====================================
game          first stage              second stage
============  =======================  =====================================
ind-sss       ``choose_pair()``        ``guess(oracles) -> 0 | 1``
shift-robust  ``choose_secret()``      ``shift(oracles) -> [a_i | None]``
ind-relay     ``choose_pair()``        ``guess(c, oracles) -> 0 | 1``
forge-relay   ``choose_secret()``      ``forge(c, oracles) -> [c'_i | None]``
============  =======================  =====================================

Share and path indices are 1-based throughout.
"""

from __future__ import annotations

import functools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from ..amd import AmdParams, OracleTooLargeError, delta_oracle
from ..relay import (
    DeletedKeyError,
    KeyTable,
    RelayLedger,
    RelayNetwork,
    TopologyError,
    alice_send,
    bob_decrypt,
    corrupt,
    relay_hop,
)
from ..rng import Rng
from ..sss import SharingScheme, ShareVector, Vector, vec_add
from .report import CENTERED, UPPER, GameReport

IND_SSS = "ind-sss"
SHIFT_ROBUST = "shift-robust"
IND_RELAY = "ind-relay"
FORGE_RELAY = "forge-relay"
GAMES = (IND_SSS, SHIFT_ROBUST, IND_RELAY, FORGE_RELAY)

DYNAMIC = "dynamic"
STATIC = "static"


class OracleMisuse(Exception):
    """The adversary broke the game's interface; the trial is lost."""


@dataclass(frozen=True)
class RelaySetting:
    """Public parameters of a relay game."""

    scheme: SharingScheme
    lengths: tuple[int, ...]
    epsilon: Fraction = Fraction(0)
    corruption: str = DYNAMIC

    def __post_init__(self):
        object.__setattr__(self, "lengths", tuple(self.lengths))
        object.__setattr__(self, "epsilon", Fraction(self.epsilon))
        if len(self.lengths) != self.scheme.n:
            raise ValueError(f"{len(self.lengths)} path lengths for {self.scheme.n} shares")
        if self.corruption not in (DYNAMIC, STATIC):
            raise ValueError(f"unknown corruption mode {self.corruption!r}")

    @property
    def n(self) -> int:
        return self.scheme.n

    @property
    def field(self):
        return self.scheme.field

    @property
    def ell(self) -> int:
        return max(self.lengths)

    def network(self) -> RelayNetwork:
        return RelayNetwork(self.n, self.lengths, self.scheme.field,
                            self.scheme.share_length, self.epsilon)


@dataclass
class Trial:
    win: bool
    misuse: bool = False
    raw: bool = False          # win condition ignoring the qualification gate
    corrupted: frozenset = frozenset()
    detail: dict = field(default_factory=dict)


def sample_keys(net: RelayNetwork, rng: Rng) -> dict[tuple[int, int], Vector]:
    return {(i, j): net.field.random_vector(rng, net.width) for i, j in net.edges()}


# -- validation helpers ----------------------------------------------------

def _check_vector(v, width: int, field, what: str) -> Vector:
    if not isinstance(v, (tuple, list)) or len(v) != width:
        raise OracleMisuse(f"{what} must be a vector of {width} field elements")
    v = tuple(v)
    for e in v:
        if getattr(e, "field", None) != field:
            raise OracleMisuse(f"{what} holds a value outside {field!r}")
    return v


def _check_secret(scheme: SharingScheme, s) -> Vector:
    return _check_vector(s, scheme.secret_length, scheme.field, "secret")


def _check_optional_vectors(vs, n: int, width: int, field, what: str) -> list[Optional[Vector]]:
    if not isinstance(vs, (tuple, list)) or len(vs) != n:
        raise OracleMisuse(f"{what} must list {n} entries")
    return [None if v is None else _check_vector(v, width, field, f"{what}[{k}]")
            for k, v in enumerate(vs, start=1)]


def _check_bit(b) -> int:
    if b not in (0, 1):
        raise OracleMisuse("guess must be 0 or 1")
    return int(b)


# -- oracles ---------------------------------------------------------------

class SssOracles:
    """``corrupt(i)`` for the secret-sharing games."""

    def __init__(self, shares: ShareVector):
        self._shares = shares
        self.corrupted: set[int] = set()

    def corrupt(self, i: int) -> Vector:
        if not isinstance(i, int) or not 1 <= i <= len(self._shares):
            raise OracleMisuse(f"no share {i!r}")
        self.corrupted.add(i)
        return self._shares[i - 1]


class RelayOracles:
    """``relay(i, j, c)`` and ``corrupt(i, j)`` backed by a live network."""

    def __init__(self, net: RelayNetwork, keys: KeyTable, ledger: RelayLedger,
                 corruption: str = DYNAMIC):
        self.net = net
        self.keys = keys
        self.ledger = ledger
        self.corruption = corruption

    def relay(self, i: int, j: int, c) -> Optional[Vector]:
        try:
            self.net.check_relay_node(i, j)
        except (TopologyError, TypeError) as exc:
            raise OracleMisuse(str(exc)) from None
        if (i, j) in self.ledger.relayed:
            return None
        c = _check_vector(c, self.net.width, self.net.field, "relay input")
        return relay_hop(self.net, self.keys, self.ledger, i, j, c)

    def corrupt(self, i: int, j: int) -> Optional[tuple[Vector, Vector]]:
        try:
            self.net.check_relay_node(i, j)
        except (TopologyError, TypeError) as exc:
            raise OracleMisuse(str(exc)) from None
        if self.corruption == STATIC and self.ledger.relayed:
            raise OracleMisuse("static corruption must precede every relay")
        return corrupt(self.net, self.keys, self.ledger, i, j)

    @property
    def corrupted(self) -> set[int]:
        return self.ledger.corrupted


# -- trials ------------------------------------------------------------------

def _streams(rng: Rng):
    return (rng.spawn("challenge"), rng.spawn("share"), rng.spawn("keys"),
            rng.spawn("adversary"))


def ind_sss_trial(scheme: SharingScheme, adversary, rng: Rng, gate: bool = True) -> Trial:
    r_chal, r_share, _, r_adv = _streams(rng)
    b = r_chal.coin()
    oracles = None
    try:
        adversary.begin(scheme, r_adv)
        s0, s1 = adversary.choose_pair()
        pair = (_check_secret(scheme, s0), _check_secret(scheme, s1))
        shares = scheme.share(pair[b], r_share)
        oracles = SssOracles(shares)
        guess = _check_bit(adversary.guess(oracles))
    except OracleMisuse as exc:
        T = frozenset(oracles.corrupted) if oracles else frozenset()
        return Trial(False, misuse=True, corrupted=T, detail={"error": str(exc)})
    T = frozenset(oracles.corrupted)
    raw = guess == b
    unq = not scheme.is_qualified(T)
    return Trial(raw and (unq or not gate), raw=raw, corrupted=T)


def _apply_shifts(shares: ShareVector, shifts: Sequence[Optional[Vector]],
                  corrupted: set[int]) -> ShareVector:
    out = []
    for i, (s, a) in enumerate(zip(shares, shifts), start=1):
        out.append(a if i in corrupted else vec_add(s, a))
    return ShareVector(tuple(out))


def shift_robust_trial(scheme: SharingScheme, adversary, rng: Rng, gate: bool = True) -> Trial:
    _, r_share, _, r_adv = _streams(rng)
    oracles = None
    try:
        adversary.begin(scheme, r_adv)
        s = _check_secret(scheme, adversary.choose_secret())
        shares = scheme.share(s, r_share)
        oracles = SssOracles(shares)
        shifts = _check_optional_vectors(adversary.shift(oracles), scheme.n,
                                         scheme.share_length, scheme.field, "shift")
    except OracleMisuse as exc:
        T = frozenset(oracles.corrupted) if oracles else frozenset()
        return Trial(False, misuse=True, corrupted=T, detail={"error": str(exc)})
    T = frozenset(oracles.corrupted)
    out = scheme.recover(_apply_shifts(shares, shifts, T))
    raw = out is not None and out != s
    unq = not scheme.is_qualified(T)
    return Trial(raw and (unq or not gate), raw=raw, corrupted=T,
                 detail={"rejected": out is None})


def _relay_setup(setting: RelaySetting, shares: ShareVector, r_keys: Rng):
    net = setting.network()
    keys = KeyTable(net, sample_keys(net, r_keys))
    ledger = RelayLedger()
    c = alice_send(net, keys, ledger, shares)
    return net, keys, ledger, c


def ind_relay_trial(setting: RelaySetting, adversary, rng: Rng, gate: bool = True) -> Trial:
    scheme = setting.scheme
    r_chal, r_share, r_keys, r_adv = _streams(rng)
    b = r_chal.coin()
    oracles = None
    try:
        adversary.begin(setting, r_adv)
        s0, s1 = adversary.choose_pair()
        pair = (_check_secret(scheme, s0), _check_secret(scheme, s1))
        shares = scheme.share(pair[b], r_share)
        net, keys, ledger, c = _relay_setup(setting, shares, r_keys)
        oracles = RelayOracles(net, keys, ledger, setting.corruption)
        guess = _check_bit(adversary.guess(tuple(c), oracles))
    except (OracleMisuse, DeletedKeyError) as exc:
        T = frozenset(oracles.corrupted) if oracles else frozenset()
        return Trial(False, misuse=True, corrupted=T, detail={"error": str(exc)})
    T = frozenset(oracles.corrupted)
    raw = guess == b
    unq = not scheme.is_qualified(T)
    return Trial(raw and (unq or not gate), raw=raw, corrupted=T)


def forge_relay_trial(setting: RelaySetting, adversary, rng: Rng, gate: bool = True) -> Trial:
    scheme = setting.scheme
    _, r_share, r_keys, r_adv = _streams(rng)
    oracles = None
    try:
        adversary.begin(setting, r_adv)
        s = _check_secret(scheme, adversary.choose_secret())
        shares = scheme.share(s, r_share)
        net, keys, ledger, c = _relay_setup(setting, shares, r_keys)
        oracles = RelayOracles(net, keys, ledger, setting.corruption)
        final = _check_optional_vectors(adversary.forge(tuple(c), oracles), scheme.n,
                                        scheme.share_length, scheme.field, "delivery")
    except (OracleMisuse, DeletedKeyError) as exc:
        T = frozenset(oracles.corrupted) if oracles else frozenset()
        return Trial(False, misuse=True, corrupted=T, detail={"error": str(exc)})
    T = frozenset(oracles.corrupted)
    received = bob_decrypt(net, keys, ledger, final)
    out = scheme.recover(received)
    raw = out is not None and out != s
    unq = not scheme.is_qualified(T)
    return Trial(raw and (unq or not gate), raw=raw, corrupted=T,
                 detail={"rejected": out is None})


# -- bounds ----------------------------------------------------------------

@functools.lru_cache(maxsize=None)
def amd_delta(params: AmdParams) -> tuple[Fraction, str]:
    """Exact delta where enumeration is feasible, else the (d+1)/q conjecture."""
    try:
        return delta_oracle(params), "oracle"
    except OracleTooLargeError:
        return params.conjectured_delta(), "conjectured"


def scheme_delta(scheme: SharingScheme) -> tuple[Fraction, str]:
    if scheme.amd is None:
        return Fraction(1), "no-amd"
    return amd_delta(scheme.amd)


# -- Monte Carlo driver ----------------------------------------------------

def _play_chunk(trial_fn: Callable, setting, adversary, seed: int, gate: bool,
                start: int, stop: int) -> tuple[int, int, int]:
    master = Rng(seed)
    wins = raw = misuse = 0
    for k in range(start, stop):
        t = trial_fn(setting, adversary, master.spawn("trial", k), gate)
        wins += t.win
        raw += t.raw
        misuse += t.misuse
    return wins, raw, misuse


def play(trial_fn: Callable, setting, adversary, trials: int, seed: int,
         gate: bool = True, jobs: int = 1) -> tuple[int, int, int]:
    """Run ``trials`` independent trials; totals do not depend on ``jobs``."""
    if trials < 0:
        raise ValueError("trials must be non-negative")
    if jobs <= 1 or trials < 2 * jobs:
        return _play_chunk(trial_fn, setting, adversary, seed, gate, 0, trials)
    bounds = [trials * k // jobs for k in range(jobs + 1)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        parts = pool.map(_play_chunk, *zip(*[
            (trial_fn, setting, adversary, seed, gate, bounds[k], bounds[k + 1])
            for k in range(jobs)
        ]))
        totals = [0, 0, 0]
        for part in parts:
            for idx in range(3):
                totals[idx] += part[idx]
    return tuple(totals)


def _scheme_params(scheme: SharingScheme) -> dict:
    out = {
        "field": repr(scheme.field),
        "scheme": scheme.structure.kind,
        "n": scheme.n,
        "t": scheme.structure.t,
        "secret_length": scheme.secret_length,
    }
    if scheme.amd is not None:
        out["d"] = scheme.amd.d
    return out


def _name(adversary) -> str:
    return getattr(adversary, "name", type(adversary).__name__)


def run_ind_sss(scheme: SharingScheme, adversary, trials: int, seed: int = 0,
                gate: bool = True, jobs: int = 1) -> GameReport:
    wins, raw, misuse = play(ind_sss_trial, scheme, adversary, trials, seed, gate, jobs)
    return GameReport.build(
        IND_SSS, _name(adversary), trials, wins if gate else raw,
        bound=Fraction(0), bound_kind=CENTERED, seed=seed, gate=gate,
        misuse=misuse, params=_scheme_params(scheme),
    )


def run_shift_robust(scheme: SharingScheme, adversary, trials: int, seed: int = 0,
                     gate: bool = True, jobs: int = 1) -> GameReport:
    delta, source = scheme_delta(scheme)
    wins, raw, misuse = play(shift_robust_trial, scheme, adversary, trials, seed, gate, jobs)
    return GameReport.build(
        SHIFT_ROBUST, _name(adversary), trials, wins if gate else raw,
        bound=delta, bound_kind=UPPER, seed=seed, gate=gate, misuse=misuse,
        delta=delta, delta_source=source, params=_scheme_params(scheme),
    )


def _relay_params(setting: RelaySetting) -> dict:
    out = _scheme_params(setting.scheme)
    out.update(lengths=list(setting.lengths), epsilon=str(setting.epsilon),
               corruption=setting.corruption)
    return out


def run_ind_relay(setting: RelaySetting, adversary, trials: int, seed: int = 0,
                  gate: bool = True, jobs: int = 1) -> GameReport:
    wins, raw, misuse = play(ind_relay_trial, setting, adversary, trials, seed, gate, jobs)
    bound = setting.network().confidentiality_bound()
    return GameReport.build(
        IND_RELAY, _name(adversary), trials, wins if gate else raw,
        bound=bound, bound_kind=CENTERED, seed=seed, gate=gate, misuse=misuse,
        params=_relay_params(setting),
    )


def run_forge_relay(setting: RelaySetting, adversary, trials: int, seed: int = 0,
                    gate: bool = True, jobs: int = 1) -> GameReport:
    delta, source = scheme_delta(setting.scheme)
    wins, raw, misuse = play(forge_relay_trial, setting, adversary, trials, seed, gate, jobs)
    bound = min(Fraction(1), setting.network().integrity_bound(delta))
    return GameReport.build(
        FORGE_RELAY, _name(adversary), trials, wins if gate else raw,
        bound=bound, bound_kind=UPPER, seed=seed, gate=gate, misuse=misuse,
        delta=delta, delta_source=source, params=_relay_params(setting),
    )
