"""Reduction adversaries and a coupled-randomness harness.

:func:`reduce_ind_to_sss` turns an Ind-Relay adversary into an Ind-SSS
adversary, and :func:`reduce_forge_to_shift` turns a Forge-Relay adversary
into a Shift-Robust adversary.  Both simulate the relay network for the inner
adversary without knowing any uncorrupted share.  Ciphertexts on honest paths
are fresh random values.  Keys are fixed the moment a path is corrupted, so
they agree with everything the inner adversary has already seen.

Every random value the simulation needs comes from ``source(label, **ctx)``.
By default that is a uniform draw.  :func:`coupled_trials` swaps in a source
that returns the value the real ideal-key game would have produced.  Each such
value is uniform given the inner adversary's view, so this is a legitimate
coupling, and under it the win indicator of the reduction must equal the win
indicator of the direct game in every trial.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass
from typing import Callable, Optional

from ..rng import Rng
from ..sss import SharingScheme, Vector, vec_add, vec_sub
from .adversaries import Adversary
from .core import (
    FORGE_RELAY,
    IND_RELAY,
    IND_SSS,
    SHIFT_ROBUST,
    OracleMisuse,
    RelaySetting,
    _check_optional_vectors,
    _check_vector,
    forge_relay_trial,
    ind_relay_trial,
    ind_sss_trial,
    sample_keys,
    shift_robust_trial,
)


class SimulatedRelay:
    """Relay and corruption oracles answered without the honest shares."""

    def __init__(self, setting: RelaySetting, sss_oracles, source: Callable):
        self.setting = setting
        self.net = setting.network()
        self.sss = sss_oracles
        self.source = source
        self.relayed: set[tuple[int, int]] = set()
        self.corrupted: set[int] = set()
        self.keys: dict[tuple[int, int], Vector] = {}
        self.sent: dict[tuple[int, int], Vector] = {}
        self.delivered: dict[tuple[int, int], Vector] = {}
        self.first = tuple(source("ciphertext", i=i) for i in range(1, self.net.n + 1))
        for i, c in enumerate(self.first, start=1):
            self.sent[(i, 1)] = c

    def _check_node(self, i, j) -> None:
        try:
            self.net.check_relay_node(i, j)
        except (ValueError, TypeError) as exc:
            raise OracleMisuse(str(exc)) from None

    def relay(self, i: int, j: int, c) -> Optional[Vector]:
        self._check_node(i, j)
        if (i, j) in self.relayed:
            return None
        c = _check_vector(c, self.net.width, self.net.field, "relay input")
        self.relayed.add((i, j))
        self.delivered[(i, j - 1)] = c
        if i not in self.corrupted:
            out = tuple(self.source("relay", i=i, j=j, delivered=c))
        else:
            out = vec_add(vec_sub(c, self.keys[(i, j - 1)]), self.keys[(i, j)])
        self.sent[(i, j)] = out
        return out

    def corrupt(self, i: int, j: int) -> Optional[tuple[Vector, Vector]]:
        self._check_node(i, j)
        if self.setting.corruption == "static" and self.relayed:
            raise OracleMisuse("static corruption must precede every relay")
        if (i, j) in self.relayed:
            return None
        if i not in self.corrupted:
            self.corrupted.add(i)
            share = self.sss.corrupt(i)
            self.keys[(i, 1)] = vec_sub(self.first[i - 1], share)
            for jj in range(2, self.net.length(i) + 1):
                if (i, jj) in self.relayed:
                    self.keys[(i, jj)] = vec_add(
                        vec_sub(self.sent[(i, jj)], self.delivered[(i, jj - 1)]),
                        self.keys[(i, jj - 1)],
                    )
                else:
                    self.keys[(i, jj)] = tuple(self.source("key", i=i, j=jj))
        return self.keys[(i, j - 1)], self.keys[(i, j)]

    def shift_vector(self, final: list) -> list[Optional[Vector]]:
        """Translate the inner adversary's deliveries into sharing-game shifts."""
        out: list[Optional[Vector]] = []
        for i, c_last in enumerate(final, start=1):
            l = self.net.length(i)
            if c_last is None:
                out.append(None)
            elif i in self.corrupted:
                out.append(vec_sub(c_last, self.keys[(i, l)]))
            elif any((i, j) not in self.relayed for j in range(2, l + 1)):
                out.append(tuple(self.source("shift", i=i, final=c_last)))
            else:
                total = vec_sub(c_last, self.sent[(i, l)])
                for j in range(1, l):
                    total = vec_add(total, vec_sub(self.delivered[(i, j)], self.sent[(i, j)]))
                out.append(total)
        return out


class _Reduction(Adversary):
    def __init__(self, inner, lengths, epsilon=0, corruption="dynamic"):
        self.inner = inner
        self.lengths_ = tuple(lengths)
        self.epsilon = epsilon
        self.corruption = corruption
        self.source: Optional[Callable] = None
        self.name = f"reduction[{getattr(inner, 'name', type(inner).__name__)}]"

    def begin(self, scheme: SharingScheme, rng: Rng) -> None:
        super().begin(scheme, rng)
        self.relay_setting = RelaySetting(scheme, self.lengths_, self.epsilon, self.corruption)
        self.inner.begin(self.relay_setting, rng)
        self._tape = rng.spawn("reduction")

    def _uniform(self, label, **ctx) -> Vector:
        return self.F.random_vector(self._tape, self.width)

    def _simulator(self, sss_oracles) -> SimulatedRelay:
        self.sim = SimulatedRelay(self.relay_setting, sss_oracles, self.source or self._uniform)
        return self.sim


class IndReduction(_Reduction):
    games = (IND_SSS,)

    def choose_pair(self):
        return self.inner.choose_pair()

    def guess(self, oracles):
        sim = self._simulator(oracles)
        return self.inner.guess(sim.first, sim)


class ForgeReduction(_Reduction):
    games = (SHIFT_ROBUST,)

    def choose_secret(self):
        return self.inner.choose_secret()

    def shift(self, oracles):
        sim = self._simulator(oracles)
        final = _check_optional_vectors(self.inner.forge(sim.first, sim), self.scheme.n,
                                        self.width, self.F, "delivery")
        return sim.shift_vector(final)


def reduce_ind_to_sss(adversary, lengths, epsilon=0, corruption="dynamic") -> IndReduction:
    return IndReduction(adversary, lengths, epsilon, corruption)


def reduce_forge_to_shift(adversary, lengths, epsilon=0, corruption="dynamic") -> ForgeReduction:
    return ForgeReduction(adversary, lengths, epsilon, corruption)


# -- coupling --------------------------------------------------------------

class _RecordingScheme:
    """Delegates to a scheme and remembers the last sharing it produced."""

    def __init__(self, scheme: SharingScheme):
        self._scheme = scheme
        self.last = None

    def __getattr__(self, name):
        return getattr(self._scheme, name)

    def share(self, secret, rng):
        self.last = self._scheme.share(secret, rng)
        return self.last


class _CouplingSource:
    """Supplies the real ideal-game values in place of the reduction's coins."""

    def __init__(self, recorder: _RecordingScheme, keys: dict, lengths):
        self.rec = recorder
        self.q = keys
        self.lengths = lengths

    def __call__(self, label, i, j=None, delivered=None, final=None):
        S = self.rec.last[i - 1]
        q = self.q
        if label == "ciphertext":
            return vec_add(S, q[(i, 1)])
        if label == "relay":
            return vec_add(vec_sub(delivered, q[(i, j - 1)]), q[(i, j)])
        if label == "key":
            return q[(i, j)]
        if label == "shift":
            return vec_sub(vec_sub(final, q[(i, self.lengths[i - 1])]), S)
        raise ValueError(f"unknown draw {label!r}")


@dataclass
class CouplingResult:
    trials: int
    direct_wins: int
    reduced_wins: int
    mismatches: int
    mismatch_trials: list


def coupled_trials(game: str, setting: RelaySetting, adversary, trials: int,
                   seed: int = 0) -> CouplingResult:
    """Play the ideal-key relay game and its reduction on shared randomness."""
    if game not in (IND_RELAY, FORGE_RELAY):
        raise ValueError("coupling is defined for ind-relay and forge-relay")
    master = Rng(seed)
    net = setting.network()
    direct_wins = reduced_wins = 0
    bad = []
    for k in range(trials):
        trial_rng = master.spawn("trial", k)
        keys = sample_keys(net, trial_rng.spawn("keys"))
        rec = _RecordingScheme(setting.scheme)
        if game == IND_RELAY:
            direct = ind_relay_trial(setting, copy.deepcopy(adversary), trial_rng)
            red = reduce_ind_to_sss(copy.deepcopy(adversary), setting.lengths,
                                    setting.epsilon, setting.corruption)
            red.source = _CouplingSource(rec, keys, setting.lengths)
            reduced = ind_sss_trial(rec, red, trial_rng)
        else:
            direct = forge_relay_trial(setting, copy.deepcopy(adversary), trial_rng)
            red = reduce_forge_to_shift(copy.deepcopy(adversary), setting.lengths,
                                        setting.epsilon, setting.corruption)
            red.source = _CouplingSource(rec, keys, setting.lengths)
            reduced = shift_robust_trial(rec, red, trial_rng)
        direct_wins += direct.win
        reduced_wins += reduced.win
        if direct.win != reduced.win or direct.misuse != reduced.misuse:
            bad.append(k)
    return CouplingResult(trials, direct_wins, reduced_wins, len(bad), bad)
