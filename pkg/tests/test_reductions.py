"""The reductions are checked by coupling: fed the values the real game would
have drawn, a reduction must win exactly when the direct adversary wins."""

import itertools

import pytest

from amdrelay.amd import AmdParams
from amdrelay.games import (
    FORGE_RELAY,
    IND_RELAY,
    RelaySetting,
    coupled_trials,
    reduce_forge_to_shift,
    reduce_ind_to_sss,
    run_ind_sss,
    run_shift_robust,
)
from amdrelay.games import reductions
from amdrelay.games.adversaries import (
    Adversary,
    BlindShift,
    Corrupter,
    DropPath,
    FullCorrupter,
    Passive,
    Replay,
    TightShift,
)
from amdrelay.gf import GF
from amdrelay.rng import Rng
from amdrelay.sss import AccessStructure, SharingScheme, vec_add

F7 = GF(7)


class Peeker(Adversary):
    """Relays path 1, corrupts path 2 late, and lets everything it saw decide.

    Its output depends on ciphertexts, relay outputs and keys, so any
    disagreement between the simulation and the real game shows up.
    """

    name = "peeker"
    games = (IND_RELAY, FORGE_RELAY)

    def choose_pair(self):
        k = self.scheme.secret_length
        return (self.F.zero,) * k, (self.F.one,) * k

    def choose_secret(self):
        return self.random_secret()

    def _look(self, c, oracles):
        seen = [c[0][0], c[1][0]]
        out = oracles.relay(1, 2, c[0])
        seen.append(out[0])
        keys = oracles.corrupt(2, self.setting.lengths[1])
        if keys is not None:
            seen += [keys[0][0], keys[1][0]]
        return out, sum(x.value for x in seen)

    def guess(self, c, oracles):
        return self._look(c, oracles)[1] & 1

    def forge(self, c, oracles):
        out, h = self._look(c, oracles)
        final = list(c)
        final[0] = out if h & 1 else vec_add(out, (self.F.one,) * self.width)
        # path 3 skips its relays entirely, so its shift must come from the source
        final[2] = vec_add(c[2], (self.F.one,) * self.width) if h & 2 else c[2]
        return final


SCHEMES = {
    "additive": SharingScheme.robust(AccessStructure.additive(3), AmdParams(F7, 1)),
    "threshold": SharingScheme.robust(AccessStructure.threshold(2, 3), AmdParams(F7, 1)),
}
LENGTHS = [(2, 2, 2), (2, 3, 2), (4, 2, 3)]


def _adversaries():
    return [Passive(), Replay(), Corrupter(1), Corrupter(2), BlindShift(), DropPath(),
            TightShift(), FullCorrupter(), Peeker()]


@pytest.mark.parametrize("scheme,lengths,corruption",
                         list(itertools.product(SCHEMES, LENGTHS, ["dynamic", "static"])))
def test_coupling_has_no_mismatches(scheme, lengths, corruption):
    setting = RelaySetting(SCHEMES[scheme], lengths, corruption=corruption)
    for adv in _adversaries():
        for game in (IND_RELAY, FORGE_RELAY):
            if game not in adv.games:
                continue
            if corruption == "static" and isinstance(adv, Peeker):
                continue  # it corrupts after relaying
            res = coupled_trials(game, setting, adv, 60, seed=7)
            assert res.mismatches == 0, (game, adv.name, res.mismatch_trials)


def test_coupling_over_large_field():
    scheme = SharingScheme.robust(AccessStructure.additive(3), AmdParams(GF(2, 16), 3))
    setting = RelaySetting(scheme, (1, 3, 2))
    for adv in (Peeker(), TightShift(), Corrupter(2)):
        for game in (IND_RELAY, FORGE_RELAY):
            if game in adv.games:
                assert coupled_trials(game, setting, adv, 30, seed=1).mismatches == 0


@pytest.mark.parametrize("label", ["ciphertext", "relay", "key", "shift"])
def test_broken_source_is_caught(label, monkeypatch):
    honest = reductions._CouplingSource

    class Off(honest):
        def __call__(self, lab, i, j=None, delivered=None, final=None):
            v = super().__call__(lab, i, j, delivered, final)
            return vec_add(v, (v[0].field.one,) * len(v)) if lab == label else v

    monkeypatch.setattr(reductions, "_CouplingSource", Off)
    setting = RelaySetting(SCHEMES["threshold"], (3, 3, 2))
    total = sum(coupled_trials(g, setting, Peeker(), 200, seed=3).mismatches
                for g in (IND_RELAY, FORGE_RELAY))
    assert total > 20


def test_first_key_is_ciphertext_minus_share():
    scheme = SCHEMES["additive"]
    red = reduce_ind_to_sss(Corrupter(1), (2, 2, 2))
    red.begin(scheme, Rng(0))
    shares = scheme.share(red.choose_pair()[0], Rng(1))

    class Oracles:
        def corrupt(self, i):
            return shares[i - 1]

    sim = reductions.SimulatedRelay(red.relay_setting, Oracles(), red._uniform)
    q1, q2 = sim.corrupt(1, 2)
    assert vec_add(shares[0], q1) == sim.first[0]
    assert sim.corrupt(1, 2) == (q1, q2)
    out = sim.relay(1, 2, sim.first[0])
    assert out == vec_add(shares[0], q2)


def test_uniform_reductions_behave():
    scheme = SCHEMES["threshold"]
    n = 3000
    rep = run_ind_sss(scheme, reduce_ind_to_sss(Passive(), (2, 2, 2)), n, seed=2)
    assert abs(rep.rate - 0.5) < 4 * (0.25 / n) ** 0.5
    rep = run_shift_robust(scheme, reduce_forge_to_shift(TightShift(), (2, 2, 2)), n, seed=2)
    assert rep.within_bound and rep.misuse == 0
    rep = run_shift_robust(scheme, reduce_forge_to_shift(FullCorrupter(), (2, 2, 2)), 50, seed=2)
    assert rep.wins == 0


def test_coupling_rejects_other_games():
    setting = RelaySetting(SCHEMES["additive"], (2, 2, 2))
    with pytest.raises(ValueError):
        coupled_trials("ind-sss", setting, Passive(), 1)
