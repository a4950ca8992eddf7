"""Play the four security games against a few built-in adversaries.

Small parameters keep it quick.  The tight-shift adversary sits on the
(d+1)/q line; the plain (non-AMD) scheme shows what the tag buys.
"""

from amdrelay.amd import AmdParams
from amdrelay.games import (
    RelaySetting,
    coupled_trials,
    make_adversary,
    run_forge_relay,
    run_ind_relay,
    run_shift_robust,
)
from amdrelay.gf import GF
from amdrelay.sss import AccessStructure, SharingScheme


def main():
    F = GF(7)
    robust = SharingScheme.robust(AccessStructure.additive(3), AmdParams(F, 1))
    plain = SharingScheme(AccessStructure.additive(3), F, secret_length=1)
    setting = RelaySetting(robust, (2, 2, 2))

    for name in ("passive", "corrupt-2"):
        print(run_ind_relay(setting, make_adversary(name), 5000, seed=1).summary())
    for name in ("blind-shift", "tight-shift"):
        print(run_forge_relay(setting, make_adversary(name), 5000, seed=1).summary())
    print(run_shift_robust(plain, make_adversary("blind-shift"), 500, seed=1).summary())

    res = coupled_trials("forge-relay", setting, make_adversary("tight-shift"), 500, seed=1)
    print(f"coupling: direct {res.direct_wins}, reduction {res.reduced_wins}, "
          f"mismatches {res.mismatches}")


if __name__ == "__main__":
    main()
