"""Send an AMD-protected sharing over three relay paths (the two-hop topology).

A tamperer on path 2 adds an offset to one ciphertext.  Each hop decrypts
and re-encrypts, so the offset survives to Bob unchanged, and the AMD check
turns the forgery into a rejection.
"""

from amdrelay.amd import AmdParams
from amdrelay.gf import GF
from amdrelay.relay import network_setup, run_protocol
from amdrelay.rng import Rng
from amdrelay.sss import AccessStructure, SharingScheme


def main():
    F = GF(2, 16)
    scheme = SharingScheme.robust(AccessStructure.additive(3), AmdParams(F, 3))
    rng = Rng("demo-relay")
    secret = scheme.random_secret(rng)
    print("secret:", [e.hex() for e in secret])

    net, keys = network_setup(3, (2, 2, 2), F, scheme.share_length, rng.spawn("keys"))
    out, ledger = run_protocol(net, keys, scheme, secret, rng.spawn("honest"))
    print("honest run ->", [e.hex() for e in out])
    for line in ledger.trace_lines()[:4]:
        print("  ", line)

    offset = (F(1),) + (F.zero,) * (scheme.share_length - 1)
    net, keys = network_setup(3, (2, 2, 2), F, scheme.share_length, rng.spawn("keys2"))
    out, ledger = run_protocol(net, keys, scheme, secret, rng.spawn("tampered"), tamper={(2, 1): offset})
    print("tampered run ->", "BOT" if out is None else [e.hex() for e in out])
    print("offset seen end to end on path 2:", [e.hex() for e in ledger.path_offset(net, 2)])


if __name__ == "__main__":
    main()
