"""The key-shift attack on the parity-check integrity protocol.

The adversary on the last path flips bits of Bob's k2 and the same bits of
the tag it forwards.  Bob trusts that path and blames the honest ones.
"""

from amdrelay.rng import Rng
from amdrelay.secoqc import SecoqcParams, secoqc_attack, secoqc_honest_run


def show(run):
    for v in run.verdicts:
        print(f"  path {v.path}: parity {v.parity_ok}, tag {v.tag_ok} -> {v.verdict}")
    print(f"  Bob accepts: {run.accept}")


def main():
    params = SecoqcParams()
    print("honest run")
    show(secoqc_honest_run(params, Rng("demo-secoqc")))

    report = secoqc_attack(params, 0x0123456789ABCDEF, Rng("demo-secoqc"))
    print("attack with delta2 = 0123456789abcdef")
    show(report.run)
    for ident in report.identities:
        print("  ", ident["statement"])
    print("attack succeeded:", report.success)


if __name__ == "__main__":
    main()
