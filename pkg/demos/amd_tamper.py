"""Encode a message, shift the codeword, and watch the decoder catch it.

Over GF(7) with d=1 a fixed shift slips through for at most 2 of the 7
possible x, which is the exact worst case delta = 2/7.
"""

from fractions import Fraction
from itertools import product

from amdrelay.amd import AmdCodeword, AmdParams, amd_decode, amd_encode, delta_oracle, tag_eval
from amdrelay.gf import GF
from amdrelay.rng import Rng


def main():
    F = GF(7)
    params = AmdParams(F, 1)
    rng = Rng("demo-amd")
    s = (F(3),)
    c = amd_encode(params, s, rng)
    print("codeword (s, x, tag):", [e.value for e in c.as_vector()])
    print("decodes to:", [e.value for e in amd_decode(params, c)])

    shift = AmdCodeword((F(1),), F(2), F(5))
    print("shifted by (1, 2, 5):", amd_decode(params, c + shift))

    def hits(e):
        """Number of hidden x for which shift e goes through."""
        return sum(
            amd_decode(params, AmdCodeword(s, x, tag_eval(params, x, s)) + e) is not None
            for x in F.elements()
        )

    print(f"that shift goes through for {hits(shift)} of the 7 values of x")
    shifts = [AmdCodeword((a,), b, t) for a, b, t in product(F.elements(), repeat=3) if a or b or t]
    best = max(shifts, key=hits)
    print(f"best of {len(shifts)} shifts: {[e.value for e in best.as_vector()]} "
          f"goes through for {hits(best)} of 7")
    delta = delta_oracle(params)
    print(f"exact worst case delta = {delta}, closed form (d+1)/q = {Fraction(2, 7)}")


if __name__ == "__main__":
    main()
