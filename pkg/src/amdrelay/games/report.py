"""Win-rate bookkeeping for security games."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from statistics import NormalDist

Z95 = NormalDist().inv_cdf(0.975)

UPPER = "upper"          # rate must stay below the bound
CENTERED = "centered"    # |rate - 1/2| must stay below the bound


def wilson_interval(wins: int, trials: int, z: float = Z95) -> tuple[float, float]:
    if trials == 0:
        return 0.0, 1.0
    phat = wins / trials
    denom = 1 + z * z / trials
    centre = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def binomial_sigma(p: float, trials: int) -> float:
    if trials == 0:
        return 0.0
    p = min(max(p, 0.0), 1.0)
    return math.sqrt(p * (1 - p) / trials)


@dataclass
class GameReport:
    game: str
    adversary: str
    trials: int
    wins: int
    rate: float
    ci_low: float
    ci_high: float
    bound: float
    bound_exact: str
    bound_kind: str
    sigma: float
    threshold: float
    within_bound: bool
    delta: str | None
    delta_source: str | None
    gate: bool
    misuse: int
    seed: int
    params: dict = field(default_factory=dict)

    @classmethod
    def build(cls, game: str, adversary: str, trials: int, wins: int, *,
              bound: Fraction, bound_kind: str, seed: int, gate: bool = True,
              misuse: int = 0, delta: Fraction | None = None,
              delta_source: str | None = None, params: dict | None = None) -> GameReport:
        if not 0 <= wins <= trials:
            raise ValueError("wins must lie in [0, trials]")
        rate = wins / trials if trials else 0.0
        lo, hi = wilson_interval(wins, trials)
        if bound_kind == UPPER:
            sigma = binomial_sigma(float(bound), trials)
            threshold = float(bound) + 3 * sigma
            ok = rate <= threshold
        elif bound_kind == CENTERED:
            sigma = binomial_sigma(0.5, trials)
            threshold = float(bound) + 3 * sigma
            ok = abs(rate - 0.5) <= threshold
        else:
            raise ValueError(f"unknown bound kind {bound_kind!r}")
        return cls(
            game=game, adversary=adversary, trials=trials, wins=wins, rate=rate,
            ci_low=lo, ci_high=hi, bound=float(bound), bound_exact=str(Fraction(bound)),
            bound_kind=bound_kind, sigma=sigma, threshold=threshold, within_bound=ok,
            delta=None if delta is None else str(delta), delta_source=delta_source,
            gate=gate, misuse=misuse, seed=seed, params=dict(params or {}),
        )

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def summary(self) -> str:
        if self.bound_kind == CENTERED:
            target = f"1/2 ± {self.bound:.6g}"
        else:
            target = f"{self.bound:.6g}"
        verdict = "ok" if self.within_bound else "VIOLATION"
        return (f"{self.game} / {self.adversary}: rate {self.rate:.6g} ∈ "
                f"[{self.ci_low:.6g},{self.ci_high:.6g}] vs bound {target} "
                f"(+3σ tolerance {self.threshold:.6g}) {verdict}")
