"""Command-line entry point: ``amdrelay <command> [options]``.

Exit codes: 0 success, 1 error (bad input or configuration), 2 the decoder
or Bob output ⊥ (printed as ``BOT``), 3 a measured rate exceeded its bound
by more than 3σ.

Every random choice is drawn from ``--seed`` (default ``$AMDRELAY_SEED``,
else 0), so repeating a command repeats its output byte for byte.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .amd import AmdParams, amd_decode, amd_encode
from .games import (
    FORGE_RELAY,
    GAMES,
    IND_RELAY,
    IND_SSS,
    SHIFT_ROBUST,
    RelaySetting,
    adversaries_for,
    make_adversary,
    run_forge_relay,
    run_ind_relay,
    run_ind_sss,
    run_shift_robust,
    scheme_delta,
)
from .games.adversaries import ADVERSARY_NAMES
from .games.report import GameReport, binomial_sigma
from .gf import FieldSpec, ParseError, field_from_name
from .relay import network_setup, run_protocol
from .rng import Rng
from .secoqc import SecoqcParams, secoqc_attack, secoqc_honest_run
from .sss import AccessStructure, SharingScheme, ShareVector

EXIT_OK, EXIT_ERROR, EXIT_BOT, EXIT_BOUND = 0, 1, 2, 3

SEED_ENV = "AMDRELAY_SEED"


class UsageError(Exception):
    pass


# -- configuration -----------------------------------------------------------

@dataclass
class RunConfig:
    field: FieldSpec
    field_name: str
    d: int
    n: int
    lengths: tuple[int, ...]
    scheme_kind: str
    threshold: Optional[int]
    epsilon: Fraction
    trials: Optional[int]
    seed: int
    jobs: int
    fmt: str
    plain: bool

    def amd(self) -> AmdParams:
        return AmdParams(self.field, self.d)

    def structure(self) -> AccessStructure:
        if self.scheme_kind == "additive":
            return AccessStructure.additive(self.n)
        return AccessStructure.threshold(self.threshold or self.n, self.n)

    def scheme(self) -> SharingScheme:
        st = self.structure()
        if self.plain:
            return SharingScheme(st, self.field, secret_length=self.d)
        return SharingScheme.robust(st, self.amd())

    def setting(self, corruption: str = "dynamic") -> RelaySetting:
        return RelaySetting(self.scheme(), self.lengths, self.epsilon, corruption)

    def header(self) -> dict:
        return {
            "field": self.field_name, "d": self.d, "n": self.n,
            "lengths": list(self.lengths), "scheme": self.scheme_kind,
            "threshold": self.threshold, "epsilon": str(self.epsilon),
            "seed": self.seed, "plain": self.plain,
        }


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV}={raw!r} is not an integer") from None


def _parse_lengths(text: Optional[str], n: int) -> tuple[int, ...]:
    if text is None:
        return (2,) * n
    try:
        out = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"--lengths expects comma-separated integers, got {text!r}") from None
    if len(out) != n:
        raise UsageError(f"--lengths lists {len(out)} paths but --n is {n}")
    if any(l < 1 for l in out):
        raise UsageError("every path needs at least one edge")
    return out


def build_config(args) -> RunConfig:
    try:
        F = field_from_name(args.field)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.n < 1:
        raise UsageError("--n must be positive")
    try:
        epsilon = Fraction(args.epsilon)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"--epsilon {args.epsilon!r} is not a number") from None
    if not 0 <= epsilon <= 1:
        raise UsageError("--epsilon must lie in [0, 1]")
    seed = args.seed if args.seed is not None else _default_seed()
    cfg = RunConfig(
        field=F, field_name=args.field, d=args.d, n=args.n,
        lengths=_parse_lengths(args.lengths, args.n), scheme_kind=args.scheme,
        threshold=args.threshold, epsilon=epsilon, trials=args.trials, seed=seed,
        jobs=args.jobs, fmt=args.format, plain=getattr(args, "plain", False),
    )
    # surface every precondition now, before any output
    try:
        if not cfg.plain:
            cfg.amd()
        elif cfg.d < 1:
            raise ValueError("--d must be positive")
        cfg.structure().check_field(F)
        cfg.scheme()
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if cfg.trials is not None and cfg.trials < 1:
        raise UsageError("--trials must be positive")
    if cfg.jobs < 1:
        raise UsageError("--jobs must be positive")
    return cfg


def _parse_vector(F: FieldSpec, items: Sequence[str], what: str) -> tuple:
    parts = [p for item in items for p in item.split(",") if p != ""]
    if not parts:
        raise UsageError(f"{what}: no field elements given")
    width = 2 * F.nbytes
    try:
        # short input is left-padded; output is always full width
        return tuple(F.from_hex(p.lower().removeprefix("0x").zfill(width)) for p in parts)
    except ParseError as exc:
        raise UsageError(f"{what}: {exc}") from None


def _hexes(v) -> list[str]:
    return [e.hex() for e in v]


def _emit(out, obj: dict, fmt: str, table_line: str) -> None:
    if fmt == "json":
        print(json.dumps(obj, sort_keys=True), file=out)
    else:
        print(table_line, file=out)


# -- commands ------------------------------------------------------------------

def cmd_encode(cfg: RunConfig, args, out) -> int:
    params = cfg.amd()
    s = _parse_vector(cfg.field, args.message, "message")
    if len(s) != params.d:
        raise UsageError(f"message has {len(s)} elements, --d is {params.d}")
    c = amd_encode(params, s, Rng(cfg.seed).spawn("encode"))
    _emit(out, {"codeword": _hexes(c.as_vector())}, cfg.fmt, " ".join(_hexes(c.as_vector())))
    return EXIT_OK


def cmd_decode(cfg: RunConfig, args, out) -> int:
    params = cfg.amd()
    v = _parse_vector(cfg.field, args.codeword, "codeword")
    if len(v) != params.codeword_length:
        raise UsageError(f"codeword has {len(v)} elements, expected {params.codeword_length}")
    m = amd_decode(params, v)
    if m is None:
        _emit(out, {"message": None}, cfg.fmt, "BOT")
        return EXIT_BOT
    _emit(out, {"message": _hexes(m)}, cfg.fmt, " ".join(_hexes(m)))
    return EXIT_OK


def cmd_share(cfg: RunConfig, args, out) -> int:
    scheme = cfg.scheme()
    s = _parse_vector(cfg.field, args.secret, "secret")
    if len(s) != scheme.secret_length:
        raise UsageError(f"secret has {len(s)} elements, expected {scheme.secret_length}")
    shares = scheme.share(s, Rng(cfg.seed).spawn("share"))
    if cfg.fmt == "json":
        print(json.dumps(shares.to_json(), sort_keys=True), file=out)
    else:
        for i, e in enumerate(shares, start=1):
            print(f"{i} {','.join(_hexes(e))}", file=out)
    return EXIT_OK


def cmd_recover(cfg: RunConfig, args, out) -> int:
    scheme = cfg.scheme()
    if len(args.shares) != scheme.n:
        raise UsageError(f"{len(args.shares)} shares given, --n is {scheme.n} (use '-' for a missing share)")
    entries = []
    for k, item in enumerate(args.shares, start=1):
        if item in ("-", "none", "BOT"):
            entries.append(None)
            continue
        v = _parse_vector(cfg.field, [item], f"share {k}")
        if len(v) != scheme.share_length:
            raise UsageError(f"share {k} has {len(v)} elements, expected {scheme.share_length}")
        entries.append(v)
    m = scheme.recover(ShareVector(tuple(entries)))
    if m is None:
        _emit(out, {"secret": None}, cfg.fmt, "BOT")
        return EXIT_BOT
    _emit(out, {"secret": _hexes(m)}, cfg.fmt, " ".join(_hexes(m)))
    return EXIT_OK


def _parse_tamper(cfg: RunConfig, specs: Sequence[str], width: int) -> dict:
    tamper = {}
    for spec in specs or ():
        try:
            i_s, j_s, delta_s = spec.split(":", 2)
            i, j = int(i_s), int(j_s)
        except ValueError:
            raise UsageError(f"--tamper expects i:j:DELTA, got {spec!r}") from None
        if not 1 <= i <= cfg.n or not 1 <= j <= cfg.lengths[i - 1]:
            raise UsageError(f"--tamper {spec}: no edge {j} on path {i}")
        delta = _parse_vector(cfg.field, [delta_s], "--tamper offset")
        if len(delta) == 1 and width > 1:
            delta = delta + (cfg.field.zero,) * (width - 1)
        if len(delta) != width:
            raise UsageError(f"--tamper offset needs 1 or {width} elements")
        tamper[(i, j)] = delta
    return tamper


def _relay_bound(cfg: RunConfig, scheme: SharingScheme) -> tuple[Fraction, str]:
    delta, source = scheme_delta(scheme)
    ell = max(cfg.lengths)
    bound = min(Fraction(1), cfg.n * ell * cfg.epsilon + delta)
    return bound, f"n*l*eps + delta = {cfg.n}*{ell}*{cfg.epsilon} + {delta} = {bound} ({source})"


def relay_trace(cfg: RunConfig, secret, tamper: dict, drop: Sequence[int]) -> tuple[list[str], str]:
    """Trace lines for one run plus its outcome (match, reject or mismatch)."""
    scheme = cfg.scheme()
    rng = Rng(cfg.seed).spawn("relay-sim")
    if secret is None:
        secret = scheme.random_secret(rng.spawn("secret"))
    net, keys = network_setup(cfg.n, cfg.lengths, cfg.field, scheme.share_length,
                              rng.spawn("keys"), cfg.epsilon)
    out, ledger = run_protocol(net, keys, scheme, secret, rng.spawn("protocol"), tamper, drop)
    outcome = "reject" if out is None else ("match" if out == tuple(secret) else "mismatch")
    header = dict(cfg.header(), event="config", secret=_hexes(secret),
                  tamper={f"{i}:{j}": _hexes(v) for (i, j), v in sorted(tamper.items())},
                  drop=sorted(drop))
    bound, text = _relay_bound(cfg, scheme)
    lines = [json.dumps(header, sort_keys=True)]
    lines += ledger.trace_lines()
    lines.append(json.dumps({"event": "outcome", "outcome": outcome, "secret": _hexes(secret),
                             "output": None if out is None else _hexes(out)}, sort_keys=True))
    lines.append(json.dumps({"event": "bound", "bound": str(bound), "formula": text}, sort_keys=True))
    return lines, outcome


def cmd_relay_sim(cfg: RunConfig, args, out) -> int:
    scheme = cfg.scheme()
    tamper = _parse_tamper(cfg, args.tamper, scheme.share_length)
    drop = sorted(set(args.drop or ()))
    if any(not 1 <= i <= cfg.n for i in drop):
        raise UsageError(f"--drop paths must lie in 1..{cfg.n}")
    secret = None
    if args.secret:
        secret = _parse_vector(cfg.field, args.secret, "secret")
        if len(secret) != scheme.secret_length:
            raise UsageError(f"secret has {len(secret)} elements, expected {scheme.secret_length}")

    trials = cfg.trials or 1
    if trials == 1:
        lines, outcome = relay_trace(cfg, secret, tamper, drop)
        if args.trace_out:
            with open(args.trace_out, "w", encoding="utf-8") as fh:
                fh.write("\n".join(lines) + "\n")
        if cfg.fmt == "json":
            print("\n".join(lines), file=out)
        else:
            bound = json.loads(lines[-1])
            print(f"outcome: {outcome}", file=out)
            print(f"events: {len(lines) - 3}", file=out)
            print(f"bound: {bound['formula']}", file=out)
        return EXIT_BOT if outcome == "reject" else EXIT_OK

    counts = {"match": 0, "reject": 0, "mismatch": 0}
    master = Rng(cfg.seed).spawn("relay-batch")
    for k in range(trials):
        rng = master.spawn(k)
        s = secret if secret is not None else scheme.random_secret(rng.spawn("secret"))
        net, keys = network_setup(cfg.n, cfg.lengths, cfg.field, scheme.share_length,
                                  rng.spawn("keys"), cfg.epsilon)
        res, _ = run_protocol(net, keys, scheme, s, rng.spawn("protocol"), tamper, drop)
        counts["reject" if res is None else ("match" if res == tuple(s) else "mismatch")] += 1
    bound, text = _relay_bound(cfg, scheme)
    threshold = float(bound) + 3 * binomial_sigma(float(bound), trials)
    mismatch_rate = counts["mismatch"] / trials
    ok = mismatch_rate <= threshold
    summary = {
        "trials": trials, **counts,
        "reject_rate": counts["reject"] / trials, "mismatch_rate": mismatch_rate,
        "bound": str(bound), "threshold": threshold, "within_bound": ok, "formula": text,
    }
    _emit(out, summary, cfg.fmt,
          f"match {counts['match']}  reject {counts['reject']}  mismatch {counts['mismatch']}"
          f"  of {trials}; mismatch rate {mismatch_rate:.6g} vs bound {text}")
    return EXIT_OK if ok else EXIT_BOUND


def cmd_replay(args, out) -> int:
    """Re-run the configuration recorded in a trace and compare line by line."""
    try:
        with open(args.trace, encoding="utf-8") as fh:
            recorded = [line.rstrip("\n") for line in fh if line.strip()]
    except OSError as exc:
        raise UsageError(f"cannot read trace: {exc}") from None
    if not recorded:
        raise UsageError("trace is empty")
    try:
        head = json.loads(recorded[0])
    except json.JSONDecodeError:
        raise UsageError("trace does not start with a config line") from None
    if head.get("event") != "config":
        raise UsageError("trace does not start with a config line")
    ns = argparse.Namespace(
        field=head["field"], d=head["d"], n=head["n"],
        lengths=",".join(str(l) for l in head["lengths"]), scheme=head["scheme"],
        threshold=head["threshold"], epsilon=head["epsilon"], trials=1, seed=head["seed"],
        jobs=1, format="json", plain=head.get("plain", False),
    )
    cfg = build_config(ns)
    secret = _parse_vector(cfg.field, head["secret"], "secret")
    tamper = {}
    for key, hexes in head.get("tamper", {}).items():
        i, j = (int(x) for x in key.split(":"))
        tamper[(i, j)] = _parse_vector(cfg.field, hexes, "tamper")
    lines, _ = relay_trace(cfg, secret, tamper, head.get("drop", []))
    for k, (a, b) in enumerate(zip(recorded, lines), start=1):
        if a != b:
            print(f"diverged at line {k}", file=out)
            print(f"  recorded: {a}", file=out)
            print(f"  replayed: {b}", file=out)
            return EXIT_ERROR
    if len(recorded) != len(lines):
        print(f"length differs: recorded {len(recorded)} lines, replayed {len(lines)}", file=out)
        return EXIT_ERROR
    print(f"replay identical: {len(lines)} lines", file=out)
    return EXIT_OK


_RUNNERS = {
    IND_SSS: run_ind_sss,
    SHIFT_ROBUST: run_shift_robust,
    IND_RELAY: run_ind_relay,
    FORGE_RELAY: run_forge_relay,
}

_CSV_FIELDS = ["game", "adversary", "trials", "wins", "rate", "ci_low", "ci_high",
               "bound", "threshold", "within_bound", "misuse", "seed"]


def cmd_game(cfg: RunConfig, args, out) -> int:
    if args.game not in GAMES:
        raise UsageError(f"unknown game {args.game!r}; choose from {', '.join(GAMES)}")
    scheme = cfg.scheme()
    if args.adversary == "all":
        advs = adversaries_for(args.game, scheme, qualified=args.no_gate)
    else:
        try:
            advs = [make_adversary(args.adversary)]
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        if args.game not in advs[0].games:
            raise UsageError(f"adversary {args.adversary!r} does not play {args.game}")
    target = scheme if args.game in (IND_SSS, SHIFT_ROBUST) else cfg.setting(args.corruption)
    trials = cfg.trials or 10_000
    reports: list[GameReport] = []
    for adv in advs:
        try:
            reports.append(_RUNNERS[args.game](target, adv, trials, seed=cfg.seed,
                                               gate=not args.no_gate, jobs=cfg.jobs))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    if cfg.fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=_CSV_FIELDS, lineterminator="\n")
        w.writeheader()
        for r in reports:
            w.writerow({k: getattr(r, k) for k in _CSV_FIELDS})
        out.write(buf.getvalue())
    else:
        for r in reports:
            if cfg.fmt == "json":
                print(r.to_json(), file=out)
            print(r.summary(), file=out)
    # without the gate the bound is not a claim, so only gated runs trip
    violated = not args.no_gate and any(not r.within_bound for r in reports)
    return EXIT_BOUND if violated else EXIT_OK


def cmd_attack(cfg: RunConfig, args, out) -> int:
    try:
        params = SecoqcParams(n=cfg.n, m=args.mac_bits, m_pc=args.parity_bits, n_s=args.secret_bits)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    trials = cfg.trials or 1
    master = Rng(cfg.seed).spawn("attack")
    if args.honest:
        runs = [secoqc_honest_run(params, master.spawn(k)) for k in range(trials)]
        good = sum(r.accept and all(v.verdict == "honest" for v in r.verdicts) for r in runs)
        obj = runs[0].to_json() if trials == 1 else {"trials": trials, "all_paths_valid": good}
        _emit(out, obj, cfg.fmt, f"honest control: {good}/{trials} runs accepted with every path valid")
        return EXIT_OK if good == trials else EXIT_ERROR
    try:
        delta2 = int(args.delta2, 16)
    except ValueError:
        raise UsageError(f"--delta2 {args.delta2!r} is not hex") from None
    if delta2 == 0:
        raise UsageError("--delta2 must be nonzero: a zero shift changes nothing and every path verifies")
    if delta2 >> params.m:
        raise UsageError(f"--delta2 does not fit in {params.m} bits")
    reports = [secoqc_attack(params, delta2, master.spawn(k)) for k in range(trials)]
    wins = sum(r.success for r in reports)
    if trials == 1:
        r = reports[0]
        lines = [f"accept {r.run.accept}; success {r.success}"]
        lines += [f"path {v.path}: parity {'ok' if v.parity_ok else 'FAIL'}, tag "
                  f"{'ok' if v.tag_ok else 'FAIL'} -> {v.verdict}" for v in r.run.verdicts]
        lines += [i["statement"] for i in r.identities]
        _emit(out, r.to_json(), cfg.fmt, "\n".join(lines))
    else:
        obj = {"trials": trials, "successes": wins, "success_rate": wins / trials,
               "delta2": format(delta2, f"0{params.m // 4}x")}
        _emit(out, obj, cfg.fmt, f"attack succeeded in {wins}/{trials} runs")
    return EXIT_OK if wins == trials else EXIT_ERROR


# -- parser ------------------------------------------------------------------

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--field", default="gf2_86", help="gf2_86, gf7, gf2_<m> or gf<p> (default gf2_86)")
    p.add_argument("--d", type=int, default=3, help="message length in field elements (default 3)")
    p.add_argument("--n", type=int, default=3, help="number of shares / paths (default 3)")
    p.add_argument("--lengths", help="edges per path, comma-separated (default 2 each)")
    p.add_argument("--scheme", choices=("additive", "threshold"), default="additive")
    p.add_argument("--threshold", type=int, help="t for --scheme threshold (default n)")
    p.add_argument("--epsilon", default="0", help="key distance from uniform, e.g. 1/1000")
    p.add_argument("--plain", action="store_true", help="share without the AMD layer")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int, help=f"master seed (default ${SEED_ENV} or 0)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--format", choices=("json", "table", "csv"), default="table")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(
        prog="amdrelay",
        description="AMD-coded secret sharing over trusted-repeater relay networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", parents=[common], help="AMD-encode a message")
    p.add_argument("message", nargs="+", help="hex field elements")
    p = sub.add_parser("decode", parents=[common], help="check and strip an AMD codeword")
    p.add_argument("codeword", nargs="+", help="hex field elements (s..., x, tag)")
    p = sub.add_parser("share", parents=[common], help="split a secret into shares")
    p.add_argument("secret", nargs="+")
    p = sub.add_parser("recover", parents=[common], help="recombine shares ('-' = missing)")
    p.add_argument("shares", nargs="+", help="one comma-separated hex vector per share")

    p = sub.add_parser("relay-sim", parents=[common], help="run the relay protocol end to end")
    p.add_argument("--tamper", action="append", metavar="i:j:DELTA",
                   help="add DELTA to the ciphertext on edge j of path i (repeatable)")
    p.add_argument("--drop", type=int, action="append", metavar="i", help="path that delivers nothing")
    p.add_argument("--secret", nargs="+", help="hex secret (default random from the seed)")
    p.add_argument("--trace-out", help="also write the JSON-lines trace to this file")

    p = sub.add_parser("replay", help="re-run a recorded relay trace and compare")
    p.add_argument("trace")

    p = sub.add_parser("game", parents=[common], help="Monte Carlo run of a security game")
    p.add_argument("game", help=", ".join(GAMES))
    p.add_argument("adversary", help=f"{', '.join(ADVERSARY_NAMES)}, corrupt-<k> or all")
    p.add_argument("--no-gate", action="store_true", help="score qualified corruptions too")
    p.add_argument("--corruption", choices=("dynamic", "static"), default="dynamic")

    p = sub.add_parser("attack", parents=[common], help="key-shift attack on SECOQC parity checks")
    p.add_argument("--delta2", default="1", help="nonzero hex shift of the MAC pad")
    p.add_argument("--honest", action="store_true", help="control run without the attack")
    p.add_argument("--mac-bits", type=int, default=64)
    p.add_argument("--parity-bits", type=int, default=32)
    p.add_argument("--secret-bits", type=int, default=128)
    return parser


_COMMANDS = {
    "encode": cmd_encode,
    "decode": cmd_decode,
    "share": cmd_share,
    "recover": cmd_recover,
    "relay-sim": cmd_relay_sim,
    "game": cmd_game,
    "attack": cmd_attack,
}


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    try:
        if args.command == "replay":
            return cmd_replay(args, out)
        cfg = build_config(args)
        return _COMMANDS[args.command](cfg, args, out)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
