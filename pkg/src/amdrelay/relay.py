"""Multipath one-time-pad relaying over a static trusted-repeater network.

Indexing follows the usual picture of ``n`` disjoint paths from Alice to Bob.
Paths are numbered ``i = 1..n``.  Path ``i`` has ``lengths[i-1]`` edges,
numbered ``j = 1..l_i`` starting at Alice.  Node ``j`` on a path sits at the
left end of edge ``j``: node 1 is Alice, node ``l_i + 1`` is Bob, and nodes
``2..l_i`` are the intermediate repeaters.  Edge ``j`` carries key
``q[i, j]``, which is held by node ``j`` and node ``j + 1``.  Each holder has
its own copy and deletes it independently.

A relay at node ``j`` turns the delivered ciphertext ``c'[i, j-1]`` into
``c[i, j] = c'[i, j-1] - q[i, j-1] + q[i, j]`` and then deletes both of its
keys.  Deleted copies become tombstones.  Reading a tombstone raises
:class:`DeletedKeyError`, which is a hard error and not a rejection.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from .gf import FieldElement, FieldSpec
from .rng import Rng
from .sss import SharingScheme, ShareVector, Vector, vec_add, vec_sub

Ciphertext = Vector


class DeletedKeyError(RuntimeError):
    """A key copy was read after its holder deleted it."""


class TopologyError(ValueError):
    """Path or node index outside the network."""


@dataclass(frozen=True)
class RelayNetwork:
    n: int
    lengths: tuple[int, ...]
    field: FieldSpec
    width: int
    epsilon: Fraction = Fraction(0)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one path")
        if len(self.lengths) != self.n:
            raise ValueError(f"{len(self.lengths)} path lengths given for n={self.n}")
        if any(l < 1 for l in self.lengths):
            raise ValueError("every path needs at least one edge")
        if self.width < 1:
            raise ValueError("key width must be positive")
        object.__setattr__(self, "lengths", tuple(self.lengths))
        object.__setattr__(self, "epsilon", Fraction(self.epsilon))

    @property
    def ell(self) -> int:
        return max(self.lengths)

    @property
    def key_count(self) -> int:
        return sum(self.lengths)

    def length(self, i: int) -> int:
        self.check_path(i)
        return self.lengths[i - 1]

    def check_path(self, i: int) -> None:
        if not 1 <= i <= self.n:
            raise TopologyError(f"path {i} outside 1..{self.n}")

    def check_relay_node(self, i: int, j: int) -> None:
        self.check_path(i)
        if not 2 <= j <= self.lengths[i - 1]:
            raise TopologyError(f"path {i} has relay nodes 2..{self.lengths[i - 1]}, got {j}")

    def edges(self):
        for i in range(1, self.n + 1):
            for j in range(1, self.lengths[i - 1] + 1):
                yield i, j

    def confidentiality_bound(self) -> Fraction:
        """n * l * eps: distance from 1/2 allowed for distinguishing."""
        return self.n * self.ell * self.epsilon

    def integrity_bound(self, delta: Fraction) -> Fraction:
        return self.n * self.ell * self.epsilon + Fraction(delta)


class _Tombstone:
    __slots__ = ()

    def __repr__(self):
        return "<deleted>"


_DELETED = _Tombstone()


class KeyTable:
    """Per-holder copies of every edge key."""

    def __init__(self, net: RelayNetwork, keys: Mapping[tuple[int, int], Vector]):
        self.net = net
        self._copies: dict[tuple[int, int, int], object] = {}
        for (i, j), k in keys.items():
            if len(k) != net.width:
                raise ValueError(f"key ({i},{j}) has width {len(k)}, expected {net.width}")
            self._copies[(i, j, j)] = tuple(k)
            self._copies[(i, j, j + 1)] = tuple(k)
        missing = set(net.edges()) - set(keys)
        if missing:
            raise ValueError(f"no key for edges {sorted(missing)}")

    def __len__(self):
        return self.net.key_count

    def read(self, i: int, j: int, holder: int) -> Vector:
        try:
            k = self._copies[(i, j, holder)]
        except KeyError:
            raise TopologyError(f"node {holder} holds no key for edge ({i},{j})") from None
        if k is _DELETED:
            raise DeletedKeyError(f"key ({i},{j}) already deleted at node {holder}")
        return k

    def delete(self, i: int, j: int, holder: int) -> None:
        self.read(i, j, holder)
        self._copies[(i, j, holder)] = _DELETED

    def is_deleted(self, i: int, j: int, holder: int) -> bool:
        return self._copies[(i, j, holder)] is _DELETED

    def live_copies(self) -> int:
        return sum(1 for v in self._copies.values() if v is not _DELETED)


@dataclass
class RelayLedger:
    """Relay set R, corrupted paths T, ciphertexts, and the event trace."""

    relayed: set = field(default_factory=set)
    corrupted: set = field(default_factory=set)
    sent: dict = field(default_factory=dict)
    delivered: dict = field(default_factory=dict)
    events: list = field(default_factory=list)

    def log(self, event: str, i: int, j: int, ciphertext: Optional[Vector] = None) -> None:
        self.events.append({
            "event": event,
            "i": i,
            "j": j,
            "ciphertext": None if ciphertext is None else [e.hex() for e in ciphertext],
            "ordinal": len(self.events),
        })

    def trace_lines(self) -> list[str]:
        return [json.dumps(e, sort_keys=True) for e in self.events]

    def fully_relayed(self, net: RelayNetwork, i: int) -> bool:
        return all((i, j) in self.relayed for j in range(2, net.length(i) + 1))

    def path_offset(self, net: RelayNetwork, i: int) -> Optional[Vector]:
        """Sum over edges of delivered minus sent ciphertext, if every edge has both."""
        total = None
        for j in range(1, net.length(i) + 1):
            diff = vec_sub(self.delivered.get((i, j)), self.sent.get((i, j)))
            if diff is None:
                return None
            total = diff if total is None else vec_add(total, diff)
        return total


def network_setup(
    n: int,
    lengths: Sequence[int],
    field: FieldSpec,
    width: int,
    rng: Rng,
    epsilon: Fraction | int | str = 0,
) -> tuple[RelayNetwork, KeyTable]:
    """Fresh network with one uniform key vector per edge (ideal keys)."""
    net = RelayNetwork(n, tuple(lengths), field, width, Fraction(epsilon))
    keys = {(i, j): field.random_vector(rng, width) for i, j in net.edges()}
    return net, KeyTable(net, keys)


def alice_send(net: RelayNetwork, keys: KeyTable, ledger: RelayLedger,
               shares: ShareVector) -> list[Ciphertext]:
    if len(shares) != net.n:
        raise ValueError(f"{len(shares)} shares for {net.n} paths")
    if any(s is None for s in shares):
        raise ValueError("Alice cannot send a missing share")
    out = []
    for i, s in enumerate(shares, start=1):
        q = keys.read(i, 1, 1)
        c = vec_add(s, q)
        keys.delete(i, 1, 1)
        ledger.sent[(i, 1)] = c
        ledger.log("send", i, 1, c)
        out.append(c)
    return out


def relay_hop(net: RelayNetwork, keys: KeyTable, ledger: RelayLedger,
              i: int, j: int, delivered: Ciphertext) -> Optional[Ciphertext]:
    """Re-encrypt at node j of path i; ``None`` if that node already relayed."""
    net.check_relay_node(i, j)
    if (i, j) in ledger.relayed:
        return None
    if delivered is None or len(delivered) != net.width:
        raise ValueError(f"relay ({i},{j}) needs a ciphertext of width {net.width}")
    q_in = keys.read(i, j - 1, j)
    q_out = keys.read(i, j, j)
    c = vec_add(vec_sub(tuple(delivered), q_in), q_out)
    keys.delete(i, j - 1, j)
    keys.delete(i, j, j)
    ledger.relayed.add((i, j))
    ledger.delivered[(i, j - 1)] = tuple(delivered)
    ledger.sent[(i, j)] = c
    ledger.log("deliver", i, j - 1, tuple(delivered))
    ledger.log("relay", i, j, c)
    return c


def corrupt(net: RelayNetwork, keys: KeyTable, ledger: RelayLedger,
            i: int, j: int) -> Optional[tuple[Vector, Vector]]:
    """Keys held by node j of path i, or ``None`` once that node has relayed."""
    net.check_relay_node(i, j)
    if (i, j) in ledger.relayed:
        return None
    ledger.corrupted.add(i)
    ledger.log("corrupt", i, j)
    return keys.read(i, j - 1, j), keys.read(i, j, j)


def bob_decrypt(net: RelayNetwork, keys: KeyTable, ledger: RelayLedger,
                delivered: Sequence[Optional[Ciphertext]]) -> ShareVector:
    if len(delivered) != net.n:
        raise ValueError(f"{len(delivered)} deliveries for {net.n} paths")
    shares = []
    for i, c in enumerate(delivered, start=1):
        l = net.length(i)
        if c is None:
            keys.delete(i, l, l + 1)
            ledger.log("receive", i, l, None)
            shares.append(None)
            continue
        if len(c) != net.width:
            raise ValueError(f"delivery on path {i} has width {len(c)}")
        q = keys.read(i, l, l + 1)
        keys.delete(i, l, l + 1)
        ledger.delivered[(i, l)] = tuple(c)
        ledger.log("receive", i, l, tuple(c))
        shares.append(vec_sub(tuple(c), q))
    return ShareVector(tuple(shares))


def bob_receive(net: RelayNetwork, keys: KeyTable, ledger: RelayLedger,
                delivered: Sequence[Optional[Ciphertext]],
                scheme: SharingScheme) -> Optional[Vector]:
    return scheme.recover(bob_decrypt(net, keys, ledger, delivered))


def run_protocol(
    net: RelayNetwork,
    keys: KeyTable,
    scheme: SharingScheme,
    secret: Sequence[FieldElement],
    rng: Rng,
    tamper: Optional[Mapping[tuple[int, int], Vector]] = None,
    drop: Sequence[int] = (),
) -> tuple[Optional[Vector], RelayLedger]:
    """End-to-end run with an on-path adversary that only adds offsets.

    ``tamper[(i, j)]`` is added to the ciphertext on edge ``j`` of path ``i``
    before it is delivered; paths in ``drop`` deliver nothing to Bob.
    """
    tamper = dict(tamper or {})
    ledger = RelayLedger()
    shares = scheme.share(secret, rng)
    if shares.width() != net.width:
        raise ValueError("scheme share length does not match the network key width")
    c = alice_send(net, keys, ledger, shares)
    final = []
    for i in range(1, net.n + 1):
        cur = c[i - 1]
        for j in range(1, net.length(i) + 1):
            if (i, j) in tamper:
                cur = vec_add(cur, tuple(tamper[(i, j)]))
            if j < net.length(i):
                cur = relay_hop(net, keys, ledger, i, j + 1, cur)
        final.append(None if i in drop else cur)
    out = bob_receive(net, keys, ledger, final, scheme)
    ledger.log("output", 0, 0, out)
    return out, ledger
