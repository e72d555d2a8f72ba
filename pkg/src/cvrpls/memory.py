"""Global memory of decoded routes.

Two maps: seq_map memoizes decoder output per visit *sequence* (keyed by
the four route hashes plus length and input distance), set_map keeps the
single cheapest order ever decoded per visit *set*. Lookups that hit
skip the decoder entirely; with tunneling enabled a decode may return
the set's best-known order instead of the decoder's own output.

seq_map honors a hard entry cap: when an insert would exceed it, the
lower-frequency half is evicted (ties broken against older entries).
set_map is deliberately exempt, one entry per distinct set is cheap.
"""

import heapq
import json
from dataclasses import dataclass, field
from typing import NamedTuple


class RouteKey(NamedTuple):
    hp1: int
    hp2: int
    hs1: int
    hs2: int
    length: int
    c_in: int


@dataclass
class MemoryEntry:
    decoded: tuple
    cost: int
    freq: int = 0
    age: int = 0


@dataclass
class GlobalMemory:
    m_max: int = 10 ** 6
    tunneling: bool = False
    seq_map: dict = field(default_factory=dict)
    set_map: dict = field(default_factory=dict)
    lookups: int = 0
    hits: int = 0
    stores: int = 0
    evicted: int = 0
    evict_events: int = 0
    tunnel_hits: int = 0
    decoder_calls: int = 0
    bs_passes: int = 0
    _age: int = 0

    def __post_init__(self):
        if self.m_max < 2:
            raise ValueError("m_max must be at least 2")

    def lookup(self, key):
        """Entry for the exact sequence, or None. Hits bump freq."""
        self.lookups += 1
        entry = self.seq_map.get(key)
        if entry is not None:
            entry.freq += 1
            self.hits += 1
        return entry

    def store(self, key, decoded, cost, load):
        decoded = tuple(int(x) for x in decoded)
        if key not in self.seq_map and len(self.seq_map) >= self.m_max:
            self.evict_half()
        self._age += 1
        self.seq_map[key] = MemoryEntry(decoded, int(cost), 0, self._age)
        self.stores += 1
        skey = (key.hs1, key.hs2, key.length, load)
        best = self.set_map.get(skey)
        if best is None or cost < best[1]:
            self.set_map[skey] = (decoded, int(cost))

    def evict_half(self):
        """Drop the floor(size/2) lowest-frequency entries, oldest first
        among equal frequencies."""
        drop = len(self.seq_map) // 2
        if drop == 0:
            return
        victims = heapq.nsmallest(
            drop, self.seq_map.items(), key=lambda kv: (kv[1].freq, kv[1].age))
        for key, _ in victims:
            del self.seq_map[key]
        self.evicted += drop
        self.evict_events += 1

    def set_best(self, skey):
        return self.set_map.get(skey)

    def decode_with_tunneling(self, visits, key, load, decoder):
        """Memoized decode of a visit sequence.

        decoder(visits) must return (cost, order, bs_pass_count) and is
        only consulted on a seq_map miss. With tunneling on, the result
        is whichever is cheaper of the decode and the set's best-known
        order; off, the decode is returned as-is. Returns (cost, order
        tuple).
        """
        entry = self.lookup(key)
        if entry is None:
            cost, order, passes = decoder(visits)
            self.decoder_calls += 1
            self.bs_passes += passes
            order = tuple(int(x) for x in order)
            self.store(key, order, cost, load)
        else:
            cost, order = entry.cost, entry.decoded
        if self.tunneling:
            best = self.set_map.get((key.hs1, key.hs2, key.length, load))
            if best is not None and best[1] < cost:
                self.tunnel_hits += 1
                return best[1], best[0]
        return cost, order

    decode = decode_with_tunneling

    def hit_rate(self):
        return self.hits / self.lookups if self.lookups else 0.0

    def stats(self):
        return {
            "entries": len(self.seq_map),
            "sets": len(self.set_map),
            "lookups": self.lookups,
            "hits": self.hits,
            "hit_rate": self.hit_rate(),
            "stores": self.stores,
            "evicted": self.evicted,
            "evict_events": self.evict_events,
            "tunnel_hits": self.tunnel_hits,
            "decoder_calls": self.decoder_calls,
            "bs_passes": self.bs_passes,
        }

    def dump_set_map(self, path):
        """Versioned JSON dump of the per-set bests (diagnostics)."""
        entries = [
            {"hs1": k[0], "hs2": k[1], "len": k[2], "load": k[3],
             "cost": v[1], "order": list(v[0])}
            for k, v in sorted(self.set_map.items())
        ]
        payload = {"version": 1, "tunneling": self.tunneling,
                   "entries": entries}
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=1)
