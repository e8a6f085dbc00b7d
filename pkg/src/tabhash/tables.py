"""Open-addressing structures instrumented to expose probe and failure counts."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import (
    CapacityError,
    ConfigError,
    DuplicateKeyError,
    KeyNotFoundError,
    PreconditionError,
)
from .hashers import HashScheme
from .rng import derive_seed


def _check_power_of_two(m: int, what: str = "capacity") -> None:
    if m < 1 or m & (m - 1):
        raise ConfigError(f"{what} must be a power of two, got {m}")


# ---------------------------------------------------------------------------
# Linear probing
# ---------------------------------------------------------------------------

class LinearProbingTable:
    """Linear probing with back-shift deletion.

    Back-shifting (instead of tombstones) keeps the run structure equal to
    what the stored key set alone dictates, so probe counts measure the
    quantity the analysis is about. One slot is always kept free.
    """

    def __init__(self, m: int, scheme: HashScheme):
        _check_power_of_two(m)
        self.m = m
        self.scheme = scheme
        self._slots: list[int | None] = [None] * m
        self._homes: list[int] = [0] * m  # parallel cache of each stored key's home
        self.size = 0
        self.total_probes = 0
        self.op_probes: list[int] = []

    def home(self, key: int) -> int:
        return self.scheme.bin_of(key, self.m)

    def _record(self, probes: int) -> int:
        self.total_probes += probes
        self.op_probes.append(probes)
        return probes

    def insert(self, key: int) -> int:
        """Place key at the first empty slot at or after home(key); returns probes."""
        if self.size >= self.m - 1:
            raise CapacityError("table full (one slot is kept free)")
        mask = self.m - 1
        slots = self._slots
        h = self.home(key)
        j = h
        probes = 1
        while slots[j] is not None:
            if slots[j] == key:
                raise DuplicateKeyError(f"key {key:#x} already stored")
            j = (j + 1) & mask
            probes += 1
        slots[j] = key
        self._homes[j] = h
        self.size += 1
        return self._record(probes)

    def search(self, key: int) -> tuple[bool, int]:
        """Scan from home(key) to a match or the first empty slot."""
        mask = self.m - 1
        slots = self._slots
        j = self.home(key)
        probes = 1
        while slots[j] is not None:
            if slots[j] == key:
                return True, self._record(probes)
            j = (j + 1) & mask
            probes += 1
            if probes > self.m:  # full-table wrap; cannot happen with a free slot
                break
        return False, self._record(probes)

    def delete(self, key: int) -> int:
        """Remove key; probes = full run from home(key) to the trailing empty slot."""
        mask = self.m - 1
        slots = self._slots
        homes = self._homes
        h = self.home(key)
        j = h
        pos = None
        probes = 0
        while slots[j] is not None:
            probes += 1
            if slots[j] == key:
                pos = j
            j = (j + 1) & mask
        probes += 1  # the empty slot ending the run
        if pos is None:
            raise KeyNotFoundError(key)
        # back-shift: pull runners-up into the hole while their home allows it
        i = pos
        j = (pos + 1) & mask
        while slots[j] is not None:
            hj = homes[j]
            if ((i - hj) & mask) < ((j - hj) & mask):
                slots[i] = slots[j]
                homes[i] = hj
                i = j
            j = (j + 1) & mask
        slots[i] = None
        self.size -= 1
        return self._record(probes)

    def run_length(self, key: int) -> int:
        """R(q, S): occupied stretch starting at home(key)."""
        mask = self.m - 1
        slots = self._slots
        j = self.home(key)
        r = 0
        while slots[j] is not None and r < self.m:
            r += 1
            j = (j + 1) & mask
        return r

    def keys(self) -> list[int]:
        return [k for k in self._slots if k is not None]

    def audit(self) -> None:
        """Verify the reachability invariant for every stored key."""
        mask = self.m - 1
        count = 0
        for s, key in enumerate(self._slots):
            if key is None:
                continue
            count += 1
            h = self.home(key)
            j = h
            while j != s:
                if self._slots[j] is None:
                    raise AssertionError(f"key {key:#x} at slot {s} unreachable from home {h}")
                j = (j + 1) & mask
        if count != self.size:
            raise AssertionError(f"size {self.size} != occupied slots {count}")

    def audit_dump(self) -> list[str]:
        """Diagnostic lines 'slot,keyhex,homeslot' for occupied slots."""
        return [
            f"{s},{key:x},{self.home(key)}"
            for s, key in enumerate(self._slots)
            if key is not None
        ]


# ---------------------------------------------------------------------------
# Cuckoo hashing
# ---------------------------------------------------------------------------

@dataclass
class CuckooBuildResult:
    """Outcome of a static build; failure is a value, not an error."""

    success: bool
    placement: dict[int, tuple[int, int]] | None = None  # key -> (side, slot)
    certificate: list[int] = field(default_factory=list)  # keys of an offending component


def cuckoo_build_static(
    keys,
    h0: HashScheme,
    h1: HashScheme,
    m: int,
    want_placement: bool = True,
) -> CuckooBuildResult:
    """Static cuckoo placement via the component criterion.

    Builds the bipartite multigraph with an edge (h0(x), h1(x)) per key and
    succeeds iff no connected component has more edges than nodes. On success
    (and when requested) a placement is produced by leaf peeling plus cycle
    orientation; on failure the offending component's keys are the certificate.
    """
    _check_power_of_two(m)
    keys = np.asarray(keys, dtype=np.uint64)
    n = len(keys)
    if n == 0:
        return CuckooBuildResult(True, placement={} if want_placement else None)
    if len(np.unique(keys)) != n:
        raise PreconditionError("keys must be distinct")

    b0 = h0.bins_many(keys, m)
    b1 = h1.bins_many(keys, m) + m

    graph = coo_matrix(
        (np.ones(n, dtype=np.int8), (b0, b1)), shape=(2 * m, 2 * m)
    ).tocsr()
    ncomp, labels = connected_components(graph, directed=False)

    edges_per = np.bincount(labels[b0], minlength=ncomp)
    # count only nodes touched by an edge: untouched singletons never offend
    touched = np.unique(np.concatenate([b0, b1]))
    nodes_per = np.bincount(labels[touched], minlength=ncomp)

    bad = np.nonzero(edges_per > nodes_per)[0]
    if len(bad):
        worst = bad[np.argmax(edges_per[bad] - nodes_per[bad])]
        certificate = [int(k) for k in keys[labels[b0] == worst]]
        return CuckooBuildResult(False, certificate=certificate)
    if not want_placement:
        return CuckooBuildResult(True)

    placement = _orient_components(keys, b0, b1, m)
    return CuckooBuildResult(True, placement=placement)


def _orient_components(keys, b0, b1, m) -> dict[int, tuple[int, int]]:
    """Assign each edge (key) to one endpoint: peel leaves, then walk cycles."""
    n = len(keys)
    adj: dict[int, list[int]] = {}
    for e in range(n):
        adj.setdefault(int(b0[e]), []).append(e)
        adj.setdefault(int(b1[e]), []).append(e)
    degree = {v: len(es) for v, es in adj.items()}
    alive = [True] * n
    assigned: dict[int, int] = {}  # edge -> node

    stack = [v for v, d in degree.items() if d == 1]
    while stack:
        v = stack.pop()
        if degree[v] != 1:
            continue
        e = next(e for e in adj[v] if alive[e])
        alive[e] = False
        assigned[e] = v
        degree[v] = 0
        u = int(b1[e]) if int(b0[e]) == v else int(b0[e])
        if u != v:
            degree[u] -= 1
            if degree[u] == 1:
                stack.append(u)

    # remaining alive edges form simple cycles (success guarantees it): walk
    # each cycle assigning every edge to the node it leads into
    for e0 in range(n):
        if not alive[e0]:
            continue
        v = int(b0[e0])
        e = e0
        while alive[e]:
            alive[e] = False
            u = int(b1[e]) if int(b0[e]) == v else int(b0[e])
            assigned[e] = u
            v = u
            e = next((x for x in adj[v] if alive[x]), e)

    out: dict[int, tuple[int, int]] = {}
    for e in range(n):
        node = assigned[e]
        side = 0 if node < m else 1
        out[int(keys[e])] = (side, node - side * m)
    return out


class CuckooInsertOutcome:
    PLACED = "placed"
    NEEDS_REHASH = "needs_rehash"


@dataclass
class CuckooInsertResult:
    outcome: str
    evictions: int

    @property
    def placed(self) -> bool:
        return self.outcome == CuckooInsertOutcome.PLACED


class CuckooTable:
    """Two-table cuckoo hashing with an eviction-chain cutoff.

    Inserts run the standard alternating eviction walk starting at table 0 and
    give up after `max_evictions` steps (default 6*ceil(lg n) + 32), signalling
    that a rehash is needed; the caller decides when to `rehash()`, which draws
    fresh seeds for both schemes and bumps `rehash_count`. After a failed walk
    the displaced key is held aside and reincorporated by the next rehash.
    """

    def __init__(self, m: int, scheme_factory, seed: int, max_evictions: int | None = None):
        _check_power_of_two(m)
        self.m = m
        self._factory = scheme_factory  # callable(seed) -> HashScheme
        self._seed = seed
        self.rehash_count = 0
        self.max_evictions = max_evictions
        self._tables: list[list[int | None]] = [[None] * m, [None] * m]
        self._homeless: int | None = None  # key displaced by a failed walk
        self.size = 0
        self._make_schemes()

    def _make_schemes(self) -> None:
        self.h0 = self._factory(derive_seed(self._seed, "h0", self.rehash_count))
        self.h1 = self._factory(derive_seed(self._seed, "h1", self.rehash_count))

    def _slot(self, side: int, key: int) -> int:
        return (self.h0 if side == 0 else self.h1).bin_of(key, self.m)

    def _cutoff(self) -> int:
        if self.max_evictions is not None:
            return self.max_evictions
        n = max(self.size + 1, 2)
        return 6 * math.ceil(math.log2(n)) + 32

    def __contains__(self, key: int) -> bool:
        return (
            self._tables[0][self._slot(0, key)] == key
            or self._tables[1][self._slot(1, key)] == key
            or self._homeless == key
        )

    def __len__(self) -> int:
        return self.size

    def insert(self, key: int) -> CuckooInsertResult:
        if key in self:
            raise DuplicateKeyError(f"key {key:#x} already stored")
        cutoff = self._cutoff()
        side = 0
        carried = key
        evictions = 0
        while evictions <= cutoff:
            slot = self._slot(side, carried)
            occupant = self._tables[side][slot]
            self._tables[side][slot] = carried
            if occupant is None:
                self.size += 1
                return CuckooInsertResult(CuckooInsertOutcome.PLACED, evictions)
            carried = occupant
            side ^= 1
            evictions += 1
        # undo is unnecessary: the displaced chain still stores every key once;
        # the carried key is the one left homeless
        self._homeless = carried
        return CuckooInsertResult(CuckooInsertOutcome.NEEDS_REHASH, evictions)

    def rehash(self) -> int:
        """Draw fresh schemes and reinsert everything (plus any homeless key).

        Retries with new seeds until a full reinsert succeeds; returns the
        number of attempts this call consumed.
        """
        stored = [k for t in self._tables for k in t if k is not None]
        if self._homeless is not None:
            stored.append(self._homeless)
            self._homeless = None
        attempts = 0
        while True:
            attempts += 1
            self.rehash_count += 1
            self._make_schemes()
            self._tables = [[None] * self.m, [None] * self.m]
            self.size = 0
            if all(self.insert(k).placed for k in stored):
                return attempts
            stored = [k for t in self._tables for k in t if k is not None]
            if self._homeless is not None:
                stored.append(self._homeless)
                self._homeless = None

    def audit(self) -> None:
        seen = 0
        for side in (0, 1):
            for slot, key in enumerate(self._tables[side]):
                if key is None:
                    continue
                seen += 1
                if self._slot(side, key) != slot:
                    raise AssertionError(f"key {key:#x} stored off its hash slot")
        if seen != self.size:
            raise AssertionError(f"size {self.size} != stored keys {seen}")


# ---------------------------------------------------------------------------
# Balls into bins
# ---------------------------------------------------------------------------

@dataclass
class BinHistogram:
    """Exact per-bin counts (optionally weight sums) for one distribution pass."""

    m: int
    counts: np.ndarray
    weight_sums: np.ndarray | None = None
    selected_bin: int | None = None

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def max_load(self) -> int:
        return int(self.counts.max()) if self.m else 0


@dataclass(frozen=True)
class QueryBin:
    """Selector: the bin F(h(q)) of a designated query key q not in the set.

    `selector` maps the query's hash code to a bin; default keeps the top
    lg m bits.
    """

    q: int
    selector: object = None

    def resolve(self, scheme: HashScheme, m: int) -> int:
        if self.selector is not None:
            return int(self.selector(scheme.hash(self.q))) % m
        return scheme.bin_of(self.q, m)


def bins_distribute(keys, scheme: HashScheme, m: int, bin_selector=None, weights=None) -> BinHistogram:
    """Hash keys into m bins (top lg m bits) and count exactly."""
    _check_power_of_two(m, "bin count")
    keys = np.asarray(keys, dtype=np.uint64)
    selected = None
    if bin_selector is not None:
        if isinstance(bin_selector, QueryBin):
            if len(keys) and (keys == np.uint64(bin_selector.q)).any():
                raise PreconditionError("query key must not be in the key set")
            selected = bin_selector.resolve(scheme, m)
        else:
            selected = int(bin_selector) % m
    bins = scheme.bins_many(keys, m)
    counts = np.bincount(bins, minlength=m)
    weight_sums = None
    if weights is not None:
        weights = np.asarray(weights, dtype=np.float64)
        if len(weights) != len(keys):
            raise PreconditionError("weights must match keys")
        weight_sums = np.bincount(bins, weights=weights, minlength=m)
    return BinHistogram(m=m, counts=counts, weight_sums=weight_sums, selected_bin=selected)
