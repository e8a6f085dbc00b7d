import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tabhash import (
    CapacityError,
    CuckooTable,
    DuplicateKeyError,
    KeyNotFoundError,
    LinearProbingTable,
    PreconditionError,
    QueryBin,
    TabulationParams,
    TabulationScheme,
    bins_distribute,
    cuckoo_build_static,
    tab_init,
)
from tabhash.hashers import parse_scheme


def fixed_home_scheme(homes, m=8, key_bits=3):
    """c=1 scheme whose bin in an m-slot table equals homes[key]."""
    out_bits = (m - 1).bit_length() if m > 1 else 1
    p = TabulationParams(c=1, char_bits=key_bits, out_bits=out_bits)
    tables = np.zeros((1, 1 << key_bits), dtype=np.uint64)
    for key, home in enumerate(homes):
        tables[0][key] = home
    return TabulationScheme(p, tables)


# --- linear probing ---------------------------------------------------------

def test_lp_insert_examples():
    scheme = fixed_home_scheme([2, 2, 2, 7, 7, 0, 0, 0])
    t = LinearProbingTable(8, scheme)
    assert t.insert(0) == 1
    assert t._slots[2] == 0
    assert t.insert(1) == 2  # same home, lands at 3
    assert t._slots[3] == 1


def test_lp_scripted_fill_probe_counts():
    # homes [2,2,2,7,7,0]: expected placements and probe counts worked out
    # against a straightforward array simulation
    scheme = fixed_home_scheme([2, 2, 2, 7, 7, 0, 0, 0])
    t = LinearProbingTable(8, scheme)
    probes = [t.insert(k) for k in range(6)]
    assert probes == [1, 2, 3, 1, 2, 2]
    assert t._slots == [4, 5, 0, 1, 2, None, None, 3]
    t.audit()

    found, p = t.search(2)
    assert found and p == 3
    assert p <= probes[2]  # successful search never beats the insertion scan
    found, p = t.search(6)  # absent, home 0: run 0,1,2,3,4 filled, 5 empty
    assert not found and p == 6

    assert t.delete(0) == 4  # run from home 2 has keys {0,1,2}, then slot 5 empty
    assert t._slots == [4, 5, 1, 2, None, None, None, 3]
    t.audit()


def test_lp_search_empty_and_fresh():
    scheme = fixed_home_scheme([5] * 8)
    t = LinearProbingTable(8, scheme)
    found, p = t.search(3)
    assert not found and p == 1


def test_lp_delete_sole_key_and_backshift():
    scheme = fixed_home_scheme([2, 2, 0, 0, 0, 0, 0, 0])
    t = LinearProbingTable(8, scheme)
    t.insert(0)
    assert t.delete(0) == 2  # run length 1 plus the empty slot
    assert t.size == 0

    t.insert(0)
    t.insert(1)  # collides, sits at 3
    t.delete(0)
    assert t._slots[2] == 1  # back-shifted into its reachable slot
    t.audit()


def test_lp_errors():
    scheme = fixed_home_scheme([0] * 8)
    t = LinearProbingTable(8, scheme)
    t.insert(1)
    with pytest.raises(DuplicateKeyError):
        t.insert(1)
    with pytest.raises(KeyNotFoundError):
        t.delete(7)
    for k in (2, 3, 4, 5, 6, 7):
        t.insert(k)
    assert t.size == 7  # m - 1 keys: exactly one slot free
    with pytest.raises(CapacityError):
        t.insert(0)  # the last slot is always kept free


def test_lp_audit_dump_format():
    scheme = fixed_home_scheme([3, 3, 0, 0, 0, 0, 0, 0])
    t = LinearProbingTable(8, scheme)
    t.insert(0)
    t.insert(1)
    assert t.audit_dump() == ["3,0,3", "4,1,3"]


class ReferenceLP:
    """Deliberately-naive replay oracle: dict of slots, recomputes everything."""

    def __init__(self, m, scheme):
        self.m = m
        self.scheme = scheme
        self.slots = {}

    def home(self, key):
        return self.scheme.bin_of(key, self.m)

    def insert(self, key):
        j = self.home(key)
        p = 1
        while j in self.slots:
            j = (j + 1) % self.m
            p += 1
        self.slots[j] = key
        return p

    def search(self, key):
        j = self.home(key)
        p = 1
        while j in self.slots:
            if self.slots[j] == key:
                return True, p
            j = (j + 1) % self.m
            p += 1
        return False, p

    def delete(self, key):
        j = self.home(key)
        pos = None
        p = 0
        while j in self.slots:
            p += 1
            if self.slots[j] == key:
                pos = j
            j = (j + 1) % self.m
        p += 1
        assert pos is not None
        del self.slots[pos]
        hole = pos
        j = (pos + 1) % self.m
        while j in self.slots:
            hj = self.home(self.slots[j])
            if ((hole - hj) % self.m) < ((j - hj) % self.m):
                self.slots[hole] = self.slots.pop(j)
                hole = j
            j = (j + 1) % self.m
        return p


@given(st.integers(0, 10_000), st.lists(
    st.tuples(st.booleans(), st.integers(0, 63)), min_size=1, max_size=50,
))
@settings(max_examples=120, deadline=None)
def test_lp_matches_reference_simulation(seed, script):
    params = TabulationParams(c=2, char_bits=3, out_bits=4)
    scheme = tab_init(params, seed=seed)
    table = LinearProbingTable(16, scheme)
    ref = ReferenceLP(16, scheme)
    present: set = set()
    for is_insert, key in script:
        if is_insert:
            if key in present or len(present) >= 15:
                continue
            assert table.insert(key) == ref.insert(key)
            present.add(key)
        else:
            if key not in present:
                continue
            assert table.delete(key) == ref.delete(key)
            present.remove(key)
        table.audit()
    assert {s: k for s, k in enumerate(table._slots) if k is not None} == ref.slots


def test_lp_random_script_final_multiset():
    """1e3 random ops: stored key multiset equals the reference's."""
    params = TabulationParams(c=2, char_bits=4, out_bits=6)
    scheme = tab_init(params, seed=77)
    table = LinearProbingTable(64, scheme)
    ref = ReferenceLP(64, scheme)
    rng = np.random.default_rng(123)
    present = set()
    for _ in range(1000):
        key = int(rng.integers(0, 256))
        if key in present:
            table.delete(key)
            ref.delete(key)
            present.remove(key)
        elif len(present) < 63:
            table.insert(key)
            ref.insert(key)
            present.add(key)
    assert sorted(table.keys()) == sorted(ref.slots.values())
    assert sorted(table.keys()) == sorted(present)


# --- cuckoo -----------------------------------------------------------------

def zero_scheme(m):
    p = TabulationParams(c=1, char_bits=6, out_bits=max((m - 1).bit_length(), 1))
    return TabulationScheme(p, np.zeros((1, 64), dtype=np.uint64))


def test_cuckoo_build_two_colliding_keys_succeed():
    z = zero_scheme(4)
    res = cuckoo_build_static([1, 2], z, z, 4)
    assert res.success
    slots = set(res.placement.values())
    assert len(slots) == 2  # one on each side
    assert {side for side, _ in slots} == {0, 1}


def test_cuckoo_build_three_colliding_keys_fail_with_certificate():
    z = zero_scheme(4)
    res = cuckoo_build_static([1, 2, 3], z, z, 4)
    assert not res.success
    assert sorted(res.certificate) == [1, 2, 3]


def _observation_schemes():
    """c=3 schemes realizing the six-key obstruction: h0 collides the three
    two-character half-keys, h1 collides the two one-character half-keys."""
    p = TabulationParams(c=3, char_bits=4, out_bits=6)
    t0 = np.zeros((3, 16), dtype=np.uint64)  # h0 tables
    t1 = np.zeros((3, 16), dtype=np.uint64)  # h1 tables
    # h0: character 0 distinguishes x=1 / y=2; positions 1,2 all equal
    t0[0][1] = 0b000001
    t0[0][2] = 0b000010
    # h1: position 0 equal for x,y; half-keys a=(1,1), b=(2,2), c=(3,3) distinct
    t1[1][1], t1[2][1] = 0b000100, 0
    t1[1][2], t1[2][2] = 0b001000, 0
    t1[1][3], t1[2][3] = 0b001100, 0
    h0 = TabulationScheme(p, t0)
    h1 = TabulationScheme(p, t1)
    keys = [(a << 8) | (a << 4) | x for a in (1, 2, 3) for x in (1, 2)]
    return h0, h1, keys


def test_cuckoo_observation_pattern_fails():
    h0, h1, keys = _observation_schemes()
    res = cuckoo_build_static(keys, h0, h1, 64)
    assert not res.success
    assert sorted(res.certificate) == sorted(keys)


def test_cuckoo_build_rejects_duplicates():
    z = zero_scheme(4)
    with pytest.raises(PreconditionError):
        cuckoo_build_static([1, 1], z, z, 4)


def test_cuckoo_build_placement_valid_random():
    spec = parse_scheme("tab:c=2,char_bits=8,out_bits=16")
    rng = np.random.default_rng(5)
    for trial in range(30):
        n = int(rng.integers(1, 60))
        keys = rng.choice(1 << 16, size=n, replace=False).astype(np.uint64)
        h0 = spec.instantiate(1000 + trial)
        h1 = spec.instantiate(2000 + trial)
        res = cuckoo_build_static(keys, h0, h1, 64)
        if res.success:
            used = set()
            for key, (side, slot) in res.placement.items():
                scheme = h0 if side == 0 else h1
                assert scheme.bin_of(key, 64) == slot
                assert (side, slot) not in used
                used.add((side, slot))
            assert len(res.placement) == n


def test_cuckoo_insert_walks():
    z = zero_scheme(4)
    t = CuckooTable(4, lambda seed: z, seed=0)
    r = t.insert(10)
    assert r.placed and r.evictions == 0
    r = t.insert(11)  # h0 slot occupied; evicted key finds free h1 slot
    assert r.placed and r.evictions == 1
    assert 10 in t and 11 in t


def test_cuckoo_insert_hard_pattern_signals_rehash():
    h0, h1, keys = _observation_schemes()
    schemes = [h0, h1]
    t = CuckooTable(64, lambda seed: schemes.pop(0) if schemes else zero_scheme(64), seed=0)
    t.h0, t.h1 = h0, h1  # pin the obstructed pair
    outcomes = [t.insert(k) for k in keys]
    assert all(r.placed for r in outcomes[:5])
    assert not outcomes[5].placed
    assert outcomes[5].outcome == "needs_rehash"


def test_cuckoo_rehash_restores_and_counts():
    spec = parse_scheme("tab:c=2,char_bits=8,out_bits=16")
    t = CuckooTable(8, lambda seed: spec.instantiate(seed), seed=42)
    stored = [3, 9, 27, 81, 243]
    for k in stored:
        if not t.insert(k).placed:
            t.rehash()
    before = t.rehash_count
    t.rehash()
    assert t.rehash_count > before
    assert all(k in t for k in stored)
    assert len(t) == len(stored)
    t.audit()


def test_cuckoo_insert_duplicate_rejected():
    z = zero_scheme(4)
    t = CuckooTable(4, lambda seed: z, seed=0)
    t.insert(5)
    with pytest.raises(DuplicateKeyError):
        t.insert(5)


# --- bins -------------------------------------------------------------------

def test_bins_single_bin():
    scheme = parse_scheme("tab-c2").instantiate(1)
    hist = bins_distribute(np.arange(10, dtype=np.uint64), scheme, 1)
    assert hist.counts.tolist() == [10]


def test_bins_match_direct_evaluation():
    p = TabulationParams(c=2, char_bits=8, out_bits=8)
    tables = np.zeros((2, 256), dtype=np.uint64)
    tables[0][:4] = [0x80, 0x00, 0xFF, 0x10]
    s = TabulationScheme(p, tables)
    keys = np.array([0, 1, 2, 3], dtype=np.uint64)
    hist = bins_distribute(keys, s, 2)
    expected = np.bincount([s.hash(k) >> 7 for k in range(4)], minlength=2)
    assert hist.counts.tolist() == expected.tolist()
    assert hist.counts.tolist() == [2, 2]  # 0x00,0x10 low; 0x80,0xFF high


def test_bins_empty_set():
    scheme = parse_scheme("tab-c2").instantiate(1)
    hist = bins_distribute(np.array([], dtype=np.uint64), scheme, 4)
    assert hist.counts.tolist() == [0, 0, 0, 0]


def test_bins_conservation_and_weights():
    scheme = parse_scheme("tab-c2").instantiate(3)
    keys = np.arange(500, dtype=np.uint64)
    weights = np.linspace(0, 1, 500)
    hist = bins_distribute(keys, scheme, 16, weights=weights)
    assert hist.total == 500
    assert hist.weight_sums is not None
    assert abs(hist.weight_sums.sum() - weights.sum()) < 1e-9


def test_bins_query_selector_precondition():
    scheme = parse_scheme("tab-c2").instantiate(3)
    keys = np.arange(10, dtype=np.uint64)
    hist = bins_distribute(keys, scheme, 8, bin_selector=QueryBin(q=1000))
    assert hist.selected_bin == scheme.bin_of(1000, 8)
    with pytest.raises(PreconditionError):
        bins_distribute(keys, scheme, 8, bin_selector=QueryBin(q=5))


def test_bins_query_selector_pluggable():
    scheme = parse_scheme("tab-c2").instantiate(3)
    keys = np.arange(10, dtype=np.uint64)
    hist = bins_distribute(
        keys, scheme, 8, bin_selector=QueryBin(q=1000, selector=lambda h: h & 0b111)
    )
    assert hist.selected_bin == scheme.hash(1000) & 0b111
    fixed = bins_distribute(keys, scheme, 8, bin_selector=5)
    assert fixed.selected_bin == 5
