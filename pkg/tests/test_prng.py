from pathlib import Path

import numpy as np
import pytest

from tabhash import ConfigError, TabPrng, load_stream, save_stream
from tabhash.hashers import MersennePoly, MersennePolyParams

DATA = Path(__file__).parent / "data"


def test_same_seed_same_state():
    a = TabPrng(seed=99, row_len=8, degree=3)
    b = TabPrng(seed=99, row_len=8, degree=3)
    assert (a.t2 == b.t2).all()
    assert a.r1 == b.r1
    assert [a.next() for _ in range(100)] == [b.next() for _ in range(100)]


def test_row_len_one_degenerates_to_poly_stream():
    p = TabPrng(seed=5, row_len=1, degree=4)
    t2_0 = int(p.t2[0])
    outs = [p.next() for _ in range(20)]
    assert outs == [p.row_word(i) ^ t2_0 for i in range(20)]


def test_golden_first_sixteen():
    params, words = load_stream(DATA / "prng_seed0x1234_r4_d2.tprn")
    assert params == {"seed": 0x1234, "row_len": 4, "degree": 2, "out_bits": 32}
    p = TabPrng(seed=0x1234, row_len=4, degree=2, out_bits=32)
    assert [p.next() for _ in range(16)] == [int(w) for w in words]


def test_zero_state_gives_zero_stream():
    p = TabPrng(seed=1, row_len=4, degree=2)
    p.t2 = np.zeros(4, dtype=np.uint64)
    p._poly = MersennePoly(MersennePolyParams(coeffs=(0,), out_bits=p.out_bits))
    p.r1 = p.row_word(0)
    assert [p.next() for _ in range(10)] == [0] * 10


def test_two_entry_window():
    p = TabPrng(seed=3, row_len=2, degree=2)
    u, v = int(p.t2[0]), int(p.t2[1])
    w = p.r1
    assert p.next() == w ^ u
    assert p.next() == w ^ v
    w2 = p.r1
    assert p.next() == w2 ^ u


def test_row_pair_xor_relation():
    p = TabPrng(seed=8, row_len=16, degree=3)
    outs = p.block(64)
    r = [p.row_word(j) for j in range(4)]
    for i in range(48):
        assert int(outs[i]) ^ int(outs[i + 16]) == r[i // 16] ^ r[i // 16 + 1]


def test_block_equals_sequential():
    a = TabPrng(seed=13, row_len=8, degree=4)
    b = TabPrng(seed=13, row_len=8, degree=4)
    blk = a.block(1000)
    seq = [b.next() for _ in range(1000)]
    assert [int(x) for x in blk] == seq
    # state advanced identically
    assert a.next() == b.next()


def test_stream_file_roundtrip(tmp_path):
    path = tmp_path / "stream.tprn"
    save_stream(path, seed=21, count=100, row_len=8, degree=2, out_bits=16)
    params, words = load_stream(path)
    p = TabPrng(seed=21, row_len=8, degree=2, out_bits=16)
    assert (p.block(100) == words).all()
    assert params["out_bits"] == 16


def test_config_errors():
    with pytest.raises(ConfigError):
        TabPrng(seed=1, row_len=3)
    with pytest.raises(ConfigError):
        TabPrng(seed=1, row_len=4, degree=0)
    with pytest.raises(ConfigError):
        TabPrng(seed=1, out_bits=62)
    with pytest.raises(ConfigError):
        load_stream(DATA / "tab_c4cb8ob32_seed0x42.tabh")
