"""Tabulation-based pseudorandom number generator with lopsided characters.

The output index i is split as (i div R, i mod R). Output i is
poly(i div R) xor T2[i mod R]: a tiny table T2 of R truly-random words is
scanned sequentially while the row word r1 = poly(row), evaluated over a
Mersenne prime and truncated to out_bits, is refreshed once per R outputs.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import ConfigError
from .hashers import MERSENNE_61, MersennePoly, MersennePolyParams
from .rng import StrongStream


class TabPrng:
    """Sequential stream; single-owner. Distinct seeds give independent streams."""

    def __init__(self, seed: int, row_len: int = 1024, degree: int = 32, out_bits: int = 32):
        if row_len < 1 or row_len & (row_len - 1):
            raise ConfigError(f"row length must be a power of two, got {row_len}")
        if degree < 1:
            raise ConfigError("degree must be >= 1")
        if not 1 <= out_bits <= 61:
            raise ConfigError("out_bits must be in 1..61 (row words live under 2^61-1)")
        self.seed = int(seed)
        self.row_len = row_len
        self.degree = degree
        self.out_bits = out_bits
        self._out_mask = (1 << out_bits) - 1

        stream = StrongStream(seed, label=b"tabprng")
        self.t2 = stream.words(row_len, out_bits)
        coeffs = []
        while len(coeffs) < degree:
            w = stream.word(61)
            if w < MERSENNE_61:
                coeffs.append(w)
        self._poly = MersennePoly(
            MersennePolyParams(coeffs=tuple(coeffs), p=MERSENNE_61, out_bits=out_bits)
        )
        self.row_index = 0
        self.col_index = 0
        self.r1 = self.row_word(0)

    def row_word(self, row: int) -> int:
        """The virtual first-character table entry: poly(row) truncated."""
        return self._poly.hash(row)

    def next(self) -> int:
        out = self.r1 ^ int(self.t2[self.col_index])
        self.col_index += 1
        if self.col_index == self.row_len:
            self.col_index = 0
            self.row_index += 1
            self.r1 = self.row_word(self.row_index)
        return out

    def block(self, count: int) -> np.ndarray:
        """The next `count` outputs, vectorized; advances the stream state."""
        if count < 0:
            raise ConfigError("count must be >= 0")
        out = np.empty(count, dtype=np.uint64)
        filled = 0
        while filled < count:
            take = min(self.row_len - self.col_index, count - filled)
            seg = self.t2[self.col_index:self.col_index + take]
            out[filled:filled + take] = np.uint64(self.r1) ^ seg
            filled += take
            self.col_index += take
            if self.col_index == self.row_len:
                self.col_index = 0
                self.row_index += 1
                self.r1 = self.row_word(self.row_index)
        return out


# Golden stream files: 24-byte header ("TPRN", version, out_bits, seed, R,
# degree), then each output as an 8-byte little-endian word.

_TPRN_MAGIC = b"TPRN"
_TPRN_VERSION = 1


def save_stream(path, seed: int, count: int, row_len: int = 1024, degree: int = 32,
                out_bits: int = 32) -> None:
    prng = TabPrng(seed, row_len=row_len, degree=degree, out_bits=out_bits)
    header = struct.pack("<4sBBxxQII", _TPRN_MAGIC, _TPRN_VERSION, out_bits,
                         seed, row_len, degree)
    words = prng.block(count).astype("<u8").tobytes()
    with open(path, "wb") as fh:
        fh.write(header + words)


def load_stream(path) -> tuple[dict, np.ndarray]:
    """Read a golden stream file: (parameters, words)."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 24 or blob[:4] != _TPRN_MAGIC:
        raise ConfigError(f"{path}: not a stream dump (bad magic)")
    _, version, out_bits, seed, row_len, degree = struct.unpack("<4sBBxxQII", blob[:24])
    if version != _TPRN_VERSION:
        raise ConfigError(f"{path}: unsupported version {version}")
    words = np.frombuffer(blob[24:], dtype="<u8").astype(np.uint64)
    params = {"seed": seed, "row_len": row_len, "degree": degree, "out_bits": out_bits}
    return params, words
