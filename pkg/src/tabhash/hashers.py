"""Hash families behind one evaluation contract.

Every scheme hashes fixed-width integer keys to `out_bits`-wide words and is
immutable after construction: `hash(key)` never changes for a scheme's
lifetime, and identical seeds rebuild identical schemes. Vectorized
evaluation over numpy arrays is provided via `hash_many` wherever it pays.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, PreconditionError
from .rng import StrongStream, derive_seed

MERSENNE_61 = (1 << 61) - 1


def _is_mersenne(p: int) -> int | None:
    """Return i when p == 2**i - 1, else None."""
    i = p.bit_length()
    return i if p == (1 << i) - 1 else None


class HashScheme:
    """Common evaluation contract: deterministic key -> out_bits-wide word."""

    key_bits: int
    out_bits: int
    scheme_id: str

    def hash(self, key: int) -> int:
        raise NotImplementedError

    def hash_many(self, keys: np.ndarray) -> np.ndarray:
        """Vectorized hash; default falls back to the scalar path."""
        return np.fromiter((self.hash(int(k)) for k in keys), dtype=np.uint64, count=len(keys))

    def bin_of(self, key: int, m: int) -> int:
        """Bin index = the lg(m) most significant bits of the hash code."""
        return self.hash(key) >> (self.out_bits - (m - 1).bit_length()) if m > 1 else 0

    def bins_many(self, keys: np.ndarray, m: int) -> np.ndarray:
        if m == 1:
            return np.zeros(len(keys), dtype=np.int64)
        shift = np.uint64(self.out_bits - (m - 1).bit_length())
        return (self.hash_many(keys) >> shift).astype(np.int64)


# ---------------------------------------------------------------------------
# Tabulation hashing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TabulationParams:
    """Shape of a character-table scheme: c characters of char_bits each."""

    c: int
    char_bits: int
    out_bits: int

    def __post_init__(self):
        if self.c < 1:
            raise ConfigError("c must be >= 1")
        if not 1 <= self.char_bits <= 16:
            raise ConfigError("char_bits must be in 1..16")
        if not 1 <= self.out_bits <= 64:
            raise ConfigError("out_bits must be in 1..64")
        if self.c * self.char_bits > 64:
            raise ConfigError("key width c*char_bits exceeds 64 bits")

    @property
    def key_bits(self) -> int:
        return self.c * self.char_bits

    @property
    def sigma(self) -> int:
        """Alphabet size: number of entries per table."""
        return 1 << self.char_bits

    def chars_of(self, key: int) -> tuple[int, ...]:
        """Split a key into characters; character 0 is least significant."""
        mask = self.sigma - 1
        return tuple((key >> (i * self.char_bits)) & mask for i in range(self.c))


class TabulationScheme(HashScheme):
    """xor of c per-character table lookups; tables fixed at construction."""

    def __init__(self, params: TabulationParams, tables: np.ndarray, seed: int | None = None):
        tables = np.ascontiguousarray(tables, dtype=np.uint64)
        if tables.shape != (params.c, params.sigma):
            raise ConfigError(f"tables must have shape {(params.c, params.sigma)}")
        if params.out_bits < 64 and (tables >> np.uint64(params.out_bits)).any():
            raise ConfigError("table entries wider than out_bits")
        self.params = params
        self.tables = tables
        self.tables.setflags(write=False)
        self.seed = seed
        self.key_bits = params.key_bits
        self.out_bits = params.out_bits
        self.scheme_id = f"tab:c={params.c},char_bits={params.char_bits},out_bits={params.out_bits}"
        self._char_mask = params.sigma - 1

    def hash(self, key: int) -> int:
        h = 0
        k = key
        for i in range(self.params.c):
            h ^= int(self.tables[i, k & self._char_mask])
            k >>= self.params.char_bits
        return h

    def hash_many(self, keys: np.ndarray) -> np.ndarray:
        keys = np.asarray(keys, dtype=np.uint64)
        mask = np.uint64(self._char_mask)
        shift = np.uint64(self.params.char_bits)
        idx = keys & mask
        h = self.tables[0][idx.astype(np.intp)]
        k = keys
        for i in range(1, self.params.c):
            k = k >> shift
            h = h ^ self.tables[i][(k & mask).astype(np.intp)]
        return h


def tab_init(params: TabulationParams, seed: int) -> TabulationScheme:
    """Fill all c tables from the seeded strong stream, in table order."""
    stream = StrongStream(seed, label=b"tabulation")
    tables = stream.words(params.c * params.sigma, params.out_bits).reshape(params.c, params.sigma)
    return TabulationScheme(params, tables, seed=seed)


def tab_hash(scheme: TabulationScheme, key: int) -> int:
    if key >> scheme.key_bits:
        raise PreconditionError(f"key {key:#x} wider than {scheme.key_bits} bits")
    return scheme.hash(key)


# Golden-file format: one 16-byte little-endian header (magic "TABH",
# version, c, char_bits, out_bits, fill seed), then the tables in order,
# each entry ceil(out_bits/8) bytes little-endian.

_TABH_MAGIC = b"TABH"
_TABH_VERSION = 1
_TABH_HEADER = "<4sBBBBQ"


def _entry_nbytes(out_bits: int) -> int:
    return (out_bits + 7) // 8


def save_tables(path, scheme: TabulationScheme) -> None:
    p = scheme.params
    header = struct.pack(
        _TABH_HEADER, _TABH_MAGIC, _TABH_VERSION, p.c, p.char_bits, p.out_bits,
        scheme.seed if scheme.seed is not None else 0,
    )
    nbytes = _entry_nbytes(p.out_bits)
    body = bytearray()
    for i in range(p.c):
        for entry in scheme.tables[i]:
            body += int(entry).to_bytes(nbytes, "little")
    with open(path, "wb") as fh:
        fh.write(header + bytes(body))


def load_tables(path) -> TabulationScheme:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 16 or blob[:4] != _TABH_MAGIC:
        raise ConfigError(f"{path}: not a table dump (bad magic)")
    _, version, c, char_bits, out_bits, seed = struct.unpack(_TABH_HEADER, blob[:16])
    if version != _TABH_VERSION:
        raise ConfigError(f"{path}: unsupported version {version}")
    params = TabulationParams(c=c, char_bits=char_bits, out_bits=out_bits)
    nbytes = _entry_nbytes(out_bits)
    expected = 16 + c * params.sigma * nbytes
    if len(blob) != expected:
        raise ConfigError(f"{path}: expected {expected} bytes, found {len(blob)}")
    flat = [
        int.from_bytes(blob[16 + j * nbytes:16 + (j + 1) * nbytes], "little")
        for j in range(c * params.sigma)
    ]
    tables = np.array(flat, dtype=np.uint64).reshape(c, params.sigma)
    return TabulationScheme(params, tables, seed=seed)


# ---------------------------------------------------------------------------
# Multiply-shift hashing
# ---------------------------------------------------------------------------

UNIV = "UNIV"
TWOINDEP = "TWOINDEP"


@dataclass(frozen=True)
class MultShiftParams:
    """Parameters for the two multiply-shift variants.

    UNIV: h(x) = (a*x mod 2^l) >> (l - out_bits), a odd l-bit.
    TWOINDEP, l=32: h(x) = (a*x + b mod 2^(2l)) >> (2l - out_bits).
    TWOINDEP, l=64: two ((a1+x2)*(a2+x1)+b)>>32 halves concatenated, then
    shifted down to out_bits; x1 is the high 32 bits of the key.
    """

    variant: str
    key_bits: int
    out_bits: int
    a: tuple[int, ...]
    b: tuple[int, ...] = ()

    def __post_init__(self):
        if self.variant not in (UNIV, TWOINDEP):
            raise ConfigError(f"unknown variant {self.variant!r}")
        if not 1 <= self.key_bits <= 64:
            raise ConfigError("key_bits must be in 1..64 (32 and 64 in production)")
        if not 1 <= self.out_bits <= self.key_bits:
            raise ConfigError("out_bits must be in 1..key_bits")
        if self.variant == TWOINDEP and 32 < self.key_bits < 64:
            raise ConfigError("TWOINDEP supports key_bits <= 32 or the paired 64-bit variant")
        if self.variant == UNIV:
            if len(self.a) != 1:
                raise ConfigError("UNIV takes a single multiplier")
            if self.a[0] % 2 == 0:
                raise ConfigError("UNIV multiplier must be odd")


class UnivMultShift(HashScheme):
    def __init__(self, params: MultShiftParams):
        if params.variant != UNIV:
            raise ConfigError("expected UNIV params")
        self.params = params
        self.key_bits = params.key_bits
        self.out_bits = params.out_bits
        self.scheme_id = f"univ-ms:l={params.key_bits},out_bits={params.out_bits}"
        self._mask = (1 << params.key_bits) - 1
        self._shift = params.key_bits - params.out_bits

    def hash(self, key: int) -> int:
        return ((self.params.a[0] * key) & self._mask) >> self._shift

    def hash_many(self, keys: np.ndarray) -> np.ndarray:
        keys = np.asarray(keys, dtype=np.uint64)
        prod = np.uint64(self.params.a[0]) * keys  # wraps mod 2^64
        if self.key_bits < 64:
            prod &= np.uint64(self._mask)
        return prod >> np.uint64(self._shift)


class TwoIndepMultShift(HashScheme):
    def __init__(self, params: MultShiftParams):
        if params.variant != TWOINDEP:
            raise ConfigError("expected TWOINDEP params")
        if params.key_bits <= 32 and (len(params.a) != 1 or len(params.b) != 1):
            raise ConfigError("single-word variant takes one (a, b) pair")
        if params.key_bits == 64 and (len(params.a) != 4 or len(params.b) != 2):
            raise ConfigError("64-bit variant takes (a1,a2,a1',a2') and (b,b')")
        self.params = params
        self.key_bits = params.key_bits
        self.out_bits = params.out_bits
        self.scheme_id = f"2indep-ms:l={params.key_bits},out_bits={params.out_bits}"
        self._two_l = 2 * params.key_bits  # arithmetic is mod 2^(2l)

    def hash(self, key: int) -> int:
        p = self.params
        if p.key_bits <= 32:
            v = (p.a[0] * key + p.b[0]) & ((1 << self._two_l) - 1)
            return v >> (self._two_l - p.out_bits)
        x1, x2 = key >> 32, key & 0xFFFFFFFF
        mask = (1 << 64) - 1
        hi = (((p.a[0] + x2) * (p.a[1] + x1) + p.b[0]) & mask) >> 32
        lo = (((p.a[2] + x2) * (p.a[3] + x1) + p.b[1]) & mask) >> 32
        return ((hi << 32) | lo) >> (64 - p.out_bits)

    def hash_many(self, keys: np.ndarray) -> np.ndarray:
        p = self.params
        keys = np.asarray(keys, dtype=np.uint64)
        if p.key_bits <= 32:
            v = np.uint64(p.a[0]) * keys + np.uint64(p.b[0])
            if self._two_l < 64:
                v &= np.uint64((1 << self._two_l) - 1)
            return v >> np.uint64(self._two_l - p.out_bits)
        x1 = keys >> np.uint64(32)
        x2 = keys & np.uint64(0xFFFFFFFF)
        hi = ((np.uint64(p.a[0]) + x2) * (np.uint64(p.a[1]) + x1) + np.uint64(p.b[0])) >> np.uint64(32)
        lo = ((np.uint64(p.a[2]) + x2) * (np.uint64(p.a[3]) + x1) + np.uint64(p.b[1])) >> np.uint64(32)
        return ((hi << np.uint64(32)) | lo) >> np.uint64(64 - p.out_bits)


def univ_mult_shift(params: MultShiftParams, key: int) -> int:
    return UnivMultShift(params).hash(key)


def twoindep_mult_shift(params: MultShiftParams, key: int) -> int:
    return TwoIndepMultShift(params).hash(key)


def random_mult_shift_params(variant: str, key_bits: int, out_bits: int, seed: int) -> MultShiftParams:
    stream = StrongStream(seed, label=b"mult-shift")
    if variant == UNIV:
        a = stream.word(key_bits) | 1
        return MultShiftParams(UNIV, key_bits, out_bits, a=(a,))
    if key_bits <= 32:
        two_l = 2 * key_bits
        return MultShiftParams(
            TWOINDEP, key_bits, out_bits, a=(stream.word(two_l),), b=(stream.word(two_l),)
        )
    a = tuple(stream.word(64) for _ in range(4))
    b = tuple(stream.word(64) for _ in range(2))
    return MultShiftParams(TWOINDEP, 64, out_bits, a=a, b=b)


# ---------------------------------------------------------------------------
# Polynomial hashing over a Mersenne prime
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MersennePolyParams:
    """Degree k-1 polynomial mod a Mersenne prime, truncated to out_bits."""

    coeffs: tuple[int, ...]
    p: int = MERSENNE_61
    out_bits: int = 32

    def __post_init__(self):
        if _is_mersenne(self.p) is None:
            raise ConfigError(f"{self.p} is not of the form 2^i - 1")
        if not self.coeffs:
            raise ConfigError("at least one coefficient required")
        if any(not 0 <= a < self.p for a in self.coeffs):
            raise ConfigError("coefficients must lie in [p]")
        if not 1 <= self.out_bits <= 64:
            raise ConfigError("out_bits must be in 1..64")

    @property
    def k(self) -> int:
        return len(self.coeffs)


def mersenne_reduce(x: int, p: int, i: int) -> int:
    """Reduce mod p = 2^i - 1 via the shift-and-add fold."""
    while x > 2 * p:
        x = (x & p) + (x >> i)
    if x >= p:
        x -= p
    return x


class MersennePoly(HashScheme):
    """Horner evaluation with fold reduction; keys interpreted in [p]."""

    def __init__(self, params: MersennePolyParams):
        self.params = params
        self._i = _is_mersenne(params.p)
        self.key_bits = min(self._i, 64) if params.p != MERSENNE_61 else 32
        self.out_bits = params.out_bits
        self.scheme_id = f"mersenne:k={params.k},p=2^{self._i}-1,out_bits={params.out_bits}"
        self._out_mask = (1 << params.out_bits) - 1

    def hash(self, key: int) -> int:
        p, i = self.params.p, self._i
        acc = 0
        for a in reversed(self.params.coeffs):
            acc = mersenne_reduce(acc * key + a, p, i)
        return acc & self._out_mask


def mersenne_poly_hash(params: MersennePolyParams, key: int) -> int:
    return MersennePoly(params).hash(key)


def random_mersenne_params(k: int, seed: int, p: int = MERSENNE_61, out_bits: int = 32) -> MersennePolyParams:
    stream = StrongStream(seed, label=b"mersenne")
    bits = p.bit_length()
    coeffs = []
    while len(coeffs) < k:
        w = stream.word(bits)
        if w < p:
            coeffs.append(w)
    return MersennePolyParams(coeffs=tuple(coeffs), p=p, out_bits=out_bits)


# ---------------------------------------------------------------------------
# Truly-random baseline
# ---------------------------------------------------------------------------

class TrulyRandomOracle(HashScheme):
    """Ground-truth scheme: a fresh stream word per distinct key, memoized.

    Values are drawn sequentially from the seeded strong stream as new keys
    arrive, so a fixed call sequence reproduces bit-identically. Memory grows
    with the number of distinct keys hashed (documented limitation). Requires
    exclusive access while memoizing.
    """

    def __init__(self, seed: int, key_bits: int = 64, out_bits: int = 32):
        self.seed = seed
        self.key_bits = key_bits
        self.out_bits = out_bits
        self.scheme_id = f"random:out_bits={out_bits}"
        self._stream = StrongStream(seed, label=b"oracle")
        self._memo: dict[int, int] = {}

    def hash(self, key: int) -> int:
        v = self._memo.get(key)
        if v is None:
            v = self._stream.word(self.out_bits)
            self._memo[key] = v
        return v

    def hash_many(self, keys: np.ndarray) -> np.ndarray:
        memo = self._memo
        missing = []
        for k in keys:
            k = int(k)
            if k not in memo:
                memo[k] = None  # reserve in first-encounter order
                missing.append(k)
        if missing:
            fresh = self._stream.words(len(missing), self.out_bits)
            for k, v in zip(missing, fresh):
                memo[k] = int(v)
        return np.fromiter((memo[int(k)] for k in keys), dtype=np.uint64, count=len(keys))


# ---------------------------------------------------------------------------
# Scheme configuration (family + parameters, instantiated per seed)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SchemeSpec:
    """A hash-family configuration; `instantiate(seed)` draws one member."""

    family: str  # tab | univ-ms | 2indep-ms | mersenne | random
    options: tuple[tuple[str, int], ...] = field(default_factory=tuple)

    def opt(self, name: str, default: int) -> int:
        for key, value in self.options:
            if key == name:
                return value
        return default

    @property
    def label(self) -> str:
        opts = ",".join(f"{k}={v}" for k, v in self.options)
        return f"{self.family}:{opts}" if opts else self.family

    def tab_params(self) -> TabulationParams:
        if self.family != "tab":
            raise ConfigError(f"{self.label}: not a tabulation scheme")
        return TabulationParams(
            c=self.opt("c", 2),
            char_bits=self.opt("char_bits", 8),
            out_bits=self.opt("out_bits", 32),
        )

    def key_bits(self) -> int:
        if self.family == "tab":
            return self.tab_params().key_bits
        return self.opt("key_bits", 32)

    def out_bits(self) -> int:
        return self.opt("out_bits", 32)

    def instantiate(self, seed: int) -> HashScheme:
        if self.family == "tab":
            return tab_init(self.tab_params(), seed)
        if self.family == "univ-ms":
            return UnivMultShift(
                random_mult_shift_params(UNIV, self.opt("key_bits", 32), self.opt("out_bits", 32), seed)
            )
        if self.family == "2indep-ms":
            return TwoIndepMultShift(
                random_mult_shift_params(TWOINDEP, self.opt("key_bits", 32), self.opt("out_bits", 32), seed)
            )
        if self.family == "mersenne":
            i = self.opt("i", 61)
            return MersennePoly(
                random_mersenne_params(
                    k=self.opt("k", 5), seed=seed, p=(1 << i) - 1, out_bits=self.opt("out_bits", 32)
                )
            )
        if self.family == "random":
            return TrulyRandomOracle(seed, key_bits=self.opt("key_bits", 64), out_bits=self.opt("out_bits", 32))
        raise ConfigError(f"unknown scheme family {self.family!r}")


def parse_scheme(text: str) -> SchemeSpec:
    """Parse scheme strings like 'tab:c=4,char_bits=8,out_bits=32' or 'tab-c2'."""
    text = text.strip()
    if text.startswith("tab-c") and text[5:].isdigit():  # shorthand: tab-c2
        return SchemeSpec("tab", (("c", int(text[5:])),))
    family, _, rest = text.partition(":")
    family = family.strip()
    if family not in ("tab", "univ-ms", "2indep-ms", "mersenne", "random"):
        raise ConfigError(f"unknown scheme family {family!r}")
    options = []
    if rest:
        for item in rest.split(","):
            key, eq, value = item.partition("=")
            if not eq:
                raise ConfigError(f"bad scheme option {item!r}")
            try:
                options.append((key.strip(), int(value, 0)))
            except ValueError as exc:
                raise ConfigError(f"bad scheme option {item!r}") from exc
    return SchemeSpec(family, tuple(options))


# ---------------------------------------------------------------------------
# Five-key independence witness
# ---------------------------------------------------------------------------

def independence_witness(keys, params: TabulationParams) -> int:
    """Index (0..4) of a key whose hash is independent of the other four.

    Procedure: drop columns constant across the five rows; peel any row with
    a character unique in its column; otherwise every remaining column splits
    2-vs-3, so relabel the doubly-occurring value as the column's mask bit,
    deduplicate, and resolve by the Hamming-distance case analysis (a
    disjoint-support pair isolates the row outside both supports; a star of
    petals isolates the uncovered row, restricting away surplus petals first).
    """
    keys = [int(k) for k in keys]
    if len(keys) != 5:
        raise PreconditionError("exactly 5 keys required")
    if len(set(keys)) != 5:
        raise PreconditionError("keys must be pairwise distinct")
    for k in keys:
        if k >> params.key_bits:
            raise PreconditionError(f"key {k:#x} wider than {params.key_bits} bits")

    rows = [params.chars_of(k) for k in keys]

    # Peeling: a character unique within its column makes its row independent.
    masks = set()
    for col in range(params.c):
        values = [rows[r][col] for r in range(5)]
        counts = {}
        for v in values:
            counts[v] = counts.get(v, 0) + 1
        if len(counts) == 1:
            continue  # constant column: irrelevant
        for r in range(5):
            if counts[values[r]] == 1:
                return min(
                    r2 for c2 in range(params.c) for r2 in range(5)
                    if _unique_in_column(rows, c2, r2)
                )
        # no unique character => exactly a 2/3 split; mask = the two rows
        # holding the doubly-occurring value
        minority = next(v for v, n in counts.items() if n == 2)
        masks.add(sum(1 << r for r in range(5) if values[r] == minority))

    if not masks:
        raise PreconditionError("keys are not distinct")  # unreachable for valid input

    masks = sorted(masks)

    # Disjoint-support pair: the row outside both supports is independent
    # (the five rows collapse to three distinct patterns on those columns).
    candidates = []
    for i in range(len(masks)):
        for j in range(i + 1, len(masks)):
            if masks[i] & masks[j] == 0:
                uncovered = 31 ^ (masks[i] | masks[j])
                candidates.append(uncovered.bit_length() - 1)
    if candidates:
        return min(candidates)

    # Pairwise-intersecting weight-2 masks form a star (a triangle would make
    # two keys identical). 3 petals: the uncovered row is independent.
    # 4 petals: restricting away one petal column reduces to the 3-petal case,
    # so that petal's row is independent; take the lowest petal.
    center = masks[0]
    for mask in masks[1:]:
        center &= mask
    covered = 0
    for mask in masks:
        covered |= mask
    if center == 0 or center & (center - 1):
        raise PreconditionError("keys are not distinct")  # triangle: unreachable
    petals = covered ^ center
    uncovered = 31 ^ covered
    if uncovered:
        return (uncovered & -uncovered).bit_length() - 1
    return (petals & -petals).bit_length() - 1


def _unique_in_column(rows, col: int, row: int) -> bool:
    value = rows[row][col]
    return sum(1 for r in range(5) if rows[r][col] == value) == 1
