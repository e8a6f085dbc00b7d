"""Declarative key-set generators: benign and adversarial inputs.

Generation is a pure function of (spec, params): the same spec and seed
always produce the same key list, in the same order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .hashers import TabulationParams
from .rng import StrongStream

RANDOM = "RANDOM"
DENSE_INTERVAL = "DENSE_INTERVAL"
HYPERCUBE = "HYPERCUBE"
CUCKOO_HARD = "CUCKOO_HARD"
ARITHMETIC = "ARITHMETIC"

_KINDS = (RANDOM, DENSE_INTERVAL, HYPERCUBE, CUCKOO_HARD, ARITHMETIC)


def _icbrt(n: int) -> int:
    s = round(n ** (1 / 3))
    while s ** 3 > n:
        s -= 1
    while (s + 1) ** 3 <= n:
        s += 1
    return s


@dataclass(frozen=True)
class KeySetSpec:
    """What keys to generate; kind-specific fields are ignored by other kinds.

    RANDOM          n distinct uniform keys.
    DENSE_INTERVAL  {start, ..., start+n-1}, shuffled.
    HYPERCUBE       all keys whose every character lies in {0..side-1}; n = side^c.
    CUCKOO_HARD     the cube [s]^3 with s = n^(1/3), one coordinate per character
                    (coordinates occupy the three lowest characters).
    ARITHMETIC      {start + i*stride}.
    """

    kind: str
    n: int
    start: int = 0
    side: int = 0
    stride: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ConfigError(f"unknown key-set kind {self.kind!r}")
        if self.n < 0:
            raise ConfigError("n must be >= 0")

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "n": self.n, "seed": self.seed}
        if self.kind in (DENSE_INTERVAL, ARITHMETIC):
            out["start"] = self.start
        if self.kind == HYPERCUBE:
            out["side"] = self.side
        if self.kind == ARITHMETIC:
            out["stride"] = self.stride
        return out

    @property
    def label(self) -> str:
        parts = [f"{k}={v}" for k, v in self.to_dict().items() if k != "kind"]
        return f"{self.kind.lower()}:{','.join(parts)}"


def generate(spec: KeySetSpec, params: TabulationParams) -> np.ndarray:
    """Materialize the key set as a uint64 array of n distinct keys."""
    key_bits = params.key_bits
    universe = 1 << key_bits

    if spec.kind == RANDOM:
        if spec.n > universe:
            raise ConfigError(f"cannot draw {spec.n} distinct keys from a {key_bits}-bit universe")
        stream = StrongStream(spec.seed, label=b"keys")
        keys: list[int] = []
        seen: set[int] = set()
        while len(keys) < spec.n:
            for w in stream.words(max(spec.n - len(keys), 16), key_bits):
                w = int(w)
                if w not in seen:
                    seen.add(w)
                    keys.append(w)
                    if len(keys) == spec.n:
                        break
        return np.array(keys, dtype=np.uint64)

    if spec.kind == DENSE_INTERVAL:
        if spec.start < 0 or spec.start + spec.n > universe:
            raise ConfigError("interval leaves the key universe")
        keys = list(range(spec.start, spec.start + spec.n))
        StrongStream(spec.seed, label=b"keys").shuffle(keys)
        return np.array(keys, dtype=np.uint64)

    if spec.kind == HYPERCUBE:
        side = spec.side
        if side < 1 or side > params.sigma:
            raise ConfigError(f"cube side {side} does not fit the {params.char_bits}-bit alphabet")
        if side ** params.c != spec.n:
            raise ConfigError(f"hypercube needs n = side^c = {side ** params.c}, got {spec.n}")
        keys = np.zeros(spec.n, dtype=np.uint64)
        reps = 1
        for pos in range(params.c):
            coord = np.arange(side, dtype=np.uint64)
            block = np.repeat(coord, reps)
            keys ^= np.tile(block, spec.n // len(block)) << np.uint64(pos * params.char_bits)
            reps *= side
        return keys

    if spec.kind == CUCKOO_HARD:
        s = _icbrt(spec.n)
        if s ** 3 != spec.n:
            raise ConfigError(f"hard instance needs a perfect cube size, got {spec.n}")
        if params.c < 3:
            raise ConfigError("hard instance needs at least 3 characters")
        if s > params.sigma:
            raise ConfigError(f"cube side {s} does not fit the {params.char_bits}-bit alphabet")
        cube = KeySetSpec(HYPERCUBE, n=spec.n, side=s, seed=spec.seed)
        base = TabulationParams(c=3, char_bits=params.char_bits, out_bits=params.out_bits)
        return generate(cube, base)  # higher characters stay zero

    if spec.kind == ARITHMETIC:
        if spec.stride < 1:
            raise ConfigError("stride must be >= 1")
        last = spec.start + (spec.n - 1) * spec.stride if spec.n else spec.start
        if spec.start < 0 or last >= universe:
            raise ConfigError("progression leaves the key universe")
        return (np.uint64(spec.start) + np.arange(spec.n, dtype=np.uint64) * np.uint64(spec.stride))

    raise ConfigError(f"unknown key-set kind {spec.kind!r}")


def parse_keyset(text: str, n: int | None = None, seed: int = 0) -> KeySetSpec:
    """Parse CLI spec strings like 'hypercube:A=32,c=4' or 'dense:start=0'."""
    text = text.strip()
    name, _, rest = text.partition(":")
    options: dict[str, int] = {}
    if rest:
        for item in rest.split(","):
            key, eq, value = item.partition("=")
            if not eq:
                raise ConfigError(f"bad key-set option {item!r}")
            try:
                options[key.strip()] = int(value, 0)
            except ValueError as exc:
                raise ConfigError(f"bad key-set option {item!r}") from exc

    name = name.strip().lower()
    seed = options.pop("seed", seed)
    if name in ("random", "rand"):
        if n is None and "n" not in options:
            raise ConfigError("random key set needs --n")
        return KeySetSpec(RANDOM, n=options.pop("n", n), seed=seed)
    if name in ("dense", "dense-interval", "interval"):
        if n is None and "n" not in options:
            raise ConfigError("dense interval needs --n")
        return KeySetSpec(DENSE_INTERVAL, n=options.pop("n", n), start=options.pop("start", 0), seed=seed)
    if name in ("hypercube", "cube"):
        side = options.pop("A", options.pop("side", 0))
        c = options.pop("c", None)
        if side <= 0 or c is None:
            raise ConfigError("hypercube needs A=<side>,c=<dim>")
        count = side ** c
        if n is not None and n != count:
            raise ConfigError(f"hypercube A={side},c={c} has n={count}, got --n {n}")
        return KeySetSpec(HYPERCUBE, n=count, side=side, seed=seed)
    if name in ("cuckoo-hard", "hard"):
        if n is None and "n" not in options:
            raise ConfigError("hard instance needs --n")
        return KeySetSpec(CUCKOO_HARD, n=options.pop("n", n), seed=seed)
    if name in ("arith", "arithmetic"):
        if n is None and "n" not in options:
            raise ConfigError("progression needs --n")
        return KeySetSpec(
            ARITHMETIC, n=options.pop("n", n), start=options.pop("start", 0),
            stride=options.pop("stride", 1), seed=seed,
        )
    raise ConfigError(f"unknown key-set kind {name!r}")
