"""Monte-Carlo and exhaustive experiments over the hash families.

Every experiment consumes a SchemeSpec so any family (tabulation, the
multiply-shift variants, the Mersenne polynomial, or the truly-random
baseline) runs on identical key sets and workloads: per-trial seeds are split
from the master seed, and the workload stream never depends on the scheme.
"""

from __future__ import annotations

import itertools
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, PreconditionError
from .hashers import SchemeSpec, TabulationParams
from .instances import CUCKOO_HARD, KeySetSpec, generate
from .rng import StrongStream, derive_seed
from .tables import cuckoo_build_static

Z95 = 1.959963984540054  # two-sided 95% normal quantile


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

@dataclass
class ExperimentReport:
    """Per-experiment statistics with full seed provenance.

    Everything under `stats` (and the series fields) is a pure function of
    the configuration and master seed; `throughput` is wall-clock and
    informational only.
    """

    experiment: str
    scheme: str
    spec: dict
    seed: int
    trials: int
    m: int | None
    stats: dict
    histogram: list[tuple[int, int]] | None = None
    run_values: list[float] | None = None
    throughput: dict | None = None

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "scheme": self.scheme,
            "spec": self.spec,
            "seed": self.seed,
            "trials": self.trials,
            "m": self.m,
            "stats": self.stats,
            "histogram": self.histogram,
            "run_values": self.run_values,
            "throughput": self.throughput,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def stats_json(self) -> str:
        """The deterministic part only (what reproducibility is judged on)."""
        d = self.to_dict()
        d.pop("throughput")
        return json.dumps(d, indent=2, sort_keys=True)

    def write_json(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json() + "\n")

    def write_histogram_csv(self, path) -> None:
        if self.histogram is None:
            raise ConfigError(f"{self.experiment}: no histogram to write")
        with open(path, "w") as fh:
            fh.write("bucket,count\n")
            for bucket, count in sorted(self.histogram):
                fh.write(f"{bucket},{count}\n")

    def write_runs_csv(self, path) -> None:
        """Per-run values sorted for CDF plotting: 'run_index,value'."""
        if self.run_values is None:
            raise ConfigError(f"{self.experiment}: no per-run values to write")
        order = sorted(range(len(self.run_values)), key=lambda i: (self.run_values[i], i))
        with open(path, "w") as fh:
            fh.write("run_index,value\n")
            for i in order:
                fh.write(f"{i},{self.run_values[i]}\n")

    def summary(self) -> str:
        s = self.stats
        head = f"{self.experiment} scheme={self.scheme} trials={self.trials}"
        main = s.get("headline", "")
        return f"{head} {main}".rstrip()


def _mean_var(values) -> tuple[float, float]:
    arr = np.asarray(values, dtype=np.float64)
    if len(arr) == 0:
        return 0.0, 0.0
    mean = float(arr.mean())
    var = float(arr.var(ddof=1)) if len(arr) > 1 else 0.0
    return mean, var


def _ci_half_width(sd: float, trials: int) -> float | None:
    """Normal-approximation 95% half-width; needs a reasonable trial count."""
    if trials < 30:
        return None
    return Z95 * sd / math.sqrt(trials)


def _binomial_se(p: float, trials: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / trials) if trials else 0.0


def first_absent(keys, key_bits: int) -> int:
    """Smallest universe key not in the set (the default designated query)."""
    q = 0
    for k in np.sort(np.asarray(keys, dtype=np.uint64)):
        k = int(k)
        if k == q:
            q += 1
        elif k > q:
            break
    if q >> key_bits:
        raise ConfigError("key set covers the whole universe; no query key available")
    return q


# ---------------------------------------------------------------------------
# Batched per-trial hashing
# ---------------------------------------------------------------------------

def _trial_seed(master: int, index: int, role: str = "scheme") -> int:
    return derive_seed(master, "trial", index, role)


def _hash_block(scheme_spec: SchemeSpec, master: int, start: int, stop: int,
                keys: np.ndarray, role: str = "scheme") -> np.ndarray:
    """Hashes for trials [start, stop) as a (stop-start, len(keys)) uint64 array.

    Values are bit-identical to `scheme_spec.instantiate(seed).hash_many(keys)`
    per trial; tabulation and the truly-random oracle take bulk paths.
    """
    n = len(keys)
    count = stop - start
    if scheme_spec.family == "tab":
        params = scheme_spec.tab_params()
        sigma = params.sigma
        mask = np.uint64(sigma - 1)
        shift = np.uint64(params.char_bits)
        idx = []
        k = keys.astype(np.uint64)
        for i in range(params.c):
            idx.append((k & mask).astype(np.intp))
            k = k >> shift
        tables = np.empty((count, params.c, sigma), dtype=np.uint64)
        for t in range(count):
            stream = StrongStream(_trial_seed(master, start + t, role), label=b"tabulation")
            tables[t] = stream.words(params.c * sigma, params.out_bits).reshape(params.c, sigma)
        h = tables[:, 0, :][:, idx[0]]
        for i in range(1, params.c):
            h ^= tables[:, i, :][:, idx[i]]
        return h
    if scheme_spec.family == "random":
        out_bits = scheme_spec.out_bits()
        h = np.empty((count, n), dtype=np.uint64)
        for t in range(count):
            stream = StrongStream(_trial_seed(master, start + t, role), label=b"oracle")
            h[t] = stream.words(n, out_bits)
        return h
    h = np.empty((count, n), dtype=np.uint64)
    for t in range(count):
        scheme = scheme_spec.instantiate(_trial_seed(master, start + t, role))
        h[t] = scheme.hash_many(keys)
    return h


def _batch_ranges(trials: int, n_keys: int, cap_elems: int = 1 << 23) -> list[tuple[int, int]]:
    batch = max(1, min(trials, cap_elems // max(n_keys, 1)))
    return [(s, min(s + batch, trials)) for s in range(0, trials, batch)]


def _map_ordered(worker, ranges, threads: int):
    if threads <= 1 or len(ranges) <= 1:
        return [worker(s, e) for s, e in ranges]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda r: worker(*r), ranges))



def _concat(parts, dtype=np.float64) -> np.ndarray:
    if not parts:
        return np.zeros(0, dtype=dtype)
    return np.concatenate(parts)

def _key_params(scheme_spec: SchemeSpec) -> TabulationParams:
    """Key geometry for instance generation (character view of the key space)."""
    if scheme_spec.family == "tab":
        return scheme_spec.tab_params()
    key_bits = scheme_spec.key_bits()
    return TabulationParams(c=key_bits // 8, char_bits=8, out_bits=scheme_spec.out_bits())


def _bins_shift(out_bits: int, m: int) -> np.uint64:
    return np.uint64(out_bits - (m - 1).bit_length()) if m > 1 else np.uint64(out_bits)


# ---------------------------------------------------------------------------
# Bin concentration
# ---------------------------------------------------------------------------

def exp_bin_concentration(scheme_spec: SchemeSpec, keyset: KeySetSpec, m: int, trials: int,
                          master_seed: int, query_bin_fn=None, threads: int = 1,
                          key_params: TabulationParams | None = None) -> ExperimentReport:
    """Distribute the key set into m bins per trial; track max, fixed-bin and
    query-dependent bin loads against mu = n/m."""
    if m < 1 or m & (m - 1):
        raise ConfigError("m must be a power of two")
    params = key_params or _key_params(scheme_spec)
    keys = generate(keyset, params)
    n = len(keys)
    q = first_absent(keys, params.key_bits)
    hashed = np.concatenate([keys, np.array([q], dtype=np.uint64)])
    out_bits = scheme_spec.out_bits()
    shift = _bins_shift(out_bits, m)
    t0 = time.perf_counter()

    def worker(start, stop):
        h = _hash_block(scheme_spec, master_seed, start, stop, hashed)
        bins = (h >> shift).astype(np.int64)
        maxes = np.empty(stop - start, dtype=np.int64)
        fixed = np.empty(stop - start, dtype=np.int64)
        query = np.empty(stop - start, dtype=np.int64)
        for t in range(stop - start):
            counts = np.bincount(bins[t, :n], minlength=m)
            maxes[t] = counts.max() if n else 0
            fixed[t] = counts[0]
            hq = int(h[t, n])
            bq = int(query_bin_fn(hq)) % m if query_bin_fn else (hq >> int(shift))
            query[t] = counts[bq]
        return maxes, fixed, query

    parts = _map_ordered(worker, _batch_ranges(trials, n + 1), threads)
    maxes = _concat([p[0] for p in parts], np.int64)
    fixed = _concat([p[1] for p in parts], np.int64)
    query = _concat([p[2] for p in parts], np.int64)
    elapsed = time.perf_counter() - t0

    mean_max, var_max = _mean_var(maxes)
    mean_fixed, var_fixed = _mean_var(fixed)
    mean_query, var_query = _mean_var(query)
    hist = np.bincount(maxes) if trials else np.array([], dtype=np.int64)
    stats = {
        "mu": n / m,
        "mean_max_load": mean_max,
        "var_max_load": var_max,
        "max_max_load": int(maxes.max()) if trials else 0,
        "ci_half_width_max_load": _ci_half_width(math.sqrt(var_max), trials),
        "mean_fixed_bin_load": mean_fixed,
        "var_fixed_bin_load": var_fixed,
        "mean_query_bin_load": mean_query,
        "var_query_bin_load": var_query,
        "query_key": q,
        "headline": f"max_load={mean_max:.3f} mu={n / m:.3f}",
    }
    return ExperimentReport(
        experiment="bins", scheme=scheme_spec.label, spec=keyset.to_dict(),
        seed=master_seed, trials=trials, m=m, stats=stats,
        histogram=[(int(b), int(c)) for b, c in enumerate(hist) if c],
        run_values=[float(x) for x in maxes],
        throughput={"seconds": elapsed, "trials_per_s": trials / elapsed if elapsed else None},
    )


# ---------------------------------------------------------------------------
# Linear probing
# ---------------------------------------------------------------------------

def _lp_fill(slots: list, homes: list, order, mask: int) -> int:
    probes_total = 0
    for ki in order:
        j = homes[ki]
        p = 1
        while slots[j] >= 0:
            j = (j + 1) & mask
            p += 1
        slots[j] = ki
        probes_total += p
    return probes_total


def _lp_cycles(slots: list, homes: list, cycle_keys, mask: int) -> int:
    """Delete + reinsert each chosen key; returns total probes over all updates."""
    total = 0
    for ki in cycle_keys:
        h = homes[ki]
        # delete: probes = full run from the key's hash to the trailing empty slot
        j = h
        pos = -1
        p = 1
        while slots[j] >= 0:
            if slots[j] == ki:
                pos = j
            j = (j + 1) & mask
            p += 1
        total += p
        i = pos
        j = (pos + 1) & mask
        while slots[j] >= 0:
            hj = homes[slots[j]]
            if ((i - hj) & mask) < ((j - hj) & mask):
                slots[i] = slots[j]
                i = j
            j = (j + 1) & mask
        slots[i] = -1
        # reinsert
        j = h
        p = 1
        while slots[j] >= 0:
            j = (j + 1) & mask
            p += 1
        slots[j] = ki
        total += p
    return total


def exp_linear_probing(scheme_spec: SchemeSpec, keyset: KeySetSpec, m: int, ops: int,
                       trials: int, master_seed: int, fresh_queries: int = 1024,
                       threads: int = 1,
                       key_params: TabulationParams | None = None) -> ExperimentReport:
    """Fill to n keys, run `ops` delete/re-insert cycles, then probe fresh queries.

    Records mean probes per update (2 updates per cycle), its variance across
    trials, the run-length tail for fresh queries, and Pr[R > 0].
    """
    if m < 1 or m & (m - 1):
        raise ConfigError("m must be a power of two")
    params = key_params or _key_params(scheme_spec)
    keys = generate(keyset, params)
    n = len(keys)
    if n >= m:
        raise ConfigError(f"fill n/m = {n}/{m} must stay below 1")
    if fresh_queries and n >= (1 << params.key_bits):
        raise ConfigError("key set covers the whole universe; no fresh queries possible")
    mask = m - 1
    sorted_keys = np.sort(keys)
    out_bits = scheme_spec.out_bits()
    shift = _bins_shift(out_bits, m)
    t0 = time.perf_counter()

    def one_trial(t):
        scheme = scheme_spec.instantiate(_trial_seed(master_seed, t))
        homes = (scheme.hash_many(keys) >> shift).astype(np.int64).tolist()
        workload = np.random.default_rng(derive_seed(master_seed, "trial", t, "workload"))
        slots = [-1] * m
        _lp_fill(slots, homes, range(n), mask)

        update_probes = 0
        remaining = ops
        while remaining > 0:
            chunk = min(remaining, 1 << 20)
            picks = workload.integers(0, n, size=chunk).tolist() if n else []
            update_probes += _lp_cycles(slots, homes, picks, mask)
            remaining -= chunk

        # fresh queries outside the stored set
        fresh: list[int] = []
        while len(fresh) < fresh_queries:
            cand = workload.integers(0, 1 << params.key_bits, size=fresh_queries, dtype=np.uint64)
            hits = np.searchsorted(sorted_keys, cand)
            hits = np.minimum(hits, n - 1) if n else hits * 0
            absent = cand[(sorted_keys[hits] != cand)] if n else cand
            fresh.extend(int(x) for x in absent[: fresh_queries - len(fresh)])
        fresh_arr = np.array(fresh, dtype=np.uint64)
        fresh_homes = (scheme.hash_many(fresh_arr) >> shift).astype(np.int64).tolist()
        runs = []
        for j in fresh_homes:
            r = 0
            while slots[j] >= 0:
                r += 1
                j = (j + 1) & mask
            runs.append(r)
        mean_update = update_probes / (2 * ops) if ops else 0.0
        return mean_update, runs

    results = _map_ordered(lambda s, e: [one_trial(t) for t in range(s, e)],
                           [(s, min(s + 1, trials)) for s in range(trials)], threads)
    flat = [r for part in results for r in part]
    means = [r[0] for r in flat]
    all_runs = [x for r in flat for x in r[1]]
    elapsed = time.perf_counter() - t0

    mean_probes, var_probes = _mean_var(means)
    runs_arr = np.asarray(all_runs, dtype=np.int64)
    pr_positive = float((runs_arr > 0).mean()) if len(runs_arr) else 0.0
    hist = np.bincount(runs_arr) if len(runs_arr) else np.array([], dtype=np.int64)
    alpha = n / m
    stats = {
        "alpha": alpha,
        "ops": ops,
        "mean_probes_per_update": mean_probes,
        "var_probes_across_trials": var_probes,
        "cv_probes_across_trials": (math.sqrt(var_probes) / mean_probes) if mean_probes else 0.0,
        "ci_half_width": _ci_half_width(math.sqrt(var_probes), trials),
        "fresh_queries_per_trial": fresh_queries,
        "pr_run_positive": pr_positive,
        "pr_run_positive_se": _binomial_se(pr_positive, len(runs_arr)),
        "mean_run_length": float(runs_arr.mean()) if len(runs_arr) else 0.0,
        "headline": f"probes/update={mean_probes:.4f} alpha={alpha:.3f}",
    }
    return ExperimentReport(
        experiment="linprobe", scheme=scheme_spec.label, spec=keyset.to_dict(),
        seed=master_seed, trials=trials, m=m, stats=stats,
        histogram=[(int(b), int(c)) for b, c in enumerate(hist) if c],
        run_values=[float(x) for x in means],
        throughput={"seconds": elapsed, "updates_per_s": 2 * ops * trials / elapsed if elapsed else None},
    )


# ---------------------------------------------------------------------------
# Cuckoo hashing
# ---------------------------------------------------------------------------

def _subevent_trials_tab(scheme_spec, master, start, stop, side: int, m: int):
    """P1/P2 sub-event indicators for trials [start, stop) on the cube [side]^3.

    P1: some three of the side^2 two-character half-keys share an h0 bucket.
    P2: some two of the side one-character half-keys share an h1 bucket.
    Only the character entries actually indexed are drawn (side per table).
    """
    count = stop - start
    out_bits = scheme_spec.out_bits()
    shift = _bins_shift(out_bits, m)
    if scheme_spec.family == "tab":
        params = scheme_spec.tab_params()
        if params.c < 3:
            raise ConfigError("hard-instance sub-events need c >= 3")
        t1 = np.empty((count, side), dtype=np.uint64)
        t2 = np.empty((count, side), dtype=np.uint64)
        u1 = np.empty((count, side), dtype=np.uint64)
        for t in range(count):
            h0_stream = StrongStream(_trial_seed(master, start + t, "h0-sub"), label=b"tabulation")
            t1[t] = h0_stream.words(side, params.out_bits)
            t2[t] = h0_stream.words(side, params.out_bits)
            h1_stream = StrongStream(_trial_seed(master, start + t, "h1-sub"), label=b"tabulation")
            u1[t] = h1_stream.words(side, params.out_bits)
        g0 = ((t1 >> shift)[:, :, None] ^ (t2 >> shift)[:, None, :]).reshape(count, side * side)
        g1 = u1 >> shift
    elif scheme_spec.family == "random":
        g0 = np.empty((count, side * side), dtype=np.uint64)
        g1 = np.empty((count, side), dtype=np.uint64)
        for t in range(count):
            stream = StrongStream(_trial_seed(master, start + t, "sub-oracle"), label=b"oracle")
            g0[t] = stream.words(side * side, out_bits) >> shift
            g1[t] = stream.words(side, out_bits) >> shift
    else:
        raise ConfigError("sub-events are defined for tabulation (or the truly-random baseline)")
    g0.sort(axis=1)
    p1_hit = (g0[:, 2:] == g0[:, :-2]).any(axis=1)
    g1.sort(axis=1)
    p2_hit = (g1[:, 1:] == g1[:, :-1]).any(axis=1)
    return p1_hit, p2_hit


def exp_cuckoo(scheme_spec: SchemeSpec, keyset: KeySetSpec, m: int, trials: int,
               master_seed: int, subevent_trials: int = 0, threads: int = 1,
               key_params: TabulationParams | None = None) -> ExperimentReport:
    """Static cuckoo builds with two independently seeded schemes per trial.

    On CUCKOO_HARD inputs, additionally measures the two failure sub-events
    over `subevent_trials` cheap trials (no table builds).
    """
    if m < 1 or m & (m - 1):
        raise ConfigError("m must be a power of two")
    params = key_params or _key_params(scheme_spec)
    keys = generate(keyset, params)
    t0 = time.perf_counter()

    successes = 0
    for t in range(trials):
        h0 = scheme_spec.instantiate(_trial_seed(master_seed, t, "h0"))
        h1 = scheme_spec.instantiate(_trial_seed(master_seed, t, "h1"))
        result = cuckoo_build_static(keys, h0, h1, m, want_placement=False)
        successes += int(result.success)

    stats: dict = {}
    run_values = None
    if trials:
        frac = successes / trials
        se = _binomial_se(frac, trials)
        stats.update({
            "success_fraction": frac,
            "success_se": se,
            "success_ci_half_width": Z95 * se,
            "failures": trials - successes,
            "headline": f"success={frac:.4f} ±{Z95 * se:.4f}",
        })
        run_values = None  # success flags are in the histogram
    hist = [(0, trials - successes), (1, successes)] if trials else None

    if subevent_trials:
        if keyset.kind != CUCKOO_HARD:
            raise ConfigError("sub-event measurement applies to CUCKOO_HARD inputs")
        side = round(len(keys) ** (1 / 3))
        p1_parts, p2_parts = [], []
        for s, e in _batch_ranges(subevent_trials, side * side, cap_elems=1 << 24):
            p1, p2 = _subevent_trials_tab(scheme_spec, master_seed, s, e, side, m)
            p1_parts.append(p1)
            p2_parts.append(p2)
        p1_hat = float(np.concatenate(p1_parts).mean())
        p2_hat = float(np.concatenate(p2_parts).mean())
        stats.update({
            "subevent_trials": subevent_trials,
            "p1_hat": p1_hat,
            "p1_se": _binomial_se(p1_hat, subevent_trials),
            "p2_hat": p2_hat,
            "p2_se": _binomial_se(p2_hat, subevent_trials),
            "cube_side": side,
        })
        if "headline" not in stats:
            stats["headline"] = f"P1={p1_hat:.4f} P2={p2_hat:.5f}"

    elapsed = time.perf_counter() - t0
    return ExperimentReport(
        experiment="cuckoo", scheme=scheme_spec.label, spec=keyset.to_dict(),
        seed=master_seed, trials=trials, m=m, stats=stats, histogram=hist,
        run_values=run_values,
        throughput={"seconds": elapsed},
    )


# ---------------------------------------------------------------------------
# Minwise
# ---------------------------------------------------------------------------

def exp_minwise(scheme_spec: SchemeSpec, keyset: KeySetSpec, trials: int, master_seed: int,
                q: int | None = None, threads: int = 1,
                key_params: TabulationParams | None = None) -> ExperimentReport:
    """Estimate Pr[h(q) < min h(S)] over fresh seeds; ties count against q."""
    params = key_params or _key_params(scheme_spec)
    keys = generate(keyset, params)
    n = len(keys)
    if q is None:
        q = first_absent(keys, params.key_bits)
    elif (np.asarray(keys) == np.uint64(q)).any():
        raise PreconditionError("query key must not be in the key set")
    out_bits = scheme_spec.out_bits()
    if n and out_bits < (1 + 1 / params.c) * math.log2(n):
        raise ConfigError(
            f"out_bits={out_bits} too narrow for n={n}: minwise needs (1+1/c)*lg n bits"
        )
    hashed = np.concatenate([keys, np.array([q], dtype=np.uint64)])
    t0 = time.perf_counter()

    def worker(start, stop):
        h = _hash_block(scheme_spec, master_seed, start, stop, hashed)
        if n == 0:
            return np.ones(stop - start, dtype=bool)
        return h[:, n] < h[:, :n].min(axis=1)

    parts = _map_ordered(worker, _batch_ranges(trials, n + 1), threads)
    wins = _concat(parts, bool)
    elapsed = time.perf_counter() - t0

    p_hat = float(wins.mean()) if trials else 0.0
    se = _binomial_se(p_hat, trials)
    stats = {
        "n": n,
        "query_key": int(q),
        "p_hat": p_hat,
        "p_hat_times_n": p_hat * n,
        "se": se,
        "se_times_n": se * n,
        "ci_half_width": Z95 * se,
        "headline": f"p*n={p_hat * n:.4f} ±{Z95 * se * n:.4f}",
    }
    return ExperimentReport(
        experiment="minwise", scheme=scheme_spec.label, spec=keyset.to_dict(),
        seed=master_seed, trials=trials, m=None, stats=stats,
        throughput={"seconds": elapsed, "trials_per_s": trials / elapsed if elapsed else None},
    )


# ---------------------------------------------------------------------------
# Bottom-k set similarity
# ---------------------------------------------------------------------------

def exp_set_similarity(scheme_spec: SchemeSpec, a_keys, b_keys, k: int, trials: int,
                       master_seed: int, threads: int = 1) -> ExperimentReport:
    """Bottom-k estimate of |B|/|A| for B a subset of A, plus the min-collision rate."""
    a = np.asarray(a_keys, dtype=np.uint64)
    b = np.asarray(b_keys, dtype=np.uint64)
    if len(np.unique(a)) != len(a):
        raise PreconditionError("A must contain distinct keys")
    if not np.isin(b, a).all():
        raise PreconditionError("B must be a subset of A")
    if not 1 <= k <= len(a):
        raise ConfigError(f"k must be in 1..|A|, got {k}")
    index_of = {int(key): i for i, key in enumerate(a)}
    b_mask = np.zeros(len(a), dtype=bool)
    for key in b:
        b_mask[index_of[int(key)]] = True
    t0 = time.perf_counter()

    def worker(start, stop):
        h = _hash_block(scheme_spec, master_seed, start, stop, a)
        # stable sort: hash ties break by key position, deterministically
        order = np.argsort(h, axis=1, kind="stable")
        in_sketch = np.take_along_axis(
            np.broadcast_to(b_mask, h.shape), order[:, :k], axis=1
        )
        estimates = in_sketch.sum(axis=1) / k
        min_a = h.min(axis=1)
        min_b = h[:, b_mask].min(axis=1) if b_mask.any() else np.full(stop - start, np.inf)
        return estimates, (min_a == min_b)

    parts = _map_ordered(worker, _batch_ranges(trials, len(a)), threads)
    estimates = _concat([p[0] for p in parts])
    collide = _concat([p[1] for p in parts], bool)
    elapsed = time.perf_counter() - t0

    mean_est, var_est = _mean_var(estimates)
    stats = {
        "a_size": len(a),
        "b_size": len(b),
        "k": k,
        "true_fraction": len(b) / len(a),
        "mean_estimate": mean_est,
        "var_estimate": var_est,
        "se_estimate": math.sqrt(var_est / trials) if trials > 1 else 0.0,
        "ci_half_width": _ci_half_width(math.sqrt(var_est), trials),
        "min_collision_rate": float(collide.mean()) if trials else 0.0,
        "headline": f"estimate={mean_est:.4f} true={len(b) / len(a):.4f}",
    }
    return ExperimentReport(
        experiment="similarity", scheme=scheme_spec.label,
        spec={"kind": "explicit", "a_size": len(a), "b_size": len(b)},
        seed=master_seed, trials=trials, m=None, stats=stats,
        run_values=[float(x) for x in estimates],
        throughput={"seconds": elapsed},
    )


# ---------------------------------------------------------------------------
# Fourth moment of a bin load
# ---------------------------------------------------------------------------

def truly_random_fourth_moment(weights, m: int) -> float:
    """Exact E[(W-mu)^4] when each key picks its bin independently/uniformly."""
    w = np.asarray(weights, dtype=np.float64)
    p = 1.0 / m
    pq = p * (1.0 - p)
    s2 = float((w ** 2).sum())
    s4 = float((w ** 4).sum())
    return s4 * pq * (1.0 - 3.0 * pq) + 3.0 * pq * pq * (s2 * s2 - s4)


def exp_fourth_moment(scheme_spec: SchemeSpec, keyset: KeySetSpec, m: int, trials: int,
                      master_seed: int, weights=None, query_dependent: bool = False,
                      query_bin_fn=None, threads: int = 1,
                      key_params: TabulationParams | None = None) -> ExperimentReport:
    """Empirical fourth central moment of one bin's (weighted) load."""
    if m < 1 or m & (m - 1):
        raise ConfigError("m must be a power of two")
    params = key_params or _key_params(scheme_spec)
    keys = generate(keyset, params)
    n = len(keys)
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=np.float64)
    if len(w) != n:
        raise PreconditionError("weights must match the key count")
    out_bits = scheme_spec.out_bits()
    shift = _bins_shift(out_bits, m)
    q = first_absent(keys, params.key_bits) if query_dependent else None
    hashed = keys if q is None else np.concatenate([keys, np.array([q], dtype=np.uint64)])
    mu = float(w.sum()) / m
    t0 = time.perf_counter()

    def worker(start, stop):
        h = _hash_block(scheme_spec, master_seed, start, stop, hashed)
        bins = (h[:, :n] >> shift).astype(np.int64)
        if q is None:
            sel = np.zeros(stop - start, dtype=np.int64)
        else:
            hq = h[:, n]
            if query_bin_fn:
                sel = np.array([int(query_bin_fn(int(x))) % m for x in hq], dtype=np.int64)
            else:
                sel = (hq >> shift).astype(np.int64)
        loads = ((bins == sel[:, None]) * w).sum(axis=1)
        return (loads - mu) ** 4

    parts = _map_ordered(worker, _batch_ranges(trials, n + (q is not None)), threads)
    fourth = _concat(parts)
    elapsed = time.perf_counter() - t0

    m4_hat, m4_var = _mean_var(fourth)
    reference = truly_random_fourth_moment(w, m)
    stats = {
        "n": n,
        "mu": mu,
        "query_dependent": bool(query_dependent),
        "query_key": q,
        "moment4": m4_hat,
        "moment4_se": math.sqrt(m4_var / trials) if trials > 1 else 0.0,
        "reference_truly_random": reference,
        "ratio_to_reference": m4_hat / reference if reference else None,
        "headline": f"E[(W-mu)^4]={m4_hat:.3f} ref={reference:.3f}",
    }
    return ExperimentReport(
        experiment="moment4", scheme=scheme_spec.label, spec=keyset.to_dict(),
        seed=master_seed, trials=trials, m=m, stats=stats,
        throughput={"seconds": elapsed},
    )


# ---------------------------------------------------------------------------
# Exhaustive independence check on tiny parameters
# ---------------------------------------------------------------------------

def exp_independence_exhaustive(params: TabulationParams) -> ExperimentReport:
    """Enumerate all table fillings; verify exact 3-wise uniformity of every
    key triple and exhibit the 2x2-cube 4-tuple whose hashes always xor to 0."""
    total_bits = params.c * params.sigma * params.out_bits
    if total_bits > 20:
        raise ConfigError(f"{total_bits} table bits: exhaustive enumeration capped at 20")
    fillings = 1 << total_bits
    u = 1 << params.key_bits
    out_mask = (1 << params.out_bits) - 1

    f = np.arange(fillings, dtype=np.uint64)
    h = np.zeros((fillings, u), dtype=np.uint64)
    for key in range(u):
        acc = np.zeros(fillings, dtype=np.uint64)
        for i, ch in enumerate(params.chars_of(key)):
            pos = (i * params.sigma + ch) * params.out_bits
            acc ^= (f >> np.uint64(pos)) & np.uint64(out_mask)
        h[:, key] = acc

    expected = fillings >> (3 * params.out_bits)
    three_wise = True
    triples_checked = 0
    span = 1 << params.out_bits
    for a, b, c in itertools.combinations(range(u), 3):
        joint = (h[:, a].astype(np.int64) * span + h[:, b].astype(np.int64)) * span \
            + h[:, c].astype(np.int64)
        counts = np.bincount(joint, minlength=span ** 3)
        triples_checked += 1
        if not (counts == expected).all():
            three_wise = False
            break

    stats: dict = {
        "table_bits": total_bits,
        "fillings": fillings,
        "universe": u,
        "three_wise_uniform": bool(three_wise),
        "triples_checked": triples_checked,
    }

    if params.c >= 2 and u >= 4:
        # the 2x2 combinatorial cube on the two lowest characters
        step = 1 << params.char_bits
        tup = [0, 1, step, step + 1]
        xor_all = h[:, tup[0]] ^ h[:, tup[1]] ^ h[:, tup[2]] ^ h[:, tup[3]]
        stats["four_tuple"] = tup
        stats["four_tuple_xor_always_zero"] = bool((xor_all == 0).all())
    if params.c == 1:
        # a single table is the filling itself: distinct keys are fully independent
        joint = np.zeros(fillings, dtype=np.int64)
        for key in range(u):
            joint = joint * span + h[:, key].astype(np.int64)
        counts = np.bincount(joint, minlength=span ** u)
        stats["fully_independent"] = bool((counts == fillings >> (u * params.out_bits)).all())

    stats["headline"] = f"3-wise uniform={stats['three_wise_uniform']}"
    return ExperimentReport(
        experiment="indep", scheme=f"tab:c={params.c},char_bits={params.char_bits},out_bits={params.out_bits}",
        spec={"kind": "exhaustive"}, seed=0, trials=fillings, m=None, stats=stats,
    )
