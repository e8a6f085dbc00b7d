"""Batch front end: configure schemes, instances, and experiments.

`tabhash run` executes one experiment and writes the JSON report, CSV series,
and matplotlib figures next to every CSV. `tabhash hash` evaluates one scheme
on one key (supporting golden table files for cross-implementation checks).

Exit status is 0 whenever the experiment completed — a hash scheme failing
statistically is data, not an error.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

from .errors import ConfigError, PreconditionError
from .hashers import load_tables, parse_scheme
from .instances import KeySetSpec, generate, parse_keyset
from .rng import derive_seed
from . import experiments as exps

EXPERIMENTS = ("bins", "linprobe", "cuckoo", "minwise", "similarity", "moment4", "indep")


@dataclass
class RunConfig:
    """A fully serializable experiment invocation; re-executing a stored
    config reproduces identical statistics."""

    experiment: str
    scheme: str
    spec: str | None = None
    n: int | None = None
    m: int | None = None
    trials: int = 100
    seed: int = 0
    threads: int = 1
    ops: int | None = None
    subevent_trials: int = 0
    k: int | None = None
    b_size: int | None = None
    query_dependent: bool = False
    out: str | None = None
    csv: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        return cls(**d)

    def execute(self) -> exps.ExperimentReport:
        scheme = parse_scheme(self.scheme)
        if self.experiment == "indep":
            return exps.exp_independence_exhaustive(scheme.tab_params())

        keyset = parse_keyset(self.spec or "random", n=self.n,
                              seed=derive_seed(self.seed, "keys"))
        if self.experiment == "bins":
            return exps.exp_bin_concentration(
                scheme, keyset, self._need_m(), self.trials, self.seed, threads=self.threads
            )
        if self.experiment == "linprobe":
            ops = self.ops if self.ops is not None else 10 * keyset.n
            return exps.exp_linear_probing(
                scheme, keyset, self._default_double_m(keyset.n), ops, self.trials, self.seed,
                threads=self.threads,
            )
        if self.experiment == "cuckoo":
            return exps.exp_cuckoo(
                scheme, keyset, self._default_double_m(keyset.n), self.trials, self.seed,
                subevent_trials=self.subevent_trials, threads=self.threads,
            )
        if self.experiment == "minwise":
            return exps.exp_minwise(scheme, keyset, self.trials, self.seed, threads=self.threads)
        if self.experiment == "similarity":
            from .experiments import _key_params  # key geometry for generation

            a = generate(keyset, _key_params(scheme))
            b_size = self.b_size if self.b_size is not None else max(1, len(a) // 4)
            if b_size > len(a):
                raise ConfigError("--b-size larger than the key set")
            import numpy as np

            picker = np.random.default_rng(derive_seed(self.seed, "subset"))
            b = a[np.sort(picker.choice(len(a), size=b_size, replace=False))]
            k = self.k if self.k is not None else max(1, min(64, len(a)))
            return exps.exp_set_similarity(scheme, a, b, k, self.trials, self.seed,
                                           threads=self.threads)
        if self.experiment == "moment4":
            return exps.exp_fourth_moment(
                scheme, keyset, self._need_m(), self.trials, self.seed,
                query_dependent=self.query_dependent, threads=self.threads,
            )
        raise ConfigError(f"unknown experiment {self.experiment!r}")

    def _need_m(self) -> int:
        if self.m is None:
            raise ConfigError(f"experiment {self.experiment!r} needs --m")
        return self.m

    def _default_double_m(self, n: int) -> int:
        """Recommended table size 2^ceil(lg 2n) when --m is omitted."""
        if self.m is not None:
            return self.m
        if n < 1:
            raise ConfigError("cannot derive --m from an empty key set")
        return 1 << (2 * n - 1).bit_length()


def _write_artifacts(report: exps.ExperimentReport, config: RunConfig) -> None:
    from . import plots

    if config.out:
        report.write_json(config.out)
    if config.csv:
        csv_path = Path(config.csv)
        wrote_main = False
        if report.histogram is not None:
            report.write_histogram_csv(csv_path)
            plots.render_histogram(report, csv_path.with_suffix(".png"))
            wrote_main = True
        if report.run_values is not None:
            runs_path = csv_path if not wrote_main else csv_path.with_name(
                csv_path.stem + "-runs" + csv_path.suffix
            )
            report.write_runs_csv(runs_path)
            plots.render_cdf(report, runs_path.with_suffix(".png"))
            wrote_main = True
        if not wrote_main:
            raise ConfigError(f"experiment {report.experiment!r} produced no CSV series")


def _add_run_parser(sub) -> None:
    p = sub.add_parser("run", help="execute one experiment")
    p.add_argument("--exp", required=True, choices=EXPERIMENTS, help="experiment id")
    p.add_argument("--scheme", default="tab:c=4,char_bits=8,out_bits=32",
                   help="scheme config, e.g. tab:c=2,char_bits=8,out_bits=32 | tab-c2 | "
                        "univ-ms:key_bits=32 | 2indep-ms | mersenne:k=5 | random")
    p.add_argument("--spec", default=None,
                   help="key-set spec: random | dense:start=0 | hypercube:A=32,c=4 | "
                        "cuckoo-hard | arith:start=0,stride=1")
    p.add_argument("--n", type=int, default=None, help="key-set size")
    p.add_argument("--m", type=int, default=None, help="table size / bin count (power of two)")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0,
                   help="master seed (env TABHASH_SEED overrides)")
    p.add_argument("--threads", type=int, default=1, help="cap on trial parallelism")
    p.add_argument("--ops", type=int, default=None, help="linprobe: insert/delete cycles")
    p.add_argument("--subevent-trials", type=int, default=0,
                   help="cuckoo: hard-instance sub-event trials")
    p.add_argument("--k", type=int, default=None, help="similarity: sketch size")
    p.add_argument("--b-size", type=int, default=None, help="similarity: subset size")
    p.add_argument("--query-dependent", action="store_true",
                   help="moment4: measure the bin selected from the query hash")
    p.add_argument("--out", default=None, help="JSON report path")
    p.add_argument("--csv", default=None, help="CSV path (figures rendered alongside)")


def _add_hash_parser(sub) -> None:
    p = sub.add_parser("hash", help="hash one key with a configured or stored scheme")
    p.add_argument("key", help="key as hex (0x..) or decimal")
    p.add_argument("--scheme", default=None, help="scheme config string")
    p.add_argument("--table-file", default=None, help="load a tabulation golden file")
    p.add_argument("--seed", type=int, default=0, help="scheme seed (env TABHASH_SEED overrides)")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="tabhash",
        description="Hashing laboratory: tabulation and friends, tables, experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    _add_run_parser(sub)
    _add_hash_parser(sub)
    args = parser.parse_args(argv)

    env_seed = os.environ.get("TABHASH_SEED")
    if env_seed is not None:
        try:
            args.seed = int(env_seed, 0)
        except ValueError:
            print(f"tabhash: bad TABHASH_SEED {env_seed!r}", file=sys.stderr)
            return 2

    try:
        if args.command == "hash":
            return _cmd_hash(args)
        return _cmd_run(args)
    except (ConfigError, PreconditionError) as exc:
        print(f"tabhash: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"tabhash: {exc}", file=sys.stderr)
        return 1


def _cmd_run(args) -> int:
    config = RunConfig(
        experiment=args.exp, scheme=args.scheme, spec=args.spec, n=args.n, m=args.m,
        trials=args.trials, seed=args.seed, threads=args.threads, ops=args.ops,
        subevent_trials=args.subevent_trials, k=args.k, b_size=args.b_size,
        query_dependent=args.query_dependent, out=args.out, csv=args.csv,
    )
    report = config.execute()
    _write_artifacts(report, config)
    print(report.summary())
    return 0


def _cmd_hash(args) -> int:
    try:
        key = int(args.key, 0)
    except ValueError:
        print(f"tabhash: cannot parse key {args.key!r}", file=sys.stderr)
        return 2
    if key < 0:
        print("tabhash: key must be non-negative", file=sys.stderr)
        return 2
    if args.table_file:
        scheme = load_tables(args.table_file)
    elif args.scheme:
        scheme = parse_scheme(args.scheme).instantiate(args.seed)
    else:
        print("tabhash: need --scheme or --table-file", file=sys.stderr)
        return 2
    if key >> scheme.key_bits:
        print(f"tabhash: key {args.key} wider than {scheme.key_bits} bits", file=sys.stderr)
        return 2
    print(f"{scheme.hash(key):#x}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
