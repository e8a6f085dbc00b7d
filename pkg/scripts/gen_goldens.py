"""Generate the frozen golden files under tests/data/ (run once)."""

from pathlib import Path

from tabhash import TabulationParams, save_tables, tab_init
from tabhash.prng import save_stream

DATA = Path(__file__).resolve().parent.parent / "tests" / "data"


def main() -> None:
    DATA.mkdir(parents=True, exist_ok=True)

    scheme = tab_init(TabulationParams(c=4, char_bits=8, out_bits=32), seed=0x42)
    save_tables(DATA / "tab_c4cb8ob32_seed0x42.tabh", scheme)

    save_stream(DATA / "prng_seed0x1234_r4_d2.tprn", seed=0x1234, count=16,
                row_len=4, degree=2, out_bits=32)
    save_stream(DATA / "prng_seed0x1234abcd_r1024_d32.tprn", seed=0x1234ABCD,
                count=4096, row_len=1024, degree=32, out_bits=32)
    print("golden files written to", DATA)


if __name__ == "__main__":
    main()
