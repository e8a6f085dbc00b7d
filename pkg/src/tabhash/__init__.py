"""tabhash: tabulation hashing, competing schemes, and an experiment harness."""

from .errors import (
    CapacityError,
    ConfigError,
    DuplicateKeyError,
    KeyNotFoundError,
    PreconditionError,
)
from .hashers import (
    MERSENNE_61,
    HashScheme,
    MersennePoly,
    MersennePolyParams,
    MultShiftParams,
    SchemeSpec,
    TabulationParams,
    TabulationScheme,
    TrulyRandomOracle,
    TwoIndepMultShift,
    UnivMultShift,
    independence_witness,
    load_tables,
    mersenne_poly_hash,
    parse_scheme,
    save_tables,
    tab_hash,
    tab_init,
    twoindep_mult_shift,
    univ_mult_shift,
)
from .instances import KeySetSpec, generate, parse_keyset
from .prng import TabPrng, load_stream, save_stream
from .rng import StrongStream, derive_seed
from .tables import (
    BinHistogram,
    CuckooBuildResult,
    CuckooInsertResult,
    CuckooTable,
    LinearProbingTable,
    QueryBin,
    bins_distribute,
    cuckoo_build_static,
)
from .experiments import (
    ExperimentReport,
    exp_bin_concentration,
    exp_cuckoo,
    exp_fourth_moment,
    exp_independence_exhaustive,
    exp_linear_probing,
    exp_minwise,
    exp_set_similarity,
    first_absent,
    truly_random_fourth_moment,
)

__version__ = "0.1.0"
