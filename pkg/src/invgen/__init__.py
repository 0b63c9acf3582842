"""Simulation and exact-computation lab for common fixed-set sizes of random permutations."""

from .constants import (
    BETA,
    DEFAULT_SEED,
    DELTA_FIX,
    Constants,
    fourgen_exponent,
    harmonic,
    mainlemma_constants_check,
)
from .errors import CapacityError
from .exact import (
    WeightedSignature,
    cauchy_weight,
    exact_common_size_prob,
    exact_small_cycle_count_dist,
    partitions,
    single_set_bound,
    weighted_signatures,
)
from .fourier import (
    RieszInstance,
    SSet2D,
    TorusPoint,
    compute_S,
    eval_F,
    integrate_F_sq,
    ki_thresholds,
    parseval_lower_bound_check,
    sample_riesz_instance,
    tnorm,
    trigsum,
)
from .perms import (
    CycleType,
    Permutation,
    SumsetBitset,
    common_fixed_size,
    cycle_type,
    fixed_set_sizes,
    sample_permutation,
    sample_permutation_with_parity,
)
from .poisson import (
    PoissonCycleVector,
    event_E,
    intersection_trial,
    sample_vector,
    sumset,
    zero_window_prob,
)

__version__ = "0.1.0"
