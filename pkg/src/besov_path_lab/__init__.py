"""Besov-Orlicz path norms and exact stochastic path simulation."""

__version__ = "0.1.0"

from .besov import (
    BesovParams,
    ModulusProfile,
    dyadic_besov_norm,
    dyadic_besov_norms,
    full_besov_norm,
    gagliardo_seminorm,
    grr_zeta,
    holder_seminorm,
    increment_norm,
    levy_ratio,
    modulus,
    steklov_k_estimate,
    steklov_k_profile,
)
from .orlicz import (
    DiscreteMeasure,
    ExpPower,
    PLog,
    Power,
    YoungFunction,
    lux_equivalence_mid,
    luxemburg_norm,
    luxemburg_norms,
    parse_young,
    young_eval,
    young_inverse,
)
from .paths import SampledPath, extend_reflect, extend_zero, read_csv, scale_affine, write_csv
from .stochastic import (
    DiagonalModel,
    PathBundle,
    RngSpec,
    StepIntegrand,
    deterministic_convolution,
    ito_integral,
    representation_check,
    sample_brownian,
    simulate,
    stochastic_convolution,
)
