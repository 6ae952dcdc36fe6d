"""Differentially private one-way ANOVA.

Exact sums of squares, a Laplace-noised release of SSA/SSE/F, p-values
from a simulated null that includes the privacy noise, and a power-study
harness. Hot loops run in a compiled extension when it is available
(``dpanova.rng.BACKEND``).
"""
__version__ = "0.1.0"

from .anova import (
    Dataset,
    ExactAnova,
    GroupStats,
    compute_f,
    compute_sse,
    compute_ssa,
    exact_anova,
    group_stats,
    validate_dataset,
)
from .errors import *  # noqa: F401,F403
from .mechanism import (
    PrivacyParams,
    PrivateAnovaResult,
    laplace_inverse_cdf,
    private_anova,
    sample_laplace,
    ssa_sensitivity,
    sse_sensitivity,
)
from .nulldist import (
    NullConfig,
    PValueResult,
    null_distribution,
    p_value,
    p_value_for_result,
    sample_chi_squared,
    simulate_null_f_hat,
)
from .rng import BACKEND, Stream, stream_key, substream
