"""Laplace-noised release of SSA, SSE and the F ratio.

The budget is split evenly: SSA and SSE each get ``epsilon/2``, and F-hat
is assembled from the two noisy sums without touching the data again, so
the release as a whole is epsilon-differentially private.
``epsilon = inf`` turns the noise off and reproduces the exact ANOVA.
"""
from dataclasses import dataclass
import math

from . import rng as _rng
from .anova import Dataset, compute_ssa, compute_sse, group_stats
from .errors import InvalidParameter, NonPositiveN, UndefinedF, UOutOfRange

SSE_SENSITIVITY = 7.0


def sse_sensitivity() -> float:
    """Bound on how much SSE can move when one row changes."""
    return SSE_SENSITIVITY


def ssa_sensitivity(n: int) -> float:
    """Bound ``9 + 5/n`` on how much SSA can move when one row changes."""
    if n < 1:
        raise NonPositiveN(f"n must be positive, got {n}")
    return 9.0 + 5.0 / n


@dataclass(frozen=True)
class PrivacyParams:
    epsilon: float

    def __post_init__(self):
        eps = float(self.epsilon)
        if not eps > 0.0:  # also rejects nan
            raise InvalidParameter(f"epsilon must be positive, got {self.epsilon!r}")
        object.__setattr__(self, "epsilon", eps)

    @property
    def private(self) -> bool:
        return not math.isinf(self.epsilon)


def parse_epsilon(text) -> float:
    """Accept a positive float, or ``inf`` for the noiseless baseline."""
    try:
        eps = float(text)
    except (TypeError, ValueError):
        raise InvalidParameter(f"epsilon must be a number or 'inf', got {text!r}") from None
    return PrivacyParams(eps).epsilon


def laplace_scale(sensitivity: float, epsilon: float) -> float:
    """Scale ``b`` of the Laplace noise spending ``epsilon/2`` on a query."""
    return sensitivity / (epsilon / 2.0)


def noise_scales(n: int, epsilon: float) -> tuple[float, float]:
    """``(b_ssa, b_sse)`` used for a database of ``n`` rows."""
    return (
        laplace_scale(ssa_sensitivity(n), epsilon),
        laplace_scale(sse_sensitivity(), epsilon),
    )


def laplace_inverse_cdf(u: float, b: float) -> float:
    """Quantile function of Lap(b): ``-b*sgn(u-1/2)*ln(1-2|u-1/2|)``."""
    if not 0.0 < u < 1.0:
        raise UOutOfRange(f"u must lie strictly inside (0, 1), got {u!r}")
    return _rng.laplace_inverse_cdf(u, b)


def sample_laplace(stream, b: float) -> float:
    """One Lap(b) variate drawn from ``stream``; exactly 0.0 when b == 0."""
    if b < 0.0:
        raise InvalidParameter(f"Laplace scale must be nonnegative, got {b!r}")
    return stream.laplace(b)


@dataclass(frozen=True)
class PrivateAnovaResult:
    """The releasable output. The hats may be negative."""

    ssa_hat: float
    sse_hat: float
    f_hat: float
    epsilon: float
    n: int
    k: int

    @staticmethod
    def assemble_f(ssa_hat: float, sse_hat: float, n: int, k: int) -> float:
        if sse_hat == 0.0:
            if ssa_hat == 0.0:
                raise UndefinedF("SSA-hat and SSE-hat are both zero")
            return math.copysign(math.inf, ssa_hat)
        return (ssa_hat / (k - 1)) / (sse_hat / (n - k))


def private_anova(d: Dataset, p: PrivacyParams, stream) -> PrivateAnovaResult:
    """Release noisy SSA, SSE and F for ``d``.

    The SSA noise is drawn before the SSE noise, so a given stream state and
    dataset always produce the same release. If SSE-hat is exactly zero the
    ratio is returned as a signed infinity.
    """
    s = group_stats(d)
    ssa = compute_ssa(d, s)
    sse = compute_sse(d, s)
    n, k = d.n, d.k
    b_ssa, b_sse = noise_scales(n, p.epsilon)
    ssa_hat = ssa + sample_laplace(stream, b_ssa)
    sse_hat = sse + sample_laplace(stream, b_sse)
    f_hat = PrivateAnovaResult.assemble_f(ssa_hat, sse_hat, n, k)
    return PrivateAnovaResult(ssa_hat, sse_hat, f_hat, p.epsilon, n, k)
