"""Pure-Python random stream and Monte-Carlo kernels.

Reference implementation of the compiled ``_core`` extension. Both modules
must produce bit-identical output for the same key, so every arithmetic step
here is mirrored one-for-one in ``_core.pyx``.
"""
import math

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN = 0x9E3779B97F4A7C15
INDEX_SALT = 0x6A09E667F3BCC909
TWO_POW_M52 = 1.0 / 4503599627370496.0


def mix64(z):
    """SplitMix64 output function applied to ``z + GOLDEN``."""
    z = (z + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def substream_state(key, index):
    return mix64(key ^ mix64(index ^ INDEX_SALT))


def laplace_inverse_cdf(u, b):
    if not 0.0 < u < 1.0:
        raise ValueError(f"u must lie strictly inside (0, 1), got {u!r}")
    if b == 0.0:
        return 0.0
    t = u - 0.5
    if t < 0.0:
        return b * math.log(1.0 + 2.0 * t)
    if t > 0.0:
        return -b * math.log(1.0 - 2.0 * t)
    return 0.0


class Stream:
    """SplitMix64 generator with a cached spare normal variate.

    Uniforms are open on both ends: ``((x >> 12) + 0.5) * 2**-52``.
    """

    __slots__ = ("_state", "_spare", "_has_spare")

    def __init__(self, state=0):
        self._state = int(state) & MASK64
        self._spare = 0.0
        self._has_spare = False

    @classmethod
    def substream(cls, key, index):
        return cls(substream_state(int(key) & MASK64, int(index) & MASK64))

    @property
    def state(self):
        return self._state

    def next_u64(self):
        self._state = (self._state + GOLDEN) & MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def uniform(self):
        return ((self.next_u64() >> 12) + 0.5) * TWO_POW_M52

    def normal(self):
        if self._has_spare:
            self._has_spare = False
            return self._spare
        while True:
            u = 2.0 * self.uniform() - 1.0
            v = 2.0 * self.uniform() - 1.0
            s = u * u + v * v
            if s < 1.0:
                break
        m = math.sqrt(-2.0 * math.log(s) / s)
        self._spare = v * m
        self._has_spare = True
        return u * m

    def gamma(self, shape):
        # Marsaglia-Tsang squeeze; shape < 1 boosted through shape + 1
        if shape < 1.0:
            g = self.gamma(shape + 1.0)
            u = self.uniform()
            return g * u ** (1.0 / shape)
        d = shape - 1.0 / 3.0
        c = 1.0 / math.sqrt(9.0 * d)
        while True:
            while True:
                x = self.normal()
                v = 1.0 + c * x
                if v > 0.0:
                    break
            v = v * v * v
            u = self.uniform()
            xx = x * x
            if u < 1.0 - 0.0331 * xx * xx:
                return d * v
            if math.log(u) < 0.5 * xx + d * (1.0 - v + math.log(v)):
                return d * v

    def chi_squared(self, df):
        return 2.0 * self.gamma(0.5 * df)

    def laplace(self, b):
        if b == 0.0:
            return 0.0
        return laplace_inverse_cdf(self.uniform(), b)

    def truncated_normal(self, mean, sd):
        y = mean + sd * self.normal()
        if y < 0.0:
            return 0.0
        if y > 1.0:
            return 1.0
        return y

    def truncated_normal_array(self, mean, sd, count):
        out = np.empty(count, dtype=np.float64)
        for i in range(count):
            out[i] = self.truncated_normal(mean, sd)
        return out


def null_f_draw(stream, n, k, sigma2, b_ssa, b_sse):
    df_a = k - 1
    df_e = n - k
    while True:
        ssa = sigma2 * stream.chi_squared(df_a) + stream.laplace(b_ssa)
        sse = sigma2 * stream.chi_squared(df_e) + stream.laplace(b_sse)
        if sse != 0.0:
            return (ssa / df_a) / (sse / df_e)


def null_f_draws(key, n, k, sigma2, b_ssa, b_sse, start, stop):
    """Null F-hat draws for indices ``start..stop-1``, one substream each."""
    out = np.empty(stop - start, dtype=np.float64)
    for j, i in enumerate(range(start, stop)):
        out[j] = null_f_draw(Stream.substream(key, i), n, k, sigma2, b_ssa, b_sse)
    return out
