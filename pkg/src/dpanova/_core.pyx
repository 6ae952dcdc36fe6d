# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled random stream and Monte-Carlo kernels.

Mirror of ``_core_py``; keep the two in lockstep. Compiled with
``-ffp-contract=off`` so no fused multiply-add changes the rounding.
"""
import numpy as np

from libc.math cimport log, sqrt, pow
from libc.stdint cimport uint64_t

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef uint64_t INDEX_SALT = 0x6A09E667F3BCC909ULL
cdef double TWO_POW_M52 = 1.0 / 4503599627370496.0

MASK64 = 0xFFFFFFFFFFFFFFFF


cdef struct rng_t:
    uint64_t state
    double spare
    int has_spare


cdef inline uint64_t _mix64(uint64_t z) nogil:
    z = z + GOLDEN
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t _substream_state(uint64_t key, uint64_t index) nogil:
    return _mix64(key ^ _mix64(index ^ INDEX_SALT))


cdef inline uint64_t _next_u64(rng_t* r) nogil:
    cdef uint64_t z
    r.state = r.state + GOLDEN
    z = r.state
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double _uniform(rng_t* r) nogil:
    return (<double>(_next_u64(r) >> 12) + 0.5) * TWO_POW_M52


cdef double _normal(rng_t* r) nogil:
    cdef double u, v, s, m
    if r.has_spare:
        r.has_spare = 0
        return r.spare
    while True:
        u = 2.0 * _uniform(r) - 1.0
        v = 2.0 * _uniform(r) - 1.0
        s = u * u + v * v
        if s < 1.0:
            break
    m = sqrt(-2.0 * log(s) / s)
    r.spare = v * m
    r.has_spare = 1
    return u * m


cdef double _gamma(rng_t* r, double shape) nogil:
    cdef double g, u, d, c, x, v, xx
    if shape < 1.0:
        g = _gamma(r, shape + 1.0)
        u = _uniform(r)
        return g * pow(u, 1.0 / shape)
    d = shape - 1.0 / 3.0
    c = 1.0 / sqrt(9.0 * d)
    while True:
        while True:
            x = _normal(r)
            v = 1.0 + c * x
            if v > 0.0:
                break
        v = v * v * v
        u = _uniform(r)
        xx = x * x
        if u < 1.0 - 0.0331 * xx * xx:
            return d * v
        if log(u) < 0.5 * xx + d * (1.0 - v + log(v)):
            return d * v


cdef inline double _chi_squared(rng_t* r, double df) nogil:
    return 2.0 * _gamma(r, 0.5 * df)


cdef inline double _laplace_icdf(double u, double b) nogil:
    cdef double t
    if b == 0.0:
        return 0.0
    t = u - 0.5
    if t < 0.0:
        return b * log(1.0 + 2.0 * t)
    if t > 0.0:
        return -b * log(1.0 - 2.0 * t)
    return 0.0


cdef inline double _laplace(rng_t* r, double b) nogil:
    if b == 0.0:
        return 0.0
    return _laplace_icdf(_uniform(r), b)


cdef inline double _truncated_normal(rng_t* r, double mean, double sd) nogil:
    cdef double y = mean + sd * _normal(r)
    if y < 0.0:
        return 0.0
    if y > 1.0:
        return 1.0
    return y


cdef double _null_f_draw(rng_t* r, long n, long k, double sigma2,
                         double b_ssa, double b_sse) nogil:
    cdef double df_a = <double>(k - 1)
    cdef double df_e = <double>(n - k)
    cdef double ssa, sse
    while True:
        ssa = sigma2 * _chi_squared(r, df_a) + _laplace(r, b_ssa)
        sse = sigma2 * _chi_squared(r, df_e) + _laplace(r, b_sse)
        if sse != 0.0:
            return (ssa / df_a) / (sse / df_e)


def mix64(z):
    """SplitMix64 output function applied to ``z + GOLDEN``."""
    return _mix64(<uint64_t>(int(z) & MASK64))


def substream_state(key, index):
    return _substream_state(<uint64_t>(int(key) & MASK64),
                            <uint64_t>(int(index) & MASK64))


def laplace_inverse_cdf(double u, double b):
    if not 0.0 < u < 1.0:
        raise ValueError(f"u must lie strictly inside (0, 1), got {u!r}")
    return _laplace_icdf(u, b)


cdef class Stream:
    """SplitMix64 generator with a cached spare normal variate.

    Uniforms are open on both ends: ``((x >> 12) + 0.5) * 2**-52``.
    """

    cdef rng_t r

    def __init__(self, state=0):
        self.r.state = <uint64_t>(int(state) & MASK64)
        self.r.spare = 0.0
        self.r.has_spare = 0

    @classmethod
    def substream(cls, key, index):
        return cls(substream_state(key, index))

    @property
    def state(self):
        return self.r.state

    def next_u64(self):
        return _next_u64(&self.r)

    def uniform(self):
        return _uniform(&self.r)

    def normal(self):
        return _normal(&self.r)

    def gamma(self, double shape):
        return _gamma(&self.r, shape)

    def chi_squared(self, double df):
        return _chi_squared(&self.r, df)

    def laplace(self, double b):
        return _laplace(&self.r, b)

    def truncated_normal(self, double mean, double sd):
        return _truncated_normal(&self.r, mean, sd)

    def truncated_normal_array(self, double mean, double sd, Py_ssize_t count):
        out = np.empty(count, dtype=np.float64)
        cdef double[::1] view = out
        cdef Py_ssize_t i
        with nogil:
            for i in range(count):
                view[i] = _truncated_normal(&self.r, mean, sd)
        return out


def null_f_draw(Stream stream, long n, long k, double sigma2,
                double b_ssa, double b_sse):
    return _null_f_draw(&stream.r, n, k, sigma2, b_ssa, b_sse)


def null_f_draws(key, long n, long k, double sigma2, double b_ssa,
                 double b_sse, Py_ssize_t start, Py_ssize_t stop):
    """Null F-hat draws for indices ``start..stop-1``, one substream each."""
    cdef uint64_t ukey = <uint64_t>(int(key) & MASK64)
    out = np.empty(stop - start, dtype=np.float64)
    cdef double[::1] view = out
    cdef Py_ssize_t i
    cdef rng_t r
    with nogil:
        for i in range(start, stop):
            r.state = _substream_state(ukey, <uint64_t>i)
            r.has_spare = 0
            r.spare = 0.0
            view[i - start] = _null_f_draw(&r, n, k, sigma2, b_ssa, b_sse)
    return out
