"""Seedable random streams and the elementary samplers built on them."""

from __future__ import annotations

import numpy as np

from ..errors import DomainError

_MASK64 = (1 << 64) - 1
_TWO53 = float(1 << 53)


class RandomSource:
    """A reproducible random stream identified by ``(seed, stream)``.

    Equal ``(seed, stream)`` pairs give bit-identical draw sequences. Distinct
    stream ids are mapped through :class:`numpy.random.SeedSequence` spawn
    keys, which yields statistically independent PCG64 streams.

    A source is stateful and should be used by one thread at a time; hand each
    worker its own source via :meth:`derive`.
    """

    def __init__(self, seed: int = 0, stream: int = 0):
        if not (0 <= int(seed) <= _MASK64 and 0 <= int(stream) <= _MASK64):
            raise DomainError("seed and stream must be unsigned 64-bit integers")
        self.seed = int(seed)
        self.stream = int(stream)
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream,))
        self.generator = np.random.Generator(np.random.PCG64(ss))

    def __repr__(self):
        return f"RandomSource(seed={self.seed}, stream={self.stream})"

    def derive(self, index: int) -> "RandomSource":
        """Fresh source on stream ``stream XOR index`` with the same seed."""
        return RandomSource(self.seed, (self.stream ^ int(index)) & _MASK64)

    def fork(self) -> "RandomSource":
        """Independent child source whose seed is drawn from this stream."""
        seed = int(self.generator.integers(0, 2**63, dtype=np.int64))
        return RandomSource(seed, self.stream)

    # elementary draws -------------------------------------------------------

    def uniform(self, size=None):
        """Uniform draws on the open interval (0, 1)."""
        k = self.generator.integers(0, 1 << 53, size=size, dtype=np.int64)
        return (k + 0.5) / _TWO53

    def normal(self, size=None):
        return self.generator.standard_normal(size)

    def chi2(self, df, size=None):
        return sample_chi2(df, self, size)

    def choice(self, values, p, size=None):
        return self.generator.choice(values, size=size, p=p)


def sample_std_normal(rng: RandomSource, size=None):
    return rng.normal(size)


def sample_uniform(rng: RandomSource, size=None):
    return rng.uniform(size)


def sample_gamma(shape: float, rng: RandomSource, size=None):
    """Unit-scale gamma draws by Marsaglia--Tsang squeeze/accept-reject.

    Shapes below one use the boost ``G(a) = G(a + 1) * U**(1/a)``.
    """
    if not shape > 0:
        raise DomainError(f"gamma shape must be positive, got {shape}")
    scalar = size is None
    n = 1 if scalar else int(np.prod(size))
    a = shape + 1.0 if shape < 1 else float(shape)
    d = a - 1.0 / 3.0
    c = 1.0 / np.sqrt(9.0 * d)

    out = np.empty(n)
    filled = 0
    while filled < n:
        need = n - filled
        # acceptance is above 0.95 for a >= 1; oversample a little
        k = need + need // 10 + 8
        z = rng.normal(k)
        v = (1.0 + c * z) ** 3
        u = rng.uniform(k)
        ok = v > 0
        with np.errstate(divide="ignore", invalid="ignore"):
            logv = np.log(np.where(ok, v, 1.0))
        z2 = z * z
        accept = ok & (
            (u < 1.0 - 0.0331 * z2 * z2)
            | (np.log(u) < 0.5 * z2 + d * (1.0 - v + logv))
        )
        got = (d * v)[accept][:need]
        out[filled:filled + got.size] = got
        filled += got.size

    if shape < 1:
        out *= rng.uniform(n) ** (1.0 / shape)
    if scalar:
        return float(out[0])
    return out.reshape(size)


def sample_chi2(df: int, rng: RandomSource, size=None):
    """Chi-square draws with ``df`` degrees of freedom."""
    if int(df) != df or df < 1:
        raise DomainError(f"chi-square degrees of freedom must be a positive integer, got {df}")
    return 2.0 * sample_gamma(0.5 * df, rng, size)
