"""Counter-based deterministic random number generation ("sm64/v1").

Every sampled value is a pure function of (seed, field tag, element index),
so regenerating any slice of a dataset yields identical bytes no matter how
the work is chunked or threaded.

Scheme
------
* ``mix64`` is the splitmix64 finalizer.
* A field stream key is ``mix64((seed * GOLDEN) ^ fnv1a64(tag))``.
* Raw draw i of a stream is ``mix64(key + i * GOLDEN)`` (mod 2**64).
* Uniforms map the top 53 bits to [0, 1).
* Normals use Box-Muller on uniform pairs (2 draws per pair of normals).
* Gammas use Marsaglia-Tsang with a 64-draw counter block per element;
  draws 0..62 feed rejection trials (3 per trial), draw 63 is reserved for
  the alpha < 1 boost factor.
"""

from __future__ import annotations

import numpy as np

GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_U64 = np.uint64
_INV_2_53 = float(2.0**-53)

GAMMA_BLOCK = 64  # draws reserved per gamma element
_GAMMA_TRIALS = 21  # (GAMMA_BLOCK - 1) // 3


def mix64(x: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer, elementwise over uint64 arrays."""
    z = x.astype(_U64, copy=True)
    z ^= z >> _U64(30)
    z *= _U64(_MIX1)
    z ^= z >> _U64(27)
    z *= _U64(_MIX2)
    z ^= z >> _U64(31)
    return z


def fnv1a64(tag: str) -> int:
    h = _FNV_OFFSET
    for byte in tag.encode("utf-8"):
        h ^= byte
        h = (h * _FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return h


def stream_key(seed: int, tag: str) -> int:
    mixed = ((seed & 0xFFFFFFFFFFFFFFFF) * GOLDEN) & 0xFFFFFFFFFFFFFFFF
    raw = np.array([mixed ^ fnv1a64(tag)], dtype=_U64)
    return int(mix64(raw)[0])


def _raw(key: int, counters: np.ndarray) -> np.ndarray:
    state = _U64(key) + counters.astype(_U64) * _U64(GOLDEN)
    return mix64(state)


def _to_unit(bits: np.ndarray) -> np.ndarray:
    return (bits >> _U64(11)).astype(np.float64) * _INV_2_53


class CounterRng:
    """Stateless-by-construction RNG facade over per-tag counter streams."""

    def __init__(self, seed: int):
        self.seed = int(seed)

    def _key(self, tag: str) -> int:
        return stream_key(self.seed, tag)

    def uniforms(self, tag: str, n: int, offset: int = 0) -> np.ndarray:
        """n uniforms in [0, 1) at counters offset..offset+n-1."""
        ctr = np.arange(offset, offset + n, dtype=np.uint64)
        return _to_unit(_raw(self._key(tag), ctr))

    def normals(self, tag: str, n: int) -> np.ndarray:
        """n standard normals via Box-Muller."""
        pairs = (n + 1) // 2
        u = self.uniforms(tag, 2 * pairs)
        u1 = 1.0 - u[0::2]  # (0, 1], safe for log
        u2 = u[1::2]
        r = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * np.pi * u2
        z = np.empty(2 * pairs, dtype=np.float64)
        z[0::2] = r * np.cos(theta)
        z[1::2] = r * np.sin(theta)
        return z[:n]

    def integers(self, tag: str, n: int, bound: int) -> np.ndarray:
        """n integers uniform over [0, bound). Bias is < bound / 2**53."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        u = self.uniforms(tag, n)
        return np.minimum((u * bound).astype(np.int64), bound - 1)

    def permutation(self, tag: str, n: int) -> np.ndarray:
        """Deterministic permutation of range(n)."""
        return np.argsort(self.uniforms(tag, n), kind="stable").astype(np.int64)

    def gammas(self, tag: str, n: int, alpha: float) -> np.ndarray:
        """n Gamma(alpha, 1) variates, one 64-draw counter block per element."""
        if alpha <= 0.0:
            raise ValueError("alpha must be positive")
        key = self._key(tag)
        boosted = alpha < 1.0
        shape = alpha + 1.0 if boosted else alpha

        d = shape - 1.0 / 3.0
        c = 1.0 / np.sqrt(9.0 * d)
        base = np.arange(n, dtype=np.uint64) * _U64(GAMMA_BLOCK)
        out = np.full(n, np.nan, dtype=np.float64)
        pending = np.arange(n, dtype=np.int64)
        for trial in range(_GAMMA_TRIALS):
            if pending.size == 0:
                break
            ctr0 = base[pending] + _U64(3 * trial)
            u1 = 1.0 - _to_unit(_raw(key, ctr0))
            u2 = _to_unit(_raw(key, ctr0 + _U64(1)))
            uacc = _to_unit(_raw(key, ctr0 + _U64(2)))
            x = np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)
            v = (1.0 + c * x) ** 3
            ok = v > 0.0
            with np.errstate(divide="ignore", invalid="ignore"):
                logv = np.where(ok, np.log(np.where(ok, v, 1.0)), 0.0)
                accept = ok & (
                    np.log(np.maximum(uacc, 1e-300))
                    < 0.5 * x * x + d - d * v + d * logv
                )
            out[pending[accept]] = d * v[accept]
            pending = pending[~accept]
        if pending.size:  # pragma: no cover - probability < 1e-20 per element
            raise RuntimeError("gamma sampler exhausted its counter block")

        if boosted:
            ub = 1.0 - _to_unit(_raw(key, base + _U64(GAMMA_BLOCK - 1)))
            out *= ub ** (1.0 / alpha)
        return out

    def dirichlet(self, tag: str, rows: int, dim: int, alpha: float) -> np.ndarray:
        """(rows, dim) matrix of Dirichlet(alpha * ones(dim)) rows."""
        g = self.gammas(tag, rows * dim, alpha).reshape(rows, dim)
        return g / g.sum(axis=1, keepdims=True)
