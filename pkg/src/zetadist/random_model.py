"""Random Euler model: i.i.d. uniform phases on the primes.

The random sum attaches the phase variable X(p)^k to the prime-power term
p^k, giving a random version of the truncated Dirichlet series whose law is
the benchmark for every density and tail computed analytically elsewhere.

Sampling is counter-based: the uniform angle used for (draw, prime) is a
pure function of (seed, draw index, prime index), realized as keyed Philox
blocks over a fixed draw chunk. Results are bit-identical for any thread
count and any n that covers the draw.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, ParameterError
from .model import ModelPoint
from .primes import PrimePowerTable

DRAW_CHUNK = 4096
_ENUM_GUARD = 100_000_000


def power_coefficients(mp: ModelPoint, table: PrimePowerTable, y: float | None = None):
    """Arrays (p_index, k, coef) over prime powers n = p^k <= y.

    coef = n^-sigma / (k * (log n)^m), the weight of the n-th term.
    """
    y = _resolve_y(table, y)
    idx = table.count_up_to(y)
    p = table.p[:idx]
    k = table.k[:idx]
    log_n = table.log_n[:idx]
    coef = np.exp(-mp.sigma * log_n) / k.astype(np.float64)
    if mp.m:
        coef /= log_n**mp.m
    n_primes = int(np.searchsorted(table.primes, math.floor(y), side="right"))
    p_index = np.searchsorted(table.primes[:n_primes], p)
    return p_index, k, coef, n_primes


def _resolve_y(table: PrimePowerTable, y: float | None) -> float:
    if y is None:
        return table.cutoff_y
    if y > table.cutoff_y:
        raise CapacityError("requested cutoff exceeds the table", y=y, table=table.cutoff_y)
    if y < 2:
        raise ParameterError("cutoff must be at least 2", y=y)
    return float(y)


@dataclass(frozen=True)
class MCSample:
    mp: ModelPoint
    cutoff_y: float
    seed: int
    n_draws: int
    values: np.ndarray  # complex, one random sum per draw

    def projections(self, alpha: float | None = None) -> np.ndarray:
        """Re e^{-i alpha} value for each draw."""
        a = self.mp.alpha if alpha is None else float(alpha)
        return (self.values * np.exp(-1j * a)).real


def sample_model_sum(
    mp: ModelPoint,
    table: PrimePowerTable,
    n_draws: int,
    seed: int,
    y: float | None = None,
    threads: int = 1,
) -> MCSample:
    """n_draws independent copies of the random truncated sum at cutoff y."""
    if n_draws < 1:
        raise ParameterError("n_draws must be positive", n_draws=n_draws)
    if threads < 1:
        raise ParameterError("threads must be positive", threads=threads)
    y = _resolve_y(table, y)
    p_index, k, coef, n_primes = power_coefficients(mp, table, y)
    if n_primes == 0:
        raise ParameterError("no primes below cutoff", y=y)

    first_order = k == 1
    c1 = np.zeros(n_primes)
    c1[p_index[first_order]] = coef[first_order]
    higher = [
        (int(j), int(kk), float(c))
        for j, kk, c in zip(p_index[~first_order], k[~first_order], coef[~first_order])
    ]

    seed64 = int(seed) & 0xFFFFFFFFFFFFFFFF
    values = np.empty(n_draws, dtype=np.complex128)
    n_chunks = (n_draws + DRAW_CHUNK - 1) // DRAW_CHUNK

    def run_chunk(ci: int):
        lo = ci * DRAW_CHUNK
        hi = min(lo + DRAW_CHUNK, n_draws)
        bitgen = np.random.Philox(key=np.array([seed64, ci], dtype=np.uint64))
        u = np.random.Generator(bitgen).random((hi - lo, n_primes))
        z = np.exp((2j * math.pi) * u)
        acc = z @ c1
        for j, kk, c in higher:
            acc += c * z[:, j] ** kk
        values[lo:hi] = acc

    if threads == 1 or n_chunks == 1:
        for ci in range(n_chunks):
            run_chunk(ci)
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            list(ex.map(run_chunk, range(n_chunks)))

    return MCSample(mp=mp, cutoff_y=y, seed=seed64, n_draws=n_draws, values=values)


def exact_mixed_moment(
    mp: ModelPoint, table: PrimePowerTable, k: int, l: int, y: float | None = None
) -> float:
    """E[ S^k conj(S)^l ] for the random truncated sum S, exactly.

    A product of phase variables averages to 1 precisely when both sides
    carry the same prime-power multiset, i.e. when the two integer products
    coincide; everything else averages to 0. The sum over surviving tuples
    is organized as k-fold and l-fold multiplicative convolutions keyed by
    the exact integer products.
    """
    if k < 0 or l < 0:
        raise ParameterError("moment orders must be nonnegative", k=k, l=l)
    y = _resolve_y(table, y)
    idx = table.count_up_to(y)
    if idx**(k + l) > _ENUM_GUARD:
        raise CapacityError(
            "moment enumeration too large",
            prime_powers=int(idx),
            k=k,
            l=l,
            guard=_ENUM_GUARD,
        )
    _, _, coef, _ = power_coefficients(mp, table, y)
    ns = [int(v) for v in table.n[:idx]]
    base = dict(zip(ns, coef.tolist()))

    left = _self_convolve(base, k)
    right = left if k == l else _self_convolve(base, l)
    return float(sum(c * right[n] for n, c in left.items() if n in right))


def _self_convolve(base: dict, times: int) -> dict:
    out = {1: 1.0}
    for _ in range(times):
        nxt: dict = {}
        for n0, c0 in out.items():
            for n1, c1 in base.items():
                key = n0 * n1
                nxt[key] = nxt.get(key, 0.0) + c0 * c1
        out = nxt
    return out


def mc_tail(sample: MCSample, tau: float, alpha: float | None = None) -> tuple[float, float]:
    """Empirical P(projection > tau) with its binomial standard error."""
    proj = sample.projections(alpha)
    n = len(proj)
    phat = float(np.count_nonzero(proj > tau)) / n
    se = math.sqrt(max(phat * (1.0 - phat), 1.0 / n) / n)
    return phat, se
