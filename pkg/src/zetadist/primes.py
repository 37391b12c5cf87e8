"""Primes, prime powers, and the von Mangoldt weight.

Everything downstream (Dirichlet polynomials, random Euler sums, cumulant
sums over primes) iterates over the same table of prime powers, so the table
is built once and passed around explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, ParameterError

SIEVE_SEGMENT = 1_000_000
TABLE_LIMIT = 100_000_000


def sieve_primes(limit: int) -> np.ndarray:
    """Primes up to and including ``limit``, ascending.

    Plain bit sieve up to the segment size, segmented above it so memory
    stays at one boolean block per segment.
    """
    limit = int(limit)
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    if limit > TABLE_LIMIT:
        raise CapacityError("sieve limit exceeds supported range", limit=limit, max=TABLE_LIMIT)
    if limit <= SIEVE_SEGMENT:
        return _sieve_block(limit)

    base = _sieve_block(int(math.isqrt(limit)))
    chunks = [base[base <= limit]]
    lo = int(base[-1]) + 1 if len(base) else 2
    lo = max(lo, int(math.isqrt(limit)) + 1)
    while lo <= limit:
        hi = min(lo + SIEVE_SEGMENT - 1, limit)
        seg = np.ones(hi - lo + 1, dtype=bool)
        for p in base:
            p = int(p)
            if p * p > hi:
                break
            start = max(p * p, ((lo + p - 1) // p) * p)
            seg[start - lo :: p] = False
        chunks.append(np.nonzero(seg)[0].astype(np.int64) + lo)
        lo = hi + 1
    return np.concatenate(chunks)


def _sieve_block(limit: int) -> np.ndarray:
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    for i in range(2, math.isqrt(limit) + 1):
        if is_prime[i]:
            is_prime[i * i :: i] = False
    return np.nonzero(is_prime)[0].astype(np.int64)


@dataclass(frozen=True)
class PrimePowerTable:
    """Prime powers n = p^k <= cutoff_y with cached logarithms.

    Parallel arrays ordered by n. ``log_n`` is stored as ``k * log_p`` so the
    multiplicative structure survives in the floats: every consumer that
    splits a phase t*log(n) into k*(t*log p) sees the identical double.
    """

    cutoff_y: float
    primes: np.ndarray
    p: np.ndarray
    k: np.ndarray
    n: np.ndarray
    log_p: np.ndarray
    log_n: np.ndarray
    _log_by_prime: dict = field(default_factory=dict, repr=False)

    def __len__(self) -> int:
        return len(self.n)

    def count_up_to(self, y: float) -> int:
        return int(np.searchsorted(self.n, math.floor(y), side="right"))


def build_prime_power_table(cutoff_y: float) -> PrimePowerTable:
    """Table of all prime powers up to cutoff_y.

    cutoff_y must lie in [3, 1e8]; above the segment size the sieve switches
    to segmented mode internally.
    """
    if not (isinstance(cutoff_y, (int, float)) and math.isfinite(cutoff_y)):
        raise ParameterError("cutoff_y must be a finite number", cutoff_y=repr(cutoff_y))
    if cutoff_y < 3:
        raise ParameterError("cutoff_y must be at least 3", cutoff_y=cutoff_y)
    if cutoff_y > TABLE_LIMIT:
        raise CapacityError("cutoff_y exceeds supported table range", cutoff_y=cutoff_y, max=TABLE_LIMIT)

    y = int(math.floor(cutoff_y))
    primes = sieve_primes(y)
    # scalar math.log per prime: one canonical double per prime, reused for
    # every power of that prime and by von_mangoldt
    log_primes = np.array([math.log(int(q)) for q in primes], dtype=np.float64)

    ps = [primes]
    ks = [np.ones(len(primes), dtype=np.int64)]
    ls = [log_primes]
    k = 2
    while (1 << k) <= y:
        top = int(round(y ** (1.0 / k)))
        while top**k > y:
            top -= 1
        while (top + 1) ** k <= y:
            top += 1
        m = int(np.searchsorted(primes, top, side="right"))
        if m == 0:
            break
        ps.append(primes[:m])
        ks.append(np.full(m, k, dtype=np.int64))
        ls.append(log_primes[:m])
        k += 1

    p = np.concatenate(ps)
    kk = np.concatenate(ks)
    lp = np.concatenate(ls)
    n = p.astype(object) ** kk.astype(object)  # exact integer powers
    n = n.astype(np.int64)
    order = np.argsort(n, kind="stable")
    p, kk, lp, n = p[order], kk[order], lp[order], n[order]
    log_n = kk * lp

    table = PrimePowerTable(
        cutoff_y=float(cutoff_y),
        primes=primes,
        p=p,
        k=kk,
        n=n,
        log_p=lp,
        log_n=log_n,
    )
    table._log_by_prime.update(zip(primes.tolist(), log_primes.tolist()))
    return table


def von_mangoldt(n: int) -> float:
    """log p if n = p^k for a prime p and k >= 1, else 0.

    Exact integer test, no table needed.
    """
    n = int(n)
    if n < 1:
        raise ParameterError("von_mangoldt argument must be a positive integer", n=n)
    if n == 1:
        return 0.0
    # strip the smallest prime factor, then n must be a pure power of it
    m = n
    p = None
    if m % 2 == 0:
        p = 2
    else:
        d = 3
        while d * d <= m:
            if m % d == 0:
                p = d
                break
            d += 2
        if p is None:
            return math.log(n)  # n itself prime
    while m % p == 0:
        m //= p
    if m == 1:
        return math.log(p)
    return 0.0


def chebyshev_psi(table: PrimePowerTable, y: float) -> float:
    """Sum of von Mangoldt weights over n <= y, from the table.

    Exactly rounded (fsum), so it is reproducible against any independent
    accumulation of the same weights.
    """
    idx = table.count_up_to(y)
    return math.fsum(table.log_p[:idx].tolist())
