"""Characteristic function of the limit law and its Fourier inversion.

The characteristic function is an Euler product of per-prime circle
averages. Near primes are integrated exactly; far primes, whose local
factor differs from 1 by O(|w|^2 p^{-2 sigma}), enter through a single
Gaussian constant. The 2D density and the 1D projected marginals are
discrete inverse transforms of that product on conjugate grids.

Cutoff policy: the public single-point evaluator follows the formal
truncation rule (error bound 2|w| Y^{1/2-sigma} (log Y)^{-m} below the
requested tolerance, capacity error if the table cannot reach it). The
density and marginal constructors instead size their cutoff against the
empirical quadratic tail sum_{p>Y} |w|^2/4 * E|local|^2, which is the
estimate that actually tracks the truncation effect at reachable table
sizes; both numbers are recorded in the metadata.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special as sp_special

from .errors import CapacityError, NumericError, ParameterError
from .model import ModelPoint
from .primes import TABLE_LIMIT, PrimePowerTable, build_prime_power_table

_TABLE_LADDER = [1e4, 3e4, 1e5, 3e5, 1e6, 3e6, 1e7, 3e7, 1e8]
_table_cache: dict = {}


def cached_table(cutoff: float) -> PrimePowerTable:
    """Shared prime-power tables on a fixed ladder of cutoffs."""
    for y in _TABLE_LADDER:
        if cutoff <= y:
            break
    else:
        raise CapacityError("cutoff exceeds table ladder", cutoff=cutoff, max=_TABLE_LADDER[-1])
    if y not in _table_cache:
        _table_cache[y] = build_prime_power_table(y)
    return _table_cache[y]


# ---------------------------------------------------------------------------
# local factors


def local_on_circle(mp: ModelPoint, p: int, n_nodes: int) -> np.ndarray:
    """The local term at p evaluated on n_nodes equispaced phases."""
    theta = np.arange(n_nodes) * (2.0 * math.pi / n_nodes)
    z = float(p) ** (-mp.sigma) * np.exp(1j * theta)
    acc = np.zeros_like(z)
    zk = np.ones_like(z)
    for k in range(1, 2000):
        zk = zk * z
        term = zk / float(k) ** (mp.m + 1)
        acc += term
        if float(p) ** (-mp.sigma * k) / float(k) ** (mp.m + 1) < 1e-17:
            break
    if mp.m:
        acc /= math.log(p) ** mp.m
    return acc


def _local_nodes(mp: ModelPoint, p: int, wmax: float) -> int:
    # phase swing of the quadrature integrand is at most |w| * max|local|;
    # keep ~8 trapezoid nodes per unit of swing, floor 64
    peak = _local_peak(mp, p)
    need = 8.0 * max(1.0, wmax * peak)
    n = 64
    while n < need:
        n *= 2
    return min(n, 1 << 16)


def _local_peak(mp: ModelPoint, p: int) -> float:
    r = float(p) ** (-mp.sigma)
    total, rk = 0.0, 1.0
    for k in range(1, 400):
        rk *= r
        total += rk / float(k) ** (mp.m + 1)
        if rk < 1e-16:
            break
    if mp.m:
        total /= math.log(p) ** mp.m
    return total


def char_fn_local(mp: ModelPoint, p: int, w: complex) -> complex:
    """Circle average of exp(i<local term, w>) at one prime.

    Periodic trapezoid starting at 64 nodes, doubled until the value moves
    by less than 1e-12.
    """
    w = complex(w)
    n = 64
    prev = None
    while n <= (1 << 18):
        eta = local_on_circle(mp, p, n)
        val = complex(np.exp(1j * (eta.real * w.real + eta.imag * w.imag)).mean())
        if prev is not None and abs(val - prev) < 1e-12:
            return val
        prev = val
        n *= 2
    raise NumericError("local characteristic factor did not stabilize", p=p, w=str(w))


# ---------------------------------------------------------------------------
# far-prime Gaussian constant


def second_moment_weights(mp: ModelPoint, table: PrimePowerTable, lo: float, hi: float) -> float:
    """sum over primes in (lo, hi] of E|local|^2 = Li_{2m+2}(p^-2sigma)/(log p)^2m."""
    pr = table.primes
    i0, i1 = np.searchsorted(pr, [lo, hi], side="right")
    p = pr[i0:i1].astype(np.float64)
    if len(p) == 0:
        return 0.0
    x = p ** (-2.0 * mp.sigma)
    e = 2 * mp.m + 2
    q = x + x**2 / 2.0**e + x**3 / 3.0**e
    if mp.m:
        q = q / np.log(p) ** (2 * mp.m)
    return float(q.sum())


def second_moment_tail(mp: ModelPoint, y: float) -> float:
    """Integral estimate of the same sum over all primes beyond y."""
    a = 2.0 * mp.sigma - 1.0
    b = 2 * mp.m + 1
    x0 = math.log(y)
    if a < 0.0 or (a == 0.0 and b <= 1):
        raise ParameterError("second-moment tail diverges", sigma=mp.sigma, m=mp.m)
    if a == 0.0:
        # int_y^inf t^-1 (log t)^-b dt
        return float(x0 ** (1 - b) / (b - 1))
    # int_y^inf t^-2sigma (log t)^-(2m+1) dt = x0^(1-b) * E_b(a x0)
    return float(x0 ** (1 - b) * sp_special.expn(b, a * x0))


def model_variance(mp: ModelPoint, table: PrimePowerTable) -> float:
    """E|limit sum|^2: per-prime second moments plus the beyond-table tail."""
    return second_moment_weights(mp, table, 0.0, table.cutoff_y) + second_moment_tail(
        mp, table.cutoff_y
    )


# ---------------------------------------------------------------------------
# truncation policy


def formal_truncation_bound(mp: ModelPoint, wabs: float, y: float) -> float:
    return 2.0 * wabs * y ** (0.5 - mp.sigma) / math.log(y) ** mp.m


def char_fn(mp: ModelPoint, w: complex, tol: float) -> tuple[complex, float]:
    """Product over p <= Y of the local factors, Y sized by the formal rule.

    Returns (value, y_used) where y_used is the smallest cutoff whose formal
    truncation bound is below tol. Capacity error if no table cutoff
    reaches it.
    """
    if not (tol > 0):
        raise ParameterError("tol must be positive", tol=tol)
    w = complex(w)
    wabs = abs(w)
    if wabs == 0.0:
        return 1.0 + 0.0j, 3.0
    if formal_truncation_bound(mp, wabs, TABLE_LIMIT) >= tol:
        raise CapacityError(
            "formal truncation bound cannot reach tol within the table",
            tol=tol,
            w_abs=wabs,
            bound_at_limit=formal_truncation_bound(mp, wabs, TABLE_LIMIT),
        )
    lo, hi = 3.0, float(TABLE_LIMIT)
    while hi / lo > 1.0001:
        mid = math.sqrt(lo * hi)
        if formal_truncation_bound(mp, wabs, mid) < tol:
            hi = mid
        else:
            lo = mid
    y_used = hi
    table = cached_table(y_used)
    val = _char_fn_ray(mp, math.atan2(w.imag, w.real), np.array([wabs]), y_used, table)[0]
    return complex(val), y_used


def quad_prime_bound(mp: ModelPoint, wmax: float) -> float:
    """Primes up to this bound are integrated exactly; beyond it the local
    factor is within O((|w| p^-sigma / log^m p)^3) of its Gaussian surrogate."""
    target = 4.0 * max(wmax, 1.0)
    p = 200.0
    while p ** mp.sigma * math.log(p) ** mp.m < target and p < 1e7:
        p *= 1.25
    return p


def _char_fn_ray(
    mp: ModelPoint,
    alpha: float,
    ts: np.ndarray,
    y: float,
    table: PrimePowerTable,
    p_quad: float | None = None,
) -> np.ndarray:
    """Characteristic function at the points t * e^{i alpha}, t >= 0."""
    tmax = float(np.max(ts)) if len(ts) else 0.0
    if p_quad is None:
        p_quad = quad_prime_bound(mp, tmax)
    p_quad = min(p_quad, y)
    out = np.ones(len(ts), dtype=np.complex128)
    ca, sa = math.cos(alpha), math.sin(alpha)
    for p in table.primes[table.primes <= p_quad]:
        p = int(p)
        n = _local_nodes(mp, p, tmax)
        eta = local_on_circle(mp, p, n)
        proj = eta.real * ca + eta.imag * sa
        out *= np.exp(1j * np.outer(proj, ts)).mean(axis=0)
    s1 = second_moment_weights(mp, table, p_quad, y)
    out *= np.exp(-0.25 * ts**2 * s1)
    return out


def select_density_cutoff(mp: ModelPoint, tol: float) -> tuple[float, float, bool]:
    """Smallest ladder cutoff whose estimated truncation effect on the
    density is below tol; returns (cutoff, estimate, capped)."""
    big = cached_table(1e6)  # for the variance scale only
    v = model_variance(mp, big)
    for y in _TABLE_LADDER:
        est = 2.0 * second_moment_tail(mp, y) / v**2
        if est < tol:
            return float(y), est, False
    return float(_TABLE_LADDER[-1]), est, True


# ---------------------------------------------------------------------------
# 2D density grid


@dataclass
class DensityGrid:
    mp: ModelPoint
    extent: float
    step: float
    axis: np.ndarray  # shared x and y axis, length N (odd)
    raw_values: np.ndarray  # N x N, row = x index, col = y index, unclipped
    values: np.ndarray  # clipped at 0
    cutoff_y: float
    inversion_radius: float
    meta: dict = field(default_factory=dict)

    def cell_mass(self) -> np.ndarray:
        return self.values * self.step**2 / (2.0 * math.pi)

    def total_mass(self) -> float:
        return float(self.cell_mass().sum())

    def cdf_grid(self) -> tuple[np.ndarray, np.ndarray]:
        """Edges and the CDF on them: F[i, j] = mass in (-inf, edge_i] x (-inf, edge_j],
        treating each cell's mass as concentrated uniformly on the cell."""
        edges = np.concatenate(
            [[self.axis[0] - self.step / 2], self.axis + self.step / 2]
        )
        mass = self.cell_mass()
        cum = np.zeros((len(edges), len(edges)))
        cum[1:, 1:] = np.cumsum(np.cumsum(mass, axis=0), axis=1)
        return edges, cum

    def cdf_at(self, x: float, y: float) -> float:
        edges, cum = self._cached_cdf()
        return _bilinear(edges, cum, x, y)

    def _cached_cdf(self):
        if "cdf" not in self.meta:
            self.meta["cdf"] = self.cdf_grid()
        return self.meta["cdf"]


def _bilinear(edges, cum, x, y):
    n = len(edges)
    ix = np.clip(np.searchsorted(edges, x) - 1, 0, n - 2)
    iy = np.clip(np.searchsorted(edges, y) - 1, 0, n - 2)
    x0, x1 = edges[ix], edges[ix + 1]
    y0, y1 = edges[iy], edges[iy + 1]
    fx = np.clip((x - x0) / (x1 - x0), 0.0, 1.0)
    fy = np.clip((y - y0) / (y1 - y0), 0.0, 1.0)
    c00, c01 = cum[ix, iy], cum[ix, iy + 1]
    c10, c11 = cum[ix + 1, iy], cum[ix + 1, iy + 1]
    return (
        c00 * (1 - fx) * (1 - fy)
        + c01 * (1 - fx) * fy
        + c10 * fx * (1 - fy)
        + c11 * fx * fy
    )


def density_grid(
    mp: ModelPoint,
    extent: float = 4.0,
    step: float = 0.05,
    tol: float = 1e-4,
) -> DensityGrid:
    """Joint density of the limit law on a square grid, by inverse transform.

    The conjugate frequency grid has spacing 2 pi / (N * step) and radius
    ~pi/step; the grid is refined (step halved) if the characteristic
    function has not decayed below 1e-8 at that radius. Error budget: half
    of tol to the prime cutoff, half to frequency truncation.
    """
    if not (extent > 0 and step > 0 and extent / step >= 4):
        raise ParameterError("invalid grid geometry", extent=extent, step=step)
    if not (tol > 0):
        raise ParameterError("tol must be positive", tol=tol)
    _require_density_point(mp)

    y_cut, trunc_est, capped = select_density_cutoff(mp, tol / 2.0)
    table = cached_table(y_cut)

    h = float(step)
    for _refine in range(3):
        n_half = int(round(extent / h))
        n = 2 * n_half + 1
        axis = (np.arange(n) - n_half) * h
        dw = 2.0 * math.pi / (n * h)
        w_axis = (np.arange(n) - n_half) * dw
        rw = w_axis[-1]
        # formal frequency-truncation requirement plus an empirical edge check
        if math.exp(-(rw ** (1.0 / (2.0 * mp.sigma)))) >= tol / 2.0:
            h /= 2.0
            continue
        p_quad = min(quad_prime_bound(mp, float(w_axis[-1]) * math.sqrt(2.0)), y_cut)
        lam = _char_fn_grid(mp, w_axis, y_cut, table, p_quad)
        edge = max(
            float(np.abs(lam[0, :]).max()),
            float(np.abs(lam[-1, :]).max()),
            float(np.abs(lam[:, 0]).max()),
            float(np.abs(lam[:, -1]).max()),
        )
        if edge > 1e-8:
            h /= 2.0
            continue
        break
    else:
        raise NumericError("density grid refinement did not settle", extent=extent, step=step)

    phase = np.exp(-1j * np.outer(axis, w_axis))
    m_cplx = phase @ lam @ phase.T * (dw * dw / (2.0 * math.pi))
    imag_resid = float(np.abs(m_cplx.imag).max())
    if imag_resid > 1e-8:
        raise NumericError("inverse transform has a non-real residual", residual=imag_resid)
    raw = np.ascontiguousarray(m_cplx.real)

    total = float(raw.sum() * h * h / (2.0 * math.pi))
    if abs(total - 1.0) > 10.0 * tol:
        raise NumericError("density normalization out of budget", total=total, tol=tol)

    grid = DensityGrid(
        mp=mp,
        extent=float(n_half * h),
        step=h,
        axis=axis,
        raw_values=raw,
        values=np.maximum(raw, 0.0),
        cutoff_y=y_cut,
        inversion_radius=float(rw),
        meta={
            "tol": tol,
            "truncation_estimate": trunc_est,
            "truncation_capped": capped,
            "formal_truncation_bound": formal_truncation_bound(mp, float(rw), y_cut),
            "edge_charfn": edge,
            "imag_residual": imag_resid,
            "normalization": total,
            "min_raw": float(raw.min()),
            "quad_prime_bound": p_quad,
        },
    )
    return grid


def _require_density_point(mp: ModelPoint):
    # positivity regime of the limit law: m = 0 needs 1/2 < sigma < 1, m >= 1
    # allows sigma in [1/2, 1]; outside it the inversion is not supported
    if mp.m == 0:
        ok = 0.5 < mp.sigma < 1.0
    else:
        ok = 0.5 <= mp.sigma <= 1.0
    if not ok:
        raise ParameterError(
            "density requires 1/2 < sigma < 1 (m = 0) or 1/2 <= sigma <= 1 (m >= 1)",
            sigma=mp.sigma,
            m=mp.m,
        )


def _char_fn_grid(
    mp: ModelPoint, w_axis: np.ndarray, y: float, table, p_quad: float
) -> np.ndarray:
    """Characteristic function on the tensor grid w = u + i v, exploiting the
    mirror symmetry in v and per-prime separability of the phase."""
    n = len(w_axis)
    n_half = n // 2
    v_nonneg = w_axis[n_half:]
    wmax = float(abs(w_axis[-1])) * math.sqrt(2.0)

    lam_half = np.ones((n, len(v_nonneg)), dtype=np.complex128)
    for p in table.primes[table.primes <= p_quad]:
        p = int(p)
        nn = _local_nodes(mp, p, wmax)
        eta = local_on_circle(mp, p, nn)
        eu = np.exp(1j * np.outer(eta.real, w_axis))
        ev = np.exp(1j * np.outer(eta.imag, v_nonneg))
        lam_half *= (eu.T @ ev) / nn

    s1 = second_moment_weights(mp, table, p_quad, y)
    uu, vv = np.meshgrid(w_axis, v_nonneg, indexing="ij")
    lam_half *= np.exp(-0.25 * (uu**2 + vv**2) * s1)

    lam = np.empty((n, n), dtype=np.complex128)
    lam[:, n_half:] = lam_half
    lam[:, :n_half] = lam_half[:, 1:][:, ::-1]  # Lambda(u - iv) = Lambda(u + iv)
    return lam


# ---------------------------------------------------------------------------
# 1D marginal density


@dataclass
class MarginalDensity:
    mp: ModelPoint
    alpha: float
    xs: np.ndarray
    values: np.ndarray
    cutoff_y: float
    t_radius: float
    meta: dict = field(default_factory=dict)

    def cdf(self) -> np.ndarray:
        """CDF on xs via trapezoid in the |dx| = dx/sqrt(2 pi) normalization."""
        dx = np.diff(self.xs)
        inc = 0.5 * (self.values[1:] + self.values[:-1]) * dx / math.sqrt(2.0 * math.pi)
        return np.concatenate([[0.0], np.cumsum(inc)])

    def tail_beyond(self, tau: float) -> float:
        """Mass of (tau, xs[-1]] by trapezoid; xs must extend past tau."""
        if tau < self.xs[0] or tau > self.xs[-1]:
            raise ParameterError("tau outside tabulated range", tau=tau)
        cdf = self.cdf()
        total = cdf[-1]
        at = float(np.interp(tau, self.xs, cdf))
        return float(total - at)


def marginal_density(
    mp: ModelPoint,
    xs: np.ndarray | None = None,
    tol: float = 1e-4,
) -> MarginalDensity:
    """Density of the projection Re e^{-i alpha} (limit sum) on the points xs,
    with alpha taken from the model point.

    One-dimensional inverse transform of the characteristic function along
    the ray t e^{i alpha}, in the dx/sqrt(2 pi) normalization.
    """
    a = mp.alpha
    _require_density_point(mp)
    y_cut, trunc_est, capped = select_density_cutoff(mp, tol / 2.0)
    table = cached_table(y_cut)
    std = math.sqrt(model_variance(mp, table) / 2.0)
    if xs is None:
        lim = max(8.0 * std, 4.0)
        xs = np.linspace(-lim, lim, 801)
    else:
        xs = np.asarray(xs, dtype=np.float64)
        if xs.ndim != 1 or len(xs) < 2 or np.any(np.diff(xs) <= 0):
            raise ParameterError("xs must be strictly increasing, length >= 2")

    span = max(float(np.max(np.abs(xs))), 1.0) + 12.0 * std + 2.0
    dt = math.pi / span
    rt = max((math.log(max(1.0 / tol, 10.0))) ** (2.0 * mp.sigma) * 1.5, 25.0 / max(std, 0.25))
    nt = int(math.ceil(rt / dt)) + 1
    ts = np.arange(nt) * dt

    lam = _char_fn_ray(mp, a, ts, y_cut, table)
    # trapezoid over the full line using Lambda(-t e^{i a}) = conj Lambda(t e^{i a})
    weights = np.full(nt, dt)
    weights[0] = 0.5 * dt
    phase = np.exp(-1j * np.outer(xs, ts))
    vals = 2.0 * (phase @ (weights * lam)).real / math.sqrt(2.0 * math.pi)

    return MarginalDensity(
        mp=mp,
        alpha=a,
        xs=xs,
        values=vals,
        cutoff_y=y_cut,
        t_radius=float(ts[-1]),
        meta={
            "tol": tol,
            "truncation_estimate": trunc_est,
            "truncation_capped": capped,
            "t_step": dt,
            "model_std": std,
            "edge_charfn": float(abs(lam[-1])),
        },
    )
