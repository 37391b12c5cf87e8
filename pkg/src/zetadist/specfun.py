"""Special functions for the value-distribution pipeline.

Polylogarithms on the closed unit disk, the modified Bessel function I0 and
its continuous logarithm on the sector {Re z >= 0, |Im z| <= Re z}, the
projected angle profile of a single local factor together with its critical
points, and the Beurling-Selberg smoothing kernels.

All series arguments in the model satisfy |z| <= 1/sqrt(2), so direct series
with hard term cutoffs are the default evaluation strategy; quadrature takes
over only where series lose ground (large Bessel arguments).
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import NumericError, ParameterError

TWO_PI = 2.0 * math.pi
SQRT_HALF = math.sqrt(0.5)

_SERIES_REL_CUTOFF = 1e-16
_POLYLOG_MAX_TERMS = 50_000_000
_BESSEL_SERIES_RADIUS = 30.0


# ---------------------------------------------------------------------------
# polylogarithm


def polylog(order: int, z: complex) -> complex:
    """Li_order(z) for integer order >= -2 on the closed unit disk.

    Arguments with |z| = 1 are accepted only for order >= 2 (where the
    defining series still converges); otherwise |z| must stay strictly
    inside the disk by at least 1e-9.
    """
    order = _check_order(order)
    z = complex(z)
    az = abs(z)
    if order >= 2:
        if az > 1.0 + 1e-15:
            raise ParameterError("polylog argument outside closed unit disk", z=str(z))
    elif az > 1.0 - 1e-9:
        raise ParameterError(
            "polylog argument too close to the unit circle for this order",
            z=str(z),
            order=order,
        )

    if az == 0.0:
        return 0.0 + 0.0j
    if order <= 1:
        # closed forms, exact for the whole open disk
        if order == 1:
            return -_log1p_cx(-z)
        u = 1.0 - z
        if order == 0:
            return z / u
        if order == -1:
            return z / (u * u)
        return z * (1.0 + z) / (u * u * u)

    # direct series in blocks; cutoff once a term drops below the running sum
    total = 0.0 + 0.0j
    k0 = 1
    block = 4096
    while k0 <= _POLYLOG_MAX_TERMS:
        ks = np.arange(k0, k0 + block, dtype=np.float64)
        terms = z**ks / ks**order
        total += terms.sum()
        if abs(terms[-1]) < _SERIES_REL_CUTOFF * abs(total):
            return complex(total)
        k0 += block
        block = min(2 * block, 1 << 20)
    raise NumericError("polylog series did not converge", z=str(z), order=order)


def _check_order(order) -> int:
    if not isinstance(order, (int, np.integer)):
        raise ParameterError("polylog order must be an integer", order=repr(order))
    if order < -2:
        raise ParameterError("polylog order must be >= -2", order=int(order))
    return int(order)


def _log1p_cx(w: complex) -> complex:
    if abs(w) < 1e-4:
        return w * (1.0 + w * (-0.5 + w * (1.0 / 3.0 + w * (-0.25 + w / 5.0))))
    return np.log(1.0 + w)


def local_term(sigma: float, m: int, p: int, w: complex) -> complex:
    """One local factor of the iterated-integral sum: Li_{m+1}(p^-sigma w) / (log p)^m."""
    r = float(p) ** (-float(sigma))
    val = polylog(m + 1, r * w)
    if m:
        val /= math.log(p) ** m
    return val


# ---------------------------------------------------------------------------
# modified Bessel I0 and its continuous log on the sector


def bessel_i0(z: complex) -> complex:
    """I0(z) for Re z >= 0, via series below |z|=30 and scaled quadrature above."""
    z = complex(z)
    if z.real < -1e-12 * max(1.0, abs(z)):
        raise ParameterError("bessel_i0 requires Re z >= 0", z=str(z))
    if abs(z) <= _BESSEL_SERIES_RADIUS:
        return _i0_series(z)
    return np.exp(z) * _i0_scaled_quadrature(z)


def _i0_series(z: complex) -> complex:
    q = 0.25 * z * z
    term = 1.0 + 0.0j
    total = 1.0 + 0.0j
    for n in range(1, 400):
        term *= q / (n * n)
        total += term
        if abs(term) < 1e-17 * abs(total):
            return total
    raise NumericError("bessel series did not converge", z=str(z))


def _i0_scaled_quadrature(z: complex) -> complex:
    # (1/2pi) * int exp(z(cos t - 1)) dt; integrand magnitude <= 1 on Re z >= 0,
    # periodic trapezoid doubles nodes until stable
    n = 256
    prev = None
    while n <= (1 << 20):
        t = np.linspace(0.0, TWO_PI, n, endpoint=False)
        val = np.exp(z * (np.cos(t) - 1.0)).mean()
        if prev is not None and abs(val - prev) <= 1e-12 * max(abs(val), 1e-300):
            return complex(val)
        prev = val
        n *= 2
    raise NumericError("scaled bessel quadrature did not stabilize", z=str(z))


def log_i0(z: complex) -> complex:
    """Continuous branch of log I0 on the sector |Im z| <= Re z, real on [0, inf).

    Small arguments go through log(1 + E(z) z^2) with the explicit E series;
    larger ones through z + Log(e^-z I0(z)), whose argument stays principal
    on the sector.
    """
    z = complex(z)
    az = abs(z)
    if z.real < -1e-12 * max(1.0, az) or abs(z.imag) > z.real + 1e-9 * max(1.0, az):
        raise ParameterError("log_i0 argument outside sector |Im z| <= Re z", z=str(z))
    if az == 0.0:
        return 0.0 + 0.0j
    if az <= 1.0:
        return _log1p_cx(_bessel_e(z) * z * z)
    if az <= _BESSEL_SERIES_RADIUS:
        scaled = _i0_series(z) * np.exp(-z)
    else:
        scaled = _i0_scaled_quadrature(z)
    return z + np.log(scaled)


def _bessel_e(z: complex) -> complex:
    # E(z) = (I0(z) - 1)/z^2 = sum_{n>=1} z^(2n-2) / (4^n (n!)^2)
    q = z * z
    term = 0.25 + 0.0j
    total = 0.25 + 0.0j
    for n in range(2, 60):
        term *= q / (4.0 * n * n)
        total += term
        if abs(term) < 1e-18 * abs(total):
            break
    return total


# ---------------------------------------------------------------------------
# angle profile of one local factor and its critical points


def angle_profile(r: float, theta, m: int, alpha: float, deriv: int = 0):
    """d^deriv/dtheta^deriv of sum_k r^k cos(k theta - alpha) / k^(m+1).

    Differentiation shifts the order and the phase: each derivative in theta
    multiplies term k by k and advances the cosine phase by pi/2.
    Accepts scalar or array theta; absolute accuracy ~1e-12 for r <= 1/sqrt(2).
    """
    r = float(r)
    if not (0.0 < r <= SQRT_HALF + 1e-12):
        raise ParameterError("angle_profile requires 0 < r <= 1/sqrt(2)", r=r)
    if not isinstance(deriv, (int, np.integer)) or deriv < 0:
        raise ParameterError("deriv must be a nonnegative integer", deriv=repr(deriv))
    theta_arr = np.asarray(theta, dtype=np.float64)
    scalar = theta_arr.ndim == 0
    th = np.atleast_1d(theta_arr)

    total = np.zeros_like(th)
    phase0 = -float(alpha) + deriv * (math.pi / 2.0)
    q = deriv - m - 1
    # with q > 0 the terms r^k k^q peak near k = q/log(1/r) before decaying
    k_min = 10 + 3 * max(q, 0)
    coeff = r
    for k in range(1, 2000):
        c = coeff * float(k) ** q
        if abs(c) < 1e-18 and k > k_min:
            break
        total += c * np.cos(k * th + phase0)
        coeff *= r
    else:
        raise NumericError("angle_profile series did not terminate", r=r, m=m, deriv=deriv)
    return float(total[0]) if scalar else total


def angle_profile_extrema(r: float, m: int, alpha: float) -> tuple[float, float]:
    """The two critical points of the angle profile over one period.

    Returns (theta1, theta2): theta1 in [0, 2pi) is the maximizer (second
    derivative negative), theta2 in (theta1, theta1 + 2pi) the minimizer.
    The derivative is scanned on a uniform grid and each sign change is
    bisected; the grid doubles if the count is not exactly two.
    """
    n = 720
    while n <= 92_160:
        roots = _scan_roots(r, m, alpha, n)
        if len(roots) == 2:
            curv = [angle_profile(r, t, m, alpha, deriv=2) for t in roots]
            if curv[0] < 0.0 < curv[1]:
                t1, t2 = roots[0], roots[1]
            elif curv[1] < 0.0 < curv[0]:
                t1, t2 = roots[1], roots[0]
            else:
                n *= 2
                continue
            t1 %= TWO_PI
            if TWO_PI - t1 < 1e-10:  # critical point at the period seam
                t1 = 0.0
            t2 %= TWO_PI
            if t2 <= t1:
                t2 += TWO_PI
            return t1, t2
        n *= 2
    raise NumericError(
        "angle profile does not show exactly two critical points at maximal resolution",
        r=r,
        m=m,
        alpha=alpha,
    )


def _scan_roots(r: float, m: int, alpha: float, n: int) -> list[float]:
    grid = np.linspace(0.0, TWO_PI, n, endpoint=False)
    vals = angle_profile(r, grid, m, alpha, deriv=1)
    roots = []
    for i in range(n):
        a, b = grid[i], grid[i] + TWO_PI / n
        fa, fb = vals[i], vals[(i + 1) % n]
        if fa == 0.0:
            roots.append(float(a))
        elif fa * fb < 0.0:
            roots.append(_bisect_deriv(r, m, alpha, a, b, fa))
    return roots


def _bisect_deriv(r, m, alpha, a, b, fa, tol=1e-12):
    while b - a > tol:
        mid = 0.5 * (a + b)
        fm = angle_profile(r, mid, m, alpha, deriv=1)
        if fm == 0.0:
            return mid
        if fa * fm < 0.0:
            b = mid
        else:
            a, fa = mid, fm
    return 0.5 * (a + b)


# ---------------------------------------------------------------------------
# Beurling-Selberg smoothing kernels


def vaaler_weight(u):
    """G(u) = 2u/pi + 2(1-u)u/tan(pi u) on [0,1]; G(0+)=2/pi, G(1-)=0.

    Within 1e-4 of either endpoint the cotangent is replaced by its series,
    which keeps the cancellation at u=1 exact.
    """
    u_arr = np.asarray(u, dtype=np.float64)
    scalar = u_arr.ndim == 0
    x = np.atleast_1d(u_arr)
    if np.any((x < -1e-15) | (x > 1.0 + 1e-15)):
        raise ParameterError("vaaler_weight domain is [0, 1]", u=float(np.min(x)))
    x = np.clip(x, 0.0, 1.0)
    out = np.empty_like(x)

    lo = x <= 1e-4
    hi = x >= 1.0 - 1e-4
    mid = ~(lo | hi)
    # cot(pi u) = 1/(pi u) - pi u/3 - (pi u)^3/45 - ...
    xl = x[lo]
    out[lo] = 2.0 * xl / math.pi + 2.0 * (1.0 - xl) * (
        1.0 / math.pi - (math.pi / 3.0) * xl**2 - (math.pi**3 / 45.0) * xl**4
    )
    v = 1.0 - x[hi]
    out[hi] = 2.0 * x[hi] * ((math.pi / 3.0) * v**2 + (math.pi**3 / 45.0) * v**4)
    xm = x[mid]
    out[mid] = 2.0 * xm / math.pi + 2.0 * (1.0 - xm) * xm / np.tan(math.pi * xm)
    return float(out[0]) if scalar else out


def sinc_sq_kernel(x):
    """K(x) = (sin(pi x)/(pi x))^2 with K(0) = 1."""
    return np.sinc(x) ** 2


def bs_f(u, c: float, d: float):
    """f_{c,d}(u) = (e^{-2 pi i u c} - e^{-2 pi i u d}) / 2."""
    u = np.asarray(u, dtype=np.float64)
    return 0.5 * (np.exp(-2j * math.pi * u * c) - np.exp(-2j * math.pi * u * d))


@lru_cache(maxsize=8)
def _gl_nodes(npts: int):
    x, w = np.polynomial.legendre.leggauss(npts)
    return x, w


def _indicator_quad_nodes(L: float, fmax: float, refine: int):
    panels = max(8, int(math.ceil(L * (1.0 + fmax)))) * refine
    x16, w16 = _gl_nodes(16)
    edges = np.linspace(0.0, L, panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x16[None, :]).ravel()
    weights = (half[:, None] * w16[None, :]).ravel()
    return nodes, weights


def smoothed_indicator(x, c: float, d: float, L: float, check: bool = True):
    """Band-limited indicator of (c, d): the one-sided Fourier average with
    the Vaaler weight, accurate to the two squared-sinc kernel terms at the
    endpoints.

    Vectorized in x via composite Gauss-Legendre panels sized to the fastest
    oscillation present; with check=True the panel count is doubled once and
    the two results must agree to 1e-8.
    """
    if not (d > c):
        raise ParameterError("smoothed indicator requires c < d", c=c, d=d)
    if not (L > 0):
        raise ParameterError("smoothed indicator requires L > 0", L=L)
    x_arr = np.asarray(x, dtype=np.float64)
    scalar = x_arr.ndim == 0
    xs = np.atleast_1d(x_arr)
    fmax = float(np.max(np.maximum(np.abs(xs - c), np.abs(xs - d)))) if xs.size else 1.0

    val = _smoothed_indicator_eval(xs, c, d, L, fmax, refine=1)
    if check:
        val2 = _smoothed_indicator_eval(xs, c, d, L, fmax, refine=2)
        err = float(np.max(np.abs(val - val2))) if xs.size else 0.0
        if err > 1e-8:
            raise NumericError(
                "smoothed indicator quadrature did not converge",
                max_discrepancy=err,
                L=L,
            )
        val = val2
    return float(val[0]) if scalar else val


def _smoothed_indicator_eval(xs, c, d, L, fmax, refine):
    u, w = _indicator_quad_nodes(L, fmax, refine)
    g = vaaler_weight(u / L)
    # f_{c,d}(u)/u is continuous at 0+ (limit pi i (d - c)); nodes never hit 0
    coef = w * g * bs_f(u, c, d) / u
    phase = np.exp(2j * math.pi * np.outer(xs, u))
    return (phase @ coef).imag


def smoothed_rect_indicator(x, y, rect, L: float, check: bool = True):
    """Product of the two axis indicators for rect = (c1, d1, c2, d2).

    Identical to the double-integral smoothing of the rectangle indicator:
    Im(A) Im(B) = Re(A conj(B) - A B)/2 turns the product into that form.
    """
    c1, d1, c2, d2 = rect
    return smoothed_indicator(x, c1, d1, L, check=check) * smoothed_indicator(
        y, c2, d2, L, check=check
    )
