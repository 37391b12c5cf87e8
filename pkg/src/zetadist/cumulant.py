"""Large-deviation machinery for the projected limit law.

Everything here concerns the scalar variable obtained by projecting the
limit sum onto the direction e^{i alpha}: per-prime moment generating
functions, the cumulant generating function and its first two
derivatives, the saddle-point solver, the resulting tail approximation,
the exponentially tilted density, and the explicit constants built from
Mellin-type integrals of log I0.

Conventions. kappa denotes the (real) tilt; f, f1, f2 are the cumulant
generating function of the projection and its first two kappa
derivatives, each a sum over primes of exact circle averages plus a
controlled tail. All sums factor out the peak exponent before
exponentiating, so the pipeline is stable up to kappa ~ 1e5 and beyond.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate as sp_integrate
from scipy import special as sp_special
from scipy.optimize import brentq

from .charfun import cached_table, second_moment_tail, second_moment_weights
from .errors import CapacityError, NumericError, ParameterError
from .model import ModelPoint
from .primes import TABLE_LIMIT
from .specfun import angle_profile, angle_profile_extrema

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# log I0 and derivatives, stable on [0, inf)


def _bessel_exponent(x: np.ndarray) -> np.ndarray:
    """g(x) = log I0(x) for real x >= 0."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    small = x < 0.05
    xs = x[small]
    out[small] = xs**2 / 4.0 - xs**4 / 64.0 + xs**6 / 576.0
    xl = x[~small]
    out[~small] = xl + np.log(sp_special.i0e(xl))
    return out


def _bessel_exponent_d1(x: np.ndarray) -> np.ndarray:
    """g'(x) = I1(x)/I0(x)."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    small = x < 0.05
    xs = x[small]
    out[small] = xs / 2.0 - xs**3 / 16.0 + xs**5 / 96.0
    xl = x[~small]
    out[~small] = sp_special.i1e(xl) / sp_special.i0e(xl)
    return out


def _bessel_exponent_d2(x: np.ndarray) -> np.ndarray:
    """g''(x) = 1 - g'(x)/x - g'(x)^2."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    small = x < 0.05
    xs = x[small]
    out[small] = 0.5 - 3.0 * xs**2 / 16.0 + 5.0 * xs**4 / 96.0
    xl = x[~small]
    d1 = sp_special.i1e(xl) / sp_special.i0e(xl)
    out[~small] = 1.0 - d1 / xl - d1**2
    return out


# ---------------------------------------------------------------------------
# Mellin-type integrals g_n and the explicit constants


@dataclass
class GnTable:
    sigma: float
    values: np.ndarray  # g_n for n = 0..n_max
    g0_alias_G: float
    g1_direct: float
    meta: dict = field(default_factory=dict)


def _quad(fun, a, b, **kw) -> float:
    val, err = sp_integrate.quad(fun, a, b, epsabs=1e-13, epsrel=1e-12, limit=300, **kw)
    if not math.isfinite(val) or err > 1e-8 * max(1.0, abs(val)):
        raise NumericError("quadrature did not converge", interval=(a, b), estimate=err)
    return val


def gn_quadrature(sigma: float, n_max: int = 4) -> GnTable:
    """Weighted integrals g_n of the derivatives of log I0.

    g_0 = int_0^inf log I0(u) u^{-1-1/sigma} du by split quadrature
    (series near 0, Bessel ratio in the bulk, asymptotic expansion as a
    closed-form tail); g_n for n >= 1 via the reduction
    g_n = g_0 * prod_{j<n} (1/sigma - j). g_1 is also integrated
    directly as an internal cross-check and kept on the table.
    """
    if not (0.5 < sigma < 1.0):
        raise ParameterError("gn quadrature needs 1/2 < sigma < 1", sigma=sigma)
    if n_max < 0:
        raise ParameterError("n_max must be nonnegative", n_max=n_max)
    inv = 1.0 / sigma

    # piece [0,1] with the u^{1-1/sigma} endpoint weight taken analytically
    def phi0(u):
        if u < 0.05:
            return 0.25 - u**2 / 64.0 + u**4 / 576.0
        return (u + math.log(sp_special.i0e(u))) / u**2

    g0 = _quad(phi0, 0.0, 1.0, weight="alg", wvar=(1.0 - inv, 0.0))
    g0 += _quad(lambda u: (u + math.log(sp_special.i0e(u))) * u ** (-1.0 - inv), 1.0, 50.0)
    # tail via log I0(u) = u - log(2 pi u)/2 + (1/8)/u + (1/16)/u^2 + (25/384)/u^3 + O(u^-4)
    U = 50.0
    g0 += U ** (1.0 - inv) / (inv - 1.0)
    g0 += -0.5 * sigma * U ** (-inv) * (math.log(2.0 * math.pi) + math.log(U) + sigma)
    for j, bj in ((1, 1.0 / 8.0), (2, 1.0 / 16.0), (3, 25.0 / 384.0)):
        g0 += bj * U ** (-j - inv) / (j + inv)

    # direct g_1 = int_0^inf g'(u) u^{-1/sigma} du, independent route
    def phi1(u):
        if u < 0.05:
            return 0.5 - u**2 / 16.0 + u**4 / 96.0
        return sp_special.i1e(u) / sp_special.i0e(u) / u

    g1 = _quad(phi1, 0.0, 1.0, weight="alg", wvar=(1.0 - inv, 0.0))
    g1 += _quad(
        lambda u: sp_special.i1e(u) / sp_special.i0e(u) * u ** (-inv), 1.0, 400.0
    )
    # tail via I1/I0 = 1 - 1/(2u) - 1/(8u^2) - 1/(8u^3) + O(u^-4)
    V = 400.0
    g1 += V ** (1.0 - inv) / (inv - 1.0)
    g1 += -0.5 * sigma * V ** (-inv)
    g1 += -(1.0 / 8.0) * V ** (-1.0 - inv) / (1.0 + inv)
    g1 += -(1.0 / 8.0) * V ** (-2.0 - inv) / (2.0 + inv)

    factors = np.ones(n_max + 1)
    for n in range(1, n_max + 1):
        factors[n] = factors[n - 1] * (inv - (n - 1))
    values = g0 * factors
    return GnTable(
        sigma=sigma,
        values=values,
        g0_alias_G=g0,
        g1_direct=g1,
        meta={"g1_identity_residual": abs(g1 * sigma / g0 - 1.0)},
    )


_gn_cache: dict = {}


def _gn(sigma: float) -> GnTable:
    if sigma not in _gn_cache:
        _gn_cache[sigma] = gn_quadrature(sigma, n_max=4)
    return _gn_cache[sigma]


def tail_shape_constant(sigma: float, m: int) -> float:
    """Constant in front of tau^{1/(1-sigma)} (log tau)^{(m+sigma)/(1-sigma)}
    in the exponent of the asymptotic tail."""
    g1 = _gn(sigma).values[1]
    base = sigma / ((1.0 - sigma) ** ((m - 1) / sigma + 2.0) * g1)
    return base ** (sigma / (1.0 - sigma))


def tail_shape_constant_direct(sigma: float) -> float:
    """The m = 0 tail constant in its historical normalization, computed
    straight from the log I0 Mellin integral; equals tail_shape_constant
    (sigma, 0) by the g_1 = g_0/sigma reduction."""
    G = _gn(sigma).g0_alias_G
    base = sigma ** (2.0 * sigma) / ((1.0 - sigma) ** (2.0 * sigma - 1.0) * G**sigma)
    return base ** (1.0 / (1.0 - sigma))


def saddle_scale_constant(sigma: float, m: int) -> float:
    """Constant of the asymptotic saddle location kappa(tau)."""
    g1 = _gn(sigma).values[1]
    base = sigma / ((1.0 - sigma) ** (m / sigma + 1.0) * g1)
    return base ** (sigma / (1.0 - sigma))


# ---------------------------------------------------------------------------
# per-prime moment generating functions


def _mgf_nodes(s_abs: float, r: float) -> int:
    n = max(64, 8 * math.ceil(math.sqrt(max(s_abs * r, 1.0))))
    p2 = 64
    while p2 < n:
        p2 *= 2
    return min(p2, 1 << 15)


def mgf_local(mp: ModelPoint, p: int, s: complex, log: bool = False) -> complex:
    """Circle average of exp(s * projected local term) at one prime.

    Periodic trapezoid with the node count scaled like sqrt(|s| p^-sigma)
    to resolve the exponential peak; always evaluated with the peak
    exponent factored out, so only the final exponentiation can overflow.
    With log=True the (principal-branch) logarithm is returned instead.
    """
    s = complex(s)
    r = float(p) ** (-mp.sigma)
    n = _mgf_nodes(abs(s), r)
    theta = np.arange(n) * (TWO_PI / n)
    lam = angle_profile(r, theta, mp.m, mp.alpha)
    if mp.m:
        lam = lam / math.log(p) ** mp.m
    e = s * lam
    peak = float(e.real.max())
    val = np.exp(e - peak).mean()
    if log:
        return peak + complex(np.log(val))
    # |s| p^-sigma > 500 would overflow a direct sum; the peak-factored form
    # above already is the log-scale route, only the final exp can saturate
    return complex(np.exp(peak + np.log(val)))


def mgf_local_saddle(mp: ModelPoint, p: int, s: complex, log: bool = False) -> complex:
    """Saddle-point (Laplace) approximation of mgf_local, anchored at the
    maximizer of the projected angle profile.

    Valid for p^sigma (log p)^m <= kappa (log kappa)^{-3} with
    kappa = Re s; outside that a parameter error is raised and the caller
    should fall back to mgf_local.
    """
    s = complex(s)
    kappa = s.real
    if not (kappa > 1.0 and abs(s.imag) <= kappa):
        raise ParameterError("saddle form needs Re s > 1 and |Im s| <= Re s", s=str(s))
    lg = math.log(p)
    if float(p) ** mp.sigma * lg**mp.m > kappa / math.log(kappa) ** 3:
        raise ParameterError(
            "saddle form outside its validity range",
            p=p,
            kappa=kappa,
            bound=kappa / math.log(kappa) ** 3,
        )
    r = float(p) ** (-mp.sigma)
    th1, _ = angle_profile_extrema(r, mp.m, mp.alpha)
    lam1 = float(angle_profile(r, np.array([th1]), mp.m, mp.alpha)[0])
    curv = float(angle_profile(r, np.array([th1]), mp.m, mp.alpha, deriv=2)[0])
    lgm = lg**mp.m
    log_val = s * (lam1 / lgm) + 0.5 * (np.log(lgm) - np.log(TWO_PI * s * abs(curv)))
    if log:
        return complex(log_val)
    return complex(np.exp(log_val))


# ---------------------------------------------------------------------------
# the cumulant generating function and derivatives


def _prime_cutoff(mp: ModelPoint, kappa: float, tol: float) -> float:
    """Smallest y with kappa * sum_{p>y} p^{-2 sigma} (log p)^{-2m} < tol,
    by the integral estimate; capacity error beyond the prime table."""
    if kappa * second_moment_tail(mp, TABLE_LIMIT) >= tol:
        raise CapacityError(
            "cumulant cutoff exceeds the prime table",
            kappa=kappa,
            tol=tol,
            bound_at_limit=kappa * second_moment_tail(mp, TABLE_LIMIT),
        )
    lo, hi = 8.0, float(TABLE_LIMIT)
    while hi / lo > 1.001:
        mid = math.sqrt(lo * hi)
        if kappa * second_moment_tail(mp, mid) < tol:
            hi = mid
        else:
            lo = mid
    return hi


def _band_sums(mp: ModelPoint, primes: np.ndarray, kappa: float, nodes: int):
    """Vectorized log F_p, tilted mean, tilted variance over a prime band
    sharing one theta grid."""
    theta = np.arange(nodes) * (TWO_PI / nodes)
    r = primes ** (-mp.sigma)
    lgm = np.log(primes) ** mp.m if mp.m else np.ones_like(r)
    k_terms = []
    rk = np.ones_like(r)
    for k in range(1, 60):
        rk = rk * r
        coef = rk / (float(k) ** (mp.m + 1) * lgm)
        if float(coef.max()) * kappa < 1e-15 and k > 2:
            break
        k_terms.append((k, coef))
    lam = np.zeros((len(primes), nodes))
    for k, coef in k_terms:
        lam += coef[:, None] * np.cos(k * theta - mp.alpha)[None, :]
    e = kappa * lam
    peak = e.max(axis=1, keepdims=True)
    w = np.exp(e - peak)
    z = w.mean(axis=1)
    f = (peak[:, 0] + np.log(z)).sum()
    mu = (lam * w).mean(axis=1) / z
    f1 = mu.sum()
    f2 = ((lam**2 * w).mean(axis=1) / z - mu**2).sum()
    return f, f1, f2


def _tail_beyond(mp: ModelPoint, kappa: float, y_from: float):
    """Contribution of all primes beyond y_from, as continuum integrals of
    the Bessel-exponent family against the prime density dt/log t. Where
    the argument is small this reduces to the Gaussian (quadratic) term;
    the full form keeps it valid when kappa t^{-sigma} is still large at
    y_from."""

    def u_of(t):
        return t ** (-mp.sigma) / math.log(t) ** mp.m

    # crossover below which the quadratic form of g is accurate to ~1e-6
    t_gauss = y_from
    while kappa * u_of(t_gauss) > 0.05 and t_gauss < 1e300:
        t_gauss *= 2.0
    f = f1 = f2 = 0.0
    if t_gauss > y_from:
        x0, x1 = math.log(y_from), math.log(t_gauss)

        def ig_f(x):
            u = math.exp(-mp.sigma * x) / x**mp.m
            return float(_bessel_exponent(np.array([kappa * u]))[0]) * math.exp(x) / x

        def ig_f1(x):
            u = math.exp(-mp.sigma * x) / x**mp.m
            return float(_bessel_exponent_d1(np.array([kappa * u]))[0]) * u * math.exp(x) / x

        def ig_f2(x):
            u = math.exp(-mp.sigma * x) / x**mp.m
            return float(_bessel_exponent_d2(np.array([kappa * u]))[0]) * u**2 * math.exp(x) / x

        f = _quad(ig_f, x0, x1)
        f1 = _quad(ig_f1, x0, x1)
        f2 = _quad(ig_f2, x0, x1)
    t2 = second_moment_tail(mp, t_gauss)
    f += kappa**2 / 4.0 * t2
    f1 += kappa / 2.0 * t2
    f2 += 0.5 * t2
    return f, f1, f2


def _cumulant_full(mp: ModelPoint, kappa: float, tol: float):
    if not (kappa > 0):
        raise ParameterError("kappa must be positive", kappa=kappa)
    if not (tol > 0):
        raise ParameterError("tol must be positive", tol=tol)
    y_rule = _prime_cutoff(mp, kappa, tol)
    # exact second-moment sums are cheap out to 1e6, and pushing the
    # integral estimate out that far removes most of its prime-density error
    table = cached_table(max(y_rule, 1e6))
    primes = table.primes[table.primes <= y_rule]

    # small primes need peak-resolving node counts; the wide band beyond
    # p ~ (kappa/64)^{1/sigma} is flat enough for the 64-node floor
    band_lo = (max(kappa, 1.0) / 64.0) ** (1.0 / mp.sigma)
    f = f1 = f2 = 0.0
    for p in primes[primes <= band_lo]:
        p = int(p)
        r = float(p) ** (-mp.sigma)
        nodes = _mgf_nodes(kappa, r)
        fp, fp1, fp2 = _band_sums(mp, np.array([float(p)]), kappa, nodes)
        f, f1, f2 = f + fp, f1 + fp1, f2 + fp2
    wide = primes[primes > band_lo].astype(np.float64)
    for lo in range(0, len(wide), 100_000):
        fp, fp1, fp2 = _band_sums(mp, wide[lo : lo + 100_000], kappa, 64)
        f, f1, f2 = f + fp, f1 + fp1, f2 + fp2

    # exact sums continue to the end of the cached table, then integrals
    y_exact = table.cutoff_y
    mid = second_moment_weights(mp, table, y_rule, y_exact)
    tail_f = kappa**2 / 4.0 * mid
    tail_f1 = kappa / 2.0 * mid
    tail_f2 = 0.5 * mid
    if kappa * y_rule ** (-mp.sigma) > 0.05:
        # the quadratic form is not yet accurate at y_rule: redo the whole
        # beyond-y_rule range with the full Bessel exponent instead
        tail_f, tail_f1, tail_f2 = _tail_beyond(mp, kappa, y_rule)
    else:
        bf, bf1, bf2 = _tail_beyond(mp, kappa, y_exact)
        tail_f, tail_f1, tail_f2 = tail_f + bf, tail_f1 + bf1, tail_f2 + bf2

    detail = {
        "cutoff_y": y_rule,
        "tail_f": tail_f,
        "tail_f2": tail_f2,
        "f_error_bound": kappa * second_moment_tail(mp, y_rule),
    }
    return f + tail_f, f1 + tail_f1, f2 + tail_f2, detail


def cumulant(mp: ModelPoint, kappa: float, tol: float) -> tuple[float, float, float]:
    """(f, f', f'') of the projected limit sum at tilt kappa.

    Per-prime circle quadrature up to the cutoff where the tilted
    contribution bound kappa p^{-2 sigma} (log p)^{-2m} summed beyond it
    falls under tol; the remainder enters through exact second-moment
    sums to the end of the prime table plus continuum integrals beyond,
    reducing to the usual Gaussian correction when the tilt is locally
    small. The achieved bound is the dominant error estimate on f.
    """
    f, f1, f2, _ = _cumulant_full(mp, kappa, tol)
    return f, f1, f2


def cumulant_asymptotic(
    mp: ModelPoint, n: int, kappa: float, kappa_floor: float = 1e3
) -> float:
    """Main asymptotic term of the n-th kappa-derivative of f:
    sigma^{m/sigma} g_n kappa^{1/sigma - n} / (log kappa)^{m/sigma + 1}."""
    if not (0.5 < mp.sigma < 1.0):
        raise ParameterError("asymptotic form needs 1/2 < sigma < 1", sigma=mp.sigma)
    if n < 0:
        raise ParameterError("derivative order must be nonnegative", n=n)
    if kappa < kappa_floor:
        raise ParameterError(
            "kappa below the asymptotic floor", kappa=kappa, floor=kappa_floor
        )
    gn = _gn(mp.sigma).values
    if n >= len(gn):
        gn = gn_quadrature(mp.sigma, n_max=n).values
    lk = math.log(kappa)
    return (
        mp.sigma ** (mp.m / mp.sigma)
        * gn[n]
        * kappa ** (1.0 / mp.sigma - n)
        / lk ** (mp.m / mp.sigma + 1.0)
    )


# ---------------------------------------------------------------------------
# saddle point, tails, tilting


@dataclass
class SaddleResult:
    tau: float
    kappa: float
    f: float
    f1: float
    f2: float
    tail_main: float
    error_scale: float
    cutoff_y: float
    meta: dict = field(default_factory=dict)


def _cumulant_tol_for(mp: ModelPoint, tau: float, kappa_guess: float) -> float:
    """Absolute f budget for saddle work: 1% of the scale max(1, tau), but
    never tighter than the prime table can certify at this tilt."""
    floor = 2.0 * kappa_guess * second_moment_tail(mp, TABLE_LIMIT / 2.0)
    return max(0.01 * max(1.0, abs(tau)), floor)


def solve_saddle(mp: ModelPoint, tau: float, tol: float = 1e-8) -> SaddleResult:
    """Unique kappa with f'(kappa) = tau, by bracketed root finding.

    The bracket seed is the asymptotic inverse
    kappa0 = C tau^{sigma/(1-sigma)} (log tau)^{(m+sigma)/(1-sigma)}
    scaled by [1/4, 4], widened geometrically if the root escapes it.
    On return |f'(kappa) - tau| / tau <= tol.
    """
    if not (tau > 0):
        raise ParameterError("tau must be positive", tau=tau)
    if not (0.5 < mp.sigma < 1.0):
        raise ParameterError("saddle pipeline needs 1/2 < sigma < 1", sigma=mp.sigma)
    lt = max(math.log(tau), 1.0)
    kappa0 = (
        saddle_scale_constant(mp.sigma, mp.m)
        * tau ** (mp.sigma / (1.0 - mp.sigma))
        * lt ** ((mp.m + mp.sigma) / (1.0 - mp.sigma))
    )
    ctol = _cumulant_tol_for(mp, tau, kappa0)
    cache: dict = {}

    def f1_at(k: float):
        if k not in cache:
            cache[k] = _cumulant_full(mp, k, ctol)
        return cache[k]

    lo, hi = kappa0 / 4.0, kappa0 * 4.0
    for _ in range(8):
        if f1_at(lo)[1] <= tau <= f1_at(hi)[1]:
            break
        if f1_at(lo)[1] > tau:
            lo /= 4.0
        if f1_at(hi)[1] < tau:
            hi *= 4.0
    else:
        raise NumericError(
            "saddle bracket failure",
            tau=tau,
            kappa_seed=kappa0,
            f1_samples={k: v[1] for k, v in cache.items()},
        )

    from scipy.optimize import brentq

    kappa = brentq(lambda k: f1_at(k)[1] - tau, lo, hi, xtol=1e-12, rtol=1e-13)
    f, f1, f2, detail = f1_at(kappa)
    for _ in range(3):
        if abs(f1 - tau) / tau <= tol:
            break
        kappa = kappa - (f1 - tau) / f2
        f, f1, f2, detail = f1_at(kappa)
    if abs(f1 - tau) / tau > tol:
        raise NumericError("saddle refinement stalled", tau=tau, kappa=kappa, f1=f1)
    if not (f2 > 0):
        raise NumericError("tilted variance must be positive", f2=f2)

    log_tail = f - tau * kappa - math.log(kappa) - 0.5 * math.log(TWO_PI * f2)
    err_scale = kappa ** (-1.0 / (2.0 * mp.sigma)) * math.log(max(kappa, 2.0)) ** (
        0.5 * (mp.m / mp.sigma + 1.0)
    )
    return SaddleResult(
        tau=tau,
        kappa=float(kappa),
        f=f,
        f1=f1,
        f2=f2,
        tail_main=math.exp(log_tail) if log_tail > -745.0 else 0.0,
        error_scale=err_scale,
        cutoff_y=detail["cutoff_y"],
        meta={
            "log_tail": log_tail,
            "cumulant_tol": ctol,
            "f_error_bound": detail["f_error_bound"],
            "tail_f": detail["tail_f"],
            "kappa_seed": kappa0,
        },
    )


def tail_saddle(mp: ModelPoint, tau: float, kappa_min: float = 10.0) -> SaddleResult:
    """P(projection > tau) by the saddle-point main term
    exp(f - tau kappa) / (kappa sqrt(2 pi f'')), in log scale.

    Requires the saddle to land at kappa >= kappa_min; the relative error
    scale kappa^{-1/(2 sigma)} (log kappa)^{(m/sigma+1)/2} is reported on
    the result.
    """
    sr = solve_saddle(mp, tau)
    if sr.kappa < kappa_min:
        raise ParameterError(
            "tau too small: saddle below the kappa floor",
            tau=tau,
            kappa=sr.kappa,
            kappa_min=kappa_min,
        )
    return sr


def tail_asymptotic_log(mp: ModelPoint, tau: float) -> float:
    """log of the closed-form tail main factor
    exp(-A tau^{1/(1-sigma)} (log tau)^{(m+sigma)/(1-sigma)})."""
    if not (tau > 1):
        raise ParameterError("asymptotic tail needs tau > 1", tau=tau)
    A = tail_shape_constant(mp.sigma, mp.m)
    return -A * tau ** (1.0 / (1.0 - mp.sigma)) * math.log(tau) ** (
        (mp.m + mp.sigma) / (1.0 - mp.sigma)
    )


def tail_asymptotic(mp: ModelPoint, tau: float) -> float:
    """Main closed-form factor of the tail; the 1 + O(log log tau / log tau)
    correction is reported through tail_asymptotic_correction_scale, not
    applied."""
    lt = tail_asymptotic_log(mp, tau)
    return math.exp(lt) if lt > -745.0 else 0.0


def tail_asymptotic_correction_scale(tau: float) -> float:
    if not (tau > math.e):
        raise ParameterError("correction scale needs tau > e", tau=tau)
    return math.log(math.log(tau)) / math.log(tau)


def tilted_density(
    mp: ModelPoint, tau: float, xs: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Exponentially tilted density around level tau on the (centered)
    points xs, next to its Gaussian reference (1/sqrt(f'')) exp(-x^2/(2 f'')).

    The tilt re-centers the projected law at tau; both outputs are
    densities in the dx/sqrt(2 pi) normalization.
    """
    xs = np.asarray(xs, dtype=np.float64)
    sr = solve_saddle(mp, tau)
    from .charfun import marginal_density

    md = marginal_density(mp, xs=xs + tau)
    vals = np.maximum(md.values, 0.0)
    with np.errstate(divide="ignore"):
        log_n = sr.kappa * tau - sr.f + sr.kappa * xs + np.log(vals)
    tilted = np.where(vals > 0.0, np.exp(log_n), 0.0)
    gauss = np.exp(-(xs**2) / (2.0 * sr.f2)) / math.sqrt(sr.f2)
    return tilted, gauss


# ---------------------------------------------------------------------------
# indicator smoothing bracket on a vertical line


def mellin_smoothing_bracket(
    y: float, c: float, lam: float, tol: float = 1e-4
) -> tuple[float, float]:
    """Two-sided smoothing of the step indicator chi(y > 1) by vertical-line
    integrals: returns (lower, upper) with lower <= chi(y) <= upper.

    upper = (1/2 pi i) int y^s (e^{lam s} - 1)/(lam s^2) ds on Re s = c,
    and lower subtracts the companion integral with the extra factor
    (1 - e^{-lam s}); both are evaluated by trapezoid on a truncated line
    with an explicit 1/t tail estimate kept under tol.
    """
    if not (y > 0 and c > 0 and lam > 0):
        raise ParameterError("need y > 0, c > 0, lam > 0", y=y, c=c, lam=lam)
    pref = y**c * (math.exp(lam * c) + 1.0) / lam
    t_max = pref / (math.pi * tol) + 10.0
    freq = abs(math.log(y)) + lam + 1.0
    dt = min(TWO_PI / (24.0 * freq), c / 8.0)
    n = int(t_max / dt) + 1
    if n > 6e7:
        raise NumericError(
            "smoothing bracket line truncation too long for tol",
            nodes=n,
            t_max=t_max,
            tol=tol,
        )
    upper = 0.0
    second = 0.0
    # conjugate symmetry: the full-line integral is twice the real part;
    # chunked accumulation keeps the node arrays small
    for start in range(0, n, 1_000_000):
        ts = np.arange(start, min(start + 1_000_000, n)) * dt
        s = c + 1j * ts
        core = np.exp(s * math.log(y)) * (np.exp(lam * s) - 1.0) / (lam * s * s)
        w = np.full(len(ts), dt)
        if start == 0:
            w[0] *= 0.5
        upper += float((core * w).real.sum() / math.pi)
        second += float((core * (1.0 - np.exp(-lam * s)) * w).real.sum() / math.pi)
    return upper - second, upper
