"""Mittag-Leffler, Prabhakar and one-sided stable (Wright-type) density evaluation.

All functions take real arguments and an absolute tolerance ``tol``.  Three
evaluation routes are combined per argument:

* the algebraic asymptotic expansion for negative arguments, used whenever its
  optimal-truncation error estimate is below ``tol``;
* the power series in double precision, used when the largest term is small
  enough that cancellation stays below ``tol``;
* the power series in extended precision (MPFR via gmpy2), for the remaining band of
  moderate negative arguments where neither of the above is accurate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import gmpy2
import numpy as np
from scipy.special import gammaln, gammasgn

__all__ = [
    "MLParams",
    "MittagLefflerError",
    "ml2",
    "ml3",
    "wright_density",
]

DEFAULT_TOL = 1e-12
MAX_TERMS = 10_000
MAX_DPS = 2_000

_EPS = np.finfo(float).eps
# cancellation safety factor applied to the largest series term
_CANCEL = 8.0 * _EPS


class MittagLefflerError(ArithmeticError):
    """Raised when a series cannot be summed to the requested tolerance."""

    def __init__(self, message, partial_sum=math.nan, error_estimate=math.inf):
        super().__init__(message)
        self.partial_sum = partial_sum
        self.error_estimate = error_estimate


@dataclass(frozen=True)
class MLParams:
    alpha: float
    beta: float
    gamma: float = 1.0
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not self.beta > 0.0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if not self.gamma > 0.0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if not self.tol > 0.0:
            raise ValueError(f"tol must be positive, got {self.tol}")


# {{{ series coefficients


def _log_coeffs(p: MLParams, n: np.ndarray) -> np.ndarray:
    """log of the (positive) series coefficient of y**n."""
    out = -gammaln(p.alpha * n + p.beta)
    if p.gamma != 1.0:
        out = out + gammaln(p.gamma + n) - gammaln(p.gamma) - gammaln(n + 1.0)
    return out


def _series_extent(p: MLParams, absy: np.ndarray, tol: float):
    """Terms needed and log of the largest term for each |y| in ``absy``."""
    absy = np.asarray(absy, dtype=float)
    nterms = np.ones(absy.shape, dtype=int)
    logmax = np.full(absy.shape, float(_log_coeffs(p, np.array([0.0]))[0]))
    pos = np.nonzero(absy > 0.0)[0]
    if pos.size == 0:
        return nterms, logmax
    # terms peak near alpha n ~ |y|**(1/alpha); scan a little beyond that
    guess = 200 + 6.0 * absy[pos].max() ** (1.0 / p.alpha) / p.alpha
    nmax = min(int(guess), MAX_TERMS)
    n = np.arange(nmax + 1, dtype=float)
    logc = _log_coeffs(p, n)
    cut = math.log(tol) - 12.0
    for lo in range(0, pos.size, 1024):
        idx = pos[lo : lo + 1024]
        logt = logc[None, :] + n[None, :] * np.log(absy[idx])[:, None]
        peak = np.argmax(logt, axis=1)
        after = (n[None, :] >= peak[:, None]) & (logt < cut)
        found = after.any(axis=1)
        if not np.all(found):
            bad = float(absy[idx][~found].max())
            raise MittagLefflerError(
                f"series for |y|={bad} not converged within {nmax} terms",
                error_estimate=float(np.exp(min(logt[~found, -1].max(), 700.0))),
            )
        nterms[idx] = np.argmax(after, axis=1) + 1
        logmax[idx] = logt[np.arange(idx.size), peak]
    return nterms, logmax


def _series_double(p: MLParams, y: np.ndarray, nterms: int) -> np.ndarray:
    n = np.arange(nterms, dtype=float)
    logc = _log_coeffs(p, n)
    absy = np.abs(y)[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        mag = np.exp(logc[None, :] + n[None, :] * np.log(absy))
    mag[:, 0] = np.exp(logc[0])
    sign = np.where((y[:, None] < 0) & (n[None, :] % 2 == 1), -1.0, 1.0)
    return np.sum(sign * mag, axis=1)


def _rgammas(alpha, beta, nterms):
    """1/Gamma(alpha n + beta), n < nterms, at the current gmpy2 precision."""
    frac = Fraction(alpha).limit_denominator(64)
    if float(frac) != alpha:
        a, b = gmpy2.mpfr(alpha), gmpy2.mpfr(beta)
        return [1 / gmpy2.gamma(a * n + b) for n in range(nterms)]
    # alpha = p/q: Gamma(alpha (n + q) + beta) = Gamma(alpha n + beta) (alpha n + beta)_p,
    # so only q gamma evaluations are needed
    pn, q = frac.numerator, frac.denominator
    a, b = gmpy2.mpfr(pn) / q, gmpy2.mpfr(beta)
    out = [1 / gmpy2.gamma(a * n + b) for n in range(min(q, nterms))]
    for n in range(q, nterms):
        x = a * (n - q) + b
        prod = gmpy2.mpfr(1)
        for j in range(pn):
            prod *= x + j
        out.append(out[n - q] / prod)
    return out


def _bits(dps: int) -> int:
    return int(dps * 3.33) + 16


@lru_cache(maxsize=256)
def _mp_coeffs(alpha, beta, gamma, nterms, dps):
    with gmpy2.context(gmpy2.get_context(), precision=_bits(dps)):
        coeffs = _rgammas(alpha, beta, nterms)
        if gamma != 1.0:
            g = gmpy2.mpfr(gamma)
            w = gmpy2.mpfr(1)
            for n in range(nterms):
                coeffs[n] *= w
                w = w * (g + n) / (n + 1)
        return tuple(reversed(coeffs))


def _series_mp(p: MLParams, ys, nterms: int, dps: int) -> np.ndarray:
    """Horner evaluation of the series in extended precision."""
    coeffs = _mp_coeffs(p.alpha, p.beta, p.gamma, nterms, dps)
    out = np.empty(len(ys))
    with gmpy2.context(gmpy2.get_context(), precision=_bits(dps)):
        for k, y in enumerate(ys):
            x = gmpy2.mpfr(float(y))
            acc = gmpy2.mpfr(0)
            for c in coeffs:
                acc = acc * x + c
            out[k] = float(acc)
    return out


# }}}

# {{{ asymptotic expansion for y < 0


def _asymptotic(p: MLParams, y: np.ndarray, kmax: int = 400):
    """Algebraic expansion for negative y; returns (value, error estimate)."""
    value, err, stop = _asymptotic_k(p, y, 48)
    # rows whose optimal truncation sits at the edge may gain from more terms
    redo = stop >= 40
    if np.any(redo):
        value[redo], err[redo], _ = _asymptotic_k(p, y[redo], kmax)
    return value, err


def _asymptotic_k(p: MLParams, y: np.ndarray, kmax: int):
    """Algebraic expansion for negative y; returns (value, error estimate).

    E^g_{a,b}(y) ~ (1/G(g)) sum_k (-1)^k G(g+k)/k! |y|^(-g-k) / G(b - a(g+k)).
    """
    absy = np.abs(y)
    k = np.arange(kmax, dtype=float)
    x = p.beta - p.alpha * (p.gamma + k)
    # 1/Gamma(x) vanishes at the poles x = 0, -1, -2, ...
    pole = (x <= 0) & (x == np.round(x))
    with np.errstate(divide="ignore", invalid="ignore"):
        logc = np.where(pole, -np.inf, -gammaln(x))
    logc = logc + gammaln(p.gamma + k) - gammaln(p.gamma) - gammaln(k + 1.0)
    sgn = np.where(pole, 0.0, gammasgn(x)) * np.where(k % 2 == 1, -1.0, 1.0)

    logt = logc[None, :] - (p.gamma + k)[None, :] * np.log(absy)[:, None]
    with np.errstate(over="ignore"):
        mag = np.exp(logt)
    cols = np.nonzero(~pole)[0]
    if cols.size == 0:
        # expansion vanishes identically (e.g. the exponential): no information
        n = absy.size
        return np.zeros(n), np.full(n, np.inf), np.zeros(n, dtype=int)
    # optimal truncation against a three-term envelope, so that an
    # accidentally small term near a zero of 1/Gamma is not trusted
    mz = np.concatenate([mag[:, cols], np.full((absy.size, 2), np.inf)], axis=1)
    env = np.maximum(np.maximum(mz[:, :-2], mz[:, 1:-1]), mz[:, 2:])
    j = np.argmin(env, axis=1)
    rows = np.arange(absy.size)
    stop = cols[j]
    err = 10.0 * env[rows, j]
    keep = k[None, :] < stop[:, None]
    value = np.sum(np.where(keep, sgn[None, :] * np.where(keep, mag, 0.0), 0.0), axis=1)
    if p.alpha > 0.9:
        # near the exponential limit the switched-off exponential part is of
        # the same size as the optimal-truncation remainder
        err *= 10.0
        err += np.exp(-(absy ** (1.0 / p.alpha))) * (1.0 + absy) ** (2.0 * p.gamma)
    return value, err, stop


# }}}


def _evaluate(p: MLParams, y) -> np.ndarray | float:
    scalar = np.ndim(y) == 0
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if not np.all(np.isfinite(y)):
        raise ValueError("Mittag-Leffler argument must be finite")
    tol = p.tol
    out = np.full(y.shape, np.nan)
    todo = np.ones(y.shape, dtype=bool)

    neg = y < -1.0
    if np.any(neg):
        val, err = _asymptotic(p, y[neg])
        ok = err <= tol
        idx = np.nonzero(neg)[0][ok]
        out[idx] = val[ok]
        todo[idx] = False

    # double precision series for arguments whose largest term is harmless
    rest = np.nonzero(todo)[0]
    if rest.size:
        nt, lm = _series_extent(p, np.abs(y[rest]), tol)
        dbl = np.exp(np.minimum(lm, 700.0)) * _CANCEL <= tol
        if np.any(dbl):
            out[rest[dbl]] = _series_double(p, y[rest[dbl]], int(nt[dbl].max()))
        band = rest[~dbl]
        if band.size:
            nterms = int(nt[~dbl].max())
            logmax = float(lm[~dbl].max())
            digits = logmax / math.log(10.0) - math.log10(tol) + 15
            # round up so that nearby calls share cached coefficients
            dps = 16 * int(math.ceil(max(digits, 20) / 16))
            nterms = 64 * int(math.ceil(nterms / 64))
            if dps > MAX_DPS:
                raise MittagLefflerError(
                    f"arguments down to {y[band].min()} need {dps} digits of "
                    "working precision",
                    error_estimate=math.exp(min(logmax, 700.0)) * _EPS,
                )
            out[band] = _series_mp(p, y[band], nterms, dps)
    return float(out[0]) if scalar else out


def ml2(alpha, beta, y, tol=DEFAULT_TOL):
    """Two-parameter Mittag-Leffler function sum_{n>=0} y^n / Gamma(alpha n + beta).

    ``y`` may be a scalar or an array; the result has the same shape.
    """
    return _evaluate(MLParams(alpha, beta, 1.0, tol), y)


def ml3(alpha, beta, gamma, y, tol=DEFAULT_TOL):
    """Prabhakar function sum_n (gamma)_n y^n / (n! Gamma(alpha n + beta))."""
    return _evaluate(MLParams(alpha, beta, gamma, tol), y)


# {{{ one-sided stable density


@lru_cache(maxsize=16)
def _density_table(r: float):
    """x-independent parts of the series terms for n = 1..MAX_TERMS."""
    n = np.arange(1, MAX_TERMS + 1, dtype=float)
    s = np.sin(n * math.pi * r)
    base = gammaln(n * r + 1.0) - gammaln(n + 1.0) - math.log(math.pi)
    with np.errstate(divide="ignore"):
        logsin = np.log(np.abs(s))
    sign = np.sign(s) * np.where(n % 2 == 0, -1.0, 1.0)
    return n, base, logsin, sign


@lru_cache(maxsize=32)
def _density_mp_coeffs(r: float, nterms: int, dps: int):
    """Signed coefficients c_k with density(x) = x^-1 sum_k c_k x^(-r k), as mpfr."""
    with gmpy2.context(gmpy2.get_context(), precision=_bits(dps)):
        rr = gmpy2.mpfr(r)
        pi = gmpy2.const_pi()
        out = []
        for k in range(1, nterms + 1):
            c = gmpy2.gamma(k * rr + 1) / gmpy2.fac(k) * gmpy2.sin(k * rr * pi) / pi
            out.append(c if k % 2 == 1 else -c)
        return tuple(out)


def _density_mp(r: float, xs: np.ndarray, nterms: int, dps: int) -> np.ndarray:
    coeffs = _density_mp_coeffs(r, nterms, dps)
    out = np.empty(xs.size)
    with gmpy2.context(gmpy2.get_context(), precision=_bits(dps)):
        rr = gmpy2.mpfr(r)
        for m, x in enumerate(xs):
            xx = gmpy2.mpfr(float(x))
            z = xx ** (-rr)
            acc = coeffs[-1]
            for c in reversed(coeffs[:-1]):
                acc = acc * z + c
            out[m] = float(acc * z / xx)
    return out


def _density(r: float, xs: np.ndarray, tol: float) -> np.ndarray:
    n, base, logsin, sign = _density_table(r)
    out = np.empty(xs.size)
    # truncate on the sin-free envelope: sin(n pi r) can be accidentally tiny
    cut = math.log(tol) - 12.0
    for lo in range(0, xs.size, 256):
        x = xs[lo : lo + 256]
        env = base[None, :] - (r * n[None, :] + 1.0) * np.log(x)[:, None]
        peak = np.argmax(env, axis=1)
        rows = np.arange(x.size)
        below = (env < cut) & (n[None, :] > n[peak][:, None])
        if not np.all(np.any(below, axis=1)):
            bad = x[~np.any(below, axis=1)][0]
            raise MittagLefflerError(
                f"density series at x={bad} not converged within {MAX_TERMS} terms",
                error_estimate=float(np.exp(min(env.max(), 700.0))),
            )
        nterms = np.argmax(below, axis=1) + 1
        logmax = env[rows, peak]
        dbl = np.exp(np.minimum(logmax, 700.0)) * _CANCEL <= tol
        keep = n[None, :] <= nterms[:, None]
        with np.errstate(over="ignore"):
            terms = np.where(keep, sign[None, :] * np.exp(np.where(keep, env + logsin[None, :], -np.inf)), 0.0)
        val = terms.sum(axis=1)
        if np.any(~dbl):
            lm = float(logmax[~dbl].max())
            dps = int(math.ceil(lm / math.log(10.0) - math.log10(tol) + 15))
            if dps > MAX_DPS:
                raise MittagLefflerError(
                    f"density series at x={x[~dbl].min()} needs {dps} digits of working precision",
                    error_estimate=math.exp(min(lm, 700.0)) * _EPS,
                )
            # round up so that nearby calls share cached coefficients
            dps = 16 * int(math.ceil(dps / 16))
            nt = 64 * int(math.ceil(int(nterms[~dbl].max()) / 64))
            val[~dbl] = _density_mp(r, x[~dbl], nt, dps)
        out[lo : lo + 256] = val
    return out


def wright_density(r, x, tol=DEFAULT_TOL):
    """One-sided stable density with Laplace transform exp(-s**r).

    Summed from its series in negative powers of ``x``.  For small ``x`` the
    series cancels catastrophically and extended precision is used; below the
    reach of ``MAX_DPS`` digits a :class:`MittagLefflerError` is raised.
    """
    if not 0.0 < r < 1.0:
        raise ValueError(f"r must lie in (0, 1), got {r}")
    if not tol > 0.0:
        raise ValueError(f"tol must be positive, got {tol}")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xs <= 0.0):
        raise ValueError("density argument must be positive")
    out = _density(float(r), xs, tol)
    return float(out[0]) if np.ndim(x) == 0 else out


# }}}
