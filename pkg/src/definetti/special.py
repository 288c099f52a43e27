"""Scalar special functions: normal law, log-gamma, Beta and incomplete Beta.

All functions accept floats or numpy arrays and return the same kind.  The
normal CDF and tail are both written in terms of ``erfc`` so that neither is
obtained by subtracting the other from one.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special as _sp

from .errors import ConvergenceError

SQRT_2PI = math.sqrt(2.0 * math.pi)
INV_SQRT_2PI = 1.0 / SQRT_2PI
INV_SQRT_2PIE = 1.0 / math.sqrt(2.0 * math.pi * math.e)

_CF_MAX_ITER = 200
_CF_EPS = 1e-15
_FPMIN = 1e-300


def _as_float(x):
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def _out(arr, scalar):
    return float(arr) if scalar else arr


def _require_finite(arr, name="x"):
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")


def normal_pdf(x):
    """Standard normal density ``exp(-x**2/2)/sqrt(2*pi)``."""
    arr, scalar = _as_float(x)
    _require_finite(arr)
    return _out(np.exp(-0.5 * arr * arr) * INV_SQRT_2PI, scalar)


def normal_cdf(x):
    """Standard normal CDF, ``erfc(-x/sqrt 2)/2``."""
    arr, scalar = _as_float(x)
    _require_finite(arr)
    return _out(0.5 * _sp.erfc(-arr / math.sqrt(2.0)), scalar)


def normal_tail(t):
    """Upper tail ``P[Z > t]`` computed directly from ``erfc``."""
    arr, scalar = _as_float(t)
    _require_finite(arr, "t")
    return _out(0.5 * _sp.erfc(arr / math.sqrt(2.0)), scalar)


def tail_integral(y):
    """``int_y^inf P[Z > u] du = pdf(y) - y * tail(y)``.

    For large ``y`` the two terms nearly cancel; the result is still accurate
    in absolute terms, which is all the callers need.
    """
    arr, scalar = _as_float(y)
    val = np.exp(-0.5 * arr * arr) * INV_SQRT_2PI - arr * 0.5 * _sp.erfc(arr / math.sqrt(2.0))
    return _out(np.maximum(val, 0.0), scalar)


def log_gamma(x):
    """``ln Gamma(x)`` for ``x > 0``."""
    arr, scalar = _as_float(x)
    if np.any(~(arr > 0)) or not np.all(np.isfinite(arr)):
        raise ValueError("log_gamma requires finite x > 0")
    if scalar:
        return math.lgamma(float(arr))
    return _sp.gammaln(arr)


def log_beta(alpha, beta):
    a, sa = _as_float(alpha)
    b, sb = _as_float(beta)
    if np.any(~(a > 0)) or np.any(~(b > 0)):
        raise ValueError("Beta parameters must be positive")
    if sa and sb:
        a, b = float(a), float(b)
        return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)
    return _sp.gammaln(a) + _sp.gammaln(b) - _sp.gammaln(a + b)


def beta_fn(alpha, beta):
    """Complete Beta function via log-gamma."""
    lb = log_beta(alpha, beta)
    return math.exp(lb) if np.ndim(lb) == 0 else np.exp(lb)


def _beta_cf(x, a, b):
    """Modified Lentz evaluation of the incomplete-Beta continued fraction.

    Vectorised over broadcast arrays; raises when any element fails to settle
    within the iteration cap.
    """
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = np.ones_like(x)
    d = 1.0 - qab * x / qap
    d = np.where(np.abs(d) < _FPMIN, _FPMIN, d)
    d = 1.0 / d
    h = d.copy()
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _FPMIN, _FPMIN, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _FPMIN, _FPMIN, c)
        d = 1.0 / d
        h = h * d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _FPMIN, _FPMIN, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _FPMIN, _FPMIN, c)
        d = 1.0 / d
        delta = d * c
        h = h * delta
        if np.all(np.abs(delta - 1.0) < _CF_EPS):
            return h
    worst = float(np.max(np.abs(delta - 1.0)))
    raise ConvergenceError(
        f"incomplete Beta continued fraction did not converge in {_CF_MAX_ITER} "
        f"iterations (last relative step {worst:.3e})"
    )


def beta_inc_reg(x, alpha, beta, xc=None):
    """Regularised incomplete Beta ``I_x(alpha, beta)``.

    ``xc`` may carry ``1 - x`` computed without rounding, which matters for
    ``x`` within a few ulps of one.
    """
    xa, scalar = _as_float(x)
    a = np.asarray(alpha, dtype=float)
    b = np.asarray(beta, dtype=float)
    if np.any(~(a > 0)) or np.any(~(b > 0)):
        raise ValueError("Beta parameters must be positive")
    if np.any(~((xa >= 0) & (xa <= 1))):
        raise ValueError("x must lie in [0, 1]")
    xca = 1.0 - xa if xc is None else np.asarray(xc, dtype=float)
    xa, xca, a, b = np.broadcast_arrays(xa, xca, a, b)
    out = np.empty(xa.shape)
    lo = xa <= 0.0
    hi = xca <= 0.0
    out[lo] = 0.0
    out[hi] = 1.0
    mid = ~(lo | hi)
    if np.any(mid):
        xm, xcm, am, bm = xa[mid], xca[mid], a[mid], b[mid]
        lbeta = _sp.gammaln(am) + _sp.gammaln(bm) - _sp.gammaln(am + bm)
        log_front = am * np.log(xm) + bm * np.log(xcm) - lbeta
        direct = xm < (am + 1.0) / (am + bm + 2.0)
        res = np.empty(xm.shape)
        if np.any(direct):
            i = direct
            res[i] = np.exp(log_front[i]) * _beta_cf(xm[i], am[i], bm[i]) / am[i]
        if np.any(~direct):
            i = ~direct
            res[i] = 1.0 - np.exp(log_front[i]) * _beta_cf(xcm[i], bm[i], am[i]) / bm[i]
        out[mid] = np.clip(res, 0.0, 1.0)
    return float(out) if scalar and out.ndim == 0 else out


def beta_inc_reg_upper(x, alpha, beta, xc=None):
    """``1 - I_x(alpha, beta)`` without cancellation."""
    xa = np.asarray(x, dtype=float)
    xca = 1.0 - xa if xc is None else np.asarray(xc, dtype=float)
    return beta_inc_reg(xca, beta, alpha, xc=xa)


def beta_inc(x, alpha, beta):
    """Unregularised incomplete Beta integral ``int_0^x t^(a-1)(1-t)^(b-1) dt``.

    Underflows to zero when ``B(alpha, beta)`` itself does; use
    :func:`beta_inc_reg` for large parameters.
    """
    reg = beta_inc_reg(x, alpha, beta)
    return reg * beta_fn(alpha, beta)


def fluctuation_scale(x):
    """Bernoulli standard deviation ``sqrt(x(1-x))`` on ``[0, 1]``."""
    arr, scalar = _as_float(x)
    if np.any(~((arr >= 0) & (arr <= 1))):
        raise ValueError("x must lie in [0, 1]")
    return _out(np.sqrt(arr * (1.0 - arr)), scalar)


def log_binomial(n, k):
    """``ln C(n, k)`` for integer arrays ``k``."""
    k = np.asarray(k, dtype=float)
    return _sp.gammaln(n + 1.0) - _sp.gammaln(k + 1.0) - _sp.gammaln(n - k + 1.0)
