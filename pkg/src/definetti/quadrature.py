"""Adaptive quadrature on finite intervals.

Two schemes are provided, both vectorised: the integrand receives a 1-D array
of abscissae and returns either an array of the same length or a 2-D array
``(m, len(x))`` for vector-valued integrals.

* ``tanh_sinh``: double-exponential rule with level doubling.  Abscissae near
  the left end are produced as exact offsets from ``a``, so integrable
  algebraic singularities at ``a = 0`` are resolved down to ~1e-300.
* ``gauss_kronrod_adaptive``: G7/K15 with global bisection.  Cheaper for
  smooth integrands, poor near endpoint singularities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .errors import DivergentIntegralError, QuadratureError

SCHEMES = ("tanh_sinh", "gauss_kronrod_adaptive")


@dataclass(frozen=True)
class Accuracy:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be positive")


@dataclass(frozen=True)
class QuadratureConfig:
    scheme: str = "tanh_sinh"
    max_subdivisions: int = 200
    accuracy: Accuracy = field(default_factory=Accuracy)

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown quadrature scheme {self.scheme!r}")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")

    @property
    def abs_tol(self):
        return self.accuracy.abs_tol

    @property
    def rel_tol(self):
        return self.accuracy.rel_tol

    def with_tol(self, abs_tol=None, rel_tol=None):
        acc = Accuracy(
            abs_tol=self.abs_tol if abs_tol is None else abs_tol,
            rel_tol=self.rel_tol if rel_tol is None else rel_tol,
        )
        return replace(self, accuracy=acc)


DEFAULT_CONFIG = QuadratureConfig()


@dataclass
class QuadResult:
    value: object
    error: float
    evaluations: int


# ---------------------------------------------------------------------------
# tanh-sinh
# ---------------------------------------------------------------------------

_TS_TMAX = 6.5
_TS_MIN_LEVEL = 2
_TS_MAX_LEVEL = 8
_TS_EDGE_FRACTION = 1e-100


@lru_cache(maxsize=None)
def _ts_level(level):
    """Abscissa fractions and weights for the nodes new at ``level``.

    Returns ``(frac_left, frac_right, weight)`` where a node sits at
    ``a + (b-a)*frac_left`` or equivalently ``b - (b-a)*frac_right``; the
    weight already includes the step ``h`` and the Jacobian of [0, 1].
    """
    h = 2.0 ** (-level)
    kmax = int(math.ceil(_TS_TMAX / h))
    k = np.arange(-kmax, kmax + 1)
    if level > 0:
        k = k[k % 2 != 0]
    t = k * h
    s = 0.5 * math.pi * np.sinh(t)
    with np.errstate(over="ignore"):
        frac_left = 1.0 / (1.0 + np.exp(-2.0 * s))
        frac_right = 1.0 / (1.0 + np.exp(2.0 * s))
        w = h * 0.5 * math.pi * np.cosh(t) / (2.0 * np.cosh(s) ** 2)
    keep = (w > 0) & (frac_left > 0) & (frac_right > 0)
    return frac_left[keep], frac_right[keep], w[keep], (t[keep] <= 0)


def _ts_nodes(a, b, level):
    fl, fr, w, left = _ts_level(level)
    width = b - a
    x = np.where(left, a + width * fl, b - width * fr)
    inside = (x > a) & (x < b)
    # overflow of the integrand this close to an end is dropped; an
    # integrable singularity loses at most ~ (1e-100)**(1-s) there
    edge = np.where(left, fl, fr)[inside] < _TS_EDGE_FRACTION
    return x[inside], w[inside] * width, edge


def _ts_sum(f, x, w, edge):
    if not np.any(edge):
        return _call(f, x) @ w
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        y = _call(f, x)
    if np.any(edge):
        y = np.where(edge & ~np.isfinite(y), 0.0, y)
    return y @ w


def _call(f, x):
    y = np.asarray(f(x), dtype=float)
    if y.shape[-1] != x.shape[0]:
        raise ValueError("integrand must return values along the last axis")
    return y


def _ts_piece(f, a, b, abs_tol, rel_tol):
    """Level-doubling tanh-sinh on one piece.  Returns (value, err, nevals, ok)."""
    x, w, edge = _ts_nodes(a, b, 0)
    total = _ts_sum(f, x, w, edge)
    nevals = x.size
    for level in range(1, _TS_MIN_LEVEL):
        x, w, edge = _ts_nodes(a, b, level)
        total = 0.5 * total + _ts_sum(f, x, w, edge)
        nevals += x.size
    prev = total
    err = math.inf
    for level in range(_TS_MIN_LEVEL, _TS_MAX_LEVEL + 1):
        x, w, edge = _ts_nodes(a, b, level)
        if x.size == 0:
            break
        total = 0.5 * prev + _ts_sum(f, x, w, edge)
        nevals += x.size
        if not np.all(np.isfinite(total)):
            return total, math.inf, nevals, False
        err = float(np.max(np.abs(total - prev)))
        scale = float(np.max(np.abs(total)))
        if level > _TS_MIN_LEVEL and err <= max(abs_tol, rel_tol * scale):
            return total, err, nevals, True
        prev = total
    return total, err, nevals, False


def _tanh_sinh(f, edges, abs_tol, rel_tol, max_subdivisions):
    stack = [(edges[i], edges[i + 1], abs_tol * (edges[i + 1] - edges[i]) / (edges[-1] - edges[0]))
             for i in range(len(edges) - 1)]
    total = 0.0
    total_err = 0.0
    nevals = 0
    splits = 0
    while stack:
        a, b, tol = stack.pop()
        val, err, ne, ok = _ts_piece(f, a, b, tol, rel_tol)
        nevals += ne
        if ok:
            total = total + val
            total_err += err
            continue
        mid = 0.5 * (a + b)
        if splits >= max_subdivisions or not (a < mid < b):
            raise QuadratureError(
                f"tanh-sinh failed on [{a!r}, {b!r}] after {splits} subdivisions",
                achieved_error=err,
                location=(a, b),
            )
        splits += 1
        stack.append((mid, b, 0.5 * tol))
        stack.append((a, mid, 0.5 * tol))
    return QuadResult(total, total_err, nevals)


# ---------------------------------------------------------------------------
# Gauss-Kronrod 7/15
# ---------------------------------------------------------------------------

_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
# 15 nodes on [-1, 1]: -x0..-x6, 0, x6..x0
GK_NODES = np.concatenate([-_XGK[:-1], [0.0], _XGK[:-1][::-1]])
GK_WEIGHTS = np.concatenate([_WGK[:-1], [_WGK[-1]], _WGK[:-1][::-1]])
_G_WEIGHTS = np.zeros(15)
# Gauss nodes are the odd-indexed Kronrod nodes x1, x3, x5 and 0.
for _i, _wg in zip((1, 3, 5), _WG[:3]):
    _G_WEIGHTS[_i] = _wg
    _G_WEIGHTS[14 - _i] = _wg
_G_WEIGHTS[7] = _WG[3]


def _gk_batch(f, a, b):
    """Apply G7/K15 to many panels at once.  Returns (kronrod, err), each
    shaped ``(..., npanels)``."""
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    x = (mid[:, None] + half[:, None] * GK_NODES[None, :]).ravel()
    y = _call(f, x)
    y = y.reshape(y.shape[:-1] + (a.size, 15))
    k = (y @ GK_WEIGHTS) * half
    g = (y @ _G_WEIGHTS) * half
    # QUADPACK qk15 error heuristic
    mean = (y @ GK_WEIGHTS) * 0.5
    resasc = (np.abs(y - mean[..., None]) @ GK_WEIGHTS) * np.abs(half)
    raw = np.abs(k - g)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = resasc * np.minimum(1.0, (200.0 * raw / resasc) ** 1.5)
    err = np.where(resasc > 0, scaled, raw)
    if err.ndim > 1:
        err = err.max(axis=tuple(range(err.ndim - 1)))
    return k, err, x.size


def _gauss_kronrod(f, edges, abs_tol, rel_tol, max_subdivisions):
    a = np.asarray(edges[:-1], dtype=float)
    b = np.asarray(edges[1:], dtype=float)
    vals, errs, nevals = _gk_batch(f, a, b)
    splits = 0
    while True:
        total = vals.sum(axis=-1)
        total_err = float(errs.sum())
        if not np.isfinite(total_err) or not np.all(np.isfinite(total)):
            raise QuadratureError("non-finite integrand values", achieved_error=math.inf)
        scale = float(np.max(np.abs(total)))
        tol = max(abs_tol, rel_tol * scale)
        if total_err <= tol:
            return QuadResult(total if np.ndim(total) else float(total), total_err, nevals)
        worst = errs.max()
        pick = np.flatnonzero(errs >= 0.25 * worst)
        if splits + pick.size > max_subdivisions:
            raise QuadratureError(
                f"Gauss-Kronrod reached {splits} subdivisions with error {total_err:.3e}",
                achieved_error=total_err,
                location=(float(a[errs.argmax()]), float(b[errs.argmax()])),
            )
        splits += pick.size
        pa, pb = a[pick], b[pick]
        pm = 0.5 * (pa + pb)
        na = np.concatenate([pa, pm])
        nb = np.concatenate([pm, pb])
        nv, ne, n_new = _gk_batch(f, na, nb)
        nevals += n_new
        keep = np.ones(a.size, dtype=bool)
        keep[pick] = False
        a = np.concatenate([a[keep], na])
        b = np.concatenate([b[keep], nb])
        vals = np.concatenate([vals[..., keep], nv], axis=-1)
        errs = np.concatenate([errs[keep], ne])


def _edges(a, b, points):
    """Sorted breakpoints; hints closer than a few ulps to a neighbour are merged."""
    span = (b - a) * 1e-14
    out = [float(a)]
    for p in sorted({float(p) for p in points if a < p < b}):
        if p - out[-1] > span and b - p > span:
            out.append(p)
    return out + [float(b)]


def integrate(f, a, b, cfg=DEFAULT_CONFIG, points=()):
    """Integrate ``f`` over ``[a, b]`` with the scheme named in ``cfg``.

    ``points`` are interior breakpoints (kinks, singularities, peaks).
    Returns a :class:`QuadResult`; raises :class:`QuadratureError` when the
    subdivision budget is exhausted.
    """
    if not (np.isfinite(a) and np.isfinite(b)):
        raise ValueError("integration limits must be finite")
    if a == b:
        return QuadResult(0.0, 0.0, 0)
    if a > b:
        res = integrate(f, b, a, cfg, points)
        return QuadResult(-res.value, res.error, res.evaluations)
    edges = _edges(a, b, points)
    if cfg.scheme == "tanh_sinh":
        res = _tanh_sinh(f, edges, cfg.abs_tol, cfg.rel_tol, cfg.max_subdivisions)
    else:
        res = _gauss_kronrod(f, edges, cfg.abs_tol, cfg.rel_tol, cfg.max_subdivisions)
    if np.ndim(res.value) == 0:
        res.value = float(res.value)
    return res


def integrate_checked(f, a, b, cfg=DEFAULT_CONFIG, points=()):
    """Integrate, then repeat with twice the subdivision budget.

    A change larger than ten times the tolerance, or failure of either run,
    is reported as :class:`DivergentIntegralError`.
    """
    try:
        first = integrate(f, a, b, cfg, points)
        doubled = integrate(f, a, b, replace(cfg, max_subdivisions=2 * cfg.max_subdivisions), points)
    except QuadratureError as exc:
        raise DivergentIntegralError(
            f"integral over [{a}, {b}] does not converge: {exc}", achieved_error=exc.achieved_error
        ) from exc
    diff = float(np.max(np.abs(np.asarray(first.value) - np.asarray(doubled.value))))
    tol = max(cfg.abs_tol, cfg.rel_tol * float(np.max(np.abs(doubled.value))))
    if diff > 10.0 * tol:
        raise DivergentIntegralError(
            f"integral over [{a}, {b}] moved by {diff:.3e} when the budget doubled",
            achieved_error=diff,
        )
    return doubled
