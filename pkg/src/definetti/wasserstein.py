"""Distances between the law of the sample mean and its mixing measure.

``dw_mean_vs_prior`` and ``dk_mean_vs_prior`` work cell by cell on the
grid ``k/n``: the mean's CDF is a constant ``c`` on each cell while the
prior's CDF is monotone, so ``|F - c|`` changes sign at most once per cell
and every piece integrates in closed form through partial moments.

``dw_perturbed_prior`` handles the Gaussian-smoothed proxy
``theta + sqrt(theta (1 - theta) / n) Z``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, replace
from functools import lru_cache
from typing import Optional

import numpy as np

from . import special as sf
from .errors import ConvergenceError, QuadratureError
from .exact_laws import ExactMeanLaw
from .quadrature import DEFAULT_CONFIG, integrate

BISECTION_TOL = 1e-13
_BISECTION_MAX_ITER = 200

REPORT_COLUMNS = (
    "n", "dw_exact", "dk", "dw_perturbed", "lower", "upper_crude",
    "upper_smooth", "gap_bound", "dual_psi", "dw_empirical",
)


@dataclass
class DistanceReport:
    """Distances and bounds for one ``(mu, n)``; fields not computed in a
    given mode are ``None``."""

    n: int
    dw_exact: Optional[float]
    dk: Optional[float]
    dw_perturbed: Optional[float]
    lower_bound: float
    upper_crude: float
    upper_smooth: Optional[float]
    equivalence_gap_bound: float
    dual_lower_psi: Optional[float]
    measure: str = ""
    dw_empirical: Optional[float] = None

    def row(self):
        return {
            "n": self.n,
            "dw_exact": self.dw_exact,
            "dk": self.dk,
            "dw_perturbed": self.dw_perturbed,
            "lower": self.lower_bound,
            "upper_crude": self.upper_crude,
            "upper_smooth": self.upper_smooth,
            "gap_bound": self.equivalence_gap_bound,
            "dual_psi": self.dual_lower_psi,
            "dw_empirical": self.dw_empirical,
        }

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True)


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def reports_to_csv(reports, path=None):
    """CSV text with shortest round-trip floats; written to ``path`` if given."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    for r in reports:
        row = r.row()
        w.writerow([_fmt(row[c]) for c in REPORT_COLUMNS])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


# ---------------------------------------------------------------------------
# step CDF against a prior
# ---------------------------------------------------------------------------


def _subcells(n, steps, mu):
    """Cells ``[a, b)`` of the grid, split at interior atoms of ``mu``,
    with the step value ``c`` of the mean's CDF on each."""
    grid = np.arange(n + 1) / n
    interior = [loc for loc, _ in mu.atoms() if 0.0 < loc < 1.0]
    edges = np.unique(np.concatenate([grid, np.asarray(interior, dtype=float)]))
    a, b = edges[:-1], edges[1:]
    idx = np.searchsorted(grid, a, side="right") - 1
    return a, b, steps[idx]


def _bisect_level(mu, a, b, c):
    """Points in ``(a, b)`` where the continuous CDF crosses ``c``."""
    lo, hi = a.copy(), b.copy()
    for _ in range(_BISECTION_MAX_ITER):
        if np.all(hi - lo <= BISECTION_TOL):
            return 0.5 * (lo + hi)
        mid = 0.5 * (lo + hi)
        below = mu.cdf(mid) < c
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    raise ConvergenceError("crossing-point bisection did not reach its tolerance")


def _excess(mu, a, b, fa, fb_left, c):
    """``int_a^b (F - c)`` for ``F`` without atoms inside ``(a, b)``."""
    transport = b * (fb_left - fa) - mu.partial_mean_open(a, b)
    return (b - a) * (fa - c) + transport


def step_l1_distance(n, steps, mu):
    """``int_0^1 |S - F_mu|`` for the step CDF ``S = steps[k]`` on ``[k/n, (k+1)/n)``."""
    a, b, c = _subcells(n, np.asarray(steps, dtype=float), mu)
    fa = np.asarray(mu.cdf(a), dtype=float)
    fb = np.asarray(mu.cdf_left(b), dtype=float)
    signed = _excess(mu, a, b, fa, fb, c)
    above = fa >= c
    below = fb <= c
    total = float(np.sum(np.where(above, signed, 0.0)) - np.sum(np.where(below & ~above, signed, 0.0)))
    cross = ~(above | below)
    if np.any(cross):
        ac, bc, cc, fac = a[cross], b[cross], c[cross], fa[cross]
        x = _bisect_level(mu, ac, bc, cc)
        fx = np.asarray(mu.cdf(x), dtype=float)
        left = _excess(mu, ac, x, fac, fx, cc)  # negative part
        whole = signed[cross]
        total += float(np.sum(whole - 2.0 * left))
    return total


def dw_mean_vs_prior(law: ExactMeanLaw, mu):
    """Wasserstein-1 distance between the sample-mean law and ``mu``."""
    return step_l1_distance(law.n, law.cdf_steps(), mu)


def dk_mean_vs_prior(law: ExactMeanLaw, mu):
    """Kolmogorov distance; the sup is attained at subcell ends since the
    prior's CDF is monotone inside each subcell."""
    a, b, c = _subcells(law.n, law.cdf_steps(), mu)
    fa = np.asarray(mu.cdf(a), dtype=float)
    fb = np.asarray(mu.cdf_left(b), dtype=float)
    return float(max(np.max(np.abs(fa - c)), np.max(np.abs(fb - c))))


def dual_lower_bound_psi(law: ExactMeanLaw, mu):
    """``E[psi(mean)] - E[psi(theta)]`` with the 1-Lipschitz ``psi(x) = x(x-1)``."""
    x = law.support
    e_mean = float(((x * x - x) @ law.probs))
    e_prior = float(mu.second_moment() - mu.mean())
    return e_mean - e_prior


# ---------------------------------------------------------------------------
# perturbed prior
# ---------------------------------------------------------------------------

_INNER_Z = 9.0
_INNER_EDGES = (-9.0, -6.0, -3.5, -2.0, -1.0, 0.0, 1.0, 2.0, 3.5, 6.0, 9.0)
_INNER_TMAX = 3.3
_INNER_LEVELS = (2, 7)


@lru_cache(maxsize=None)
def _inner_level(level):
    """tanh-sinh nodes on (0, 1) new at ``level`` (nested)."""
    h = 2.0 ** (-level)
    kmax = int(math.ceil(_INNER_TMAX / h))
    k = np.arange(-kmax, kmax + 1)
    if level > _INNER_LEVELS[0]:
        k = k[k % 2 != 0]
    t = k * h
    s = 0.5 * math.pi * np.sinh(t)
    u = 0.5 * (1.0 + np.tanh(s))
    w = h * 0.25 * math.pi * np.cosh(t) / np.cosh(s) ** 2
    return u, w


def _mean_root(x, z, n):
    """Solve ``sqrt(n) (x - t) / sqrt(t (1 - t)) = z`` for ``t``, ``x <= 1/2``.

    Each branch is arranged as a sum of like-signed terms so that ``t`` keeps
    full relative accuracy even when ``x`` is tiny.
    """
    disc = np.sqrt(z * z + 4.0 * n * x * (1.0 - x))
    lin = np.abs(z) * (1.0 - 2.0 * x)
    with np.errstate(divide="ignore", invalid="ignore"):
        right = 4.0 * n * x * x * (1.0 - x) / ((disc + np.abs(z)) * (lin + disc))
    left = x + np.abs(z) * (lin + disc) / (2.0 * (n + z * z))
    return np.where(z > 0, np.where(x > 0, right, 0.0), left)


def _standardized_gap(x, t, n):
    return math.sqrt(n) * (x - t) / np.sqrt(t * (1.0 - t))


def _gaussian_average(x, n, cdf, kinks, tol):
    """``E_Z[cdf(t_x(Z))] - cdf(x)`` for ``x <= 1/2``.

    The map ``t -> sqrt(n)(x - t)/f(t)`` is decreasing on (0, 1), so
    ``P[theta + f(theta) Z / sqrt(n) <= x] = E[F(t_x(Z))]`` with ``t_x`` its
    inverse.  The z-integral is split at ``0``, at the scale where ``t_x``
    bends, and at the images of the prior's kinks.
    """
    fx = np.asarray(cdf(x), dtype=float)
    base = np.broadcast_to(np.asarray(_INNER_EDGES), (x.size, len(_INNER_EDGES)))
    scale = 2.0 * np.sqrt(n * x * (1.0 - x))[:, None] * np.array([-1.0, -0.125, 0.125, 1.0])
    extra = [scale]
    if kinks:
        extra.append(np.stack([_standardized_gap(x, s, n) for s in kinks], axis=1))
    edges = np.sort(np.concatenate([base] + [np.clip(e, -_INNER_Z, _INNER_Z) for e in extra], axis=1), axis=1)
    lo = edges[:, :-1, None]
    width = (edges[:, 1:] - edges[:, :-1])[:, :, None]
    xb = x[:, None, None]
    fxb = fx[:, None, None]

    def level_sum(rows, level):
        u, w = _inner_level(level)
        z = lo[rows] + width[rows] * u
        t = _mean_root(xb[rows], z, n)
        vals = (np.asarray(cdf(t), dtype=float) - fxb[rows]) * np.exp(-0.5 * z * z) * sf.INV_SQRT_2PI
        return np.sum(vals * w * width[rows], axis=(1, 2))

    first, last = _INNER_LEVELS
    rows = np.arange(x.size)
    prev = level_sum(rows, first)
    out = prev.copy()
    for level in range(first + 1, last + 1):
        cur = 0.5 * prev + level_sum(rows, level)
        err = np.abs(cur - prev)
        out[rows] = cur
        done = err <= tol
        if np.all(done):
            return out
        rows, prev = rows[~done], cur[~done]
    raise QuadratureError(
        "inner Gaussian integral did not converge", achieved_error=float(np.max(err)),
        location=tuple(x[rows][:3]),
    )


def _smoothed_cdf_gap(part, x, n, tol):
    """Perturbed minus plain CDF of a continuous part, vectorised over ``x``.

    Points above 1/2 are reflected, ``x -> 1 - x``, and handled through the
    upper tail so that both ends keep full relative accuracy.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    low = x <= 0.5
    kinks = [s for s in part.singular_points() if 0.0 < s < 1.0]
    if np.any(low):
        out[low] = _gaussian_average(x[low], n, part.cdf, kinks, tol)
    if np.any(~low):
        mirrored = [1.0 - s for s in kinks]
        out[~low] = -_gaussian_average(1.0 - x[~low], n, part.upper_tail, mirrored, tol)
    return out


def _perturbed_cdf_gap(mu, x, n, tol):
    """``P[theta + f(theta) Z / sqrt(n) <= x] - F_mu(x)`` on ``[0, 1]``."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for loc, mass in mu.atoms():
        if 0.0 < loc < 1.0:
            z = _standardized_gap(x, loc, n)
            out += mass * (sf.normal_cdf(z) - (loc <= x))
    for weight, part in mu.continuous_parts():
        out += weight * _smoothed_cdf_gap(part, x, n, tol)
    return out


def _tail_mass(mu, n, cfg, left=True):
    """``int`` of the perturbed CDF over ``(-inf, 0)`` (or of its complement
    over ``(1, inf)``): ``E[(f/sqrt n) Psi(sqrt n * dist / f)]``."""
    rn = math.sqrt(n)

    def g(t):
        t = np.asarray(t, dtype=float)
        f = np.sqrt(t * (1.0 - t))
        dist = t if left else 1.0 - t
        with np.errstate(divide="ignore", invalid="ignore"):
            y = np.where(f > 0, rn * dist / np.where(f > 0, f, 1.0), np.inf)
        y = np.where(np.isfinite(y), y, 50.0)
        return f / rn * sf.tail_integral(np.minimum(y, 50.0))

    total = 0.0
    for loc, mass in mu.atoms():
        total += mass * float(g(np.array([loc]))[0])
    hints = tuple(p for p in (1.0 / n, 4.0 / n, 16.0 / n, 1 - 16.0 / n, 1 - 4.0 / n, 1 - 1.0 / n) if 0 < p < 1)
    for weight, part in mu.continuous_parts():
        total += weight * float(part.expect(g, cfg, points=hints + tuple(part.singular_points())))
    return total


def _outer_points(mu, n):
    rn = math.sqrt(n)
    pts = {0.5}
    for p in (1.0, 4.0, 16.0):
        pts.update((p / n, 1.0 - p / n))
    anchors = [loc for loc, _ in mu.atoms() if 0.0 < loc < 1.0] + list(mu.singular_points())
    for s in anchors:
        sd = math.sqrt(s * (1.0 - s)) / rn
        pts.add(s)
        for k in (1.0, 3.0, 6.0):
            pts.update((s - k * sd, s + k * sd))
    return tuple(sorted(p for p in pts if 0.0 < p < 1.0))


def dw_perturbed_prior(mu, n, cfg=DEFAULT_CONFIG):
    """``d_W(theta + sqrt(theta(1-theta)/n) Z, theta)``.

    The parts of the real line outside ``[0, 1]`` are integrated exactly
    through the Gaussian tail integral; on ``[0, 1]`` the CDF gap is
    integrated adaptively.  Point masses at 0 or 1 are left in place by
    the smoothing and contribute nothing.
    """
    if not (isinstance(n, (int, np.integer)) and n >= 1):
        raise ValueError("n must be a positive integer")
    n = int(n)
    inner_tol = max(cfg.abs_tol * 1e-2, 1e-15)
    # the gap has kinks at its zeros, which Gauss-Kronrod bisection handles well
    outer_cfg = replace(cfg, scheme="gauss_kronrod_adaptive",
                        max_subdivisions=max(cfg.max_subdivisions, 2000))
    body = integrate(lambda x: np.abs(_perturbed_cdf_gap(mu, x, n, inner_tol)), 0.0, 1.0,
                     outer_cfg, _outer_points(mu, n))
    tails = _tail_mass(mu, n, cfg, left=True) + _tail_mass(mu, n, cfg, left=False)
    return float(body.value) + tails


def dual_lower_bound_abs(mu, n, cfg=DEFAULT_CONFIG):
    """``E|theta + f(theta) Z/sqrt n - 1/2| - E|theta - 1/2|``.

    Conditionally on ``theta`` the gain is ``2 s Psi(|a|/s)`` with
    ``a = theta - 1/2`` and ``s = f(theta)/sqrt n``.
    """
    rn = math.sqrt(n)

    def g(t):
        t = np.asarray(t, dtype=float)
        s = np.sqrt(t * (1.0 - t)) / rn
        a = np.abs(t - 0.5)
        with np.errstate(divide="ignore", invalid="ignore"):
            y = np.where(s > 0, a / np.where(s > 0, s, 1.0), np.inf)
        return np.where(s > 0, 2.0 * s * sf.tail_integral(np.where(np.isfinite(y), y, 0.0)), 0.0)

    total = 0.0
    for loc, mass in mu.atoms():
        total += mass * float(g(np.array([loc]))[0])
    hints = tuple(p for p in (0.5 - 4.0 / rn, 0.5 - 1.0 / rn, 0.5, 0.5 + 1.0 / rn, 0.5 + 4.0 / rn) if 0 < p < 1)
    for weight, part in mu.continuous_parts():
        total += weight * float(part.expect(g, cfg, points=hints + tuple(part.singular_points())))
    return total


# ---------------------------------------------------------------------------
# binomial against the normal law
# ---------------------------------------------------------------------------


def _normal_cdf_integral(a, b):
    """``int_a^b Phi`` for finite ``a <= b`` without cancellation."""
    psi = sf.tail_integral
    if a >= 0.0:
        return (b - a) - (psi(a) - psi(b))
    if b <= 0.0:
        return psi(-b) - psi(-a)
    return _normal_cdf_integral(a, 0.0) + _normal_cdf_integral(0.0, b)


def binomial_normal_check(t, n):
    """``(lhs, rhs)``: exact ``d_W`` between the standardised Binomial(n, t)
    sum and ``Z``, and the Berry-Esseen type bound
    ``(t^2 + (1-t)^2) / sqrt(n t (1-t))``."""
    if not (0.0 < t < 1.0):
        raise ValueError("t must lie in (0, 1)")
    if not (isinstance(n, (int, np.integer)) and n >= 1):
        raise ValueError("n must be a positive integer")
    from .exact_laws import binomial_pmf

    n = int(n)
    sd = math.sqrt(n * t * (1.0 - t))
    w = (np.arange(n + 1) - n * t) / sd
    cum = np.cumsum(binomial_pmf(n, t))
    psi = sf.tail_integral
    # the step CDF is 0 below the lowest atom and 1 above the highest
    total = float(psi(-w[0])) + float(psi(w[-1]))
    for k in range(n):
        a, b, c = float(w[k]), float(w[k + 1]), float(min(cum[k], 1.0))
        if c <= 0.0:
            total += _normal_cdf_integral(a, b)
            continue
        if c >= 1.0:
            total += (b - a) - _normal_cdf_integral(a, b)
            continue
        x = float(np.clip(-math.sqrt(2.0) * _erfcinv(2.0 * c), a, b))
        total += c * (x - a) - _normal_cdf_integral(a, x)
        total += _normal_cdf_integral(x, b) - c * (b - x)
    rhs = (t * t + (1.0 - t) ** 2) / sd
    return total, rhs


def _erfcinv(y):
    from scipy.special import erfcinv

    return float(erfcinv(y))
