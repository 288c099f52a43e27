"""Mixing measures on [0, 1] and the quantities derived from them.

A measure exposes a vectorised CDF, partial first moments, expectations of
arbitrary (vector-valued) functions, and sampling.  Absolutely continuous
measures are integrated piecewise in offset coordinates measured from an
anchor endpoint, so densities such as ``x**(a-1)`` near 0 or
``(x - 1/2)**(g - 1)`` near 1/2 are evaluated without cancellation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import special as sf
from .errors import DivergentIntegralError, QuadratureError
from .quadrature import DEFAULT_CONFIG, QuadratureConfig, integrate, integrate_checked

ATOM_MASS_TOL = 1e-12


@dataclass(frozen=True)
class BoundConstants:
    c1: float
    c2: float
    c_alpha_beta: Optional[float] = None
    method: str = "quadrature"


class MixingMeasure:
    """Base class.  Subclasses are immutable dataclasses."""

    kind = "abstract"

    # -- distributional surface -------------------------------------------
    def cdf(self, x):
        raise NotImplementedError

    def cdf_left(self, x):
        """``mu([0, x))``."""
        return self.cdf(x)

    def upper_tail(self, d):
        """``mu((1 - d, 1])`` as a function of the distance ``d`` to one."""
        return 1.0 - self.cdf(1.0 - np.asarray(d, dtype=float))

    def partial_mean(self, a, b):
        """``int_(a, b] x mu(dx)``."""
        raise NotImplementedError

    def partial_mean_open(self, a, b):
        """``int_(a, b) x mu(dx)``."""
        return self.partial_mean(a, b)

    def atoms(self):
        """All point masses as ``[(location, mass), ...]``."""
        return []

    def continuous_parts(self):
        """Absolutely continuous pieces as ``[(weight, measure), ...]``."""
        return []

    def singular_points(self):
        """Interior points where the CDF is not smooth."""
        return ()

    def endpoint_mass(self):
        return sum(m for loc, m in self.atoms() if loc in (0.0, 1.0))

    @property
    def has_density(self):
        return False

    def expect(self, g, cfg=DEFAULT_CONFIG, points=()):
        raise NotImplementedError

    def mean(self):
        return self.expect(lambda x: x)

    def second_moment(self):
        return self.expect(lambda x: x * x)

    def sample(self, rng, size):
        raise NotImplementedError

    def to_dict(self):
        raise NotImplementedError

    def label(self):
        return json.dumps(self.to_dict(), separators=(",", ":"))


# ---------------------------------------------------------------------------
# absolutely continuous measures
# ---------------------------------------------------------------------------


class ContinuousMeasure(MixingMeasure):
    """Measure with a density.  Subclasses define ``_pieces`` and
    ``_pdf_local``/``_dpdf_local`` in offset coordinates."""

    @property
    def has_density(self):
        return True

    def continuous_parts(self):
        return [(1.0, self)]

    def _pieces(self):
        """``[(anchor, direction, length), ...]`` covering the support."""
        raise NotImplementedError

    def _pdf_local(self, anchor, direction, delta):
        return self.pdf(anchor + direction * delta)

    def _dpdf_local(self, anchor, direction, delta):
        return self.pdf_prime(anchor + direction * delta)

    def pdf(self, x):
        raise NotImplementedError

    def pdf_prime(self, x):
        raise NotImplementedError

    def _piece_points(self, anchor, direction, length, points):
        out = []
        for p in points:
            d = (p - anchor) * direction
            if 0.0 < d < length:
                out.append(d)
        return out

    def expect(self, g, cfg=DEFAULT_CONFIG, points=()):
        """``E[g(theta)]``; ``g`` may be vector-valued along a leading axis."""
        total = 0.0
        for anchor, direction, length in self._pieces():
            def integrand(d, anchor=anchor, direction=direction):
                return np.asarray(g(anchor + direction * d)) * self._pdf_local(anchor, direction, d)

            res = integrate(integrand, 0.0, length, cfg, self._piece_points(anchor, direction, length, points))
            total = total + res.value
        return total

    def integrate_density(self, h, cfg=DEFAULT_CONFIG, points=(), checked=False):
        """``int h(x, 1 - x, p(x), p'(x)) dx`` over the support.

        ``1 - x`` is passed separately because it is formed exactly near
        the right end, where ``x`` itself rounds to one.
        """
        run = integrate_checked if checked else integrate
        total = 0.0
        for anchor, direction, length in self._pieces():
            def integrand(d, anchor=anchor, direction=direction):
                x = anchor + direction * d
                xc = d if (anchor == 1.0 and direction < 0) else 1.0 - x
                return h(x, xc, self._pdf_local(anchor, direction, d), self._dpdf_local(anchor, direction, d))

            res = run(integrand, 0.0, length, cfg, self._piece_points(anchor, direction, length, points))
            total = total + res.value
        return total


def _check_positive(name, value):
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
        raise ValueError(f"{name} must be a positive finite number, got {value!r}")


@dataclass(frozen=True)
class Beta(ContinuousMeasure):
    alpha: float
    beta: float
    kind = "beta"

    def __post_init__(self):
        _check_positive("alpha", self.alpha)
        _check_positive("beta", self.beta)

    @cached_property
    def _log_norm(self):
        return sf.log_beta(self.alpha, self.beta)

    def _pieces(self):
        return [(0.0, 1.0, 0.5), (1.0, -1.0, 0.5)]

    def _pdf_xc(self, x, xc):
        with np.errstate(divide="ignore"):
            logp = (self.alpha - 1.0) * np.log(x) + (self.beta - 1.0) * np.log(xc) - self._log_norm
        return np.exp(logp)

    def _xc(self, anchor, delta):
        return (delta, 1.0 - delta) if anchor == 0.0 else (1.0 - delta, delta)

    def _pdf_local(self, anchor, direction, delta):
        return self._pdf_xc(*self._xc(anchor, delta))

    def _dpdf_local(self, anchor, direction, delta):
        x, xc = self._xc(anchor, delta)
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            return self._pdf_xc(x, xc) * ((self.alpha - 1.0) / x - (self.beta - 1.0) / xc)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x > 0) & (x < 1)
        xs = np.where(inside, x, 0.5)
        return np.where(inside, self._pdf_xc(xs, 1.0 - xs), 0.0)

    def pdf_prime(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x > 0) & (x < 1)
        xs = np.where(inside, x, 0.5)
        d = self._pdf_xc(xs, 1.0 - xs) * ((self.alpha - 1.0) / xs - (self.beta - 1.0) / (1.0 - xs))
        return np.where(inside, d, 0.0)

    def cdf(self, x):
        xa = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
        out = sf.beta_inc_reg(xa, self.alpha, self.beta)
        return out

    def upper_tail(self, d):
        d = np.clip(np.asarray(d, dtype=float), 0.0, 1.0)
        return sf.beta_inc_reg(d, self.beta, self.alpha)

    def partial_mean(self, a, b):
        a = np.clip(np.asarray(a, dtype=float), 0.0, 1.0)
        b = np.clip(np.asarray(b, dtype=float), 0.0, 1.0)
        ratio = self.alpha / (self.alpha + self.beta)
        ia = sf.beta_inc_reg(a, self.alpha + 1.0, self.beta)
        ib = sf.beta_inc_reg(b, self.alpha + 1.0, self.beta)
        return ratio * (ib - ia)

    def mean(self):
        return self.alpha / (self.alpha + self.beta)

    def second_moment(self):
        s = self.alpha + self.beta
        return self.alpha * (self.alpha + 1.0) / (s * (s + 1.0))

    def sample(self, rng, size):
        # gamma-ratio construction
        x = rng.standard_gamma(self.alpha, size)
        y = rng.standard_gamma(self.beta, size)
        return x / (x + y)

    def to_dict(self):
        return {"kind": "beta", "alpha": self.alpha, "beta": self.beta}


@dataclass(frozen=True)
class SingularPower(ContinuousMeasure):
    """Density ``C (x - 1/2)**(gamma - 1)`` on ``(1/2, 3/4)``, ``0 < gamma < 1``.

    ``C = gamma * 4**gamma`` normalises it; the CDF is
    ``(4 (x - 1/2))**gamma`` on the support.
    """

    gamma: float
    kind = "singular_power"

    def __post_init__(self):
        if not (0.0 < self.gamma < 1.0):
            raise ValueError("gamma must lie in (0, 1)")

    @property
    def norm_const(self):
        return self.gamma / 0.25 ** self.gamma

    def _pieces(self):
        return [(0.5, 1.0, 0.25)]

    def singular_points(self):
        return (0.5, 0.75)

    def _pdf_local(self, anchor, direction, delta):
        return self.norm_const * delta ** (self.gamma - 1.0)

    def _dpdf_local(self, anchor, direction, delta):
        with np.errstate(over="ignore", divide="ignore"):
            return (self.gamma - 1.0) * self.norm_const * delta ** (self.gamma - 2.0)

    def pdf(self, x):
        s = np.asarray(x, dtype=float) - 0.5
        inside = (s > 0) & (s < 0.25)
        return np.where(inside, self.norm_const * np.where(inside, s, 1.0) ** (self.gamma - 1.0), 0.0)

    def pdf_prime(self, x):
        s = np.asarray(x, dtype=float) - 0.5
        inside = (s > 0) & (s < 0.25)
        ss = np.where(inside, s, 1.0)
        return np.where(inside, (self.gamma - 1.0) * self.norm_const * ss ** (self.gamma - 2.0), 0.0)

    def _offset(self, x):
        return np.clip(np.asarray(x, dtype=float) - 0.5, 0.0, 0.25)

    def cdf(self, x):
        return (4.0 * self._offset(x)) ** self.gamma

    def partial_mean(self, a, b):
        sa, sb = self._offset(a), self._offset(b)
        fa, fb = (4.0 * sa) ** self.gamma, (4.0 * sb) ** self.gamma
        g = self.gamma
        return 0.5 * (fb - fa) + g / (g + 1.0) * (fb * sb - fa * sa)

    def mean(self):
        g = self.gamma
        return 0.5 + 0.25 * g / (g + 1.0)

    def second_moment(self):
        g = self.gamma
        return 0.25 + 0.25 * g / (g + 1.0) + g / (16.0 * (g + 2.0))

    def sample(self, rng, size):
        return 0.5 + 0.25 * rng.random(size) ** (1.0 / self.gamma)

    def to_dict(self):
        return {"kind": "singular_power", "gamma": self.gamma}


@dataclass(frozen=True, eq=False)
class SmoothDensity(ContinuousMeasure):
    """User-supplied density on ``[lo, hi]`` with an explicit derivative.

    ``singular_exponents=(a0, a1)`` declares ``p(u) ~ (u-lo)**a0`` and
    ``(hi-u)**a1`` at the ends; both must exceed -1.  ``envelope`` is an
    upper bound on ``p`` used for rejection sampling.  ``cdf_fn`` may supply
    an exact CDF; otherwise it is built by quadrature.
    """

    pdf_fn: Callable
    pdf_prime_fn: Callable
    singular_exponents: tuple = (0.0, 0.0)
    support: tuple = (0.0, 1.0)
    envelope: Optional[float] = None
    cdf_fn: Optional[Callable] = None
    name: str = "smooth_density"
    norm_tol: float = 1e-8
    source: Optional[dict] = field(default=None, repr=False)
    kind = "smooth_density"

    def __post_init__(self):
        lo, hi = self.support
        if not (0.0 <= lo < hi <= 1.0):
            raise ValueError("support must be a sub-interval of [0, 1]")
        if min(self.singular_exponents) <= -1.0:
            raise ValueError("singular exponents <= -1 give a non-integrable density")
        mass = self.expect(lambda x: np.ones_like(x))
        if abs(mass - 1.0) > self.norm_tol:
            raise ValueError(f"density integrates to {mass!r}, not 1")

    def _pieces(self):
        lo, hi = self.support
        half = 0.5 * (hi - lo)
        return [(lo, 1.0, half), (hi, -1.0, half)]

    def singular_points(self):
        lo, hi = self.support
        return tuple(p for p in (lo, hi) if 0.0 < p < 1.0)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.support
        inside = (x > lo) & (x < hi)
        xs = np.where(inside, x, 0.5 * (lo + hi))
        return np.where(inside, self.pdf_fn(xs), 0.0)

    def pdf_prime(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.support
        inside = (x > lo) & (x < hi)
        xs = np.where(inside, x, 0.5 * (lo + hi))
        return np.where(inside, self.pdf_prime_fn(xs), 0.0)

    @cached_property
    def _grid(self):
        lo, hi = self.support
        grid = np.linspace(lo, hi, 65)
        mass = [0.0]
        moment = [0.0]
        for a, b in zip(grid[:-1], grid[1:]):
            v = self._segment(a, b)
            mass.append(mass[-1] + v[0])
            moment.append(moment[-1] + v[1])
        return grid, np.array(mass), np.array(moment)

    def _segment(self, a, b):
        """(mass, first moment) of ``[a, b]``, integrated from the nearer
        support end so endpoint singularities stay resolved."""
        lo, hi = self.support
        if b <= a:
            return np.zeros(2)
        f = lambda x: np.vstack([np.ones_like(x), x]) * self.pdf_fn(x)
        if a == lo:
            res = integrate(lambda d: f(lo + d), 0.0, b - lo)
        elif b == hi:
            res = integrate(lambda d: f(hi - d), 0.0, hi - a)
        else:
            res = integrate(f, a, b)
        return np.asarray(res.value)

    def _cumulative(self, x):
        lo, hi = self.support
        grid, mass, moment = self._grid
        x = np.clip(np.asarray(x, dtype=float), lo, hi)
        flat = x.ravel()
        out = np.empty((2, flat.size))
        for i, xi in enumerate(flat):
            j = min(int(np.searchsorted(grid, xi, side="right")) - 1, grid.size - 2)
            rest = self._segment(grid[j], xi)
            out[0, i] = mass[j] + rest[0]
            out[1, i] = moment[j] + rest[1]
        return out.reshape((2,) + x.shape)

    def cdf(self, x):
        if self.cdf_fn is not None:
            lo, hi = self.support
            x = np.clip(np.asarray(x, dtype=float), lo, hi)
            return np.clip(self.cdf_fn(x), 0.0, 1.0)
        return np.clip(self._cumulative(x)[0], 0.0, 1.0)

    def partial_mean(self, a, b):
        return self._cumulative(b)[1] - self._cumulative(a)[1]

    def sample(self, rng, size):
        if self.envelope is None:
            raise ValueError("sampling a SmoothDensity requires a declared envelope")
        lo, hi = self.support
        out = np.empty(size)
        filled = 0
        while filled < size:
            want = max(2 * (size - filled), 1024)
            x = lo + (hi - lo) * rng.random(want)
            u = rng.random(want) * self.envelope
            acc = x[u < self.pdf(x)]
            take = min(acc.size, size - filled)
            out[filled:filled + take] = acc[:take]
            filled += take
        return out

    @classmethod
    def from_table(cls, x, p, p_prime, envelope=None, name="tabulated", norm_tol=1e-6):
        """Cubic Hermite interpolant through tabulated ``(x, p, p')``."""
        from scipy.interpolate import CubicHermiteSpline

        x = np.asarray(x, dtype=float)
        p = np.asarray(p, dtype=float)
        dp = np.asarray(p_prime, dtype=float)
        if x.ndim != 1 or x.size < 2 or not np.all(np.diff(x) > 0):
            raise ValueError("tabulated x grid must be strictly increasing")
        if not (x[0] >= 0.0 and x[-1] <= 1.0):
            raise ValueError("tabulated x grid must lie in [0, 1]")
        if np.any(p < 0):
            raise ValueError("tabulated density must be nonnegative")
        spline = CubicHermiteSpline(x, p, dp)
        deriv = spline.derivative()
        anti = spline.antiderivative()
        if envelope is None:
            fine = np.linspace(x[0], x[-1], 20 * x.size)
            envelope = 1.05 * float(np.max(spline(fine)))
        source = {"kind": "tabulated", "x": x.tolist(), "p": p.tolist(), "p_prime": dp.tolist()}
        return cls(
            pdf_fn=lambda t: spline(t),
            pdf_prime_fn=lambda t: deriv(t),
            support=(float(x[0]), float(x[-1])),
            envelope=envelope,
            cdf_fn=lambda t: anti(t) - anti(x[0]),
            name=name,
            norm_tol=norm_tol,
            source=source,
        )

    def to_dict(self):
        if self.source is not None:
            return dict(self.source)
        return {"kind": "smooth_density", "name": self.name, "support": list(self.support)}


# ---------------------------------------------------------------------------
# atomic and composite measures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Atomic(MixingMeasure):
    """Finite sum of point masses ``((location, mass), ...)``."""

    points: tuple
    kind = "atomic"

    def __post_init__(self):
        pts = tuple(sorted((float(loc), float(m)) for loc, m in self.points))
        if not pts:
            raise ValueError("an atomic measure needs at least one atom")
        for loc, m in pts:
            if not (0.0 <= loc <= 1.0):
                raise ValueError(f"atom location {loc} outside [0, 1]")
            if not (m > 0):
                raise ValueError("atom masses must be positive")
        if abs(sum(m for _, m in pts) - 1.0) > ATOM_MASS_TOL:
            raise ValueError("atom masses must sum to 1")
        object.__setattr__(self, "points", pts)

    @cached_property
    def _arrays(self):
        locs = np.array([p[0] for p in self.points])
        masses = np.array([p[1] for p in self.points])
        return locs, masses, np.concatenate([[0.0], np.cumsum(masses)])

    def atoms(self):
        return list(self.points)

    def cdf(self, x):
        locs, _, cum = self._arrays
        return cum[np.searchsorted(locs, np.asarray(x, dtype=float), side="right")]

    def cdf_left(self, x):
        locs, _, cum = self._arrays
        return cum[np.searchsorted(locs, np.asarray(x, dtype=float), side="left")]

    @cached_property
    def _cum_moment(self):
        locs, masses, _ = self._arrays
        return np.concatenate([[0.0], np.cumsum(locs * masses)])

    def partial_mean(self, a, b):
        locs, _, _ = self._arrays
        cm = self._cum_moment
        ia = np.searchsorted(locs, np.asarray(a, dtype=float), side="right")
        ib = np.searchsorted(locs, np.asarray(b, dtype=float), side="right")
        return np.where(ib > ia, cm[ib] - cm[ia], 0.0)

    def partial_mean_open(self, a, b):
        locs, _, _ = self._arrays
        cm = self._cum_moment
        ia = np.searchsorted(locs, np.asarray(a, dtype=float), side="right")
        ib = np.searchsorted(locs, np.asarray(b, dtype=float), side="left")
        return np.where(ib > ia, cm[ib] - cm[ia], 0.0)

    def expect(self, g, cfg=DEFAULT_CONFIG, points=()):
        locs, masses, _ = self._arrays
        return np.asarray(g(locs)) @ masses

    def mean(self):
        locs, masses, _ = self._arrays
        return float(locs @ masses)

    def second_moment(self):
        locs, masses, _ = self._arrays
        return float((locs * locs) @ masses)

    def sample(self, rng, size):
        locs, masses, _ = self._arrays
        return locs[rng.choice(locs.size, size=size, p=masses / masses.sum())]

    def to_dict(self):
        return {"kind": "atomic", "atoms": [list(p) for p in self.points]}


@dataclass(frozen=True)
class Mixture(MixingMeasure):
    """Convex combination ``((weight, measure), ...)``."""

    components: tuple
    kind = "mixture"

    def __post_init__(self):
        comps = tuple((float(w), m) for w, m in self.components)
        if not comps:
            raise ValueError("a mixture needs at least one component")
        if any(not (w > 0) for w, _ in comps):
            raise ValueError("mixture weights must be positive")
        if abs(sum(w for w, _ in comps) - 1.0) > ATOM_MASS_TOL:
            raise ValueError("mixture weights must sum to 1")
        object.__setattr__(self, "components", comps)

    def _sum(self, fn):
        return sum(w * fn(m) for w, m in self.components)

    def cdf(self, x):
        return self._sum(lambda m: m.cdf(x))

    def cdf_left(self, x):
        return self._sum(lambda m: m.cdf_left(x))

    def partial_mean(self, a, b):
        return self._sum(lambda m: m.partial_mean(a, b))

    def partial_mean_open(self, a, b):
        return self._sum(lambda m: m.partial_mean_open(a, b))

    def atoms(self):
        merged = {}
        for w, m in self.components:
            for loc, mass in m.atoms():
                merged[loc] = merged.get(loc, 0.0) + w * mass
        return sorted(merged.items())

    def continuous_parts(self):
        return [(w * w2, m2) for w, m in self.components for w2, m2 in m.continuous_parts()]

    def singular_points(self):
        pts = set()
        for _, m in self.components:
            pts.update(m.singular_points())
        return tuple(sorted(pts))

    @property
    def has_density(self):
        return all(m.has_density for _, m in self.components)

    def expect(self, g, cfg=DEFAULT_CONFIG, points=()):
        return self._sum(lambda m: m.expect(g, cfg, points))

    def mean(self):
        return self._sum(lambda m: m.mean())

    def second_moment(self):
        return self._sum(lambda m: m.second_moment())

    def sample(self, rng, size):
        weights = np.array([w for w, _ in self.components])
        counts = rng.multinomial(size, weights / weights.sum())
        parts = [m.sample(rng, int(c)) for (_, m), c in zip(self.components, counts)]
        out = np.concatenate(parts)
        rng.shuffle(out)
        return out

    def to_dict(self):
        return {"kind": "mixture", "components": [{"weight": w, "measure": m.to_dict()} for w, m in self.components]}


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def moment_theta_one_minus_theta(mu, cfg=DEFAULT_CONFIG):
    """``E[theta (1 - theta)]``."""
    if isinstance(mu, Beta):
        s = mu.alpha + mu.beta
        return mu.alpha * mu.beta / (s * (s + 1.0))
    if isinstance(mu, (Atomic, SingularPower)):
        return mu.mean() - mu.second_moment()
    if isinstance(mu, Mixture):
        return sum(w * moment_theta_one_minus_theta(m, cfg) for w, m in mu.components)
    return float(mu.expect(lambda x: x * (1.0 - x), cfg))


def moment_sq_plus_comp_sq(mu, cfg=DEFAULT_CONFIG):
    """``E[theta**2 + (1 - theta)**2] = 1 - 2 E[theta (1 - theta)]``."""
    return 1.0 - 2.0 * moment_theta_one_minus_theta(mu, cfg)


def beta_abs_linear_mean(alpha, beta, a, b):
    """``E|a theta + b|`` for ``theta ~ Beta(alpha, beta)``, in closed form."""
    _check_positive("alpha", float(alpha))
    _check_positive("beta", float(beta))
    if a == 0:
        return abs(b)
    if a < 0:
        a, b = -a, -b
    mean_part = a * alpha / (alpha + beta) + b
    if b > 0:
        return mean_part
    if b <= -a:
        return -mean_part
    x0 = -b / a
    # B(alpha+1, beta)/B(alpha, beta) = alpha/(alpha+beta)
    lower1 = alpha / (alpha + beta) * sf.beta_inc_reg(x0, alpha + 1.0, beta)
    lower0 = sf.beta_inc_reg(x0, alpha, beta)
    return -2.0 * a * lower1 - 2.0 * b * lower0 + mean_part


def beta_bound_constant(alpha, beta):
    """Closed-form smooth-density constant for ``Beta(alpha, beta)``."""
    s = alpha + beta
    second = (alpha * (alpha + 1.0) + beta * (beta + 1.0)) / (s * (s + 1.0))
    return (
        second
        + beta_abs_linear_mean(alpha, beta, 2.0, -1.0)
        + beta_abs_linear_mean(alpha, beta, s - 2.0, 1.0 - alpha)
        + 3.0 * sf.INV_SQRT_2PIE
    )


def _generic_c2(mu, cfg):
    """Quadrature evaluation of the smooth-density constant from ``p`` and ``p'``."""
    pts = (0.5,) + tuple(mu.singular_points())
    first = mu.expect(lambda u: np.abs(1.0 - 2.0 * u) + u * u + (1.0 - u) ** 2, cfg, points=pts)
    deriv = mu.integrate_density(lambda u, uc, p, dp: u * uc * np.abs(dp), cfg, points=pts, checked=True)
    return float(first) + float(deriv) + 3.0 * sf.INV_SQRT_2PIE


def bound_constants(mu, cfg=DEFAULT_CONFIG, method="auto"):
    """Lower/upper rate constants for a measure with a density.

    ``method="auto"`` uses the Beta closed form when available, otherwise
    quadrature.  A non-integrable ``u(1-u)|p'(u)|`` raises
    :class:`DivergentIntegralError`.
    """
    if not mu.has_density or isinstance(mu, Mixture):
        raise ValueError(f"{mu.kind} measure has no usable density for the smooth bound")
    c1 = moment_theta_one_minus_theta(mu, cfg)
    if isinstance(mu, SingularPower):
        # density jumps at 3/4 and |p'| ~ (x-1/2)**(gamma-2): confirm numerically
        _generic_c2(mu, cfg)
    if isinstance(mu, Beta):
        cab = beta_bound_constant(mu.alpha, mu.beta)
        if method == "quadrature":
            return BoundConstants(c1=c1, c2=_generic_c2(mu, cfg), c_alpha_beta=cab, method="quadrature")
        return BoundConstants(c1=c1, c2=cab, c_alpha_beta=cab, method="closed_form")
    return BoundConstants(c1=c1, c2=_generic_c2(mu, cfg), method="quadrature")


def kill_boundary(mu):
    """Remove point masses at 0 and 1 and renormalise.

    Returns ``(mu_tilde, q)`` with ``q = mu({0, 1})``.
    """
    q = mu.endpoint_mass()
    if q == 0.0:
        return mu, 0.0
    if q >= 1.0 - ATOM_MASS_TOL:
        raise ValueError("measure is concentrated on {0, 1}; the distance is identically zero")
    return _strip_endpoints(mu), q


def _strip_endpoints(mu):
    if isinstance(mu, Atomic):
        kept = [(loc, m) for loc, m in mu.points if loc not in (0.0, 1.0)]
        total = sum(m for _, m in kept)
        return Atomic(tuple((loc, m / total) for loc, m in kept))
    if isinstance(mu, Mixture):
        comps = []
        for w, m in mu.components:
            qm = m.endpoint_mass()
            if qm >= 1.0 - ATOM_MASS_TOL:
                continue
            comps.append((w * (1.0 - qm), _strip_endpoints(m) if qm > 0 else m))
        total = sum(w for w, _ in comps)
        comps = [(w / total, m) for w, m in comps]
        return comps[0][1] if len(comps) == 1 else Mixture(tuple(comps))
    return mu


def cdf(mu, x):
    return mu.cdf(x)


def partial_mean(mu, a, b):
    if not (0.0 <= a <= b <= 1.0):
        raise ValueError("need 0 <= a <= b <= 1")
    return float(mu.partial_mean(a, b))


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def measure_from_dict(d):
    kind = d.get("kind")
    if kind == "beta":
        return Beta(float(d["alpha"]), float(d["beta"]))
    if kind in ("singular_power", "power_spike"):
        return SingularPower(float(d["gamma"]))
    if kind == "atomic":
        return Atomic(tuple((float(loc), float(m)) for loc, m in d["atoms"]))
    if kind == "mixture":
        return Mixture(tuple((float(c["weight"]), measure_from_dict(c["measure"])) for c in d["components"]))
    if kind == "tabulated":
        if "table" in d:
            x, p, dp = zip(*d["table"])
        else:
            x, p, dp = d["x"], d["p"], d["p_prime"]
        return SmoothDensity.from_table(x, p, dp, envelope=d.get("envelope"))
    raise ValueError(f"unknown measure kind {kind!r}")


def measure_from_json(text_or_path):
    """Parse a measure from a JSON string or a path to a JSON file."""
    text = str(text_or_path)
    if not text.lstrip().startswith("{"):
        text = Path(text).read_text()
    return measure_from_dict(json.loads(text))
