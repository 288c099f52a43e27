"""Exact law of the sample mean of an exchangeable 0/1 sequence.

``P[mean = k/n] = C(n, k) * E[theta**k (1 - theta)**(n - k)]`` for the
mixing measure of ``theta``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import special as sf
from .measures import Beta, DEFAULT_CONFIG

UNDERFLOW = 1e-300


@dataclass(frozen=True)
class ExactMeanLaw:
    n: int
    probs: np.ndarray
    mu_mean: float
    clamped: bool = False

    @property
    def support(self):
        return np.arange(self.n + 1) / self.n

    def cdf_steps(self):
        """Value of the CDF on ``[k/n, (k+1)/n)``."""
        return np.cumsum(self.probs)

    def mean(self):
        return float(self.support @ self.probs)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "x", "prob"])
            for k, p in enumerate(self.probs):
                w.writerow([k, repr(k / self.n), repr(float(p))])


def _binomial_rows(n, t):
    """``(n+1, len(t))`` binomial pmfs in log space; exact zeros at t in {0, 1}."""
    k = np.arange(n + 1, dtype=float)[:, None]
    t = np.asarray(t, dtype=float)[None, :]
    logc = sf.log_binomial(n, k)
    with np.errstate(divide="ignore", invalid="ignore"):
        lt = np.where(k > 0, k * np.log(t), 0.0)
        lc = np.where(k < n, (n - k) * np.log1p(-t), 0.0)
    return np.exp(logc + lt + lc)


def _beta_binomial(n, alpha, beta):
    k = np.arange(n + 1, dtype=float)
    logp = (
        sf.log_binomial(n, k)
        + sf.log_beta(k + alpha, n - k + beta)
        - sf.log_beta(alpha, beta)
    )
    return np.exp(logp)


def mean_law(mu, n, cfg=DEFAULT_CONFIG, method="auto"):
    """Probabilities of ``k/n`` for ``k = 0..n``.

    Beta components use the Beta-Binomial closed form unless
    ``method="quadrature"``; other densities are integrated cell by cell
    with all ``n+1`` Bernstein polynomials evaluated together.
    """
    if not (isinstance(n, (int, np.integer)) and n >= 1):
        raise ValueError("n must be a positive integer")
    n = int(n)
    probs = np.zeros(n + 1)
    for loc, mass in mu.atoms():
        probs += mass * _binomial_rows(n, [loc])[:, 0]
    grid = tuple(np.arange(1, n) / n)
    for weight, part in mu.continuous_parts():
        if isinstance(part, Beta) and method != "quadrature":
            probs += weight * _beta_binomial(n, part.alpha, part.beta)
        else:
            probs += weight * np.asarray(part.expect(lambda t: _binomial_rows(n, t), cfg, points=grid))
    clamped = bool(np.any((probs > 0) & (probs < UNDERFLOW)))
    probs = np.where(probs < UNDERFLOW, 0.0, probs)
    return ExactMeanLaw(n=n, probs=probs, mu_mean=float(mu.mean()), clamped=clamped)


def mean_law_cdf(law, x):
    """Right-continuous CDF of the sample mean at ``x``."""
    x = np.asarray(x, dtype=float)
    steps = law.cdf_steps()
    idx = np.floor(np.clip(x, 0.0, 1.0) * law.n + 1e-12).astype(int)
    idx = np.minimum(idx, law.n)
    return np.where(x < 0, 0.0, steps[idx])


def binomial_pmf(n, t):
    """Binomial(n, t) pmf on ``0..n``."""
    if not (0.0 <= t <= 1.0):
        raise ValueError("t must lie in [0, 1]")
    return _binomial_rows(int(n), [t])[:, 0]


__all__ = ["ExactMeanLaw", "mean_law", "mean_law_cdf", "binomial_pmf"]
