import json
import math

import numpy as np
import pytest
from scipy import integrate as spi

from definetti import special as sf
from definetti.errors import DivergentIntegralError
from definetti.measures import (
    Atomic,
    Beta,
    Mixture,
    SingularPower,
    SmoothDensity,
    beta_abs_linear_mean,
    beta_bound_constant,
    bound_constants,
    cdf,
    kill_boundary,
    measure_from_dict,
    measure_from_json,
    moment_sq_plus_comp_sq,
    moment_theta_one_minus_theta,
    partial_mean,
)

DIRAC_HALF = Atomic(((0.5, 1.0),))
INV_SQRT_2PIE = 1 / math.sqrt(2 * math.pi * math.e)


def parabola_density():
    return SmoothDensity(
        pdf_fn=lambda u: 6 * u * (1 - u),
        pdf_prime_fn=lambda u: 6 - 12 * u,
        envelope=1.5,
        name="parabola",
    )


ALL_KINDS = [
    Beta(1, 1),
    Beta(2, 3),
    Beta(0.5, 0.5),
    SingularPower(0.2),
    SingularPower(0.8),
    DIRAC_HALF,
    Atomic(((0.0, 0.25), (0.3, 0.25), (1.0, 0.5))),
    Mixture(((0.25, Atomic(((0.0, 1.0),))), (0.75, Beta(2, 2)))),
    parabola_density(),
]


class TestConstruction:
    @pytest.mark.parametrize("a,b", [(0, 1), (-1, 2), (1, math.inf), (math.nan, 1)])
    def test_beta_rejects_bad_parameters(self, a, b):
        with pytest.raises(ValueError):
            Beta(a, b)

    @pytest.mark.parametrize("gamma", [0.0, 1.0, -0.3, 1.5])
    def test_singular_power_rejects(self, gamma):
        with pytest.raises(ValueError):
            SingularPower(gamma)

    def test_singular_power_normalising_constant(self):
        for g in (0.2, 0.5, 0.8):
            assert SingularPower(g).norm_const == pytest.approx(g / 0.25 ** g, rel=1e-15)

    @pytest.mark.parametrize(
        "atoms",
        [(), ((0.5, 0.6),), ((1.2, 1.0),), ((0.2, -0.5), (0.4, 1.5))],
    )
    def test_atomic_rejects(self, atoms):
        with pytest.raises(ValueError):
            Atomic(atoms)

    def test_smooth_density_must_normalise(self):
        with pytest.raises(ValueError):
            SmoothDensity(pdf_fn=lambda u: 2 * np.ones_like(u), pdf_prime_fn=lambda u: 0 * u)

    def test_smooth_density_rejects_nonintegrable_exponent(self):
        with pytest.raises(ValueError):
            SmoothDensity(pdf_fn=lambda u: 1 / u, pdf_prime_fn=lambda u: -1 / u ** 2, singular_exponents=(-1.0, 0.0))


class TestMoments:
    def test_theta_one_minus_theta_examples(self):
        assert moment_theta_one_minus_theta(Beta(1, 1)) == pytest.approx(1 / 6, abs=1e-15)
        assert moment_theta_one_minus_theta(Beta(2, 3)) == pytest.approx(1 / 5, abs=1e-15)
        assert moment_theta_one_minus_theta(DIRAC_HALF) == pytest.approx(1 / 4, abs=1e-15)

    def test_sq_plus_comp_sq_examples(self):
        assert moment_sq_plus_comp_sq(DIRAC_HALF) == pytest.approx(0.5, abs=1e-15)
        assert moment_sq_plus_comp_sq(Beta(1, 1)) == pytest.approx(2 / 3, abs=1e-15)
        assert moment_sq_plus_comp_sq(Atomic(((0.0, 1.0),))) == pytest.approx(1.0, abs=1e-15)

    @pytest.mark.parametrize("mu", ALL_KINDS, ids=lambda m: m.label() if hasattr(m, "label") else str(m))
    def test_moments_match_partial_means(self, mu):
        assert mu.partial_mean(0.0, 1.0) == pytest.approx(mu.mean(), abs=1e-10)
        v = moment_sq_plus_comp_sq(mu)
        assert 0.5 - 1e-15 <= v <= 1.0 + 1e-15

    def test_moment_quadrature_path(self):
        sd = parabola_density()
        assert moment_theta_one_minus_theta(sd) == pytest.approx(0.2, abs=1e-12)

    def test_singular_power_moments_against_quadrature(self):
        for g in (0.2, 0.5, 0.8):
            mu = SingularPower(g)
            c = mu.norm_const
            # algebraic weight s**(g-1) handles the singularity at s = 0
            m1 = spi.quad(lambda s: c * (0.5 + s), 0, 0.25, weight="alg", wvar=(g - 1, 0))[0]
            m2 = spi.quad(lambda s: c * (0.5 + s) ** 2, 0, 0.25, weight="alg", wvar=(g - 1, 0))[0]
            assert mu.mean() == pytest.approx(m1, abs=1e-13)
            assert mu.second_moment() == pytest.approx(m2, abs=1e-13)


class TestCdfAndPartialMean:
    def test_examples(self):
        assert cdf(Beta(1, 1), 0.3) == pytest.approx(0.3, abs=1e-15)
        assert cdf(SingularPower(0.5), 0.75) == pytest.approx(1.0, abs=1e-15)
        assert cdf(SingularPower(0.5), 0.5625) == pytest.approx(0.5, abs=1e-15)
        assert partial_mean(Beta(1, 1), 0, 1) == pytest.approx(0.5, abs=1e-15)
        assert partial_mean(Beta(1, 1), 0, 0.5) == pytest.approx(0.125, abs=1e-15)
        assert partial_mean(SingularPower(0.5), 0.5, 0.75) == pytest.approx(0.5 + 0.25 * 0.5 / 1.5, abs=1e-15)

    def test_partial_mean_rejects_bad_interval(self):
        with pytest.raises(ValueError):
            partial_mean(Beta(1, 1), 0.6, 0.2)

    @pytest.mark.parametrize("mu", ALL_KINDS, ids=lambda m: type(m).__name__)
    def test_cdf_monotone_with_correct_limits(self, mu):
        x = np.linspace(-0.5, 1.5, 2001)
        f = np.asarray(mu.cdf(x), dtype=float)
        assert np.all(np.diff(f) >= -1e-15)
        assert mu.cdf(-1e-12) == pytest.approx(0.0, abs=1e-15)
        assert mu.cdf(1.0) == pytest.approx(1.0, abs=1e-12)

    def test_beta_cdf_against_incomplete_beta(self):
        mu = Beta(2.5, 1.7)
        for x in (0.1, 0.3, 0.77):
            assert mu.cdf(x) == pytest.approx(sf.beta_inc(x, 2.5, 1.7) / sf.beta_fn(2.5, 1.7), rel=1e-12)

    def test_beta_partial_mean_against_quadrature(self):
        mu = Beta(0.5, 2.5)
        ref = spi.quad(lambda t: t * mu.pdf(t), 0.05, 0.6)[0]
        assert mu.partial_mean(0.05, 0.6) == pytest.approx(ref, abs=1e-12)

    def test_atomic_cdf_is_right_continuous(self):
        mu = Atomic(((0.3, 0.4), (0.7, 0.6)))
        assert mu.cdf(0.3) == pytest.approx(0.4)
        assert mu.cdf_left(0.3) == 0.0
        assert mu.partial_mean(0.3, 0.7) == pytest.approx(0.42)
        assert mu.partial_mean_open(0.3, 0.7) == 0.0

    def test_upper_tail_near_one(self):
        mu = Beta(2, 3)
        d = 1e-6
        assert mu.upper_tail(d) == pytest.approx(4 * d ** 3 - 3 * d ** 4, rel=1e-12)


class TestConstants:
    def test_uniform_example(self):
        bc = bound_constants(Beta(1, 1))
        assert bc.c1 == pytest.approx(1 / 6, abs=1e-15)
        assert bc.c2 == pytest.approx(7 / 6 + 3 * INV_SQRT_2PIE, abs=1e-14)
        assert bc.method == "closed_form"

    def test_beta_2_3_c1(self):
        assert bound_constants(Beta(2, 3)).c1 == pytest.approx(0.2, abs=1e-15)

    def test_closed_form_matches_quadrature_on_grid(self):
        grid = np.linspace(0.5, 5.0, 6)
        worst = 0.0
        for a in grid:
            for b in grid:
                mu = Beta(float(a), float(b))
                q = bound_constants(mu, method="quadrature")
                worst = max(worst, abs(q.c2 - q.c_alpha_beta))
                assert q.c1 == pytest.approx(moment_theta_one_minus_theta(mu), abs=1e-12)
                assert q.c2 >= 3 * INV_SQRT_2PIE
                assert 0 < q.c1 <= 0.25
        assert worst <= 1e-8

    def test_generic_density_matches_beta(self):
        sd = parabola_density()
        assert bound_constants(sd).c2 == pytest.approx(beta_bound_constant(2, 2), abs=1e-10)

    def test_atomic_rejected(self):
        with pytest.raises(ValueError):
            bound_constants(DIRAC_HALF)

    def test_singular_power_reports_divergence(self):
        with pytest.raises(DivergentIntegralError):
            bound_constants(SingularPower(0.5))


class TestAbsLinearMean:
    def test_examples(self):
        assert beta_abs_linear_mean(1, 1, 2, -1) == pytest.approx(0.5, abs=1e-15)
        assert beta_abs_linear_mean(1, 1, 0, -3) == 3

    @pytest.mark.parametrize(
        "alpha,beta,a,b",
        [(2, 3, 1.5, -0.6), (2, 3, -1.5, 0.6), (0.5, 0.7, 1.0, 0.2), (0.5, 0.7, 1.0, -1.3), (4, 1.5, 3.0, -0.1)],
    )
    def test_against_quadrature(self, alpha, beta, a, b):
        mu = Beta(alpha, beta)
        pts = [-b / a] if 0 < -b / a < 1 else None
        ref = spi.quad(lambda t: abs(a * t + b) * mu.pdf(t), 0, 1, points=pts, epsabs=1e-14, limit=200)[0]
        assert beta_abs_linear_mean(alpha, beta, a, b) == pytest.approx(ref, abs=1e-10)

    def test_rejects_bad_parameters(self):
        with pytest.raises(ValueError):
            beta_abs_linear_mean(0, 1, 1, 0)


class TestKillBoundary:
    def test_renormalises_atoms(self):
        mu, q = kill_boundary(Atomic(((0.0, 0.25), (0.5, 0.75))))
        assert q == pytest.approx(0.25)
        assert mu == DIRAC_HALF

    def test_interior_measure_untouched(self):
        mu = Beta(2, 2)
        assert kill_boundary(mu) == (mu, 0.0)

    def test_all_mass_on_endpoints_rejected(self):
        with pytest.raises(ValueError):
            kill_boundary(Atomic(((0.0, 0.5), (1.0, 0.5))))

    def test_mixture_output_has_unit_mass_off_boundary(self):
        mixed = Mixture(((0.3, Atomic(((0.0, 0.5), (1.0, 0.5)))), (0.7, Beta(2, 2))))
        mu, q = kill_boundary(mixed)
        assert q == pytest.approx(0.3)
        assert mu.endpoint_mass() == 0.0
        assert mu.cdf(1.0) - mu.cdf_left(0.0) == pytest.approx(1.0)


class TestSerialisation:
    @pytest.mark.parametrize("mu", [Beta(2, 3), SingularPower(0.5), DIRAC_HALF,
                                    Mixture(((0.5, Atomic(((0.0, 1.0),))), (0.5, Beta(2, 2))))])
    def test_roundtrip(self, mu):
        assert measure_from_json(json.dumps(mu.to_dict())) == mu

    def test_from_file(self, tmp_path):
        p = tmp_path / "m.json"
        p.write_text('{"kind": "beta", "alpha": 2, "beta": 3}')
        assert measure_from_json(str(p)) == Beta(2, 3)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            measure_from_dict({"kind": "cauchy"})

    def test_tabulated_density_reproduces_beta(self):
        x = np.linspace(0, 1, 11)
        table = {"kind": "tabulated", "table": [[t, 6 * t * (1 - t), 6 - 12 * t] for t in x]}
        mu = measure_from_dict(table)
        for t in (0.1, 0.37, 0.9):
            assert mu.cdf(t) == pytest.approx(Beta(2, 2).cdf(t), abs=1e-12)
        assert bound_constants(mu).c2 == pytest.approx(beta_bound_constant(2, 2), abs=1e-9)
        again = measure_from_json(json.dumps(mu.to_dict()))
        assert again.cdf(0.37) == pytest.approx(mu.cdf(0.37), abs=1e-15)

    def test_tabulated_requires_increasing_grid(self):
        with pytest.raises(ValueError):
            measure_from_dict({"kind": "tabulated", "table": [[0.5, 1, 0], [0.2, 1, 0]]})


class TestSampling:
    def test_singular_power_support(self):
        s = SingularPower(0.5).sample(np.random.default_rng(3), 100_000)
        assert np.all((s > 0.5) & (s < 0.75))

    def test_beta_sample_mean(self):
        s = Beta(2, 3).sample(np.random.default_rng(4), 200_000)
        assert abs(s.mean() - 0.4) < 5 * 0.2 / math.sqrt(200_000)

    def test_smooth_density_rejection_sampler(self):
        s = parabola_density().sample(np.random.default_rng(5), 100_000)
        assert abs(s.mean() - 0.5) < 5 * math.sqrt(0.05 / 100_000)

    def test_smooth_density_without_envelope_rejected(self):
        sd = SmoothDensity(pdf_fn=lambda u: 6 * u * (1 - u), pdf_prime_fn=lambda u: 6 - 12 * u)
        with pytest.raises(ValueError):
            sd.sample(np.random.default_rng(0), 10)

    def test_atomic_and_mixture_sampling(self):
        rng = np.random.default_rng(6)
        s = Atomic(((0.2, 0.5), (0.8, 0.5))).sample(rng, 10_000)
        assert set(np.unique(s)) == {0.2, 0.8}
        m = Mixture(((0.5, DIRAC_HALF), (0.5, Beta(2, 2)))).sample(rng, 10_000)
        assert m.shape == (10_000,)
