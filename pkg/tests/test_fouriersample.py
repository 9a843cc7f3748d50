"""Spectrum sampling and the heaviness-band statistics.

Oracles: the Gaussian band masses are chi-square CDF identities
(integral of u^2 exp(-u^2/2)/sqrt(2pi) over [-a, a] equals
chi2.cdf(a^2, df=3)), and the sampler itself is checked by a
goodness-of-fit test against the exact squared-coefficient law.
"""

import math

import numpy as np
import pytest
from scipy import stats as sps

from certlab.boolfn import BooleanFunction, fourth_moment, random_function, wht
from certlab.fouriersample import (
    DimensionMismatch,
    EmptySamples,
    PgPbEstimate,
    estimate_pg_pb,
    fourier_sample,
    fourier_sample_many,
    gaussian_reference,
    hog_score,
    honest_sampler,
    pgpb_counts,
    pgpb_from_counts,
    tv_distance,
    uniform_sampler,
)
from certlab.rng import make_rng

# chi-square identities for the band masses of a standard normal weighted
# by u^2 (frozen; recomputed in test_gaussian_reference_identities)
P_B_REF = 0.19874804309879915       # chi2.cdf(1, df=3)
P_LIGHT4_REF = 0.7385358700508894   # chi2.cdf(4, df=3)
P_G_REF = P_LIGHT4_REF - P_B_REF    # 0.5397878269520902


def test_gaussian_reference_identities():
    p_b, p_light4, p_g = gaussian_reference()
    assert p_b == pytest.approx(sps.chi2.cdf(1.0, df=3), abs=1e-10)
    assert p_light4 == pytest.approx(sps.chi2.cdf(4.0, df=3), abs=1e-10)
    assert p_g == pytest.approx(p_light4 - p_b, abs=1e-12)
    assert p_b == pytest.approx(P_B_REF, abs=1e-10)
    assert p_light4 == pytest.approx(P_LIGHT4_REF, abs=1e-10)
    assert p_g == pytest.approx(P_G_REF, abs=1e-10)


def test_fourier_sample_goodness_of_fit():
    # fixed f, 20000 draws, chi-square against the exact squared spectrum
    f = random_function(5, make_rng(21, 0))
    spec = wht(f)
    draws = fourier_sample_many(spec, 20000, make_rng(21, 1))
    probs = spec.coeffs ** 2
    support = probs > 0
    counts = np.bincount(draws, minlength=f.size)
    assert counts[~support].sum() == 0  # never lands on a zero coefficient
    _, pvalue = sps.chisquare(counts[support], 20000 * probs[support])
    assert pvalue > 1e-3


def test_fourier_sample_single_matches_stream():
    f = random_function(4, make_rng(22, 0))
    spec = wht(f)
    one = fourier_sample(spec, make_rng(22, 1))
    assert 0 <= one < f.size
    assert spec.coeffs[one] != 0.0


def test_fourier_sample_point_mass():
    # f = chi_3 concentrates all mass on z = 3
    from certlab.boolfn import character_values

    f = BooleanFunction(4, character_values(4, 3))
    spec = wht(f)
    draws = fourier_sample_many(spec, 100, make_rng(23, 0))
    assert np.all(draws == 3)


def test_hog_score_is_mean_squared_coefficient():
    f = random_function(6, make_rng(24, 0))
    spec = wht(f)
    samples = np.array([0, 0, 5, 9])
    expected = float(np.mean(spec.coeffs[samples] ** 2))
    assert hog_score(spec, samples) == pytest.approx(expected)
    with pytest.raises(EmptySamples):
        hog_score(spec, np.array([], dtype=np.int64))


def test_honest_hog_approaches_fourth_moment():
    f = random_function(8, make_rng(25, 0))
    spec = wht(f)
    draws = fourier_sample_many(spec, 50000, make_rng(25, 1))
    assert hog_score(spec, draws) == pytest.approx(
        fourth_moment(spec), abs=5e-4
    )


def test_uniform_hog_approaches_one_over_n():
    f = random_function(8, make_rng(26, 0))
    spec = wht(f)
    rng = make_rng(26, 1)
    draws = rng.integers(0, f.size, size=50000)
    assert hog_score(spec, draws) == pytest.approx(1.0 / f.size, abs=5e-4)


# ---------------------------------------------------------------- band rates

def test_estimate_matches_chunked_counts():
    n_light, n_light4 = pgpb_counts(8, honest_sampler, 500, make_rng(27, 0))
    est = pgpb_from_counts(n_light, n_light4, 500)
    whole = estimate_pg_pb(8, honest_sampler, 500, make_rng(27, 0))
    assert est.p_b == whole.p_b
    assert est.p_light4 == whole.p_light4
    assert est.p_g == whole.p_g


def test_estimate_invariants():
    est = estimate_pg_pb(8, honest_sampler, 2000, make_rng(27, 1))
    assert 0.0 <= est.p_b <= est.p_light4 <= 1.0
    assert est.p_g == pytest.approx(est.p_light4 - est.p_b)
    assert est.trials == 2000
    assert set(est.ci99) == {"p_b", "p_light4", "p_g"}


def test_bad_estimate_rejected():
    with pytest.raises(ValueError):
        PgPbEstimate(0.5, 0.4, -0.1, 10, {"p_b": 0, "p_light4": 0, "p_g": 0})


def test_honest_rates_near_gaussian_reference():
    # n=10, 20000 trials: discrete rates sit within ~0.02 of the Gaussian
    # limit (the discrete law itself is a few 1e-3 away; see the
    # acceptance suite for the strict comparison)
    est = estimate_pg_pb(10, honest_sampler, 20000, make_rng(28, 0))
    assert est.p_b == pytest.approx(P_B_REF, abs=0.03)
    assert est.p_light4 == pytest.approx(P_LIGHT4_REF, abs=0.03)
    assert est.p_g == pytest.approx(P_G_REF, abs=0.03)


def test_uniform_sampler_rates_follow_plain_normal_band():
    # a uniform z makes N * fhat(z)^2 approximately chi-square(1), so the
    # light band carries erf(1/sqrt(2)) of the mass
    est = estimate_pg_pb(10, uniform_sampler, 10000, make_rng(28, 1))
    assert est.p_b == pytest.approx(math.erf(1 / math.sqrt(2)), abs=0.03)


def test_sampler_objects_sample_in_range():
    f = random_function(5, make_rng(29, 0))
    spec = wht(f)
    z_h = honest_sampler(f, spec, make_rng(29, 1))
    z_u = uniform_sampler(f, spec, make_rng(29, 2))
    assert 0 <= z_h < f.size and 0 <= z_u < f.size


# ---------------------------------------------------------------- tv distance

def test_tv_distance_axioms():
    f = random_function(5, make_rng(30, 0))
    g = random_function(5, make_rng(30, 1))
    sf, sg = wht(f), wht(g)
    assert tv_distance(sf, sf) == 0.0
    assert tv_distance(sf, sg) == tv_distance(sg, sf)
    assert 0.0 <= tv_distance(sf, sg) <= 1.0


def test_tv_distance_disjoint_spectra():
    from certlab.boolfn import character_values

    f = BooleanFunction(3, character_values(3, 1))
    g = BooleanFunction(3, character_values(3, 6))
    assert tv_distance(wht(f), wht(g)) == 1.0


def test_tv_distance_dimension_mismatch():
    f = random_function(3, make_rng(31, 0))
    g = random_function(4, make_rng(31, 1))
    with pytest.raises(DimensionMismatch):
        tv_distance(wht(f), wht(g))
