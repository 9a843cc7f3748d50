"""Correlated pair distribution and the phi statistic.

phi(f, g) = sum_z fhat(z)^2 g(z) is evaluated in exact integer
arithmetic (N^2 phi is an integer), so the small closed-form cases here
carry zero tolerance.  The conditional estimator is checked as the exact
conditional expectation of phi over the rounding randomness by a paired
Monte Carlo run on one frozen real-valued draw.
"""

import math

import numpy as np
import pytest

from certlab.boolfn import BooleanFunction, character_values, random_function, wht
from certlab.rng import make_rng
from certlab.sqforrelation import (
    BooleanPair,
    BudgetExceeded,
    DistParams,
    acceptance,
    hamming_balance_rate,
    long_list_D,
    mean_phi_experiment,
    orthonormal_entry,
    orthonormal_transform,
    phi,
    phi_conditional,
    phi_experiment_from_values,
    phi_values,
    round_to_boolean,
    row_sum_tail_check,
    sample_D,
    sample_gprime,
    stream_D,
    trnc,
    truncation_rate,
)


def test_epsilon_definition():
    params = DistParams(8, 1.0)
    assert params.epsilon == pytest.approx(1.0 / math.log(256))
    assert params.size == 256
    with pytest.raises(ValueError):
        DistParams(8, -1.0)


def test_orthonormal_transform_is_an_involution():
    v = np.arange(16.0)
    assert np.allclose(orthonormal_transform(orthonormal_transform(v)), v)
    # rows have unit norm: transform of a basis vector has norm 1
    e0 = np.zeros(16)
    e0[0] = 1.0
    assert np.linalg.norm(orthonormal_transform(e0)) == pytest.approx(1.0)


def test_orthonormal_entry_sign_pattern():
    n = 3
    for i, j in [(0, 0), (3, 5), (7, 7), (2, 6)]:
        sign = -1 if bin(i & j).count("1") % 2 else 1
        assert orthonormal_entry(n, i, j) == pytest.approx(
            sign / math.sqrt(8)
        )


def test_gprime_covariance_structure():
    # X iid N(0, eps); Y = HX so cov(X_i, Y_j) = eps * H_ij
    params = DistParams(4, 2.0)
    eps = params.epsilon
    xs = np.empty((4000, 16))
    ys = np.empty((4000, 16))
    rng = make_rng(40, 0)
    for t in range(4000):
        pair = sample_gprime(params, rng)
        xs[t] = pair.X
        # recover Y from Yp = Y^2 - eps only up to sign; use the transform
        ys[t] = orthonormal_transform(pair.X)
    for (i, j) in [(0, 0), (1, 3), (5, 2)]:
        emp = float(np.mean(xs[:, i] * ys[:, j]))
        assert emp == pytest.approx(eps * orthonormal_entry(4, i, j),
                                    abs=5 * eps / math.sqrt(4000))


def test_gprime_yp_is_centered():
    params = DistParams(6, 2.0)
    rng = make_rng(40, 1)
    tot = np.zeros(64)
    for _ in range(2000):
        tot += sample_gprime(params, rng).Yp
    mean = tot / 2000
    assert np.all(np.abs(mean) < 6 * params.epsilon * math.sqrt(2 / 2000))


def test_trnc_clamps_to_unit_interval():
    v = np.array([-3.0, -1.0, -0.2, 0.0, 0.9, 1.0, 4.5])
    out = trnc(v)
    assert out.tolist() == [-1.0, -1.0, -0.2, 0.0, 0.9, 1.0, 1.0]


def test_round_to_boolean_marginal():
    # P[+1] = (1 + c) / 2 per coordinate: 0.75 for the f half at c = 0.5,
    # 0.25 for the g half at c = -0.5
    from certlab.sqforrelation import RealPair

    pair = RealPair(np.full(512, 0.5), np.full(512, -0.5))
    rng = make_rng(41, 0)
    acc_f = 0.0
    acc_g = 0.0
    for _ in range(500):
        bp = round_to_boolean(pair, rng)
        acc_f += float(np.mean(bp.f.values == 1))
        acc_g += float(np.mean(bp.g.values == 1))
    assert acc_f / 500 == pytest.approx(0.75, abs=0.01)
    assert acc_g / 500 == pytest.approx(0.25, abs=0.01)


# ---------------------------------------------------------------- phi

def test_phi_closed_forms():
    f = BooleanFunction(2, np.array([1, 1, 1, -1], dtype=np.int8))
    ones = BooleanFunction(2, np.ones(4, dtype=np.int8))
    # g identically +1 sums the whole squared spectrum: phi = 1 exactly
    g_plus = BooleanFunction(2, np.array([1, 1, 1, 1], dtype=np.int8))
    assert phi(BooleanPair(f, g_plus)) == 1.0
    g_minus = BooleanFunction(2, np.array([-1, -1, -1, -1], dtype=np.int8))
    assert phi(BooleanPair(f, g_minus)) == -1.0
    # g = chi_1 as a +-1 table: phi = 1/4 + 1/4 - 1/4 - 1/4 = 0
    g_parity = BooleanFunction(2, character_values(2, 1))
    assert phi(BooleanPair(f, g_parity)) == 0.0
    # g = f's own sign table on the squared spectrum
    assert phi(BooleanPair(f, f)) == 0.5
    assert acceptance(BooleanPair(f, f)) == 0.75
    assert phi(BooleanPair(ones, ones)) == 1.0


def test_phi_negation_antisymmetry():
    f = random_function(5, make_rng(42, 0))
    g = random_function(5, make_rng(42, 1))
    g_neg = BooleanFunction(5, -g.values)
    assert phi(BooleanPair(f, g)) + phi(BooleanPair(f, g_neg)) == 0.0


def test_phi_times_size_squared_is_integer():
    f = random_function(6, make_rng(42, 2))
    g = random_function(6, make_rng(42, 3))
    val = phi(BooleanPair(f, g)) * 64 * 64
    assert val == round(val)


def test_sample_D_produces_valid_pair():
    params = DistParams(5, 2.0)
    pair = sample_D(params, make_rng(43, 0))
    assert pair.f.n == 5 and pair.g.n == 5
    assert np.all(np.abs(pair.f.values) == 1)


def test_phi_conditional_is_conditional_expectation():
    # freeze one real draw; average phi over 4000 independent roundings
    # and compare with the closed-form conditional value
    params = DistParams(5, 1.0)
    pair = sample_gprime(params, make_rng(44, 0))
    cond = phi_conditional(pair)
    rng = make_rng(44, 1)
    vals = np.empty(4000)
    for i in range(4000):
        vals[i] = phi(round_to_boolean(pair, rng))
    err = 2.5758 * float(vals.std()) / math.sqrt(4000)
    assert float(vals.mean()) == pytest.approx(cond, abs=max(err, 1e-3))


def test_mean_phi_experiment_fields_and_signal():
    params = DistParams(8, 1.0)
    exp = mean_phi_experiment(params, 5000, "conditional", make_rng(45, 0))
    eps2 = params.epsilon ** 2
    assert exp.target_lower_bound == pytest.approx(eps2)
    assert exp.gprime_prediction == pytest.approx(eps2 * (2 - 2 / 256))
    assert exp.trials == 5000
    assert exp.estimator == "conditional"
    assert exp.mean - exp.ci99 > eps2 / 2


def test_uniform_pairs_have_no_signal():
    params = DistParams(8, 1.0)
    exp = mean_phi_experiment(params, 5000, "plain", make_rng(45, 1),
                              uniform_pairs=True)
    assert exp.uniform_pairs
    assert abs(exp.mean) < 4 * exp.ci99 + 1e-3


def test_phi_values_merge_matches_single_call():
    params = DistParams(6, 2.0)
    vals = phi_values(params, 300, "conditional", make_rng(46, 0))
    exp = phi_experiment_from_values(params, vals, "conditional", False)
    whole = mean_phi_experiment(params, 300, "conditional", make_rng(46, 0))
    assert exp.mean == whole.mean
    assert exp.ci99 == whole.ci99


def test_plain_and_conditional_estimators_agree_in_mean():
    params = DistParams(6, 1.0)
    plain = mean_phi_experiment(params, 20000, "plain", make_rng(47, 0))
    cond = mean_phi_experiment(params, 20000, "conditional", make_rng(47, 1))
    # same expectation; conditional has much smaller variance
    assert plain.mean == pytest.approx(cond.mean,
                                       abs=plain.ci99 + cond.ci99)
    assert cond.ci99 < plain.ci99


# ---------------------------------------------------------------- rates

def test_truncation_is_rare():
    params = DistParams(10, 20.0)
    rate, ci = truncation_rate(params, 2000, make_rng(48, 0))
    assert rate <= 2.0 / params.size ** 2 + ci


def test_row_sum_tail_check_fields():
    params = DistParams(10, 20.0)
    res = row_sum_tail_check(params, 2000, make_rng(48, 1))
    assert res.rate <= res.bound + res.ci99
    assert res.threshold == pytest.approx(3 * math.sqrt(params.size))
    assert res.bound == pytest.approx(2 * math.exp(-1 / params.epsilon))


def test_hamming_balance_rate_reports_fail_fraction():
    params = DistParams(8, 20.0)
    rate, ci = hamming_balance_rate(params, 2000, make_rng(48, 2))
    assert 0.0 <= rate <= 1.0
    assert ci > 0.0


# ---------------------------------------------------------------- lists

def test_long_list_and_stream_agree_on_length():
    params = DistParams(4, 2.0)
    lst = long_list_D(params, 50, make_rng(49, 0))
    assert len(lst) == 50
    streamed = list(stream_D(params, 50, make_rng(49, 0)))
    assert len(streamed) == 50
    assert streamed[0].f == lst[0].f
    assert streamed[-1].g == lst[-1].g


def test_long_list_budget_cap():
    params = DistParams(4, 2.0)
    with pytest.raises(BudgetExceeded):
        long_list_D(params, (1 << 20) + 1, make_rng(49, 1))
