import math

import numpy as np
import pytest

from dpsynth import (
    NoiseSource,
    PrivacyParams,
    ProbTable,
    SourceDistribution,
    chain_structure,
    empirical_distribution,
    full_domain_laplace,
    joint_distribution,
    l2_project,
    normalize,
    privbayes_fit,
    random_net,
    synthesize_dataset,
    tv_distance,
)
from dpsynth.bayesnet import net_from_conditionals, sample
from dpsynth.domain import conditional_rows, marginalize
from dpsynth.errors import DenseGuardError, EmptyDatasetError, InvalidParameterError
from dpsynth.evaluation import bn_source, bound_conditional, bound_full_domain, bound_tv_privbayes


def _source(d, k, n, seed=1):
    return SourceDistribution.from_table(bn_source(d, k, seed), n)


def test_vanishing_noise_recovers_source():
    src = _source(4, 1, 1000)
    params = PrivacyParams(1e12, 0.05, 1000, 4)
    for post in ("norm", "l2"):
        net = privbayes_fit(src, chain_structure(4, 1), params, post, NoiseSource(0))
        assert tv_distance(joint_distribution(net), src.table) <= 1e-6


def test_replay_oracle_normalization():
    d, n, eps = 3, 500, 1.0
    src = _source(d, 1, n, seed=5)
    s = chain_structure(d, 1)
    net = privbayes_fit(src, s, PrivacyParams(eps, 0.05, n, d), "norm", NoiseSource(21))
    replay = NoiseSource(21)
    scale = d / (n * eps)
    for i in range(d):
        exact = marginalize(src.table, s.family(i)).values
        u = replay.uniform(exact.size) - 0.5
        noisy = exact - scale * np.sign(u) * np.log(1 - 2 * np.abs(u))
        clipped = np.maximum(noisy, 0)
        assert np.allclose(net.marginals[i].values, clipped / clipped.sum(), atol=1e-15)


def test_replay_oracle_dataset_source():
    data_src = SourceDistribution.from_dataset(
        sample(random_net(chain_structure(3, 1), NoiseSource(2)), 300, NoiseSource(3))
    )
    s = chain_structure(3, 1)
    net = privbayes_fit(data_src, s, PrivacyParams(2.0, 0.05, 300, 3), "l2", NoiseSource(4))
    replay = NoiseSource(4)
    for i in range(3):
        exact = empirical_distribution(data_src.dataset, s.family(i))
        noisy = exact.values + replay.laplace(3 / (300 * 2.0), exact.size)
        assert np.allclose(net.marginals[i].values, l2_project(ProbTable(exact.scope, noisy, False)).values, atol=1e-15)


def test_network_tv_bound_frequency():
    d, k, n, eps, delta, trials = 4, 1, 10**6, 1.0, 0.05, 200
    src = _source(d, k, n)
    s = chain_structure(d, k)
    params = PrivacyParams(eps, delta, n, d)
    bound = bound_tv_privbayes(n, d, k, eps, delta)
    master = NoiseSource(8)
    ok = sum(
        tv_distance(joint_distribution(privbayes_fit(src, s, params, "norm", master.derive(t))), src.table) <= bound
        for t in range(trials)
    )
    assert ok >= (1 - delta) * trials - 3 * math.sqrt(trials * delta * (1 - delta))


def test_conditional_error_bound():
    d, k, n, eps, delta, trials = 4, 1, 10**5, 1.0, 0.05, 300
    src = _source(d, k, n, seed=3)
    s = chain_structure(d, k)
    params = PrivacyParams(eps, delta, n, d)
    true_rows = [conditional_rows(marginalize(src.table, s.family(i))) for i in range(d)]
    parent_mass = [marginalize(src.table, s.family(i)).values.reshape(-1, 2).sum(axis=1) for i in range(d)]
    master = NoiseSource(9)
    ok = 0
    for t in range(trials):
        net = privbayes_fit(src, s, params, "norm", master.derive(t))
        good = True
        for i, rows in enumerate(net.conditional_tables()):
            for p, mass in enumerate(parent_mass[i]):
                if mass < 0.05:
                    continue
                err = np.abs(rows[p] - true_rows[i][p]).max()
                good &= err <= bound_conditional(n, d, k, eps, delta, mass)
        ok += good
    assert ok >= (1 - delta) * trials - 3 * math.sqrt(trials * delta * (1 - delta))


def test_outputs_consistent_under_huge_noise():
    src = _source(3, 1, 10)
    params = PrivacyParams(1e-3, 0.05, 10, 3)
    for post in ("norm", "l2"):
        net = privbayes_fit(src, chain_structure(3, 1), params, post, NoiseSource(1))
        assert all(m.consistent for m in net.marginals)
        assert joint_distribution(net).consistent


def test_monotone_in_n_and_epsilon():
    d, k = 4, 1
    s = chain_structure(d, k)

    def median_tv(n, eps):
        src = _source(d, k, n)
        params = PrivacyParams(eps, 0.05, n, d)
        master = NoiseSource(13)
        return np.median([
            tv_distance(joint_distribution(privbayes_fit(src, s, params, "norm", master.derive(t))), src.table)
            for t in range(60)
        ])

    by_n = [median_tv(n, 1.0) for n in (10**3, 10**4, 10**5)]
    by_eps = [median_tv(10**4, e) for e in (0.25, 1.0, 4.0)]
    assert by_n[0] >= by_n[1] >= by_n[2]
    assert by_eps[0] >= by_eps[1] >= by_eps[2]


def test_synthesize_dataset_guards_and_reproducibility():
    s = chain_structure(3, 1)
    det = net_from_conditionals(s, [[1.0], [1.0, 0.0], [0.0, 1.0]])
    with pytest.raises(EmptyDatasetError):
        synthesize_dataset(det, 0, NoiseSource(0))
    out = synthesize_dataset(det, 50, NoiseSource(0))
    assert np.all(out.records == [1, 0, 0])
    net = random_net(s, NoiseSource(1))
    assert synthesize_dataset(net, 1000, NoiseSource(5)) == synthesize_dataset(net, 1000, NoiseSource(5))


def test_full_domain_vanishing_noise():
    src = _source(5, 1, 100)
    out = full_domain_laplace(src, PrivacyParams(1e12, 0.05, 100, 5), NoiseSource(0))
    assert tv_distance(out, src.table) <= 1e-6


def test_full_domain_replay():
    src = _source(3, 1, 200, seed=4)
    out = full_domain_laplace(src, PrivacyParams(0.5, 0.05, 200, 3), NoiseSource(33))
    noisy = src.table.values + NoiseSource(33).laplace(1 / (200 * 0.5), 8)
    assert np.allclose(out.values, normalize(ProbTable(src.table.scope, noisy, False)).values, atol=1e-15)


def test_full_domain_frequency():
    d, n, eps, delta, trials = 6, 10**5, 1.0, 0.05, 200
    src = _source(d, 1, n)
    params = PrivacyParams(eps, delta, n, d)
    bound = bound_full_domain(n, d, eps, delta)
    master = NoiseSource(2)
    ok = sum(tv_distance(full_domain_laplace(src, params, master.derive(t)), src.table) <= bound for t in range(trials))
    assert ok >= (1 - delta) * trials - 3 * math.sqrt(trials * delta * (1 - delta))


def test_full_domain_dense_guard():
    big = SourceDistribution.from_table(ProbTable.uniform(tuple(range(21))), 10)
    with pytest.raises(DenseGuardError):
        full_domain_laplace(big, PrivacyParams(1.0, 0.05, 10, 21), NoiseSource(0))


def test_parameter_mismatches():
    src = _source(3, 1, 100)
    with pytest.raises(InvalidParameterError):
        privbayes_fit(src, chain_structure(3, 1), PrivacyParams(1.0, 0.05, 100, 4), "norm", NoiseSource(0))
    with pytest.raises(InvalidParameterError):
        privbayes_fit(src, chain_structure(3, 1), PrivacyParams(1.0, 0.05, 99, 3), "norm", NoiseSource(0))
    with pytest.raises(InvalidParameterError):
        SourceDistribution(table=ProbTable.uniform((0,)))
