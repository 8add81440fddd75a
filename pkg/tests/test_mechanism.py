import itertools
import math

import numpy as np
import pytest

from dpsynth import Dataset, InvalidParameterError, NoiseSource, PrivacyParams, ProbTable, empirical_distribution
from dpsynth.mechanism import (
    laplace_density,
    laplace_from_uniform,
    perturb_table,
    sample_laplace,
    sensitivity_of_marginal,
)


def test_laplace_median_at_zero_uniform():
    assert laplace_from_uniform(0.0, 3.0) == 0.0


def test_laplace_inverse_cdf_formula():
    for u in (-0.4, -0.1, 0.25, 0.49):
        expected = -2.0 * math.copysign(1, u) * math.log(1 - 2 * abs(u))
        assert laplace_from_uniform(u, 2.0) == pytest.approx(expected, rel=1e-14)


def test_laplace_moments():
    draws = NoiseSource(7).laplace(1.0, size=10**6)
    assert abs(draws.mean()) < 0.01
    assert abs(draws.var() - 2.0) < 0.05


def test_laplace_density_ratio_bound():
    xs = np.linspace(-10, 10, 2001)
    for scale in (0.1, 1.0, 5.0):
        for shift in (-3.0, -0.5, 0.2, 4.0):
            ratio = laplace_density(xs, scale) / laplace_density(xs + shift, scale)
            assert np.all(ratio <= np.exp(abs(shift) / scale) * (1 + 1e-12))


def test_dp_ratio_with_calibrated_scale():
    sens, eps = 0.01, 0.7
    xs = np.linspace(-1, 1, 4001)
    ratio = laplace_density(xs, sens / eps) / laplace_density(xs - sens, sens / eps)
    assert ratio.max() <= math.exp(eps) * (1 + 1e-12)


def test_sample_laplace_rejects_bad_scale(noise):
    for bad in (0.0, -1.0, float("nan")):
        with pytest.raises(InvalidParameterError):
            sample_laplace(noise, bad)


def test_sample_laplace_advances_stream():
    src = NoiseSource(1)
    a, b = sample_laplace(src, 1.0), sample_laplace(src, 1.0)
    assert a != b and src.counter == 2


def test_reproducible_streams():
    a = NoiseSource(99).laplace(0.5, size=100)
    b = NoiseSource(99).laplace(0.5, size=100)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, NoiseSource(100).laplace(0.5, size=100))


def test_derived_streams_ignore_parent_consumption():
    p1, p2 = NoiseSource(5), NoiseSource(5)
    p2.uniform(1000)
    assert np.array_equal(p1.derive(3).uniform(10), p2.derive(3).uniform(10))
    assert not np.array_equal(p1.derive(3).uniform(10), p1.derive(4).uniform(10))


def test_uniform_open_interval():
    u = NoiseSource(0).uniform(10**6)
    assert u.min() > 0 and u.max() < 1


def test_perturb_vanishing_noise():
    t = ProbTable((0, 1), [0.1, 0.2, 0.3, 0.4])
    out = perturb_table(t, 1e-15, NoiseSource(3))
    assert np.allclose(out.values, t.values, atol=1e-12)
    assert not out.consistent and out.scope == t.scope and out.size == 4
    assert t.values.tolist() == [0.1, 0.2, 0.3, 0.4]


def test_perturb_replays_seeded_uniforms():
    t = ProbTable((2, 0), [0.25, 0.25, 0.25, 0.25])
    out = perturb_table(t, 0.1, NoiseSource(42))
    # independent replay: raw uniforms through the closed-form inverse CDF
    u = NoiseSource(42).uniform(4) - 0.5
    expected = [0.25 - 0.1 * math.copysign(1, x) * math.log(1 - 2 * abs(x)) for x in u.tolist()]
    assert np.allclose(out.values, expected, rtol=0, atol=1e-15)


def test_union_bound_tail_frequency():
    d, n, eps, delta, m, trials = 4, 10_000, 1.0, 0.05, 8, 2000
    scale = d / (n * eps)
    t = ProbTable.uniform((0, 1, 2))
    master = NoiseSource(11)
    bound = scale * math.log(m / delta)
    ok = sum(
        np.abs(perturb_table(t, scale, master.derive(i)).values - t.values).max() <= bound for i in range(trials)
    )
    sigma = math.sqrt(trials * delta * (1 - delta))
    assert ok >= (1 - delta) * trials - 3 * sigma


def test_sensitivity_values():
    assert sensitivity_of_marginal(1) == 1.0
    assert sensitivity_of_marginal(100) == 0.01
    with pytest.raises(InvalidParameterError):
        sensitivity_of_marginal(0)


def test_sensitivity_exhaustive_adjacent_datasets():
    n, d = 3, 2
    cells = list(itertools.product([0, 1], repeat=d))
    sens = sensitivity_of_marginal(n)
    l1_seen = set()
    for combo in itertools.product(cells, repeat=n):
        base = np.array(combo)
        p1 = empirical_distribution(Dataset(base), (0, 1)).values
        for pos in range(n):
            for repl in cells:
                other = base.copy()
                other[pos] = repl
                p2 = empirical_distribution(Dataset(other), (0, 1)).values
                diff = np.abs(p1 - p2)
                assert diff.max() <= sens + 1e-15
                l1 = round(diff.sum() * n, 12)
                l1_seen.add(l1)
    # a replacement moves 1/n of mass out of one cell and into another
    assert l1_seen == {0.0, 2.0}


def test_privacy_params():
    p = PrivacyParams(1.0, 0.05, 1000, 4)
    assert p.per_marginal_scale == pytest.approx(4 / 1000)
    assert p.full_domain_scale == pytest.approx(1 / 1000)
    assert PrivacyParams(1.0, 0.05, 1000, 4, replacement_sensitivity=True).per_marginal_scale == pytest.approx(8 / 1000)
    for bad in [(0, 0.1, 1, 1), (1, 0, 1, 1), (1, 1, 1, 1), (1, 0.1, 0, 1), (1, 0.1, 1, 0)]:
        with pytest.raises(InvalidParameterError):
            PrivacyParams(*bad)
