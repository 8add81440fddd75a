import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dpsynth import (
    BayesNetStructure,
    DegreeViolation,
    NoiseSource,
    NoisyBayesNet,
    ProbTable,
    StructureError,
    TopologyViolation,
    chain_structure,
    empirical_distribution,
    five_node_structure,
    greedy_structure,
    joint_distribution,
    net_from_conditionals,
    random_net,
    sample,
    tv_distance,
    validate_structure,
)
from dpsynth.bayesnet import fit_exact

from conftest import brute_cells, random_table


def test_five_node_example_validates():
    # 1-based labels translated to 0-based
    one_based = {1: [], 2: [1], 3: [1, 2], 4: [2, 3], 5: [3, 4]}
    parents = tuple(tuple(j - 1 for j in one_based[i]) for i in range(1, 6))
    s = validate_structure(BayesNetStructure(5, parents, 2))
    assert s == five_node_structure()


def test_degree_violation_names_node():
    s = BayesNetStructure(3, ((), (0,), (0, 1, 2)), 2)
    with pytest.raises(DegreeViolation) as info:
        validate_structure(s)
    assert info.value.node == 2 and "node 2" in str(info.value)


def test_forward_edge_is_topology_violation():
    s = BayesNetStructure(3, ((), (2,), ()), 1)
    with pytest.raises(TopologyViolation) as info:
        validate_structure(s)
    assert info.value.node == 1 and "2 -> 1" in str(info.value)


def test_self_edge_is_topology_violation():
    with pytest.raises(TopologyViolation):
        validate_structure(BayesNetStructure(2, ((), (1,)), 1))


def test_structure_json_round_trip():
    s = five_node_structure()
    assert BayesNetStructure.from_json(s.to_json()) == s
    with pytest.raises(StructureError):
        BayesNetStructure.from_json('{"d": 2, "k": 1}')
    with pytest.raises(StructureError) as info:
        BayesNetStructure.from_json('{"d": 2, "k": 1, "parents": [[], ["a"]]}')
    assert info.value.node == 1


def test_joint_of_independent_uniforms():
    s = BayesNetStructure(2, ((), ()), 0)
    net = NoisyBayesNet(s, (ProbTable.uniform((0,)), ProbTable.uniform((1,))))
    assert np.allclose(joint_distribution(net).values, 0.25)


def test_joint_of_copy_edge():
    s = chain_structure(2, 1)
    net = NoisyBayesNet(s, (ProbTable((0,), [0.5, 0.5]), ProbTable((1, 0), [0.5, 0.0, 0.0, 0.5])))
    assert np.allclose(joint_distribution(net).values, [0.5, 0, 0, 0.5])


def _brute_joint(net):
    """Per-cell product of conditionals computed by explicit summation."""
    d = net.d
    out = []
    for cell in brute_cells(d):
        prob = 1.0
        for i, m in enumerate(net.marginals):
            scope = m.scope
            num = den = 0.0
            for c, assign in enumerate(brute_cells(len(scope))):
                named = dict(zip(scope, assign))
                if all(named[j] == cell[j] for j in scope[1:]):
                    den += m.values[c]
                    if named[i] == cell[i]:
                        num += m.values[c]
            prob *= num / den if den >= 1e-12 else 0.5
        out.append(prob)
    return np.array(out)


def test_five_node_joint_matches_product_oracle(rng):
    s = five_node_structure()
    marginals = tuple(random_table(rng, s.family(i)) for i in range(5))
    net = NoisyBayesNet(s, marginals)
    joint = joint_distribution(net)
    assert joint.values.size == 32
    assert np.allclose(joint.values, _brute_joint(net), atol=1e-14)


def test_joint_with_zero_mass_parent_uses_uniform():
    s = chain_structure(2, 1)
    net = NoisyBayesNet(s, (ProbTable((0,), [1.0, 0.0]), ProbTable((1, 0), [0.2, 0.8, 0.0, 0.0])))
    assert np.allclose(joint_distribution(net).values, _brute_joint(net))
    assert np.allclose(joint_distribution(net).values, [0.2, 0, 0.8, 0])


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 6), st.integers(0, 3), st.booleans())
def test_joint_always_consistent(seed, d, k, sparse):
    rng = np.random.default_rng(seed)
    s = chain_structure(d, k)
    marginals = []
    for i in range(d):
        vals = rng.random(1 << len(s.family(i)))
        if sparse:
            vals[rng.random(vals.size) < 0.5] = 0.0
            if vals.sum() == 0:
                vals[0] = 1.0
        marginals.append(ProbTable(s.family(i), vals / vals.sum()))
    joint = joint_distribution(NoisyBayesNet(s, tuple(marginals)))
    assert joint.consistent and abs(joint.values.sum() - 1) <= 1e-9


def test_sample_deterministic_net():
    s = chain_structure(3, 1)
    # x0 = 1, x1 = x0, x2 = 1 - x1
    net = net_from_conditionals(s, [[1.0], [0.0, 1.0], [1.0, 0.0]])
    data = sample(net, 1000, NoiseSource(0))
    assert np.all(data.records == [1, 1, 0])


def test_sample_reproducible():
    net = random_net(five_node_structure(), NoiseSource(1))
    a = sample(net, 5000, NoiseSource(77))
    b = sample(net, 5000, NoiseSource(77))
    assert a == b


def test_sample_matches_joint_d3():
    net = random_net(chain_structure(3, 2), NoiseSource(8))
    data = sample(net, 10**6, NoiseSource(9))
    emp = empirical_distribution(data, (0, 1, 2))
    assert tv_distance(emp, joint_distribution(net)) <= 0.01


def test_sample_rejects_empty():
    net = random_net(chain_structure(2), NoiseSource(0))
    with pytest.raises(ValueError):
        sample(net, 0, NoiseSource(0))


def test_refit_from_samples_reproduces_joint():
    s = five_node_structure()
    net = random_net(s, NoiseSource(3), 0.1, 0.9)
    data = sample(net, 200_000, NoiseSource(4))
    refit = fit_exact(s, empirical_distribution(data, tuple(range(5))))
    tv = tv_distance(joint_distribution(refit), joint_distribution(net))
    assert tv <= 4 * math.sqrt(32 / 200_000)


def test_exact_net_reproduces_source_joint():
    net = random_net(five_node_structure(), NoiseSource(12))
    joint = joint_distribution(net)
    again = joint_distribution(fit_exact(net.structure, joint))
    assert np.allclose(again.values, joint.values, atol=1e-14)


def test_net_rejects_wrong_marginal_scope():
    s = chain_structure(2, 1)
    with pytest.raises(StructureError):
        NoisyBayesNet(s, (ProbTable.uniform((0,)), ProbTable.uniform((0, 1))))


def test_greedy_builder_recovers_chain():
    s = chain_structure(5, 1)
    net = net_from_conditionals(s, [[0.5]] + [[0.05, 0.95]] * 4)
    data = sample(net, 20_000, NoiseSource(6))
    assert greedy_structure(data, 1).parents == s.parents
