import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scdopt.instance import (
    GenConfig,
    InstanceError,
    enumerate_scenarios,
    generate_instance,
    instance_to_dict,
    load_instance,
    save_instance,
    validate_instance,
)

from helpers import make_instance


def facilities_with_theta(theta):
    inst = make_instance([1_000_000] * len(theta), [10] * len(theta), [50_000] * len(theta), theta,
                         [0.2] * len(theta), [0.05] * len(theta), [100], [[100]] * len(theta),
                         [[10_000]] * len(theta))
    return inst.facilities


def test_generate_ranges_seed_42():
    inst = generate_instance(GenConfig(2, 2, seed=42))
    assert ((inst.fixed_cost >= 1_000_000) & (inst.fixed_cost <= 2_000_000)).all()
    assert ((inst.demand >= 100) & (inst.demand <= 300)).all()
    np.testing.assert_array_equal(inst.gamma, 0.25 * inst.lam)
    validate_instance(inst)


@pytest.mark.parametrize("L,C", [(1, 1), (2, 5), (3, 3), (5, 20), (8, 4)])
def test_capacity_total(L, C):
    for seed in range(20):
        inst = generate_instance(GenConfig(L, C, seed=seed))
        assert inst.capacity.sum() == round(1.3 * inst.demand.sum())


def test_fixed_cost_follows_capacity_rank():
    for seed in range(50):
        inst = generate_instance(GenConfig(3, 5, seed=seed))
        assert list(np.argsort(inst.fixed_cost, kind="stable")) == list(np.argsort(inst.capacity, kind="stable")) \
            or len(set(inst.capacity)) < 3
        order = np.argsort(inst.capacity, kind="stable")
        assert (np.diff(inst.fixed_cost[order]) > 0).all()


def test_inspection_cost_follows_taint_reduction_rank():
    for seed in range(50):
        inst = generate_instance(GenConfig(4, 3, seed=seed))
        order = np.argsort(inst.taint_rate - inst.residual_rate, kind="stable")
        assert (np.diff(inst.inspection_cost[order]) > 0).all()


def test_deterministic():
    a = generate_instance(GenConfig(3, 4, seed=9))
    b = generate_instance(GenConfig(3, 4, seed=9))
    assert a == b
    assert instance_to_dict(a) == instance_to_dict(b)
    assert a != generate_instance(GenConfig(3, 4, seed=10))


def test_too_many_facilities_refused():
    with pytest.raises(InstanceError, match="2\\^17"):
        generate_instance(GenConfig(17, 2))
    GenConfig(17, 2, allow_large=True).validate()


def test_scenarios_single_facility():
    sc = enumerate_scenarios(facilities_with_theta([0.7]))
    assert [s.failed_set for s in sc] == [frozenset(), frozenset({0})]
    assert [s.probability for s in sc] == pytest.approx([0.7, 0.3], abs=1e-15)


def test_scenarios_two_facilities():
    sc = enumerate_scenarios(facilities_with_theta([0.6, 0.8]))
    assert [s.failed_set for s in sc] == [frozenset(), {0}, {1}, {0, 1}]
    # product formula: P({0} failed) = 0.4 * 0.8, P({1} failed) = 0.6 * 0.2
    assert [s.probability for s in sc] == pytest.approx([0.48, 0.32, 0.12, 0.08], abs=1e-15)
    assert sorted(s.probability for s in sc) == pytest.approx(sorted([0.48, 0.12, 0.32, 0.08]))
    # effective rates only in failed scenarios
    assert sc[1].effective_q == (0.2, 0.0)
    assert sc[3].effective_r == (0.05, 0.05)


def test_scenarios_empty():
    with pytest.raises(InstanceError):
        enumerate_scenarios([])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0.5, 0.95), min_size=1, max_size=10))
def test_probabilities_sum_to_one(theta):
    sc = enumerate_scenarios(facilities_with_theta(theta))
    assert len(sc) == 2 ** len(theta)
    assert abs(sum(s.probability for s in sc) - 1.0) <= 1e-12
    assert len({s.failed_set for s in sc}) == len(sc)


def test_roundtrip(tmp_path):
    inst = generate_instance(GenConfig(4, 6, seed=3))
    path = tmp_path / "i.json"
    save_instance(inst, path)
    back = load_instance(path)
    assert back == inst
    assert [s.failed_set for s in back.scenarios] == [s.failed_set for s in inst.scenarios]
    assert "scenarios" not in json.loads(path.read_text())


def test_load_missing_discard(tmp_path):
    data = instance_to_dict(generate_instance(GenConfig(2, 2, seed=1)))
    del data["costs"]["discard"]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    with pytest.raises(InstanceError, match="missing field costs.discard") as exc:
        load_instance(path)
    assert exc.value.field == "costs.discard"


def test_load_reliability_out_of_range(tmp_path):
    data = instance_to_dict(generate_instance(GenConfig(2, 2, seed=1)))
    data["facilities"][0]["reliability"] = 0.3
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    with pytest.raises(InstanceError, match="reliability"):
        load_instance(path)


def test_custom_bounds_respected():
    cfg = GenConfig(3, 3, seed=2, demand=(10, 20), fixed_cost=(5, 10))
    inst = generate_instance(cfg)
    assert ((inst.demand >= 10) & (inst.demand <= 20)).all()
    validate_instance(inst, inst.meta["bounds"])
    with pytest.raises(InstanceError):
        validate_instance(inst)


def test_bad_config():
    with pytest.raises(InstanceError):
        GenConfig(0, 2).validate()
    with pytest.raises(InstanceError):
        GenConfig(2, 2, residual_taint_rate=(0.01, 0.2)).validate()
