import numpy as np
import pytest

from cuspfusion.cusp import fold_boundary_b, local_minimum_from
from cuspfusion.datastore import DbTable, join, split
from cuspfusion.errors import DegenerateParameters
from cuspfusion.influence import (
    Branch,
    apply_intervention,
    fusion_gain,
    hysteresis_path,
    rank_targets,
    record_row,
    susceptibility,
)
from cuspfusion.models import JOINT, ONLY_A, ONLY_B, fit
from cuspfusion.sampler import Person, vote_probability

from . import oracle_values as ov


def person(a, b, x0, pid=0):
    x = local_minimum_from(x0, (a, b))
    p = vote_probability(x, 10.0)
    return Person(pid, a, b, x0, x, p, int(p > 0.5))


def test_metastable_example():
    who = person(0.5, 2.0, -1.0)
    assert who.x < 0
    rec = susceptibility(who)
    assert rec.branch is Branch.METASTABLE
    assert rec.delta_b_flip == pytest.approx(0.809449, abs=1e-6)
    assert rec.flip_direction == "to_1"
    assert susceptibility(person(-0.5, 2.0, 1.0)).flip_direction == "to_0"


def test_other_branches():
    assert susceptibility(person(0.5, 1.0, -0.5)).branch is Branch.MONOSTABLE_NEUTRAL
    assert susceptibility(person(0.0, 3.0, 0.5)).branch is Branch.NEUTRAL
    aligned = susceptibility(person(0.5, 2.0, 1.0))
    assert aligned.branch is Branch.ALIGNED and aligned.delta_b_flip is None


def test_degenerate_person():
    who = Person(3, 2.0, 3.0, 1.0, 2.0, 1.0, 1)
    with pytest.raises(DegenerateParameters):
        susceptibility(who)
    rec = susceptibility(who, strict=False)
    assert rec.on_degenerate and rec.branch is Branch.NEUTRAL


def test_rank_order(default_population):
    ranked = rank_targets(default_population)
    assert sorted(r.id for r in ranked) == list(range(len(default_population)))
    meta = [r for r in ranked if r.branch is Branch.METASTABLE]
    assert ranked[: len(meta)] == meta
    keys = [(r.delta_b_flip, r.id) for r in meta]
    assert keys == sorted(keys)
    rest = [r.id for r in ranked[len(meta):]]
    assert rest == sorted(rest)
    assert all(r.delta_b_flip > 0 for r in meta)


def test_rank_is_permutation_invariant(default_population):
    shuffled = [default_population[i] for i in np.random.default_rng(4).permutation(1000)]
    assert rank_targets(shuffled) == rank_targets(default_population)


@pytest.mark.slow
def test_metastable_fraction(large_population):
    ranked = rank_targets(large_population)
    frac = np.mean([r.branch is Branch.METASTABLE for r in ranked])
    assert frac == pytest.approx(ov.METASTABLE_FRACTION, abs=0.03)


def test_no_change_intervention_is_a_no_op(default_population):
    for who in default_population[:50]:
        res = apply_intervention(who, who.b)
        assert res.new_x == pytest.approx(who.x, abs=1e-9)
        assert not res.flipped


def test_flip_example():
    who = person(0.5, 2.0, -1.0)
    res = apply_intervention(who, 1.0)
    assert res.flipped and res.new_x > 0
    assert res.new_p >= 0.999
    # just above the fold the metastable minimum survives
    assert not apply_intervention(who, fold_boundary_b(0.5) + 0.01).flipped


def test_hysteresis_loop():
    who = person(0.5, 2.0, -1.0)
    down = hysteresis_path(who, np.linspace(2.0, 1.0, 11))
    assert down[0] < 0 and down[-1] > 0
    # raising b again does not bring the old branch back
    back = hysteresis_path(Person(0, 0.5, 1.0, down[-1], down[-1], 1.0, 1), np.linspace(1.0, 4.0, 13))
    assert all(x > 0 for x in back)


def test_aligned_people_never_flip(default_population):
    sweep = np.r_[np.linspace(4, -2, 25), np.linspace(-2, 4, 25)]
    for who in default_population:
        if susceptibility(who).branch is Branch.ALIGNED:
            path = hysteresis_path(who, sweep)
            assert all(np.sign(x) == np.sign(who.a) for x in path)


def test_record_row():
    row = record_row(susceptibility(person(0.5, 2.0, -1.0, pid=7)))
    assert row["id"] == 7 and row["branch"] == "metastable"


def test_identical_models_give_zero_deltas(default_population):
    joined = join(*split(default_population))
    m = fit(joined, ONLY_A, 1.0)
    report = fusion_gain(joined, m, m, m)
    for delta in report.deltas.values():
        assert all(v == 0 for v in delta.values())
    assert report.targetable is None


def test_fusion_gain_orders_models(large_joined, large_models, large_population):
    report = fusion_gain(large_joined, large_models["a"], large_models["b"], large_models["joint"],
                         rank_targets(large_population))
    m = report.metrics
    assert m["a"].auc >= m["b"].auc + 0.1
    assert m["joint"].log_loss <= m["a"].log_loss + 1e-3
    assert report.deltas["a_minus_b"]["auc"] == pytest.approx(m["a"].auc - m["b"].auc)
    assert report.independence["p_value"] > 0.01
    assert report.targetable["count"] == sum(
        susceptibility(p, strict=False).branch is Branch.METASTABLE for p in large_population
    )
    d = report.to_dict()
    assert set(d) == {"metrics", "deltas", "independence", "targetable"}


def test_fusion_gain_on_tiny_table_skips_independence():
    rows = tuple((i, (i % 5) / 5, float(i % 3), i % 2) for i in range(12))
    joined = DbTable("joined", ("id", "a", "b", "y"), rows)
    models = [fit(joined, s, 1.0) for s in (ONLY_A, ONLY_B, JOINT)]
    assert fusion_gain(joined, *models).independence is None


@pytest.mark.parametrize("eps", [0.1, 0.3])
def test_delta_shifts_with_b(eps):
    base = susceptibility(person(0.5, 2.0, -1.0)).delta_b_flip
    moved = susceptibility(person(0.5, 2.0 + eps, -1.0)).delta_b_flip
    assert moved - base == pytest.approx(eps, abs=1e-12)
