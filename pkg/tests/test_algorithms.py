import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import cone_family
from oracles import brute_pareto
from vecopt.algorithms import (
    ALGORITHMS,
    AlgConfig,
    decoupled_paveba_run,
    eliminate,
    gp_pal_run,
    naive_elimination,
    paveba_run,
)
from vecopt.cones import Order
from vecopt.errors import BudgetTooSmall, CostVectorInvalid
from vecopt.instances import random_problem, ring_problem, smooth_problem
from vecopt.metrics import eps_f1
from vecopt.problems import TabularProblem
from vecopt.regions import RectRegion

ORTH = Order.componentwise(2)
TOY = TabularProblem(np.arange(3.0)[:, None], [[1, 2], [2, 1], [0, 0]])


# ------------------------------------------------------------------ naive

def test_naive_zero_noise():
    r = naive_elimination(TOY, ORTH, AlgConfig(budget=3))
    assert r.predicted_pareto == [0, 1]
    assert r.terminated_by == "converged"


def test_naive_budget_floor():
    r = naive_elimination(TOY, ORTH, AlgConfig(budget=10))
    assert r.samples_used == 9
    assert np.array_equal(r.sample_counts, np.full((3, 2), 3))
    assert [x.t for x in r.rounds] == [1, 2, 3]
    with pytest.raises(BudgetTooSmall):
        naive_elimination(TOY, ORTH, AlgConfig(budget=2))


def test_naive_noisy_matches_oracle():
    from oracles import Membership

    # pairwise differences kept 0.02 (about six standard errors) from the cone boundary;
    # unconstrained uniform draws can produce ties no budget resolves
    p = random_problem(np.random.default_rng(2024), 10, ORTH.cone, margin=0.02, noise_std=0.05)
    Y = p.objectives
    truth = brute_pareto(Y, Membership("componentwise"))
    hits = sum(naive_elimination(p, ORTH, AlgConfig(budget=2000, seed=s)).predicted_pareto == truth for s in range(20))
    assert hits >= 18


# ----------------------------------------------------------------- paveba

FIVE = TabularProblem(np.arange(5.0)[:, None], [[0, 3], [1, 2.5], [2, 1], [0.5, 0.5], [1.5, 0.2]])


@pytest.mark.parametrize("shape", ["rect", "ellipsoid"])
def test_paveba_zero_noise(shape):
    from oracles import Membership

    r = paveba_run(FIVE, ORTH, AlgConfig(budget=100, conf_shape=shape))
    assert r.predicted_pareto == brute_pareto(FIVE.objectives, Membership("componentwise")) == [0, 1, 2]
    assert r.terminated_by == "converged"


def test_paveba_one_round():
    p = ring_problem(20, 0.5)
    r = paveba_run(p, ORTH, AlgConfig(epsilon=0.1, budget=20))
    assert r.terminated_by == "budget_exhausted"
    assert len(r.rounds) == 1
    assert r.rounds[0].S_size + r.rounds[0].P_size == 20
    assert r.samples_used == 20
    with pytest.raises(BudgetTooSmall):
        paveba_run(p, ORTH, AlgConfig(budget=19))


def test_paveba_ring_few_seeds():
    p = ring_problem(20, 0.1)
    for seed in range(2):
        r = paveba_run(p, ORTH, AlgConfig(epsilon=0.1, budget=20000, seed=seed))
        assert eps_f1(r.predicted_pareto, p, ORTH, 0.1) >= 0.9
        assert r.samples_used <= 20000


def test_paveba_batch_size():
    r = paveba_run(FIVE.with_noise(0.1), ORTH, AlgConfig(budget=200, batch_size=4, seed=1))
    assert r.rounds[0].samples_used == 20
    assert np.all(r.sample_counts % 4 == 0)


# ---------------------------------------------------------------- gp_pal

def test_gp_budget_one():
    p = smooth_problem()
    r = gp_pal_run(p, ORTH, AlgConfig(epsilon=0.1, budget=1))
    assert r.samples_used == 1
    assert r.terminated_by == "budget_exhausted"


def test_gp_regions_shrink():
    p = smooth_problem()
    r = gp_pal_run(p, ORTH, AlgConfig(epsilon=0.1, budget=60, gp_signal=1.5, trace_regions=True, seed=3))
    assert len(r.region_trace) >= 2
    for prev, cur in zip(r.region_trace, r.region_trace[1:]):
        for d, box in cur.items():
            assert np.all(box.lower >= prev[d].lower - 1e-12)
            assert np.all(box.upper <= prev[d].upper + 1e-12)


def test_gp_smooth_converges():
    p = smooth_problem()
    for seed in range(3):
        r = gp_pal_run(p, ORTH, AlgConfig(epsilon=0.1, budget=300, gp_signal=1.5, seed=seed))
        assert r.terminated_by == "converged"
        assert r.samples_used < 300
        assert eps_f1(r.predicted_pareto, p, ORTH, 0.1) == 1.0


def test_gp_batch_and_shape():
    p = smooth_problem()
    r = gp_pal_run(p, ORTH, AlgConfig(epsilon=0.1, budget=12, batch_size=4, gp_signal=1.5))
    assert r.rounds[0].samples_used == 4
    with pytest.raises(ValueError):
        gp_pal_run(p, ORTH, AlgConfig(budget=10, conf_shape="ellipsoid"))


def test_gp_hyperparameter_grid():
    p = smooth_problem()
    grid = [(1.5, 0.5, 0.01), (1.5, 1.0, 0.01), (1.5, 2.0, 0.01)]
    r = gp_pal_run(p, ORTH, AlgConfig(epsilon=0.1, budget=300, gp_grid=grid, seed=0))
    assert r.samples_used <= 300
    assert eps_f1(r.predicted_pareto, p, ORTH, 0.1) >= 0.9


# -------------------------------------------------------------- decoupled

def test_decoupled_equal_costs_alternate():
    p = ring_problem(12, 0.2)
    counts_by_round = []
    full = decoupled_paveba_run(p, ORTH, AlgConfig(epsilon=0.1, budget=400, costs=(1, 1)))
    for log in full.rounds:
        r = decoupled_paveba_run(p, ORTH, AlgConfig(epsilon=0.1, budget=log.samples_used, costs=(1, 1)))
        assert r.rounds == full.rounds[: len(r.rounds)]
        counts_by_round.append(r.sample_counts)
    for counts in counts_by_round:
        assert np.all(np.abs(counts[:, 0] - counts[:, 1]) <= 1)


def test_decoupled_cost_ratio():
    p = ring_problem(20, 0.1)
    r = decoupled_paveba_run(p, ORTH, AlgConfig(epsilon=0.1, budget=2000, costs=(1, 10)))
    n0, n1 = r.sample_counts.sum(axis=0)
    assert n0 >= 5 * n1
    assert n0 + 10 * n1 == r.samples_used <= 2000


@pytest.mark.parametrize("costs", [(1, 0), (1, -2), (1, np.inf), (1, 1, 1)])
def test_decoupled_bad_costs(costs):
    with pytest.raises(CostVectorInvalid):
        decoupled_paveba_run(TOY, ORTH, AlgConfig(budget=100, costs=costs))


def test_decoupled_zero_noise():
    from oracles import Membership

    r = decoupled_paveba_run(FIVE, ORTH, AlgConfig(budget=200))
    assert r.predicted_pareto == brute_pareto(FIVE.objectives, Membership("componentwise"))
    assert r.terminated_by == "converged"


# ------------------------------------------------------ shared invariants

def run(name, problem, order, **kw):
    cfg = dict(epsilon=0.0, budget=400, gp_lengthscale=0.02)
    cfg.update(kw)
    return ALGORITHMS[name](problem, order, AlgConfig(**cfg))


@pytest.mark.parametrize("name", sorted(ALGORITHMS))
def test_deterministic(name):
    p = ring_problem(10, 0.2)
    a = run(name, p, ORTH, epsilon=0.1, seed=5, budget=300)
    b = run(name, p, ORTH, epsilon=0.1, seed=5, budget=300)
    assert a.rounds_csv() == b.rounds_csv()
    assert a.predicted_pareto == b.predicted_pareto


@pytest.mark.parametrize("name", sorted(ALGORITHMS))
def test_rounds_csv_schema(name):
    r = run(name, ring_problem(8, 0.1), ORTH, epsilon=0.1, budget=120)
    lines = r.rounds_csv().splitlines()
    assert lines[0] == "t,samples_used,S_size,P_size,max_diameter"
    used = [float(line.split(",")[1]) for line in lines[1:]]
    assert used == sorted(used)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(sorted(ALGORITHMS)), st.integers(0, 1000), st.integers(1, 8), st.floats(0.0, 0.5))
def test_nonempty_and_budget(name, seed, K, noise):
    rng = np.random.default_rng(seed)
    p = TabularProblem(rng.random((K, 2)), rng.random((K, 2)), noise_std=noise)
    budget = int(rng.integers(2 * K, 20 * K))
    r = run(name, p, ORTH, epsilon=0.05, seed=seed, budget=budget)
    assert r.predicted_pareto
    assert r.samples_used <= budget
    assert set(r.predicted_pareto) <= set(range(K))


@pytest.mark.parametrize("family", ["orthant2", "theta:60", "theta:120", "ice:20/6", "orthant3"])
@pytest.mark.parametrize("name", sorted(ALGORITHMS))
def test_zero_noise_soundness(name, family):
    cone, member = cone_family(family)
    order = Order(cone)
    rng = np.random.default_rng(sum(map(ord, family)))
    p = random_problem(rng, 12, cone)
    budget = 100_000 if name != "gp_pal" else 400
    r = run(name, p, order, budget=budget)
    assert r.predicted_pareto == brute_pareto(p.objectives, member)


def test_eliminate_duplicates_and_degenerate():
    pts = [RectRegion.point([1.0, 1.0]), RectRegion.point([1.0, 1.0]), RectRegion.point([0.0, 0.0])]
    S, P = eliminate(dict(enumerate(pts)), {0, 1, 2}, set(), ORTH, 0.0)
    assert S == set() and P == {0, 1}
    # identical nondegenerate boxes block each other
    boxes = {0: RectRegion([0, 0], [1, 1]), 1: RectRegion([0, 0], [1, 1])}
    S, P = eliminate(boxes, {0, 1}, set(), ORTH, 0.0)
    assert S == {0, 1} and P == set()


def test_alg_config_validation():
    with pytest.raises(ValueError):
        AlgConfig(epsilon=-1)
    with pytest.raises(ValueError):
        AlgConfig(delta=1.5)
    with pytest.raises(ValueError):
        AlgConfig(batch_size=0)
    with pytest.raises(ValueError):
        AlgConfig(conf_shape="ball")
