import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beamgame import classical_game as cg
from beamgame import quantum_core as qc
from beamgame import quantum_game as qg
from beamgame.channel import AntennaPattern, PathLossParams, RadioParams, build_gain_table
from beamgame.geometry import TopologyConfig, generate_topology

HALF_PI = math.pi / 2
NAMED = [qc.named_strategy(n) for n in ("Delta", "Upsilon", "Omega", "Lambda")]


def _instance(seed):
    rng = np.random.default_rng(seed)
    topo = generate_topology(TopologyConfig(n_users=2), rng)
    table = build_gain_table(topo, PathLossParams(), rng)
    return cg.GameInstance.build(topo, table, AntennaPattern.from_db(2 * math.pi / 3, 10, -10), RadioParams())


def _payoffs(seed):
    return cg.payoff_tables(_instance(seed))


def test_grid_k2_is_the_named_strategies():
    grid = qg.build_grid(2)
    assert len(grid) == 4
    for p in NAMED:
        grid.index_of(p)
    assert grid[0] == qc.named_strategy("Delta")


@pytest.mark.parametrize("k, size", [(3, 7), (5, 13), (16, 46)])
def test_grid_sizes_and_membership(k, size):
    grid = qg.build_grid(k)
    assert len(grid) == size
    assert all(p.on_manifold() for p in grid.params)
    for p in NAMED:
        grid.index_of(p)


def test_grid_rejects_duplicates_and_small_k():
    with pytest.raises(ValueError):
        qg.StrategyGrid((NAMED[0], NAMED[0]))
    with pytest.raises(ValueError):
        qg.build_grid(1)


def test_config_validation():
    for bad in ({"timer": 0}, {"restarts": 0}, {"grid_points": 1}, {"gamma": 2.0}):
        with pytest.raises(ValueError):
            qg.QGameConfig(**bad)


def test_constant_payoffs():
    game = qg.QuantumGame(np.full((2, 3, 3), 3.0), HALF_PI, 5)
    assert game.best_response(0, 7) == 0
    assert game.best_response(1, 3) == 0
    assert all(game.is_nash((a, b)) for a in range(len(game)) for b in range(len(game)))


def test_classical_best_response_carries_over_without_entanglement():
    pay = np.zeros((2, 3, 3))
    pay[0, 1, :] = 5.0  # player 0 prefers direction 1 whatever player 1 does
    pay[0, 0, :] = 1.0
    game = qg.QuantumGame(pay, 0.0, 16)
    assert game.grid[game.best_response(0, 0)] == qc.named_strategy("Upsilon")


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0, HALF_PI), st.sampled_from([2, 3, 4]))
def test_best_response_matches_exhaustive_scan(seed, gamma, k):
    pay = np.random.default_rng(seed).uniform(0, 10, (2, 3, 3))
    game = qg.QuantumGame(pay, gamma, k)
    mats = game.grid.matrices
    for opp in range(len(game)):
        u0 = [qc.expected_utilities(m, mats[opp], gamma, pay)[0] for m in mats]
        u1 = [qc.expected_utilities(mats[opp], m, gamma, pay)[1] for m in mats]
        for player, vals in ((0, u0), (1, u1)):
            top = max(vals)
            expected = next(k for k, v in enumerate(vals) if v >= top - 1e-12)
            # the table path and the per-pair path may round differently near ties
            br = game.best_response(player, opp)
            assert vals[br] >= top - 2e-12
            assert br == expected or abs(vals[br] - vals[expected]) <= 2e-12


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0, HALF_PI))
def test_is_nash_matches_double_loop(seed, gamma):
    pay = np.random.default_rng(seed).uniform(0, 10, (2, 3, 3))
    game = qg.QuantumGame(pay, gamma, 3)
    n = len(game)
    for a in range(n):
        for b in range(n):
            u = game.utilities((a, b))
            ok = all(game.utilities((x, b))[0] <= u[0] + 1e-12 for x in range(n)) and \
                all(game.utilities((a, y))[1] <= u[1] + 1e-12 for y in range(n))
            assert game.is_nash((a, b)) == ok
            assert ((a, b) in game.nash_profiles()) == ok


def test_mutual_best_responses_form_an_nash():
    game = qg.QuantumGame(_payoffs(0), 0.0, 16)
    a = game.best_response(0, 0)
    b = game.best_response(1, a)
    assert game.best_response(0, b) == a
    assert game.is_nash((a, b))


def test_dynamics_from_an_nash():
    checked = 0
    for seed in range(40):
        game = qg.QuantumGame(_payoffs(seed), HALF_PI, 16)
        for ne in game.nash_profiles():
            rec = game.dynamics(ne, timer=5)
            assert rec.converged and rec.iterations == 1 and rec.indices == ne
            checked += 1
    assert checked >= 10


def test_dynamics_single_tick_from_non_nash():
    pay = np.zeros((2, 3, 3))
    pay[0, 1, :] = 1.0
    pay[1, :, 2] = 1.0
    game = qg.QuantumGame(pay, 0.0, 2)
    start = (0, 0)
    assert not game.is_nash(start)
    rec = game.dynamics(start, timer=1)
    assert not rec.converged and rec.iterations == 1


@pytest.mark.parametrize("seed", range(20))
def test_dynamics_always_converge_without_entanglement(seed):
    game = qg.QuantumGame(_payoffs(seed), 0.0, 16)
    rng = np.random.default_rng(seed)
    for _ in range(5):
        rec = game.dynamics(qg.random_grid_profile(game, rng), timer=5)
        assert rec.converged and rec.iterations <= 2


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0, HALF_PI), st.integers(1, 8))
def test_anytime_bound(seed, gamma, timer):
    pay = np.random.default_rng(seed).uniform(0, 10, (2, 3, 3))
    game = qg.QuantumGame(pay, gamma, 5)
    rec = game.dynamics((seed % len(game), (seed // 7) % len(game)), timer)
    assert 1 <= rec.iterations <= timer
    if rec.converged:
        assert game.is_nash(rec.indices)
    assert all(math.isfinite(u) and u >= 0 for u in rec.utilities)


def _fake(mean, converged, idx):
    s = qg.build_grid(16)
    return qg.RunRecord((idx, idx), (s[idx], s[idx]), (mean, mean), converged, 1)


def test_select_unique():
    r = _fake(3.0, True, 2)
    sol = qg.select_solution([r, _fake(9.0, False, 4), r])
    assert sol.rule == qg.RULE_UNIQUE and sol.indices == (2, 2)


def test_select_best_of_several():
    sol = qg.select_solution([_fake(5.0, True, 1), _fake(7.0, True, 3), _fake(9.0, False, 4)])
    assert sol.rule == qg.RULE_BEST and sol.utilities == (7.0, 7.0)


def test_select_enforcement():
    sol = qg.select_solution([_fake(5.0, False, 1), _fake(8.0, False, 3), _fake(6.0, False, 4)])
    assert sol.rule == qg.RULE_ENFORCED and sol.indices == (3, 3)
    with pytest.raises(ValueError):
        qg.select_solution([])


def test_full_grid_enforcement_is_at_least_as_good():
    game = qg.QuantumGame(_payoffs(1), HALF_PI, 16)
    recs = [game.record((3, 5), False, 5), game.record((10, 1), False, 5)]
    local = qg.select_solution(recs)
    full = qg.select_solution(recs, game, full_grid=True)
    assert full.rule == qg.RULE_ENFORCED
    assert full.mean_utility >= local.mean_utility
    assert full.mean_utility == pytest.approx(game.eu.mean(axis=0).max())
    with pytest.raises(ValueError):
        qg.select_solution(recs, None, full_grid=True)


@pytest.mark.parametrize("seed", range(25))
def test_no_entanglement_reproduces_classical_nash(seed):
    inst = _instance(seed)
    game = qg.QuantumGame.from_config(cg.payoff_tables(inst), qg.QGameConfig(gamma=0.0))
    sol, _ = qg.solve(game, qg.QGameConfig(gamma=0.0), np.random.default_rng(seed))
    classical = cg.br_dynamics(inst, (0.0, 0.0), 10)
    expected = [cg.utility(inst, i, classical.profile) for i in range(2)]
    assert sol.utilities == pytest.approx(expected, abs=1e-9)


def test_solve_is_deterministic():
    pay = _payoffs(4)
    cfg = qg.QGameConfig()
    game = qg.QuantumGame.from_config(pay, cfg)
    a, ra = qg.solve(game, cfg, np.random.default_rng(8), keep_trace=True)
    b, rb = qg.solve(game, cfg, np.random.default_rng(8), keep_trace=True)
    assert a == b and ra == rb
    assert len(ra) == cfg.restarts


@pytest.mark.parametrize("seed", range(8))
def test_nested_grid_refinement_never_lowers_best_pair(seed):
    pay = _payoffs(seed)
    best = [qg.QuantumGame(pay, HALF_PI, k).eu.mean(axis=0).max() for k in (2, 3, 5, 9, 17)]
    assert all(b2 >= b1 - 1e-12 for b1, b2 in zip(best, best[1:]))


def test_trace_csv():
    game = qg.QuantumGame(_payoffs(2), HALF_PI, 4)
    rec = game.dynamics((1, 2), timer=3, keep_trace=True)
    lines = qg.trace_csv([rec]).strip().splitlines()
    assert lines[0] == "run,iteration,player,alpha,beta,lambda,utility"
    assert len(lines) == 1 + rec.iterations
    assert rec.to_dict()["iterations"] == rec.iterations
