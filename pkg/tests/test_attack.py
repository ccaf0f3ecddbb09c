import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import null_space

from gridcut.attack import INFEASIBLE, OPTIMAL, UNOBSERVABLE, AttackResult, optimal_attack, verify_hidden
from gridcut.errors import VerificationFailure
from gridcut.grid import ANGLE, FLOW, build_measurement_matrix, expand_pmu
from gridcut.oracle import brute_force_attack

from .conftest import CASE14_FIXTURES, fixture_scenario, make_ms
from .strategies import scenarios


def check_result_invariants(topo, ms, res):
    H = build_measurement_matrix(topo, ms).H
    np.testing.assert_array_equal(res.a, H @ res.c)
    assert set(np.flatnonzero(res.a)) == set(res.attacked_measurements)
    assert set(np.unique(res.c)) <= {0, 1}
    if res.status == OPTIMAL:
        assert res.cardinality == len(res.attacked_measurements)
        assert res.c.any()
        assert all(res.c[b - 1] == 0 for b in ms.protected_states)
        assert not np.any(res.a[ms.protected_ids])


def test_chain_attack(chain, chain_ms):
    res = optimal_attack(chain, chain_ms)
    assert res.status == OPTIMAL
    assert res.cardinality == 1
    assert res.attacked_measurements == (1,)
    assert res.c.tolist() == [0, 0, 1]
    assert res.a.tolist() == [0, -1, 0]
    assert brute_force_attack(chain, chain_ms).optimal_cardinality == 1


def test_chain_attack_with_protected_flow(chain, chain_ms):
    ms = chain_ms.protect([1])
    res = optimal_attack(chain, ms)
    assert res.cardinality == 1
    assert res.attacked_measurements == (0,)
    assert res.c.tolist() == [0, 1, 1]
    assert brute_force_attack(chain, ms).optimal_cardinality == 1


def test_chain_fully_protected(chain, chain_ms):
    res = optimal_attack(chain, chain_ms.protect([0, 1, 2]))
    assert res.status == INFEASIBLE
    assert res.cardinality is None and res.score == float("inf")
    assert res.attacked_measurements == ()


def test_unobservable_flagged(chain):
    ms = make_ms(chain, flows=[(1, 2), (2, 3)])
    res = optimal_attack(chain, ms)
    assert res.status == UNOBSERVABLE
    assert res.cardinality == 0
    assert res.c.tolist() == [1, 1, 1]
    assert not res.a.any()


def test_partially_unobservable_component(chain):
    # bus 3 has no meter at all
    ms = make_ms(chain, flows=[(1, 2)], angles=[1])
    res = optimal_attack(chain, ms)
    assert res.status == UNOBSERVABLE
    assert res.c.tolist() == [0, 0, 1]


def test_report_json_shape(chain, chain_ms):
    doc = optimal_attack(chain, chain_ms).to_dict()
    assert doc == {"status": "optimal", "cardinality": 1, "attacked_measurements": [1], "c": [0, 0, 1], "a": [0.0, -1.0, 0.0]}


@settings(max_examples=150, deadline=None)
@given(scenarios(max_buses=8))
def test_matches_brute_force(sc):
    topo, ms = sc
    res = optimal_attack(topo, ms)
    oracle = brute_force_attack(topo, ms)
    assert res.cardinality == oracle.optimal_cardinality
    check_result_invariants(topo, ms, res)


@pytest.mark.parametrize("name", CASE14_FIXTURES)
def test_fixture_matches_brute_force(name):
    sc = fixture_scenario(name)
    res = optimal_attack(sc.topology, sc.measurements)
    assert res.cardinality == brute_force_attack(sc.topology, sc.measurements).optimal_cardinality
    check_result_invariants(sc.topology, sc.measurements, res)


def _random_feasible_shifts(topo, ms, rng, count):
    """Real-valued shifts obeying the protections: null-space draws and
    piecewise-constant draws over random bus groupings."""
    H = build_measurement_matrix(topo, ms).H
    n = topo.n_buses
    rows = [H[k] for k in ms.protected_ids] + [np.eye(n)[b - 1] for b in sorted(ms.protected_states)]
    N = null_space(np.array(rows)) if rows else np.eye(n)
    out = []
    if N.shape[1]:
        for _ in range(count // 2):
            r = rng.normal(size=N.shape[1]) * (rng.random(N.shape[1]) < 0.5)
            out.append(N @ r)
    while len(out) < count:
        groups = rng.integers(0, rng.integers(1, n + 1), n)
        values = rng.normal(size=n) * (rng.random(n) < 0.5)
        c = values[groups]
        a = H @ c
        a[np.abs(a) < 1e-12] = 0
        if not a[ms.protected_ids].any() and not any(c[b - 1] for b in ms.protected_states):
            out.append(c)
    return H, out


@pytest.mark.parametrize("name", CASE14_FIXTURES)
def test_no_real_shift_beats_the_cut(name):
    sc = fixture_scenario(name)
    best = optimal_attack(sc.topology, sc.measurements).cardinality
    rng = np.random.default_rng(2024)
    H, shifts = _random_feasible_shifts(sc.topology, sc.measurements, rng, 10_000)
    checked = 0
    for c in shifts:
        c = np.where(np.abs(c) < 1e-12, 0.0, c)
        if not c.any():
            continue
        a = H @ c
        a[np.abs(a) < 1e-12] = 0
        assert np.count_nonzero(a) >= best
        checked += 1
    assert checked > 5000


@settings(max_examples=80, deadline=None)
@given(scenarios(max_buses=8), st.randoms(use_true_random=False))
def test_scale_free(sc, rnd):
    topo, ms = sc
    base = optimal_attack(topo, ms)
    scaled = topo.with_susceptances([ln.susceptance * rnd.uniform(0.01, 100) for ln in topo.lines])
    res = optimal_attack(scaled, ms)
    assert res.cardinality == base.cardinality
    assert res.attacked_measurements == base.attacked_measurements
    np.testing.assert_array_equal(res.c, base.c)


@settings(max_examples=80, deadline=None)
@given(scenarios(max_buses=7), st.data())
def test_monotone_in_measurements_and_protection(sc, data):
    topo, ms = sc
    base = optimal_attack(topo, ms).score
    if topo.lines and data.draw(st.booleans()):
        grown = ms.append(FLOW, data.draw(st.integers(0, len(topo.lines) - 1)))
    else:
        grown = ms.append(ANGLE, data.draw(st.integers(1, topo.n_buses)))
    assert optimal_attack(topo, grown).score >= base
    if ms.unprotected_ids:
        j = data.draw(st.sampled_from(ms.unprotected_ids))
        assert optimal_attack(topo, ms.protect([j])).score >= base


def test_secure_pmu_infeasible(chain, chain_ms):
    res = optimal_attack(chain, expand_pmu(chain_ms, 2, True, chain))
    assert res.status == INFEASIBLE


def test_insecure_pmu_is_attackable(chain, chain_ms):
    ms = expand_pmu(chain_ms, 2, False, chain)
    res = optimal_attack(chain, ms)
    assert res.status == OPTIMAL
    assert res.cardinality == brute_force_attack(chain, ms).optimal_cardinality


# ---------------------------------------------------------------------------
# residual invariance
# ---------------------------------------------------------------------------


def test_verify_zero_noise(chain, chain_ms):
    res = optimal_attack(chain, chain_ms)
    rep = verify_hidden(chain, chain_ms, res, trials=20, noise_sigma=0.0)
    assert rep.max_residual_diff <= 1e-10
    assert rep.max_shift_error <= 1e-10


def test_verify_thousand_noisy_trials(chain, chain_ms):
    res = optimal_attack(chain, chain_ms)
    rep = verify_hidden(chain, chain_ms, res, trials=1000, noise_sigma=0.01, rng=5)
    assert rep.trials == 1000
    assert rep.max_residual_diff <= 1e-8
    assert rep.max_shift_error <= 1e-8


def test_verify_rejects_non_column_space_attack(chain):
    ms = make_ms(chain, flows=[(1, 2), (1, 2), (2, 3)], angles=[1])
    honest = optimal_attack(chain, ms)
    a = np.zeros(len(ms))
    a[0] = 1.0  # only one of the two redundant meters on line (1, 2)
    forged = AttackResult(OPTIMAL, 1, (0,), honest.c, a)
    with pytest.raises(VerificationFailure) as info:
        verify_hidden(chain, ms, forged, trials=10, rng=1)
    assert info.value.trial == 0


def test_verify_requires_optimal(chain):
    res = optimal_attack(chain, make_ms(chain, flows=[(1, 2), (2, 3)]))
    with pytest.raises(ValueError):
        verify_hidden(chain, make_ms(chain, flows=[(1, 2), (2, 3)]), res)
