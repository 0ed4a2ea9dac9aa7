import numpy as np
import pytest

from frontcontrol.errors import FrontCapError
from frontcontrol.fronttrack import (COLLISION, CONTROL, HIT_LEFT, HIT_RIGHT, ControlPair, FrontTracker, Profile,
                                     boundary_traces, l1_distance, sample_profile, total_variation)
from frontcontrol.riemann import solve_riemann

from conftest import random_states


def test_constant_profile_no_fronts(temple):
    p = Profile.constant(0, 1, [-2.0, 2.0])
    eng = FrontTracker(temple, p, ControlPair.constant([-2.0, 2.0], [-2.0, 2.0]), nu=0.1)
    traj = eng.run_until(5.0)
    assert eng.n_alive == 0 and not traj.fronts
    assert [e.kind for e in traj.events] == []


def test_burgers_step_single_shock(burgers):
    p = Profile([0, 0.5, 1], [[3.0], [1.0]])
    eng = FrontTracker(burgers, p, nu=0.1)
    fronts = list(eng.iter_fronts())
    assert len(fronts) == 1 and fronts[0].is_shock and fronts[0].speed == 2.0


def test_temple_initial_fans_match_manual(temple):
    p = Profile([0, 0.3, 0.7, 1], [[-2.0, 2.0], [-2.2, 2.3], [-1.9, 2.1]])
    eng = FrontTracker(temple, p, nu=0.1)
    got = [(f.family, f.kind, f.speed, f.x0) for f in eng.iter_fronts()]
    want = []
    for x, (u, v) in zip([0.3, 0.7], zip(p.states[:-1], p.states[1:])):
        want += [(w.family, w.kind, w.speed, x) for w in solve_riemann(temple, u, v, 0.1)]
    assert got == want


def test_burgers_merge(burgers, oracle):
    p = Profile([0, 0.2, 0.4, 1], [[3.0], [2.0], [1.0]])
    eng = FrontTracker(burgers, p, nu=0.1, track_conservation=True)
    traj = eng.run_until(0.3)
    col = traj.collisions()
    ref = oracle["burgers_merge"]
    assert len(col) == 1
    assert col[0].time == pytest.approx(ref["t"], abs=1e-14)
    assert col[0].position == pytest.approx(ref["x"], abs=1e-14)
    (merged,) = [traj.fronts[i] for i in col[0].fronts_out]
    assert merged.speed == ref["sigma"]
    assert traj.conservation["defect"] < 1e-13


def test_temple_crossing_keeps_amplitudes(temple):
    # 2-front on the left, 1-front on the right: they cross
    p = Profile([0, 0.4, 0.6, 1], [[-2.0, 2.2], [-2.0, 2.0], [-1.7, 2.0]])
    eng = FrontTracker(temple, p, nu=1.0)
    before = {f.family: (f.strength, f.speed) for f in eng.iter_fronts()}
    traj = eng.run_until(0.2)
    (col,) = traj.collisions()
    after = {traj.fronts[i].family: (traj.fronts[i].strength, traj.fronts[i].speed) for i in col.fronts_out}
    for fam in (1, 2):
        assert after[fam][0] == before[fam][0]
        assert after[fam][1] != before[fam][1]


def test_gas_same_family_shocks_emit_opposite_shock(gas):
    from frontcontrol.counterexample import colliding_shocks
    p, (tc, xc) = colliding_shocks(gas, 2, 0.02)
    traj = FrontTracker(gas, p, nu=1e-6).run_until(1.01 * tc)
    (col,) = traj.collisions()
    assert col.time == pytest.approx(tc, rel=1e-9) and col.position == pytest.approx(xc, rel=1e-9)
    out = [traj.fronts[i] for i in col.fronts_out]
    assert any(f.family == 1 and f.is_shock for f in out)


def test_sample_at_zero_is_initial(temple):
    p = Profile([0, 0.5, 1], [[-2.0, 2.0], [-2.1, 1.8]])
    traj = FrontTracker(temple, p, nu=0.1).run_until(1.0)
    assert l1_distance(sample_profile(traj, 0.0), p) == 0.0


def test_traces_and_exit(temple):
    p = Profile([0, 0.5, 1], [[-2.0, 2.0], [-2.0, 1.8]])   # one 2-shock moving right
    traj = FrontTracker(temple, p, nu=0.1).run_until(10.0)
    ta, tb = boundary_traces(traj)
    assert np.array_equal(tb[0][1], [-2.0, 1.8])
    (t_hit, s) = tb[-1]
    assert t_hit == pytest.approx(0.5 / 1.4, rel=1e-14)     # lambda_2 at the midpoint (-2, 1.9)
    assert np.array_equal(s, [-2.0, 2.0])
    assert all(np.array_equal(v, [-2.0, 2.0]) for _, v in ta)
    assert [e.kind for e in traj.events] == [HIT_RIGHT]


def test_absorbing_injects_nothing(gas):
    rng = np.random.default_rng(2)
    S = random_states(gas, rng, 6, margin=0.35)
    p = Profile(np.linspace(0, 1, 7), S)
    traj = FrontTracker(gas, p, nu=0.01).run_until(5.0)
    assert traj.injected == {"a": 0, "b": 0}
    assert all(not e.fronts_out for e in traj.events if e.kind in (HIT_LEFT, HIT_RIGHT))


def test_control_switch_injects_at_switch_time(temple):
    p = Profile.constant(0, 1, [-2.0, 2.0])
    ctrl = ControlPair([(0.5, [-2.0, 1.7])], [])
    eng = FrontTracker(temple, p, ctrl, nu=0.1)
    traj = eng.run_until(0.6)
    (ev,) = [e for e in traj.events if e.kind == CONTROL]
    assert ev.time == 0.5 and len(ev.fronts_out) == 3   # w2 rises 0.3 into the domain: three rarefaction fronts


def test_impulse_control(temple):
    p = Profile.constant(0, 1, [-2.0, 2.0])
    ctrl = ControlPair([(0.5, [-2.0, 1.9]), (0.5, None)], [])
    eng = FrontTracker(temple, p, ctrl, nu=0.1)
    traj = eng.run_until(20.0)
    assert traj.injected["a"] == 1
    assert eng.n_alive == 0
    assert np.allclose(eng.profile().states, [[-2.0, 1.9]])


def test_front_cap(temple):
    p = Profile([0, 0.5, 1], [[-2.0, 1.0], [-2.0, 3.0]])
    with pytest.raises(FrontCapError):
        FrontTracker(temple, p, nu=0.01, front_cap=50)


def test_determinism(gas):
    rng = np.random.default_rng(9)
    S = random_states(gas, rng, 12, margin=0.3)
    p = Profile(np.r_[0, np.sort(rng.uniform(0, 1, 11)), 1], S)
    logs = []
    for _ in range(2):
        traj = FrontTracker(gas, p, nu=0.005).run_until(2.0)
        logs.append([(e.time, e.position, e.kind, e.fronts_in, e.fronts_out) for e in traj.events])
    assert logs[0] == logs[1]


def test_gas_conservation(gas):
    rng = np.random.default_rng(4)
    S = random_states(gas, rng, 10, margin=0.3)
    p = Profile(np.r_[0, np.sort(rng.uniform(0, 1, 9)), 1], S)
    traj = FrontTracker(gas, p, nu=0.005, track_conservation=True).run_until(3.0)
    assert traj.conservation["defect"] <= 5e-9 * len(traj.events)


def test_gas_conservation_defect_scales_like_nu_squared(gas):
    # rarefaction fronts cannot satisfy both jump conditions exactly; the defect is O(nu^3) per front
    p = Profile([0, 0.5, 1], [[1.0, 0.0], [0.95, 0.0]])
    d = [FrontTracker(gas, p, nu=nu, track_conservation=True).run_until(2.0).conservation["defect"]
         for nu in (0.02, 0.01, 0.005)]
    slope = np.polyfit(np.log([0.02, 0.01, 0.005]), np.log(d), 1)[0]
    assert 1.7 < slope < 2.3


def test_total_variation_examples(temple):
    assert total_variation(temple, Profile.constant(0, 1, [-2, 2])) == 0.0
    assert total_variation(temple, Profile([0, 0.5, 1], [[-2, 2], [-2, 2.5]])) == 0.5


def test_total_variation_brute_force(gas):
    rng = np.random.default_rng(0)
    S = random_states(gas, rng, 10)
    p = Profile(np.linspace(0, 1, 11), S)
    W = [gas.to_riemann(s) for s in S]
    brute = sum(abs(W[k + 1][i] - W[k][i]) for k in range(9) for i in range(2))
    assert total_variation(gas, p) == pytest.approx(brute, rel=1e-13)
    brute_u = sum(abs(S[k + 1][i] - S[k][i]) for k in range(9) for i in range(2))
    assert total_variation(gas, p, in_riemann=False) == pytest.approx(brute_u, rel=1e-13)


def test_l1_distance_examples():
    p = Profile([0, 0.3, 1], [[1.0], [2.0]])
    assert l1_distance(p, p) == 0.0
    assert l1_distance(Profile.constant(0, 2, [1.0]), Profile.constant(0, 2, [1.5])) == 1.0


def test_l1_distance_riemann_sum():
    rng = np.random.default_rng(1)
    p1 = Profile(np.r_[0, np.sort(rng.uniform(0, 1, 7)), 1], rng.normal(size=(8, 2)))
    p2 = Profile(np.r_[0, np.sort(rng.uniform(0, 1, 4)), 1], rng.normal(size=(5, 2)))
    x = np.linspace(0, 1, 1_000_001)
    xm = 0.5 * (x[1:] + x[:-1])
    ref = np.abs(p1.value(xm) - p2.value(xm)).sum(axis=1).mean()
    assert l1_distance(p1, p2) == pytest.approx(ref, abs=1e-5)


def test_profile_validation():
    with pytest.raises(ValueError):
        Profile([0, 0.5, 0.5, 1], [[1.0], [2.0], [3.0]])
    with pytest.raises(ValueError):
        Profile([0, 1], [[1.0], [2.0]])


def test_event_kinds_and_collision_positions(temple):
    rng = np.random.default_rng(8)
    S = random_states(temple, rng, 15)
    p = Profile(np.r_[0, np.sort(rng.uniform(0, 1, 14)), 1], S)
    traj = FrontTracker(temple, p, nu=0.05).run_until(10.0)
    for e in traj.collisions():
        xs = [traj.fronts[i].x(e.time) for i in e.fronts_in]
        assert len(xs) >= 2 and max(xs) - min(xs) <= 1e-12 * max(1.0, abs(e.position)) + 1e-12
    times = [e.time for e in traj.events]
    assert times == sorted(times)


def test_rarefaction_fronts_do_not_resplit(gas):
    # a gas 2-rarefaction front leaves a crossing slightly stronger than nu; it must stay one front
    rng = np.random.default_rng(5)
    S = random_states(gas, rng, 12, margin=0.35)
    p = Profile(np.r_[0, np.sort(rng.uniform(0, 1, 11)), 1], S)
    traj = FrontTracker(gas, p, nu=0.01).run_until(3.0)
    for e in traj.collisions():
        ins = [traj.fronts[i] for i in e.fronts_in]
        outs = [traj.fronts[i] for i in e.fronts_out]
        for fam in {f.family for f in ins if f.kind == "rarefaction"}:
            assert sum(f.family == fam and f.kind == "rarefaction" for f in outs) <= 1
