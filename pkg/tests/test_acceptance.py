"""Acceptance suite: one test per release criterion, tolerances pinned.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one PASS line per
criterion.  Each criterion is self-contained and uses the library defaults
unless the criterion itself dictates otherwise.
"""

import threading
import time

import numpy as np
import pytest

from oracles import numeric_jacobian, qp_splitting_oracle, random_feasible_qp
from trimanip.clocks import SimulatedClock
from trimanip.config import RunConfig
from trimanip.envs import ApproxEnv, AugmentedEnv, ReachEnv, ReducedRateEnv, reach_policy
from trimanip.errors import EvictedIndexError, WaitTimeoutError
from trimanip.experiments import run_bench, run_reach, run_tracking_task
from trimanip.grasp import solve_qp
from trimanip.hand import NUM_JOINTS, HandAction
from trimanip.kinematics import HandGeometry, forward_kinematics, jacobian
from trimanip.robot import (
    Backend,
    BackendConfig,
    Frontend,
    LateActionPolicy,
    Mode,
    RobotData,
    Status,
)
from trimanip.safety import SafetyConfig, apply_torque_safety
from trimanip.sim_driver import SimDriver
from trimanip.timeseries import TimeSeries


def announce(number, name):
    print(f"\n[criterion {number:2d}] {name}: PASS")


# ---------------------------------------------------------------------------
# 1. time-series oracle suite
# ---------------------------------------------------------------------------
def test_criterion_1_timeseries_oracle_suite():
    start_wall = time.monotonic()
    rng = np.random.default_rng(20_240_101)

    scripts = 10_000
    for _ in range(scripts):
        capacity = int(rng.integers(1, 9))
        series = TimeSeries(capacity=capacity)
        oracle = []
        for _ in range(int(rng.integers(4, 24))):
            op = rng.integers(0, 4)
            if op <= 1:
                value = int(rng.integers(0, 1 << 30))
                oracle.append(value)
                assert series.append(value) == len(oracle) - 1
            elif op == 2:
                expected = len(oracle) - 1 if oracle else None
                assert series.newest_index() == expected
            else:
                t = int(rng.integers(0, len(oracle) + 2))
                oldest = max(0, len(oracle) - capacity)
                if t >= len(oracle):
                    with pytest.raises(WaitTimeoutError):
                        series.get(t, timeout=0.0)
                elif t < oldest:
                    with pytest.raises(EvictedIndexError):
                        series.get(t)
                else:
                    assert series.get(t) == oracle[t]

    # blocked readers release on exactly the awaited index
    series = TimeSeries(capacity=64)
    released_at = {}
    barrier = threading.Barrier(4)

    def reader(index):
        barrier.wait()
        value = series.get(index)
        released_at[index] = (len(series), value)

    threads = [threading.Thread(target=reader, args=(i,)) for i in (3, 7, 11)]
    for thread in threads:
        thread.start()
    barrier.wait()
    for value in range(12):
        series.append(value)
        time.sleep(0.0005)
    for thread in threads:
        thread.join(timeout=5.0)
    for index in (3, 7, 11):
        length_at_release, value = released_at[index]
        assert value == index  # the t-th appended value, exactly
        assert length_at_release >= index + 1

    elapsed = time.monotonic() - start_wall
    assert elapsed < 10.0, f"oracle suite took {elapsed:.1f} s (budget 10 s)"
    announce(1, f"time-series oracle suite ({scripts} scripts, {elapsed:.1f} s)")


# ---------------------------------------------------------------------------
# 2. back-end mode equivalence over 10 000 cycles
# ---------------------------------------------------------------------------
def test_criterion_2_mode_equivalence():
    cycles = 10_000

    def policy(obs):
        return HandAction(
            torque=np.clip(0.04 - 0.3 * obs.position - 0.01 * obs.velocity, -0.3, 0.3)
        )

    def run(config):
        clock = SimulatedClock(patience=30.0)
        data = RobotData(capacity=cycles + 8, clock=clock)
        backend = Backend(SimDriver(clock=clock), data, config).start()
        frontend = Frontend(data)
        action = HandAction(torque=np.full(NUM_JOINTS, 0.02))
        frontend.append_desired_action(action)
        for t in range(cycles):
            obs = frontend.get_observation(t)
            if t + 1 < cycles:
                frontend.append_desired_action(policy(obs))
        backend.stop()
        backend.join(10.0)
        return data

    data_nrt = run(BackendConfig(mode=Mode.NON_REAL_TIME))
    data_rt = run(BackendConfig(mode=Mode.REAL_TIME, delta=0.001))
    for t in range(cycles):
        assert data_nrt.desired_actions.get(t) == data_rt.desired_actions.get(t)
        assert data_nrt.applied_actions.get(t) == data_rt.applied_actions.get(t)
        assert data_nrt.observations.get(t) == data_rt.observations.get(t)
    announce(2, f"mode equivalence, bit-identical a, a', y over {cycles} cycles")


# ---------------------------------------------------------------------------
# 3. watchdog and repeat policies
# ---------------------------------------------------------------------------
def test_criterion_3_watchdog_and_repeat():
    # shutdown policy: stalling beyond max_missed_actions shuts down within
    # one cycle of the threshold
    clock = SimulatedClock(patience=0.002)
    config = BackendConfig(
        mode=Mode.REAL_TIME,
        delta=0.001,
        max_missed_actions=10,
        late_action_policy=LateActionPolicy.SHUTDOWN,
    )
    data = RobotData(capacity=1000, clock=clock)
    backend = Backend(SimDriver(clock=clock), data, config).start()
    frontend = Frontend(data)
    frontend.append_desired_action(HandAction.zero())  # then stall forever
    backend.join(30.0)
    assert not backend.running
    final = data.status.get(data.status.newest_index())
    assert final.state is Status.SHUTDOWN
    assert "missed 11 consecutive actions" in final.message  # threshold + 1
    assert len(data.observations) == 1  # no further cycles ran

    # repeat policy: a' contains exactly the repeated applied actions
    clock = SimulatedClock(patience=0.002)
    config = BackendConfig(
        mode=Mode.REAL_TIME,
        delta=0.001,
        late_action_policy=LateActionPolicy.REPEAT_PREVIOUS,
    )
    data = RobotData(capacity=1000, clock=clock)
    backend = Backend(SimDriver(clock=clock), data, config).start()
    frontend = Frontend(data)
    first = HandAction(torque=np.full(NUM_JOINTS, 0.03))
    frontend.append_desired_action(first)
    deadline = time.monotonic() + 20.0
    while len(data.observations) < 6 and time.monotonic() < deadline:
        time.sleep(0.001)
    backend.stop()
    backend.join(10.0)
    repeats = len(data.applied_actions) - 1
    assert repeats >= 5
    applied_first = data.applied_actions.get(0)
    assert np.array_equal(applied_first.torque, first.torque)
    for t in range(1, repeats + 1):
        assert data.applied_actions.get(t) == applied_first
        assert data.status.get(t).state is Status.ACTION_REPEATED
    announce(3, f"watchdog shutdown at threshold + repeat policy ({repeats} repeats)")


# ---------------------------------------------------------------------------
# 4. safety bound and idempotence under fuzzing
# ---------------------------------------------------------------------------
def test_criterion_4_safety_fuzz():
    cfg = SafetyConfig()
    rng = np.random.default_rng(77)
    total = 1_000_000
    chunk = 100_000
    checked = 0
    for chunk_index in range(total // chunk):
        scales = np.array([1e-9, 1.0, 5.0, 1e3, 1e8])[chunk_index % 5]
        torque = rng.uniform(-scales, scales, size=(chunk, NUM_JOINTS))
        # sprinkle exact boundary and zero rows among the fuzzed commands
        torque[:: 1000] = cfg.max_torque
        torque[5 :: 1000] = -cfg.max_torque
        torque[10 :: 1000] = 0.0
        position = rng.uniform(-6.0, 6.0, size=(chunk, NUM_JOINTS))
        velocity = rng.uniform(
            -cfg.max_velocity, cfg.max_velocity, size=(chunk, NUM_JOINTS)
        )
        applied = apply_torque_safety(torque, position, velocity, cfg)
        assert np.isfinite(applied).all()
        assert np.abs(applied).max() <= cfg.max_torque
        twice = apply_torque_safety(applied, position, velocity, cfg)
        assert np.array_equal(applied, twice)  # idempotent, bit for bit
        checked += chunk
    assert checked == total

    # the hard bound also holds for over-speed observations, where the
    # velocity damping stage is active
    torque = rng.uniform(-1e6, 1e6, size=(200_000, NUM_JOINTS))
    position = rng.uniform(-6.0, 6.0, size=(200_000, NUM_JOINTS))
    velocity = rng.uniform(-60.0, 60.0, size=(200_000, NUM_JOINTS))
    applied = apply_torque_safety(torque, position, velocity, cfg)
    assert np.abs(applied).max() <= cfg.max_torque
    announce(4, "safety bound over 1.2e6 fuzzed commands, idempotence on 1e6")


# ---------------------------------------------------------------------------
# 5. QP correctness against the independent oracle
# ---------------------------------------------------------------------------
def test_criterion_5_qp_corpus():
    rng = np.random.default_rng(1234)
    problems = 1000
    worst_kkt = 0.0
    worst_gap = 0.0
    for index in range(problems):
        k = 1 + index % 3
        qp, contacts, _ = random_feasible_qp(rng, k)
        solution = solve_qp(qp)
        assert solution.status.value == "optimal"
        assert solution.kkt_residual < 1e-8
        assert np.abs(qp.A @ solution.y - qp.b).max() < 1e-9
        assert np.all(qp.G @ solution.y <= qp.h + 1e-9)

        y_oracle, _, converged = qp_splitting_oracle(qp.A, qp.b, qp.G, qp.h)
        assert converged
        gap = float(np.abs(solution.y - y_oracle).max())
        assert gap < 1e-6
        worst_gap = max(worst_gap, gap)
        worst_kkt = max(worst_kkt, solution.kkt_residual)

        # every returned force lies inside the *exact* cone
        mu = contacts.friction_coefficient
        for contact, force in zip(contacts.contacts, solution.y.reshape(-1, 3)):
            f_n = force @ contact.normal
            f_p = force - f_n * contact.normal
            assert f_n >= -1e-9
            assert np.linalg.norm(f_p) <= mu * f_n + 1e-9
    announce(
        5,
        f"{problems} random QPs: worst KKT {worst_kkt:.2e}, oracle gap {worst_gap:.2e}",
    )


# ---------------------------------------------------------------------------
# 6. jacobian and virtual-work identities
# ---------------------------------------------------------------------------
def test_criterion_6_jacobian_and_virtual_work():
    geometry = HandGeometry.symmetric()
    rng = np.random.default_rng(55)
    worst_rel = 0.0
    for _ in range(1000):
        finger = geometry.fingers[int(rng.integers(0, 3))]
        q = rng.uniform(-np.pi, np.pi, 3)
        analytic = jacobian(finger, q)
        numeric = numeric_jacobian(lambda x: forward_kinematics(finger, x), q)
        rel = np.abs(analytic - numeric).max() / max(1.0, np.abs(analytic).max())
        worst_rel = max(worst_rel, rel)
    assert worst_rel < 1e-5

    from trimanip.control import TipGains, impedance_torques

    gains = TipGains(p_tip=50.0, d_tip=1.0)
    worst_vw = 0.0
    for _ in range(1000):
        finger = geometry.fingers[int(rng.integers(0, 3))]
        q = rng.uniform(-1.5, 1.5, 3)
        qdot = rng.uniform(-4, 4, 3)
        force = rng.uniform(-5, 5, 3)
        target = rng.uniform(-0.3, 0.3, 3)
        target_vel = rng.uniform(-1, 1, 3)
        jac = jacobian(finger, q)
        total = (
            force
            + gains.p_tip * (target - forward_kinematics(finger, q))
            + gains.d_tip * (target_vel - jac @ qdot)
        )
        tau = impedance_torques(finger, q, qdot, force, target, target_vel, gains)
        worst_vw = max(worst_vw, abs(tau @ qdot - total @ (jac @ qdot)))
    assert worst_vw < 1e-10
    announce(6, f"jacobian FD {worst_rel:.2e}, virtual work {worst_vw:.2e}")


# ---------------------------------------------------------------------------
# 7. lift and circle tracking at desk scale
# ---------------------------------------------------------------------------
def test_criterion_7_lift_and_circle():
    config = RunConfig.defaults()

    start = time.monotonic()
    lift = run_tracking_task(config, "lift")
    lift_wall = time.monotonic() - start
    assert not lift.shutdown, lift.shutdown_message
    assert lift_wall < 60.0
    assert lift.final_z_error < 0.01
    assert lift.equality_residuals.max() < 1e-9  # wrench identity, every cycle
    assert lift.fallback_cycles == 0

    start = time.monotonic()
    circle = run_tracking_task(config, "circle")
    circle_wall = time.monotonic() - start
    assert not circle.shutdown, circle.shutdown_message
    assert circle_wall < 60.0
    assert circle.rms_planar_error < 0.01
    assert circle.equality_residuals.max() < 1e-9
    announce(
        7,
        f"lift z-err {lift.final_z_error:.2e} m in {lift_wall:.0f} s, "
        f"circle rms {circle.rms_planar_error:.2e} m in {circle_wall:.0f} s",
    )


# ---------------------------------------------------------------------------
# 8. reach sanity with the scripted IK policy
# ---------------------------------------------------------------------------
def test_criterion_8_reach_sanity():
    config = RunConfig.defaults()
    result = run_reach(config, seed=2024, episodes=50)
    assert not result.shutdown
    assert result.episodes == 50
    assert result.mean_final_error < 0.02
    announce(8, f"50 episodes, mean final tip error {result.mean_final_error:.4f} m")


# ---------------------------------------------------------------------------
# 9. environment structural invariants
# ---------------------------------------------------------------------------
def test_criterion_9_env_structure():
    def stack():
        clock = SimulatedClock(patience=10.0)
        data = RobotData(capacity=30_000, clock=clock)
        backend = Backend(SimDriver(clock=clock), data, BackendConfig()).start()
        return Frontend(data), backend, data

    # augmented state literally contains the input action
    frontend, backend, _ = stack()
    action = HandAction(torque=np.full(NUM_JOINTS, 0.02))
    state, _, _, _ = AugmentedEnv(frontend).step(action)
    assert state.action is action
    backend.stop(), backend.join(5.0)

    # reduced-rate steps append exactly k actions, observation at t = n*k
    frontend, backend, data = stack()
    env = ReducedRateEnv(frontend, rate_divisor=10)
    for n in range(8):
        _, _, _, info = env.step(action)
        assert len(data.desired_actions) == (n + 1) * 10
        assert info["t"] == n * 10
    backend.stop(), backend.join(5.0)

    # approximate mapping: raw-observation dimensionality, last index
    frontend, backend, data = stack()
    env = ApproxEnv(frontend, rate_divisor=10)
    state, _, _, info = env.step(action)
    assert info["t"] == 9
    assert state.position.shape == (NUM_JOINTS,)
    assert not hasattr(state, "action")
    backend.stop(), backend.join(5.0)

    # replay determinism: identical (s, a) sequences from identical driver
    # states produce identical rewards and next states
    def episode():
        frontend, backend, _ = stack()
        geometry = HandGeometry.symmetric()
        env = ReachEnv(frontend, geometry, seed=31)
        state = env.reset()
        trace = []
        for _ in range(15):
            state, reward, done, _ = env.step(reach_policy(geometry, state))
            trace.append((state.copy(), reward, done))
        backend.stop(), backend.join(5.0)
        return trace

    for (s1, r1, d1), (s2, r2, d2) in zip(episode(), episode()):
        assert np.array_equal(s1, s2) and r1 == r2 and d1 == d2
    announce(9, "env structural invariants and replay determinism")


# ---------------------------------------------------------------------------
# 10. performance headroom over the 1 kHz requirement
# ---------------------------------------------------------------------------
def test_criterion_10_performance():
    result = run_bench(RunConfig.defaults())
    assert result.cycles_per_second >= 10_000, (
        f"loop ran at {result.cycles_per_second:.0f} cycles/s"
    )
    assert result.qp_median_us < 50.0, f"QP median {result.qp_median_us:.1f} us"
    announce(
        10,
        f"loop {result.cycles_per_second:.0f} cycles/s, "
        f"QP median {result.qp_median_us:.1f} us",
    )
