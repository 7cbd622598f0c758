import io

import numpy as np
import pytest

from clawquad import oracle
from clawquad.profile import MotionLimits, ProfileInputError, plan
from clawquad.sync import (plan_synchronized, sample_synchronized, write_csv_multi)

PAPER = MotionLimits()


def test_empty_vector_rejected():
    with pytest.raises(ProfileInputError):
        plan_synchronized([], [], PAPER)
    with pytest.raises(ProfileInputError):
        plan_synchronized([0.0], [1.0, 2.0], PAPER)


def test_single_joint_matches_profile_plan():
    sync = plan_synchronized([0.2], [1.4], PAPER)
    direct = plan(0.2, 1.4, PAPER)
    assert sync.scale_factors == (1.0,)
    assert sync.limiting_index == 0
    assert sync.plans[0] == direct
    assert sync.total_duration == direct.duration


def test_identical_joints_tie_break_to_lowest_index():
    sync = plan_synchronized([0.0, 0.0], [1.0, 1.0], PAPER)
    assert sync.limiting_index == 0
    assert sync.scale_factors[0] == 1.0
    assert sync.scale_factors[1] == pytest.approx(1.0)
    assert sync.plans[0].t1 == sync.plans[1].t1


def test_scaling_preserves_displacement_exactly():
    sync = plan_synchronized([0.0, 0.0, 0.5], [0.5, 2.0, -1.2], PAPER)
    for p, (a, b) in zip(sync.plans, [(0.0, 0.5), (0.0, 2.0), (0.5, -1.2)]):
        assert p.displacement == pytest.approx(abs(b - a), abs=1e-9)
    for p in sync.plans:
        assert p.duration == pytest.approx(sync.total_duration, abs=1e-3)


def test_scaled_jerk_divided_by_sigma_cubed():
    sync = plan_synchronized([0.0, 0.0], [2.0, 0.5], PAPER)
    base = plan(0.0, 0.5, PAPER)
    sigma = sync.scale_factors[1]
    assert sigma > 1.0
    assert sync.plans[1].j_peak == pytest.approx(base.j_peak / sigma**3)
    assert sync.plans[1].t1 == pytest.approx(base.t1 * sigma)
    # scaling only reduces the realized peaks
    assert sync.plans[1].j_peak <= PAPER.j_max
    assert sync.plans[1].v_peak <= base.v_peak


def test_scaled_plan_agrees_with_oracle():
    sync = plan_synchronized([0.0, 0.0], [2.0, 0.5], PAPER)
    prof = oracle.integrate_plan(sync.plans[1])
    assert abs(prof.position[-1] - 0.5) < 1e-4
    assert np.max(np.abs(prof.jerk)) <= sync.plans[1].j_peak * (1 + 1e-9)


def test_zero_displacement_joint_holds_position():
    sync = plan_synchronized([0.3, 0.0], [0.3, 1.0], PAPER)
    assert sync.scale_factors[0] is None
    assert sync.limiting_index == 1
    times, rows = sample_synchronized(sync, 1000.0)
    assert np.all(rows[0] == 0.3)
    assert rows.shape[1] == len(times)


def test_all_zero_displacements_single_column():
    sync = plan_synchronized([0.1, -0.2], [0.1, -0.2], PAPER)
    times, rows = sample_synchronized(sync, 1000.0)
    assert rows.shape == (2, 1)
    assert rows[:, 0].tolist() == [0.1, -0.2]


def test_rows_share_grid_and_land_on_targets():
    targets = [0.5, 2.0, -1.0, 0.0]
    sync = plan_synchronized([0.0] * 4, targets, PAPER)
    times, rows = sample_synchronized(sync, 1000.0)
    assert rows.shape == (4, len(times))
    for i, target in enumerate(targets):
        assert abs(rows[i, -1] - target) <= 1e-3
        residual = rows[i] + rows[i, ::-1] - (rows[i, 0] + rows[i, -1])
        assert np.max(np.abs(residual)) <= 1e-9


def test_durations_synchronized_within_a_millisecond():
    rng = np.random.default_rng(7)
    for _ in range(25):
        n = rng.integers(2, 7)
        phi0 = rng.uniform(-2.0, 2.0, n)
        phi1 = rng.uniform(-2.0, 2.0, n)
        sync = plan_synchronized(phi0, phi1, PAPER)
        durations = [p.duration for i, p in enumerate(sync.plans)
                     if sync.scale_factors[i] is not None]
        assert max(durations) - min(durations) <= 1e-3


def test_csv_export_deterministic():
    sync = plan_synchronized([0.0, 0.1], [1.0, -0.4], PAPER)
    outputs = []
    for _ in range(2):
        times, rows = sample_synchronized(sync, 1000.0)
        buf = io.StringIO()
        write_csv_multi(times, rows, buf)
        outputs.append(buf.getvalue())
    assert outputs[0] == outputs[1]
    header = outputs[0].split("\n", 1)[0]
    assert header == "t_s,q0_rad,q1_rad"
