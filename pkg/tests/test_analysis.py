import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nmflow import jc, sbm
from nmflow.analysis import (
    MARKOVIAN, NM_WITH_ENERGY_BACKFLOW, NM_WITHOUT_ENERGY_BACKFLOW, IntervalReport, Trajectory,
    classify, detect_intervals, first_sign_change, merge_intervals, overlap_correlation,
    positive_intervals, verify_relation,
)
from nmflow.errors import DomainError

from conftest import SBM_CASES, sbm_params


def make_traj(t, iq, ie, B=None, omega0=1.0):
    n = len(t)
    B = np.zeros((n, 3)) if B is None else B
    return Trajectory(t, B, np.zeros(n), np.asarray(iq, float), np.asarray(ie, float), omega0=omega0)


def test_trajectory_validation():
    t = np.linspace(0, 1, 5)
    with pytest.raises(DomainError):
        Trajectory(t, np.zeros((4, 3)), np.zeros(5), np.zeros(5), np.zeros(5))
    with pytest.raises(DomainError):
        Trajectory(t, np.zeros((5, 3)), np.zeros(5), np.zeros(4), np.zeros(5))
    with pytest.raises(DomainError):
        Trajectory(t[::-1], np.zeros((5, 3)), np.zeros(5), np.zeros(5), np.zeros(5))
    with pytest.raises(DomainError):
        Trajectory(t, np.zeros((5, 3)), np.zeros(5), np.zeros(5), np.zeros(5), rates={"g": np.zeros(2)})


def test_subsample_and_columns():
    t = np.linspace(0, 1, 11)
    tr = Trajectory(t, np.zeros((11, 3)), t, t, t, rates={"g": t})
    sub = tr.subsample(5)
    assert len(sub) == 3 and np.array_equal(sub.rates["g"], [0, 0.5, 1.0])
    assert list(tr.columns())[:7] == ["t", "B1", "B2", "B3", "F_M", "I_Q", "I_E"]


def test_positive_intervals_interpolated_crossings():
    t = np.linspace(0, 2 * np.pi, 2001)
    ivs = positive_intervals(t, np.sin(2 * t))
    assert len(ivs) == 2
    assert ivs[0][0] == 0.0 and ivs[0][1] == pytest.approx(np.pi / 2, abs=1e-6)
    assert ivs[1][0] == pytest.approx(np.pi, abs=1e-6)
    assert ivs[1][1] == pytest.approx(3 * np.pi / 2, abs=1e-6)


def test_threshold_suppresses_dust():
    t = np.linspace(0, 1, 11)
    y = -np.ones(11)
    y[5] = 1e-13
    assert positive_intervals(t, y, 1e-10) == []
    assert len(positive_intervals(t, y, 0.0)) == 1


def test_merge_idempotent():
    ivs = [(0.0, 1.0), (1.05, 2.0), (3.0, 4.0)]
    once = merge_intervals(ivs, 0.1)
    assert once == [(0.0, 2.0), (3.0, 4.0)]
    assert merge_intervals(once, 0.1) == once


@settings(max_examples=100, deadline=None)
@given(y=st.lists(st.floats(-1, 1), min_size=3, max_size=60), gap=st.floats(0, 0.2))
def test_interval_invariants(y, gap):
    t = np.linspace(0, 1, len(y))
    ivs = merge_intervals(positive_intervals(t, y), gap)
    assert merge_intervals(ivs, gap) == ivs
    for a, b in ivs:
        assert 0 <= a <= b <= 1
    for (_, b), (c, _) in zip(ivs[:-1], ivs[1:]):
        assert b <= c


def test_classify_consistency():
    assert classify([], []) == MARKOVIAN
    assert classify([(0, 1)], []) == NM_WITHOUT_ENERGY_BACKFLOW
    assert classify([(0, 1)], [(0.2, 0.3)]) == NM_WITH_ENERGY_BACKFLOW


def test_first_sign_change():
    t = np.linspace(0, 1, 11)
    assert first_sign_change(t, 0.55 - t) == pytest.approx(0.55)
    assert first_sign_change(t, 1 + t) is None


def test_detect_needs_three_samples():
    with pytest.raises(DomainError):
        detect_intervals(make_traj([0.0, 1.0], [0, 0], [0, 0]))
    with pytest.raises(DomainError):
        detect_intervals(make_traj([0.0, 0.5, 1.0], [0] * 3, [0] * 3), threshold=-1)


def test_threshold_is_scale_free():
    t = np.linspace(0, 10, 1001)
    y = np.sin(t) * np.exp(-t)
    a = detect_intervals(make_traj(t, y, y))
    b = detect_intervals(make_traj(t, y, 1e-6 * y))
    assert a.qfi_backflow_intervals == b.energy_backflow_intervals


def test_jc_regimes():
    t = np.linspace(0, 50, 10001)
    weak = detect_intervals(jc.jc_trajectory(jc.JcParams(1.0, 0.2, 1.0), t))
    assert weak.classification == MARKOVIAN
    assert overlap_correlation(weak) is None
    strong = detect_intervals(jc.jc_trajectory(jc.JcParams(1.0, 5.0, 1.0), t))
    assert strong.classification == NM_WITH_ENERGY_BACKFLOW
    assert strong.qfi_backflow_intervals == strong.energy_backflow_intervals
    assert overlap_correlation(strong) == 1.0


def test_jc_relation_residual():
    t = np.linspace(0, 20, 2001)
    for g0 in (0.2, 5.0):
        rep = verify_relation(jc.jc_trajectory(jc.JcParams(1.0, g0, 1.0), t), "jc")
        assert rep.residual < 1e-12 and rep.n_excluded == 0


def test_sbm_classifications(ohmic_ints):
    tr = sbm.sbm_trajectory(ohmic_ints)
    rep = detect_intervals(tr)
    assert rep.classification == NM_WITHOUT_ENERGY_BACKFLOW
    assert overlap_correlation(rep) == 0.0
    assert verify_relation(tr, "sbm").residual < 1e-10


def test_sbm_superohmic_locked_phase():
    p = sbm_params(**SBM_CASES["superohmic"])
    tr = sbm.sbm_trajectory(sbm.sbm_integrals(p, sbm.uniform_grid(50.0, 5e-3)))
    rep = detect_intervals(tr)
    assert rep.classification == NM_WITH_ENERGY_BACKFLOW
    end = rep.sigma_z_sign_change if rep.sigma_z_sign_change is not None else tr.t[-1]
    assert overlap_correlation(rep.restricted(end)) == 1.0


def test_relation_excludes_small_b3():
    t = np.linspace(0, 1, 5)
    B = np.zeros((5, 3))
    B[:, 2] = [1, 0.5, 0.0, -0.5, -1]
    iq = 4 * B[:, 2] * np.array([1, 2, 3, 4, 5.0])
    ie = np.array([1, 2, 3, 4, 5.0])
    rep = verify_relation(make_traj(t, iq, ie, B), "sbm")
    assert rep.n_excluded == 1 and rep.n_used == 4 and rep.residual == 0.0
    with pytest.raises(DomainError):
        verify_relation(make_traj(t, iq, ie, B), "other")


def test_overlap_partial_and_restricted():
    rep = IntervalReport([(0.0, 1.0), (2.0, 3.0)], [(0.5, 1.0)], NM_WITH_ENERGY_BACKFLOW,
                         t_span=(0.0, 4.0), grid_step=0.01)
    assert overlap_correlation(rep) == pytest.approx(0.25)
    r = rep.restricted(1.5)
    assert r.qfi_backflow_intervals == [(0.0, 1.0)]
    assert overlap_correlation(r) == pytest.approx(0.5)
    assert r.t_span == (0.0, 1.5)


def test_overlap_snaps_same_cell_crossings():
    rep = IntervalReport([(1.0, 2.0)], [(1.004, 1.997)], NM_WITH_ENERGY_BACKFLOW, grid_step=0.01)
    assert overlap_correlation(rep) == 1.0


def test_report_dict_roundtrip_fields():
    rep = IntervalReport([(1.0, 2.0)], [], NM_WITHOUT_ENERGY_BACKFLOW, 0.0, (0.0, 3.0), 0.1, 2.5)
    d = rep.as_dict()
    assert d["qfi_backflow_intervals"] == [[1.0, 2.0]]
    assert d["sigma_z_sign_change"] == 2.5
