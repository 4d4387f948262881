import math

import numpy as np
import pytest

from xyotto import analysis, model
from xyotto.analysis import axis
from xyotto.cycle import Regime
from xyotto.model import ModelParams

WEAK = ModelParams(0.01, 2.0, 4.0, 1.0)
STRONG = ModelParams(10.0, 2.6, 4.0, 1.0)
GRID6 = axis(0.01, 6.0, 101)
GRID40 = axis(0.01, 40.0, 201)


def test_axis():
    assert np.allclose(axis(1, 3, 3), [1, 2, 3])
    assert np.allclose(axis(1e-3, 10, 5, "log"), [1e-3, 1e-2, 1e-1, 1, 10])
    for bad in ((1, 1, 3), (1, 2, 1)):
        with pytest.raises(ValueError):
            axis(*bad)
    with pytest.raises(ValueError):
        axis(0.0, 1.0, 3, "log")


def test_counter_rotating_condition():
    assert analysis.counter_rotating_condition(STRONG)
    assert not analysis.counter_rotating_condition(WEAK)
    assert not analysis.counter_rotating_condition(ModelParams(10.0, 1.6, 4.0, 1.0))  # 16 = 16


def test_sweep_shape_labels_and_first_law():
    rm = analysis.sweep_regimes(WEAK, 1.0, GRID6, GRID6[:50])
    assert rm.codes.shape == (101, 50)
    labels = rm.labels()
    assert set(np.unique(labels)) <= {
        "engine-regular", "engine-counter-rotating", "refrigerator", "accelerator", "heater", "degenerate"
    }
    assert rm.first_law_max < 1e-10
    recs = list(rm.records())
    assert len(recs) == 101 * 50
    assert set(recs[0]) == {"t1", "t2", "regime", "w_cyc", "q1", "q2", "eta"}


def test_sweep_parallel_matches_serial():
    a = analysis.sweep_regimes(STRONG, 0.97, GRID6, GRID6)
    b = analysis.sweep_regimes(STRONG, 0.97, GRID6, GRID6, workers=3)
    assert np.array_equal(a.codes, b.codes)
    assert np.array_equal(a.w_cyc, b.w_cyc)


def test_sweep_rejects_nonpositive_grid():
    with pytest.raises(ValueError):
        analysis.sweep_regimes(WEAK, 1.0, [0.0, 1.0], [1.0, 2.0])


def test_weak_coupling_topology():
    rm = analysis.sweep_regimes(WEAK, 1.0, GRID6, GRID6)
    regions = rm.engine_regions()
    assert len(regions) == 1
    assert regions[0][:, 0].any()
    assert not rm.engine_mask("counter-rotating").any()


def test_strong_coupling_topology():
    rm = analysis.sweep_regimes(STRONG, 1.0, GRID40, GRID40)
    assert len(rm.engine_regions("regular")) == 1
    assert len(rm.engine_regions("counter-rotating")) == 1
    assert len(rm.engine_regions()) == 2
    assert not rm.engine_mask()[:, 0].any()


def test_counter_rotating_region_shrinks_with_p():
    a = analysis.sweep_regimes(STRONG, 1.0, GRID40, GRID40).engine_mask("counter-rotating").sum()
    b = analysis.sweep_regimes(STRONG, 0.95, GRID40, GRID40).engine_mask("counter-rotating").sum()
    assert 0 < b < a


def test_adiabaticity_curve_endpoints():
    rows = analysis.adiabaticity_curve(ModelParams(10, 2, 4, 1), [1e-4, 50.0])
    assert rows[0][1] == pytest.approx(0.929, abs=1e-3)
    assert rows[1][1] >= 0.999
    assert all(err is None for *_, err in rows)
    with pytest.raises(ValueError):
        analysis.adiabaticity_curve(WEAK, [0.0])


def test_efficiency_curve_beats_otto():
    p = ModelParams(0.01, 0.8, 4.0, 1.0, T2=0.2)
    curves = analysis.efficiency_curve(p, axis(0.2, 6, 300), [1.0, 0.999])
    assert np.nanmax(curves[1.0]) > 0.75
    assert np.nanmax(curves[0.999]) < np.nanmax(curves[1.0])
    assert np.isnan(curves[1.0][0])  # T1 = T2: not an engine


def test_efficiency_curve_counter_rotating_orientation():
    p = ModelParams(10.0, 2.6, 4.0, 1.0, T1=0.05)
    curves = analysis.efficiency_curve(p, axis(0.1, 10, 100), [1.0], vary="T2")
    assert np.any(np.isfinite(curves[1.0]))
    with pytest.raises(ValueError):
        analysis.efficiency_curve(p, [1.0], [1.0], vary="T3")


def test_threshold_t1():
    assert analysis.find_threshold_T1(WEAK, 1.0) == 0.0
    assert analysis.find_threshold_T1(WEAK, model.p_min(WEAK)) == math.inf
    assert analysis.find_threshold_T1(WEAK, 0.6) == math.inf
    thr = [analysis.find_threshold_T1(WEAK, P) for P in (0.99, 0.97, 0.93, 0.8)]
    assert np.all(np.diff(thr) > 0)
    # root is where f1 = c(P)
    T = thr[1]
    assert model.work_function(1.0 / T, WEAK.e4_1, WEAK.e3) == pytest.approx(model.c_of_p(WEAK, 0.97), rel=1e-7)
    with pytest.raises(ValueError):
        analysis.find_threshold_T1(STRONG, 0.99)


def test_threshold_matches_sweep_edge():
    rm = analysis.sweep_regimes(WEAK, 0.97, axis(0.01, 6, 201), axis(0.01, 6, 201))
    low = rm.t1_axis[rm.engine_mask()[:, 0]].min()
    thr = analysis.find_threshold_T1(WEAK, 0.97)
    assert abs(low - thr) <= rm.t1_axis[1] - rm.t1_axis[0]


def test_temperature_gap():
    rep = analysis.find_temperature_gap(STRONG, 1.0, GRID40, GRID40, P_series=[0.95])
    assert rep.T1_a < rep.T2_0 < rep.T1_b
    assert rep.verified and rep.cells_checked > 0
    assert rep.T2_0 == pytest.approx(7.254, abs=1e-3)
    (P, width), = rep.widened_vs_P
    assert P == 0.95 and width > rep.width


def test_gap_directness():
    rep = analysis.find_temperature_gap(STRONG, 1.0, GRID40, GRID40)
    rm = analysis.sweep_regimes(STRONG, 1.0, GRID40, GRID40)
    dt = GRID40[1] - GRID40[0]
    top_counter = rm.t1_axis[rm.engine_mask("counter-rotating").any(axis=1)].max()
    bottom_regular = rm.t1_axis[rm.engine_mask("regular").any(axis=1)].min()
    assert top_counter <= rep.T1_a + dt and bottom_regular >= rep.T1_b - dt


def test_gap_preconditions():
    with pytest.raises(ValueError, match="strong coupling"):
        analysis.find_temperature_gap(WEAK, 1.0, GRID40, GRID40)
    with pytest.raises(ValueError, match="P_min"):
        analysis.find_temperature_gap(STRONG, 0.5, GRID40, GRID40)
    with pytest.raises(analysis.GapNotFound, match="grid"):
        analysis.find_temperature_gap(STRONG, 1.0, axis(0.01, 6, 101), GRID40)


def test_high_efficiency_region_nested():
    regions = analysis.high_efficiency_region(ModelParams(0.01, 0.8, 4, 1), [1.0, 0.9999, 0.9997], GRID6, GRID6)
    assert regions[1.0].any()
    assert not np.any(regions[0.9999] & ~regions[1.0])
    assert not np.any(regions[0.9997] & ~regions[0.9999])


def test_regime_map_engine_mask_rotation_check():
    rm = analysis.sweep_regimes(WEAK, 1.0, GRID6[:5], GRID6[:5])
    with pytest.raises(ValueError):
        rm.engine_mask("sideways")
    assert rm.codes.dtype == np.int8
    assert Regime(int(rm.codes[0, 0])) == Regime.DEGENERATE
