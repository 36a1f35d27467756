import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stirmix.errors import DegenerateMean, EmptyInput
from stirmix.mixing import (
    CHUNK,
    EPS_CAP,
    FLAG_FLAT,
    FLAG_MEAN,
    FLAG_VORTEX,
    FrequencyScanRow,
    analyze_orbit,
    classify_regime,
    diffusion_indicator,
    disk_grid,
    efficiency_scan,
    frequency_map_scan,
    grid_scan,
    robust_fraction,
    scan_points,
)
from stirmix.naff import Signal, extract_fundamental
from stirmix.vortex_core import TankConfig, orbit

CFG = TankConfig(b=0.5, T=0.05)


def test_indicator_examples():
    assert diffusion_indicator([0.3, 0.3, 0.3]) == EPS_CAP
    assert diffusion_indicator([1.000003, 0.999997, 1.0]) == pytest.approx(-math.log(6e-6), rel=1e-6)
    assert diffusion_indicator([1.000003, 0.999997]) == pytest.approx(12.02, abs=0.01)
    assert diffusion_indicator([1 + 3e-7, 1.0]) == pytest.approx(15.0, abs=0.02)
    assert diffusion_indicator([1.0, 1.0 + 1e-15], cap=30) == 30


def test_indicator_threshold_correspondence():
    # eps > 12 exactly when the half-relative spread is below exp(-12)/2
    half = math.exp(-12) / 2
    assert half == pytest.approx(3e-6, rel=0.03)
    lo = 1.0
    for factor, above in ((0.99, True), (1.01, False)):
        s = half * factor
        hi = lo * (1 + s) / (1 - s)
        assert bool(diffusion_indicator([lo, hi]) > 12) is above


def test_indicator_errors():
    with pytest.raises(DegenerateMean):
        diffusion_indicator([0.2, -0.2])
    with pytest.raises(ValueError):
        diffusion_indicator([0.2])


def test_robust_fraction_examples():
    assert robust_fraction(np.full(10, EPS_CAP), 12) == 1.0
    assert robust_fraction(np.r_[np.full(5, 20.0), np.full(5, 5.0)], 12) == 0.5
    assert robust_fraction(np.array([20.0, np.nan]), 12) == 0.5
    rows = [
        FrequencyScanRow(0j, 0.1, np.array([]), 20.0),
        FrequencyScanRow(0j, 0.1, np.array([]), 20.0, FLAG_MEAN),
    ]
    assert robust_fraction(rows, 12) == 0.5
    with pytest.raises(EmptyInput):
        robust_fraction([], 12)


@settings(max_examples=200, deadline=None)
@given(
    eps=st.lists(st.one_of(st.floats(0, 30), st.just(float("nan"))), min_size=1, max_size=50),
    t1=st.floats(0, 30), t2=st.floats(0, 30),
)
def test_property_robust_fraction_monotone(eps, t1, t2):
    lo, hi = sorted((t1, t2))
    eps = np.array(eps)
    m_lo, m_hi = robust_fraction(eps, lo), robust_fraction(eps, hi)
    assert 0 <= m_hi <= m_lo <= 1


@pytest.mark.parametrize("m, label", [(0.61, "I"), (1.0, "I"), (0.6, "T"), (0.31, "T"),
                                      (0.3, "C"), (0.05, "C"), (0.0, "C")])
def test_classify(m, label):
    assert classify_regime(m) == label


def test_classify_rejects():
    with pytest.raises(ValueError):
        classify_regime(1.2)


@settings(max_examples=100, deadline=None)
@given(m=st.floats(0, 1))
def test_property_label_consistent(m):
    label = classify_regime(m)
    assert {"I": m > 0.6, "T": 0.3 < m <= 0.6, "C": m <= 0.3}[label]


def test_analyze_orbit_flags():
    nu, nus, eps, flag = analyze_orbit(np.zeros(256, complex), 128, 16)
    assert flag == FLAG_FLAT and math.isnan(eps)
    t = np.arange(256)
    nu, nus, eps, flag = analyze_orbit(np.exp(0.4j * t), 128, 16)
    assert flag == "" and nu == pytest.approx(0.4, abs=1e-12) and eps == EPS_CAP


def test_scan_flags_vortex_points():
    res = scan_points(np.array([0.5, 0.3j]), CFG, 256, 128, 16)
    assert res[0][3] == FLAG_VORTEX and math.isnan(res[0][2])
    assert res[1][3] == ""


def test_frequency_map_rows():
    rows = frequency_map_scan(CFG, n_points=7, y_range=(0.2, 0.8), n_iter=256)
    assert len(rows) == 7
    ys = [r.zeta0.imag for r in rows]
    assert ys == sorted(ys) and ys[0] == 0.2 and ys[-1] == pytest.approx(0.8)
    for r in rows:
        if not r.flag:
            assert r.eps == diffusion_indicator(r.window_nus)
    with pytest.raises(ValueError):
        frequency_map_scan(CFG, n_points=5, y_range=(0.5, 0.5), n_iter=256)


def test_boundary_frequency_is_rotation_number():
    # the wall map is a circle diffeomorphism, not a rigid rotation; its
    # rotation number is the frequency NAFF should see
    n = 8192
    z = orbit(1j, CFG, n)
    lifted = np.unwrap(np.angle(z))
    rotation = (lifted[-1] - lifted[0]) / n
    # the lifted-angle estimate is itself only good to (angle wobble)/n
    assert extract_fundamental(Signal(z)).freq == pytest.approx(rotation, rel=5e-4)
    rows = frequency_map_scan(CFG, n_points=2, y_range=(0.5, 1.0), n_iter=4096)
    assert rows[-1].nu == pytest.approx(rotation, rel=5e-4)


def test_symmetry_of_indicator():
    # the map conjugated by z -> -z is the map with the protocol halves swapped
    rng = np.random.default_rng(7)
    z0 = 0.9 * np.sqrt(rng.random(50)) * np.exp(2j * np.pi * rng.random(50))
    a = scan_points(z0, CFG, 256, 128, 16)
    b = scan_points(-z0, CFG, 256, 128, 16, first_sign=-1)
    for ra, rb in zip(a, b):
        assert ra[3] == rb[3]
        if not ra[3]:
            assert abs(ra[2] - rb[2]) < 1e-8


def test_disk_grid():
    z = disk_grid(0.25)
    assert np.all(np.abs(z) < 1)
    assert 0j in z and len(z) == len(set(z.tolist()))
    assert disk_grid(0.6).size == 9


def test_grid_scan_excludes_vortices():
    g = grid_scan(CFG, 0.25, 128, 64, 16)
    on_vortex = np.isclose(g.zeta0, 0.5) | np.isclose(g.zeta0, -0.5)
    assert on_vortex.sum() == 2
    assert all(f == FLAG_VORTEX for f, v in zip(g.flag, on_vortex) if v)


def test_small_period_is_integrable():
    # windows must hold many rotations, so the iterate count grows like 1/T
    reports = efficiency_scan([0.5], [0.02], CFG, 0.25, 8192, 4096, 256)
    assert reports[0].m > 0.9 and reports[0].label == "I"


def test_stricter_threshold_on_same_data():
    g = grid_scan(TankConfig(b=0.5, T=0.5), 0.2, 512, 256, 32)
    eps = np.where([bool(f) for f in g.flag], np.nan, g.eps)
    assert robust_fraction(eps, 15) <= robust_fraction(eps, 12)


def test_single_point_grid():
    reports = efficiency_scan([0.5], [0.05], CFG, 0.9, 256, 128, 16)
    assert reports[0].m in (0.0, 1.0)


def test_scan_report_order():
    reports = efficiency_scan([0.7, 0.3], [0.2, 0.05], CFG, 0.6, 128, 64, 16)
    assert [(r.b, r.T) for r in reports] == [(0.3, 0.05), (0.3, 0.2), (0.7, 0.05), (0.7, 0.2)]


def test_worker_count_does_not_change_results():
    y = np.linspace(0.05, 0.95, CHUNK + 10)
    z0 = 0.3 * np.cos(7 * y) + 1j * y
    one = scan_points(z0, CFG, 128, 64, 16, workers=1)
    two = scan_points(z0, CFG, 128, 64, 16, workers=2)
    for a, b in zip(one, two):
        assert a[0] == b[0] or (math.isnan(a[0]) and math.isnan(b[0]))
        assert np.array_equal(a[1], b[1])
        assert a[3] == b[3]
