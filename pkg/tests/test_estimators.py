import math

import pytest

from levy_mmm import c0, find_nu
from levy_mmm.estimators import (
    H_CONST,
    H_SUP,
    H_VALUE,
    Box,
    McEstimate,
    dual_estimator,
    dual_estimator_panel,
    estimate_c0_inverse,
    path_functional,
    z_score,
)
from levy_mmm.paths import GridPath, TwoSidedPath

from conftest import BM, SP


def test_box_lattice():
    assert Box(0.2, 1.0, 0, 1).lattice(0.1).tolist() == list(range(2, 11))
    assert Box(-0.25, -0.05, 0, 1).lattice(0.1).tolist() == [-2, -1]
    assert Box(0.01, 0.02, 0, 1).lattice(0.1).size == 0


def _path(right, left=(0.0,), dt=0.25, life=None):
    return TwoSidedPath(GridPath(0.0, dt, list(left)), GridPath(0.0, dt, list(right), life))


def test_path_functionals():
    p = _path([0.0, -0.2, -0.6, -0.7, -0.9])  # points at 0.5, 0.75, 1.0
    assert path_functional(H_CONST, p) == 1.0
    assert path_functional(H_SUP, p) == 1.0
    assert path_functional(H_VALUE, p) == 1.0
    q = _path([0.0, -0.2, -0.6, -0.4, -0.9])
    assert path_functional(H_SUP, q) == 0.0 and path_functional(H_VALUE, q) == 1.0
    dead = _path([0.0, -0.2, -0.6], life=0.6)  # killed before t = 1
    assert path_functional(H_SUP, dead) == 1.0 and path_functional(H_VALUE, dead) == 0.0
    with pytest.raises(ValueError):
        path_functional("nope", p)


def test_mc_estimate_from_values():
    e = McEstimate.from_values([1.0, 2.0, 3.0], tag="x")
    assert e.mean == 2.0 and e.std_error == pytest.approx(1 / math.sqrt(3))
    assert e.to_dict()["se"] == e.std_error and e.diagnostics == {"tag": "x"}
    assert z_score(McEstimate(1, 0, 1), McEstimate(1, 0, 1)) == 0.0


def test_c0_inverse_small_sample():
    est = estimate_c0_inverse(BM, 1.0, 0.02, n=1500, seed=3)
    assert abs(est.mean - 2.0) < 4 * est.std_error
    assert est.diagnostics["tail_estimate_max"] < 1e-3
    raw = estimate_c0_inverse(BM, 1.0, 0.02, n=1500, seed=3, grid_correction=False)
    assert raw.mean > est.mean  # the correction lowers the grid-sampled integral


def test_c0_inverse_spectrally_positive():
    nu = find_nu(SP)
    est = estimate_c0_inverse(SP, nu, 0.02, n=1500, seed=4)
    assert abs(est.mean * c0(SP, nu) - 1.0) < 4 * est.std_error * c0(SP, nu)


def test_dual_estimator_small_panel():
    boxes = [Box(0.2, 1.0, 0.1, 1.5), Box(-1.0, -0.2, 0.1, 1.5)]
    panel = dual_estimator_panel(BM, 1.0, 0.0, 0.0, 0.02, boxes, (H_CONST, H_SUP), n=1500, seed=5)
    assert set(panel) == {(0, H_CONST), (0, H_SUP), (1, H_CONST), (1, H_SUP)}
    for lhs, rhs in panel.values():
        assert abs(z_score(lhs, rhs)) < 4
        assert lhs.diagnostics["constant_source"] == "closed_form"
    again = dual_estimator(BM, 1.0, 0.0, 0.0, 0.02, boxes[0], H_CONST, n=1500, seed=5)
    assert again[0].mean == panel[(0, H_CONST)][0].mean


def test_dual_estimator_killed_constant():
    lhs, rhs = dual_estimator(BM, 1.0, 1.0, 1.0, 0.02, Box(0.0, 1.0, 0.0, 2.0), n=1500, seed=6)
    assert rhs.diagnostics["constant"] == pytest.approx(2.0)
    assert abs(z_score(lhs, rhs)) < 4


def test_parallel_matches_serial():
    box = Box(0.2, 1.0, 0.1, 1.5)
    a = dual_estimator(BM, 1.0, 0, 0, 0.05, box, n=600, seed=2, workers=1)
    b = dual_estimator(BM, 1.0, 0, 0, 0.05, box, n=600, seed=2, workers=2)
    assert a[0].mean == b[0].mean and a[1].mean == b[1].mean
