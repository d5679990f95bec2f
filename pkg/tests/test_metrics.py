"""Metric axioms, hand values, and the strong/weak comparison."""
import numpy as np
import pytest

from attractorlab.errors import EmptySet, HorizonTooShort, ModelMismatch
from attractorlab.metrics import (
    TrajMetricParams,
    cross_dist,
    dist,
    dist_arrays,
    pairwise_to_set,
    point_set_dist,
    set_semidist,
    tail_from_pointwise,
    traj_dist_tail,
    traj_dist_window,
    weak_dist,
    weak_dist_arrays,
    weak_weight_total,
)
from attractorlab.models import make_spec, spec_dim
from attractorlab.state import State, Trajectory

SPECS = [
    make_spec("galerkin_nse_2d", truncation=2),
    make_spec("dyadic", nu=0.5, truncation=5, lam=2.0),
    make_spec("toy_contraction", truncation=4),
]


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.kind)
@pytest.mark.parametrize("m", ["strong", "weak"])
def test_metric_axioms(spec, m):
    rng = np.random.default_rng(17)
    n = spec_dim(spec)
    for _ in range(100):
        x, y, z = rng.standard_normal((3, n)) * rng.uniform(0.1, 10.0)
        dxy = float(dist_arrays(spec, x, y, m))
        dyx = float(dist_arrays(spec, y, x, m))
        assert dxy >= 0.0
        assert abs(dxy - dyx) < 1e-15
        assert float(dist_arrays(spec, x, x, m)) == 0.0
        dxz = float(dist_arrays(spec, x, z, m))
        dzy = float(dist_arrays(spec, z, y, m))
        assert dxy <= dxz + dzy + 1e-12


def test_weak_identity_of_indiscernibles():
    spec = SPECS[0]
    rng = np.random.default_rng(3)
    for _ in range(50):
        d = rng.standard_normal(spec_dim(spec))
        if np.linalg.norm(d) > 0:
            assert float(weak_dist_arrays(spec, d)) > 0.0


def test_weak_bounded_by_weight_total_times_strong():
    for spec in SPECS:
        w_tot = weak_weight_total(spec)
        # r/(1+r) <= r makes every term <= weight * group norm <= weight * |diff|
        for n in range(1, 101):
            d = np.zeros(spec_dim(spec))
            d[0] = 1.0 / n
            ws = float(weak_dist_arrays(spec, d))
            assert ws <= w_tot / n + 1e-15
        rng = np.random.default_rng(23)
        for _ in range(50):
            d = rng.standard_normal(spec_dim(spec))
            assert float(weak_dist_arrays(spec, d)) <= w_tot * np.linalg.norm(d) + 1e-12
            # and always below the saturation bound, whatever the strong size
            big = d * 1e6
            assert float(weak_dist_arrays(spec, big)) < w_tot


def test_weak_hand_values():
    spec = make_spec("galerkin_nse_2d", truncation=2)
    # lone unit coordinate on an |kappa|_1 = 1 mode: 2^-1 * 1/(1+1)
    d = np.zeros(spec_dim(spec))
    d[0] = 1.0
    assert abs(float(weak_dist_arrays(spec, d)) - 0.25) < 1e-15
    # cos and sin bumped together: group norm c sqrt(2)
    c = 0.3
    d2 = np.zeros(spec_dim(spec))
    d2[0] = c
    d2[1] = c
    r = c * np.sqrt(2.0)
    assert abs(float(weak_dist_arrays(spec, d2)) - 0.5 * r / (1.0 + r)) < 1e-15
    dy = make_spec("dyadic", nu=0.5, truncation=4, lam=2.0)
    d3 = np.zeros(5)
    d3[2] = 2.0
    assert abs(float(weak_dist_arrays(dy, d3)) - 0.25 * 2.0 / 3.0) < 1e-15


def test_weight_total_values():
    # 2D truncation 2: four |kappa|_1 values 1,1,2,2,2,2,3,3,3,3,4,4
    assert abs(weak_weight_total(make_spec("galerkin_nse_2d", truncation=2)) - 2.625) < 1e-15
    dy = make_spec("dyadic", nu=0.5, truncation=4, lam=2.0)
    assert abs(weak_weight_total(dy) - (2.0 - 2.0 ** (-4))) < 1e-15


def test_state_level_wrappers_and_mismatch():
    spec = SPECS[2]
    x = State(np.array([1.0, 0.0, 0.0, 0.0]), spec)
    y = State(np.zeros(4), spec)
    assert dist(x, y, "strong") == 1.0
    assert weak_dist(x, y) == 0.5
    other = State(np.zeros(5), make_spec("toy_contraction", truncation=5))
    with pytest.raises(ModelMismatch):
        dist(x, other, "strong")
    with pytest.raises(ValueError):
        dist(x, y, "euclid")


def test_cross_dist_matches_cdist_and_loops():
    spec = SPECS[0]
    rng = np.random.default_rng(7)
    a = rng.standard_normal((5, spec_dim(spec)))
    b = rng.standard_normal((3, spec_dim(spec)))
    cs = cross_dist(spec, a, b, "strong")
    cw = cross_dist(spec, a, b, "weak")
    assert cs.shape == (5, 3) and cw.shape == (5, 3)
    for i in range(5):
        for j in range(3):
            assert abs(cs[i, j] - np.linalg.norm(a[i] - b[j])) < 1e-12
            assert abs(cw[i, j] - float(weak_dist_arrays(spec, a[i] - b[j]))) < 1e-15
    np.testing.assert_allclose(
        pairwise_to_set(spec, a, b, "strong"), cs.min(axis=1), atol=0
    )


def test_set_semidist_hand_example():
    spec = SPECS[2]
    mk = lambda v: State(np.array(v, float), spec)
    a = [mk([0.0, 0, 0, 0]), mk([2.0, 0, 0, 0])]
    b = [mk([0.0, 0, 0, 0])]
    assert set_semidist(a, b, "strong") == 2.0
    assert set_semidist(b, a, "strong") == 0.0
    assert point_set_dist(mk([1.0, 0, 0, 0]), a, "strong") == 1.0
    with pytest.raises(EmptySet):
        set_semidist([], a, "strong")


def _toy_traj(samples, dt=0.5, t0=0.0, trunc=None):
    arr = np.atleast_2d(np.asarray(samples, float))
    spec = make_spec("toy_contraction", truncation=trunc or arr.shape[1])
    return Trajectory(t0=t0, dt=dt, samples=arr, model=spec)


def test_traj_window_sup():
    u = _toy_traj([[0.0, 0], [1.0, 0], [3.0, 0], [2.0, 0], [0.5, 0]])
    v = _toy_traj(np.zeros((5, 2)))
    assert traj_dist_window(u, v, 0.0, 2.0, "strong") == 3.0
    assert traj_dist_window(u, v, 1.5, 2.0, "strong") == 2.0
    # weak sup picks the same maximizing sample here
    r = 3.0
    assert abs(traj_dist_window(u, v, 0.0, 2.0, "weak") - 1.0 * r / (1 + r)) < 1e-15


def test_tail_hand_value_constant():
    c = 0.4
    d = np.full(41, c)
    got = tail_from_pointwise(d, 0.1, 4)
    want = (1.0 - 2.0 ** (-4)) * c / (1.0 + c)
    assert abs(got - want) < 1e-15


def test_tail_hand_value_growing():
    # d(t) = t on [0, 3] with dt = 0.5: s_T = T
    d = np.arange(7) * 0.5
    got = tail_from_pointwise(d, 0.5, 3)
    want = sum(2.0 ** (-T) * T / (1.0 + T) for T in (1, 2, 3))
    assert abs(got - want) < 1e-15


def test_traj_tail_matches_pointwise_reduction():
    rng = np.random.default_rng(9)
    u = _toy_traj(rng.standard_normal((41, 3)), dt=0.1)
    v = _toy_traj(rng.standard_normal((41, 3)), dt=0.1)
    p = TrajMetricParams(t_max_windows=4)
    for m in ("strong", "weak"):
        got = traj_dist_tail(u, v, 0.0, m, p)
        d = dist_arrays(u.model, u.samples, v.samples, m)
        assert abs(got - tail_from_pointwise(d, 0.1, 4)) < 1e-15
    assert traj_dist_tail(u, u, 0.0, "strong", p) == 0.0


def test_traj_tail_horizon_guard():
    u = _toy_traj(np.zeros((11, 2)), dt=0.1)
    with pytest.raises(HorizonTooShort):
        traj_dist_tail(u, u, 0.0, "strong", TrajMetricParams(t_max_windows=2))


def test_traj_model_mismatch():
    u = _toy_traj(np.zeros((3, 2)))
    w = _toy_traj(np.zeros((3, 3)))
    with pytest.raises(ModelMismatch):
        traj_dist_window(u, w, 0.0, 1.0, "strong")


def test_dist_arrays_guards():
    spec = SPECS[0]
    with pytest.raises(ModelMismatch):
        dist_arrays(spec, np.zeros(3), np.zeros(3), "strong")
    with pytest.raises(ValueError):
        dist_arrays(spec, np.zeros(spec_dim(spec)), np.zeros(spec_dim(spec)), "w")
