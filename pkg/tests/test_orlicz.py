import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from besov_path_lab import (
    DiscreteMeasure,
    ExpPower,
    PLog,
    Power,
    lux_equivalence_mid,
    luxemburg_norm,
    luxemburg_norms,
    parse_young,
    young_eval,
    young_inverse,
)
from besov_path_lab.orlicz import luxemburg_norm_bisect

YOUNG = [Power(1.0), Power(2.0), Power(3.5), ExpPower(1.0), ExpPower(2.0), PLog(2.0), PLog(4.0)]
young_st = st.sampled_from(YOUNG)


@st.composite
def inputs(draw, n_max=12):
    n = draw(st.integers(1, n_max))
    v = draw(arrays(float, n, elements=st.floats(0, 50)))
    w = draw(arrays(float, n, elements=st.floats(0.01, 3)))
    return v, w


def test_young_eval_examples():
    assert young_eval(ExpPower(2), 0.0) == 0.0
    assert young_eval(ExpPower(2), 1.0) == pytest.approx(math.e - 1, rel=1e-15)
    assert young_eval(Power(2), 3.0) == 9.0
    with pytest.raises(ValueError):
        young_eval(Power(2), -1.0)


def test_young_inverse_examples():
    assert young_inverse(ExpPower(2), math.e - 1) == pytest.approx(1.0, rel=1e-14)
    assert young_inverse(Power(3), 8.0) == pytest.approx(2.0, rel=1e-14)


def test_plog_inverse_pinned():
    # independent bracketing of x^2 log(1 + x) = 1
    lo, hi = 1.0, 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if mid**2 * math.log1p(mid) < 1 else (lo, mid)
    assert lo == pytest.approx(1.1447901016922515, rel=1e-14)
    assert young_inverse(PLog(2), 1.0) == pytest.approx(1.1447901016922515, rel=1e-12)


@pytest.mark.parametrize("N", YOUNG, ids=lambda N: N.label)
def test_inverse_of_eval_is_identity(N):
    x = np.linspace(0.0, 50.0, 401)[1:]
    y = np.array([young_eval(N, float(a)) for a in x])
    ok = np.isfinite(y)
    back = np.array([young_inverse(N, float(b)) for b in y[ok]])
    np.testing.assert_allclose(back, x[ok], rtol=1e-9)


def test_phi2_extreme_arguments_do_not_overflow():
    N = ExpPower(2.0)
    assert np.isfinite(N.log_eval(np.array([100.0]))).all()
    assert luxemburg_norm([1e3, 1.0], [1.0, 1.0], N) > 0


def test_luxemburg_examples():
    assert luxemburg_norm([0.0, 0.0], [0.5, 0.5], Power(2)) == 0.0
    assert luxemburg_norm([], [], Power(2)) == 0.0
    for p in (1.0, 2.0, 7.0):
        assert luxemburg_norm([3.7], [1.0], Power(p)) == pytest.approx(3.7, rel=1e-12)
    c = 2.5
    val = luxemburg_norm(np.full(4, c), DiscreteMeasure.uniform(4), ExpPower(2))
    assert val == pytest.approx(c / math.sqrt(math.log(2)), rel=1e-10)
    assert val == pytest.approx(luxemburg_norm_bisect(np.full(4, c), np.full(4, 0.25), ExpPower(2)), rel=1e-10)
    with pytest.raises(ValueError):
        luxemburg_norm([np.nan], [1.0], Power(2))
    with pytest.raises(ValueError):
        luxemburg_norm([1.0, 2.0], [1.0], Power(2))


def test_zero_weight_atoms_are_ignored():
    a = luxemburg_norm([1.0, 100.0, 2.0], [0.3, 0.0, 0.7], ExpPower(2))
    b = luxemburg_norm([1.0, 2.0], [0.3, 0.7], ExpPower(2))
    assert a == pytest.approx(b, rel=1e-12)


def test_equivalence_mid_examples():
    assert lux_equivalence_mid([1.0], [1.0], Power(2)) == pytest.approx(2.0, rel=1e-9)
    assert lux_equivalence_mid([0.0], [1.0], Power(2)) == 0.0
    norm = 1 / math.sqrt(math.log(2))
    mid = lux_equivalence_mid([1.0], [1.0], ExpPower(2))
    assert norm <= mid <= 2 * norm


@given(inputs(), young_st)
def test_newton_matches_bisection(data, N):
    v, w = data
    a = luxemburg_norm(v, w, N)
    b = luxemburg_norm_bisect(v, w, N)
    assert a == pytest.approx(b, rel=1e-9, abs=1e-300)


@given(inputs(), young_st)
def test_sandwich(data, N):
    v, w = data
    n = luxemburg_norm(v, w, N)
    mid = lux_equivalence_mid(v, w, N)
    assert n - 1e-8 * n <= mid <= 2 * n + 1e-8 * n


@given(inputs(), young_st, st.floats(1e-3, 1e3))
def test_homogeneity(data, N, c):
    v, w = data
    assert luxemburg_norm(c * v, w, N) == pytest.approx(c * luxemburg_norm(v, w, N), rel=1e-9, abs=1e-300)


@given(inputs(), young_st, st.data())
def test_monotone_in_values(data, N, draw):
    v, w = data
    bump = draw.draw(arrays(float, v.size, elements=st.floats(0, 5)))
    assert luxemburg_norm(v, w, N) <= luxemburg_norm(v + bump, w, N) * (1 + 1e-10)


@given(inputs(), young_st, st.floats(0.05, 1.0), st.floats(1.0, 20.0), st.data())
def test_reweighting_bounds(data, N, a, b, draw):
    v, w = data
    density = draw.draw(arrays(float, v.size, elements=st.floats(a, b)))
    n0 = luxemburg_norm(v, w, N)
    n1 = luxemburg_norm(v, w * density, N)
    lo, hi = min(density.min(), 1.0), max(density.max(), 1.0)
    assert lo * n0 * (1 - 1e-9) <= n1 <= hi * n0 * (1 + 1e-9)


@given(young_st, st.floats(0.0, 20.0), st.floats(0.0, 20.0), st.floats(0.0, 1.0))
def test_young_function_is_convex(N, x, y, t):
    lhs = young_eval(N, t * x + (1 - t) * y)
    rhs = t * young_eval(N, x) + (1 - t) * young_eval(N, y)
    assert lhs <= rhs * (1 + 1e-12) + 1e-300


def test_batched_kernel_rows_match_single_calls(rng):
    V = rng.exponential(size=(7, 30))
    w = rng.uniform(0.1, 1.0, 30)
    for N in YOUNG:
        batch = luxemburg_norms(V, w, N)
        single = [luxemburg_norm(row, w, N) for row in V]
        np.testing.assert_allclose(batch, single, rtol=1e-12)


def test_parse_young():
    assert parse_young("phi2").label == ExpPower(2).label
    assert parse_young("power:3").p == 3.0
    assert isinstance(parse_young("plog:2"), PLog)
    with pytest.raises(ValueError):
        parse_young("gauss:2")
    with pytest.raises(ValueError):
        Power(0.5)
