import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from besov_path_lab import (
    BesovParams,
    ExpPower,
    PLog,
    Power,
    RngSpec,
    SampledPath,
    dyadic_besov_norm,
    dyadic_besov_norms,
    extend_reflect,
    extend_zero,
    full_besov_norm,
    gagliardo_seminorm,
    grr_zeta,
    holder_seminorm,
    increment_norm,
    levy_ratio,
    modulus,
    sample_brownian,
    scale_affine,
    steklov_k_estimate,
    steklov_k_profile,
)
from besov_path_lab.besov import (
    full_seminorm,
    grr_zeta_table,
    increment_norms,
    seminorm_sandwich,
)
from besov_path_lab.harness.experiments import _ramp_family, grr_violations

INF = math.inf
YOUNG = [Power(1.0), Power(2.0), Power(4.0), ExpPower(2.0)]


def ramp(J, **kw):
    return SampledPath.from_function(lambda t: t, J, **kw)


def heaviside(J):
    return SampledPath.from_function(lambda t: (t >= 0.5).astype(float), J, kind="step")


@st.composite
def paths(draw, J_min=2, J_max=6, d_max=2):
    J = draw(st.integers(J_min, J_max))
    d = draw(st.integers(1, d_max))
    v = draw(arrays(float, (2**J + 1, d), elements=st.floats(-10, 10, allow_subnormal=False)))
    kind = draw(st.sampled_from(["linear", "step"]))
    return SampledPath(0.0, 1.0, v, kind=kind)


alphas = st.floats(0.05, 0.95)
young_st = st.sampled_from(YOUNG)


# ---------------------------------------------------------------- increment norms and moduli

@pytest.mark.parametrize("p", [1.0, 2.0, 3.0])
def test_ramp_increment_oracle(p):
    f = ramp(10)
    for k in (1, 7, 64, 300, 512, 1000):
        h = k * f.dt
        assert increment_norm(f, k, Power(p)) == pytest.approx(h * (1 - h) ** (1 / p), rel=1e-12)


@pytest.mark.parametrize("p", [1.0, 2.0, 5.0])
def test_heaviside_increment_oracle(p):
    f = heaviside(10)
    for k in (1, 3, 100, 512):
        assert increment_norm(f, k, Power(p)) == pytest.approx((k * f.dt) ** (1 / p), rel=1e-12)


def test_increment_norm_edge_cases():
    f = ramp(4)
    assert increment_norm(f, f.cells, Power(2)) == 0.0
    assert increment_norm(f, f.cells + 3, Power(2)) == 0.0
    with pytest.raises(ValueError):
        increment_norm(f, 0, Power(2))
    c = SampledPath.constant([1.0, -2.0], 6)
    assert all(increment_norm(c, k, ExpPower(2)) == 0.0 for k in range(1, 65))


def test_ramp_modulus_fast_equals_exhaustive():
    f = ramp(8)
    for j in range(1, 9):
        assert modulus(f, j, Power(2), "fast") == pytest.approx(modulus(f, j, Power(2), "exhaustive"), rel=1e-14)


@given(paths(), young_st)
def test_modulus_dominates_single_shift(f, N):
    for j in range(f.J + 1):
        assert modulus(f, j, N, "exhaustive") >= modulus(f, j, N, "fast") * (1 - 1e-12)


def test_modulus_rejects_unresolved_level():
    with pytest.raises(ValueError):
        modulus(ramp(4), 5, Power(2))


# ---------------------------------------------------------------- dyadic and full norms

def test_constant_path_norm_is_lebesgue_part():
    c = SampledPath.constant(3.0, 8)
    for p in (1.0, 2.0, 6.0):
        val, prof = dyadic_besov_norm(c, BesovParams(0.5, INF, Power(p)))
        assert val == pytest.approx(3.0, rel=1e-12)
        assert prof.seminorm == 0.0
    assert full_besov_norm(c, BesovParams(0.5, INF, Power(2))) == pytest.approx(3.0, rel=1e-12)


def test_heaviside_dyadic_oracle():
    val, prof = dyadic_besov_norm(heaviside(12), BesovParams(0.25, INF, Power(2)))
    assert val == pytest.approx(2**-0.5 + 2**-0.25, rel=1e-6)
    assert prof.lebesgue == pytest.approx(2**-0.5, rel=1e-12)


def test_ramp_dyadic_oracle():
    val, prof = dyadic_besov_norm(ramp(12), BesovParams(0.5, INF, Power(2)))
    assert val == pytest.approx(3**-0.5 + 0.5, rel=1e-6)
    assert int(prof.j[np.argmax(prof.term)]) == 1


def test_ramp_full_norm_oracle():
    J = 8
    f = ramp(J)
    dt = 2.0**-J
    s = np.arange(1, 2**J + 1) * dt
    omega = np.maximum.accumulate(np.where(s < 1, s * np.sqrt(np.clip(1 - s, 0, None)), 0.0))
    semi = np.max(s**-0.5 * omega)
    leb = math.sqrt(1 / 3 + dt**2 / 6)  # trapezoid rule of t^2 on the grid
    assert full_besov_norm(f, BesovParams(0.5, INF, Power(2))) == pytest.approx(leb + semi, rel=1e-12)
    # t^-1/2 * t (1 - t)^1/2 = (t (1 - t))^1/2 peaks at t = 1/2 with value 1/2
    assert semi == pytest.approx(0.5, rel=1e-12)


def test_full_norm_requires_q_inf():
    with pytest.raises(ValueError):
        full_besov_norm(ramp(4), BesovParams(0.5, 2.0, Power(2)))


def test_dyadic_lq_sum():
    f = ramp(8)
    params = BesovParams(0.5, 2.0, Power(2))
    _, prof = dyadic_besov_norm(f, params)
    assert prof.seminorm == pytest.approx(math.sqrt(np.sum(prof.term**2)), rel=1e-14)


@given(paths(J_max=6), alphas, young_st)
def test_sandwich(f, alpha, N):
    params = BesovParams(alpha, INF, N)
    fast, full, exh = seminorm_sandwich(f, params)
    assert fast <= full * (1 + 1e-10) + 1e-12
    assert full <= 2**alpha * exh * (1 + 1e-10) + 1e-12
    assert fast == pytest.approx(dyadic_besov_norm(f, params, "fast")[1].seminorm, rel=1e-10, abs=1e-12)
    assert exh == pytest.approx(dyadic_besov_norm(f, params, "exhaustive")[1].seminorm, rel=1e-10, abs=1e-12)
    assert full == pytest.approx(full_seminorm(f, params), rel=1e-12, abs=1e-12)


@given(paths(), alphas, young_st)
def test_seminorm_vanishes_iff_constant(f, alpha, N):
    semi = dyadic_besov_norm(f, BesovParams(alpha, INF, N), "exhaustive")[1].seminorm
    # the last node never starts an increment, so constancy is on nodes 0..cells-1 plus one shift-1 step
    inner = f.values[:-1]
    const = np.all(inner == inner[0]) and np.all(f.values[-1] == f.values[-2])
    assert (semi == 0.0) == bool(const)


@given(paths(), paths(), alphas, young_st, st.floats(-5, 5))
def test_triangle_and_homogeneity(f, g, alpha, N, c):
    if (f.n, f.d) != (g.n, g.d):
        g = g.with_values(np.resize(g.values, f.values.shape))
    g = g.with_values(g.values, kind=f.kind)
    params = BesovParams(alpha, INF, N)
    nf = dyadic_besov_norm(f, params)[0]
    ng = dyadic_besov_norm(g, params)[0]
    assert dyadic_besov_norm(f + g, params)[0] <= (nf + ng) * (1 + 1e-9) + 1e-12
    assert dyadic_besov_norm(c * f, params)[0] == pytest.approx(abs(c) * nf, rel=1e-9, abs=1e-12)


@given(paths(), young_st, st.floats(0.05, 0.9), st.floats(0.01, 0.09))
def test_monotone_in_alpha(f, N, a, da):
    lo = dyadic_besov_norm(f, BesovParams(a, INF, N))[1].seminorm
    hi = dyadic_besov_norm(f, BesovParams(a + da, INF, N))[1].seminorm
    assert lo <= hi * (1 + 1e-12) + 1e-300


@given(st.integers(3, 7), st.integers(1, 3), young_st, st.sampled_from([1.0, 2.0, INF]), st.integers(0, 2**32))
def test_batch_norms_match_single_path(J, d, N, q, seed):
    rng = np.random.default_rng(seed)
    V = np.cumsum(rng.standard_normal((4, 2**J + 1, d)), axis=1)
    params = BesovParams(0.5, q, N)
    norm, semi, terms = dyadic_besov_norms(V, 0.0, 2.0, params)
    for r in range(4):
        val, prof = dyadic_besov_norm(SampledPath(0.0, 2.0, V[r]), params)
        assert norm[r] == pytest.approx(val, rel=1e-9)
        np.testing.assert_allclose(terms[r], prof.term, rtol=1e-9, atol=1e-300)


def test_exhaustive_and_power_fast_path_agree_with_generic_kernel():
    f = sample_brownian(7, 2, RngSpec(3, 1))
    N = Power(3.0)
    direct = [
        (f.dt * np.sum(np.linalg.norm(f.values[h:-1] - f.values[: -h - 1], axis=1) ** 3)) ** (1 / 3)
        for h in range(1, f.cells)
    ]
    np.testing.assert_allclose(increment_norms(f, N)[:-1], direct, rtol=1e-13)


# ---------------------------------------------------------------- Gagliardo

def test_gagliardo_constant_is_zero():
    assert gagliardo_seminorm(SampledPath.constant(2.0, 6), 0.3, 2.0) == 0.0


@pytest.mark.parametrize("s,p,tol", [(0.25, 2.0, 2e-5), (0.5, 4.0, 1e-6)])
def test_gagliardo_ramp_closed_form(s, p, tol):
    exact = (2 / ((p - s * p) * (1 - s * p + p))) ** (1 / p)
    assert gagliardo_seminorm(ramp(10), s, p) == pytest.approx(exact, rel=tol)


@pytest.mark.parametrize("s,p", [(0.25, 1.0), (0.5, 1.5)])
def test_gagliardo_ramp_converges_at_singular_rate(s, p):
    # integrand |x - y|^(p - sp - 1) is singular: the dropped diagonal costs O(dt^(p - sp))
    exact = (2 / ((p - s * p) * (1 - s * p + p))) ** (1 / p)
    err = [abs(gagliardo_seminorm(ramp(J), s, p) / exact - 1) for J in (6, 8, 10)]
    rate = 4 ** (p - s * p)
    assert err[0] / err[1] == pytest.approx(rate, rel=0.1)
    assert err[1] / err[2] == pytest.approx(rate, rel=0.1)


def test_gagliardo_heaviside_divergence():
    vals = {s: [gagliardo_seminorm(heaviside(J), s, 2.0) for J in (6, 8, 10, 12)] for s in (0.25, 0.5, 0.75)}
    bounded = np.diff(vals[0.25])
    assert np.all(bounded > 0) and np.all(bounded[1:] < 0.6 * bounded[:-1])
    for s in (0.5, 0.75):
        steps = np.diff(vals[s])
        assert np.all(steps[1:] >= 0.8 * steps[:-1])
    assert vals[0.75][-1] > 2 * vals[0.75][1]


def test_gagliardo_and_dyadic_bpp_diverge_together():
    def bpp(J, s):
        return dyadic_besov_norm(heaviside(J), BesovParams(s, 2.0, Power(2)))[1].seminorm

    for s, grows in ((0.25, False), (0.75, True)):
        g = [gagliardo_seminorm(heaviside(J), s, 2.0) for J in (8, 12)]
        b = [bpp(J, s) for J in (8, 12)]
        assert (g[1] / g[0] > 1.5) == grows
        assert (b[1] / b[0] > 1.5) == grows


# ---------------------------------------------------------------- extensions and rescaling

def test_reflect_ramp_is_tent():
    e = extend_reflect(ramp(6))
    assert (e.t0, e.T, e.n) == (-1.0, 2.0, 3 * 64 + 1)
    np.testing.assert_allclose(e.values[:, 0], np.where(e.times < 0, -e.times, np.where(e.times > 1, 2 - e.times, e.times)),
                               atol=1e-15)
    assert e.values.min() >= 0 and e.values.max() <= 1


def test_reflect_constant():
    e = extend_reflect(SampledPath.constant(4.0, 5))
    assert np.all(e.values == 4.0)


@given(paths(J_max=5))
def test_reflect_agrees_on_original_interval(f):
    e = extend_reflect(f)
    np.testing.assert_array_equal(e.values[f.cells : 2 * f.cells + 1], f.values)


def test_reflect_norm_ratio_is_bounded(rng):
    params = BesovParams(0.5, INF, Power(2))
    ratios = []
    for s in range(10):
        f = sample_brownian(8, 1, RngSpec(11, s))
        ratios.append(dyadic_besov_norm(extend_reflect(f), params)[0] / dyadic_besov_norm(f, params)[0])
    assert max(ratios) < 3.0


def test_extend_zero_precondition_and_zero_path():
    with pytest.raises(ValueError):
        extend_zero(ramp(4, t0=0.0).with_values(ramp(4).values + 1))
    z = extend_zero(SampledPath.constant(0.0, 4))
    assert z.t0 == -1.0 and np.all(z.values == 0)
    W = sample_brownian(6, 1, RngSpec(1, 0))
    e = extend_zero(W)
    np.testing.assert_array_equal(e.values[W.cells :], W.values)
    assert np.all(e.values[: W.cells] == 0)


@pytest.mark.parametrize("k", [4, 64, 512, 1536])
def test_extend_zero_ramp_increment(k):
    # max(t, 0) on [-1, 1]: Delta_h = s + h on [-h, 0] and h on [0, 1 - h]
    e = extend_zero(ramp(11))
    h = k * e.dt
    exact = (h**3 / 3 + h**2 * (1 - h)) ** 0.5
    assert increment_norm(e, k, Power(2)) == pytest.approx(exact, rel=3e-3)


@given(paths(J_max=5), st.sampled_from([(0.0, 2.0, 0.5, math.sqrt(2)), (0.0, 0.5, 2**-0.5, 2.0)]),
       st.sampled_from([Power(2.0), ExpPower(2.0)]))
def test_scale_affine_bounds(f, target, N):
    a, b, lo, hi = target
    params = BesovParams(0.5, INF, N)
    g = scale_affine(f, a, b)
    n0 = full_besov_norm(f, params)
    if n0 == 0:
        return
    r = full_besov_norm(g, params) / n0
    assert lo * (1 - 1e-9) <= r <= hi * (1 + 1e-9)


def test_scale_affine_identity_and_errors():
    f = sample_brownian(6, 1, RngSpec(2, 0))
    params = BesovParams(0.5, INF, ExpPower(2))
    assert dyadic_besov_norm(scale_affine(f, 0.0, 1.0), params)[0] == dyadic_besov_norm(f, params)[0]
    with pytest.raises(ValueError):
        scale_affine(f, 1.0, 1.0)


# ---------------------------------------------------------------- Steklov K-functional estimate

@pytest.mark.parametrize("p", [1.0, 2.0, 4.0])
def test_steklov_ramp_oracle(p):
    f = ramp(10)
    for k in (1, 10, 100, 700):
        t = k * f.dt
        assert steklov_k_estimate(f, t, Power(p)) == pytest.approx(1.5 * t * (1 - t) ** (1 / p), rel=1e-10)


def test_steklov_constant_and_resolution():
    assert steklov_k_estimate(SampledPath.constant(1.0, 6), 0.25, ExpPower(2)) == 0.0
    with pytest.raises(ValueError):
        steklov_k_estimate(ramp(6), 2.0**-7, Power(2))


@given(paths(J_max=6), young_st)
def test_steklov_bounded_by_twice_modulus(f, N):
    omega = np.maximum.accumulate(increment_norms(f, N))
    for k in range(1, f.cells):
        est = steklov_k_estimate(f, k * f.dt, N)
        assert est <= 2 * omega[k - 1] * (1 + 1e-6) + 1e-12


@given(paths(J_max=6, d_max=3), st.sampled_from(YOUNG + [PLog(2.0)]))
def test_steklov_profile_matches_scalar_route(f, N):
    prof = steklov_k_profile(f, N)
    ref = [steklov_k_estimate(f, k * f.dt, N) for k in range(1, f.cells)]
    np.testing.assert_allclose(prof, ref, rtol=1e-10, atol=1e-300)


# ---------------------------------------------------------------- Hoelder, Levy, GRR

def test_holder_ramp_and_constant():
    assert holder_seminorm(ramp(8), 1.0) == pytest.approx(1.0, rel=1e-12)
    assert holder_seminorm(ramp(8), 1.0, "dyadic") == pytest.approx(1.0, rel=1e-12)
    assert holder_seminorm(SampledPath.constant(2.0, 6), 0.5) == 0.0
    assert levy_ratio(SampledPath.constant(2.0, 6)) == 0.0


@given(paths(J_max=6), alphas)
def test_holder_dyadic_mode_is_lower_bound(f, alpha):
    assert holder_seminorm(f, alpha, "dyadic") <= holder_seminorm(f, alpha) * (1 + 1e-12)


def test_levy_ratio_of_ramp():
    J = 12
    f = ramp(J)
    h = 2.0 ** np.arange(0, J // 4 + 1) / 2**J
    assert levy_ratio(f) == pytest.approx(np.max(h / np.sqrt(2 * h * np.log(1 / h))), rel=1e-12)
    with pytest.raises(ValueError):
        levy_ratio(ramp(3))


def _simpson(fn, a, b, tol, whole=None, depth=60):
    m = 0.5 * (a + b)
    fa, fm, fb = fn(a), fn(m), fn(b)
    if whole is None:
        whole = (b - a) / 6 * (fa + 4 * fm + fb)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    left = (m - a) / 6 * (fa + 4 * fn(lm) + fm)
    right = (b - m) / 6 * (fm + 4 * fn(rm) + fb)
    if depth <= 0 or abs(left + right - whole) <= 15 * tol:
        return left + right + (left + right - whole) / 15
    return _simpson(fn, a, m, tol / 2, left, depth - 1) + _simpson(fn, m, b, tol / 2, right, depth - 1)


def test_grr_zeta_matches_simpson_oracle():
    r, length = 0.25, 1.0
    # alpha = 1/2, u = r s^2, then s = exp(-y): 8 sqrt(r) int_0^inf sqrt(log(1 + 2 e^{4y} / r^2)) e^{-y} dy
    g = lambda y: math.sqrt(math.log1p(2 * length * math.exp(4 * y) / r**2)) * math.exp(-y)
    oracle = 8 * math.sqrt(r) * _simpson(g, 0.0, 80.0, 1e-13)
    assert oracle == pytest.approx(10.623564214088267, rel=1e-10)
    assert grr_zeta(r, 0.5, 2.0, length) == pytest.approx(oracle, rel=1e-9)


def test_grr_zeta_small_r_limit():
    rs = [10.0**-k for k in range(2, 14)]
    ratio = np.array([grr_zeta(r, 0.5, 2.0, 1.0) / (r**0.5 * abs(math.log(r)) ** 0.5) for r in rs])
    limit = 8 * math.sqrt(2)  # Phi_2^-1(2 u^-2) ~ (2 |log u|)^1/2
    assert np.all(np.diff(ratio) < 0)
    assert np.all(ratio > limit)
    assert ratio[-1] / limit - 1 < 0.05


@given(st.floats(1e-4, 1.0), st.floats(1e-4, 1.0), st.sampled_from([0.25, 0.5, 0.75]), st.sampled_from([1.0, 2.0]))
def test_grr_zeta_increasing(r1, r2, alpha, beta):
    a, b = sorted((r1, r2))
    assert grr_zeta(a, alpha, beta, 1.0) <= grr_zeta(b, alpha, beta, 1.0) * (1 + 1e-12)


@given(st.integers(0, 10**6), st.integers(4, 8), st.floats(-3, 3), st.floats(0.1, 5))
def test_grr_pointwise_on_random_walks(seed, J, drift, scale):
    W = sample_brownian(J, 1, RngSpec(seed, 0))
    f = W.with_values(scale * W.values + drift * W.times[:, None])
    params = BesovParams(0.5, INF, ExpPower(2.0))
    lam = full_seminorm(f, params)
    assert not grr_violations(f, lam * (1 + 1e-12), grr_zeta_table(f, 0.5, 2.0))


def test_holder_embedding_with_ramp_constant():
    """||f(a) - f(b)|| <= C |a - b|^(alpha - 1/p) [f], C fitted once on ramps."""
    J, alpha = 10, 0.5
    for p in (4.0, 8.0):
        params = BesovParams(alpha, INF, Power(p))
        gamma = alpha - 1 / p
        C = max(holder_seminorm(r, gamma) / full_seminorm(r, params) for r in _ramp_family(J))
        for s in range(20):
            W = sample_brownian(J, 1, RngSpec(20240601, s))
            assert holder_seminorm(W, gamma) <= C * full_seminorm(W, params)
