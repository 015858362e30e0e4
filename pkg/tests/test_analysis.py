import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from lepskij import analysis as A
from lepskij.errors import PreconditionViolated, SeriesDiverged
from lepskij.estimator import expected_diff_sq, expected_error_sq, noise_mass, power_sum
from lepskij.model import validate_params
from lepskij.schedule import Grid

from conftest import CONFIG_A, random_grid, random_params, valid_params


def _p(**kw):
    return validate_params(**{**CONFIG_A, **kw})


def test_constants_omega0_10():
    c = A.constants(_p(omega0=10, gamma=1))
    assert c.c3 == pytest.approx(0.9 ** 3 * (1 - 1 / 8), rel=1e-15)
    assert c.c3 == pytest.approx(0.637875)
    assert c.c4 == pytest.approx(1.331)


def test_constants_config_a():
    c = A.constants(_p())
    first = (51 / 50) ** -3 * (1 - 2 ** -3)
    assert first == pytest.approx(0.8245, abs=1e-4)
    assert c.c1 == pytest.approx(0.8235, abs=1e-4)
    assert c.c1 == c.c3  # the min is attained by the noise factor
    assert c.c4 == pytest.approx(1.0612, abs=1e-4)
    assert c.c6 == pytest.approx(1.0625, abs=1e-4)


@given(p=valid_params())
@settings(max_examples=200, deadline=None)
def test_constants_chain(p):
    c = A.constants(p)
    assert c.c1 == c.c5 and c.c2 == c.c6
    assert c.c1 <= c.c3 < 1 < c.c4 <= c.c2


def test_conditions_config_a():
    r = A.check_conditions(_p())
    assert r.all_hold
    assert r.hi1_lhs == pytest.approx(0.775, abs=1e-3)
    assert r.hi2_lhs == pytest.approx(1.289, abs=1e-3)
    assert r.hi3_lhs == pytest.approx(27.45, abs=1e-2)
    assert r.hi5_lhs == pytest.approx(13.73, abs=1e-2)


def test_conditions_small_omega0():
    r = A.check_conditions(_p(omega0=10, gamma=1))
    assert not r.hi1
    assert r.hi1_lhs == pytest.approx(0.479, abs=1e-3)


@pytest.mark.parametrize("gamma, lam, eps, omega", [(1.5, 1, 0, 2), (3, 0.5, 0.5, 1.5),
                                                    (1.2, 2, -0.5, 3)])
def test_conditions_eventually_hold(gamma, lam, eps, omega):
    held = [A.check_conditions(_p(gamma=gamma, lam=lam, epsilon=eps, omega=omega,
                                  omega0=w0)).all_hold for w0 in np.geomspace(3, 1e5, 60)]
    assert held[-1]
    first = held.index(True)
    assert all(held[first:])


def test_n_opt_fixed_point():
    p = _p(gamma=2, lam=1, epsilon=0)
    expo = 2 * p.lam + 2 * p.epsilon + 2 * p.gamma
    # choose delta so the balance cutoff is exactly omega0
    delta = math.sqrt(p.eta ** 2 * p.prior_exponent / p.noise_exponent / p.omega0 ** expo)
    r = A.n_opt_closed(p.replace(delta=delta))
    assert r.s_star == pytest.approx(p.omega0, rel=1e-12)
    assert r.n_opt_real == pytest.approx(0, abs=1e-12)


def test_n_opt_examples():
    r = A.n_opt_closed(_p(gamma=1.5, delta=0.01))
    assert r.s_star == pytest.approx((1e4 * 2 / 3) ** 0.2, rel=1e-12)
    assert r.s_star == pytest.approx(5.818, abs=1e-3)
    assert not r.representable  # far below omega0 = 50
    r = A.n_opt_closed(_p())
    assert r.s_star == pytest.approx(10 ** (14 / 6), rel=1e-12)
    assert r.n_opt_real == pytest.approx(math.log2(10 ** (14 / 6) / 50), rel=1e-12)
    assert r.n_opt == 2


@given(p=valid_params())
@settings(max_examples=100, deadline=None)
def test_exact_cutoff_solves_balance_equation(p):
    s = A.balance_cutoff_exact(p)
    lhs = p.eta ** 2 / p.prior_exponent * s ** -p.prior_exponent
    rhs = p.delta ** 2 / p.noise_exponent * s ** p.noise_exponent
    assert lhs == pytest.approx(rhs, rel=1e-12)


@given(p=valid_params())
@settings(max_examples=100, deadline=None)
def test_closed_form_vs_exact_cutoff(p):
    ratio = A.balance_cutoff(p) / A.balance_cutoff_exact(p)
    expo = 2 * p.lam + 2 * p.epsilon + 2 * p.gamma
    assert ratio == pytest.approx((p.prior_exponent / p.noise_exponent) ** (2 / expo), rel=1e-12)


def test_closed_form_exact_when_exponents_match():
    p = _p()  # P = Q = 3
    assert A.balance_cutoff(p) == pytest.approx(A.balance_cutoff_exact(p), rel=1e-12)


def test_n_opt_empirical_extremes(grid_a):
    assert A.n_opt_empirical(_p(eta=1e-30), grid_a) == 0
    assert A.n_opt_empirical(_p(delta=1e-40), grid_a) == grid_a.n_max


def test_n_opt_empirical_ties_go_low():
    curve = np.array([3.0, 1.0, 1.0, 2.0])
    assert int(np.argmin(curve)) == 1


def test_riemann_examples():
    r = A.riemann_bounds(4, 16, 2, 3, 2)
    d = r["decay"]
    assert d.lower == pytest.approx(0.125)
    assert d.value == pytest.approx(math.fsum(1 / k ** 2 for k in range(4, 16)))
    assert d.value == pytest.approx(0.21933, abs=1e-5)
    assert d.upper == pytest.approx(0.375)
    g = A.riemann_bounds(4, 16, 1, 3, 2)["growth"]
    assert g.lower == pytest.approx(42.6667, abs=1e-4)
    assert g.value == 114
    assert g.upper == 128
    assert d.strict and g.strict
    assert A.riemann_bounds(4, 16, 1, 3, 2)["decay"] is None


def test_riemann_boundary():
    r = A.riemann_bounds(3, 6, 2.5, 3, 2)  # n = omega0, m = omega * n
    assert r["decay"].strict and r["growth"].strict
    r = A.riemann_bounds(3, 6, 0, 3, 2)
    assert r["growth"].strict


def test_riemann_precondition():
    with pytest.raises(PreconditionViolated):
        A.riemann_bounds(2, 16, 2, 3, 2)
    with pytest.raises(PreconditionViolated):
        A.riemann_bounds(4, 7, 2, 3, 2)


@given(w0=st.integers(2, 60), w=st.floats(1.1, 4), extra=st.integers(0, 200),
       kap=st.floats(0, 6))
@settings(max_examples=300, deadline=None)
def test_riemann_strict_property(w0, w, extra, kap):
    if not w0 * w > w0 + 1:
        return
    n = w0 + extra // 3
    m = math.ceil(w * n) + extra
    r = A.riemann_bounds(n, m, kap, w0, w)
    assert r["growth"].strict
    if kap > 1.001:
        assert r["decay"].strict


def _sandwich_ok(v, lo, hi, rtol=1e-9):
    return lo * (1 - rtol) <= v <= hi * (1 + rtol)


@given(p=valid_params())
@settings(max_examples=100, deadline=None)
def test_noise_and_error_sandwiches(p):
    g = Grid.for_params(p, min(200_000, int(p.omega0 * p.omega ** 12) + 2))
    c = A.constants(p)
    for n in g.levels:
        r2 = noise_mass(p.delta, p.lam, p.epsilon, 1, g.cutoffs[n])
        assert _sandwich_ok(r2, c.c3 * A.noise_base(p, n), c.c4 * A.noise_base(p, n))
        e = expected_error_sq(p, g, n)
        base = A.sandwich_base(p, n, n)
        assert _sandwich_ok(e, c.c5 * base, c.c6 * base)


@given(p=valid_params())
@settings(max_examples=100, deadline=None)
def test_difference_sandwich_where_integral_bound_applies(p):
    g = Grid.for_params(p, min(200_000, int(p.omega0 * p.omega ** 12) + 2))
    c = A.constants(p)
    for n in g.levels:
        for m in range(n + 1, min(n + 5, g.n_max) + 1):
            v = expected_diff_sq(p, g, n, m)
            base = A.sandwich_base(p, n, m)
            assert v <= c.c2 * base * (1 + 1e-9)
            if g.cutoffs[m] >= p.omega * g.cutoffs[n]:
                assert v >= c.c1 * base * (1 - 1e-9)


def test_difference_sandwich_counterexample():
    # ceil pushes s(0) up while s(1) < omega * s(0), so the integral lower
    # bound behind the adjacent-difference sandwich does not apply
    p = validate_params(gamma=0.6913586575798717, lam=0.09875652480916083,
                        epsilon=1.609966993753515, eta=299.59424297045655,
                        delta=7.12994543335417e-05, omega0=64.24072620116326,
                        omega=1.8458708056034174)
    g = Grid.for_params(p, 10_000)
    assert g.cutoffs[:2] == (65, 119)
    assert g.cutoffs[1] < p.omega * g.cutoffs[0]
    c = A.constants(p)
    ratio = expected_diff_sq(p, g, 0, 1) / (c.c1 * A.sandwich_base(p, 0, 1))
    assert ratio == pytest.approx(0.99764, abs=1e-5)


def test_gauss_tail_upper_values():
    assert A.gauss_tail_upper(4) == pytest.approx(math.sqrt(2) / math.e)
    assert A.gauss_tail_upper(4) == pytest.approx(0.52026, abs=1e-5)
    assert A.gauss_tail_upper(0) == pytest.approx(math.sqrt(2))


def test_gauss_tail_upper_mc():
    rng = np.random.default_rng(17)
    alpha_sq = np.array([0.4, 0.3, 0.2, 0.1])
    z = (rng.standard_normal((100_000, 4)) ** 2) @ alpha_sq
    for t in (2, 4, 8):
        assert np.mean(z >= t) <= A.gauss_tail_upper(t)


def test_gauss_tail_lower_values():
    first, second = A.gauss_tail_lower(0.1, 1.0)
    assert first == pytest.approx(math.exp((0.9 + math.log(0.1)) / 2))
    assert first == pytest.approx(0.4960, abs=1e-4)
    assert second == pytest.approx(math.sqrt(0.1 * math.e))
    assert second == pytest.approx(0.5214, abs=1e-4)
    # single chi-square(1): exact CDF is below the bound
    assert stats.chi2.cdf(0.1, 1) <= first


@given(z=st.floats(1e-6, 1 - 1e-9), a=st.floats(1e-3, 1.0))
def test_gauss_tail_lower_chain(z, a):
    first, second = A.gauss_tail_lower(z, a)
    assert first <= second * (1 + 1e-12)


def test_gauss_tail_lower_preconditions():
    with pytest.raises(PreconditionViolated):
        A.gauss_tail_lower(1.0, 0.5)
    with pytest.raises(PreconditionViolated):
        A.gauss_tail_lower(0.5, 1.5)


def test_overshoot_bounds():
    assert A.tail_bound_overshoot(1, 1) == pytest.approx(math.sqrt(2) / math.e)
    taus = np.linspace(0.1, 4, 40)
    vals = [A.tail_bound_overshoot(t, 2) for t in taus]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    got = A.tail_bound_overshoot_B(1, 1, 1e-7, 50, 2, 1)
    assert got == pytest.approx(math.log(1e-7 / 50) / (-math.log(2)) * math.sqrt(2) / math.e)


def test_undershoot_bounds():
    p = _p()
    assert A.tail_bound_undershoot(p, 1, 2, 1) == pytest.approx(32 * math.e * 8 * 2 ** -12)
    assert A.tail_bound_undershoot(p, 1, 2, 1) == pytest.approx(0.16989, abs=1e-5)
    assert A.tail_bound_undershoot(p, 1, 0, 1) > 1
    vals = [A.tail_bound_undershoot(p, 1, gap) for gap in range(8)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert A.tail_bound_undershoot_B(p, 1, 2) == A.tail_bound_undershoot(p, 1, 2, 1)
    with pytest.raises(PreconditionViolated):
        A.tail_bound_undershoot(p, 1, -1)


def test_tilde_bounds():
    p = _p()
    over, under = A.tilde_tail_bounds(p, 10, 3, 1)
    assert over == pytest.approx(math.e / 10)
    assert under == pytest.approx(10 * 64 * math.e * 8 * 2 ** -15)
    under = A.tilde_tail_undershoot(p, 1, 3)
    assert under == pytest.approx(64 * math.e * 8 * 2 ** -15)
    assert under == pytest.approx(0.0424732, abs=1e-6)
    assert A.tilde_tail_bounds(p, math.e, 0, 1)[0] == pytest.approx(1.0)
    with pytest.raises(PreconditionViolated):
        A.tilde_tail_bounds(p, 1, 0, 1)


def test_oracle_constant_diverges_when_tau_small():
    with pytest.raises(SeriesDiverged):
        A.oracle_constant(_p(omega=4), 0.5, 1.1, 1)


def test_oracle_constant_diverges_when_p_bar_large():
    # 2 lam + 2 eps + 2 gamma (1 - p_bar) + p_bar <= 0
    with pytest.raises(SeriesDiverged):
        A.oracle_constant(_p(gamma=3), 3.0, 3.0, 1)


def test_oracle_constant_limits():
    p = _p()
    r = A.oracle_constant(p, 6.0, 1.1, 1.0)
    assert r.reading == "series"
    assert r.below_ratio < 1 and r.above_ratio < 1
    assert 1 / (1 - r.above_ratio) == pytest.approx(1, abs=1e-9)
    assert r.value >= p.omega ** (1 - 2 * p.gamma)


@given(p=valid_params(), tau=st.floats(1, 6), p_bar=st.floats(1.01, 1.5), c_p=st.floats(1, 5))
@settings(max_examples=100, deadline=None)
def test_oracle_constant_lower_bound(p, tau, p_bar, c_p):
    try:
        r = A.oracle_constant(p, tau, p_bar, c_p)
    except SeriesDiverged:
        return
    assert r.value >= p.omega ** (1 - 2 * p.gamma)
