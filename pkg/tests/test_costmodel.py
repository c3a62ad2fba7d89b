"""Closed-form query counts, asymptotic factors and ensemble optimization."""

import math

import numpy as np
import pytest

from ensemble_qsvt import costmodel
from ensemble_qsvt.costmodel import (
    asymptotic_factors,
    d_aa_count,
    d_exp_count,
    default_delta_grid,
    log_ensemble_cost_exponent,
    optimize_ensemble,
    scan_even_power,
    total_queries,
)
from ensemble_qsvt.ensembles import (
    EtaSpec,
    energy_density,
    eta_extrema,
    solve_even_power_mu,
    spectrum_free_spins,
)
from ensemble_qsvt.polyapprox import lambert_w, sign_poly

LOG2 = math.log(2.0)


# ---------------------------------------------------------------------------
# filter degree
# ---------------------------------------------------------------------------

def test_d_exp_flat_ensemble_example():
    # eta constant and eps*sqrt(zeta) = 1: t = ceil(log 8) = 3,
    # d = ceil(sqrt(6 log 16)) = 5
    assert d_exp_count(50, 0.0, 0.25) == 5


def test_d_exp_monotone_in_system_size():
    prev = 0
    for N in (10, 20, 40, 80, 160, 320):
        d = d_exp_count(N, 1.0, 0.01)
        assert d >= prev
        prev = d


def test_d_exp_independent_recomputation():
    # canonical free spins at N=50: eta_osc = 2 beta, eps_exp = eps sqrt(zeta)/4
    N, beta, eps = 50, 0.5, 0.1
    spec = spectrum_free_spins(N)
    zl = -N * beta + N * math.log(2 * math.cosh(beta)) - N * LOG2
    eps_exp = eps * math.exp(0.5 * zl) / 4
    t = math.ceil(max(0.25 * math.e ** 2 * N * 2 * beta, math.log(2 / eps_exp)))
    expected = math.ceil(math.sqrt(2 * t * math.log(4 / eps_exp)))
    assert d_exp_count(N, 2 * beta, eps_exp) == expected
    assert total_queries(spec, EtaSpec.canonical(beta), eps).d_exp == expected


def test_d_exp_rejects_bad_eps():
    with pytest.raises(ValueError):
        d_exp_count(10, 1.0, 0.0)


# ---------------------------------------------------------------------------
# amplification count
# ---------------------------------------------------------------------------

def test_d_aa_standalone_matches_sign_poly():
    d = d_aa_count(None, 0.1, "standalone_fpaa", delta=0.5)
    assert d.exact == sign_poly(0.5, 0.1).d == 127
    for delta, eps in ((0.3, 0.2), (0.8, 0.07), (0.15, 0.12)):
        assert d_aa_count(None, eps, "standalone_fpaa", delta=delta).exact \
            == sign_poly(delta, eps).d


def test_d_aa_thermal_equals_composed_bound():
    # the composed overlap route delta = sqrt(zeta)(1-eps/2)/2 at eps/2 must
    # reproduce the direct thermal count
    for zl, eps in ((-2.0, 0.1), (-10.0, 0.2), (-0.3, 0.05)):
        direct = d_aa_count(zl, eps, "thermal_prep")
        delta = math.exp(0.5 * zl) / 2 * (1 - eps / 2)
        composed = sign_poly(delta, eps / 2).d
        assert direct.exact == composed


def test_d_aa_parity_and_growth():
    for zl in (-1.0, -8.0, -15.0, -40.0):
        d = d_aa_count(zl, 0.1, "thermal_prep")
        assert d.exact is not None and d.exact % 2 == 1
    # counts beyond the exact-integer range switch to the log domain
    assert d_aa_count(-80.0, 0.1, "thermal_prep").exact is None
    # d_AA ~ 1/sqrt(zeta): log d grows as N + O(log N) for zeta = e^{-2N}
    logs = [d_aa_count(-2.0 * N, 0.1, "thermal_prep").log for N in (200, 400, 800)]
    slope = np.polyfit([200, 400, 800], logs, 1)[0]
    assert abs(slope - 1.0) <= 0.02


def test_d_aa_log_domain_for_huge_systems():
    d = d_aa_count(-2.0 * 5000, 0.1, "thermal_prep")
    assert d.exact is None
    assert d.log == pytest.approx(5000.0, rel=0.01)


def test_two_k_routes_agree():
    # direct evaluation of both amplification-parameter expressions
    rng = np.random.default_rng(12)
    for _ in range(100):
        zl = float(-rng.uniform(0.1, 500.0))
        eps = float(rng.uniform(0.01, 0.9))
        w_direct = lambert_w(2.0 ** 19 / (math.pi * eps ** 8))
        k_direct = math.exp(-math.log1p(-eps / 2)
                            + 0.5 * (LOG2 - zl + math.log(w_direct)))
        delta = math.exp(0.5 * zl) / 2 * (1 - eps / 2)
        eps_aa = eps / 2
        k_star = math.sqrt(0.5 * lambert_w(2 ** 11 / (math.pi * eps_aa ** 8))) / delta
        assert abs(k_direct - k_star) <= 1e-9 * k_star


# ---------------------------------------------------------------------------
# full breakdown
# ---------------------------------------------------------------------------

def test_total_queries_flat_ensemble():
    spec = spectrum_free_spins(12)
    cost = total_queries(spec, EtaSpec.custom([0.0]), 0.1)
    assert abs(cost.zeta_log) <= 1e-12
    assert cost.total == cost.d_eta * cost.d_exp * cost.d_aa.exact


def test_breakdown_identity():
    spec = spectrum_free_spins(50)
    for eta in (EtaSpec.canonical(0.5), EtaSpec.even_power(1, 0.63, -0.57)):
        cost = total_queries(spec, eta, 0.1)
        lhs = cost.log10_total * math.log(10.0)
        rhs = math.log(cost.d_eta) + math.log(cost.d_exp) + cost.d_aa.log
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))


def test_optimized_ratio_at_n50():
    spec = spectrum_free_spins(50)
    canonical = total_queries(spec, EtaSpec.canonical(0.5), 0.1)
    res = optimize_ensemble(spec, 0.5, 0.1, delta_grid=default_delta_grid(80))
    ratio = 10.0 ** (canonical.log10_total - res.cost.log10_total)
    assert ratio >= 50.0


def test_canonical_dominance_and_b_ordering():
    for N in (20, 50, 100, 400, 1000):
        spec = spectrum_free_spins(N)
        canonical = total_queries(spec, EtaSpec.canonical(0.5), 0.1)
        res = optimize_ensemble(spec, 0.5, 0.1, delta_grid=default_delta_grid(40))
        assert res.cost.log10_total <= canonical.log10_total
        eta = EtaSpec.even_power(res.n, res.delta, res.mu)
        fac_e = asymptotic_factors(spec, eta)
        fac_c = asymptotic_factors(spec, EtaSpec.canonical(0.5))
        assert fac_c.log_b > fac_e.log_b > 0.0


# ---------------------------------------------------------------------------
# asymptotic factors
# ---------------------------------------------------------------------------

def test_factor_b_canonical_closed_form():
    for N in (50, 300):
        spec = spectrum_free_spins(N)
        beta = 0.5
        fac = asymptotic_factors(spec, EtaSpec.canonical(beta))
        u = energy_density(spec, EtaSpec.canonical(beta))
        assert abs(fac.log_b - 0.5 * N * beta * (u + 1.0)) <= 1e-9


def test_factor_b_even_power_closed_form():
    spec = spectrum_free_spins(1000)
    n, delta, beta = 2, 0.3, 0.5
    mu = solve_even_power_mu(spec, beta, n, delta)
    eta = EtaSpec.even_power(n, delta, mu)
    fac = asymptotic_factors(spec, eta)
    closed = (delta * beta / (2 * n)) ** (2 * n / (2 * n - 1))
    assert abs(fac.log_b - 0.5 * 1000 * closed) <= 1e-8 * 0.5 * 1000 * closed


def test_factor_b_vanishes_with_delta():
    spec = spectrum_free_spins(400)
    vals = []
    for delta in (0.4, 0.2, 0.1):
        mu = solve_even_power_mu(spec, 0.5, 1, delta)
        vals.append(asymptotic_factors(
            spec, EtaSpec.even_power(1, delta, mu)).log_b)
    assert vals[0] > vals[1] > vals[2] > 0.0


# ---------------------------------------------------------------------------
# logarithmic-weight comparison
# ---------------------------------------------------------------------------

def test_log_ensemble_exponent_value():
    u = -math.tanh(0.5)
    val = log_ensemble_cost_exponent(0.5, u, 1.0)
    expected = 0.5 * 0.5 * (1.0 - u) * math.log(2.0 / (1.0 - u))
    assert abs(val - expected) <= 1e-14


def test_log_ensemble_minimized_at_unit_cutoff():
    u = -math.tanh(0.5)
    assert log_ensemble_cost_exponent(0.5, u, 1.0) \
        < log_ensemble_cost_exponent(0.5, u, 2.0)


def test_log_ensemble_zero_temperature_limit():
    u = 0.0
    assert log_ensemble_cost_exponent(1e-12, u, 1.0) <= 1e-11


def test_log_ensemble_domain_errors():
    with pytest.raises(ValueError):
        log_ensemble_cost_exponent(0.5, 0.2, 0.1)
    with pytest.raises(ValueError):
        log_ensemble_cost_exponent(0.5, 1.2, 1.0)


# ---------------------------------------------------------------------------
# scans
# ---------------------------------------------------------------------------

def test_scan_row_count_and_determinism():
    spec = spectrum_free_spins(30)
    grid = default_delta_grid(12)
    a = scan_even_power(spec, 0.5, 0.1, n_grid=(1, 2), delta_grid=grid)
    b = scan_even_power(spec, 0.5, 0.1, n_grid=(1, 2), delta_grid=grid, threads=4)
    assert len(a.points) + len(a.failures) == 24
    assert a.best.n == b.best.n and a.best.delta == b.best.delta
    assert a.best.cost.log10_total == b.best.cost.log10_total


def test_scan_huge_delta_is_worse_than_canonical():
    spec = spectrum_free_spins(50)
    canonical = total_queries(spec, EtaSpec.canonical(0.5), 0.1)
    res = scan_even_power(spec, 0.5, 0.1, n_grid=(1, 2),
                          delta_grid=np.array([5.0, 8.0, 12.0]))
    assert res.best.cost.log10_total > canonical.log10_total


def test_empty_grid_rejected():
    spec = spectrum_free_spins(10)
    with pytest.raises(ValueError):
        scan_even_power(spec, 0.5, 0.1, n_grid=(), delta_grid=np.array([0.5]))
