"""Exact query-count model for generalized-ensemble thermal state preparation.

All count-like quantities are carried in the natural-log domain with an
exact-integer shadow whenever the value fits below 2^53; ceilings are applied
exactly in that regime and skipped otherwise, where they change the result by
less than one part in 2^53.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .ensembles import (
    EtaSpec,
    MuSolveError,
    SpectrumModel,
    energy_density,
    entropy_density,
    eta_extrema,
    solve_even_power_mu,
    zeta_log as _zeta_log,
)
from .polyapprox import lambert_w, lambert_w_log

__all__ = [
    "LogCount",
    "QueryCostBreakdown",
    "AsymptoticFactors",
    "ScanPoint",
    "ScanResult",
    "d_exp_count",
    "d_aa_count",
    "total_queries",
    "asymptotic_factors",
    "log_ensemble_cost_exponent",
    "default_delta_grid",
    "scan_even_power",
    "optimize_ensemble",
    "DEFAULT_N_GRID",
]

_LOG2 = math.log(2.0)
_EXACT_LIMIT = 2.0 ** 53

DEFAULT_N_GRID = tuple(range(1, 9))


def default_delta_grid(num: int = 200) -> np.ndarray:
    """Logarithmically spaced width grid bracketing the useful regime."""
    return np.geomspace(0.05, 5.0, num)


# ---------------------------------------------------------------------------
# count container
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LogCount:
    """A count stored as its natural log, with an exact-integer shadow when
    the value is representable."""

    log: float
    exact: int | None = None

    @property
    def log10(self) -> float:
        return self.log / math.log(10.0)

    def __str__(self) -> str:
        if self.exact is not None:
            return str(self.exact)
        return f"exp({self.log:.6g})"

    @staticmethod
    def from_int(value: int) -> "LogCount":
        return LogCount(log=math.log(value), exact=int(value))


def _lambert_w_of_log(log_x: float) -> float:
    if log_x > 700.0:
        return lambert_w_log(log_x)
    return lambert_w(math.exp(log_x))


# ---------------------------------------------------------------------------
# polynomial-filter degree
# ---------------------------------------------------------------------------

def d_exp_count(N: int, eta_osc: float, eps_exp: float | None = None,
                *, log_eps_exp: float | None = None) -> int:
    """Degree of the exponential filter polynomial.

    eta_osc is the oscillation eta_max - eta_min of the ensemble function
    over the encoded window; eps_exp is the filter's sup-error budget (pass
    log_eps_exp instead when it underflows).  Uses
    t = ceil(max(e^2 N eta_osc / 4, log(2/eps_exp))) and
    d = ceil(sqrt(2 t log(4/eps_exp))).
    """
    if eta_osc < 0:
        raise ValueError("eta_osc must be nonnegative")
    if log_eps_exp is None:
        if eps_exp is None or eps_exp <= 0:
            raise ValueError("eps_exp must be positive")
        log_eps_exp = math.log(eps_exp)
    t = math.ceil(max(0.25 * math.e ** 2 * N * eta_osc, _LOG2 - log_eps_exp))
    d = math.ceil(math.sqrt(2.0 * t * (2.0 * _LOG2 - log_eps_exp)))
    return int(d)


# ---------------------------------------------------------------------------
# amplitude-amplification degree
# ---------------------------------------------------------------------------

def _fpaa_degree(delta_log: float, eps: float) -> tuple[float, float, LogCount]:
    """(k_log, t_log, d) for the sign-polynomial amplification at overlap
    bound exp(delta_log) and final error eps, entirely in the log domain."""
    log_eps = math.log(eps)
    w1 = _lambert_w_of_log(11.0 * _LOG2 - math.log(math.pi) - 8.0 * log_eps)
    k_log = -delta_log + 0.5 * (math.log(0.5) + math.log(w1))
    # t = ceil(max(e^2 k^2 / 2, log(2^8 k / (sqrt(pi) eps^4))))
    t_quad_log = 2.0 + 2.0 * k_log - _LOG2
    t_lin = 8.0 * _LOG2 + k_log - 0.5 * math.log(math.pi) - 4.0 * log_eps
    if t_quad_log < math.log(_EXACT_LIMIT):
        t_exact = math.ceil(max(math.exp(t_quad_log), t_lin))
        t_log = math.log(t_exact)
    else:
        t_exact = None
        t_log = max(t_quad_log, math.log(t_lin))
    w2_log_arg = 16.0 * _LOG2 + 2.0 * k_log - math.log(math.pi) - t_log - 8.0 * log_eps
    w2 = _lambert_w_of_log(w2_log_arg)
    half_log = 0.5 * (t_log + math.log(w2))
    if half_log < math.log(_EXACT_LIMIT / 4.0):
        d_exact = 2 * math.ceil(math.exp(half_log)) + 1
        d = LogCount(log=math.log(d_exact), exact=d_exact)
    else:
        d = LogCount(log=_LOG2 + half_log, exact=None)
    return k_log, t_log, d


def d_aa_count(zeta_log: float | None, eps: float,
               context: str = "thermal_prep",
               delta: float | None = None) -> LogCount:
    """Number of amplification queries.

    In the thermal_prep context the overlap bound is derived from zeta as
    delta = (sqrt(zeta)/2)(1 - eps/2) and the sign polynomial targets error
    eps/2; standalone_fpaa takes delta directly and targets eps, which
    reproduces the bare amplification count (and agrees exactly with the
    sign-polynomial degree for the same arguments).
    """
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    if context == "thermal_prep":
        if zeta_log is None or zeta_log > 1e-9:
            raise ValueError("thermal_prep requires zeta_log <= 0")
        delta_log = 0.5 * zeta_log - _LOG2 + math.log1p(-eps / 2.0)
        _, _, d = _fpaa_degree(delta_log, eps / 2.0)
    elif context == "standalone_fpaa":
        if delta is None or not 0.0 < delta <= 1.0:
            raise ValueError("standalone_fpaa requires delta in (0, 1]")
        _, _, d = _fpaa_degree(math.log(delta), eps)
    else:
        raise ValueError(f"unknown context {context!r}")
    return d


# ---------------------------------------------------------------------------
# full breakdown
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QueryCostBreakdown:
    """Complete accounting of one thermal-preparation cost evaluation."""

    d_eta: int
    d_exp: int
    d_aa: LogCount
    log10_total: float
    zeta_log: float
    delta_log: float
    eps: float
    eps_exp_log: float
    eps_aa: float
    k_log: float
    t_log: float

    @property
    def delta(self) -> float:
        return math.exp(self.delta_log)

    @property
    def eps_exp(self) -> float:
        return math.exp(self.eps_exp_log)

    @property
    def total(self) -> int | None:
        """Exact total query count d_eta * d_exp * d_aa when representable."""
        if self.d_aa.exact is None:
            return None
        total = self.d_eta * self.d_exp * self.d_aa.exact
        return total if total < _EXACT_LIMIT else None


def total_queries(spec: SpectrumModel, eta: EtaSpec, eps: float) -> QueryCostBreakdown:
    """Evaluate the closed-form query count for preparing the ensemble state.

    Splits the error budget as eps_exp = eps sqrt(zeta)/4 and eps_aa = eps/2,
    and cross-checks that the directly assembled amplification parameter k
    agrees with the composed overlap-bound route to 1e-9 relative.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    N = spec.n_sites
    eta_min, eta_max = eta_extrema(eta, spec.alpha)
    zl = _zeta_log(spec, eta)
    eps_exp_log = math.log(eps / 4.0) + 0.5 * zl
    d_exp = d_exp_count(N, eta_max - eta_min, log_eps_exp=eps_exp_log)

    delta_log = 0.5 * zl - _LOG2 + math.log1p(-eps / 2.0)
    k_log, t_log, d_aa = _fpaa_degree(delta_log, eps / 2.0)

    # direct-assembly route for k, as a consistency check on the composition
    w_direct = _lambert_w_of_log(
        19.0 * _LOG2 - math.log(math.pi) - 8.0 * math.log(eps))
    k_direct_log = (-math.log1p(-eps / 2.0)
                    + 0.5 * (_LOG2 - zl + math.log(w_direct)))
    if abs(k_direct_log - k_log) > 1e-9 * max(1.0, abs(k_log)):
        raise AssertionError("amplification parameter routes disagree")

    log_total = math.log(eta.degree) + math.log(d_exp) + d_aa.log
    return QueryCostBreakdown(
        d_eta=eta.degree,
        d_exp=d_exp,
        d_aa=d_aa,
        log10_total=log_total / math.log(10.0),
        zeta_log=zl,
        delta_log=delta_log,
        eps=eps,
        eps_exp_log=eps_exp_log,
        eps_aa=eps / 2.0,
        k_log=k_log,
        t_log=t_log,
    )


# ---------------------------------------------------------------------------
# asymptotic factors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AsymptoticFactors:
    """Leading exponential factors of the query count.

    log_a is the state-search half-entropy deficit log sqrt(2^N / e^{N s});
    log_b is the ensemble-dependent overhead N (eta(u_eta) - eta_min) / 2,
    which vanishes only for constant eta.
    """

    log_a: float
    log_b: float

    @property
    def log10_a(self) -> float:
        return self.log_a / math.log(10.0)

    @property
    def log10_b(self) -> float:
        return self.log_b / math.log(10.0)


def asymptotic_factors(spec: SpectrumModel, eta: EtaSpec) -> AsymptoticFactors:
    N = spec.n_sites
    s = entropy_density(spec, eta)
    u = energy_density(spec, eta)
    eta_min, _ = eta_extrema(eta, spec.alpha)
    return AsymptoticFactors(
        log_a=0.5 * N * (_LOG2 - s),
        log_b=0.5 * N * (float(eta.eval(u)) - eta_min),
    )


def log_ensemble_cost_exponent(beta: float, u_eta: float, l: float) -> float:
    """Per-site cost exponent of the logarithmic-weight ensemble at cutoff l.

    Returns beta (l - u_eta) log((l + 1)/(l - u_eta)) / 2, the growth rate of
    the overhead factor; over admissible cutoffs it is minimized at l = 1.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    if l < 1.0:
        raise ValueError("l must be >= 1")
    if l <= u_eta:
        raise ValueError("l must exceed u_eta")
    return 0.5 * beta * (l - u_eta) * math.log((l + 1.0) / (l - u_eta))


# ---------------------------------------------------------------------------
# grid scan and optimization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScanPoint:
    n: int
    delta: float
    mu: float
    cost: QueryCostBreakdown
    log10_a: float
    log10_b: float
    mu_mode: str = "solved"  # "solved" = finite-N constraint, "limit" = fallback


@dataclass(frozen=True)
class ScanResult:
    points: list[ScanPoint]
    failures: list[tuple[int, float, str]]
    best: ScanPoint | None

    @property
    def limit_mode_count(self) -> int:
        return sum(1 for p in self.points if p.mu_mode == "limit")


def _evaluate_point(spec: SpectrumModel, beta: float, eps: float,
                    n: int, delta: float) -> ScanPoint:
    try:
        mu = solve_even_power_mu(spec, beta, n, delta)
        mode = "solved"
    except MuSolveError:
        # Ensembles sharper than the level spacing admit no finite-N root of
        # the mean-based temperature equation; impose the constraint in its
        # thermodynamic-limit form instead, where the target state's energy
        # stands in for the ensemble mean.
        offset = delta * (delta * beta / (2.0 * n)) ** (1.0 / (2 * n - 1))
        mu = energy_density(spec, EtaSpec.canonical(beta)) - offset
        mode = "limit"
    eta = EtaSpec.even_power(n, delta, mu)
    cost = total_queries(spec, eta, eps)
    factors = asymptotic_factors(spec, eta)
    return ScanPoint(n=n, delta=float(delta), mu=mu, cost=cost,
                     log10_a=factors.log10_a, log10_b=factors.log10_b,
                     mu_mode=mode)


def scan_even_power(spec: SpectrumModel, beta: float, eps: float,
                    n_grid=DEFAULT_N_GRID, delta_grid=None,
                    threads: int = 1) -> ScanResult:
    """Evaluate the query cost over an (n, delta) grid at fixed beta.

    Points where the ensemble parameter cannot be solved are skipped and
    reported.  The reduction is a pure min with ties broken by smaller n and
    then smaller delta, so the result does not depend on evaluation order.
    """
    if delta_grid is None:
        delta_grid = default_delta_grid()
    grid = [(int(n), float(d)) for n in n_grid for d in delta_grid]
    if not grid:
        raise ValueError("empty parameter grid")

    def run(point):
        n, d = point
        try:
            return _evaluate_point(spec, beta, eps, n, d)
        except MuSolveError as exc:
            return (n, d, str(exc))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, grid))
    else:
        results = [run(p) for p in grid]

    points = [r for r in results if isinstance(r, ScanPoint)]
    failures = [r for r in results if not isinstance(r, ScanPoint)]
    best = None
    if points:
        best = min(points, key=lambda p: (p.cost.log10_total, p.n, p.delta))
    return ScanResult(points=points, failures=failures, best=best)


@dataclass(frozen=True)
class OptimizeResult:
    n: int
    delta: float
    mu: float
    cost: QueryCostBreakdown
    scan: ScanResult


def optimize_ensemble(spec: SpectrumModel, beta: float, eps: float,
                      n_grid=DEFAULT_N_GRID, delta_grid=None,
                      threads: int = 1) -> OptimizeResult:
    """Best even-power ensemble on the grid under the fixed-beta constraint."""
    scan = scan_even_power(spec, beta, eps, n_grid=n_grid,
                           delta_grid=delta_grid, threads=threads)
    if scan.best is None:
        raise MuSolveError("ensemble optimization failed at every grid point")
    b = scan.best
    return OptimizeResult(n=b.n, delta=b.delta, mu=b.mu, cost=b.cost, scan=scan)
