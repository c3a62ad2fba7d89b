"""Command-line front end: cost scans, scaling curves, approximation
certification and simulation runs.

All numeric output is CSV with LF line endings and floats printed to 17
significant digits, so identical configurations produce byte-identical
files.  Exit codes: 0 success, 2 configuration error, 3 widespread solver
failure in a scan, 4 contract violation (a measured error exceeding its
bound).
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, field, fields

import numpy as np

from . import costmodel, ensembles
from .ensembles import EtaSpec, spectrum_free_spins
from .polyapprox import certification_grid, cheb_eval, erf_poly, exp_poly, sign_poly

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_CONTRACT = 4


class ConfigError(ValueError):
    pass


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def parse_n_grid(text: str) -> tuple[int, ...]:
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..")
        return tuple(range(int(lo), int(hi) + 1))
    values = tuple(int(v) for v in text.split(",") if v.strip())
    if not values:
        raise ConfigError("empty n grid")
    return values


def parse_delta_grid(text: str):
    """Either ``lo:hi:count`` (log spaced) or an explicit comma list."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"bad delta grid {text!r}")
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
        if lo <= 0 or hi <= lo or count < 1:
            raise ConfigError(f"bad delta grid {text!r}")
        return np.geomspace(lo, hi, count)
    values = [float(v) for v in text.split(",") if v.strip()]
    if not values:
        raise ConfigError("empty delta grid")
    return np.asarray(values)


def parse_n_range(text: str) -> tuple[int, ...]:
    """Either a single N or ``start:stop:step`` (stop inclusive)."""
    text = text.strip()
    if ":" in text:
        lo, hi, step = (int(v) for v in text.split(":"))
        if step < 1 or hi < lo:
            raise ConfigError(f"bad N range {text!r}")
        return tuple(range(lo, hi + 1, step))
    return (int(text),)


@dataclass
class RunConfig:
    """Normalized run settings; parses from key=value text and CLI flags."""

    command: str = ""
    N: str = "50"
    beta: float = 0.5
    eps: float = 0.1
    n_grid: str = "1..8"
    delta_grid: str = "0.05:5:200"
    family: str = "even_power"
    n: int = 1
    delta: float = 0.63
    mode: str = "auto"
    kind: str = "all"
    count: int = 30
    seed: int = 0
    optimize_at: int = 0   # 0 means the largest N in the range
    out: str = ""
    plot: bool = False

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, float):
                v = _fmt(v)
            elif isinstance(v, bool):
                v = "true" if v else "false"
            lines.append(f"{f.name}={v}")
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_text(text: str) -> "RunConfig":
        cfg = RunConfig()
        types = {f.name: f.type for f in fields(cfg)}
        for raw in text.splitlines():
            raw = raw.strip()
            if not raw or raw.startswith("#"):
                continue
            if "=" not in raw:
                raise ConfigError(f"bad config line {raw!r}")
            key, value = raw.split("=", 1)
            key, value = key.strip(), value.strip()
            if key not in types:
                raise ConfigError(f"unknown config key {key!r}")
            current = getattr(cfg, key)
            if isinstance(current, bool):
                setattr(cfg, key, value.lower() in ("1", "true", "yes"))
            elif isinstance(current, int):
                setattr(cfg, key, int(value))
            elif isinstance(current, float):
                setattr(cfg, key, float(value))
            else:
                setattr(cfg, key, value)
        return cfg

    def validate(self) -> None:
        if not 0.0 < self.eps < 1.0:
            raise ConfigError("eps must lie in (0, 1)")
        if self.beta < 0.0:
            raise ConfigError("beta must be nonnegative")
        parse_n_range(self.N)
        parse_n_grid(self.n_grid)
        parse_delta_grid(self.delta_grid)


def _threads() -> int:
    raw = os.environ.get("ENSEMBLE_QSVT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _write_rows(path: str, header: str, rows: list[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(row + "\n")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_cost_scan(cfg: RunConfig) -> int:
    cfg.validate()
    (N,) = parse_n_range(cfg.N)[:1] or (50,)
    spec = spectrum_free_spins(N)
    canonical = costmodel.total_queries(spec, EtaSpec.canonical(cfg.beta), cfg.eps)

    if cfg.family == "canonical":
        fac = costmodel.asymptotic_factors(spec, EtaSpec.canonical(cfg.beta))
        rows = [",".join([
            str(N), _fmt(cfg.beta), _fmt(cfg.eps), "canonical", "0", "0", "0",
            str(canonical.d_eta), str(canonical.d_exp),
            _fmt(canonical.d_aa.log10), _fmt(canonical.log10_total),
            _fmt(fac.log10_a), _fmt(fac.log10_b)])]
        if cfg.out:
            _write_rows(cfg.out, "N,beta,eps,family,n,delta,mu,d_eta,d_exp,"
                        "log10_d_AA,log10_total,log10_A,log10_B", rows)
        print(f"canonical log10_total={_fmt(canonical.log10_total)}")
        return EXIT_OK
    if cfg.family != "even_power":
        raise ConfigError(f"cost-scan supports canonical or even_power, not {cfg.family!r}")

    n_grid = parse_n_grid(cfg.n_grid)
    delta_grid = parse_delta_grid(cfg.delta_grid)
    scan = costmodel.scan_even_power(spec, cfg.beta, cfg.eps, n_grid=n_grid,
                                     delta_grid=delta_grid, threads=_threads())
    total_points = len(scan.points) + len(scan.failures)
    if len(scan.failures) > 0.1 * total_points:
        for n, delta, msg in scan.failures[:5]:
            print(f"failed: n={n} delta={_fmt(delta)}: {msg}", file=sys.stderr)
        print(f"solver failed at {len(scan.failures)}/{total_points} grid points",
              file=sys.stderr)
        return EXIT_SOLVER

    rows = []
    for p in sorted(scan.points, key=lambda p: (p.n, p.delta)):
        rows.append(",".join([
            str(N), _fmt(cfg.beta), _fmt(cfg.eps), "even_power",
            str(p.n), _fmt(p.delta), _fmt(p.mu),
            str(p.cost.d_eta), str(p.cost.d_exp), _fmt(p.cost.d_aa.log10),
            _fmt(p.cost.log10_total), _fmt(p.log10_a), _fmt(p.log10_b)]))
    if cfg.out:
        _write_rows(cfg.out, "N,beta,eps,family,n,delta,mu,d_eta,d_exp,"
                    "log10_d_AA,log10_total,log10_A,log10_B", rows)
        if cfg.plot:
            from .plotting import render_scan

            render_scan(scan.points, canonical.log10_total,
                        os.path.splitext(cfg.out)[0] + ".png")
    best = scan.best
    ratio = 10.0 ** (canonical.log10_total - best.cost.log10_total)
    print(f"n*={best.n} delta*={_fmt(best.delta)} mu*={_fmt(best.mu)} "
          f"log10_total={_fmt(best.cost.log10_total)} "
          f"canonical_log10_total={_fmt(canonical.log10_total)} "
          f"ratio={_fmt(ratio)}")
    if scan.limit_mode_count:
        print(f"note: {scan.limit_mode_count} sharp grid points used the "
              f"limiting-constraint fallback", file=sys.stderr)
    return EXIT_OK


def cmd_cost_curve(cfg: RunConfig) -> int:
    cfg.validate()
    Ns = parse_n_range(cfg.N)
    n_opt = cfg.optimize_at or max(Ns)
    spec_opt = spectrum_free_spins(n_opt)
    opt = costmodel.optimize_ensemble(
        spec_opt, cfg.beta, cfg.eps, n_grid=parse_n_grid(cfg.n_grid),
        delta_grid=parse_delta_grid(cfg.delta_grid), threads=_threads())
    rows, data = [], []
    for N in Ns:
        spec = spectrum_free_spins(N)
        canonical = costmodel.total_queries(spec, EtaSpec.canonical(cfg.beta), cfg.eps)
        try:
            mu = ensembles.solve_even_power_mu(spec, cfg.beta, opt.n, opt.delta)
        except ensembles.MuSolveError:
            offset = opt.delta * (opt.delta * cfg.beta / (2.0 * opt.n)) ** (
                1.0 / (2 * opt.n - 1))
            mu = ensembles.energy_density(spec, EtaSpec.canonical(cfg.beta)) - offset
        eta = EtaSpec.even_power(opt.n, opt.delta, mu)
        gen = costmodel.total_queries(spec, eta, cfg.eps)
        fac = costmodel.asymptotic_factors(spec, eta)
        data.append((N, canonical.log10_total, gen.log10_total, fac.log10_a))
        rows.append(",".join([str(N), _fmt(canonical.log10_total),
                              _fmt(gen.log10_total), _fmt(fac.log10_a)]))
    if cfg.out:
        _write_rows(cfg.out, "N,log10_canonical,log10_generalized,"
                    "log10_optimal_scaling", rows)
        if cfg.plot:
            from .plotting import render_curve

            render_curve(data, os.path.splitext(cfg.out)[0] + ".png")
    print(f"optimized at N={n_opt}: n={opt.n} delta={_fmt(opt.delta)}")
    for row in rows:
        print(row)
    return EXIT_OK


def _eta_from_config(cfg: RunConfig, N: int) -> EtaSpec:
    if cfg.family == "canonical":
        return EtaSpec.canonical(cfg.beta)
    if cfg.family == "even_power":
        spec = spectrum_free_spins(N)
        mu = ensembles.solve_even_power_mu(spec, cfg.beta, cfg.n, cfg.delta)
        return EtaSpec.even_power(cfg.n, cfg.delta, mu)
    if cfg.family == "gaussian":
        spec = spectrum_free_spins(N)
        delta = math.sqrt(2.0)      # lam = 1 in the quadratic normalization
        mu = ensembles.solve_even_power_mu(spec, cfg.beta, 1, delta)
        return EtaSpec.gaussian(1.0, mu)
    raise ConfigError(f"unsupported ensemble family {cfg.family!r}")


def cmd_prepare(cfg: RunConfig) -> int:
    cfg.validate()
    (N,) = parse_n_range(cfg.N)[:1]
    from .qsvtsim import MAX_QUBITS, prepare_thermal, save_state_csv
    from .qsvtsim.thermal import MAX_SITES

    if N > MAX_SITES:
        print(f"prepare is capped at {MAX_SITES} sites", file=sys.stderr)
        return EXIT_CONFIG
    eta = _eta_from_config(cfg, N)
    sv, diag = prepare_thermal(N, eta, cfg.eps, mode=cfg.mode)
    sys.stdout.write(diag.to_text())
    if cfg.out:
        save_state_csv(sv, cfg.out)
    if diag.measured_error > cfg.eps:
        print(f"measured error {diag.measured_error:.3g} exceeds eps={cfg.eps}",
              file=sys.stderr)
        return EXIT_CONTRACT
    return EXIT_OK


def cmd_approx_check(cfg: RunConfig) -> int:
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    grid = certification_grid()
    rows = []
    all_ok = True

    def check_exp():
        lam = float(rng.uniform(0.1, 200.0))
        eps = float(rng.uniform(1e-3, 0.3))
        series = exp_poly(lam, eps)
        vals = cheb_eval(series, grid)
        measured = float(np.max(np.abs(vals - np.exp(-lam * (grid + 1.0)))))
        sup = float(np.max(np.abs(vals)))
        ok = measured <= series.err_bound and sup <= 1.0 + 1e-12
        return ("exp", lam, eps, series.degree, series.err_bound, measured,
                series.sup_bound, sup, ok)

    def check_erf():
        from scipy.special import erf as _erf

        k = float(rng.uniform(0.5, 6.0))
        n = 2 * int(rng.integers(3, 40)) + 1
        series = erf_poly(k, n)
        vals = cheb_eval(series, grid)
        measured = float(np.max(np.abs(vals - _erf(k * grid))))
        sup = float(np.max(np.abs(vals)))
        ok = measured <= series.err_bound
        return ("erf", k, float(n), series.degree, series.err_bound, measured,
                series.sup_bound, sup, ok)

    def check_sign():
        delta = float(rng.uniform(0.1, 0.9))
        eps = float(rng.uniform(0.05, 0.5))
        spec = sign_poly(delta, eps)
        vals = cheb_eval(spec.series, grid)
        outside = np.abs(grid) >= delta
        measured = float(np.max(np.abs(vals[outside] - np.sign(grid[outside]))))
        sup = float(np.max(np.abs(vals)))
        ok = measured <= spec.series.err_bound and sup <= 1.0 + 1e-12
        return ("sign", delta, eps, spec.d, spec.series.err_bound, measured,
                1.0, sup, ok)

    checkers = {"exp": [check_exp], "erf": [check_erf], "sign": [check_sign]}
    active = sum(checkers.values(), []) if cfg.kind == "all" else checkers[cfg.kind]
    for _ in range(cfg.count):
        for checker in active:
            kind, p1, p2, deg, bound, measured, supb, sup, ok = checker()
            all_ok &= ok
            rows.append(",".join([kind, _fmt(p1), _fmt(p2), str(deg),
                                  _fmt(bound), _fmt(measured), _fmt(supb),
                                  _fmt(sup), "1" if ok else "0"]))
    if cfg.out:
        _write_rows(cfg.out, "kind,param1,param2,degree,err_bound,"
                    "measured_err,sup_bound,measured_sup,ok", rows)
    print(f"checked {len(rows)} instances: "
          f"{'all bounds hold' if all_ok else 'BOUND VIOLATION'}")
    return EXIT_OK if all_ok else EXIT_CONTRACT


# ---------------------------------------------------------------------------
# argument wiring
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ensemble-qsvt",
        description="Thermal-state preparation cost model and simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("cost-scan", "cost-curve", "prepare", "approx-check"):
        p = sub.add_parser(name)
        p.add_argument("--config", help="key=value settings file")
        p.add_argument("--N", help="site count, or start:stop:step for curves")
        p.add_argument("--beta", type=float)
        p.add_argument("--eps", type=float)
        p.add_argument("--n-grid", dest="n_grid")
        p.add_argument("--delta-grid", dest="delta_grid")
        p.add_argument("--family")
        p.add_argument("--n", type=int)
        p.add_argument("--delta", type=float)
        p.add_argument("--mode", choices=("auto", "circuit", "oracle"))
        p.add_argument("--kind", choices=("all", "exp", "erf", "sign"))
        p.add_argument("--count", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--optimize-at", dest="optimize_at", type=int)
        p.add_argument("--out")
        p.add_argument("--plot", action="store_true", default=None)
    return parser


def build_config(argv) -> RunConfig:
    args = _build_parser().parse_args(argv)
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            cfg = RunConfig.from_text(fh.read())
    else:
        cfg = RunConfig()
    cfg.command = args.command
    for key in ("N", "beta", "eps", "n_grid", "delta_grid", "family", "n",
                "delta", "mode", "kind", "count", "seed", "optimize_at",
                "out", "plot"):
        value = getattr(args, key, None)
        if value is not None:
            setattr(cfg, key, value)
    return cfg


_COMMANDS = {
    "cost-scan": cmd_cost_scan,
    "cost-curve": cmd_cost_curve,
    "prepare": cmd_prepare,
    "approx-check": cmd_approx_check,
}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = build_config(argv)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return _COMMANDS[cfg.command](cfg)
    except (ConfigError, ensembles.MuSolveError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
