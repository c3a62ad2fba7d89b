"""Generalized-ensemble statistical mechanics on explicit spectra.

An ensemble is specified by a function eta of the energy density u; the
density matrix is proportional to exp(-N eta(H/N)).  Everything extensive
(partition functions, weights, the subnormalization zeta) is handled in the
natural-log domain, because for N ~ 1000 the sums involved span e^{+-Theta(N)}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npp
from scipy.special import gammaln, logsumexp

__all__ = [
    "EtaSpec",
    "SpectrumModel",
    "ThermoPoint",
    "MuSolveError",
    "spectrum_free_spins",
    "spectrum_dense",
    "log_partition",
    "energy_density",
    "beta_of",
    "entropy_density",
    "zeta_log",
    "eta_extrema",
    "solve_even_power_mu",
    "free_energy_canonical",
    "thermo_point",
    "save_spectrum_csv",
    "load_spectrum_csv",
]

_LOG2 = math.log(2.0)


class MuSolveError(RuntimeError):
    """Raised when the ensemble-parameter bisection cannot bracket a solution."""


# ---------------------------------------------------------------------------
# ensemble functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EtaSpec:
    """An ensemble function eta(u) with family metadata.

    Polynomial families carry their monomial coefficients (ascending powers
    of u) alongside the closed-form parameters; evaluation always goes
    through the closed form, which is immune to the cancellation the
    expanded coefficients suffer for sharp even-power ensembles.
    """

    family: str
    params: tuple = ()
    coeffs: np.ndarray | None = field(default=None, repr=False)

    # -- constructors -------------------------------------------------------

    @staticmethod
    def canonical(beta: float) -> "EtaSpec":
        """eta(u) = beta u, the exponential-weight ensemble."""
        return EtaSpec("canonical", (float(beta),), np.array([0.0, float(beta)]))

    @staticmethod
    def gaussian(lam: float, mu: float) -> "EtaSpec":
        """eta(u) = lam (u - mu)^2 / 2."""
        if lam <= 0:
            raise ValueError("lam must be positive")
        lam, mu = float(lam), float(mu)
        coeffs = np.array([0.5 * lam * mu * mu, -lam * mu, 0.5 * lam])
        return EtaSpec("gaussian", (lam, mu), coeffs)

    @staticmethod
    def even_power(n: int, delta: float, mu: float) -> "EtaSpec":
        """eta(u) = ((u - mu) / delta)^(2n)."""
        if n < 1 or int(n) != n:
            raise ValueError("n must be a positive integer")
        if delta <= 0:
            raise ValueError("delta must be positive")
        n, delta, mu = int(n), float(delta), float(mu)
        shifted = npp.polypow(np.array([-mu, 1.0]), 2 * n) / delta ** (2 * n)
        return EtaSpec("even_power", (n, delta, mu), shifted)

    @staticmethod
    def log_comparison(kappa: float, l: float) -> "EtaSpec":
        """eta(u) = -2 kappa log(l - u), defined for u < l (not polynomial)."""
        if kappa <= 0:
            raise ValueError("kappa must be positive")
        return EtaSpec("log_comparison", (float(kappa), float(l)), None)

    @staticmethod
    def custom(coeffs) -> "EtaSpec":
        """eta(u) = sum_i coeffs[i] u^i."""
        c = np.atleast_1d(np.asarray(coeffs, dtype=float))
        return EtaSpec("custom", (), c)

    # -- evaluation ---------------------------------------------------------

    @property
    def degree(self) -> int:
        """Polynomial degree d_eta (canonical counts as 1 even at beta=0)."""
        if self.family == "canonical":
            return 1
        if self.family == "gaussian":
            return 2
        if self.family == "even_power":
            return 2 * self.params[0]
        if self.family == "custom":
            trimmed = npp.polytrim(self.coeffs)
            return max(len(trimmed) - 1, 1)
        raise ValueError(f"{self.family} has no polynomial degree")

    def eval(self, u):
        u = np.asarray(u, dtype=float)
        if self.family == "canonical":
            out = self.params[0] * u
        elif self.family == "gaussian":
            lam, mu = self.params
            out = 0.5 * lam * (u - mu) ** 2
        elif self.family == "even_power":
            n, delta, mu = self.params
            out = ((u - mu) / delta) ** (2 * n)
        elif self.family == "log_comparison":
            kappa, l = self.params
            if np.any(u >= l):
                raise ValueError("log_comparison requires u < l")
            out = -2.0 * kappa * np.log(l - u)
        else:
            out = npp.polyval(u, self.coeffs)
        return out if out.ndim else float(out)

    def deriv(self, u):
        u = np.asarray(u, dtype=float)
        if self.family == "canonical":
            out = np.full_like(u, self.params[0])
        elif self.family == "gaussian":
            lam, mu = self.params
            out = lam * (u - mu)
        elif self.family == "even_power":
            n, delta, mu = self.params
            out = (2.0 * n / delta) * ((u - mu) / delta) ** (2 * n - 1)
        elif self.family == "log_comparison":
            kappa, l = self.params
            out = 2.0 * kappa / (l - u)
        else:
            out = npp.polyval(u, npp.polyder(self.coeffs))
        return out if out.ndim else float(out)

    def __call__(self, u):
        return self.eval(u)


def beta_of(eta: EtaSpec, u: float) -> float:
    """Inverse temperature of the state at energy density u: beta = eta'(u)."""
    return float(eta.deriv(u))


# ---------------------------------------------------------------------------
# extrema of eta over the encoded spectral window
# ---------------------------------------------------------------------------

def _poly_sign_change_roots(coeffs: np.ndarray, lo: float, hi: float) -> list[float]:
    """Roots of a polynomial in (lo, hi) at which it changes sign.

    The interval is partitioned into monotone pieces at the sign-change
    roots of the derivative (recursively), then each piece is bisected.
    Even-multiplicity roots never change the sign and are irrelevant for
    extremum detection, so this is exact for the purpose at hand and does
    not suffer the companion-matrix blowup on clustered roots.
    """
    coeffs = npp.polytrim(coeffs, tol=0.0)
    deg = len(coeffs) - 1
    if deg < 1:
        return []
    if deg == 1:
        r = -coeffs[0] / coeffs[1]
        return [r] if lo < r < hi else []
    breakpoints = [lo] + _poly_sign_change_roots(npp.polyder(coeffs), lo, hi) + [hi]
    roots = []
    vals = [npp.polyval(b, coeffs) for b in breakpoints]
    for (a, fa), (b, fb) in zip(zip(breakpoints, vals), zip(breakpoints[1:], vals[1:])):
        if fa == 0.0 and lo < a < hi:
            roots.append(a)
            continue
        if fa * fb >= 0.0:
            continue
        x0, x1, f0 = a, b, fa
        for _ in range(200):
            mid = 0.5 * (x0 + x1)
            if mid == x0 or mid == x1:
                break
            fm = npp.polyval(mid, coeffs)
            if fm == 0.0:
                x0 = x1 = mid
                break
            if (f0 > 0) == (fm > 0):
                x0, f0 = mid, fm
            else:
                x1 = mid
        roots.append(0.5 * (x0 + x1))
    return sorted(set(roots))


def eta_extrema(eta: EtaSpec, alpha: float) -> tuple[float, float]:
    """Exact (eta_min, eta_max) of eta over u in [-alpha, +alpha].

    Interior critical points are located analytically for the closed-form
    families and by derivative sign-change isolation for custom polynomials;
    grid search is never used.
    """
    lo, hi = -alpha, alpha
    candidates = [lo, hi]
    if eta.family in ("gaussian", "even_power"):
        mu = eta.params[-1]
        if lo < mu < hi:
            candidates.append(mu)
    elif eta.family == "custom":
        dcoeffs = npp.polyder(eta.coeffs)
        candidates.extend(_poly_sign_change_roots(dcoeffs, lo, hi))
    # canonical and log_comparison are monotone: endpoints suffice
    vals = [float(eta.eval(u)) for u in candidates]
    return min(vals), max(vals)


# ---------------------------------------------------------------------------
# spectra
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectrumModel:
    """Energy levels as densities u_k with log-multiplicities.

    alpha is the per-site block-encoding subnormalization, so every level
    satisfies |u_k| <= alpha.
    """

    n_sites: int
    levels: np.ndarray
    log_mult: np.ndarray
    alpha: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "levels", np.asarray(self.levels, dtype=float))
        object.__setattr__(self, "log_mult", np.asarray(self.log_mult, dtype=float))
        if self.levels.shape != self.log_mult.shape:
            raise ValueError("levels and log_mult must have matching shapes")
        if np.any(np.abs(self.levels) > self.alpha * (1 + 1e-12)):
            raise ValueError("levels must lie within [-alpha, +alpha]")
        self.levels.setflags(write=False)
        self.log_mult.setflags(write=False)


def spectrum_free_spins(N: int) -> SpectrumModel:
    """Spectrum of N noninteracting spins: u_k = 2k/N - 1, multiplicity C(N,k)."""
    if N < 1:
        raise ValueError("N must be >= 1")
    k = np.arange(N + 1, dtype=float)
    levels = 2.0 * k / N - 1.0
    log_mult = gammaln(N + 1.0) - gammaln(k + 1.0) - gammaln(N - k + 1.0)
    return SpectrumModel(n_sites=N, levels=levels, log_mult=log_mult, alpha=1.0)


def spectrum_dense(H: np.ndarray, n_sites: int, alpha: float,
                   degeneracy_tol: float = 1e-10) -> SpectrumModel:
    """Spectrum of an explicit Hermitian matrix, as energy densities.

    Eigenvalues within degeneracy_tol of each other are merged into a single
    level with the appropriate multiplicity, which keeps the multiplicity
    counting stable for symmetric Hamiltonians.
    """
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError("H must be a square matrix")
    if np.linalg.norm(H - H.conj().T) > 1e-10:
        raise ValueError("H must be Hermitian")
    eigs = np.linalg.eigvalsh(H)
    if np.max(np.abs(eigs)) > alpha * n_sites * (1 + 1e-12):
        raise ValueError("spectral norm of H exceeds alpha * n_sites")
    levels, mults = [], []
    for e in eigs:
        if levels and abs(e - levels[-1]) <= degeneracy_tol:
            mults[-1] += 1
        else:
            levels.append(float(e))
            mults.append(1)
    u = np.array(levels) / n_sites
    return SpectrumModel(n_sites=n_sites, levels=u,
                         log_mult=np.log(np.array(mults, dtype=float)),
                         alpha=alpha)


# ---------------------------------------------------------------------------
# thermodynamic quantities at finite N
# ---------------------------------------------------------------------------

def log_partition(spec: SpectrumModel, eta: EtaSpec) -> float:
    """log Z = log sum_k mult_k exp(-N eta(u_k)), evaluated in the log domain."""
    return float(logsumexp(spec.log_mult - spec.n_sites * eta.eval(spec.levels)))


def _level_weights(spec: SpectrumModel, eta: EtaSpec) -> np.ndarray:
    a = spec.log_mult - spec.n_sites * eta.eval(spec.levels)
    a -= np.max(a)
    w = np.exp(a)
    return w / np.sum(w)


def energy_density(spec: SpectrumModel, eta: EtaSpec) -> float:
    """Mean energy density u_eta = sum_k u_k w_k under the ensemble weights."""
    return float(np.dot(spec.levels, _level_weights(spec, eta)))


def entropy_density(spec: SpectrumModel, eta: EtaSpec) -> float:
    """Entropy density s = (1/N) log Z + eta(u_eta) at finite N."""
    u = energy_density(spec, eta)
    return log_partition(spec, eta) / spec.n_sites + float(eta.eval(u))


def zeta_log(spec: SpectrumModel, eta: EtaSpec) -> float:
    """log zeta = N eta_min + log Z - N log 2; zeta is the squared overlap
    scale that governs the amplitude-amplification cost and never exceeds 1.
    """
    eta_min, _ = eta_extrema(eta, spec.alpha)
    return spec.n_sites * eta_min + log_partition(spec, eta) - spec.n_sites * _LOG2


def free_energy_canonical(spec: SpectrumModel, beta: float) -> float:
    """Helmholtz free energy density -(1/(N beta)) log Z at finite N."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    return -log_partition(spec, EtaSpec.canonical(beta)) / (spec.n_sites * beta)


@dataclass(frozen=True)
class ThermoPoint:
    """Snapshot of the ensemble thermodynamics at one (spectrum, eta) pair."""

    log_Z: float
    u_eta: float
    beta: float
    entropy: float
    zeta_log: float
    eta_min: float
    eta_max: float


def thermo_point(spec: SpectrumModel, eta: EtaSpec) -> ThermoPoint:
    log_Z = log_partition(spec, eta)
    u = energy_density(spec, eta)
    eta_min, eta_max = eta_extrema(eta, spec.alpha)
    return ThermoPoint(
        log_Z=log_Z,
        u_eta=u,
        beta=beta_of(eta, u),
        entropy=log_Z / spec.n_sites + float(eta.eval(u)),
        zeta_log=spec.n_sites * eta_min + log_Z - spec.n_sites * _LOG2,
        eta_min=eta_min,
        eta_max=eta_max,
    )


# ---------------------------------------------------------------------------
# ensemble-parameter constraint solving
# ---------------------------------------------------------------------------

def solve_even_power_mu(spec: SpectrumModel, beta_target: float, n: int,
                        delta: float, max_iter: int = 200) -> float:
    """Locate mu so that the even-power ensemble sits at inverse temperature
    beta_target on the given spectrum.

    The constraint is implicit (the realized inverse temperature
    eta'(u_eta) depends on mu through u_eta).  On a discrete spectrum the
    residual beta(mu) - beta_target can have spurious extra roots when the
    ensemble is sharp relative to the level spacing, so the search starts
    from the ensemble-equivalence prediction mu ~ u_can(beta) - offset,
    walks outward to the nearest sign change, bisects inside it, and then
    validates that the realized energy density actually matches the target
    equilibrium state.
    """
    if beta_target <= 0:
        raise ValueError("beta_target must be positive")
    offset = delta * (delta * beta_target / (2.0 * n)) ** (1.0 / (2 * n - 1))
    u_ref = energy_density(spec, EtaSpec.canonical(beta_target))
    mu0 = u_ref - offset

    def realized(mu: float) -> tuple[float, float]:
        eta = EtaSpec.even_power(n, delta, mu)
        u = energy_density(spec, eta)
        return beta_of(eta, u) - beta_target, u

    levels = spec.levels
    gap = float(np.max(np.diff(levels))) if len(levels) > 1 else 0.0
    step0 = max(delta / 8.0, gap / 4.0, 1e-4)
    max_walk = 4.0 + offset
    u_tol = max(0.1, 3.0 * gap)

    def bisect(lo: float, hi: float) -> float:
        r_lo, _ = realized(lo)
        for _ in range(max_iter):
            mid = 0.5 * (lo + hi)
            if mid == lo or mid == hi:
                break
            r_mid, _ = realized(mid)
            if r_mid == 0.0:
                return mid
            if (r_mid > 0.0) == (r_lo > 0.0):
                lo, r_lo = mid, r_mid
            else:
                hi = mid
            if hi - lo <= 1e-15 * (1.0 + abs(mid)):
                break
        return 0.5 * (lo + hi)

    def validated(mu: float) -> float | None:
        _, u_sol = realized(mu)
        return mu if abs(u_sol - u_ref) <= u_tol else None

    r0, _ = realized(mu0)
    if r0 == 0.0 and validated(mu0) is not None:
        return mu0

    # Fast path: beta(mu) falls as mu grows on the physical branch, so walk
    # toward the root with doubling steps until the residual changes sign.
    direction = 1.0 if r0 > 0.0 else -1.0
    for flip in (direction, -direction):
        prev, r_prev, dist = mu0, r0, step0
        while dist <= max_walk:
            cand = mu0 + flip * dist
            r_cand, _ = realized(cand)
            if r_cand == 0.0 or (r_cand > 0.0) != (r_prev > 0.0):
                mu = bisect(*sorted((prev, cand)))
                mu = validated(mu)
                if mu is not None:
                    return mu
                break
            prev, r_prev = cand, r_cand
            dist *= 2.0
        else:
            continue
        break

    # Ensembles much sharper than the level spacing lock onto individual
    # levels; the realized mean-based inverse temperature then oscillates
    # without ever reaching the target, and no admissible root exists.
    raise MuSolveError(
        f"no admissible mu root at beta={beta_target}, n={n}, delta={delta}"
    )


# ---------------------------------------------------------------------------
# spectrum CSV interchange
# ---------------------------------------------------------------------------

def save_spectrum_csv(spec: SpectrumModel, path) -> None:
    """Write levels as CSV with header ``u,log_mult``, one level per row."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("u,log_mult\n")
        for u, lm in zip(spec.levels, spec.log_mult):
            fh.write(f"{u:.17g},{lm:.17g}\n")


def load_spectrum_csv(path, n_sites: int, alpha: float = 1.0) -> SpectrumModel:
    """Read a spectrum written by save_spectrum_csv."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return SpectrumModel(n_sites=n_sites, levels=data[:, 0],
                         log_mult=data[:, 1], alpha=alpha)
