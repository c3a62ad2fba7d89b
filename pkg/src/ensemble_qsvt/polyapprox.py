"""Certified Chebyshev approximations of exp, erf and sign, plus the special
functions they are built from.

All series are expanded in the Chebyshev basis T_j on [-1, +1] and carry a
rigorous sup-norm error bound for their target function.  Modified Bessel
values are always handled in exponentially scaled form e^{-x} I_j(x), so the
construction never forms an unscaled I_j (which overflows once x grows past
a few hundred).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as _cheb

__all__ = [
    "ChebyshevSeries",
    "SignPolySpec",
    "bessel_i_scaled",
    "bessel_i_scaled_seq",
    "lambert_w",
    "lambert_w_log",
    "cheb_eval",
    "certification_grid",
    "exp_poly",
    "erf_poly",
    "sign_poly",
]


# ---------------------------------------------------------------------------
# scaled modified Bessel functions
# ---------------------------------------------------------------------------

def bessel_i_scaled_seq(nmax: int, x: float) -> np.ndarray:
    """Return e^{-x} I_j(x) for j = 0..nmax by Miller's backward recurrence.

    The downward recurrence I_{j-1} = I_{j+1} + (2j/x) I_j is run from a
    start index high enough that the truncation is below double precision,
    and the whole sequence is normalized with the identity
    I_0(x) + 2 sum_{j>=1} I_j(x) = e^x, which in scaled form reads
    ive_0 + 2 sum_j ive_j = 1.
    """
    if nmax < 0:
        raise ValueError("order must be >= 0")
    if x < 0:
        raise ValueError("bessel_i_scaled requires x >= 0")
    out = np.zeros(nmax + 1)
    if x == 0.0:
        out[0] = 1.0
        return out
    if x < 1e-8:
        # ive_j = e^{-x} (x/2)^j / j! (1 + O(x^2)); truncation below 1e-16
        # relative in this range.
        j = np.arange(nmax + 1, dtype=float)
        lgam = np.array([math.lgamma(v + 1.0) for v in j])
        np.exp(-x + j * math.log(x / 2.0) - lgam, out=out)
        return out

    top = max(nmax, int(math.ceil(1.1 * x)))
    start = top + int(math.ceil(10.0 * math.sqrt(max(top, 100)))) + 50

    p_up = 0.0          # unnormalized value at index k+1
    p_cur = 1e-280      # arbitrary seed at the start index
    norm = 0.0
    for k in range(start, 0, -1):
        p_down = p_up + (2.0 * k / x) * p_cur
        if k - 1 <= nmax:
            out[k - 1] = p_down
        norm += 2.0 * p_cur
        p_up = p_cur
        p_cur = p_down
        if abs(p_cur) > 1e280:
            p_cur *= 1e-280
            p_up *= 1e-280
            norm *= 1e-280
            out *= 1e-280
    norm += p_cur  # j = 0 enters the sum identity with weight 1, not 2
    out /= norm
    return out


def bessel_i_scaled(j: int, x: float) -> float:
    """Exponentially scaled modified Bessel function e^{-x} I_j(x).

    Valid for j >= 0 and x >= 0; relative accuracy is close to machine
    precision for x, j up to 1e4.
    """
    if j < 0:
        raise ValueError("order must be >= 0")
    return float(bessel_i_scaled_seq(j, x)[j])


# ---------------------------------------------------------------------------
# Lambert W (principal branch, nonnegative arguments)
# ---------------------------------------------------------------------------

def lambert_w(x: float) -> float:
    """Principal-branch Lambert W for x >= 0, solving W e^W = x.

    Arguments above 1e15 are routed through the logarithmic form, so the
    residual stays near machine precision over the whole representable range.
    """
    if x < 0:
        raise ValueError("lambert_w requires x >= 0")
    if x == 0.0:
        return 0.0
    if x > 1e15:
        return lambert_w_log(math.log(x))
    # Halley iteration on f(w) = w e^w - x.
    if x < 1.0:
        w = x * (1.0 - x)
        if w <= 0.0:
            w = x / (1.0 + x)
    else:
        lx = math.log(x)
        w = lx - math.log(lx) if lx > 1.0 else 1.0
    for _ in range(100):
        ew = math.exp(w)
        f = w * ew - x
        denom = ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0)
        dw = f / denom
        w -= dw
        if abs(dw) <= 1e-16 * (1.0 + abs(w)):
            break
    return w


def lambert_w_log(log_x: float) -> float:
    """Lambert W of x given log(x), for arguments far beyond double range.

    Solves w + log w = log x by Newton iteration; requires log_x >= 1 so the
    principal branch is bounded away from the w -> 0 singularity of log w.
    """
    if log_x < 1.0:
        return lambert_w(math.exp(log_x))
    w = log_x - math.log(log_x) if log_x > math.e else 1.0
    w = max(w, 1.0)
    for _ in range(100):
        dw = (w + math.log(w) - log_x) * w / (w + 1.0)
        w -= dw
        if abs(dw) <= 1e-16 * (1.0 + abs(w)):
            break
    return w


# ---------------------------------------------------------------------------
# Chebyshev series container
# ---------------------------------------------------------------------------

@dataclass
class ChebyshevSeries:
    """Coefficients in the T_j basis with declared parity and certified bounds.

    sup_bound is a certified upper bound on max |series| over [-1, +1] (when
    one is available); err_bound is a certified sup-distance to the target
    function on its stated domain.
    """

    coeffs: np.ndarray
    parity: str = "none"  # "even", "odd" or "none"
    sup_bound: float | None = None
    err_bound: float | None = None

    def __post_init__(self) -> None:
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.parity not in ("even", "odd", "none"):
            raise ValueError(f"unknown parity {self.parity!r}")
        if self.parity == "even" and np.any(self.coeffs[1::2] != 0.0):
            raise ValueError("even series has nonzero odd coefficients")
        if self.parity == "odd" and np.any(self.coeffs[0::2] != 0.0):
            raise ValueError("odd series has nonzero even coefficients")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        return cheb_eval(self, x)


def cheb_eval(series: ChebyshevSeries, x):
    """Evaluate a Chebyshev series at x in [-1, +1] via Clenshaw recurrence."""
    arr = np.asarray(x, dtype=float)
    if np.any(np.abs(arr) > 1.0 + 1e-14):
        raise ValueError("cheb_eval requires |x| <= 1")
    val = _cheb.chebval(arr, series.coeffs)
    if arr.ndim == 0:
        return float(val)
    return val


def certification_grid(m: int = 100_000) -> np.ndarray:
    """m Chebyshev nodes plus both endpoints, for sup-norm certification.

    Chebyshev nodes cluster near the endpoints where truncated expansions
    oscillate most, which makes the measured sup a tight proxy for the true
    one.
    """
    i = np.arange(m)
    nodes = np.cos((2 * i + 1) * np.pi / (2 * m))
    return np.concatenate(([-1.0], nodes[::-1], [1.0]))


# ---------------------------------------------------------------------------
# approximation of exp(-lambda (x+1))
# ---------------------------------------------------------------------------

def exp_poly(lam: float, eps: float) -> ChebyshevSeries:
    """Chebyshev approximation of e^{-lam (x+1)} on [-1, +1] with sup error
    at most eps.

    The degree is n = ceil(sqrt(2 t log(4/eps))) with
    t = ceil(max(e^2 lam, log(2/eps))), and the certified bound
    2 e^{-n^2/2t} + e^{-lam-t} <= eps holds by construction.  Coefficients
    come out of the scaled Bessel sequence directly: the e^{-lam} prefactor
    of the expansion cancels against the scaling, so no unscaled I_j is ever
    formed.
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    t = math.ceil(max(math.e ** 2 * lam, math.log(2.0 / eps)))
    n = math.ceil(math.sqrt(2.0 * t * math.log(4.0 / eps)))
    ive = bessel_i_scaled_seq(n, lam)
    coeffs = 2.0 * ive
    coeffs[0] = ive[0]
    # T_j(-x) = (-1)^j T_j(x)
    coeffs[1::2] *= -1.0
    sup = float(ive[0] + 2.0 * np.sum(ive[1:]))
    err = 2.0 * math.exp(-n * n / (2.0 * t)) + math.exp(-min(lam + t, 745.0))
    return ChebyshevSeries(coeffs, parity="none", sup_bound=sup, err_bound=err)


# ---------------------------------------------------------------------------
# approximation of erf(k x)
# ---------------------------------------------------------------------------

def erf_poly(k: float, n: int) -> ChebyshevSeries:
    """Odd degree-n Chebyshev approximation of erf(k x) on [-1, +1].

    The certified bound is (4k / (sqrt(pi) n)) (2 e^{-(n-1)^2/8t} +
    e^{-k^2/2 - t}) with t = ceil(e^2 k^2 / 2).
    """
    if k <= 0:
        raise ValueError("k must be positive")
    if n < 1 or n % 2 == 0:
        raise ValueError("n must be an odd positive integer")
    half = (n - 1) // 2
    ive = bessel_i_scaled_seq(half, k * k / 2.0)
    pref = 2.0 * k / math.sqrt(math.pi)
    coeffs = np.zeros(n + 1)
    coeffs[1] = pref * ive[0]
    for j in range(1, half + 1):
        term = pref * ive[j] * (-1.0) ** j
        coeffs[2 * j + 1] += term / (2 * j + 1)
        coeffs[2 * j - 1] -= term / (2 * j - 1)
    t = math.ceil(math.e ** 2 * k * k / 2.0)
    err = (4.0 * k / (math.sqrt(math.pi) * n)) * (
        2.0 * math.exp(-((n - 1) ** 2) / (8.0 * t))
        + math.exp(-min(k * k / 2.0 + t, 745.0))
    )
    sup = math.erf(k) + err
    return ChebyshevSeries(coeffs, parity="odd", sup_bound=sup, err_bound=err)


# ---------------------------------------------------------------------------
# sign approximation used by fixed-point amplitude amplification
# ---------------------------------------------------------------------------

@dataclass
class SignPolySpec:
    """Odd polynomial within eps^4/8 of sgn(x) outside (-delta, +delta).

    k, t and d follow the closed-form selection that keeps |series| <= 1 on
    the whole interval; the series itself is the erf approximation normalized
    by 1/(1 + eps^4/16).
    """

    delta: float
    eps: float
    k: float
    t: int
    d: int
    series: ChebyshevSeries = field(repr=False)


def sign_poly(delta: float, eps: float) -> SignPolySpec:
    """Build the sign-function approximation for gap delta and error eps."""
    if not 0.0 < delta <= 1.0:
        raise ValueError("delta must lie in (0, 1]")
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    e4 = eps ** 4
    e8 = e4 * e4
    k = math.sqrt(0.5 * lambert_w(2.0 ** 11 / (math.pi * e8))) / delta
    t = math.ceil(max(
        math.e ** 2 * k * k / 2.0,
        math.log(2.0 ** 8 * k / (math.sqrt(math.pi) * e4)),
    ))
    d = 2 * math.ceil(math.sqrt(t * lambert_w(2.0 ** 16 * k * k / (math.pi * t * e8)))) + 1
    base = erf_poly(k, d)
    series = ChebyshevSeries(
        base.coeffs / (1.0 + e4 / 16.0),
        parity="odd",
        sup_bound=1.0,
        err_bound=e4 / 8.0,
    )
    return SignPolySpec(delta=delta, eps=eps, k=k, t=t, d=d, series=series)
