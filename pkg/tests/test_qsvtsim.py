"""Phase synthesis, block encodings, transformation circuits, amplification."""

import math

import numpy as np
import pytest
from numpy.polynomial import chebyshev as nc

from ensemble_qsvt.polyapprox import ChebyshevSeries, cheb_eval, exp_poly, sign_poly
from ensemble_qsvt.qsvtsim import (
    StateVector,
    evt_circuit,
    fpaa,
    make_block_encoding,
    qsp_phases,
    qsp_reconstruct,
    svt_oracle,
)
from ensemble_qsvt.qsvtsim.fpaa import OverlapError


def random_hermitian(rng, nq):
    dim = 2 ** nq
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (a + a.conj().T) / 2


def random_bounded_poly(rng, degree, bound=0.5):
    c = rng.normal(size=degree + 1)
    grid = np.cos(np.linspace(0, np.pi, 4001))
    c *= bound / np.abs(nc.chebval(grid, c)).max()
    return c


# ---------------------------------------------------------------------------
# statevector basics
# ---------------------------------------------------------------------------

def test_bell_pair_norm():
    sv = StateVector(2)
    sv.apply_h(0)
    sv.apply_cnot(0, 1)
    assert np.allclose(sv.amps, [1 / math.sqrt(2), 0, 0, 1 / math.sqrt(2)])
    assert abs(sv.norm() - 1.0) <= 1e-12


def test_register_cap():
    with pytest.raises(ValueError):
        StateVector(17)


# ---------------------------------------------------------------------------
# phase synthesis
# ---------------------------------------------------------------------------

def test_phases_identity_target():
    seq = qsp_phases(ChebyshevSeries([0.0, 1.0], parity="odd"))
    assert seq.degree == 1
    assert seq.residual <= 1e-10
    # the single reflection already encodes x, so the phase is trivial
    assert abs(seq.phases[0]) % math.pi <= 1e-5


def test_phases_constant_one_padded():
    seq = qsp_phases(ChebyshevSeries([1.0], parity="even"), degree=2)
    assert seq.residual <= 1e-10
    xs = np.linspace(-1, 1, 31)
    assert np.max(np.abs(qsp_reconstruct(seq.phases, xs).real - 1.0)) <= 1e-10


def test_phases_exp_part_reconstruction():
    p = exp_poly(1.0, 0.05)
    c = p.coeffs / 2.0
    odd = np.zeros(len(c))
    odd[1::2] = c[1::2]
    d = len(c) - 1 if (len(c) - 1) % 2 else len(c) - 2
    seq = qsp_phases(ChebyshevSeries(odd[: d + 1], parity="odd"))
    xs = np.linspace(-1, 1, 1000)
    rec = qsp_reconstruct(seq.phases, xs).real
    assert np.max(np.abs(rec - nc.chebval(xs, odd[: d + 1]))) <= 1e-7


def test_phases_random_targets_meet_contract():
    rng = np.random.default_rng(8)
    for degree in (4, 11, 24, 47, 60):
        c = random_bounded_poly(rng, degree, bound=0.8)
        par = "even" if degree % 2 == 0 else "odd"
        cc = np.zeros(degree + 1)
        if par == "even":
            cc[0::2] = c[0::2]
        else:
            cc[1::2] = c[1::2]
        seq = qsp_phases(ChebyshevSeries(cc, parity=par))
        assert seq.residual <= 1e-8, (degree, seq.residual)


def test_phases_unitarity_of_reconstruction():
    # |U00| <= 1 pointwise regardless of target, by construction
    spec = sign_poly(0.4, 0.2)
    seq = qsp_phases(spec.series)
    xs = np.linspace(-1, 1, 2001)
    assert np.max(np.abs(qsp_reconstruct(seq.phases, xs))) <= 1.0 + 1e-12


def test_phases_reject_mixed_parity():
    with pytest.raises(ValueError):
        qsp_phases(ChebyshevSeries([0.3, 0.3], parity="none"))


# ---------------------------------------------------------------------------
# block encodings
# ---------------------------------------------------------------------------

def test_block_encoding_pauli_z():
    be = make_block_encoding(np.diag([1.0, -1.0]), 1.0)
    expected = np.zeros((4, 4))
    expected[:2, :2] = np.diag([1.0, -1.0])
    expected[2:, 2:] = np.diag([-1.0, 1.0])
    assert np.abs(be.matrix - expected).max() <= 1e-12
    assert np.abs(be.extracted_block() - np.diag([1.0, -1.0])).max() <= 1e-12


def test_block_encoding_two_site_field():
    h = np.diag([2.0, 0.0, 0.0, -2.0])
    be = make_block_encoding(h, 2.0)
    assert np.abs(be.extracted_block() - h / 2.0).max() <= 1e-12


def test_block_encoding_unitarity():
    rng = np.random.default_rng(4)
    h = random_hermitian(rng, 2)
    be = make_block_encoding(h, np.linalg.norm(h, 2))
    u = be.matrix
    assert np.abs(u @ u.conj().T - np.eye(8)).max() <= 1e-10
    for _ in range(5):
        v = rng.normal(size=8) + 1j * rng.normal(size=8)
        v /= np.linalg.norm(v)
        sv = StateVector(3, v)
        be.apply(sv, 0)
        assert abs(sv.norm() - 1.0) <= 1e-10


def test_block_encoding_rejects_oversized():
    with pytest.raises(ValueError):
        make_block_encoding(np.diag([3.0, -3.0]), 1.0)


# ---------------------------------------------------------------------------
# singular value transformation oracle
# ---------------------------------------------------------------------------

def test_svt_identity():
    rng = np.random.default_rng(1)
    a = rng.normal(size=(4, 4))
    assert np.abs(svt_oracle(a, lambda s: s, "odd") - a).max() <= 1e-12


def test_svt_square_on_hermitian():
    rng = np.random.default_rng(2)
    h = random_hermitian(rng, 2)
    x = h / np.linalg.norm(h, 2)
    out = svt_oracle(x, lambda s: s ** 2, "even")
    assert np.abs(out - x @ x).max() <= 1e-12


def test_svt_rank_one_sign_mechanism():
    rng = np.random.default_rng(3)
    g = rng.normal(size=8) + 1j * rng.normal(size=8)
    g /= np.linalg.norm(g)
    alpha = 0.35
    a = alpha * np.outer(g, np.eye(8)[0])
    spec = sign_poly(0.3, 0.1)
    out = svt_oracle(a, lambda s: cheb_eval(spec.series, np.minimum(s, 1.0)), "odd")
    assert np.abs(out - np.outer(g, np.eye(8)[0])).max() <= 2e-4


# ---------------------------------------------------------------------------
# transformation circuits
# ---------------------------------------------------------------------------

def test_evt_linear_on_z():
    be = make_block_encoding(np.diag([1.0, -1.0]), 1.0)
    evt = evt_circuit(be, ChebyshevSeries([0.0, 0.5], parity="odd", sup_bound=0.5))
    assert np.abs(evt.extracted_block() - np.diag([0.5, -0.5])).max() <= 1e-10


def test_evt_t2_on_random():
    rng = np.random.default_rng(6)
    h = random_hermitian(rng, 2)
    alpha = np.linalg.norm(h, 2)
    be = make_block_encoding(h, alpha)
    evt = evt_circuit(be, ChebyshevSeries([0.0, 0.0, 0.5], parity="even",
                                          sup_bound=0.5))
    x = h / alpha
    assert np.abs(evt.extracted_block() - 0.5 * (2 * x @ x - np.eye(4))).max() <= 1e-8


def test_evt_query_split():
    rng = np.random.default_rng(7)
    h = random_hermitian(rng, 1)
    be = make_block_encoding(h, np.linalg.norm(h, 2))
    c = random_bounded_poly(rng, 9)
    evt = evt_circuit(be, ChebyshevSeries(c, parity="none", sup_bound=0.5))
    evt.counter.reset()
    sv = StateVector(evt.n_qubits)
    evt.apply(sv, 0)
    assert evt.counter.plain == 8
    assert evt.counter.controlled == 1
    assert evt.counter.total == 9


def test_evt_unitarity_probes():
    rng = np.random.default_rng(11)
    h = random_hermitian(rng, 2)
    be = make_block_encoding(h, np.linalg.norm(h, 2))
    c = random_bounded_poly(rng, 12)
    evt = evt_circuit(be, ChebyshevSeries(c, parity="none", sup_bound=0.5))
    for _ in range(100):
        v = rng.normal(size=2 ** evt.n_qubits) + 1j * rng.normal(size=2 ** evt.n_qubits)
        v /= np.linalg.norm(v)
        sv = StateVector(evt.n_qubits, v)
        evt.apply(sv, 0)
        assert abs(sv.norm() - 1.0) <= 1e-10


def test_evt_adjoint_inverts():
    rng = np.random.default_rng(13)
    h = random_hermitian(rng, 1)
    be = make_block_encoding(h, np.linalg.norm(h, 2))
    c = random_bounded_poly(rng, 7)
    evt = evt_circuit(be, ChebyshevSeries(c, parity="none", sup_bound=0.5))
    v = rng.normal(size=2 ** evt.n_qubits) + 1j * rng.normal(size=2 ** evt.n_qubits)
    v /= np.linalg.norm(v)
    sv = StateVector(evt.n_qubits, v)
    evt.apply(sv, 0)
    evt.apply(sv, 0, adjoint=True)
    assert np.abs(sv.amps - v).max() <= 1e-12


def test_evt_rejects_oversized_target():
    be = make_block_encoding(np.diag([1.0, -1.0]), 1.0)
    with pytest.raises(ValueError):
        evt_circuit(be, ChebyshevSeries([0.0, 0.9], parity="odd", sup_bound=0.9))


# ---------------------------------------------------------------------------
# fixed-point amplification
# ---------------------------------------------------------------------------

def planted_instance(rng, n_sub, alpha):
    dim = 2 ** n_sub
    psi0 = np.zeros(dim, complex)
    psi0[0] = 1.0
    g = rng.normal(size=dim // 2) + 1j * rng.normal(size=dim // 2)
    goal = np.zeros(dim, complex)
    goal[: dim // 2] = g / np.linalg.norm(g)
    rest = rng.normal(size=dim // 2) + 1j * rng.normal(size=dim // 2)
    bad = np.zeros(dim, complex)
    bad[dim // 2:] = rest / np.linalg.norm(rest)
    col0 = alpha * goal + math.sqrt(1 - alpha ** 2) * bad
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    m[:, 0] = col0
    q, _ = np.linalg.qr(m)
    q[:, 0] = col0
    for k in range(1, dim):
        for j in range(k):
            q[:, k] -= np.vdot(q[:, j], q[:, k]) * q[:, j]
        q[:, k] /= np.linalg.norm(q[:, k])
    mask = np.arange(dim) < dim // 2
    return q, psi0, goal, mask


def run_fpaa_instance(rng, alpha, delta, eps, n_sub=3):
    u, psi0, goal, mask = planted_instance(rng, n_sub, alpha)
    queries = [0]

    def apply_u(sv, adjoint=False):
        queries[0] += 1
        sv.apply_block(u.conj().T if adjoint else u, 1, n_sub)

    circ = fpaa(apply_u, psi0, mask, delta=delta, eps=eps, measured_overlap=alpha)
    sv = StateVector(1 + n_sub)
    sv.amps[:] = 0.0
    sv.amps[: 2 ** n_sub] = psi0
    circ.run(sv)
    ref = np.zeros(2 ** (1 + n_sub), complex)
    ref[: 2 ** n_sub] = goal
    return float(np.linalg.norm(ref - sv.amps)), queries[0], circ


def test_fpaa_unit_overlap():
    rng = np.random.default_rng(21)
    err, queries, circ = run_fpaa_instance(rng, alpha=1.0, delta=0.9, eps=0.1)
    assert 1.0 - (err ** 2) / 2.0 >= 1.0 - 0.1
    assert queries == circ.spec.d


def test_fpaa_planted_overlap():
    rng = np.random.default_rng(22)
    err, queries, circ = run_fpaa_instance(rng, alpha=0.2, delta=0.15, eps=0.05)
    assert err <= 0.05
    assert queries == circ.spec.d


def test_fpaa_quadratic_speedup_scaling():
    # query count grows like 1/delta (log factors aside), not like the
    # 1/delta^2 repetition count of measure-and-retry
    counts = {delta: sign_poly(delta, 0.1).d for delta in (0.05, 0.1, 0.2)}
    assert counts[0.1] / counts[0.2] == pytest.approx(2.0, rel=0.3)
    assert counts[0.05] / counts[0.1] == pytest.approx(2.0, rel=0.3)
    assert counts[0.05] * 0.05 == pytest.approx(counts[0.2] * 0.2, rel=0.3)


def test_fpaa_contract_violation_detected():
    rng = np.random.default_rng(23)
    u, psi0, goal, mask = planted_instance(rng, 3, 0.1)
    with pytest.raises(OverlapError):
        fpaa(lambda sv, adjoint=False: None, psi0, mask,
             delta=0.5, eps=0.1, measured_overlap=0.1)
