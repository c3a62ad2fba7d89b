"""Block encodings and eigenvalue-transformation circuits.

A block encoding embeds H / alpha as the upper-left block of a unitary on
(ancilla + system) qubits; the transformation circuit interleaves queries to
that unitary with projector-controlled phase rotations, realizing a
polynomial of the encoded matrix in its own upper-left block.  Every query
to the base encoding is instrumented, so closed-form query counts can be
checked against what a circuit actually consumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..polyapprox import ChebyshevSeries
from .qsp import PhaseSequence, qsp_phases
from .statevector import StateVector

__all__ = [
    "QueryCounter",
    "MatrixBlockEncoding",
    "EvtCircuit",
    "make_block_encoding",
    "svt_oracle",
    "evt_circuit",
]


class QueryCounter:
    """Counts queries to a base block encoding (controlled or plain)."""

    __slots__ = ("total", "controlled")

    def __init__(self) -> None:
        self.total = 0
        self.controlled = 0

    def tick(self, controlled: bool = False) -> None:
        self.total += 1
        if controlled:
            self.controlled += 1

    @property
    def plain(self) -> int:
        return self.total - self.controlled

    def reset(self) -> None:
        self.total = 0
        self.controlled = 0


class MatrixBlockEncoding:
    """An explicit dense unitary acting as an (alpha, a, eps) encoding."""

    def __init__(self, matrix: np.ndarray, n_system: int, n_ancilla: int,
                 alpha_total: float, epsilon_be: float = 0.0,
                 counter: QueryCounter | None = None):
        self.matrix = np.asarray(matrix, dtype=complex)
        self.n_system = n_system
        self.n_ancilla = n_ancilla
        self.alpha_total = alpha_total
        self.epsilon_be = epsilon_be
        self.counter = counter if counter is not None else QueryCounter()
        dim = 2 ** (n_system + n_ancilla)
        if self.matrix.shape != (dim, dim):
            raise ValueError("matrix size does not match the declared registers")

    @property
    def n_qubits(self) -> int:
        return self.n_ancilla + self.n_system

    def apply(self, sv: StateVector, q0: int, adjoint: bool = False) -> None:
        self.counter.tick()
        mat = self.matrix.conj().T if adjoint else self.matrix
        sv.apply_block(mat, q0, self.n_qubits)

    def apply_controlled(self, sv: StateVector, control: int, q0: int,
                         adjoint: bool = False) -> None:
        self.counter.tick(controlled=True)
        mat = self.matrix.conj().T if adjoint else self.matrix
        sv.apply_block_controlled(mat, control, q0, self.n_qubits)

    def extracted_block(self) -> np.ndarray:
        """<0|^a U |0>^a, the encoded operator divided by alpha_total."""
        dim_s = 2 ** self.n_system
        return self.matrix[:dim_s, :dim_s]


def make_block_encoding(H: np.ndarray, alpha_total: float,
                        counter: QueryCounter | None = None) -> MatrixBlockEncoding:
    """Single-ancilla exact encoding of a Hermitian matrix with norm <= alpha.

    Uses the completion [[A, sqrt(I-A^2)], [sqrt(I-A^2), -A]] for A = H/alpha;
    the square root is taken in the eigenbasis.
    """
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError("H must be square")
    if np.linalg.norm(H - H.conj().T) > 1e-10:
        raise ValueError("H must be Hermitian")
    n_system = int(math.log2(H.shape[0]))
    if 2 ** n_system != H.shape[0]:
        raise ValueError("H must act on a whole number of qubits")
    norm = float(np.linalg.norm(H, 2))
    if norm > alpha_total * (1 + 1e-12):
        raise ValueError("spectral norm of H exceeds alpha_total")
    evals, vecs = np.linalg.eigh(H)
    a = evals / alpha_total
    comp = np.sqrt(np.clip(1.0 - a * a, 0.0, None))
    A = (vecs * a) @ vecs.conj().T
    S = (vecs * comp) @ vecs.conj().T
    U = np.block([[A, S], [S, -A]])
    return MatrixBlockEncoding(U, n_system=n_system, n_ancilla=1,
                               alpha_total=alpha_total, counter=counter)


def svt_oracle(A: np.ndarray, f, parity: str) -> np.ndarray:
    """Exact singular value transformation of A for a definite-parity f.

    Odd parity maps singular vectors across (sum f(s_i) |u_i><v_i|), even
    parity stays on the input side (sum f(s_i) |v_i><v_i|).  For Hermitian A
    and polynomial f this coincides with the eigenvalue transformation.
    """
    if parity not in ("even", "odd"):
        raise ValueError("parity must be 'even' or 'odd'")
    u, s, vh = np.linalg.svd(np.asarray(A, dtype=complex))
    fs = np.asarray(f(s), dtype=complex)
    if parity == "odd":
        return (u * fs) @ vh
    return (vh.conj().T * fs) @ vh


class EvtCircuit:
    """Eigenvalue-transformation circuit: a (1, a+2, eps)-encoding of P(H/alpha).

    Two extra ancillas sit above the base encoding: one averages a phase
    sequence with its negation (projecting onto the real part of the realized
    polynomial), the other selects between the even- and odd-part sequences,
    with the final base query applied under its control.  Projector rotations
    follow the controlled-NOT sandwich construction, so the base ancillas are
    only ever touched by base queries themselves.
    """

    def __init__(self, base: MatrixBlockEncoding, target: ChebyshevSeries,
                 seq_long: PhaseSequence, seq_short: PhaseSequence):
        self.base = base
        self.target = target
        self.seq_long = seq_long
        self.seq_short = seq_short
        self.n_system = base.n_system
        self.n_ancilla = base.n_ancilla + 2
        self.alpha_total = 1.0
        self.epsilon_be = max(seq_long.residual, seq_short.residual)
        self.counter = base.counter

    @property
    def n_qubits(self) -> int:
        return self.n_ancilla + self.n_system

    @property
    def degree(self) -> int:
        return self.seq_long.degree

    def _ops(self, q0: int):
        """Chronological op list; each entry is (kind, payload)."""
        d_long = self.seq_long.degree
        phi_l = self.seq_long.phases
        phi_s = self.seq_short.phases
        ops = [("h", q0), ("h", q0 + 1)]
        for i in range(1, d_long + 1):
            adjoint = i % 2 == 0
            if i < d_long:
                ops.append(("base", adjoint))
            else:
                ops.append(("base_ctrl", adjoint))
            ang_l = phi_l[d_long - i]
            if i <= d_long - 1:
                ang_s = phi_s[d_long - 1 - i]
            else:
                # a length-0 short sequence realizes the zero polynomial via a
                # closing rotation that cancels its two averaged branches
                ang_s = 0.5 * np.pi if len(phi_s) == 0 else 0.0
            ops.append(("pirot", (ang_s, ang_l)))
        ops += [("h", q0 + 1), ("h", q0)]
        return ops

    def apply(self, sv: StateVector, q0: int, adjoint: bool = False) -> None:
        b, c = q0, q0 + 1
        base_q0 = q0 + 2
        pi_mask = sv.zero_block_mask(range(base_q0, base_q0 + self.base.n_ancilla))
        idx = np.arange(2 ** sv.n_qubits)
        b_bit = (idx >> (sv.n_qubits - 1 - b)) & 1
        c_bit = (idx >> (sv.n_qubits - 1 - c)) & 1
        ops = self._ops(q0)
        if adjoint:
            ops = ops[::-1]
        for kind, payload in ops:
            if kind == "h":
                sv.apply_h(payload)
            elif kind == "base":
                self.base.apply(sv, base_q0, adjoint=payload ^ adjoint)
            elif kind == "base_ctrl":
                self.base.apply_controlled(sv, c, base_q0, adjoint=payload ^ adjoint)
            elif kind == "pirot":
                ang_s, ang_l = payload
                if adjoint:
                    ang_s, ang_l = -ang_s, -ang_l
                sv.flip_conditioned_on_mask(b, pi_mask)
                angles = np.where(c_bit == 0, ang_s, ang_l)
                sv.amps *= np.exp(-1j * angles * np.where(b_bit == 0, 1.0, -1.0))
                sv.flip_conditioned_on_mask(b, pi_mask)

    def apply_controlled(self, sv, control, q0, adjoint=False):
        raise NotImplementedError("controlled transformation circuits are not needed")

    def extracted_block(self) -> np.ndarray:
        """Realized block, computed by running the circuit on basis states."""
        dim_s = 2 ** self.n_system
        dim = 2 ** self.n_qubits
        block = np.empty((dim_s, dim_s), dtype=complex)
        for col in range(dim_s):
            amps = np.zeros(dim, dtype=complex)
            amps[col] = 1.0
            sv = StateVector(self.n_qubits, amps)
            self.apply(sv, 0)
            block[:, col] = sv.amps[:dim_s]
        return block


def evt_circuit(be: MatrixBlockEncoding, target: ChebyshevSeries,
                degree_cap: int = 60) -> EvtCircuit:
    """Build the transformation circuit for a polynomial with |P| <= 1/2.

    The polynomial is split into its parity parts (each doubled, staying
    within the unit bound), one phase sequence is solved per part, and the
    parts share all but the final base query.
    """
    coeffs = np.asarray(target.coeffs, dtype=float)
    d = len(coeffs) - 1
    while d > 0 and coeffs[d] == 0.0:
        d -= 1
    coeffs = coeffs[: d + 1]
    sup = target.sup_bound
    if sup is not None and sup > 0.5 + 1e-9:
        raise ValueError("transformation circuits require |P| <= 1/2")
    long_par = "even" if d % 2 == 0 else "odd"
    c_long = np.zeros(d + 1)
    c_short = np.zeros(max(d, 1))
    if long_par == "even":
        c_long[0::2] = 2.0 * coeffs[0::2]
        c_short[1::2] = 2.0 * coeffs[1::2]
    else:
        c_long[1::2] = 2.0 * coeffs[1::2]
        c_short[0::2] = 2.0 * coeffs[0::2]
    short_par = "odd" if long_par == "even" else "even"
    seq_long = qsp_phases(ChebyshevSeries(c_long, parity=long_par), degree=d)
    if d == 1:
        seq_short = PhaseSequence(phases=np.zeros(0),
                                  target_poly=ChebyshevSeries(c_short, parity=short_par),
                                  residual=0.0)
    else:
        seq_short = qsp_phases(ChebyshevSeries(c_short, parity=short_par), degree=d - 1)
    if d > degree_cap and max(seq_long.residual, seq_short.residual) > 1e-6:
        from .qsp import PhaseSolverError

        raise PhaseSolverError(
            f"phase synthesis at degree {d} exceeded the cap with residual "
            f"{max(seq_long.residual, seq_short.residual):.2e}",
            seq_long.phases, max(seq_long.residual, seq_short.residual),
        )
    return EvtCircuit(be, target, seq_long, seq_short)
