"""Fixed-point amplitude amplification as an instrumented circuit.

Wraps a unitary U with a planted overlap alpha = ||Pi U |psi0>|| >= delta and
drives the output onto the goal state with a sign-polynomial phase sequence:
d alternating applications of U and its adjoint, interleaved with projector
rotations implemented through controlled-NOT sandwiches on one ancilla qubit
(which stays in |0> throughout).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..polyapprox import SignPolySpec, sign_poly
from .qsp import PhaseSequence, qsp_phases
from .statevector import StateVector

__all__ = ["FpaaCircuit", "OverlapError", "fpaa"]


class OverlapError(RuntimeError):
    """The planted overlap fell below the declared amplification bound."""


def _rank1_flip(sv: StateVector, psi: np.ndarray) -> None:
    """CPiNOT with Pi = |psi><psi| on the sub-register below the ancilla."""
    dim = len(psi)
    v = sv.amps.reshape(2, dim)
    c0 = np.vdot(psi, v[0])
    c1 = np.vdot(psi, v[1])
    v[0] += (c1 - c0) * psi
    v[1] += (c0 - c1) * psi
    sv.amps = v.reshape(-1)


def _mask_flip(sv: StateVector, mask_sub: np.ndarray) -> None:
    """CPiNOT with a diagonal projector on the sub-register below the ancilla."""
    full_mask = np.tile(mask_sub, 2)
    sv.flip_conditioned_on_mask(0, full_mask)


def _ancilla_rz(sv: StateVector, phi: float) -> None:
    half = len(sv.amps) // 2
    sv.amps[:half] *= np.exp(-1j * phi)
    sv.amps[half:] *= np.exp(1j * phi)


@dataclass
class FpaaCircuit:
    """Amplification circuit for one (U, psi0, goal projector) instance.

    apply_u acts on the sub-register (qubits 1..) of a state whose qubit 0 is
    the amplification ancilla; goal_mask selects the goal subspace on that
    sub-register and psi0 is the initial state there.
    """

    apply_u: callable
    psi0: np.ndarray
    goal_mask: np.ndarray
    spec: SignPolySpec
    phase_seq: PhaseSequence

    def run(self, sv: StateVector) -> None:
        """Apply the amplification sequence in place."""
        phases = self.phase_seq.phases
        d = len(phases)
        for i in range(1, d + 1):
            self.apply_u(sv, adjoint=(i % 2 == 0))
            j = d - i + 1
            phi = phases[j - 1]
            _mask_flip(sv, self.goal_mask) if j % 2 else _rank1_flip(sv, self.psi0)
            _ancilla_rz(sv, phi)
            _mask_flip(sv, self.goal_mask) if j % 2 else _rank1_flip(sv, self.psi0)


def fpaa(apply_u, psi0: np.ndarray, goal_mask: np.ndarray,
         delta: float, eps: float,
         measured_overlap: float | None = None) -> FpaaCircuit:
    """Build the amplification circuit for an overlap bound delta and error eps.

    When the actual overlap is measurable (it is, in simulation) it is checked
    against delta up front; a violation means the contract of the construction
    is broken and is reported rather than silently amplified.
    """
    if measured_overlap is not None and measured_overlap < delta * (1 - 1e-9):
        raise OverlapError(
            f"overlap {measured_overlap:.6g} below the declared bound {delta:.6g}"
        )
    spec = sign_poly(delta, eps)
    seq = qsp_phases(spec.series)
    return FpaaCircuit(apply_u=apply_u, psi0=psi0, goal_mask=goal_mask,
                       spec=spec, phase_seq=seq)
