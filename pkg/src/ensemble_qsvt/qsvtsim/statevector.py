"""Dense statevector register for desk-scale circuit verification.

Qubit 0 is the most significant bit of the amplitude index.  Operations are
implemented with reshapes and boolean index masks; the register is capped at
16 qubits, far below where such kernels become a bottleneck.
"""

from __future__ import annotations

import numpy as np

MAX_QUBITS = 16

_H = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0)


class StateVector:
    """Complex amplitude vector over 2**n_qubits basis states."""

    __slots__ = ("n_qubits", "amps")

    def __init__(self, n_qubits: int, amps: np.ndarray | None = None):
        if n_qubits < 0 or n_qubits > MAX_QUBITS:
            raise ValueError(f"register must have 0..{MAX_QUBITS} qubits")
        self.n_qubits = n_qubits
        if amps is None:
            self.amps = np.zeros(2 ** n_qubits, dtype=complex)
            self.amps[0] = 1.0
        else:
            amps = np.asarray(amps, dtype=complex)
            if amps.shape != (2 ** n_qubits,):
                raise ValueError("amplitude array has the wrong length")
            self.amps = amps.copy()

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def dot(self, other: "StateVector") -> complex:
        return complex(np.vdot(self.amps, other.amps))

    def fidelity(self, other: "StateVector") -> float:
        """|<self|other>|^2, insensitive to global phase."""
        return abs(self.dot(other)) ** 2

    def _bit_mask(self, qubit: int) -> np.ndarray:
        idx = np.arange(2 ** self.n_qubits)
        return (idx >> (self.n_qubits - 1 - qubit)) & 1 == 1

    # -- gates ---------------------------------------------------------------

    def apply_1q(self, mat: np.ndarray, qubit: int) -> None:
        n = self.n_qubits
        a = self.amps.reshape(2 ** qubit, 2, 2 ** (n - qubit - 1))
        self.amps = np.einsum("ij,ajb->aib", mat, a).reshape(-1)

    def apply_h(self, qubit: int) -> None:
        self.apply_1q(_H, qubit)

    def apply_cnot(self, control: int, target: int) -> None:
        ctrl = self._bit_mask(control)
        tbit = 1 << (self.n_qubits - 1 - target)
        idx = np.arange(2 ** self.n_qubits)
        src = ctrl & ((idx & tbit) == 0)
        a, b = idx[src], idx[src] | tbit
        self.amps[a], self.amps[b] = self.amps[b].copy(), self.amps[a].copy()

    def apply_block(self, mat: np.ndarray, q0: int, n_block: int) -> None:
        """Apply a dense unitary to the contiguous qubits [q0, q0+n_block)."""
        n = self.n_qubits
        dim = 2 ** n_block
        if mat.shape != (dim, dim):
            raise ValueError("block matrix does not match the qubit span")
        a = self.amps.reshape(2 ** q0, dim, 2 ** (n - q0 - n_block))
        self.amps = np.einsum("ij,ajb->aib", mat, a).reshape(-1)

    def apply_block_controlled(self, mat: np.ndarray, control: int,
                               q0: int, n_block: int) -> None:
        """Apply a block unitary conditioned on a control qubit above it."""
        if not control < q0:
            raise ValueError("control must precede the block")
        n = self.n_qubits
        dim = 2 ** n_block
        a = self.amps.reshape(2 ** q0, dim, 2 ** (n - q0 - n_block))
        rows = (np.arange(2 ** q0) >> (q0 - 1 - control)) & 1 == 1
        a[rows] = np.einsum("ij,ajb->aib", mat, a[rows])
        self.amps = a.reshape(-1)

    def apply_phase_masked(self, phases: np.ndarray | complex,
                           mask: np.ndarray) -> None:
        self.amps[mask] *= phases

    def flip_conditioned_on_mask(self, target: int, mask: np.ndarray) -> None:
        """X on target restricted to basis states selected by mask.

        The mask must be insensitive to the target bit (a projector on the
        other qubits), which makes the flip an involution on index pairs.
        """
        tbit = 1 << (self.n_qubits - 1 - target)
        idx = np.arange(2 ** self.n_qubits)
        src = mask & ((idx & tbit) == 0)
        a, b = idx[src], idx[src] | tbit
        self.amps[a], self.amps[b] = self.amps[b].copy(), self.amps[a].copy()

    # -- measurement-free reductions ------------------------------------------

    def reduced_density(self, keep: slice) -> np.ndarray:
        """Density matrix of a contiguous qubit range, tracing out the rest."""
        n = self.n_qubits
        q0, q1 = keep.start or 0, keep.stop if keep.stop is not None else n
        a = self.amps.reshape(2 ** q0, 2 ** (q1 - q0), 2 ** (n - q1))
        return np.einsum("aib,ajb->ij", a, a.conj())

    def zero_block_mask(self, qubits: range) -> np.ndarray:
        """Boolean mask of basis states where the given qubits are all |0>."""
        idx = np.arange(2 ** self.n_qubits)
        mask = np.ones(len(idx), dtype=bool)
        for q in qubits:
            mask &= (idx >> (self.n_qubits - 1 - q)) & 1 == 0
        return mask
