"""Thermal state preparation with generalized statistical ensembles.

The package splits into four layers: certified polynomial approximations
(polyapprox), ensemble statistical mechanics on explicit spectra (ensembles),
the exact query-cost model with ensemble optimization (costmodel), and a
dense statevector simulator that runs the full preparation pipeline and
verifies it against exact references (qsvtsim).  The cli module exposes the
scans, curves and simulation runs as commands.
"""

__version__ = "0.1.0"
