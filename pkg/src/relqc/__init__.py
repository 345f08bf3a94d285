"""Simulator for measurement-based computation driven only by singlet/triplet
(J) measurements on pairs of qubits and a supply of mixed single-qubit states.
"""
from . import core, jmeasure
from .core import (
    BlochVector,
    DensityMatrix,
    QubitPair,
    StateVector,
    bloch_from_density,
    density_from_bloch,
    fidelity,
    ket,
    partial_trace,
    tensor,
)
from .jmeasure import JOutcome, j_outcome_probabilities, measure_j, postselect_j

__version__ = "0.1.0"
