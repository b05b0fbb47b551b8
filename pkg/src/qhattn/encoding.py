"""Amplitude encoding of classical feature vectors.

A length-l real vector becomes the amplitudes of a ceil(log2 l)-qubit data
register, L2-normalized and zero-padded up to the next power of two. State
preparation is done by direct amplitude initialization, which is exact and
equivalent in effect to running an encoding circuit on |0...0>.
"""

from __future__ import annotations

import numpy as np

from .errors import EncodingError
from .qcore import StateVector


def _normalized(values) -> np.ndarray:
    v = np.asarray(values, dtype=float).ravel()
    if v.size < 1:
        raise EncodingError("feature vector is empty")
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise EncodingError("all-zero feature vector cannot be normalized")
    return v / norm


def data_qubits(length: int) -> int:
    """Number of data qubits needed for ``length`` features: ceil(log2 l)."""
    return max(0, int(length - 1).bit_length())


def amplitude_encode(values) -> StateVector:
    """Encode a real vector as a normalized data-register state.

    Amplitudes beyond the vector length are exactly zero. Signs are kept:
    negative features produce negative amplitudes.
    """
    v = _normalized(values)
    n = data_qubits(v.size)
    amps = np.zeros(1 << n, dtype=complex)
    amps[: v.size] = v
    return StateVector(n, amps)


def prepare_initial(values) -> StateVector:
    """Full register state: ancilla qubit 0 in |0>, data qubits 1..n encoded.

    The ancilla is the least significant bit, so data amplitude d sits at
    composite index 2*d.
    """
    data = amplitude_encode(values)
    full = np.zeros(2 << data.n_qubits, dtype=complex)
    full[0::2] = data.amps
    return StateVector(data.n_qubits + 1, full)


def prepare_batch(features: np.ndarray) -> np.ndarray:
    """Vectorized prepare_initial for a (batch, l) feature matrix.

    Returns a (batch, 2^(n+1)) complex array. Rows with zero norm raise.
    """
    feats = np.asarray(features, dtype=float)
    if feats.ndim != 2 or feats.shape[1] < 1:
        raise EncodingError(f"expected a (batch, l) matrix, got shape {feats.shape}")
    norms = np.linalg.norm(feats, axis=1)
    if np.any(norms == 0.0):
        raise EncodingError("batch contains an all-zero feature vector")
    n = data_qubits(feats.shape[1])
    out = np.zeros((feats.shape[0], 2 << n), dtype=complex)
    out[:, 0 : 2 * feats.shape[1] : 2] = feats / norms[:, None]
    return out
