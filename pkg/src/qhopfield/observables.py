"""Overlap observables, overlap histograms, and oscillation envelopes.

The overlap with a stored pattern xi along axis a in {x, y, z} is the
Hermitian operator ``(1/N) sum_i xi_i sigma_i^a`` with eigenvalues in
[-1, 1]; for the z axis it is diagonal with the N+1 attainable values
``-1, -1+2/N, ..., +1``.  The absolute-value operator is
``|A| = sqrt(A^dag A)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import NumericalError, UsageError
from .operators import QuantumOperator, embed, pauli, spin_configurations

#: x/y absolute-overlap operators need a dense eigendecomposition; refuse
#: above this many qubits.
ABS_OVERLAP_DENSE_CAP = 6


def _check_pattern(pattern) -> np.ndarray:
    pattern = np.asarray(pattern)
    if pattern.ndim != 1 or not np.all(np.abs(pattern) == 1):
        raise UsageError("pattern must be a 1-d vector of +-1 entries")
    return pattern


def overlap_diagonal(pattern) -> np.ndarray:
    """Diagonal of the z-overlap operator: entry b is (1/N) sum_i xi_i s_i(b)."""
    pattern = _check_pattern(pattern)
    n = pattern.shape[0]
    s = spin_configurations(n).astype(np.float64)
    return s @ (pattern.astype(np.float64) / n)


def overlap_operator(pattern, axis: str = "z") -> QuantumOperator:
    """Overlap operator ``(1/N) sum_i xi_i sigma_i^axis`` (Hermitian)."""
    pattern = _check_pattern(pattern)
    n = pattern.shape[0]
    if axis == "z":
        diag = overlap_diagonal(pattern).astype(complex)
        return QuantumOperator(sp.diags(diag, format="csr"), n, auto_format=False)
    if axis not in ("x", "y"):
        raise UsageError(f"axis must be one of x, y, z, got {axis!r}")
    dim = 1 << n
    total = sp.csr_matrix((dim, dim), dtype=complex)
    base = pauli(axis)
    for i in range(n):
        total = total + (pattern[i] / n) * embed(base, i, n).matrix
    return QuantumOperator(total, n, auto_format=False)


def abs_overlap_operator(pattern, axis: str = "z") -> QuantumOperator:
    """Absolute-value overlap operator ``sqrt(A^dag A)`` for A = overlap operator.

    For the z axis this is the entrywise absolute value of the diagonal.
    For x and y it is computed from a dense eigendecomposition of the
    Hermitian overlap operator and is limited to
    :data:`ABS_OVERLAP_DENSE_CAP` qubits.
    """
    pattern = _check_pattern(pattern)
    n = pattern.shape[0]
    if axis == "z":
        diag = np.abs(overlap_diagonal(pattern)).astype(complex)
        return QuantumOperator(sp.diags(diag, format="csr"), n, auto_format=False)
    if axis not in ("x", "y"):
        raise UsageError(f"axis must be one of x, y, z, got {axis!r}")
    if n > ABS_OVERLAP_DENSE_CAP:
        raise UsageError(
            f"absolute {axis}-overlap needs a dense eigendecomposition; "
            f"N={n} exceeds the cap of {ABS_OVERLAP_DENSE_CAP}"
        )
    a = overlap_operator(pattern, axis).toarray()
    vals, vecs = np.linalg.eigh(a)
    mat = (vecs * np.abs(vals)) @ vecs.conj().T
    return QuantumOperator(mat, n)


def histogram(samples, n_qubits: int):
    """Normalized histogram of overlap samples on the attainable-value grid.

    Bins are centered on the N+1 z-overlap values ``-1, -1+2/N, ..., +1``
    with edges at the half-spacing midpoints.  Returns ``(centers, probs)``
    with probs summing to 1.
    """
    samples = np.asarray(samples, dtype=np.float64)
    if n_qubits < 1:
        raise UsageError("n_qubits must be >= 1")
    if samples.size == 0:
        raise UsageError("histogram needs at least one sample")
    span = 1.0 / n_qubits
    if samples.min() < -1 - 2 * span or samples.max() > 1 + 2 * span:
        raise UsageError("samples fall outside the overlap range [-1, 1]")
    centers = -1.0 + 2.0 * np.arange(n_qubits + 1) / n_qubits
    edges = np.concatenate([centers - span, [centers[-1] + span]])
    counts, _ = np.histogram(samples, bins=edges)
    return centers, counts / counts.sum()


@dataclass
class EnvelopePoints:
    """One interpolated oscillation maximum per cycle: times and peak values."""

    t: np.ndarray
    peaks: np.ndarray

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=np.float64)
        self.peaks = np.asarray(self.peaks, dtype=np.float64)
        if self.t.shape != self.peaks.shape:
            raise UsageError("envelope times and peaks must have equal length")
        if self.t.size > 1 and not np.all(np.diff(self.t) > 0):
            raise UsageError("envelope times must be strictly increasing")

    def __len__(self) -> int:
        return self.t.size


def peak_envelope(t, y, min_samples_per_cycle: int = 20) -> EnvelopePoints:
    """Extract one oscillation maximum per cycle from a sampled series.

    Cycles are delimited by consecutive upward zero crossings of the
    mean-subtracted series; within each cycle the discrete maximum is
    refined by 3-point parabolic interpolation.  Raises
    :class:`UsageError` when the series is sampled more coarsely than
    ``min_samples_per_cycle`` points per cycle (judged from the median
    crossing spacing) and :class:`NumericalError` when fewer than 3 cycles
    are found.
    """
    t = np.asarray(t, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if t.shape != y.shape or t.ndim != 1:
        raise UsageError("t and y must be 1-d arrays of equal length")
    centered = y - y.mean()
    sign = np.sign(centered)
    sign[sign == 0] = 1.0
    upward = np.nonzero((sign[:-1] < 0) & (sign[1:] > 0))[0] + 1

    if upward.size >= 2:
        spacing = np.diff(upward)
        if np.median(spacing) < min_samples_per_cycle:
            raise UsageError(
                f"series is undersampled: median of {np.median(spacing):.0f} samples "
                f"per cycle, need >= {min_samples_per_cycle}"
            )
    if upward.size < 4:  # 3 full cycles need 4 upward crossings
        raise NumericalError(
            f"found {max(upward.size - 1, 0)} complete oscillation cycles, need >= 3"
        )

    times, peaks = [], []
    for lo, hi in zip(upward[:-1], upward[1:]):
        j = lo + int(np.argmax(y[lo:hi]))
        if j == 0 or j == y.size - 1:
            continue
        if not (y[j] > y[j - 1] and y[j] > y[j + 1]):
            continue  # not a strict local maximum of the sampled series
        denom = y[j - 1] - 2.0 * y[j] + y[j + 1]
        if denom == 0.0:
            times.append(t[j])
            peaks.append(y[j])
            continue
        delta = 0.5 * (y[j - 1] - y[j + 1]) / denom
        dt_local = t[j + 1] - t[j] if delta > 0 else t[j] - t[j - 1]
        times.append(t[j] + delta * dt_local)
        peaks.append(y[j] - 0.25 * (y[j - 1] - y[j + 1]) * delta)
    if len(times) < 3:
        raise NumericalError(
            f"only {len(times)} usable oscillation maxima found, need >= 3"
        )
    return EnvelopePoints(t=np.asarray(times), peaks=np.asarray(peaks))
