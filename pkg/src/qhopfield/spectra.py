"""Vectorized-generator spectral analysis.

Builds the 4**N x 4**N matrix representation of the master-equation
generator in column-stacking convention,

    Lhat = -i (I (x) H - H^T (x) I)
           + sum_k [ conj(L_k) (x) L_k
                     - 1/2 (I (x) L_k^dag L_k + (L_k^dag L_k)^T (x) I) ],

extracts its spectrum (full and dense at small N, a partial largest-real-part
set via implicitly restarted Arnoldi at larger N), classifies the
steady-state eigenvalue and the leading oscillating conjugate pair, and
reports the gap between them.

All eigenvalues lie in the closed left half-plane; there is always at least
one eigenvalue at zero (the steady state) and nonreal eigenvalues come in
conjugate pairs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import SpectralError, UsageError
from .lindblad import LindbladPropagator
from .model import ModelSpec, hamiltonian, hebb_weights, jump_operators
from .operators import devectorize, vectorize

LIOUVILLIAN_CAP = 7  # largest N for which the 4**N matrix is built by default
DENSE_DIM_CAP = 4096  # hard cap for dense eigensolves (4**N)
DENSE_DEFAULT_CAP = 5  # default N cutoff between dense and iterative

STEADY_ABS_TOL = 1e-9  # |Lambda| below this counts as the kernel
REAL_PART_TOL = 1e-10  # max allowed positive real part
CONJ_PAIR_TOL = 1e-8  # conjugate-pair matching tolerance
NONREAL_TOL = 1e-10  # |Im| above this marks an oscillating eigenvalue
RESIDUAL_TOL = 1e-8  # iterative eigenpair residual gate


def build_liouvillian(model: ModelSpec, cap: int = LIOUVILLIAN_CAP) -> sp.csr_matrix:
    """Sparse matrix form of the generator acting on column-stacked states."""
    n = model.N
    if n > cap:
        raise UsageError(f"N={n} exceeds the vectorized-generator cap of {cap}")
    dim = 1 << n
    eye = sp.identity(dim, dtype=complex, format="csr")
    h = hamiltonian(model.Omega, n).matrix
    lio = -1j * (sp.kron(eye, h) - sp.kron(h.T, eye))
    for op in jump_operators(hebb_weights(model.patterns), model.beta):
        lk = op.matrix
        ldl = (lk.conjugate().T @ lk).tocsr()
        lio = lio + sp.kron(lk.conjugate(), lk)
        lio = lio - 0.5 * (sp.kron(eye, ldl) + sp.kron(ldl.T, eye))
    return lio.tocsr()


@dataclass
class SpectrumReport:
    """Eigenvalues sorted by descending real part, with classification.

    ``steady_index`` points at the eigenvalue closest to zero;
    ``osc_pair`` at the leading complex-conjugate pair (largest real part
    among nonreal eigenvalues) when one was found; ``gap`` is the absolute
    real part of that pair and ``osc_freq`` its absolute imaginary part.
    """

    eigenvalues: np.ndarray
    steady_index: int
    osc_pair: tuple[int, int] | None
    gap: float | None
    osc_freq: float | None
    method: str
    N: int
    Omega: float
    T: float
    P: int
    seed: int
    k_requested: int | None = field(default=None)

    def as_dict(self) -> dict:
        return {
            "N": self.N,
            "Omega": self.Omega,
            "T": self.T,
            "P": self.P,
            "seed": self.seed,
            "method": self.method,
            "eigenvalues": [[float(v.real), float(v.imag)] for v in self.eigenvalues],
            "steady_index": self.steady_index,
            "osc_pair": list(self.osc_pair) if self.osc_pair is not None else None,
            "gap": self.gap,
            "osc_freq": self.osc_freq,
        }

    def write_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.as_dict(), indent=1) + "\n")


def _sort_eigenvalues(vals: np.ndarray) -> np.ndarray:
    order = np.lexsort((-np.sign(vals.imag), np.abs(vals.imag), -vals.real))
    return vals[order]


def _trim_unpaired_tail(vals: np.ndarray) -> np.ndarray:
    """Drop trailing nonreal eigenvalues whose conjugate partner was not computed.

    A partial Arnoldi spectrum can cut through a conjugate pair at its
    boundary; only the smallest-real-part tail is ever trimmed.
    """
    keep = np.ones(vals.size, dtype=bool)
    for idx in np.argsort(vals.real):  # from most negative real part up
        v = vals[idx]
        if abs(v.imag) <= NONREAL_TOL:
            break
        partners = np.abs(vals[keep] - np.conj(v))
        if np.sum(partners <= CONJ_PAIR_TOL) == 0:
            keep[idx] = False
        else:
            break
    return vals[keep]


def _classify(vals: np.ndarray, method: str, model: ModelSpec, k=None) -> SpectrumReport:
    vals = _sort_eigenvalues(vals)
    if vals.real.max() > REAL_PART_TOL:
        raise SpectralError(
            f"eigenvalue with positive real part {vals.real.max():.3e} exceeds "
            f"{REAL_PART_TOL:.0e}"
        )
    steady_index = int(np.argmin(np.abs(vals)))
    if abs(vals[steady_index]) > STEADY_ABS_TOL:
        raise SpectralError(
            f"no eigenvalue within {STEADY_ABS_TOL:.0e} of zero; closest is "
            f"{vals[steady_index]:.3e}"
        )
    nonreal = np.abs(vals.imag) > NONREAL_TOL
    for idx in np.nonzero(nonreal)[0]:
        if np.abs(vals - np.conj(vals[idx])).min() > CONJ_PAIR_TOL:
            raise SpectralError(
                f"eigenvalue {vals[idx]:.6e} has no conjugate partner within "
                f"{CONJ_PAIR_TOL:.0e}"
            )
    osc_pair = None
    gap = None
    osc_freq = None
    if np.any(nonreal):
        lead = int(np.nonzero(nonreal)[0][np.argmax(vals.real[nonreal])])
        partner = int(np.argmin(np.abs(vals - np.conj(vals[lead]))))
        osc_pair = (lead, partner)
        gap = float(abs(vals[lead].real))
        osc_freq = float(abs(vals[lead].imag))
    return SpectrumReport(
        eigenvalues=vals,
        steady_index=steady_index,
        osc_pair=osc_pair,
        gap=gap,
        osc_freq=osc_freq,
        method=method,
        N=model.N,
        Omega=model.Omega,
        T=model.T,
        P=model.patterns.P,
        seed=model.patterns.seed,
        k_requested=k,
    )


def _check_residuals(lio, vals, vecs) -> float:
    worst = 0.0
    for j in range(vals.size):
        v = vecs[:, j]
        res = np.linalg.norm(lio @ v - vals[j] * v) / np.linalg.norm(v)
        worst = max(worst, float(res))
    if worst > RESIDUAL_TOL:
        raise SpectralError(
            f"eigenpair residual {worst:.3e} exceeds {RESIDUAL_TOL:.0e}"
        )
    return worst


def _semigroup_arnoldi(lio, k: int, tau: float, dt: float, ncv=None):
    """Arnoldi on the semigroup action exp(Lhat tau) via short RK4 propagation.

    Fallback when direct largest-real-part Arnoldi stalls: the dominant
    eigenvalues mu of the propagated operator map back as
    Lambda = log(mu) / tau, which is unambiguous for |Im Lambda| < pi/tau.
    """
    dim = lio.shape[0]
    n_sub = max(int(round(tau / dt)), 1)
    h = tau / n_sub

    def matvec(v):
        v = v.astype(complex)
        for _ in range(n_sub):
            k1 = lio @ v
            k2 = lio @ (v + 0.5 * h * k1)
            k3 = lio @ (v + 0.5 * h * k2)
            k4 = lio @ (v + h * k3)
            v = v + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        return v

    op = spla.LinearOperator((dim, dim), matvec=matvec, dtype=complex)
    mu, vecs = spla.eigs(op, k=k, which="LM", ncv=ncv)
    vals = np.log(mu) / tau
    return vals, vecs


def spectrum(
    lio: sp.spmatrix,
    model: ModelSpec,
    k: int | None = None,
    method: str = "auto",
    ncv: int | None = None,
    maxiter: int | None = None,
    semigroup_tau: float = 0.1,
) -> SpectrumReport:
    """Spectrum of the vectorized generator, full (dense) or partial (Arnoldi).

    ``method`` is ``dense``, ``iterative``, or ``auto`` (dense up to
    N = 5, iterative above).  The iterative path targets the k eigenvalues
    of largest real part with ARPACK and verifies eigenpair residuals to
    1e-8; if it fails to converge, a documented fallback runs Arnoldi on
    the semigroup action exp(Lhat tau).
    """
    dim = lio.shape[0]
    if method == "auto":
        method = "dense" if dim <= (1 << (2 * DENSE_DEFAULT_CAP)) else "iterative"
    if method == "dense":
        if dim > DENSE_DIM_CAP:
            raise UsageError(
                f"dense spectrum needs dim <= {DENSE_DIM_CAP}, got {dim}"
            )
        vals = scipy.linalg.eigvals(lio.toarray() if sp.issparse(lio) else lio)
        return _classify(vals, "dense", model, k)
    if method != "iterative":
        raise UsageError(f"method must be dense, iterative, or auto, got {method!r}")

    k = 10 if k is None else int(k)
    if not 1 <= k < dim - 1:
        raise UsageError(f"iterative spectrum needs 1 <= k < dim-1, got k={k}")
    try:
        vals, vecs = spla.eigs(
            lio, k=k, which="LR", ncv=ncv, maxiter=maxiter
        )
        _check_residuals(lio, vals, vecs)
    except (spla.ArpackNoConvergence, SpectralError):
        vals, vecs = _semigroup_arnoldi(lio, k, semigroup_tau, dt=0.01, ncv=ncv)
        _check_residuals(lio, vals, vecs)
    return _classify(_trim_unpaired_tail(vals), "iterative", model, k)


def steady_state_from_kernel(
    lio: sp.spmatrix, dense_cap: int = DENSE_DIM_CAP, k: int = 6
) -> np.ndarray:
    """Steady state from the kernel of the vectorized generator.

    The kernel vector is devectorized, Hermitized as (rho + rho^dag)/2, and
    rescaled to unit trace.  A numerically degenerate kernel (more than one
    eigenvalue within 1e-9 of zero) raises :class:`SpectralError` listing
    the offenders, and the result must satisfy
    ``max |Lhat vec(rho)| <= 1e-8``.
    """
    dim = lio.shape[0]
    if dim <= dense_cap:
        vals, vecs = scipy.linalg.eig(lio.toarray() if sp.issparse(lio) else lio)
    else:
        vals, vecs = spla.eigs(lio, k=k, which="LR")
    near_zero = np.nonzero(np.abs(vals) <= STEADY_ABS_TOL)[0]
    if near_zero.size == 0:
        raise SpectralError(
            f"no kernel eigenvalue within {STEADY_ABS_TOL:.0e}; closest is "
            f"{vals[np.argmin(np.abs(vals))]:.3e}"
        )
    if near_zero.size > 1:
        listing = ", ".join(f"{vals[j]:.3e}" for j in near_zero)
        raise SpectralError(
            f"kernel is numerically degenerate ({near_zero.size} eigenvalues "
            f"within {STEADY_ABS_TOL:.0e} of zero): {listing}"
        )
    vec = vecs[:, near_zero[0]]
    rho = devectorize(vec)
    rho = 0.5 * (rho + rho.conj().T)
    trace = np.trace(rho).real
    if abs(trace) < 1e-12:
        raise SpectralError("kernel vector has vanishing trace")
    rho = rho / trace
    residual = np.abs(lio @ vectorize(rho)).max()
    if residual > RESIDUAL_TOL:
        raise SpectralError(
            f"steady-state residual {residual:.3e} exceeds {RESIDUAL_TOL:.0e}"
        )
    return rho


def oscillation_gap(report: SpectrumReport) -> tuple[float, float]:
    """Gap and frequency of the leading oscillating pair.

    Returns ``(|Re Lambda|, |Im Lambda|)`` for the nonreal eigenvalue with
    the largest real part; raises :class:`SpectralError` when the report
    contains no nonreal eigenvalue (compute more of the spectrum).
    """
    if report.osc_pair is None:
        raise SpectralError(
            "no oscillating (nonreal) eigenvalue in the computed spectrum; "
            "increase k or use the dense method"
        )
    return float(report.gap), float(report.osc_freq)


def dense_eigensystem(lio):
    """Biorthogonally normalized eigensystem of a (small) dense generator.

    Returns ``(vals, right, left)`` with ``left[:, i]^H @ right[:, j] =
    delta_ij``; intended for the eigen-expansion propagator at N <= 3.
    """
    mat = lio.toarray() if sp.issparse(lio) else np.asarray(lio)
    vals, left, right = scipy.linalg.eig(mat, left=True, right=True)
    overlaps = np.einsum("ij,ij->j", left.conj(), right)
    if np.abs(overlaps).min() < 1e-12:
        raise SpectralError("defective generator: left/right overlap underflow")
    right = right / overlaps[None, :]
    return vals, right, left


def spectral_propagate(lio, rho0: np.ndarray, times) -> list[np.ndarray]:
    """Propagate by eigen-expansion: rho(t) = sum_i c_i e^{Lambda_i t} r_i.

    The coefficients are overlaps with the biorthogonal left eigenvectors,
    ``c_i = left_i^H vec(rho0)``.  Dense-only; use for cross-checking the
    time-stepping integrator at small N.
    """
    vals, right, left = dense_eigensystem(lio)
    coeff = left.conj().T @ vectorize(rho0)
    out = []
    for t in np.atleast_1d(times):
        vec = right @ (coeff * np.exp(vals * t))
        out.append(devectorize(vec))
    return out
