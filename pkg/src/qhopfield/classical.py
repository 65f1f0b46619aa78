"""Classical Hopfield baseline: Glauber Monte Carlo and an exact master equation.

The heat-bath update sets spin i to +1 with probability
``p = exp(beta dE_i) / (2 cosh(beta dE_i))`` where ``dE_i = sum_{j!=i} w_ij s_j``,
independent of the current value.  This equals the textbook logistic form
``1/(1 + exp(-2 beta dE_i))`` and makes the classical chain exactly the
diagonal restriction of the quantum model: the continuous-time generator
built here uses the same squared thermal amplitudes as the jump operators.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.special import expit

from .errors import UsageError
from .model import thermal_amplitudes
from .observables import overlap_diagonal
from .operators import spin_configurations
from .series import ObservableSeries

CLASSICAL_MASTER_CAP = 12  # 2**N columns; memory guard


def _check_spins(s) -> np.ndarray:
    s = np.asarray(s)
    if s.ndim != 1 or not np.all(np.abs(s) == 1):
        raise UsageError("spin configuration must be a 1-d vector of +-1")
    return s.astype(np.int8)


def glauber_sweep(
    s: np.ndarray,
    weights: np.ndarray,
    beta: float,
    rng: np.random.Generator,
    order: str = "sequential",
) -> np.ndarray:
    """One Monte Carlo sweep: N single-site heat-bath updates.

    Updates run in ascending site order by default (``order="random"``
    draws a fresh site permutation first).  Exactly N uniforms are
    consumed per sweep, in site-visit order, so runs are reproducible per
    generator state.  Returns a new configuration.
    """
    s = _check_spins(s).astype(np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    n = s.shape[0]
    if order == "sequential":
        sites = range(n)
    elif order == "random":
        sites = rng.permutation(n)
    else:
        raise UsageError(f"order must be 'sequential' or 'random', got {order!r}")
    u = rng.random(n)
    for k, i in enumerate(sites):
        field = weights[i] @ s  # w_ii = 0 excludes the self term
        p_up = expit(2.0 * beta * field)
        s[i] = 1.0 if u[k] < p_up else -1.0
    return s.astype(np.int8)


def run_mcs(
    s0: np.ndarray,
    weights: np.ndarray,
    beta: float,
    n_mcs: int,
    seed: int,
    pattern: np.ndarray,
    order: str = "sequential",
) -> ObservableSeries:
    """Run ``n_mcs`` Glauber sweeps recording the pattern overlap after each.

    The series starts with the initial configuration at mcs=0 and its time
    column is labeled ``mcs``.
    """
    if n_mcs < 1:
        raise UsageError(f"n_mcs must be >= 1, got {n_mcs}")
    s = _check_spins(s0)
    pattern = np.asarray(pattern, dtype=np.float64)
    n = s.shape[0]
    rng = np.random.default_rng(seed)
    overlaps = np.empty(n_mcs + 1, dtype=np.float64)
    overlaps[0] = float(pattern @ s) / n
    for k in range(1, n_mcs + 1):
        s = glauber_sweep(s, weights, beta, rng, order=order)
        overlaps[k] = float(pattern @ s) / n
    return ObservableSeries(
        t=np.arange(n_mcs + 1, dtype=np.float64),
        values={"m_z": overlaps},
        time_label="mcs",
    )


def classical_master_matrix(weights: np.ndarray, beta: float) -> sp.csr_matrix:
    """Continuous-time generator of the single-spin-flip chain on 2**N configs.

    The rate from configuration s to the configuration with spin i flipped
    equals the squared thermal amplitude of the matching quantum jump
    channel, so at zero transverse field the diagonal of the quantum
    evolution obeys exactly this equation.  Columns sum to zero.
    """
    weights = np.asarray(weights, dtype=np.float64)
    n = weights.shape[0]
    if n > CLASSICAL_MASTER_CAP:
        raise UsageError(
            f"N={n} exceeds the classical master-equation cap of {CLASSICAL_MASTER_CAP}"
        )
    dim = 1 << n
    s = spin_configurations(n).astype(np.float64)  # (dim, N)
    fields = s @ weights.T
    g_plus, g_minus = thermal_amplitudes(fields, beta)
    # Flip toward +1 uses the raising rate, toward -1 the lowering rate.
    rates = np.where(s == 1.0, g_minus**2, g_plus**2)  # (dim, N): leave-rate per site

    b = np.arange(dim, dtype=np.int64)
    rows = np.empty((n, dim), dtype=np.int64)
    for i in range(n):
        rows[i] = b ^ (1 << (n - 1 - i))
    cols = np.broadcast_to(b, (n, dim))
    off = sp.coo_matrix(
        (rates.T.ravel(), (rows.ravel(), cols.ravel())), shape=(dim, dim)
    )
    generator = off - sp.diags(np.asarray(off.sum(axis=0)).ravel())
    return generator.tocsr()
