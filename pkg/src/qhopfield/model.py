"""Dissipative quantum Hopfield model assembly.

Builds the ingredients of the open-system dynamics as concrete operators:
stored +-1 patterns, the Hebbian coupling matrix, the diagonal local-field
operators, the thermal raising/lowering jump operators, and the transverse
field Hamiltonian ``H = Omega * sum_i sigma_i^x``.

Units are natural: hbar = 1 and temperature is dimensionless with the
classical critical temperature at 1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import UsageError
from .operators import QuantumOperator, basis_index, basis_state, embed, pauli, spin_configurations

#: Smallest supported temperature.  Exactly T = 0 is rejected because the
#: jump amplitudes are not all well defined there; arbitrarily small positive
#: temperatures are handled in a numerically stable form.
T_FLOOR = 1e-4


@dataclass(frozen=True, eq=False)
class PatternSet:
    """P stored +-1 patterns of length N plus the seed that generated them."""

    xi: np.ndarray  # (P, N) int8 with entries in {-1, +1}
    seed: int
    balanced_first: bool = False

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=np.int8)
        if xi.ndim != 2:
            raise UsageError(f"xi must be a (P, N) matrix, got ndim={xi.ndim}")
        if not np.all(np.abs(xi) == 1):
            raise UsageError("pattern entries must be +-1")
        object.__setattr__(self, "xi", xi)
        if self.balanced_first:
            n = xi.shape[1]
            if n % 2 != 0:
                raise UsageError("balanced_first requires an even number of qubits")
            if int(np.sum(xi[0] == 1)) != n // 2:
                raise UsageError("balanced_first pattern must have N/2 entries +1")

    @property
    def N(self) -> int:
        return self.xi.shape[1]

    @property
    def P(self) -> int:
        return self.xi.shape[0]

    def __eq__(self, other):
        if not isinstance(other, PatternSet):
            return NotImplemented
        return (
            self.seed == other.seed
            and self.balanced_first == other.balanced_first
            and np.array_equal(self.xi, other.xi)
        )

    def to_json(self) -> str:
        return json.dumps(
            {
                "N": self.N,
                "P": self.P,
                "seed": self.seed,
                "balanced_first": self.balanced_first,
                "xi": self.xi.tolist(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "PatternSet":
        doc = json.loads(text)
        ps = cls(
            xi=np.asarray(doc["xi"], dtype=np.int8),
            seed=int(doc["seed"]),
            balanced_first=bool(doc["balanced_first"]),
        )
        if ps.N != int(doc["N"]) or ps.P != int(doc["P"]):
            raise UsageError("pattern document N/P fields disagree with xi shape")
        return ps


def generate_patterns(
    n_qubits: int, n_patterns: int, seed: int, balanced_first: bool = False
) -> PatternSet:
    """Draw P i.i.d. uniform +-1 patterns of length N, deterministically per seed.

    With ``balanced_first`` (N even) the first pattern is instead a uniform
    random permutation of N/2 entries +1 and N/2 entries -1; the remaining
    patterns stay unbiased.
    """
    if n_qubits < 1 or n_patterns < 1:
        raise UsageError("need n_qubits >= 1 and n_patterns >= 1")
    if balanced_first and n_qubits % 2 != 0:
        raise UsageError("balanced_first requires an even number of qubits")
    rng = np.random.default_rng(seed)
    xi = (rng.integers(0, 2, size=(n_patterns, n_qubits)) * 2 - 1).astype(np.int8)
    if balanced_first:
        half = np.concatenate(
            [np.ones(n_qubits // 2, dtype=np.int8), -np.ones(n_qubits // 2, dtype=np.int8)]
        )
        xi[0] = rng.permutation(half)
    return PatternSet(xi=xi, seed=seed, balanced_first=balanced_first)


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """Full model: stored patterns, transverse-field strength, temperature."""

    patterns: PatternSet
    Omega: float
    T: float
    t_floor: float = field(default=T_FLOOR, repr=False)

    def __post_init__(self):
        if self.Omega < 0:
            raise UsageError(f"Omega must be >= 0, got {self.Omega}")
        if not np.isfinite(self.T) or self.T < self.t_floor:
            raise UsageError(
                f"T must be finite and >= {self.t_floor} (T=0 is not supported), got {self.T}"
            )

    @property
    def beta(self) -> float:
        return 1.0 / self.T

    @property
    def N(self) -> int:
        return self.patterns.N


def hebb_weights(patterns: PatternSet) -> np.ndarray:
    """Hebbian coupling matrix ``w_ij = (1/N) sum_mu xi_i^mu xi_j^mu``, zero diagonal."""
    xi = patterns.xi.astype(np.float64)
    omega = (xi.T @ xi) / patterns.N
    np.fill_diagonal(omega, 0.0)
    return omega


def local_field_diagonals(weights: np.ndarray) -> np.ndarray:
    """(2**N, N) array: column i is the diagonal of the local-field operator at site i.

    Entry [b, i] is ``sum_{j != i} w_ij s_j(b)`` where s(b) are the spins of
    basis state b.
    """
    weights = np.asarray(weights, dtype=np.float64)
    n = weights.shape[0]
    s = spin_configurations(n).astype(np.float64)
    return s @ weights.T  # zero diagonal of w excludes j = i


def local_field_operator(site: int, weights: np.ndarray) -> QuantumOperator:
    """Diagonal operator ``sum_{j != site} w_{site,j} sigma_j^z``."""
    weights = np.asarray(weights, dtype=np.float64)
    n = weights.shape[0]
    if not 0 <= site < n:
        raise UsageError(f"site {site} out of range for N={n}")
    diag = local_field_diagonals(weights)[:, site].astype(complex)
    return QuantumOperator(sp.diags(diag, format="csr"), n, auto_format=False)


def thermal_amplitudes(d, beta: float):
    """Raising/lowering amplitudes for a local field value d at inverse temperature beta.

    Returns ``(g_plus, g_minus)`` with
    ``g_pm(d) = exp(+-beta d / 2) / sqrt(2 cosh(beta d))``, evaluated in the
    overflow-free form ``1 / sqrt(1 + exp(-+2 beta d))`` so that beta of a
    few hundred is safe.  Satisfies ``g_plus**2 + g_minus**2 = 1``.
    """
    if not np.isfinite(beta) or beta <= 0:
        raise UsageError(f"beta must be finite and > 0, got {beta}")
    x = 2.0 * beta * np.asarray(d, dtype=np.float64)
    # 1/sqrt(1+e^{-x}) and 1/sqrt(1+e^{x}), clipping the exponent only where
    # the result already underflows/saturates.
    with np.errstate(over="ignore"):
        g_plus = 1.0 / np.sqrt(1.0 + np.exp(-x))
        g_minus = 1.0 / np.sqrt(1.0 + np.exp(x))
    return g_plus, g_minus


def thermal_rate_diagonals(weights: np.ndarray, beta: float):
    """Diagonals of the Gamma_{i+} and Gamma_{i-} operators for every site.

    Returns two (2**N, N) arrays ``(g_plus, g_minus)``; column i holds the
    diagonal of the corresponding amplitude operator at site i.
    """
    d = local_field_diagonals(weights)
    return thermal_amplitudes(d, beta)


def jump_operators(weights: np.ndarray, beta: float) -> list[QuantumOperator]:
    """Thermal jump operators ``L_{i+-} = Gamma_{i+-} sigma_i^{+-}`` for every site.

    Order is site-major with the raising operator first:
    ``[L_{0+}, L_{0-}, L_{1+}, L_{1-}, ...]``.  Each operator is sparse with
    at most 2**(N-1) nonzeros, and every entry is finite for any beta > 0.
    """
    weights = np.asarray(weights, dtype=np.float64)
    n = weights.shape[0]
    dim = 1 << n
    g_plus, g_minus = thermal_rate_diagonals(weights, beta)
    b = np.arange(dim, dtype=np.intp)
    ops: list[QuantumOperator] = []
    for i in range(n):
        mask = 1 << (n - 1 - i)
        down = b[(b & mask) != 0]  # spin at site i is -1
        up = b[(b & mask) == 0]
        # L_{i+}: |...down...> -> |...up...>, amplitude from the other spins
        # (the local field at site i ignores site i, so either endpoint works).
        plus = sp.csr_matrix(
            (g_plus[down, i], (down ^ mask, down)), shape=(dim, dim), dtype=complex
        )
        minus = sp.csr_matrix(
            (g_minus[up, i], (up ^ mask, up)), shape=(dim, dim), dtype=complex
        )
        ops.append(QuantumOperator(plus, n, auto_format=False))
        ops.append(QuantumOperator(minus, n, auto_format=False))
    return ops


def hamiltonian(Omega: float, n_qubits: int) -> QuantumOperator:
    """Transverse-field Hamiltonian ``Omega * sum_i sigma_i^x``."""
    if Omega < 0:
        raise UsageError(f"Omega must be >= 0, got {Omega}")
    dim = 1 << n_qubits
    total = sp.csr_matrix((dim, dim), dtype=complex)
    sx = pauli("x")
    for i in range(n_qubits):
        total = total + embed(sx, i, n_qubits).matrix
    return QuantumOperator(Omega * total, n_qubits, auto_format=False)


def pattern_state(pattern) -> np.ndarray:
    """Computational basis state whose spins equal the given +-1 pattern."""
    pattern = np.asarray(pattern)
    return basis_state(basis_index(pattern), pattern.shape[0])


def pattern_projector(pattern) -> np.ndarray:
    """Density matrix ``|xi><xi|`` of the pattern basis state."""
    psi = pattern_state(pattern)
    return np.outer(psi, psi.conj())
