"""Pauli algebra on N qubits: embeddings, expectations, and density-matrix
vectorization.

Conventions fixed here and used by every other module:

- Computational basis ``|q0 q1 ... q_{N-1}>`` with qubit 0 as the *most
  significant* bit of the basis index.  Bit value 0 means spin up (+1
  eigenvalue of sigma^z), bit value 1 means spin down (-1).
- Ladder operators carry the conventional 1/2,
  ``sigma^(+-) = (sigma^x +- i sigma^y) / 2``, so ``sigma^+ |down> = |up>``
  with unit matrix element.  (Some texts write the same operators without
  the 1/2; all rates in this package assume the 1/2 form.)
- Vectorization is column-stacking: ``vec(rho)[i + dim*j] = rho[i, j]``,
  i.e. ``rho.flatten(order="F")``.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .errors import UsageError

#: Operators whose fill fraction exceeds this are stored dense.
DENSE_FILL_THRESHOLD = 0.25

#: Entrywise tolerance for treating an operator as Hermitian.
HERMITIAN_TOL = 1e-12

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
    "plus": np.array([[0, 1], [0, 0]], dtype=complex),
    "minus": np.array([[0, 0], [1, 0]], dtype=complex),
    "i": np.eye(2, dtype=complex),
}


def pauli(kind: str) -> np.ndarray:
    """Return a single-qubit Pauli or ladder matrix as a dense 2x2 array.

    ``kind`` is one of ``x, y, z, plus, minus, i``; ``plus``/``minus`` are
    ``(sigma^x +- i sigma^y)/2``.
    """
    try:
        return _PAULI[kind].copy()
    except KeyError:
        raise UsageError(
            f"unknown Pauli kind {kind!r}; expected one of {sorted(_PAULI)}"
        ) from None


class QuantumOperator:
    """A complex linear operator on the 2**N-dimensional N-qubit space.

    Thin wrapper around either a ``scipy.sparse.csr_matrix`` (the default)
    or a dense ndarray.  Construction densifies automatically when the fill
    fraction exceeds :data:`DENSE_FILL_THRESHOLD`.  Arithmetic delegates to
    the underlying matrices and re-wraps the result.
    """

    __slots__ = ("matrix", "N", "_hermitian")

    def __init__(self, matrix, n_qubits: int, auto_format: bool = True):
        dim = 1 << n_qubits
        if matrix.shape != (dim, dim):
            raise UsageError(
                f"operator shape {matrix.shape} does not match N={n_qubits} "
                f"(expected {(dim, dim)})"
            )
        if sp.issparse(matrix):
            matrix = matrix.tocsr()
            matrix.eliminate_zeros()
            if auto_format and matrix.nnz > DENSE_FILL_THRESHOLD * dim * dim:
                matrix = np.asarray(matrix.todense(), dtype=complex)
        else:
            matrix = np.asarray(matrix, dtype=complex)
        self.matrix = matrix
        self.N = n_qubits
        self._hermitian = None

    @property
    def dim(self) -> int:
        return 1 << self.N

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.matrix)

    @property
    def nnz(self) -> int:
        if self.is_sparse:
            return self.matrix.nnz
        return int(np.count_nonzero(self.matrix))

    def toarray(self) -> np.ndarray:
        """Dense ndarray copy of the operator."""
        if self.is_sparse:
            return self.matrix.toarray()
        return self.matrix.copy()

    def tocsr(self) -> sp.csr_matrix:
        """CSR copy of the operator."""
        if self.is_sparse:
            return self.matrix.copy()
        return sp.csr_matrix(self.matrix)

    def dagger(self) -> "QuantumOperator":
        """Hermitian adjoint."""
        if self.is_sparse:
            return QuantumOperator(self.matrix.conjugate().T.tocsr(), self.N)
        return QuantumOperator(self.matrix.conj().T, self.N)

    def diagonal(self) -> np.ndarray:
        return self.matrix.diagonal()

    @property
    def is_hermitian(self) -> bool:
        if self._hermitian is None:
            delta = self.matrix - (
                self.matrix.conjugate().T if self.is_sparse else self.matrix.conj().T
            )
            if sp.issparse(delta):
                err = np.abs(delta.data).max() if delta.nnz else 0.0
            else:
                err = np.abs(delta).max() if delta.size else 0.0
            self._hermitian = bool(err <= HERMITIAN_TOL)
        return self._hermitian

    def _coerce(self, other):
        if isinstance(other, QuantumOperator):
            if other.N != self.N:
                raise UsageError(
                    f"operator qubit counts differ: {self.N} vs {other.N}"
                )
            return other.matrix
        return other

    def __matmul__(self, other):
        mat = self._coerce(other)
        if isinstance(other, QuantumOperator):
            return QuantumOperator(self.matrix @ mat, self.N)
        return self.matrix @ mat  # operator acting on a state / raw array

    def __add__(self, other):
        return QuantumOperator(self.matrix + self._coerce(other), self.N)

    def __sub__(self, other):
        return QuantumOperator(self.matrix - self._coerce(other), self.N)

    def __mul__(self, scalar):
        return QuantumOperator(self.matrix * scalar, self.N)

    __rmul__ = __mul__

    def __neg__(self):
        return QuantumOperator(-self.matrix, self.N)

    def __repr__(self):
        kind = "sparse" if self.is_sparse else "dense"
        return f"QuantumOperator(N={self.N}, dim={self.dim}, {kind}, nnz={self.nnz})"


def identity(n_qubits: int) -> QuantumOperator:
    """Identity operator on N qubits (sparse)."""
    return QuantumOperator(sp.identity(1 << n_qubits, dtype=complex, format="csr"), n_qubits)


def embed(op: np.ndarray, site: int, n_qubits: int) -> QuantumOperator:
    """Embed a single-qubit operator at ``site`` into the N-qubit space.

    Returns ``I (x) ... (x) op (x) ... (x) I`` with ``op`` acting on the
    given site; qubit 0 is the leftmost (most significant) tensor factor.
    """
    op = np.asarray(op, dtype=complex)
    if op.shape != (2, 2):
        raise UsageError(f"embed expects a 2x2 matrix, got shape {op.shape}")
    if not 0 <= site < n_qubits:
        raise UsageError(f"site {site} out of range for N={n_qubits}")
    left = sp.identity(1 << site, dtype=complex, format="csr")
    right = sp.identity(1 << (n_qubits - site - 1), dtype=complex, format="csr")
    mat = sp.kron(sp.kron(left, sp.csr_matrix(op)), right, format="csr")
    return QuantumOperator(mat, n_qubits, auto_format=False)


def _as_matrix(op):
    return op.matrix if isinstance(op, QuantumOperator) else op


def expectation(op, state):
    """Expectation value ``<psi|A|psi>`` or ``Tr(A rho)``.

    ``state`` is a length-dim amplitude vector (pure state) or a dim x dim
    density matrix.  The real part is returned when ``op`` is Hermitian
    (its imaginary part is then bounded by solver roundoff); the full
    complex value is returned otherwise.
    """
    mat = _as_matrix(op)
    state = np.asarray(state)
    dim = mat.shape[0]
    if state.ndim == 1:
        if state.shape[0] != dim:
            raise UsageError(
                f"state dimension {state.shape[0]} does not match operator dim {dim}"
            )
        value = np.vdot(state, mat @ state)
    elif state.ndim == 2:
        if state.shape != (dim, dim):
            raise UsageError(
                f"state shape {state.shape} does not match operator dim {dim}"
            )
        if sp.issparse(mat):
            # Tr(A rho) = sum_ij A_ij rho_ji
            value = complex(mat.multiply(state.T).sum())
        else:
            value = complex(np.einsum("ij,ji->", mat, state))
    else:
        raise UsageError(f"state must be a vector or matrix, got ndim={state.ndim}")

    hermitian = (
        op.is_hermitian
        if isinstance(op, QuantumOperator)
        else _matrix_is_hermitian(mat)
    )
    if hermitian:
        return float(value.real)
    return value


def _matrix_is_hermitian(mat) -> bool:
    delta = mat - (mat.conjugate().T if sp.issparse(mat) else np.conj(mat).T)
    if sp.issparse(delta):
        return np.abs(delta.data).max() <= HERMITIAN_TOL if delta.nnz else True
    return np.abs(delta).max() <= HERMITIAN_TOL if delta.size else True


def vectorize(rho: np.ndarray) -> np.ndarray:
    """Column-stack a density matrix into a length dim**2 vector."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise UsageError(f"vectorize expects a square matrix, got shape {rho.shape}")
    return rho.flatten(order="F")


def devectorize(vec: np.ndarray) -> np.ndarray:
    """Inverse of :func:`vectorize`; the length must be (2**N)**2."""
    vec = np.asarray(vec, dtype=complex)
    if vec.ndim != 1:
        raise UsageError("devectorize expects a 1-d vector")
    dim = int(round(np.sqrt(vec.shape[0])))
    if dim * dim != vec.shape[0] or dim & (dim - 1) != 0 or dim == 0:
        raise UsageError(
            f"vector length {vec.shape[0]} is not the square of a power of 2"
        )
    return vec.reshape((dim, dim), order="F")


# --- basis bookkeeping -----------------------------------------------------

def spin_configurations(n_qubits: int) -> np.ndarray:
    """(2**N, N) array of spin values (+-1) for every basis index.

    Row b holds the sigma^z eigenvalues of ``|b>``: column i is +1 when bit
    i of b (counted from the most significant end) is 0, else -1.
    """
    dim = 1 << n_qubits
    b = np.arange(dim, dtype=np.int64)
    bits = (b[:, None] >> (n_qubits - 1 - np.arange(n_qubits))) & 1
    return (1 - 2 * bits).astype(np.int8)


def flip_index(n_qubits: int, site: int) -> np.ndarray:
    """Basis permutation induced by flipping the spin at ``site``."""
    if not 0 <= site < n_qubits:
        raise UsageError(f"site {site} out of range for N={n_qubits}")
    mask = 1 << (n_qubits - 1 - site)
    return np.arange(1 << n_qubits, dtype=np.intp) ^ mask


def basis_index(spins) -> int:
    """Basis index of the product sigma^z eigenstate with the given spins."""
    spins = np.asarray(spins)
    if not np.all(np.abs(spins) == 1):
        raise UsageError("spins must be +-1")
    bits = (1 - spins) // 2
    index = 0
    for bit in bits:
        index = (index << 1) | int(bit)
    return index


def basis_state(index: int, n_qubits: int) -> np.ndarray:
    """Computational basis state |index> as an amplitude vector."""
    dim = 1 << n_qubits
    if not 0 <= index < dim:
        raise UsageError(f"basis index {index} out of range for N={n_qubits}")
    psi = np.zeros(dim, dtype=complex)
    psi[index] = 1.0
    return psi
