"""Master-equation integration.

Evolves the density matrix under

    drho/dt = -i[H, rho] + sum_k ( L_k rho L_k^dag - 1/2 {L_k^dag L_k, rho} )

with a fixed-step classical 4th-order Runge-Kutta scheme.  The propagator
exploits the model structure: every jump operator is a thermal amplitude
times a single-site spin flip, so the jump part of the right-hand side is a
per-site elementwise product with a precomputed weight table, and
``sum_k L_k^dag L_k`` is diagonal.  The cost per evaluation is
O(N * 4**N) with small constants and no superoperator is ever formed.

Runge-Kutta preserves linear invariants, so the trace is conserved to
roundoff; trace and Hermiticity are nevertheless checked against the
module tolerances at every sample time and violations abort the run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import IntegrationError, UsageError
from .model import ModelSpec, hamiltonian, hebb_weights, thermal_rate_diagonals
from .operators import QuantumOperator, spin_configurations
from .series import ObservableSeries

TRACE_TOL = 1e-8
HERMITICITY_TOL = 1e-9


@dataclass(frozen=True)
class IntegrationConfig:
    """Fixed-step integration settings (natural time units)."""

    dt: float = 0.01
    t_max: float = 100.0
    record_every: int = 10
    steady_tol: float = 1e-7

    def __post_init__(self):
        if self.dt <= 0:
            raise UsageError(f"dt must be > 0, got {self.dt}")
        if self.t_max < self.dt:
            raise UsageError(f"t_max must be >= dt, got {self.t_max}")
        if self.record_every < 1:
            raise UsageError(f"record_every must be >= 1, got {self.record_every}")
        if self.steady_tol <= 0:
            raise UsageError(f"steady_tol must be > 0, got {self.steady_tol}")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_max / self.dt))


@dataclass
class SteadyStateResult:
    """Outcome of :func:`steady_state_by_integration`."""

    rho: np.ndarray
    converged: bool  # True: residual criterion fired; False: hit t_max
    t_end: float
    rhs_max: float  # max-entry of the right-hand side at t_end


def validate_density_matrix(rho: np.ndarray, n_qubits: int | None = None) -> np.ndarray:
    """Check shape, Hermiticity, and unit trace; returns a complex copy."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise UsageError(f"density matrix must be square, got shape {rho.shape}")
    if n_qubits is not None and rho.shape[0] != (1 << n_qubits):
        raise UsageError(
            f"density matrix dim {rho.shape[0]} does not match N={n_qubits}"
        )
    if np.abs(rho - rho.conj().T).max() > 1e-9:
        raise UsageError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > 1e-8:
        raise UsageError(f"density matrix trace is {np.trace(rho)}, expected 1")
    return rho.copy()


class LindbladPropagator:
    """Precomputed tables and buffers for repeated right-hand-side evaluation."""

    def __init__(self, model: ModelSpec):
        n = model.N
        dim = 1 << n
        self.n_qubits = n
        self.dim = dim
        weights = hebb_weights(model.patterns)
        g_plus, g_minus = thermal_rate_diagonals(weights, model.beta)
        up = spin_configurations(n) == 1  # bit clear <=> spin up

        # Arrival amplitude into each state on a site flip, and total escape rate.
        u = np.where(up, g_plus, g_minus)  # (dim, N)
        escape = np.where(up, g_minus**2, g_plus**2)  # (dim, N)
        self.escape_total = escape.sum(axis=1)  # diag of sum_k L_k^dag L_k

        # Per-site jump weights W_i[a,c] = u_i[a] u_i[c] [bit_i(a) == bit_i(c)],
        # stored in the (2**i, 2, 2**(N-1-i), ...) block layout used for the
        # flip-gather views.
        self._site_shapes = []
        self._site_weights = []
        for i in range(n):
            w = np.outer(u[:, i], u[:, i])
            eq = np.equal.outer(up[:, i], up[:, i])
            w[~eq] = 0.0
            a_dim = 1 << i
            b_dim = 1 << (n - 1 - i)
            shape = (a_dim, 2, b_dim, a_dim, 2, b_dim)
            self._site_shapes.append(shape)
            self._site_weights.append(np.ascontiguousarray(w.reshape(shape)))

        # -(e[a]+e[c])/2, the anticommutator prefactor.
        e = self.escape_total
        self.anticomm = -0.5 * (e[:, None] + e[None, :])

        self.H = hamiltonian(model.Omega, n).tocsr() if model.Omega != 0 else None

        self._scratch = np.empty((dim, dim), dtype=complex)
        self._stage = np.empty((dim, dim), dtype=complex)
        self._stage_in = np.empty((dim, dim), dtype=complex)
        self._acc = np.empty((dim, dim), dtype=complex)
        self._axpy = np.empty((dim, dim), dtype=complex)

    def rhs_into(self, rho: np.ndarray, out: np.ndarray) -> np.ndarray:
        """Write the Lindblad right-hand side of a Hermitian ``rho`` into ``out``."""
        scr = self._scratch
        np.multiply(self.anticomm, rho, out=out)
        if self.H is not None:
            # -i[H, rho] = G + G^dag with G = -i H rho, valid for Hermitian rho.
            g = self.H @ rho
            np.multiply(g, -1j, out=g)
            out += g
            np.conjugate(g.T, out=scr)
            out += scr
        for shape, w in zip(self._site_shapes, self._site_weights):
            flipped = rho.reshape(shape)[:, ::-1, :, :, ::-1, :]
            scr6 = scr.reshape(shape)
            np.multiply(w, flipped, out=scr6)
            out.reshape(shape)[...] += scr6
        return out

    def rhs(self, rho: np.ndarray) -> np.ndarray:
        return self.rhs_into(np.asarray(rho, dtype=complex), np.empty_like(self._acc))

    def step_into(self, rho: np.ndarray, dt: float) -> None:
        """Advance ``rho`` in place by one RK4 step of size ``dt``."""
        k, acc, yin, tmp = self._stage, self._acc, self._stage_in, self._axpy
        self.rhs_into(rho, k)
        np.multiply(k, dt / 6.0, out=acc)
        np.multiply(k, dt / 2.0, out=tmp)
        np.add(rho, tmp, out=yin)
        self.rhs_into(yin, k)
        np.multiply(k, dt / 3.0, out=tmp)
        acc += tmp
        np.multiply(k, dt / 2.0, out=tmp)
        np.add(rho, tmp, out=yin)
        self.rhs_into(yin, k)
        np.multiply(k, dt / 3.0, out=tmp)
        acc += tmp
        np.multiply(k, dt, out=tmp)
        np.add(rho, tmp, out=yin)
        self.rhs_into(yin, k)
        np.multiply(k, dt / 6.0, out=tmp)
        acc += tmp
        rho += acc


def lindblad_rhs(rho: np.ndarray, model: ModelSpec) -> np.ndarray:
    """Right-hand side of the master equation for a Hermitian unit-trace ``rho``.

    The result is Hermitian and traceless (to roundoff).
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (1 << model.N, 1 << model.N):
        raise UsageError(
            f"rho shape {rho.shape} does not match N={model.N}"
        )
    return LindbladPropagator(model).rhs(rho)


class _ObservableRecorder:
    """Precompiled expectation evaluation for Hermitian observables."""

    def __init__(self, observables, dim: int):
        self._entries = []
        self.names = []
        for name, op in observables:
            mat = op.matrix if isinstance(op, QuantumOperator) else op
            if mat.shape != (dim, dim):
                raise UsageError(
                    f"observable {name!r} has shape {mat.shape}, expected {(dim, dim)}"
                )
            mat = mat.tocsr() if sp.issparse(mat) else sp.csr_matrix(mat)
            offdiag = mat - sp.diags(mat.diagonal())
            if offdiag.nnz == 0 or np.abs(offdiag.data).max() == 0.0:
                self._entries.append(("diag", np.real(mat.diagonal())))
            else:
                self._entries.append(("csr", mat))
            self.names.append(name)

    def record(self, rho: np.ndarray) -> list[float]:
        out = []
        for kind, mat in self._entries:
            if kind == "diag":
                out.append(float(np.real(np.dot(mat, np.diagonal(rho)))))
            else:
                out.append(float(np.real(mat.multiply(rho.T).sum())))
        return out


def _check_state(rho: np.ndarray, t: float) -> None:
    trace_err = abs(np.trace(rho).real - 1.0) + abs(np.trace(rho).imag)
    if trace_err > TRACE_TOL:
        raise IntegrationError(
            f"trace drift {trace_err:.3e} exceeds {TRACE_TOL:.0e} at t={t:.6g}; "
            "reduce dt",
            t=t,
        )
    herm_err = np.abs(rho - rho.conj().T).max()
    if herm_err > HERMITICITY_TOL:
        raise IntegrationError(
            f"Hermiticity drift {herm_err:.3e} exceeds {HERMITICITY_TOL:.0e} "
            f"at t={t:.6g}; reduce dt",
            t=t,
        )


def integrate(
    rho0: np.ndarray,
    model: ModelSpec,
    cfg: IntegrationConfig,
    observables,
    *,
    return_state: bool = False,
):
    """Propagate ``rho0`` to ``cfg.t_max``, sampling observables on the way.

    ``observables`` is a sequence of ``(name, operator)`` pairs with
    Hermitian operators.  Samples are taken every ``cfg.record_every``
    steps, starting at t=0.  Returns an :class:`ObservableSeries`, or a
    ``(series, rho_final)`` tuple when ``return_state`` is set.  Trace or
    Hermiticity drift beyond tolerance raises :class:`IntegrationError`
    naming the first offending sample time.
    """
    rho = validate_density_matrix(rho0, model.N)
    prop = LindbladPropagator(model)
    recorder = _ObservableRecorder(observables, prop.dim)

    n_steps = cfg.n_steps
    times = [0.0]
    rows = [recorder.record(rho)]
    _check_state(rho, 0.0)
    for step in range(1, n_steps + 1):
        prop.step_into(rho, cfg.dt)
        if step % cfg.record_every == 0:
            t = step * cfg.dt
            _check_state(rho, t)
            times.append(t)
            rows.append(recorder.record(rho))

    data = np.asarray(rows, dtype=np.float64)
    series = ObservableSeries(
        t=np.asarray(times),
        values={name: data[:, j] for j, name in enumerate(recorder.names)},
    )
    if return_state:
        return series, rho
    return series


def steady_state_by_integration(
    rho0: np.ndarray, model: ModelSpec, cfg: IntegrationConfig
) -> SteadyStateResult:
    """Integrate until the right-hand side max-entry drops below ``cfg.steady_tol``.

    The residual is evaluated every ``cfg.record_every`` steps.  If the
    horizon is reached first the final state is returned with
    ``converged=False``; the caller decides whether that is acceptable.
    """
    rho = validate_density_matrix(rho0, model.N)
    prop = LindbladPropagator(model)
    residual = np.empty_like(rho)

    def rhs_max() -> float:
        prop.rhs_into(rho, residual)
        return float(np.abs(residual).max())

    current = rhs_max()
    if current <= cfg.steady_tol:
        return SteadyStateResult(rho=rho, converged=True, t_end=0.0, rhs_max=current)
    n_steps = cfg.n_steps
    for step in range(1, n_steps + 1):
        prop.step_into(rho, cfg.dt)
        if step % cfg.record_every == 0 or step == n_steps:
            t = step * cfg.dt
            _check_state(rho, t)
            current = rhs_max()
            if current <= cfg.steady_tol:
                return SteadyStateResult(
                    rho=rho, converged=True, t_end=t, rhs_max=current
                )
    return SteadyStateResult(
        rho=rho, converged=False, t_end=n_steps * cfg.dt, rhs_max=current
    )
