"""Monte-Carlo wave-function (quantum-jump) unraveling of the master equation.

Single stochastic pure-state trajectories and seeded batch averages whose
ensemble mean converges to the density-matrix evolution.  The waiting-time
formulation is used: draw r uniform in (0,1), propagate the unnormalized
state under the effective Hamiltonian

    H_eff = H - (i/2) sum_k L_k^dag L_k

until the squared norm falls to r, locate the crossing by bisection within
the step, select a jump channel with probability proportional to
<psi|L_k^dag L_k|psi>, apply it, renormalize, and redraw r.  All random
draws come from one generator in a fixed order (initial r, then per jump a
channel uniform and the next r), so a (seed, dt) pair reproduces jump
times and observables bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from concurrent.futures import ProcessPoolExecutor

import numpy as np
import scipy.sparse as sp

from .errors import NumericalError, UsageError
from .lindblad import LindbladPropagator
from .model import ModelSpec, hamiltonian, hebb_weights, thermal_rate_diagonals
from .operators import QuantumOperator, flip_index, spin_configurations
from .seeding import child_seed
from .series import BatchSeries, ObservableSeries

#: Bisection width for the norm-threshold crossing, relative to dt.
JUMP_TIME_RTOL = 1e-10


@dataclass(frozen=True)
class TrajectoryConfig:
    """Stochastic-evolution settings; seeds are 64-bit."""

    dt: float = 0.01
    t_max: float = 100.0
    record_every: int = 10
    seed: int = 0
    n_traj: int = 1
    workers: int = 1

    def __post_init__(self):
        if self.dt <= 0:
            raise UsageError(f"dt must be > 0, got {self.dt}")
        if self.t_max < self.dt:
            raise UsageError(f"t_max must be >= dt, got {self.t_max}")
        if self.record_every < 1:
            raise UsageError(f"record_every must be >= 1, got {self.record_every}")
        if self.n_traj < 1:
            raise UsageError(f"n_traj must be >= 1, got {self.n_traj}")
        if self.workers < 1:
            raise UsageError(f"workers must be >= 1, got {self.workers}")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_max / self.dt))


@dataclass
class TrajectoryResult:
    """A single trajectory: sampled observables plus the jump record."""

    series: ObservableSeries
    jump_times: np.ndarray
    seed: int

    @property
    def n_jumps(self) -> int:
        return int(self.jump_times.size)


def effective_hamiltonian(model: ModelSpec) -> QuantumOperator:
    """Non-Hermitian generator ``H - (i/2) sum_k L_k^dag L_k``.

    The second term is diagonal for this model; its negative semidefinite
    anti-Hermitian part makes the norm decrease monotonically between jumps.
    """
    prop = LindbladPropagator(model)
    h = hamiltonian(model.Omega, model.N).matrix
    decay = sp.diags((-0.5j) * prop.escape_total.astype(complex), format="csr")
    return QuantumOperator((h + decay).tocsr(), model.N, auto_format=False)


class _PureStateObservables:
    """Precompiled expectation evaluation on normalized pure states."""

    def __init__(self, observables, dim: int):
        self.names = []
        self._entries = []
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

    def record(self, psi: np.ndarray) -> list[float]:
        out = []
        prob = None
        for kind, mat in self._entries:
            if kind == "diag":
                if prob is None:
                    prob = np.abs(psi) ** 2
                out.append(float(np.dot(mat, prob)))
            else:
                out.append(float(np.vdot(psi, mat @ psi).real))
        return out


class _JumpEngine:
    """Effective-Hamiltonian propagation and jump bookkeeping for one model."""

    def __init__(self, model: ModelSpec, with_jumps: bool = True):
        n = model.N
        dim = 1 << n
        self.dim = dim
        self.Omega = model.Omega
        self.flip = np.vstack([flip_index(n, i) for i in range(n)])  # (N, dim)

        prop = LindbladPropagator(model)
        self.with_jumps = with_jumps
        if with_jumps:
            self.half_escape = 0.5 * prop.escape_total
            # Channel tables in site-major (+ then -) order.  For channel
            # (i, +): psi'[a] = g_plus[a] * psi[a ^ m] on bit-clear a; the
            # leave rate at b is g_plus[b]^2 on bit-set b.  Mirrored for -.
            g_plus, g_minus = thermal_rate_diagonals(
                hebb_weights(model.patterns), model.beta
            )
            up = spin_configurations(n) == 1
            rates = np.zeros((2 * n, dim))
            self._dest = []
            self._amp = []
            b = np.arange(dim, dtype=np.intp)
            for i in range(n):
                clear = b[up[:, i]]
                setb = b[~up[:, i]]
                mask = 1 << (n - 1 - i)
                rates[2 * i, ~up[:, i]] = g_plus[setb, i] ** 2
                rates[2 * i + 1, up[:, i]] = g_minus[clear, i] ** 2
                self._dest.append(clear)  # (i,+) arrives on bit-clear states
                self._amp.append(g_plus[clear, i])
                self._dest.append(setb)
                self._amp.append(g_minus[setb, i])
            self.rates = rates
        else:
            self.half_escape = np.zeros(dim)
            self.rates = np.zeros((0, dim))
            self._dest = []
            self._amp = []

        self._k = [np.empty(dim, dtype=complex) for _ in range(4)]
        self._yt = np.empty(dim, dtype=complex)
        self._tmp = np.empty(dim, dtype=complex)
        self._gather = np.empty((n, dim), dtype=complex)

    def _rhs(self, psi: np.ndarray, out: np.ndarray) -> None:
        # dpsi/dt = -i H psi - (1/2) (sum_k L_k^dag L_k) psi
        if self.Omega != 0.0:
            np.take(psi, self.flip, axis=0, out=self._gather)
            np.sum(self._gather, axis=0, out=out)
            out *= -1j * self.Omega
        else:
            out[:] = 0.0
        np.multiply(self.half_escape, psi, out=self._tmp)
        out -= self._tmp

    def propagate(self, psi: np.ndarray, h: float, out: np.ndarray) -> np.ndarray:
        """One RK4 step of size h under H_eff, no renormalization."""
        k1, k2, k3, k4 = self._k
        yt = self._yt
        self._rhs(psi, k1)
        np.multiply(k1, 0.5 * h, out=yt)
        yt += psi
        self._rhs(yt, k2)
        np.multiply(k2, 0.5 * h, out=yt)
        yt += psi
        self._rhs(yt, k3)
        np.multiply(k3, h, out=yt)
        yt += psi
        self._rhs(yt, k4)
        np.multiply(k2, 2.0, out=yt)
        yt += k1
        np.multiply(k3, 2.0, out=self._tmp)
        yt += self._tmp
        yt += k4
        np.multiply(yt, h / 6.0, out=out)
        out += psi
        return out

    def channel_weights(self, psi: np.ndarray) -> np.ndarray:
        return self.rates @ (np.abs(psi) ** 2)


def _apply_jump(engine: _JumpEngine, channel: int, psi: np.ndarray, n: int) -> np.ndarray:
    site = channel // 2
    mask = 1 << (n - 1 - site)
    dest = engine._dest[channel]
    out = np.zeros(engine.dim, dtype=complex)
    out[dest] = engine._amp[channel] * psi[dest ^ mask]
    norm = np.linalg.norm(out)
    if norm == 0.0:
        raise NumericalError("selected jump channel annihilated the state")
    out /= norm
    return out


def run_trajectory(
    psi0: np.ndarray,
    model: ModelSpec,
    cfg: TrajectoryConfig,
    observables,
    *,
    with_jumps: bool = True,
) -> TrajectoryResult:
    """Evolve one stochastic trajectory, sampling observables on the time grid.

    ``psi0`` must be normalized.  Observables are evaluated on the
    normalized state at t = 0 and after every ``record_every`` steps.  With
    ``with_jumps=False`` the dissipative channels are removed and the
    evolution is unitary under the Hamiltonian alone (test hook).
    """
    psi = np.asarray(psi0, dtype=complex).copy()
    if psi.ndim != 1 or psi.shape[0] != (1 << model.N):
        raise UsageError(f"psi0 shape {psi.shape} does not match N={model.N}")
    if abs(np.linalg.norm(psi) - 1.0) > 1e-9:
        raise UsageError("psi0 must be normalized to 1 within 1e-9")

    engine = _JumpEngine(model, with_jumps=with_jumps)
    recorder = _PureStateObservables(observables, engine.dim)
    rng = np.random.default_rng(np.random.PCG64(cfg.seed))

    def draw_threshold() -> float:
        r = rng.random()
        while r == 0.0:
            r = rng.random()
        return r

    n = model.N
    dt = cfg.dt
    n_steps = cfg.n_steps
    threshold = draw_threshold()
    active = engine.with_jumps and engine.rates.size > 0

    times = [0.0]
    rows = [recorder.record(psi)]
    jump_times: list[float] = []
    trial = np.empty_like(psi)

    for step in range(1, n_steps + 1):
        t_start = (step - 1) * dt
        remaining = dt
        engine.propagate(psi, remaining, trial)
        while active and float(np.vdot(trial, trial).real) <= threshold:
            # Locate ||psi(h)||^2 = threshold by bisection on h in (0, remaining].
            lo, hi = 0.0, remaining
            while hi - lo > JUMP_TIME_RTOL * dt:
                mid = 0.5 * (lo + hi)
                engine.propagate(psi, mid, trial)
                if float(np.vdot(trial, trial).real) <= threshold:
                    hi = mid
                else:
                    lo = mid
            h = hi
            engine.propagate(psi, h, trial)
            weights = engine.channel_weights(trial)
            total = float(weights.sum())
            if total <= 0.0:
                raise NumericalError(
                    "norm threshold crossed but total jump rate is zero"
                )
            probs = weights / total
            if abs(probs.sum() - 1.0) > 1e-12:
                raise NumericalError("channel probabilities failed to normalize")
            u = rng.random()
            channel = int(np.searchsorted(np.cumsum(probs), u, side="right"))
            channel = min(channel, probs.size - 1)
            psi = _apply_jump(engine, channel, trial, n)
            jump_times.append(t_start + (dt - remaining) + h)
            threshold = draw_threshold()
            remaining -= h
            if remaining <= 0.0:
                trial[:] = psi
                break
            engine.propagate(psi, remaining, trial)
        psi, trial = trial, psi  # commit the step (ping-pong buffers)
        if step % cfg.record_every == 0:
            norm = np.linalg.norm(psi)
            times.append(step * dt)
            rows.append(recorder.record(psi / norm))

    data = np.asarray(rows, dtype=np.float64)
    series = ObservableSeries(
        t=np.asarray(times),
        values={name: data[:, j] for j, name in enumerate(recorder.names)},
    )
    return TrajectoryResult(
        series=series, jump_times=np.asarray(jump_times), seed=cfg.seed
    )


def _batch_worker(args):
    psi0, model, cfg, observables, j, with_jumps = args
    sub = TrajectoryConfig(
        dt=cfg.dt,
        t_max=cfg.t_max,
        record_every=cfg.record_every,
        seed=child_seed(cfg.seed, j),
        n_traj=1,
        workers=1,
    )
    result = run_trajectory(psi0, model, sub, observables, with_jumps=with_jumps)
    return np.vstack([result.series[name] for name in result.series.names])


def run_batch(
    psi0: np.ndarray,
    model: ModelSpec,
    cfg: TrajectoryConfig,
    observables,
    *,
    with_jumps: bool = True,
) -> BatchSeries:
    """Average ``cfg.n_traj`` trajectories seeded from ``cfg.seed``.

    Trajectory j runs with seed ``child_seed(cfg.seed, j)`` and the
    reduction accumulates in trajectory-index order, so the result is
    bit-identical for any ``cfg.workers``.
    """
    names = [name for name, _ in observables]
    jobs = (
        (psi0, model, cfg, list(observables), j, with_jumps)
        for j in range(cfg.n_traj)
    )
    total = None
    total_sq = None
    t_grid = None

    def accumulate(block: np.ndarray):
        nonlocal total, total_sq
        if total is None:
            total = np.zeros_like(block)
            total_sq = np.zeros_like(block)
        total += block
        total_sq += block * block

    if cfg.workers == 1:
        for job in jobs:
            accumulate(_batch_worker(job))
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            for block in pool.map(_batch_worker, jobs, chunksize=8):
                accumulate(block)

    n_samples = cfg.n_steps // cfg.record_every + 1
    t_grid = np.arange(n_samples) * (cfg.dt * cfg.record_every)
    mean = total / cfg.n_traj
    if cfg.n_traj > 1:
        var = (total_sq - cfg.n_traj * mean * mean) / (cfg.n_traj - 1)
        stderr = np.sqrt(np.clip(var, 0.0, None) / cfg.n_traj)
    else:
        stderr = np.zeros_like(mean)
    return BatchSeries(
        t=t_grid,
        means={name: mean[i] for i, name in enumerate(names)},
        stderrs={name: stderr[i] for i, name in enumerate(names)},
        n_traj=cfg.n_traj,
    )
