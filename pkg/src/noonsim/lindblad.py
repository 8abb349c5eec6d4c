"""Master-equation integration for time-dependent Hamiltonians.

The generator is

    drho/dt = -i[H(t), rho] + sum_k rate_k * (L rho Ldag - {Ldag L, rho}/2)

with lowering-operator channels for photon loss and qutrit relaxation and
projector channels for pure dephasing (for a projector S the generic
dissipator coincides with S rho S - S rho/2 - rho S/2, the form the
dephasing terms are written in).

The workhorse is a fixed-step classical RK4 integrator whose step is tied
to the fastest rotating frequency of the Hamiltonian.  Per right-hand-side
evaluation it performs a single dense matrix product: with
M = H(t) - i/2 * sum rate * Ldag L and rho Hermitian,

    -i(M rho - rho Mdag) = -i[H, rho] - {K, rho}

and rho Mdag = (M rho)dag, so commutator and anticommutator cost one
product plus a conjugate transpose.  The jump terms L rho Ldag are applied
through precomputed gather/scatter index maps, which is exact for the
single-jump operators used here.  A vectorized-Liouvillian matrix
exponential provides an independent oracle for static Hamiltonians on
small spaces.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .device import TWO_PI
from .hamiltonian import TimeDepOperator
from .qspace import (
    LEVEL_E,
    LEVEL_F,
    LEVEL_G,
    SLOT_A,
    SLOT_B,
    SLOT_QUTRIT,
    DimensionError,
    HilbertSpace,
    annihilation,
    embed,
    qutrit_projector,
    qutrit_transition,
)


class IntegrationError(RuntimeError):
    """Integration produced non-finite entries (blow-up)."""


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step integrator settings.

    ``dt_max`` caps the step outright; the step is further reduced to
    resolve the fastest rotating term with ``samples_per_fastest_period``
    samples and to take at least 100 steps per segment.
    """

    dt_max: float = 1e-9
    samples_per_fastest_period: int = 40
    hard_dt_floor: float = 1e-13
    record_stride: int = 0

    def __post_init__(self):
        if self.samples_per_fastest_period < 20:
            raise ValueError("samples_per_fastest_period must be >= 20")
        if self.dt_max <= 0 or self.hard_dt_floor <= 0:
            raise ValueError("dt_max and hard_dt_floor must be positive")
        if self.record_stride < 0:
            raise ValueError("record_stride must be >= 0")


INTEGRATOR_CONFIG_DEFAULTS: dict[str, float | int] = {
    "dt_max_ps": 1000.0,
    "samples_per_period": 40,
    "record_stride": 0,
}


def integrator_config_from_config(section: dict | None = None) -> IntegratorConfig:
    """Build an :class:`IntegratorConfig` from a config-file section."""
    from .device import ConfigError

    cfg = dict(INTEGRATOR_CONFIG_DEFAULTS)
    if section:
        unknown = sorted(set(section) - set(cfg))
        if unknown:
            raise ConfigError(f"unknown integrator config keys: {', '.join(unknown)}")
        cfg.update(section)
    return IntegratorConfig(
        dt_max=cfg["dt_max_ps"] * 1e-12,
        samples_per_fastest_period=int(cfg["samples_per_period"]),
        record_stride=int(cfg["record_stride"]),
    )


@dataclass(frozen=True)
class CollapseChannel:
    """One dissipation channel: operator and its rate (1/s)."""

    op: np.ndarray
    rate: float

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError("channel rate must be >= 0")


def standard_collapse_set(space: HilbertSpace, *, kappa_a: float, kappa_b: float,
                          gamma_fe: float, gamma_eg: float,
                          gamma_phi_f: float, gamma_phi_e: float
                          ) -> tuple[CollapseChannel, ...]:
    """The six channels of the device: photon loss of both resonators,
    qutrit relaxation f->e and e->g, and pure dephasing of |f> and |e>."""
    return (
        CollapseChannel(embed(annihilation(space.dim_a), SLOT_A, space), kappa_a),
        CollapseChannel(embed(annihilation(space.dim_b), SLOT_B, space), kappa_b),
        CollapseChannel(embed(qutrit_transition(LEVEL_E, LEVEL_F), SLOT_QUTRIT, space), gamma_fe),
        CollapseChannel(embed(qutrit_transition(LEVEL_G, LEVEL_E), SLOT_QUTRIT, space), gamma_eg),
        CollapseChannel(embed(qutrit_projector(LEVEL_F), SLOT_QUTRIT, space), gamma_phi_f),
        CollapseChannel(embed(qutrit_projector(LEVEL_E), SLOT_QUTRIT, space), gamma_phi_e),
    )


def collapse_set_for(space: HilbertSpace, params) -> tuple[CollapseChannel, ...]:
    """Protocol collapse channels for a :class:`~noonsim.device.DeviceParams`.

    Every channel enters with half the nominal rate: the device lifetimes
    are quoted as coherence times, and the published fidelity benchmarks
    are only reproduced when each Lindblad prefactor is 1/(2T) rather than
    1/T.  The factor lives here, once, so the dynamics itself (see
    :func:`lindblad_rhs`) stays in the standard convention.
    """
    return standard_collapse_set(
        space,
        kappa_a=0.5 * params.kappa_a,
        kappa_b=0.5 * params.kappa_b,
        gamma_fe=0.5 * params.gamma_fe,
        gamma_eg=0.5 * params.gamma_eg,
        gamma_phi_f=0.5 * params.gamma_phi_f,
        gamma_phi_e=0.5 * params.gamma_phi_e,
    )


def lindblad_rhs(h: np.ndarray, rho: np.ndarray,
                 channels: tuple[CollapseChannel, ...]) -> np.ndarray:
    """Reference right-hand side drho/dt for a dense Hamiltonian matrix.

    Straightforward dense evaluation, used for tests and as the ground
    truth the optimized segment engine is checked against.
    """
    h = np.asarray(h)
    rho = np.asarray(rho)
    if h.shape != rho.shape:
        raise DimensionError(f"shape mismatch: H {h.shape} vs rho {rho.shape}")
    out = -1j * (h @ rho - rho @ h)
    for ch in channels:
        if ch.rate == 0.0:
            continue
        if ch.op.shape != rho.shape:
            raise DimensionError("channel operator does not match rho")
        ldl = ch.op.conj().T @ ch.op
        out += ch.rate * (ch.op @ rho @ ch.op.conj().T
                          - 0.5 * (ldl @ rho + rho @ ldl))
    return out


class _RotScatter:
    """Sparse scatter pattern of one rotating term (op and its dagger)."""

    __slots__ = ("freq", "phase", "pos", "vals", "pos_dag", "vals_dag")

    def __init__(self, term, n):
        self.freq = term.freq
        self.phase = term.phase
        rows, cols = np.nonzero(term.op)
        self.pos = rows * n + cols
        self.vals = term.op[rows, cols]
        dag = term.op.conj().T
        rows_d, cols_d = np.nonzero(dag)
        self.pos_dag = rows_d * n + cols_d
        self.vals_dag = dag[rows_d, cols_d]


class _JumpScatter:
    """Gather/scatter form of L rho Ldag for single-jump operators."""

    __slots__ = ("dst", "src", "w")

    def __init__(self, op, rate):
        rows, cols = np.nonzero(op)
        v = op[rows, cols]
        self.dst = rows
        self.src = cols
        self.w = rate * np.outer(v, v.conj())


def _is_single_jump(op: np.ndarray) -> bool:
    rows, cols = np.nonzero(op)
    return len(np.unique(rows)) == len(rows) and len(np.unique(cols)) == len(cols)


class _SegmentEngine:
    """Preassembled fast path for RK4 steps of one protocol segment."""

    def __init__(self, h: TimeDepOperator, channels: tuple[CollapseChannel, ...]):
        n = h.dim
        k_sum = np.zeros((n, n), dtype=complex)
        self._jumps: list[_JumpScatter] = []
        self._jumps_dense: list[CollapseChannel] = []
        for ch in channels:
            if ch.rate == 0.0:
                continue
            if ch.op.shape != (n, n):
                raise DimensionError("channel operator does not match Hamiltonian")
            k_sum += 0.5 * ch.rate * (ch.op.conj().T @ ch.op)
            if _is_single_jump(ch.op):
                self._jumps.append(_JumpScatter(ch.op, ch.rate))
            else:
                self._jumps_dense.append(ch)
        self._heff = h.static - 1j * k_sum
        self._rots = [_RotScatter(t, n) for t in h.terms]
        self._m = np.empty((n, n), dtype=complex)
        self._g = np.empty((n, n), dtype=complex)
        self._ct = np.empty((n, n), dtype=complex)
        self._k1 = np.empty((n, n), dtype=complex)
        self._k2 = np.empty((n, n), dtype=complex)
        self._k3 = np.empty((n, n), dtype=complex)
        self._k4 = np.empty((n, n), dtype=complex)
        self._y = np.empty((n, n), dtype=complex)

    def rhs(self, t: float, sigma: np.ndarray, out: np.ndarray) -> None:
        m = self._m
        np.copyto(m, self._heff)
        for r in self._rots:
            c = cmath.exp(1j * (r.freq * t + r.phase))
            m.flat[r.pos] += c * r.vals
            m.flat[r.pos_dag] += c.conjugate() * r.vals_dag
        np.matmul(m, sigma, out=self._g)
        np.conjugate(self._g.T, out=self._ct)  # (M sigma)^dag = sigma Mdag
        np.subtract(self._g, self._ct, out=out)
        out *= -1j
        for j in self._jumps:
            out[np.ix_(j.dst, j.dst)] += j.w * sigma[np.ix_(j.src, j.src)]
        for ch in self._jumps_dense:
            out += ch.rate * (ch.op @ sigma @ ch.op.conj().T)

    def rk4_step(self, rho: np.ndarray, t: float, dt: float) -> None:
        self.rhs(t, rho, self._k1)
        np.multiply(self._k1, 0.5 * dt, out=self._y)
        self._y += rho
        self.rhs(t + 0.5 * dt, self._y, self._k2)
        np.multiply(self._k2, 0.5 * dt, out=self._y)
        self._y += rho
        self.rhs(t + 0.5 * dt, self._y, self._k3)
        np.multiply(self._k3, dt, out=self._y)
        self._y += rho
        self.rhs(t + dt, self._y, self._k4)
        np.add(self._k2, self._k3, out=self._k2)
        self._k2 *= 2.0
        self._k2 += self._k1
        self._k2 += self._k4
        self._k2 *= dt / 6.0
        rho += self._k2


def _choose_dt(h: TimeDepOperator, duration: float, cfg: IntegratorConfig) -> float:
    candidates = [cfg.dt_max, duration / 100.0]
    nu_max = h.max_rotating_freq
    if nu_max > 0.0:
        candidates.append(1.0 / (cfg.samples_per_fastest_period * nu_max / TWO_PI))
    return max(min(candidates), cfg.hard_dt_floor)


@dataclass
class SegmentTrace:
    """Integrator bookkeeping for one evolved segment."""

    n_steps: int
    dt: float
    trace_drift: float                      # |tr rho - 1| before renormalization
    records: list[tuple[float, float, float]] = field(default_factory=list)
    # records hold (t, trace deviation, min eigenvalue) at strided samples


def evolve_segment(h: TimeDepOperator, rho0: np.ndarray,
                   channels: tuple[CollapseChannel, ...],
                   t0: float, duration: float, cfg: IntegratorConfig,
                   label: str = "segment") -> tuple[np.ndarray, SegmentTrace]:
    """Integrate the master equation over one segment.

    ``t0`` is the stage-local clock at segment start; rotating terms are
    evaluated at ``t0 + s``.  The returned density matrix is re-Hermitized
    ((rho + rho^dag)/2) and trace-renormalized, with the raw trace drift
    reported in the trace record before the correction.
    """
    rho = np.array(rho0, dtype=complex)
    if duration < 0:
        raise ValueError("segment duration must be >= 0")
    if duration == 0.0:
        return rho, SegmentTrace(0, 0.0, 0.0)
    dt = _choose_dt(h, duration, cfg)
    n_steps = max(1, math.ceil(duration / dt))
    dt = duration / n_steps
    engine = _SegmentEngine(h, channels)
    records: list[tuple[float, float, float]] = []
    for i in range(n_steps):
        engine.rk4_step(rho, t0 + i * dt, dt)
        if cfg.record_stride and (i + 1) % cfg.record_stride == 0:
            tr_dev = abs(np.trace(rho) - 1.0)
            herm = 0.5 * (rho + rho.conj().T)
            min_eig = float(np.linalg.eigvalsh(herm)[0])
            records.append((t0 + (i + 1) * dt, float(tr_dev), min_eig))
    if not np.isfinite(rho).all():
        raise IntegrationError(f"non-finite density matrix while integrating {label!r}")
    drift = float(abs(np.trace(rho) - 1.0))
    rho = 0.5 * (rho + rho.conj().T)
    rho /= np.trace(rho).real
    return rho, SegmentTrace(n_steps, dt, drift, records)


def unitary_evolve(h: TimeDepOperator, psi0: np.ndarray, t0: float,
                   duration: float, cfg: IntegratorConfig) -> np.ndarray:
    """RK4 integration of the Schroedinger equation for a pure state."""
    psi = np.array(psi0, dtype=complex)
    if duration < 0:
        raise ValueError("duration must be >= 0")
    if duration == 0.0:
        return psi
    dt = _choose_dt(h, duration, cfg)
    n_steps = max(1, math.ceil(duration / dt))
    dt = duration / n_steps
    if h.terms:
        h_at = h.evaluate
    else:
        h_static = h.static

        def h_at(_t):
            return h_static

    for i in range(n_steps):
        t = t0 + i * dt
        k1 = -1j * (h_at(t) @ psi)
        k2 = -1j * (h_at(t + 0.5 * dt) @ (psi + 0.5 * dt * k1))
        k3 = -1j * (h_at(t + 0.5 * dt) @ (psi + 0.5 * dt * k2))
        k4 = -1j * (h_at(t + dt) @ (psi + dt * k3))
        psi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.isfinite(psi).all():
        raise IntegrationError("non-finite state vector in unitary evolution")
    return psi


def liouvillian_matrix(h_static: np.ndarray,
                       channels: tuple[CollapseChannel, ...]) -> np.ndarray:
    """Vectorized Liouvillian for row-major flattening of rho.

    With vec(A rho B) = (A kron B^T) vec(rho):
    -i(H kron I - I kron H^T) plus, per channel,
    rate * (L kron conj(L) - (LdagL kron I + I kron (LdagL)^T) / 2).
    """
    n = h_static.shape[0]
    eye = np.eye(n, dtype=complex)
    liou = -1j * (np.kron(h_static, eye) - np.kron(eye, h_static.T))
    for ch in channels:
        if ch.rate == 0.0:
            continue
        ldl = ch.op.conj().T @ ch.op
        liou += ch.rate * (np.kron(ch.op, ch.op.conj())
                           - 0.5 * (np.kron(ldl, eye) + np.kron(eye, ldl.T)))
    return liou


def propagate_expm_oracle(h: TimeDepOperator | np.ndarray, rho0: np.ndarray,
                          channels: tuple[CollapseChannel, ...],
                          duration: float) -> np.ndarray:
    """Exact propagation by matrix exponential of the vectorized Liouvillian.

    Only valid for static Hamiltonians, and only affordable for small
    spaces (total dimension <= 30, i.e. a 900x900 superoperator).  Serves
    as an independent check of :func:`evolve_segment`.
    """
    if isinstance(h, TimeDepOperator):
        if h.terms:
            raise ValueError("expm oracle requires a Hamiltonian without rotating terms")
        h_static = h.static
    else:
        h_static = np.asarray(h, dtype=complex)
    n = h_static.shape[0]
    if n > 30:
        raise DimensionError(f"expm oracle limited to total_dim <= 30, got {n}")
    liou = liouvillian_matrix(h_static, channels)
    prop = scipy.linalg.expm(liou * duration)
    return (prop @ np.asarray(rho0, dtype=complex).reshape(-1)).reshape(n, n)


@dataclass
class SegmentStats:
    """Per-segment diagnostics of a protocol run."""

    index: int
    kind: str
    stage: int
    step_index: int
    duration: float
    n_steps: int
    dt: float
    trace_drift: float
    min_eig: float
    top_pop_a: float
    top_pop_b: float


@dataclass
class SimResult:
    """Final state and diagnostics of one protocol run."""

    rho_final: np.ndarray
    segments: list[SegmentStats]
    wall_time: float
    checkpoints: list | None = None  # (segment, state) pairs when recorded

    @property
    def max_trace_drift(self) -> float:
        return max((s.trace_drift for s in self.segments), default=0.0)

    @property
    def min_eig(self) -> float:
        return min((s.min_eig for s in self.segments), default=0.0)

    @property
    def max_top_pop_a(self) -> float:
        return max((s.top_pop_a for s in self.segments), default=0.0)

    @property
    def max_top_pop_b(self) -> float:
        return max((s.top_pop_b for s in self.segments), default=0.0)

    def physicality_problems(self, trace_tol: float = 1e-6, eig_tol: float = 1e-6,
                             top_pop_tol: float = 1e-3) -> list[str]:
        """Human-readable list of violated physicality bounds (empty if ok)."""
        problems = []
        if self.max_trace_drift > trace_tol:
            problems.append(f"trace drift {self.max_trace_drift:.3e} > {trace_tol:.1e}")
        if self.min_eig < -eig_tol:
            problems.append(f"min eigenvalue {self.min_eig:.3e} < -{eig_tol:.1e}")
        top = max(self.max_top_pop_a, self.max_top_pop_b)
        if top > top_pop_tol:
            problems.append(f"top Fock-level population {top:.3e} > {top_pop_tol:.1e} "
                            "(truncation too tight)")
        return problems


def top_level_populations(rho: np.ndarray, space: HilbertSpace) -> tuple[float, float]:
    """Population of the highest retained Fock level of each resonator."""
    diag = rho.diagonal().real.reshape(space.slot_dims)
    return float(diag[:, -1, :].sum()), float(diag[:, :, -1].sum())


def density_matrix_checks(rho: np.ndarray) -> tuple[float, float, float]:
    """(trace deviation, Hermiticity defect, min eigenvalue) of a state."""
    tr_dev = float(abs(np.trace(rho) - 1.0))
    herm = float(np.abs(rho - rho.conj().T).max())
    min_eig = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0])
    return tr_dev, herm, min_eig
