"""Interaction-picture Hamiltonians for each protocol operation.

Every builder returns a :class:`TimeDepOperator`: a static Hermitian part
plus a list of rotating terms.  A rotating term stores only the
non-Hermitian half ``op``; its contribution to H(t) is
``op * exp(i*(freq*t + phase)) + h.c.``, so the assembled operator is
Hermitian for every t by construction.

The resonant swap builders carry, besides the wanted Jaynes-Cummings
coupling, the spectator transition of the same resonator, both transitions
of the detuned resonator, and the inter-resonator crosstalk.  The pulse
builders add the resonant drive and its spectator transition on top of the
corresponding swap Hamiltonian, since the qutrit-resonator couplings stay
on while a pulse is applied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .device import DerivedCouplings
from .qspace import (
    LEVEL_E,
    LEVEL_F,
    LEVEL_G,
    SLOT_A,
    SLOT_B,
    SLOT_QUTRIT,
    HilbertSpace,
    annihilation,
    embed,
    qutrit_transition,
)

PULSE_PHASE = -math.pi / 2.0


@dataclass(frozen=True)
class RotatingTerm:
    """One rotating contribution op*exp(i*(freq*t + phase)) + h.c."""

    op: np.ndarray
    freq: float
    phase: float = 0.0


@dataclass(frozen=True)
class TimeDepOperator:
    """Hamiltonian as a static Hermitian matrix plus rotating terms."""

    static: np.ndarray
    terms: tuple[RotatingTerm, ...] = field(default=())

    def evaluate(self, t: float) -> np.ndarray:
        """Dense H(t) in rad/s."""
        h = self.static.copy()
        for term in self.terms:
            c = np.exp(1j * (term.freq * t + term.phase))
            h += c * term.op
            h += np.conj(c) * term.op.conj().T
        return h

    @property
    def max_rotating_freq(self) -> float:
        """Largest |angular frequency| among the rotating terms (0 if static)."""
        if not self.terms:
            return 0.0
        return max(abs(term.freq) for term in self.terms)

    @property
    def dim(self) -> int:
        return self.static.shape[0]


class _Ops:
    """Embedded elementary operators of one space, built once per builder."""

    def __init__(self, space: HilbertSpace):
        self.a = embed(annihilation(space.dim_a), SLOT_A, space)
        self.b = embed(annihilation(space.dim_b), SLOT_B, space)
        self.low_ge = embed(qutrit_transition(LEVEL_G, LEVEL_E), SLOT_QUTRIT, space)
        self.low_ef = embed(qutrit_transition(LEVEL_E, LEVEL_F), SLOT_QUTRIT, space)
        self.raise_ge = self.low_ge.conj().T  # |e><g|
        self.raise_ef = self.low_ef.conj().T  # |f><e|


def _hermitize(half: np.ndarray) -> np.ndarray:
    return half + half.conj().T


def h_stage1_resonant(space: HilbertSpace, d: DerivedCouplings) -> TimeDepOperator:
    """Stage-1 swap Hamiltonian: resonator a resonant with g-e.

    Static part g_eg*(a|e><g| + h.c.); rotating spectators: a on e-f at
    delta1, b on g-e at delta_eg, b on e-f at delta_fe, and the a-b
    crosstalk at Delta.
    """
    ops = _Ops(space)
    static = _hermitize(d.g_eg * (ops.a @ ops.raise_ge))
    terms = (
        RotatingTerm(d.gt_fe * (ops.a @ ops.raise_ef), d.delta1),
        RotatingTerm(d.mu_eg * (ops.b @ ops.raise_ge), d.delta_eg),
        RotatingTerm(d.mu_fe * (ops.b @ ops.raise_ef), d.delta_fe),
        RotatingTerm(d.g_ab * (ops.a @ ops.b.conj().T), d.Delta),
    )
    return TimeDepOperator(static, terms)


def h_stage1_pulse(space: HilbertSpace, d: DerivedCouplings,
                   resonant_swap: bool = True) -> TimeDepOperator:
    """Stage-1 pulse Hamiltonian: resonant g-e drive on top of the stage-1
    swap couplings, plus the spectator e-f drive rotating at -delta2.

    With ``resonant_swap=False`` the resonant a-to-g-e coupling is dropped
    while every off-resonant term stays: the configuration of a pulse
    applied while resonator a is gated away from its resonance window.
    """
    base = h_stage1_resonant(space, d)
    ops = _Ops(space)
    drive = _hermitize(d.Omega_eg * np.exp(1j * PULSE_PHASE) * ops.low_ge)
    static = base.static + drive if resonant_swap else drive
    spectator = RotatingTerm(d.Omegat_fe * ops.low_ef, -d.delta2, PULSE_PHASE)
    return TimeDepOperator(static, base.terms + (spectator,))


def h_stage2_resonant(space: HilbertSpace, d: DerivedCouplings) -> TimeDepOperator:
    """Stage-2 swap Hamiltonian: resonator b resonant with e-f.

    Static part g_fe*(b|f><e| + h.c.); rotating spectators: b on g-e at
    delta3, a on g-e at deltat_eg, a on e-f at deltat_fe, and the a-b
    crosstalk at Delta.
    """
    ops = _Ops(space)
    static = _hermitize(d.g_fe * (ops.b @ ops.raise_ef))
    terms = (
        RotatingTerm(d.gt_eg * (ops.b @ ops.raise_ge), d.delta3),
        RotatingTerm(d.mut_eg * (ops.a @ ops.raise_ge), d.deltat_eg),
        RotatingTerm(d.mut_fe * (ops.a @ ops.raise_ef), d.deltat_fe),
        RotatingTerm(d.g_ab * (ops.a @ ops.b.conj().T), d.Delta),
    )
    return TimeDepOperator(static, terms)


def h_stage2_pulse(space: HilbertSpace, d: DerivedCouplings,
                   which: str = "fe", resonant_swap: bool = True) -> TimeDepOperator:
    """Stage-2 pulse Hamiltonian on top of the stage-2 swap couplings.

    ``which="fe"`` drives e-f resonantly with the g-e spectator rotating at
    -delta4 (used for the first N-1 stage-2 steps).  ``which="eg"`` drives
    g-e resonantly with the e-f spectator rotating at +delta4 (used once,
    in the last step).  ``resonant_swap=False`` drops the resonant
    b-to-e-f coupling, as for :func:`h_stage1_pulse`.
    """
    base = h_stage2_resonant(space, d)
    ops = _Ops(space)
    if which == "fe":
        drive = _hermitize(d.Omega_fe * np.exp(1j * PULSE_PHASE) * ops.low_ef)
        spectator = RotatingTerm(d.Omegat_eg * ops.low_ge, -d.delta4, PULSE_PHASE)
    elif which == "eg":
        drive = _hermitize(d.Omega_eg * np.exp(1j * PULSE_PHASE) * ops.low_ge)
        spectator = RotatingTerm(d.Omegat_fe * ops.low_ef, d.delta4, PULSE_PHASE)
    else:
        raise ValueError(f"which must be 'fe' or 'eg', got {which!r}")
    static = base.static + drive if resonant_swap else drive
    return TimeDepOperator(static, base.terms + (spectator,))


def jc_a_ge(space: HilbertSpace, g_eg: float) -> TimeDepOperator:
    """Bare resonant Jaynes-Cummings coupling of resonator a to g-e."""
    ops = _Ops(space)
    return TimeDepOperator(_hermitize(g_eg * (ops.a @ ops.raise_ge)))


def jc_b_fe(space: HilbertSpace, g_fe: float) -> TimeDepOperator:
    """Bare resonant Jaynes-Cummings coupling of resonator b to e-f."""
    ops = _Ops(space)
    return TimeDepOperator(_hermitize(g_fe * (ops.b @ ops.raise_ef)))


def pulse_drive(space: HilbertSpace, rabi: float, lower: int, upper: int,
                phase: float = PULSE_PHASE) -> TimeDepOperator:
    """Bare resonant drive rabi*(e^{i*phase}|lower><upper| + h.c.).

    With phase = -pi/2 and duration pi/(2*rabi) this maps |lower> to
    |upper> exactly.
    """
    low = embed(qutrit_transition(lower, upper), SLOT_QUTRIT, space)
    return TimeDepOperator(_hermitize(rabi * np.exp(1j * phase) * low))


def h_lab_frame(space: HilbertSpace, d: DerivedCouplings) -> tuple[np.ndarray, np.ndarray]:
    """Lab-frame Hamiltonian of the stage-1 ideal configuration.

    Returns ``(h0, h_int)``: the diagonal free part (qutrit level energies
    from the stage-1 spacings plus omega_a*adag*a + omega_b*bdag*b, with the
    g level at zero) and the static Jaynes-Cummings interaction
    g_eg*(adag|g><e| + h.c.).  Conjugating ``h_int`` by exp(i*h0*t)
    reproduces the interaction picture used everywhere else; the pair
    exists for that equivalence check only.
    """
    ops = _Ops(space)
    omega_a = d.omega_eg           # stage-1 resonance condition
    omega_b = omega_a + d.Delta
    e_e = d.omega_eg
    e_f = d.omega_eg + d.omega_fe
    proj_e = ops.raise_ge @ ops.low_ge
    proj_f = ops.raise_ef @ ops.low_ef
    h0 = (e_e * proj_e + e_f * proj_f
          + omega_a * (ops.a.conj().T @ ops.a)
          + omega_b * (ops.b.conj().T @ ops.b))
    h_int = _hermitize(d.g_eg * (ops.a.conj().T @ ops.low_ge))
    return h0, h_int
