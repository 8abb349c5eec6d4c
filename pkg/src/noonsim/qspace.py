"""Truncated Hilbert space and dense operator algebra for one transmon qutrit
coupled to two microwave resonators.

Conventions, fixed across the package:

* slot order is (qutrit, resonator a, resonator b) and the flat basis index
  is ``q * dim_a * dim_b + n_a * dim_b + n_b`` (row-major over the slots),
* qutrit levels are ordered ``g = 0 < e = 1 < f = 2``,
* operators are dense complex numpy matrices; when a matrix plays the role
  of a Hamiltonian its entries are angular frequencies (rad/s, hbar = 1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LEVEL_G, LEVEL_E, LEVEL_F = 0, 1, 2
LEVEL_NAMES = ("g", "e", "f")
QUTRIT_DIM = 3

SLOT_QUTRIT = "qutrit"
SLOT_A = "res_a"
SLOT_B = "res_b"


class DimensionError(ValueError):
    """Operator/state dimensions incompatible with the requested space."""


class TransitionError(ValueError):
    """Qutrit transition request that is not lower -> upper."""


@dataclass(frozen=True)
class HilbertSpace:
    """Tensor space of one qutrit and two truncated bosonic modes.

    Parameters
    ----------
    dim_a, dim_b : int
        Number of retained Fock levels (0 .. dim-1) of resonators a and b.
        Both must be at least 2.
    """

    dim_a: int
    dim_b: int

    def __post_init__(self):
        if self.dim_a < 2 or self.dim_b < 2:
            raise DimensionError(
                f"resonator dimensions must be >= 2, got ({self.dim_a}, {self.dim_b})"
            )

    @property
    def total_dim(self) -> int:
        return QUTRIT_DIM * self.dim_a * self.dim_b

    @property
    def slot_dims(self) -> tuple[int, int, int]:
        return (QUTRIT_DIM, self.dim_a, self.dim_b)

    def flatten_index(self, q: int, n_a: int, n_b: int) -> int:
        """Flat basis index of |q, n_a, n_b>."""
        if not (0 <= q < QUTRIT_DIM and 0 <= n_a < self.dim_a and 0 <= n_b < self.dim_b):
            raise DimensionError(f"basis labels ({q},{n_a},{n_b}) outside {self.slot_dims}")
        return (q * self.dim_a + n_a) * self.dim_b + n_b

    def unflatten_index(self, idx: int) -> tuple[int, int, int]:
        """Inverse of :meth:`flatten_index`."""
        if not 0 <= idx < self.total_dim:
            raise DimensionError(f"index {idx} outside 0..{self.total_dim - 1}")
        idx, n_b = divmod(idx, self.dim_b)
        q, n_a = divmod(idx, self.dim_a)
        return q, n_a, n_b

    def basis_label(self, idx: int) -> str:
        q, n_a, n_b = self.unflatten_index(idx)
        return f"|{LEVEL_NAMES[q]},{n_a},{n_b}>"

    def basis_ket(self, q: int, n_a: int, n_b: int) -> np.ndarray:
        psi = np.zeros(self.total_dim, dtype=complex)
        psi[self.flatten_index(q, n_a, n_b)] = 1.0
        return psi

    def identity(self) -> np.ndarray:
        return np.eye(self.total_dim, dtype=complex)


def annihilation(dim: int) -> np.ndarray:
    """Single-mode annihilation operator on ``dim`` Fock levels.

    Entries are ``a[n-1, n] = sqrt(n)``; the conjugate transpose is the
    creation operator.
    """
    if dim < 2:
        raise DimensionError(f"mode dimension must be >= 2, got {dim}")
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)


def qutrit_transition(lower: int, upper: int) -> np.ndarray:
    """Lowering operator |lower><upper| on the bare qutrit (3x3).

    ``lower`` must sit strictly below ``upper`` in the g < e < f ladder; the
    raising operator is the conjugate transpose.
    """
    if lower >= upper:
        raise TransitionError(f"need lower < upper, got ({lower}, {upper})")
    if not (0 <= lower < QUTRIT_DIM and 0 <= upper < QUTRIT_DIM):
        raise TransitionError(f"levels must be in 0..2, got ({lower}, {upper})")
    m = np.zeros((QUTRIT_DIM, QUTRIT_DIM), dtype=complex)
    m[lower, upper] = 1.0
    return m


def qutrit_projector(level: int) -> np.ndarray:
    """Projector |level><level| on the bare qutrit (3x3)."""
    if not 0 <= level < QUTRIT_DIM:
        raise TransitionError(f"level must be in 0..2, got {level}")
    m = np.zeros((QUTRIT_DIM, QUTRIT_DIM), dtype=complex)
    m[level, level] = 1.0
    return m


def embed(factor: np.ndarray, slot: str, space: HilbertSpace) -> np.ndarray:
    """Embed a single-slot operator into the full tensor space.

    The remaining slots are padded with identities, preserving the fixed
    (qutrit, res_a, res_b) order.
    """
    factor = np.asarray(factor, dtype=complex)
    dims = {SLOT_QUTRIT: QUTRIT_DIM, SLOT_A: space.dim_a, SLOT_B: space.dim_b}
    if slot not in dims:
        raise ValueError(f"unknown slot {slot!r}")
    if factor.shape != (dims[slot], dims[slot]):
        raise DimensionError(
            f"factor shape {factor.shape} does not match slot {slot!r} of dim {dims[slot]}"
        )
    eye_a = np.eye(space.dim_a, dtype=complex)
    eye_b = np.eye(space.dim_b, dtype=complex)
    eye_q = np.eye(QUTRIT_DIM, dtype=complex)
    if slot == SLOT_QUTRIT:
        return np.kron(factor, np.kron(eye_a, eye_b))
    if slot == SLOT_A:
        return np.kron(eye_q, np.kron(factor, eye_b))
    return np.kron(eye_q, np.kron(eye_a, factor))


def expectation(op: np.ndarray, rho: np.ndarray) -> complex:
    """Trace(op @ rho); real up to roundoff when ``op`` is Hermitian."""
    op = np.asarray(op)
    rho = np.asarray(rho)
    if op.shape != rho.shape or op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise DimensionError(f"shape mismatch: op {op.shape} vs rho {rho.shape}")
    # tr(A B) without forming the product
    return complex(np.sum(op.T * rho))


def overlap(psi: np.ndarray, phi: np.ndarray) -> complex:
    """Inner product <psi|phi>."""
    psi = np.asarray(psi)
    phi = np.asarray(phi)
    if psi.shape != phi.shape:
        raise DimensionError(f"shape mismatch: {psi.shape} vs {phi.shape}")
    return complex(np.vdot(psi, phi))


def ket_to_dm(psi: np.ndarray) -> np.ndarray:
    """Pure-state density matrix |psi><psi|."""
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def hermiticity_defect(m: np.ndarray) -> float:
    """Max-entry deviation from Hermiticity, relative to the largest entry."""
    scale = max(float(np.abs(m).max()), 1e-300)
    return float(np.abs(m - m.conj().T).max()) / scale


def is_hermitian(m: np.ndarray, tol: float = 1e-12) -> bool:
    return hermiticity_defect(m) < tol
