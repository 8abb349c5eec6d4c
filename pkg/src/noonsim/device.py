"""Physical parameters of the qutrit-plus-two-resonator device and every
quantity derived from them.

All frequencies, couplings and detunings are stored as angular values
(rad/s); decay and dephasing rates are plain 1/s; durations are seconds;
capacitances are farads.  Conversion from the config-file units (GHz, MHz,
microsecond lifetimes, ns, fF) happens exactly once, in
:func:`device_params_from_config`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

TWO_PI = 2.0 * math.pi


def ghz(value: float) -> float:
    """Angular frequency (rad/s) from a linear frequency in GHz."""
    return TWO_PI * value * 1e9


def mhz(value: float) -> float:
    """Angular frequency (rad/s) from a linear frequency in MHz."""
    return TWO_PI * value * 1e6


def rate_from_lifetime_us(value: float) -> float:
    """Decay rate (1/s) from a 1/e lifetime in microseconds."""
    if value <= 0:
        raise ValueError(f"lifetime must be positive, got {value} us")
    return 1.0 / (value * 1e-6)


class ConfigError(ValueError):
    """Malformed or unknown configuration content."""


@dataclass(frozen=True)
class DeviceParams:
    """Independent physical parameters of the device.

    Attributes
    ----------
    omega_a, omega_b : float
        Resonator angular frequencies (rad/s), with omega_a > omega_b.
    delta1, delta2, delta3, delta4 : float
        Fixed detunings of the off-resonant spectator transitions (rad/s).
        Sign conventions: delta1, delta2 < 0 and delta3, delta4 > 0.
    g : float
        Base qutrit-resonator coupling of the g-e transition (rad/s).
    Omega : float
        Base pulse Rabi rate, shared by the g-e and e-f drives (rad/s).
    gab_ratio : float
        Inter-resonator crosstalk coupling in units of g (dimensionless).
    gamma_phi_f, gamma_phi_e : float
        Pure-dephasing rates of |f> and |e> (1/s).
    gamma_fe, gamma_eg : float
        Energy relaxation rates of the f->e and e->g decay paths (1/s).
    kappa_a, kappa_b : float
        Resonator photon loss rates (1/s).
    t_d : float
        Idle time needed to retune the qutrit level spacings (s).
    C_c, C_q : float
        Coupling and qutrit self capacitance (F), used only by the
        crosstalk estimate.
    n_guard : int
        Extra Fock levels kept above |N> in each resonator so leakage from
        off-resonant terms stays representable.
    """

    omega_a: float
    omega_b: float
    delta1: float
    delta2: float
    delta3: float
    delta4: float
    g: float
    Omega: float
    gab_ratio: float
    gamma_phi_f: float
    gamma_phi_e: float
    gamma_fe: float
    gamma_eg: float
    kappa_a: float
    kappa_b: float
    t_d: float
    C_c: float
    C_q: float
    n_guard: int

    def __post_init__(self):
        if not self.omega_a > self.omega_b > 0:
            raise ValueError("need omega_a > omega_b > 0")
        if not (self.delta1 < 0 and self.delta2 < 0):
            raise ValueError("delta1 and delta2 must be negative")
        if not (self.delta3 > 0 and self.delta4 > 0):
            raise ValueError("delta3 and delta4 must be positive")
        if self.g <= 0 or self.Omega <= 0:
            raise ValueError("g and Omega must be positive")
        if self.gab_ratio < 0:
            raise ValueError("gab_ratio must be >= 0")
        rates = (self.gamma_phi_f, self.gamma_phi_e, self.gamma_fe,
                 self.gamma_eg, self.kappa_a, self.kappa_b)
        if any(r < 0 for r in rates):
            raise ValueError("decay/dephasing rates must be >= 0")
        if self.t_d < 0:
            raise ValueError("t_d must be >= 0")
        if self.C_c < 0 or self.C_q <= 0:
            raise ValueError("capacitances must be positive (C_c may be 0)")
        if self.n_guard < 1:
            raise ValueError("n_guard must be >= 1")

    def with_overrides(self, **kwargs) -> "DeviceParams":
        return replace(self, **kwargs)


@dataclass(frozen=True)
class DerivedCouplings:
    """Every dependent coupling, Rabi rate, detuning and level spacing.

    Names mirror the device conventions: plain symbols belong to the first
    protocol stage (resonator a resonant with g-e), tilde/primed quantities
    (``*t``, ``*_p``) to the second stage (resonator b resonant with e-f).
    """

    # couplings of the resonant resonator (rad/s)
    g_eg: float
    g_fe: float
    # spectator couplings of the resonant resonator (rad/s)
    gt_fe: float
    gt_eg: float
    # couplings of the detuned resonator (rad/s)
    mu_eg: float
    mu_fe: float
    mut_eg: float
    mut_fe: float
    # inter-resonator crosstalk (rad/s)
    g_ab: float
    # pulse Rabi rates, resonant and spectator (rad/s)
    Omega_eg: float
    Omega_fe: float
    Omegat_fe: float
    Omegat_eg: float
    # detunings (rad/s)
    delta1: float
    delta2: float
    delta3: float
    delta4: float
    delta_eg: float
    delta_fe: float
    deltat_eg: float
    deltat_fe: float
    Delta: float
    # qutrit level spacings, stage 1 and stage 2 (rad/s)
    omega_eg: float
    omega_fe: float
    omega_eg_p: float
    omega_fe_p: float


def derive_couplings(p: DeviceParams) -> DerivedCouplings:
    """Resolve all dependent quantities from a :class:`DeviceParams`.

    Stage-1 resonance pins omega_eg = omega_a and omega_fe = omega_a +
    delta1; stage-2 resonance pins omega_fe' = omega_b and omega_eg' =
    omega_b + delta3.  The transmon matrix-element ratios fix the spectator
    couplings (sqrt(2) between neighbouring transitions), and the detuned
    resonator couples with the sqrt(omega/omega) impedance scaling.
    """
    omega_eg = p.omega_a
    omega_fe = p.omega_a + p.delta1
    omega_fe_p = p.omega_b
    omega_eg_p = p.omega_b + p.delta3

    root2 = math.sqrt(2.0)
    ratio_ba = math.sqrt(p.omega_b / p.omega_a)
    ratio_ab = math.sqrt(p.omega_a / p.omega_b)

    return DerivedCouplings(
        g_eg=p.g,
        g_fe=root2 * p.g,
        gt_fe=root2 * p.g,
        gt_eg=p.g,
        mu_eg=p.g * ratio_ba,
        mu_fe=root2 * p.g * ratio_ba,
        mut_eg=p.g * ratio_ab,
        mut_fe=root2 * p.g * ratio_ab,
        g_ab=p.gab_ratio * p.g,
        Omega_eg=p.Omega,
        Omega_fe=p.Omega,
        Omegat_fe=root2 * p.Omega,
        Omegat_eg=p.Omega / root2,
        delta1=p.delta1,
        delta2=p.delta2,
        delta3=p.delta3,
        delta4=p.delta4,
        delta_eg=omega_eg - p.omega_b,
        delta_fe=omega_fe - p.omega_b,
        deltat_eg=omega_eg_p - p.omega_a,
        deltat_fe=omega_fe_p - p.omega_a,
        Delta=p.omega_b - p.omega_a,
        omega_eg=omega_eg,
        omega_fe=omega_fe,
        omega_eg_p=omega_eg_p,
        omega_fe_p=omega_fe_p,
    )


def crosstalk_g_ab(g: float, C_c: float, C_q: float) -> float:
    """Inter-resonator coupling estimate g * C_c / (2*C_c + C_q)."""
    if C_c < 0 or C_q <= 0:
        raise ValueError("capacitances must be positive (C_c may be 0)")
    return g * C_c / (2.0 * C_c + C_q)


def tau_total(n_photons: int, d: DerivedCouplings, p: DeviceParams) -> float:
    """Total protocol duration in seconds for an N-photon target.

    Sums the two swap ladders (half-Rabi times pi/(2*sqrt(j)*g)), the N
    g-e pulses, the N-1 e-f pulses and the three retune idles.
    """
    if n_photons < 1:
        raise ValueError(f"photon number must be >= 1, got {n_photons}")
    swaps_a = sum(math.pi / (2.0 * math.sqrt(j) * d.g_eg) for j in range(1, n_photons + 1))
    swaps_b = sum(math.pi / (2.0 * math.sqrt(j) * d.g_fe) for j in range(1, n_photons + 1))
    pulses = (n_photons * math.pi / (2.0 * d.Omega_eg)
              + (n_photons - 1) * math.pi / (2.0 * d.Omega_fe))
    return swaps_a + swaps_b + pulses + 3.0 * p.t_d


def t_cav(Q_a: float, Q_b: float, nu_a: float, nu_b: float,
          nbar_a: float, nbar_b: float) -> float:
    """Entanglement lifetime of the two resonator modes, in seconds.

    Per mode the photon lifetime is (Q / (2 pi nu)) / nbar with nu a linear
    frequency in Hz; the joint lifetime is half the smaller of the two.
    """
    vals = (Q_a, Q_b, nu_a, nu_b, nbar_a, nbar_b)
    if any(v <= 0 for v in vals):
        raise ValueError("all t_cav inputs must be positive")
    t_a = (Q_a / (TWO_PI * nu_a)) / nbar_a
    t_b = (Q_b / (TWO_PI * nu_b)) / nbar_b
    return 0.5 * min(t_a, t_b)


def quality_factor(omega: float, kappa: float) -> float:
    """Loaded quality factor omega/kappa of a mode with angular frequency
    omega and photon loss rate kappa."""
    if omega <= 0 or kappa <= 0:
        raise ValueError("omega and kappa must be positive")
    return omega / kappa


# Reference operating point used throughout the regression experiments.
# Keys carry their unit as a suffix; this dict is also the schema of the
# "device" config-file section (unknown keys are rejected).
DEVICE_CONFIG_DEFAULTS: dict[str, float | int] = {
    "omega_a_ghz": 6.0,
    "omega_b_ghz": 3.5,
    "delta1_mhz": -400.0,
    "delta2_mhz": -400.0,
    "delta3_mhz": 400.0,
    "delta4_mhz": 400.0,
    "g_mhz": 1.8,
    "omega_rabi_mhz": 18.0,
    "gab_ratio": 2.0,
    "kappa_a_inv_us": 20.0,
    "kappa_b_inv_us": 20.0,
    "gamma_fe_inv_us": 1.5,
    "gamma_eg_inv_us": 3.0,
    "gamma_phi_f_inv_us": 3.0,
    "gamma_phi_e_inv_us": 3.0,
    "t_d_ns": 1.0,
    "c_c_ff": 1.0,
    "c_q_ff": 98.0,
    "n_guard": 2,
}


def device_params_from_config(section: dict | None = None) -> DeviceParams:
    """Build :class:`DeviceParams` from a config-file "device" section.

    Missing keys fall back to :data:`DEVICE_CONFIG_DEFAULTS`; unknown keys
    raise :class:`ConfigError` so unit typos fail loudly.
    """
    cfg = dict(DEVICE_CONFIG_DEFAULTS)
    if section:
        unknown = sorted(set(section) - set(cfg))
        if unknown:
            raise ConfigError(f"unknown device config keys: {', '.join(unknown)}")
        cfg.update(section)
    return DeviceParams(
        omega_a=ghz(cfg["omega_a_ghz"]),
        omega_b=ghz(cfg["omega_b_ghz"]),
        delta1=mhz(cfg["delta1_mhz"]),
        delta2=mhz(cfg["delta2_mhz"]),
        delta3=mhz(cfg["delta3_mhz"]),
        delta4=mhz(cfg["delta4_mhz"]),
        g=mhz(cfg["g_mhz"]),
        Omega=mhz(cfg["omega_rabi_mhz"]),
        gab_ratio=float(cfg["gab_ratio"]),
        gamma_phi_f=rate_from_lifetime_us(cfg["gamma_phi_f_inv_us"]),
        gamma_phi_e=rate_from_lifetime_us(cfg["gamma_phi_e_inv_us"]),
        gamma_fe=rate_from_lifetime_us(cfg["gamma_fe_inv_us"]),
        gamma_eg=rate_from_lifetime_us(cfg["gamma_eg_inv_us"]),
        kappa_a=rate_from_lifetime_us(cfg["kappa_a_inv_us"]),
        kappa_b=rate_from_lifetime_us(cfg["kappa_b_inv_us"]),
        t_d=cfg["t_d_ns"] * 1e-9,
        C_c=cfg["c_c_ff"] * 1e-15,
        C_q=cfg["c_q_ff"] * 1e-15,
        n_guard=int(cfg["n_guard"]),
    )


def default_params(**config_overrides) -> DeviceParams:
    """Reference operating point, with optional config-unit overrides.

    Overrides use the config key names, e.g. ``default_params(g_mhz=3.9,
    gab_ratio=0.0)``.
    """
    return device_params_from_config(config_overrides or None)
