""" crystal.py

Module containing the physical parameters of the nonlinear crystal and of the
pump, the characteristic scales derived from them, and the linear phase
detunings and phase mismatch of the down-converted modes.

All quantities are SI. The single transverse axis of one-dimensional runs is
the walk-off (y) axis.

"""

import warnings
from dataclasses import dataclass, field, asdict

import numpy as np

from . import misc
from .misc import ConfigError, ParaxialWarning

TYPE_I = "TypeI_degenerate"
TYPE_II = "TypeII"
PHASE_MATCH_TYPES = (TYPE_I, TYPE_II)


@dataclass(frozen=True)
class CrystalParams:
    """
    Linear dispersion and nonlinear coupling constants of the medium.

    Index 0 is the pump, 1 the signal (ordinary, no walk-off) and 2 the idler.
    Wave numbers k_j = 2 pi n_j / lambda_j are derived, never stored.
    """
    phase_match_type: str
    l_c: float
    lambda_0: float
    lambda_1: float
    lambda_2: float
    n_0: float
    n_1: float
    n_2: float
    kp_0: float
    kp_1: float
    kp_2: float
    kpp_0: float
    kpp_1: float
    kpp_2: float
    rho_0: float = 0.0
    rho_2: float = 0.0
    delta_0: float = 0.0
    sigma: float = 1.0
    name: str = field(default="", compare=False)

    def __post_init__(self):
        diagnostics = self.diagnostics()
        if diagnostics:
            raise ConfigError("Invalid crystal parameters", diagnostics)

    def diagnostics(self):
        """
        Lists every violated invariant of the parameter set.

        INPUT:
            none

        OUTPUT:
            list of "field: message" strings (empty when valid)
        """
        out = []
        if self.phase_match_type not in PHASE_MATCH_TYPES:
            out.append("crystal.phase_match_type: must be one of %s" %
                       (PHASE_MATCH_TYPES,))
        if not self.l_c > 0:
            out.append("crystal.l_c: must be > 0")
        for j in range(3):
            lam = getattr(self, "lambda_%d" % j)
            n = getattr(self, "n_%d" % j)
            if not lam > 0:
                out.append("crystal.lambda_%d: must be > 0" % j)
            if not n > 0:
                out.append("crystal.n_%d: must be > 0" % j)
        if out:
            return out

        energy = 1. / self.lambda_1 + 1. / self.lambda_2
        if abs(energy - 1. / self.lambda_0) > 1e-12 * (1. / self.lambda_0):
            out.append("crystal.lambda: energy conservation 1/lambda_1 + "
                       "1/lambda_2 = 1/lambda_0 violated")

        if self.phase_match_type == TYPE_I:
            if abs(self.lambda_1 - 2 * self.lambda_0) > 1e-12 * self.lambda_1 \
                    or self.lambda_1 != self.lambda_2:
                out.append("crystal.lambda_1: degenerate type I requires "
                           "lambda_1 = lambda_2 = 2 lambda_0")
            if self.rho_2 != 0:
                out.append("crystal.rho_2: degenerate type I requires rho_2 = 0")
            for name in ("n", "kp", "kpp"):
                if getattr(self, "%s_1" % name) != getattr(self, "%s_2" % name):
                    out.append("crystal.%s_2: degenerate type I uses a single "
                               "envelope, %s_2 must equal %s_1" %
                               (name, name, name))
        return out

    @property
    def k_0(self):
        return 2 * np.pi * self.n_0 / self.lambda_0

    @property
    def k_1(self):
        return 2 * np.pi * self.n_1 / self.lambda_1

    @property
    def k_2(self):
        return 2 * np.pi * self.n_2 / self.lambda_2

    @property
    def k_bar(self):
        return 2 * self.k_1 * self.k_2 / (self.k_1 + self.k_2)

    @property
    def degenerate(self):
        return self.phase_match_type == TYPE_I

    @property
    def n_envelopes(self):
        return 1 if self.degenerate else 2

    def wavelength(self, j):
        return getattr(self, "lambda_%d" % j)

    def wavenumber(self, j):
        return getattr(self, "k_%d" % j)

    def toDict(self):
        out = asdict(self)
        out.pop("name")
        return out


@dataclass(frozen=True)
class PumpParams:
    """
    Gaussian pump geometry. `w_0` and `tau_0` may be infinite for a plane-wave,
    continuous-wave pump.
    """
    A_p: float
    w_0: float
    tau_0: float
    sigma_p_lc: float

    def __post_init__(self):
        out = []
        if not self.w_0 > 0:
            out.append("pump.w_0: must be > 0")
        if not self.tau_0 > 0:
            out.append("pump.tau_0: must be > 0")
        if self.sigma_p_lc < 0 or self.A_p < 0:
            out.append("pump.sigma_p_lc: gain must be >= 0")
        if out:
            raise ConfigError("Invalid pump parameters", out)

    @classmethod
    def fromGain(cls, crystal, sigma_p_lc, w_0=np.inf, tau_0=np.inf):
        """
        Builds pump parameters from the dimensionless gain sigma_p * l_c.

        INPUT:
            crystal - CrystalParams
            sigma_p_lc - dimensionless gain
            w_0 - beam waist (m); defaults infinite (plane wave)
            tau_0 - pulse duration (s); defaults infinite (continuous wave)

        OUTPUT:
            pump - PumpParams with A_p = sigma_p_lc / (sigma l_c)
        """
        A_p = sigma_p_lc / (crystal.sigma * crystal.l_c)
        return cls(A_p=A_p, w_0=float(w_0), tau_0=float(tau_0),
                   sigma_p_lc=float(sigma_p_lc))

    @property
    def plane_wave(self):
        return np.isinf(self.w_0) and np.isinf(self.tau_0)

    def sigmaP(self, crystal):
        """ Peak gain rate sigma_p (1/m) """
        return crystal.sigma * self.A_p

    def checkConsistency(self, crystal):
        """
        Returns a diagnostic when sigma_p_lc disagrees with sigma A_p l_c.
        """
        expected = crystal.sigma * self.A_p * crystal.l_c
        if abs(expected - self.sigma_p_lc) > 1e-12 * max(1., abs(expected)):
            return ["pump.sigma_p_lc: %g inconsistent with sigma*A_p*l_c = %g" %
                    (self.sigma_p_lc, expected)]
        return []


@dataclass(frozen=True)
class DerivedScales:
    """
    Characteristic bandwidths and lengths. `has_rings` is False when
    k_bar Delta_0 + q_C^2 < 0; q_R is then 0. Far-field quantities are NaN when
    no focal length was given.
    """
    q_0: float
    Omega_0_prime: float
    Omega_0_dprime: float
    Omega_0: float
    k_bar: float
    x_coh: float
    q_C: float
    q_R: float
    q_R_squared: float
    has_rings: bool
    delta_q0: float
    delta_omega0: float
    x_diff: float
    x_0: float
    S_A: float
    S_diff: float
    L_A: float
    x_res: float
    z_R0: float
    z_disp0: float
    f: float
    wavelength: float

    @property
    def Omega_0_prime_infinite(self):
        return np.isinf(self.Omega_0_prime)

    def ringCenter(self, envelope=1):
        """
        Centre of the ring of envelope 1 (signal) or 2 (idler) along the
        walk-off axis (1/m). Walk-off displaces the two rings to -q_C and q_C.
        """
        return -self.q_C if envelope == 1 else self.q_C

    def ringRadius(self):
        return self.q_R

    def farFieldPosition(self, q):
        """ Maps spatial frequency q (1/m) to far-field position (m) """
        return self.wavelength * self.f / (2 * np.pi) * np.asarray(q)

    def ratios(self, crystal, pump):
        """
        Dimensionless groups used to specify experiments.

        OUTPUT:
            dict of name -> value
        """
        return {"sigma_p_lc": pump.sigma_p_lc,
                "delta_0_lc": crystal.delta_0 * crystal.l_c,
                "dq0_over_q0": self.delta_q0 / self.q_0,
                "domega0_over_Omega0": self.delta_omega0 / self.Omega_0,
                "qR_over_q0": self.q_R / self.q_0,
                "qC_over_q0": self.q_C / self.q_0,
                "lc_over_zR0": crystal.l_c / self.z_R0,
                "lc_over_zdisp0": crystal.l_c / self.z_disp0}


def mismatchFromRing(crystal_k_bar, rho_2, ring_radius):
    """
    Collinear mismatch Delta_0 giving a ring of radius q_R.

    INPUT:
        crystal_k_bar - reduced wave number k_bar (1/m)
        rho_2 - idler walk-off (rad)
        ring_radius - q_R (1/m)

    OUTPUT:
        delta_0 - (q_R^2 - q_C^2) / k_bar (1/m)
    """
    q_C = 0.5 * crystal_k_bar * rho_2
    return (ring_radius ** 2 - q_C ** 2) / crystal_k_bar


def deriveScales(crystal, pump, f=np.nan, verbose=0):
    """
    Computes all characteristic scales of a crystal/pump configuration.

    INPUT:
        crystal - CrystalParams
        pump - PumpParams
        f - focal length of the far-field lens (m); defaults NaN
        verbose - verbosity of function; defaults 0

    OUTPUT:
        scales - DerivedScales
    """
    l_c = crystal.l_c
    k_bar = crystal.k_bar
    q_0 = np.sqrt(k_bar / l_c)

    dkp = abs(crystal.kp_1 - crystal.kp_2)
    Omega_0_prime = np.inf if dkp == 0 else 1. / (dkp * l_c)
    kpp_sum = crystal.kpp_1 + crystal.kpp_2
    Omega_0_dprime = np.inf if kpp_sum <= 0 else np.sqrt(2. / (kpp_sum * l_c))
    Omega_0 = Omega_0_dprime if crystal.degenerate else Omega_0_prime

    q_C = 0.5 * k_bar * crystal.rho_2
    q_R_squared = k_bar * crystal.delta_0 + q_C ** 2
    # Rounding from presets that place the ring exactly at q_R = 0
    if abs(q_R_squared) <= 1e-9 * max(q_C ** 2, k_bar * abs(crystal.delta_0)):
        q_R_squared = 0.
    has_rings = q_R_squared >= 0
    q_R = np.sqrt(q_R_squared) if has_rings else 0.

    delta_q0 = 2. / pump.w_0
    delta_omega0 = 2. / pump.tau_0

    lam = crystal.lambda_1
    x_diff = lam * f / (2 * np.pi) * delta_q0
    x_0 = lam * f / (2 * np.pi) * q_0
    S_A = np.pi * pump.w_0 ** 2 / 2.
    L_A = pump.w_0 * np.sqrt(np.pi / 2.)
    S_diff = (lam * f) ** 2 / S_A
    x_res = lam * f / L_A

    z_R0 = np.pi * pump.w_0 ** 2 / crystal.lambda_0
    z_disp0 = np.inf if crystal.kpp_0 == 0 else \
        pump.tau_0 ** 2 / (2 * abs(crystal.kpp_0))

    scales = DerivedScales(q_0=q_0, Omega_0_prime=Omega_0_prime,
                           Omega_0_dprime=Omega_0_dprime, Omega_0=Omega_0,
                           k_bar=k_bar, x_coh=1. / q_0, q_C=q_C, q_R=q_R,
                           q_R_squared=q_R_squared, has_rings=has_rings,
                           delta_q0=delta_q0, delta_omega0=delta_omega0,
                           x_diff=x_diff, x_0=x_0, S_A=S_A, S_diff=S_diff,
                           L_A=L_A, x_res=x_res, z_R0=z_R0, z_disp0=z_disp0,
                           f=f, wavelength=lam)

    if not has_rings:
        misc.vprint("No rings: k_bar*Delta_0 + q_C^2 = %.4g < 0" % q_R_squared,
                    verbose)
    for key, val in scales.ratios(crystal, pump).items():
        misc.vprint("%s = %.4g" % (key, val), verbose)

    return scales


def splitQ(q):
    """
    *INTERNAL FUNCTION*
    Interprets a transverse wave vector argument. A 2-tuple/list is (q_x, q_y);
    anything else is the walk-off component q_y with q_x = 0.
    """
    if isinstance(q, (tuple, list)) and len(q) == 2:
        return np.asarray(q[0], dtype=float), np.asarray(q[1], dtype=float)
    q_y = np.asarray(q, dtype=float)
    return np.zeros_like(q_y), q_y


def detuning(j, q, Omega, crystal, frame="lab"):
    """
    Linear phase detuning delta_j(q, Omega) of envelope j (0 pump, 1 signal,
    2 idler): k'_j Omega + k''_j Omega^2 / 2 + rho_j q_y - |q|^2 / 2k_j.

    INPUT:
        j - envelope index
        q - transverse wave vector, (q_x, q_y) or q_y (1/m)
        Omega - frequency offset (rad/s)
        crystal - CrystalParams
        frame - "lab", or "pump" to subtract the pump group delay and walk-off

    OUTPUT:
        delta - detuning (1/m), broadcast over the inputs
    """
    q_x, q_y = splitQ(q)
    Omega = np.asarray(Omega, dtype=float)

    kp = getattr(crystal, "kp_%d" % j)
    kpp = getattr(crystal, "kpp_%d" % j)
    rho = {0: crystal.rho_0, 1: 0., 2: crystal.rho_2}[j]
    k = crystal.wavenumber(j)

    if frame == "pump":
        kp = kp - crystal.kp_0
        rho = rho - crystal.rho_0
    elif frame != "lab":
        raise ValueError("Unknown frame %r" % frame)

    return kp * Omega + 0.5 * kpp * Omega ** 2 + rho * q_y - \
        (q_x ** 2 + q_y ** 2) / (2 * k)


def mismatch(q, Omega, crystal):
    """
    Phase mismatch Delta(q, Omega) = Delta_0 + delta_1(q, Omega) +
    delta_2(-q, -Omega) of the conjugate mode pair (1/m).
    """
    q_x, q_y = splitQ(q)
    return crystal.delta_0 + detuning(1, (q_x, q_y), Omega, crystal) + \
        detuning(2, (-q_x, -q_y), -np.asarray(Omega, dtype=float), crystal)


def phaseMismatch(q, Omega, crystal, paraxial_ratio=0.2):
    """
    Dimensionless phase mismatch accumulated through the crystal,
    Delta(q, Omega) l_c, written with the characteristic bandwidths.

    INPUT:
        q - transverse wave vector, (q_x, q_y) or q_y (1/m)
        Omega - frequency offset (rad/s)
        crystal - CrystalParams
        paraxial_ratio - largest accepted |q|/k_j before warning; defaults 0.2

    OUTPUT:
        Delta * l_c (dimensionless)
    """
    q_x, q_y = splitQ(q)
    Omega = np.asarray(Omega, dtype=float)
    q2 = q_x ** 2 + q_y ** 2

    k_min = min(crystal.k_1, crystal.k_2)
    if q2.size and np.sqrt(np.max(q2)) > paraxial_ratio * k_min:
        warnings.warn("|q|/k = %.3g exceeds paraxial bound %.3g" %
                      (np.sqrt(np.max(q2)) / k_min, paraxial_ratio),
                      ParaxialWarning, stacklevel=2)

    l_c = crystal.l_c
    q_0_sq = crystal.k_bar / l_c

    return crystal.delta_0 * l_c \
        + (crystal.kp_1 - crystal.kp_2) * Omega * l_c \
        + 0.5 * (crystal.kpp_1 + crystal.kpp_2) * Omega ** 2 * l_c \
        - crystal.rho_2 * q_y * l_c \
        - q2 / q_0_sq
