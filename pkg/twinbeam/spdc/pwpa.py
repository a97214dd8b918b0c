""" pwpa.py

Module containing the closed-form plane-wave-pump results: the Bogoliubov gain
functions of each conjugate mode pair, mean intensities in the near and far
field, optimal imaging shifts, the gain-product phase and the locally
plane-wave kernels of a slowly varying Gaussian pump.

"""

from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy.integrate import trapezoid

from . import misc
from .crystal import TYPE_II, deriveScales, detuning, mismatch, splitQ
from .misc import QuadratureError


@dataclass(frozen=True)
class GainSample:
    """
    Gains of the pair (q, Omega) / (-q, -Omega). U1, V1 act on the signal at
    (q, Omega); U2, V2 on the idler at (q, Omega).
    """
    U1: np.ndarray
    V1: np.ndarray
    U2: np.ndarray
    V2: np.ndarray
    Gamma: np.ndarray
    Delta: np.ndarray


def _hyper(sigma_p, Delta, z):
    """ *INTERNAL FUNCTION*
    Returns cosh(Gamma z) and sinh(Gamma z)/Gamma for Gamma^2 = sigma_p^2 -
    Delta^2/4, continued to cos and sin(x)/x when Gamma is imaginary.

    INPUT:
        sigma_p - gain rate (1/m), scalar or array
        Delta - mismatch (1/m), array
        z - propagation length (m)

    OUTPUT:
        C - cosh(Gamma z)
        S - sinh(Gamma z)/Gamma (m)
    """
    g2 = np.asarray(sigma_p, dtype=float) ** 2 - np.asarray(Delta) ** 2 / 4.
    g = np.sqrt(np.abs(g2))
    gz = g * z
    pos = g2 >= 0

    safe = np.where(gz == 0, 1., gz)
    sinhc = np.where(gz == 0, 1., np.sinh(safe) / safe)
    C = np.where(pos, np.cosh(gz), np.cos(gz))
    S = z * np.where(pos, sinhc, np.sinc(gz / np.pi))

    return C, S


def gainUV(q, Omega, crystal, sigma_p, z=None):
    """
    Gain functions of the plane-wave pump input-output relations
    a_1(q,W) = U1 b_1(q,W) + V1 b_2^+(-q,-W) and the idler counterpart.

    INPUT:
        q - transverse wave vector, (q_x, q_y) or q_y (1/m)
        Omega - frequency offset (rad/s)
        crystal - CrystalParams
        sigma_p - pump gain rate sigma A_p (1/m)
        z - propagation length (m); defaults l_c

    OUTPUT:
        gain - GainSample broadcast over q and Omega
    """
    if z is None:
        z = crystal.l_c
    if not 0 < z <= crystal.l_c * (1 + 1e-12):
        raise ValueError("Propagation length must lie in (0, l_c]")
    if sigma_p < 0:
        raise ValueError("sigma_p must be >= 0")

    q_x, q_y = splitQ(q)
    Omega = np.asarray(Omega, dtype=float)
    mq, mW = (-q_x, -q_y), -Omega

    d1 = detuning(1, (q_x, q_y), Omega, crystal)
    d2 = detuning(2, (q_x, q_y), Omega, crystal)
    d1m = detuning(1, mq, mW, crystal)
    d2m = detuning(2, mq, mW, crystal)

    Delta1 = crystal.delta_0 + d1 + d2m
    Delta2 = crystal.delta_0 + d2 + d1m

    C1, S1 = _hyper(sigma_p, Delta1, z)
    C2, S2 = _hyper(sigma_p, Delta2, z)
    ph1 = np.exp(0.5j * (d1 - d2m - crystal.delta_0) * z)
    ph2 = np.exp(0.5j * (d2 - d1m - crystal.delta_0) * z)

    U1 = ph1 * (C1 + 0.5j * Delta1 * S1)
    V1 = ph1 * sigma_p * S1
    U2 = ph2 * (C2 + 0.5j * Delta2 * S2)
    V2 = ph2 * sigma_p * S2
    Gamma = np.sqrt(sigma_p ** 2 - Delta1 ** 2 / 4. + 0j)

    return GainSample(U1=U1, V1=V1, U2=U2, V2=V2, Gamma=Gamma, Delta=Delta1)


def gainTable(crystal, sigma_p, q, Omega):
    """
    Tabulates |U|^2, |V|^2 and Delta l_c over a (q, Omega) lattice.

    INPUT:
        crystal - CrystalParams
        sigma_p - gain rate (1/m)
        q - 1D array of q_y values (1/m)
        Omega - 1D array of frequency offsets (rad/s)

    OUTPUT:
        table - DataFrame with columns q, Omega, U2, V2, Delta_lc
    """
    qq, WW = np.meshgrid(np.asarray(q, float), np.asarray(Omega, float),
                         indexing="ij")
    gain = gainUV(qq, WW, crystal, sigma_p)
    return pd.DataFrame({"q": qq.ravel(), "Omega": WW.ravel(),
                         "U2": np.abs(gain.U1.ravel()) ** 2,
                         "V2": np.abs(gain.V1.ravel()) ** 2,
                         "Delta_lc": gain.Delta.ravel() * crystal.l_c})


def refineQuadrature(evaluate, rtol=1e-4, max_levels=4, what="quadrature",
                     verbose=0):
    """
    Runs a quadrature at successively halved steps until the result changes
    by less than rtol.

    INPUT:
        evaluate - callable(level) returning a float or tuple of floats
        rtol - relative convergence threshold; defaults 1e-4
        max_levels - number of refinements allowed; defaults 4
        what - name used in messages
        verbose - verbosity of function; defaults 0

    OUTPUT:
        value - converged result of evaluate
        trace - list of (level, first component) pairs
    """
    trace = []
    prev = None
    for level in range(max_levels + 1):
        val = evaluate(level)
        vec = np.atleast_1d(np.asarray(val, dtype=float))
        trace.append((level, float(vec[0])))
        misc.vprint("%s level %d: %s" % (what, level, vec), verbose, debug=True)
        if prev is not None:
            diff = np.abs(vec - prev)
            scale = np.abs(vec)
            if np.all((diff <= rtol * scale) | ((scale == 0) & (diff == 0))):
                return val, trace
        prev = vec

    raise QuadratureError("%s did not converge to rtol=%g" % (what, rtol), trace)


def _symmetricAxis(half, step):
    n = 2 * int(np.ceil(half / step)) + 1
    return np.linspace(-half, half, n)


def quadratureWindows(crystal, scales, n_q0=6., n_omega0=6., omega_cutoff=None):
    """
    Integration half-widths: transverse (q_x, q_y) and frequency. A frequency
    filter sets the frequency window; the transverse window then covers the
    phase-matched wave vectors of every retained frequency plus n_q0 q_0.

    OUTPUT:
        Q_x, Q_y - half-widths (1/m); Q_y includes the ring offset q_C
        W - frequency half-width (rad/s)
        Omega_0 - bandwidth used for the step size (rad/s)
    """
    Omega_0 = scales.Omega_0
    if not np.isfinite(Omega_0):
        Omega_0 = scales.Omega_0_dprime
    if not np.isfinite(Omega_0):
        raise ValueError("No finite temporal bandwidth: both group-velocity "
                         "mismatch and dispersion vanish")
    W = n_omega0 * Omega_0 if omega_cutoff is None else float(omega_cutoff)
    if not W > 0:
        raise ValueError("Frequency filter half-width must be > 0")

    # |Delta l_c| reached by the frequency terms alone at the window edge
    omega_lc = crystal.l_c * (abs(crystal.kp_1 - crystal.kp_2) * W +
                              0.5 * abs(crystal.kpp_1 + crystal.kpp_2) * W ** 2)
    ring = np.sqrt((scales.q_R / scales.q_0) ** 2 + omega_lc)
    Q_x = (ring + n_q0) * scales.q_0
    Q_y = scales.q_C + Q_x
    return Q_x, Q_y, W, Omega_0


def meanIntensityNear(crystal, pump, transverse_dims=2, envelope=1,
                      omega_cutoff=None, rtol=1e-4, max_levels=4, verbose=0):
    """
    Mean photon flux density at the crystal exit under a plane-wave pump,
    the integral of |V_j|^2 over spatial and temporal frequencies.

    INPUT:
        crystal - CrystalParams
        pump - PumpParams (only sigma_p_lc enters the integrand)
        transverse_dims - 1 or 2; defaults 2
        envelope - 1 signal, 2 idler; defaults 1
        omega_cutoff - hard frequency filter half-width (rad/s); defaults None
        rtol - convergence threshold; defaults 1e-4
        max_levels - refinement levels; defaults 4
        verbose - verbosity of function; defaults 0

    OUTPUT:
        flux - photons per m^transverse_dims per s
    """
    sigma_p = pump.sigmaP(crystal)
    scales = deriveScales(crystal, pump)
    misc.vprint("PWPA validity: dq0/q0 = %.3g, domega0/Omega0 = %.3g" %
                (scales.delta_q0 / scales.q_0,
                 scales.delta_omega0 / scales.Omega_0), verbose)
    if sigma_p == 0:
        return 0.

    Q_x, Q_y, W, Omega_0 = quadratureWindows(crystal, scales,
                                             omega_cutoff=omega_cutoff)

    def _V2(qx, qy, Om):
        gain = gainUV((qx, qy), Om, crystal, sigma_p)
        return np.abs(gain.V1 if envelope == 1 else gain.V2) ** 2

    def evaluate(level):
        step_q = scales.q_0 / 8. / 2 ** level
        Om = _symmetricAxis(W, Omega_0 / 8. / 2 ** level)
        qy = _symmetricAxis(Q_y, step_q)
        if transverse_dims == 1:
            dens = _V2(0., qy[:, None], Om[None, :])
            inner = trapezoid(dens, qy, axis=0) / (2 * np.pi)
        else:
            qx = _symmetricAxis(Q_x, step_q)
            inner = np.empty(Om.size)
            for i, w in enumerate(Om):
                dens = _V2(qx[:, None], qy[None, :], w)
                inner[i] = trapezoid(trapezoid(dens, qy, axis=1), qx) / \
                    (2 * np.pi) ** 2
        return trapezoid(inner, Om) / (2 * np.pi)

    flux, trace = refineQuadrature(evaluate, rtol, max_levels,
                                   "near-field intensity", verbose)
    return flux


def meanIntensityFar(x, crystal, pump, f, transverse_dims=2, envelope=1,
                     omega_cutoff=None, rtol=1e-4, max_levels=4, verbose=0):
    """
    Mean photon flux density in the focal plane of an f-f lens,
    (1/S_diff) * integral dW/2pi |V_j(2 pi x / lambda f, W)|^2. In one
    transverse dimension S_diff is replaced by the resolution length
    lambda f / L_A.

    INPUT:
        x - far-field position(s): (x, y) pair or positions along the
            walk-off axis (m)
        crystal - CrystalParams
        pump - PumpParams with finite w_0
        f - focal length (m)
        transverse_dims - 1 or 2; defaults 2
        envelope - 1 signal, 2 idler; defaults 1
        omega_cutoff - hard frequency filter half-width (rad/s)
        rtol, max_levels, verbose - as meanIntensityNear

    OUTPUT:
        flux - array of photon flux densities, shape of x
    """
    if not f > 0:
        raise ValueError("Focal length must be > 0")
    if not np.isfinite(pump.w_0):
        raise ValueError("Far-field normalization needs a finite pump waist")

    scales = deriveScales(crystal, pump, f)
    sigma_p = pump.sigmaP(crystal)
    lam = crystal.wavelength(envelope)
    x_x, x_y = splitQ(x)
    q_x = 2 * np.pi * x_x / (lam * f)
    q_y = 2 * np.pi * x_y / (lam * f)
    norm = scales.S_diff if transverse_dims == 2 else scales.x_res

    if sigma_p == 0:
        return np.zeros(np.broadcast(q_x, q_y).shape)

    _, _, W, Omega_0 = quadratureWindows(crystal, scales,
                                         omega_cutoff=omega_cutoff)

    def evaluate(level):
        Om = _symmetricAxis(W, Omega_0 / 8. / 2 ** level)
        gain = gainUV((q_x[..., None], q_y[..., None]), Om, crystal, sigma_p)
        dens = np.abs(gain.V1 if envelope == 1 else gain.V2) ** 2
        return tuple(np.atleast_1d(trapezoid(dens, Om, axis=-1)
                                   / (2 * np.pi * norm)).ravel())

    flux, trace = refineQuadrature(evaluate, rtol, max_levels,
                                   "far-field intensity", verbose)
    return np.asarray(flux).reshape(np.broadcast(q_x, q_y).shape)


def meanIntensityProfile(crystal, pump, f, n_points=257, extent=None,
                         transverse_dims=1, verbose=0):
    """
    Far-field intensity along the walk-off axis, as a table.

    INPUT:
        crystal, pump, f - as meanIntensityFar
        n_points - number of positions; defaults 257
        extent - half-width in metres; defaults covers q_C + q_R + 6 q_0

    OUTPUT:
        table - DataFrame with columns x, q, intensity
    """
    scales = deriveScales(crystal, pump, f)
    if extent is None:
        extent = scales.farFieldPosition(scales.q_C + scales.q_R +
                                         6 * scales.q_0)
    x = np.linspace(-extent, extent, n_points)
    flux = meanIntensityFar(x, crystal, pump, f, transverse_dims,
                            verbose=verbose)
    q = 2 * np.pi * x / (crystal.lambda_1 * f)
    return pd.DataFrame({"x": x, "q": q, "intensity": flux})


def _tanhFactor(s):
    """ *INTERNAL FUNCTION*
    tanh(s)/(2s) with its s -> 0 limit 1/2.
    """
    return 0.5 if s == 0 else np.tanh(s) / (2. * s)


def optimalShifts(crystal, sigma_p):
    """
    Longitudinal and transverse detector shifts that cancel, to first order,
    the diffraction and walk-off phase of the twin-beam correlation in the
    near field.

    INPUT:
        crystal - CrystalParams of a type II crystal
        sigma_p - gain rate (1/m)

    OUTPUT:
        delta_z_opt - back-propagation depth (m)
        delta_y_opt - relative transverse shift of the idler (m)
    """
    if crystal.phase_match_type != TYPE_II:
        raise ValueError("Optimal shifts are defined for type II crystals")

    factor = _tanhFactor(sigma_p * crystal.l_c)
    index_factor = (crystal.n_1 + crystal.n_2) / (2. * crystal.n_1 * crystal.n_2)
    delta_z = factor * index_factor * crystal.l_c
    delta_y = factor * crystal.rho_2 * crystal.l_c

    return delta_z, delta_y


def phaseOfGainProduct(q, q_prime, Omega, crystal, sigma_p, band=None):
    """
    Phase of U1(q)V2(-q) [U1(q')V2(-q')]^*, exact and in the high-gain linear
    approximation tanh(s)/(2s) (Delta(q) - Delta(q')) l_c.

    INPUT:
        q, q_prime - transverse wave vectors, (q_x, q_y) or q_y (1/m)
        Omega - frequency offset (rad/s)
        crystal - CrystalParams
        sigma_p - gain rate (1/m)
        band - bound on |Delta l_c| defining the high-gain band; defaults
               2 sigma_p l_c

    OUTPUT:
        exact - wrapped exact phase (rad)
        approx - linearized phase (rad, unwrapped)
        in_band - boolean array, False where the approximation is untrusted
    """
    if band is None:
        band = 2 * sigma_p * crystal.l_c

    def _product(qq):
        qx, qy = splitQ(qq)
        g = gainUV((qx, qy), Omega, crystal, sigma_p)
        gm = gainUV((-qx, -qy), -np.asarray(Omega, float), crystal, sigma_p)
        return g.U1 * gm.V2, mismatch((qx, qy), Omega, crystal) * crystal.l_c

    P, D = _product(q)
    Pp, Dp = _product(q_prime)

    exact = np.angle(P * np.conj(Pp))
    approx = _tanhFactor(sigma_p * crystal.l_c) * (D - Dp)
    in_band = (np.abs(D) < band) & (np.abs(Dp) < band)

    return exact, approx, in_band


def pumpProfile(x, t, pump):
    """
    Gaussian pump amplitude at the crystal entrance, A_p exp(-|x|^2/w_0^2 -
    t^2/tau_0^2). `x` may be an (x, y) pair.
    """
    x_x, x_y = splitQ(x)
    r2 = x_x ** 2 + x_y ** 2
    t = np.asarray(t, dtype=float)
    return pump.A_p * np.exp(-r2 / pump.w_0 ** 2) * np.exp(-t ** 2 / pump.tau_0 ** 2)


def quasiStationaryKernels(z, q, Omega, x, t, crystal, pump, envelope=1,
                           verbose=0):
    """
    Locally plane-wave gain kernels for a pump that varies slowly over the
    coherence length and time: the plane-wave gains with sigma A_p replaced by
    the local pump value sigma A_0(x, t). Returned in the normalization of
    gainUV, so that at the pump centre they coincide with it.

    INPUT:
        z - propagation length (m)
        q - transverse wave vector, (q_x, q_y) or q_y (1/m)
        Omega - frequency offset (rad/s)
        x - transverse position, (x, y) or position along walk-off axis (m)
        t - time (s)
        crystal - CrystalParams
        pump - PumpParams
        envelope - 1 signal, 2 idler; defaults 1
        verbose - verbosity of function; defaults 0

    OUTPUT:
        U, V - complex kernels broadcast over all inputs
    """
    scales = deriveScales(crystal, pump)
    misc.vprint("Quasi-stationary kernels: dq0/q0 = %.3g, domega0/Omega0 = %.3g"
                % (scales.delta_q0 / scales.q_0,
                   scales.delta_omega0 / scales.Omega_0), verbose)

    q_x, q_y = splitQ(q)
    Omega = np.asarray(Omega, dtype=float)
    if envelope == 1:
        da = detuning(1, (q_x, q_y), Omega, crystal)
        db = detuning(2, (-q_x, -q_y), -Omega, crystal)
    else:
        da = detuning(2, (q_x, q_y), Omega, crystal)
        db = detuning(1, (-q_x, -q_y), -Omega, crystal)
    Delta = crystal.delta_0 + da + db

    sigma_loc = crystal.sigma * pumpProfile(x, t, pump)
    C, S = _hyper(sigma_loc, Delta, z)
    phase = np.exp(0.5j * (da - db - crystal.delta_0) * z)

    U = phase * (C + 0.5j * Delta * S)
    V = phase * sigma_loc * S

    return U, V


def farFieldCorrelationQS(q, q_prime, Omega, crystal, pump, kind="twin",
                          n_x=256, n_t=64):
    """
    Far-field field correlations of a finite Gaussian pump from the
    quasi-stationary kernels, one transverse dimension plus time:

        twin: integral dx dt/(2pi)^2 exp(-i(q+q')x) U1(q,W;x,t) V2(q',-W;x,t)
        self: integral dx dt/(2pi)^2 exp(i(q-q')x) V1*(q,W;x,t) V1(q',W;x,t)

    INPUT:
        q - fixed spatial frequency on the walk-off axis (1/m)
        q_prime - array of partner frequencies (1/m)
        Omega - frequency offset (rad/s)
        crystal - CrystalParams
        pump - PumpParams with finite w_0, tau_0
        kind - "twin" or "self"; defaults "twin"
        n_x, n_t - quadrature points over +-3 w_0 and +-3 tau_0

    OUTPUT:
        corr - complex array, shape of q_prime
    """
    x = np.linspace(-3 * pump.w_0, 3 * pump.w_0, n_x)
    t = np.linspace(-3 * pump.tau_0, 3 * pump.tau_0, n_t)
    X, T = x[:, None], t[None, :]
    qp = np.asarray(q_prime, dtype=float)[:, None, None]
    l_c = crystal.l_c

    if kind == "twin":
        A, _ = quasiStationaryKernels(l_c, q, Omega, X, T, crystal, pump, 1)
        _, B = quasiStationaryKernels(l_c, qp, -Omega, X[None], T[None],
                                      crystal, pump, 2)
        integrand = np.exp(-1j * (q + qp) * X[None]) * A[None] * B
    elif kind == "self":
        _, A = quasiStationaryKernels(l_c, q, Omega, X, T, crystal, pump, 1)
        _, B = quasiStationaryKernels(l_c, qp, Omega, X[None], T[None],
                                      crystal, pump, 1)
        integrand = np.exp(1j * (q - qp) * X[None]) * np.conj(A)[None] * B
    else:
        raise ValueError("kind must be 'twin' or 'self'")

    inner = trapezoid(integrand, t, axis=2)
    return trapezoid(inner, x, axis=1) / (2 * np.pi) ** 2
