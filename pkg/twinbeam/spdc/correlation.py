""" correlation.py

Module containing the plane-wave-pump photon-number correlations of two
finite detection pixels, in the near field (imaging with longitudinal and
transverse shifts) and in the far field (symmetric pixels), and the ratio
surface over the imaging shifts.

The pixel kernel H11 depends only on q - q', so the (q, q') double sums are
evaluated as a sum over lags of H11 times the autocorrelation of the
integrand, computed by FFT. The direct double sum is kept as an oracle.

"""

from dataclasses import dataclass, field

import numpy as np
import scipy.fft
from scipy.integrate import trapezoid

from . import misc
from .crystal import PumpParams, deriveScales
from .pwpa import gainUV, optimalShifts, quadratureWindows, refineQuadrature, \
    _symmetricAxis


@dataclass(frozen=True)
class PixelCorrelationResult:
    """
    Photon-number statistics of a pixel pair. self_var is the mean of the two
    normally-ordered self variances; ratio = (shot + self_1 + self_2 -
    2 cross_cov) / shot.
    """
    self_var: float
    cross_cov: float
    shot: float
    ratio: float
    self_var_1: float = np.nan
    self_var_2: float = np.nan
    trace: list = field(default_factory=list, compare=False)

    def shotNoiseBound(self, rtol=1e-9):
        """ True when 2 cross_cov - self_1 - self_2 <= shot """
        lhs = 2 * self.cross_cov - self.self_var_1 - self.self_var_2
        return lhs <= self.shot * (1 + rtol)

    def asRow(self):
        return {"self_var": self.self_var, "cross_cov": self.cross_cov,
                "shot": self.shot, "ratio": self.ratio}


def _noiseRatio(self_1, self_2, cross, shot, verbose=0):
    """ *INTERNAL FUNCTION*
    Noise ratio of a pixel pair; NaN when the pixels collect no light.
    """
    if not shot > 0:
        misc.vprint("Shot noise is %g: noise ratio undefined" % shot, verbose)
        return np.nan
    return (shot + self_1 + self_2 - 2 * cross) / shot


def _assemble(self_1, self_2, cross, shot, trace=None, verbose=0):
    ratio = _noiseRatio(self_1, self_2, cross, shot, verbose)
    return PixelCorrelationResult(self_var=0.5 * (self_1 + self_2),
                                  cross_cov=cross, shot=shot, ratio=ratio,
                                  self_var_1=self_1, self_var_2=self_2,
                                  trace=list(trace or []))


def _lagKernel1D(n, step, d):
    """ *INTERNAL FUNCTION*
    (d/2pi)^2 sinc^2(m step d / 2) for lags m in FFT order of length 2n.
    """
    m = np.fft.fftfreq(2 * n, 1. / (2 * n))
    return (d / (2 * np.pi)) ** 2 * np.sinc(m * step * d / (2 * np.pi)) ** 2


def pairSum(F, steps, d):
    """
    Sum over lattice pairs of H11(q - q') F(q) F*(q') times the cell area,
    by FFT autocorrelation along the leading len(steps) axes.

    INPUT:
        F - complex array; the first len(steps) axes are q axes
        steps - tuple of q steps (1/m)
        d - pixel size (m)

    OUTPUT:
        array over the remaining axes (real part)
    """
    axes = tuple(range(len(steps)))
    shape = [2 * F.shape[a] for a in axes]
    spec = scipy.fft.fftn(F, s=shape, axes=axes)
    corr = scipy.fft.ifftn(np.abs(spec) ** 2, axes=axes)

    kernel = np.ones(shape)
    for a, step in zip(axes, steps):
        k = _lagKernel1D(F.shape[a], step, d)
        view = [1] * len(shape)
        view[a] = k.size
        kernel = kernel * k.reshape(view)
    kernel = kernel.reshape(kernel.shape + (1,) * (F.ndim - len(axes)))

    area = np.prod(steps) ** 2
    return area * np.real(np.sum(kernel * corr, axis=axes))


def pairSumDirect(F, step, d):
    """
    Direct double sum over a one-dimensional q lattice at fixed frequency,
    used to check pairSum.
    """
    n = F.size
    lag = np.arange(n)[:, None] - np.arange(n)[None, :]
    H = (d / (2 * np.pi)) ** 2 * np.sinc(lag * step * d / (2 * np.pi)) ** 2
    return step ** 2 * np.real(F @ H @ np.conj(F))


class NearFieldQuadrature(object):
    """
    Gain lattices of a near-field pixel-correlation quadrature at one
    refinement level; shot and self terms are fixed, the cross term is
    recomputed for each imaging shift.

    INPUT:
        crystal - CrystalParams
        sigma_p - gain rate (1/m)
        d - pixel size (m)
        level - refinement level (steps q_0/8 and Omega_0/8 halved per level)
        transverse_dims - 1 or 2
        omega_cutoff - hard frequency filter half-width (rad/s)
        T_d - detection time (s)
    """
    def __init__(self, crystal, sigma_p, d, level=0, transverse_dims=1,
                 omega_cutoff=None, T_d=1.):
        self.crystal = crystal
        self.d = d
        self.T_d = T_d
        self.transverse_dims = transverse_dims

        pump = PumpParams.fromGain(crystal, sigma_p * crystal.l_c)
        scales = deriveScales(crystal, pump)
        Q_x, Q_y, W, Omega_0 = quadratureWindows(crystal, scales,
                                                 omega_cutoff=omega_cutoff)
        step = min(scales.q_0 / 8., np.pi / (4. * d)) / 2 ** level
        self.Omega = _symmetricAxis(W, Omega_0 / 8. / 2 ** level)
        self.q_y = _symmetricAxis(Q_y, step)
        if transverse_dims == 2:
            self.q_x = _symmetricAxis(Q_x, step)
            self.steps = (self.q_x[1] - self.q_x[0], self.q_y[1] - self.q_y[0])
            qx = self.q_x[:, None, None]
            qy = self.q_y[None, :, None]
            Om = self.Omega[None, None, :]
        elif transverse_dims == 1:
            self.q_x = np.zeros(1)
            self.steps = (self.q_y[1] - self.q_y[0],)
            qx = 0.
            qy = self.q_y[:, None]
            Om = self.Omega[None, :]
        else:
            raise ValueError("transverse_dims must be 1 or 2")

        gain = gainUV((qx, qy), Om, crystal, sigma_p)
        gain_m = gainUV((-qx, -qy), -Om, crystal, sigma_p)
        self._qx, self._qy = qx, qy
        self.V1sq = np.abs(gain.V1) ** 2
        self.V2sq = np.abs(gain.V2) ** 2
        self.twin = gain.U1 * gain_m.V2
        self._q2 = qx ** 2 + qy ** 2

    def _omegaIntegral(self, per_omega):
        return self.T_d * trapezoid(per_omega, self.Omega) / (2 * np.pi)

    def shot(self):
        """ <N_+> of two pixels of size d """
        dens = self.V1sq + self.V2sq
        for step in self.steps:
            dens = trapezoid(dens, dx=step, axis=0) / (2 * np.pi)
        return self._omegaIntegral(dens) * self.d ** self.transverse_dims

    def selfVar(self, envelope=1, direct=False):
        f = self.V1sq if envelope == 1 else self.V2sq
        if direct:
            per = np.array([pairSumDirect(f[:, i], self.steps[0], self.d)
                            for i in range(self.Omega.size)])
        else:
            per = pairSum(f.astype(complex), self.steps, self.d)
        return self._omegaIntegral(per)

    def crossCov(self, delta_z=0., delta_y=0., offset=0., direct=False):
        """
        Cross covariance with arms back-propagated by delta_z, the idler
        translated by delta_y and pixel centres offset by x_1 - x_2.
        """
        off_x, off_y = offset if isinstance(offset, (tuple, list)) else (0., offset)
        lam = self.crystal.lambda_1 + self.crystal.lambda_2
        phase = lam * self._q2 * delta_z / (4 * np.pi) + \
            self._qy * (delta_y + off_y) + self._qx * off_x
        F = self.twin * np.exp(1j * phase)
        if direct:
            per = np.array([pairSumDirect(F[:, i], self.steps[0], self.d)
                            for i in range(self.Omega.size)])
        else:
            per = pairSum(F, self.steps, self.d)
        return self._omegaIntegral(per)

    def result(self, delta_z=0., delta_y=0., offset=0., direct=False):
        return _assemble(self.selfVar(1, direct), self.selfVar(2, direct),
                         self.crossCov(delta_z, delta_y, offset, direct),
                         self.shot())


def _farFieldPWPA(detector, crystal, sigma_p, f, transverse_dims, omega_cutoff,
                  resolution, rtol, max_levels, verbose):
    """ *INTERNAL FUNCTION*
    Symmetric far-field pixels under a plane-wave pump: the correlations are
    local in q, so every term is a single integral over the first pixel.
    """
    pump = PumpParams.fromGain(crystal, sigma_p * crystal.l_c)
    scales = deriveScales(crystal, pump)
    _, _, W, Omega_0 = quadratureWindows(crystal, scales,
                                         omega_cutoff=omega_cutoff)
    lam = crystal.lambda_1
    to_q = 2 * np.pi / (lam * f)
    c_x, c_y = detector.center_1 if isinstance(detector.center_1, (tuple, list)) \
        else (0., detector.center_1)
    d = detector.d
    T_d = 1. if detector.T_d is None else detector.T_d

    def evaluate(level):
        step = (lam * f / (2 * np.pi)) * scales.q_0 / 8. / 2 ** level
        Om = _symmetricAxis(W, Omega_0 / 8. / 2 ** level)
        y = c_y + _symmetricAxis(d / 2., step)
        if transverse_dims == 2:
            x = c_x + _symmetricAxis(d / 2., step)
            qx, qy, O = to_q * x[:, None, None], to_q * y[None, :, None], \
                Om[None, None, :]
        else:
            qx, qy, O = 0., to_q * y[:, None], Om[None, :]
        g = gainUV((qx, qy), O, crystal, sigma_p)
        gm = gainUV((-qx, -qy), -O, crystal, sigma_p)
        terms = (np.abs(g.V1) ** 4, np.abs(gm.V2) ** 4,
                 np.abs(g.U1 * gm.V2) ** 2,
                 np.abs(g.V1) ** 2 + np.abs(gm.V2) ** 2)
        out = []
        for dens in terms:
            if transverse_dims == 2:
                dens = trapezoid(dens, x, axis=0)
            dens = trapezoid(dens, y, axis=0)
            out.append(T_d * trapezoid(dens, Om) / (2 * np.pi * resolution))
        return tuple(out)

    (s1, s2, cross, shot), trace = refineQuadrature(
        evaluate, rtol, max_levels, "far-field pixel correlation", verbose)
    return _assemble(s1, s2, cross, shot, trace)


def pixelCorrelationsPWPA(detector, crystal, sigma_p, optics=None,
                          transverse_dims=1, method="fft", omega_cutoff=None,
                          resolution=1., rtol=1e-4, max_levels=4, verbose=0):
    """
    Normally-ordered self variances, cross covariance and shot noise of two
    pixels under a plane-wave pump, and the resulting noise ratio.

    INPUT:
        detector - DetectorSpec (size d, centres, plane, T_d)
        crystal - CrystalParams
        sigma_p - gain rate (1/m)
        optics - OpticalPath; its delta_z / delta_y enter the near-field cross
                 term and its f the far-field mapping; defaults None (no shift)
        transverse_dims - 1 or 2; defaults 1
        method - "fft" or "direct" (near field, 1D only); defaults "fft"
        omega_cutoff - hard frequency filter half-width (rad/s)
        resolution - far-field resolution length or area normalizing the
                     delta correlations; defaults 1
        rtol - convergence threshold; defaults 1e-4
        max_levels - refinement levels; defaults 4
        verbose - verbosity of function; defaults 0

    OUTPUT:
        result - PixelCorrelationResult
    """
    if not detector.d > 0:
        raise ValueError("Pixel size must be > 0")

    if detector.plane == "FarField":
        f = 1. if optics is None or optics.f is None else optics.f
        return _farFieldPWPA(detector, crystal, sigma_p, f, transverse_dims,
                             omega_cutoff, resolution, rtol, max_levels,
                             verbose)

    delta_z = 0. if optics is None else optics.delta_z
    delta_y = 0. if optics is None else optics.delta_y
    offset = detector.centerOffset()
    T_d = 1. if detector.T_d is None else detector.T_d
    direct = method == "direct"
    if direct and transverse_dims != 1:
        raise ValueError("Direct pair sums are one-dimensional")

    def evaluate(level):
        quad = NearFieldQuadrature(crystal, sigma_p, detector.d, level,
                                   transverse_dims, omega_cutoff, T_d)
        res = quad.result(delta_z, delta_y, offset, direct)
        return (res.self_var_1, res.self_var_2, res.cross_cov, res.shot)

    (s1, s2, cross, shot), trace = refineQuadrature(
        evaluate, rtol, max_levels, "near-field pixel correlation", verbose)
    result = _assemble(s1, s2, cross, shot, trace, verbose)
    misc.vprint("Pixel correlation d = %.4g m: ratio = %.4g" %
                (detector.d, result.ratio), verbose)
    return result


def ratioSurfacePWPA(detector, crystal, sigma_p, dz_list, dy_list,
                     transverse_dims=1, omega_cutoff=None, rtol=1e-4,
                     max_levels=4, verbose=0):
    """
    Near-field noise ratio over a lattice of imaging shifts. The quadrature
    level is fixed by converging at the optimal shifts.

    INPUT:
        detector - DetectorSpec in the near field
        crystal - type II CrystalParams
        sigma_p - gain rate (1/m)
        dz_list - back-propagation depths (m)
        dy_list - transverse idler shifts (m)
        transverse_dims, omega_cutoff, rtol, max_levels, verbose - as
        pixelCorrelationsPWPA

    OUTPUT:
        ratio - array of shape (len(dz_list), len(dy_list))
        minimum - (delta_z, delta_y, ratio) at the lattice minimum
    """
    dz_opt, dy_opt = optimalShifts(crystal, sigma_p)
    T_d = 1. if detector.T_d is None else detector.T_d
    offset = detector.centerOffset()

    levels = {}

    def evaluate(level):
        quad = NearFieldQuadrature(crystal, sigma_p, detector.d, level,
                                   transverse_dims, omega_cutoff, T_d)
        levels["quad"] = quad
        res = quad.result(dz_opt, dy_opt, offset)
        return (res.self_var_1, res.self_var_2, res.cross_cov, res.shot)

    (s1, s2, _, shot), trace = refineQuadrature(
        evaluate, rtol, max_levels, "near-field surface", verbose)
    quad = levels["quad"]
    if not shot > 0:
        raise misc.NumericalError("Shot noise is %g: no light reaches the "
                                  "pixels, the ratio surface is undefined"
                                  % shot)

    ratio = np.empty((len(dz_list), len(dy_list)))
    for i, dz in enumerate(dz_list):
        for j, dy in enumerate(dy_list):
            cross = quad.crossCov(dz, dy, offset)
            ratio[i, j] = _noiseRatio(s1, s2, cross, shot)
        misc.vprint("Surface row %d/%d done" % (i + 1, len(dz_list)), verbose,
                    debug=True)

    i, j = np.unravel_index(np.argmin(ratio), ratio.shape)
    minimum = (dz_list[i], dy_list[j], ratio[i, j])
    misc.vprint("Surface minimum %.4g at (dz, dy) = (%.4g, %.4g) m" %
                (minimum[2], minimum[0], minimum[1]), verbose)

    return ratio, minimum
