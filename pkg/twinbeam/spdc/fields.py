""" fields.py

Module containing the field container passed between propagation, optics and
detection, the per-trajectory random streams, vacuum sampling and the
analytically propagated pump.

"""

from dataclasses import dataclass

import numpy as np
import scipy.fft

from .crystal import detuning

REAL = "RealSpace"
FOURIER = "FourierSpace"


class FieldState(object):
    """
    Complex envelopes sampled on a GridSpec lattice at one plane.

    Envelopes are indexed like the grid (transverse axes first, time last).
    `pitch` holds per-envelope transverse spacings, which differ from the grid
    spacings after a far-field transform. The Fourier view uses the
    continuous-amplitude normalization, so that sum |a|^2 dV is the same in
    both views.

    INPUT:
        envelopes - sequence of complex arrays
        grid - GridSpec
        plane_z - longitudinal coordinate (m)
        domain - RealSpace or FourierSpace; defaults RealSpace
        wavelengths - per-envelope vacuum wavelengths (m)
        pitch - per-envelope tuple of transverse spacings; defaults grid
        plane - "crystal", "far" or "near"; defaults "crystal"
        seed - TrajectorySeed the field descends from; defaults None
    """
    def __init__(self, envelopes, grid, plane_z=0., domain=REAL,
                 wavelengths=None, pitch=None, plane="crystal", seed=None):
        self.envelopes = tuple(np.asarray(a, dtype=np.complex128)
                               for a in envelopes)
        self.grid = grid
        self.plane_z = plane_z
        self.domain = domain
        self.plane = plane
        self.seed = seed

        n = len(self.envelopes)
        self.wavelengths = tuple(wavelengths) if wavelengths is not None \
            else (np.nan,) * n
        default_pitch = grid.spacings()[:grid.n_transverse]
        self.pitch = tuple(tuple(p) for p in pitch) if pitch is not None \
            else (default_pitch,) * n

        for a in self.envelopes:
            if a.shape != grid.shape:
                raise ValueError("Envelope shape %s does not match grid %s" %
                                 (a.shape, grid.shape))

    @property
    def n_envelopes(self):
        return len(self.envelopes)

    def replace(self, envelopes=None, **kwargs):
        """ Copy with some attributes replaced """
        args = dict(grid=self.grid, plane_z=self.plane_z, domain=self.domain,
                    wavelengths=self.wavelengths, pitch=self.pitch,
                    plane=self.plane, seed=self.seed)
        args.update(kwargs)
        return FieldState(self.envelopes if envelopes is None else envelopes,
                          **args)

    def split(self):
        """ One single-envelope FieldState per envelope """
        return tuple(self.replace([a], wavelengths=[lam], pitch=[p])
                     for a, lam, p in zip(self.envelopes, self.wavelengths,
                                          self.pitch))

    def cellVolume(self, j=0):
        """ Volume of a lattice cell of envelope j in the current plane """
        vol = float(np.prod(self.pitch[j]))
        if self.grid.has_time:
            vol *= self.grid.dt
        return vol

    def _fourierScale(self):
        scale = 1.
        for n, step in zip(self.grid.shape, self.grid.spacings()):
            scale *= step * np.sqrt(n / (2 * np.pi))
        return scale

    def toFourier(self):
        """ Fourier view a(q, Omega), FFT order on every axis """
        if self.domain == FOURIER:
            return self
        scale = self._fourierScale()
        return self.replace([scipy.fft.fftn(a, norm="ortho") * scale
                             for a in self.envelopes], domain=FOURIER)

    def toReal(self):
        """ Real-space view a(x, t) """
        if self.domain == REAL:
            return self
        scale = self._fourierScale()
        return self.replace([scipy.fft.ifftn(a / scale, norm="ortho")
                             for a in self.envelopes], domain=REAL)

    def photonSum(self, j=None):
        """
        Sum of |a|^2 dV over the lattice (Wigner photon number including the
        vacuum half per cell), for envelope j or all envelopes.
        """
        real = self.toReal()
        idx = range(self.n_envelopes) if j is None else [j]
        return sum(np.sum(np.abs(real.envelopes[i]) ** 2) * real.cellVolume(i)
                   for i in idx)


@dataclass(frozen=True)
class TrajectorySeed:
    """
    Reproducible random stream of one trajectory: a Philox counter-based
    generator keyed by (master_seed, trajectory_index).
    """
    master_seed: int
    trajectory_index: int

    def generator(self, tag=0):
        """
        Independent stream for this trajectory. Tag 0 is the input vacuum;
        other tags feed detection noise (loss, filters).
        """
        seq = np.random.SeedSequence(entropy=int(self.master_seed),
                                     spawn_key=(int(self.trajectory_index),
                                                int(tag)))
        return np.random.Generator(np.random.Philox(seq))


def complexGaussian(rng, shape, variance):
    """
    Circular complex Gaussian samples with <|a|^2> = variance, by Box-Muller
    from two uniform draws: |a|^2 = -variance ln(1-u1), arg a = 2 pi u2.

    INPUT:
        rng - numpy Generator
        shape - output shape
        variance - mean squared modulus

    OUTPUT:
        complex128 array
    """
    u = rng.random((2,) + tuple(shape))
    radius = np.sqrt(-variance * np.log1p(-u[0]))
    return radius * np.exp(2j * np.pi * u[1])


def sampleVacuum(grid, seed, n_envelopes=2, wavelengths=None):
    """
    Wigner vacuum input: independent circular complex Gaussian noise per
    real-space cell with <|a|^2> = 1/(2 dV).

    INPUT:
        grid - GridSpec
        seed - TrajectorySeed
        n_envelopes - 2 for type II, 1 for degenerate type I; defaults 2
        wavelengths - per-envelope wavelengths (m); defaults NaN

    OUTPUT:
        state - FieldState at z = 0 in real space
    """
    rng = seed.generator(0)
    variance = 1. / (2. * grid.cell_volume)
    envelopes = [complexGaussian(rng, grid.shape, variance)
                 for _ in range(n_envelopes)]
    return FieldState(envelopes, grid, 0., REAL, wavelengths, seed=seed)


def vacuumLike(state, rng):
    """
    Fresh vacuum envelopes with the lattice and pitch of `state`.
    """
    return [complexGaussian(rng, a.shape, 1. / (2. * state.cellVolume(j)))
            for j, a in enumerate(state.envelopes)]


class PumpEvolution(object):
    """
    Undepleted pump inside the crystal: the Gaussian spectrum at z = 0 times
    exp(i delta_0(q, Omega) z). The real-space peak at the entrance is A_p.

    INPUT:
        grid - GridSpec
        crystal - CrystalParams
        pump - PumpParams
        frame - "pump" (co-moving, default) or "lab"
        plane_wave - use the constant A_p; defaults to pump.plane_wave
    """
    def __init__(self, grid, crystal, pump, frame="pump", plane_wave=None):
        self.grid = grid
        self.pump = pump
        self.plane_wave = pump.plane_wave if plane_wave is None else plane_wave
        if self.plane_wave:
            return

        x, y, t = grid.realCoordinates()
        profile = pump.A_p * np.exp(-(x ** 2 + y ** 2) / pump.w_0 ** 2)
        if grid.has_time:
            profile = profile * np.exp(-t ** 2 / pump.tau_0 ** 2)
        profile = np.broadcast_to(profile, grid.shape).astype(np.complex128)

        q_x, q_y, Om = grid.waveVectors()
        self._detuning = detuning(0, (q_x, q_y), Om, crystal, frame=frame)
        self._spectrum = scipy.fft.fftn(profile)

    def at(self, z):
        """
        Complex pump lattice at depth z (or the scalar A_p for a plane wave).
        """
        if self.plane_wave:
            return self.pump.A_p
        return scipy.fft.ifftn(self._spectrum * np.exp(1j * self._detuning * z))


def pumpEnvelope(z, grid, crystal, pump, frame="pump", plane_wave=None):
    """
    Pump envelope A_0 at depth z on the lattice.

    INPUT:
        z - depth in the crystal, 0 <= z <= l_c (m)
        grid - GridSpec
        crystal - CrystalParams
        pump - PumpParams
        frame - "pump" or "lab"; defaults "pump"
        plane_wave - force the constant A_p; defaults pump.plane_wave

    OUTPUT:
        complex lattice (or scalar A_p in plane-wave mode)
    """
    if not 0 <= z <= crystal.l_c * (1 + 1e-12):
        raise ValueError("Pump depth must lie in [0, l_c]")
    return PumpEvolution(grid, crystal, pump, frame, plane_wave).at(z)
