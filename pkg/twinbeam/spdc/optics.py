""" optics.py

Module containing the linear optics between the crystal exit face and the
detectors: the f-f lens transform to the far field, 2f-2f imaging of a plane
inside the crystal with a transverse idler shift, Fresnel steps in free
space, and the lossy elements of the detection chain (interference filter,
finite efficiency).

Lens phase factors are omitted; only photon counts are measured downstream.

"""

from dataclasses import dataclass

import numpy as np
import scipy.fft

from .fields import REAL, vacuumLike
from .misc import ConfigError

FAR = "FarField_f_f"
NEAR = "NearField_2f2f"
FREE = "FreeSpace"
KINDS = (FAR, NEAR, FREE)


@dataclass(frozen=True)
class OpticalPath:
    """
    Optical system after the crystal. delta_z is the depth of the imaged
    plane behind the exit face (near field) or the Fresnel distance (free
    space); delta_y shifts the idler detector along the walk-off axis.
    """
    kind: str = FAR
    f: float = None
    delta_z: float = 0.
    delta_y: float = 0.
    wavelengths: tuple = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError("Invalid optical path",
                              ["optics.kind: must be one of %s" % (KINDS,)])
        if self.kind != FREE and self.f is not None and not self.f > 0:
            raise ConfigError("Invalid optical path",
                              ["optics.f: must be > 0 for a lens system"])

    def diagnostics(self, crystal):
        out = []
        if self.kind == FAR and self.f is None:
            out.append("optics.f: required for the far-field system")
        if self.kind == NEAR and abs(self.delta_z) > crystal.l_c:
            out.append("optics.delta_z: |%.4g| m exceeds the crystal length "
                       "%.4g m" % (self.delta_z, crystal.l_c))
        if self.kind == NEAR and crystal.n_envelopes != 2:
            out.append("optics.kind: near-field imaging needs a type II "
                       "crystal")
        return out

    def toDict(self):
        out = {"kind": self.kind, "f": self.f, "delta_z": self.delta_z,
               "delta_y": self.delta_y}
        if self.wavelengths is not None:
            out["wavelengths"] = list(self.wavelengths)
        return out


def _walkOffAxis(grid):
    return 0 if grid.dims == "X_T" else 1


def _transverseFrequencies(state, j):
    """ *INTERNAL FUNCTION*
    Broadcastable q vectors of envelope j on the transverse lattice axes,
    using the envelope's own pitch.
    """
    grid = state.grid
    ndim = len(grid.shape)
    out = []
    for ax, step in zip(grid.transverse_axes, state.pitch[j]):
        shape = [1] * ndim
        shape[ax] = grid.shape[ax]
        q = 2 * np.pi * np.fft.fftfreq(grid.shape[ax], step)
        out.append(q.reshape(shape))
    return out


def _transverseMultiply(state, multipliers):
    """ *INTERNAL FUNCTION*
    Multiplies each envelope's transverse spectrum by its multiplier.
    """
    axes = state.grid.transverse_axes
    real = state.toReal()
    out = []
    for a, m in zip(real.envelopes, multipliers):
        spec = scipy.fft.fftn(a, axes=axes)
        out.append(scipy.fft.ifftn(spec * m, axes=axes))
    return real.replace(out)


def _wavelengths(state, path=None):
    lam = state.wavelengths if path is None or path.wavelengths is None \
        else path.wavelengths
    if len(lam) != state.n_envelopes or not np.all(np.isfinite(lam)):
        raise ValueError("Every envelope needs a wavelength for free-space "
                         "optics")
    return lam


def freeSpace(state, distance, wavelengths=None):
    """
    Paraxial Fresnel propagation of every envelope over `distance` (m);
    negative distances propagate backwards. Multiplies the transverse
    spectrum by exp(-i q^2 distance / 2k) with k the vacuum wavenumber.

    INPUT:
        state - FieldState in real space
        distance - propagation distance (m)
        wavelengths - per-envelope wavelengths; defaults state.wavelengths

    OUTPUT:
        state - propagated FieldState
    """
    lam = state.wavelengths if wavelengths is None else wavelengths
    if len(lam) != state.n_envelopes or not np.all(np.isfinite(lam)):
        raise ValueError("Every envelope needs a wavelength for free-space "
                         "optics")
    mults = []
    for j, wl in enumerate(lam):
        q2 = sum(q ** 2 for q in _transverseFrequencies(state, j))
        mults.append(np.exp(-1j * wl * q2 * distance / (4 * np.pi)))
    out = _transverseMultiply(state, mults)
    return out.replace(plane_z=state.plane_z + distance)


def shiftTransverse(state, shift, envelope=1):
    """
    Translates one envelope by `shift` (m) along the walk-off axis with the
    Fourier ramp exp(-i q_y shift); the shift is not quantized to the
    lattice.

    INPUT:
        state - FieldState
        shift - translation (m)
        envelope - index of the envelope to shift; defaults 1 (idler)

    OUTPUT:
        state - FieldState with the envelope translated
    """
    axis = _walkOffAxis(state.grid)
    mults = []
    for j in range(state.n_envelopes):
        if j != envelope or shift == 0:
            mults.append(1.)
            continue
        q = _transverseFrequencies(state, j)[axis]
        mults.append(np.exp(-1j * q * shift))
    return _transverseMultiply(state, mults)


def toFarField(state, path):
    """
    Lens f-f transform of the crystal-exit field to the focal plane. The
    transverse Fourier index q lands at x = (lambda_j f / 2 pi) q, so the
    far-field pitch is lambda_j f / (N dx) per envelope and the amplitudes
    are rescaled to keep sum |a|^2 dV.

    INPUT:
        state - FieldState at the crystal exit, real space
        path - OpticalPath with kind FarField_f_f

    OUTPUT:
        state - FieldState in the far-field plane (centred lattice)
    """
    if path.kind != FAR or path.f is None:
        raise ValueError("toFarField needs a far-field path with a focal "
                         "length")
    real = state.toReal()
    grid = state.grid
    axes = grid.transverse_axes
    lam = _wavelengths(state, path)

    envelopes, pitches = [], []
    for a, wl, pitch in zip(real.envelopes, lam, real.pitch):
        spec = scipy.fft.fftshift(scipy.fft.fftn(a, axes=axes, norm="ortho"),
                                  axes=axes)
        new_pitch = tuple(wl * path.f / (grid.shape[ax] * step)
                          for ax, step in zip(axes, pitch))
        scale = np.prod([np.sqrt(old / new)
                         for old, new in zip(pitch, new_pitch)])
        envelopes.append(spec * scale)
        pitches.append(new_pitch)

    return real.replace(envelopes, pitch=pitches, plane="far",
                        plane_z=np.nan)


def farFieldAxis(state, j=0, axis=0):
    """ Centred coordinate vector (m) of transverse axis `axis` of envelope j """
    n = state.grid.shape[axis]
    return (np.arange(n) - n // 2) * state.pitch[j][axis]


def imageNearField(state, path):
    """
    2f-2f imaging of the type II output: signal and idler separated at a
    polarizing beam splitter, both back-propagated by delta_z to a plane
    inside the crystal, and the idler translated by delta_y along the
    walk-off axis.

    INPUT:
        state - two-envelope FieldState at the crystal exit, real space
        path - OpticalPath with kind NearField_2f2f

    OUTPUT:
        (signal, idler) - single-envelope FieldStates in the detector planes
    """
    if path.kind != NEAR:
        raise ValueError("imageNearField needs a near-field path")
    if state.n_envelopes != 2:
        raise ValueError("Near-field imaging separates two envelopes; got %d"
                         % state.n_envelopes)

    lam = _wavelengths(state, path)
    grid = state.grid
    for wl, pitch in zip(lam, state.pitch):
        for ax, step in zip(grid.transverse_axes, pitch):
            q_max = np.pi / step
            dq = 2 * np.pi / (grid.shape[ax] * step)
            if wl * abs(path.delta_z) * q_max * dq / (2 * np.pi) > np.pi:
                raise ValueError("delta_z = %.4g m aliases the Fresnel phase "
                                 "on a lattice of pitch %.4g m" %
                                 (path.delta_z, step))

    out = state.toReal()
    if path.delta_z != 0:
        out = freeSpace(out, -path.delta_z, lam)
    if path.delta_y != 0:
        out = shiftTransverse(out, path.delta_y, envelope=1)
    out = out.replace(plane="near")
    return out.split()


def applyPath(state, path):
    """
    Dispatches the optical path: a far-field state, a (signal, idler) pair
    for near-field imaging, or a free-space propagated state.
    """
    if path.kind == FAR:
        return toFarField(state, path)
    if path.kind == NEAR:
        return imageNearField(state, path)
    return freeSpace(state, path.delta_z, path.wavelengths)


def spectralFilter(state, omega_max, seed=None):
    """
    Interference filter of half-width omega_max (rad/s) on the time axis.
    Rejected frequency components are replaced by fresh vacuum so the field
    keeps its Wigner vacuum floor.

    INPUT:
        state - FieldState with a time axis
        omega_max - filter half-width (rad/s)
        seed - TrajectorySeed for the vacuum stream; defaults state.seed

    OUTPUT:
        state - filtered FieldState in real space
    """
    grid = state.grid
    if not grid.has_time:
        raise ValueError("Spectral filtering needs a time axis")
    if not omega_max > 0:
        raise ValueError("Filter half-width must be > 0")
    seed = state.seed if seed is None else seed
    if seed is None:
        raise ValueError("A trajectory seed is needed for the filter vacuum")

    real = state.toReal()
    t_ax = grid.time_axis
    Om = grid.frequency("t")
    shape = [1] * len(grid.shape)
    shape[t_ax] = Om.size
    reject = (np.abs(Om) > omega_max).reshape(shape)

    fresh = vacuumLike(real, seed.generator(1))
    out = []
    for a, v in zip(real.envelopes, fresh):
        spec = scipy.fft.fft(a, axis=t_ax, norm="ortho")
        vac = scipy.fft.fft(v, axis=t_ax, norm="ortho")
        spec = np.where(reject, vac, spec)
        out.append(scipy.fft.ifft(spec, axis=t_ax, norm="ortho"))
    return real.replace(out, domain=REAL)


def applyLoss(state, eta, seed=None):
    """
    Beam splitter loss of transmission eta on every envelope:
    a -> sqrt(eta) a + sqrt(1 - eta) v with v fresh vacuum.

    INPUT:
        state - FieldState
        eta - transmission in [0, 1]
        seed - TrajectorySeed for the vacuum stream; defaults state.seed

    OUTPUT:
        state - attenuated FieldState in real space
    """
    if not 0 <= eta <= 1:
        raise ValueError("Efficiency must lie in [0, 1]")
    real = state.toReal()
    if eta == 1:
        return real
    seed = state.seed if seed is None else seed
    if seed is None:
        raise ValueError("A trajectory seed is needed for the loss vacuum")

    fresh = vacuumLike(real, seed.generator(2))
    out = [np.sqrt(eta) * a + np.sqrt(1 - eta) * v
           for a, v in zip(real.envelopes, fresh)]
    return real.replace(out)
