""" grid.py

Module containing the space-time lattice specification and its real-space and
Fourier-space axes.

Real-space coordinates are centred on the lattice (index N/2 is the origin).
Transverse spatial frequencies are q = 2 pi fftfreq, and the temporal
frequency is Omega = -2 pi fftfreq, which follows from the exp(+i Omega t)
kernel of the forward transform.

"""

from dataclasses import dataclass, asdict

import numpy as np

from .misc import ConfigError

DIMS = ("X_T", "XY", "XY_T")


def _isPow2(n):
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class GridSpec:
    """
    Lattice dimensions. For dims X_T the single transverse axis (N_x, L_x) is
    the walk-off (y) axis of the crystal.
    """
    dims: str = "X_T"
    N_x: int = 1024
    N_y: int = 1
    N_t: int = 512
    L_x: float = 6e-3
    L_y: float = 0.
    T_win: float = 12e-12
    N_z: int = 200

    def __post_init__(self):
        out = self.shapeDiagnostics()
        if out:
            raise ConfigError("Invalid grid", out)

    def shapeDiagnostics(self):
        out = []
        if self.dims not in DIMS:
            out.append("grid.dims: must be one of %s" % (DIMS,))
            return out
        for name in self._axisNames():
            n = getattr(self, "N_%s" % name)
            if not _isPow2(int(n)):
                out.append("grid.N_%s: %s is not a power of two" % (name, n))
        if not self.L_x > 0:
            out.append("grid.L_x: must be > 0")
        if "y" in self._axisNames() and not self.L_y > 0:
            out.append("grid.L_y: must be > 0")
        if self.has_time and not self.T_win > 0:
            out.append("grid.T_win: must be > 0")
        if not self.N_z >= 1:
            out.append("grid.N_z: must be >= 1")
        return out

    def _axisNames(self):
        return {"X_T": ("x", "t"), "XY": ("x", "y"),
                "XY_T": ("x", "y", "t")}[self.dims]

    @property
    def has_time(self):
        return self.dims in ("X_T", "XY_T")

    @property
    def n_transverse(self):
        return 1 if self.dims == "X_T" else 2

    @property
    def shape(self):
        return tuple(int(getattr(self, "N_%s" % a)) for a in self._axisNames())

    @property
    def dx(self):
        return self.L_x / self.N_x

    @property
    def dy(self):
        return self.L_y / self.N_y if self.n_transverse == 2 else np.nan

    @property
    def dt(self):
        return self.T_win / self.N_t if self.has_time else np.nan

    @property
    def time_axis(self):
        return len(self.shape) - 1 if self.has_time else None

    @property
    def transverse_axes(self):
        return tuple(range(self.n_transverse))

    @property
    def cell_volume(self):
        vol = self.dx
        if self.n_transverse == 2:
            vol *= self.dy
        if self.has_time:
            vol *= self.dt
        return vol

    def dz(self, l_c):
        return l_c / self.N_z

    def spacings(self):
        return tuple({"x": self.dx, "y": self.dy, "t": self.dt}[a]
                     for a in self._axisNames())

    def axis(self, name):
        """
        Centred real-space coordinate vector of axis `name` ("x", "y", "t").
        """
        n = int(getattr(self, "N_%s" % name))
        step = {"x": self.dx, "y": self.dy, "t": self.dt}[name]
        return (np.arange(n) - n // 2) * step

    def frequency(self, name):
        """
        Fourier coordinate vector in FFT order: q for transverse axes, Omega
        for the time axis.
        """
        n = int(getattr(self, "N_%s" % name))
        step = {"x": self.dx, "y": self.dy, "t": self.dt}[name]
        sign = -1. if name == "t" else 1.
        return sign * 2 * np.pi * np.fft.fftfreq(n, step)

    def _broadcast(self, vec, pos):
        shape = [1] * len(self.shape)
        shape[pos] = vec.size
        return vec.reshape(shape)

    def realCoordinates(self):
        """
        Broadcastable real-space coordinates (x, y, t) with the crystal
        convention: for X_T the lattice axis is returned as y and x is 0.
        """
        names = self._axisNames()
        arrays = {a: self._broadcast(self.axis(a), names.index(a))
                  for a in names}
        if self.dims == "X_T":
            return 0., arrays["x"], arrays["t"]
        return arrays["x"], arrays["y"], arrays.get("t", 0.)

    def waveVectors(self):
        """
        Broadcastable Fourier coordinates (q_x, q_y, Omega) in FFT order with
        the same axis convention as realCoordinates.
        """
        names = self._axisNames()
        arrays = {a: self._broadcast(self.frequency(a), names.index(a))
                  for a in names}
        if self.dims == "X_T":
            return 0., arrays["x"], arrays["t"]
        return arrays["x"], arrays["y"], arrays.get("t", 0.)

    def conjugateIndex(self):
        """
        Index arrays mapping each Fourier cell k to the cell of -k, as a tuple
        usable for fancy indexing of a Fourier lattice.
        """
        idx = [(-np.arange(n)) % n for n in self.shape]
        return np.ix_(*idx)

    def validate(self, scales, pump=None):
        """
        Checks Nyquist and window coverage against the physical scales.

        INPUT:
            scales - DerivedScales
            pump - PumpParams; window checks are skipped for plane waves

        OUTPUT:
            list of diagnostics (empty when valid)
        """
        out = self.shapeDiagnostics()
        if out:
            return out

        q_max = scales.q_R + 4 * scales.q_0
        walk_axis = "x" if self.dims == "X_T" else "y"
        for name, step in (("x", self.dx), ("y", self.dy)):
            if name == "y" and self.n_transverse == 1:
                continue
            limit = q_max + (scales.q_C if name == walk_axis else 0.)
            if not np.pi / step > limit:
                out.append("grid.N_%s: Nyquist pi/d%s = %.4g 1/m does not cover "
                           "q_C + q_R + 4 q_0 = %.4g 1/m" %
                           (name, name, np.pi / step, limit))

        if self.has_time and np.isfinite(scales.Omega_0):
            if not np.pi / self.dt > 4 * scales.Omega_0:
                out.append("grid.N_t: Nyquist pi/dt = %.4g rad/s does not cover "
                           "4 Omega_0 = %.4g rad/s" %
                           (np.pi / self.dt, 4 * scales.Omega_0))

        if pump is not None:
            if np.isfinite(pump.w_0):
                if self.L_x < 6 * pump.w_0:
                    out.append("grid.L_x: window %.4g m smaller than 6 w_0 = "
                               "%.4g m" % (self.L_x, 6 * pump.w_0))
                if self.n_transverse == 2 and self.L_y < 6 * pump.w_0:
                    out.append("grid.L_y: window %.4g m smaller than 6 w_0 = "
                               "%.4g m" % (self.L_y, 6 * pump.w_0))
            if self.has_time and np.isfinite(pump.tau_0) and \
                    self.T_win < 6 * pump.tau_0:
                out.append("grid.T_win: window %.4g s smaller than 6 tau_0 = "
                           "%.4g s" % (self.T_win, 6 * pump.tau_0))
        return out

    def toDict(self):
        return asdict(self)
