""" stats.py

Module containing classes and functions used to turn detector-plane fields
into photon-count statistics: pixel masks, Wigner counts, blocked streaming
moments with jackknife errors, the Wigner to normal-ordering corrections,
correlation maps and detection efficiency.

Counts are per lattice cell: a pixel of M cells carries a Wigner vacuum
floor of M/2 in its mean and M/4 in its variance.

"""

from dataclasses import dataclass, field, replace

import numpy as np
import pandas as pd

from . import misc

NEAR = "NearField"
FAR = "FarField"


@dataclass(frozen=True)
class DetectorSpec:
    """
    Two pixels of size d. Centres are positions along the walk-off axis, or
    (x, y) pairs on two-dimensional lattices. In the far field with
    `symmetric` the second pixel is the point reflection of the first;
    in the near field the second centre defaults to the first.
    T_d of None integrates the whole time window.
    """
    d: float
    center_1: object = 0.
    center_2: object = None
    T_d: float = None
    plane: str = FAR
    eta: float = 1.
    symmetric: bool = True

    def __post_init__(self):
        out = []
        if not self.d > 0:
            out.append("detector.d: must be > 0")
        if self.plane not in (NEAR, FAR):
            out.append("detector.plane: must be NearField or FarField")
        if not 0 <= self.eta <= 1:
            out.append("detector.eta: must lie in [0, 1]")
        if self.T_d is not None and not self.T_d > 0:
            out.append("detector.T_d: must be > 0")
        if out:
            raise misc.ConfigError("Invalid detector", out)

    def resolvedCenters(self):
        """ (centre_1, centre_2) as (x, y) pairs """
        c1 = _asPair(self.center_1)
        if self.center_2 is not None:
            return c1, _asPair(self.center_2)
        if self.plane == FAR and self.symmetric:
            return c1, (-c1[0], -c1[1])
        return c1, c1

    def centerOffset(self):
        """ x_1 - x_2, scalar on the walk-off axis or an (x, y) pair """
        c1, c2 = self.resolvedCenters()
        off = (c1[0] - c2[0], c1[1] - c2[1])
        return off[1] if not isinstance(self.center_1, (tuple, list)) else off

    def withSize(self, d):
        return replace(self, d=d)


def _asPair(c):
    if isinstance(c, (tuple, list)):
        return float(c[0]), float(c[1])
    return 0., float(c)


def _asState(states):
    """ *INTERNAL FUNCTION*
    Joins a (signal, idler) pair of single-envelope states into one state.
    """
    if not isinstance(states, (tuple, list)):
        return states
    first = states[0]
    return first.replace([s.envelopes[0] for s in states],
                         wavelengths=[s.wavelengths[0] for s in states],
                         pitch=[s.pitch[0] for s in states])


def _axisMask(n, pitch, center, d, what):
    """ *INTERNAL FUNCTION*
    Cells of a centred lattice axis whose centres fall in [c - d/2, c + d/2).
    """
    if d < pitch * (1 - 1e-9):
        raise ValueError("Pixel size %.4g m is below the lattice pitch %.4g m"
                         % (d, pitch))
    x = (np.arange(n) - n // 2) * pitch
    lo, hi = x[0] - pitch / 2, x[-1] + pitch / 2
    if center - d / 2 < lo - 1e-9 * pitch or center + d / 2 > hi + 1e-9 * pitch:
        raise ValueError("%s [%.4g, %.4g] m lies outside the lattice window "
                         "[%.4g, %.4g] m" % (what, center - d / 2,
                                             center + d / 2, lo, hi))
    eps = 1e-9 * pitch
    return (x - center >= -d / 2 - eps) & (x - center < d / 2 - eps)


def _timeMask(grid, T_d):
    if not grid.has_time:
        return None
    if T_d is None:
        return np.ones(grid.N_t, dtype=bool)
    if T_d > grid.T_win * (1 + 1e-12):
        raise ValueError("Detection time %.4g s exceeds the window %.4g s" %
                         (T_d, grid.T_win))
    t = grid.axis("t")
    eps = 1e-9 * grid.dt
    return (t >= -T_d / 2 - eps) & (t < T_d / 2 - eps)


def _cellMask(state, j, center, d, T_d, what):
    """ *INTERNAL FUNCTION*
    Boolean lattice mask of a pixel on envelope j.
    """
    grid = state.grid
    pitch = state.pitch[j]
    if grid.n_transverse == 1:
        masks = [_axisMask(grid.shape[0], pitch[0], center[1], d, what)]
    else:
        masks = [_axisMask(grid.shape[0], pitch[0], center[0], d, what),
                 _axisMask(grid.shape[1], pitch[1], center[1], d, what)]
    t_mask = _timeMask(grid, T_d)
    if t_mask is not None:
        masks.append(t_mask)
    out = masks[0]
    for m in masks[1:]:
        out = np.multiply.outer(out, m)
    return out


def _mirror(mask, axes):
    """ *INTERNAL FUNCTION*
    Point reflection x -> -x on centred transverse axes (index i -> N - i).
    """
    for ax in axes:
        if mask.take(0, axis=ax).any():
            raise ValueError("Pixel touches the lattice edge cell, which has "
                             "no mirror image")
        mask = np.roll(np.flip(mask, axis=ax), 1, axis=ax)
    return mask


@dataclass(frozen=True)
class PixelPair:
    """
    Lattice masks of the two pixels and the envelopes they read.
    """
    mask_1: np.ndarray
    mask_2: np.ndarray
    envelope_1: int
    envelope_2: int

    @property
    def modes(self):
        return np.array([self.mask_1.sum(), self.mask_2.sum()], dtype=float)

    @property
    def overlap(self):
        if self.envelope_1 != self.envelope_2:
            return 0.
        return float((self.mask_1 & self.mask_2).sum())


def pixelCells(state, det):
    """
    Pixel masks of a detector on the lattice of a detector-plane state.
    Pixel 1 reads the first envelope; pixel 2 reads the second envelope,
    or the same one for degenerate type I.

    INPUT:
        state - FieldState (or (signal, idler) pair) in the detector plane
        det - DetectorSpec

    OUTPUT:
        pixels - PixelPair
    """
    state = _asState(state)
    env_2 = 1 if state.n_envelopes == 2 else 0
    c1, c2 = det.resolvedCenters()
    mask_1 = _cellMask(state, 0, c1, det.d, det.T_d, "Pixel 1")
    if det.plane == FAR and det.symmetric and det.center_2 is None and \
            state.pitch[0] == state.pitch[env_2]:
        mask_2 = _mirror(mask_1, state.grid.transverse_axes)
    else:
        mask_2 = _cellMask(state, env_2, c2, det.d, det.T_d, "Pixel 2")
    return PixelPair(mask_1, mask_2, 0, env_2)


def countPhotons(state, det, pixels=None):
    """
    Raw Wigner photon counts of the two pixels, sum |a|^2 dV over the pixel
    cells and the detection window.

    INPUT:
        state - FieldState (or (signal, idler) pair) in real space
        det - DetectorSpec
        pixels - precomputed PixelPair; defaults None

    OUTPUT:
        (N1_W, N2_W)
    """
    state = _asState(state).toReal()
    if pixels is None:
        pixels = pixelCells(state, det)
    out = []
    for mask, j in ((pixels.mask_1, pixels.envelope_1),
                    (pixels.mask_2, pixels.envelope_2)):
        out.append(float(np.sum(np.abs(state.envelopes[j][mask]) ** 2)) *
                   state.cellVolume(j))
    return tuple(out)


def binnedCounts(state, det, map_bin=1):
    """
    Wigner counts of consecutive bins of `map_bin` cells along the walk-off
    axis, integrated over the detection window, for every envelope. On
    two-dimensional lattices the other transverse axis is restricted to a
    band of `map_bin` cells through the origin.

    INPUT:
        state - FieldState in real space
        det - DetectorSpec (T_d)
        map_bin - cells per bin; defaults 1

    OUTPUT:
        counts - 1D array (envelopes concatenated)
        axis - bin-centre positions of the first envelope (m)
        modes - cells per bin (same layout as counts)
    """
    state = _asState(state).toReal()
    grid = state.grid
    walk = 0 if grid.n_transverse == 1 else 1
    n = grid.shape[walk]
    if n % map_bin:
        raise ValueError("map_bin %d does not divide %d cells" % (map_bin, n))

    t_mask = _timeMask(grid, det.T_d)
    counts, modes = [], []
    for j, a in enumerate(state.envelopes):
        dens = np.abs(a) ** 2 * state.cellVolume(j)
        cells = np.ones(grid.shape)
        if t_mask is not None:
            dens = dens[..., t_mask]
            cells = cells[..., t_mask]
        if grid.n_transverse == 2:
            m = grid.shape[0]
            band = slice(m // 2 - map_bin // 2, m // 2 - map_bin // 2 + map_bin)
            dens = dens[band]
            cells = cells[band]
            dens = dens.sum(axis=0)
            cells = cells.sum(axis=0)
        dens = dens.reshape(dens.shape[0], -1).sum(axis=1)
        cells = cells.reshape(cells.shape[0], -1).sum(axis=1)
        counts.append(dens.reshape(n // map_bin, map_bin).sum(axis=1))
        modes.append(cells.reshape(n // map_bin, map_bin).sum(axis=1))

    pitch = state.pitch[0][walk]
    axis = ((np.arange(n) - n // 2) * pitch).reshape(n // map_bin,
                                                     map_bin).mean(axis=1)
    return np.concatenate(counts), axis, np.concatenate(modes)


class StatsAccumulator(object):
    """
    Streaming mean and co-moment of a count vector, kept in blocks
    (block = trajectory index mod n_blocks) so that accumulators merge
    exactly and errors follow from delete-one-block jackknife.

    INPUT:
        dim - length of the count vector
        n_blocks - number of jackknife blocks; defaults 16
        modes - lattice cells behind each component (vacuum floor)
        overlap - cells shared by the two pixels of a pair; defaults 0
    """
    def __init__(self, dim, n_blocks=16, modes=None, overlap=0.):
        if n_blocks < 1:
            raise ValueError("n_blocks must be >= 1")
        self.dim = dim
        self.n_blocks = n_blocks
        self.modes = np.zeros(dim) if modes is None else \
            np.asarray(modes, dtype=float)
        self.overlap = overlap
        self.n = np.zeros(n_blocks, dtype=np.int64)
        self.mean = np.zeros((n_blocks, dim))
        self.m2 = np.zeros((n_blocks, dim, dim))

    @property
    def n_traj(self):
        return int(self.n.sum())

    def add(self, x, index):
        """ Welford update of block index % n_blocks with sample x """
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError("Sample has shape %s, expected (%d,)" %
                             (x.shape, self.dim))
        b = index % self.n_blocks
        self.n[b] += 1
        delta = x - self.mean[b]
        self.mean[b] += delta / self.n[b]
        self.m2[b] += np.outer(delta, x - self.mean[b])
        return self

    @staticmethod
    def _combine(a, b):
        """ *INTERNAL FUNCTION*
        Pairwise merge of (n, mean, m2) moments.
        """
        n_a, mean_a, m2_a = a
        n_b, mean_b, m2_b = b
        if n_a == 0:
            return b
        if n_b == 0:
            return a
        n = n_a + n_b
        delta = mean_b - mean_a
        mean = mean_a + delta * (n_b / n)
        m2 = m2_a + m2_b + np.outer(delta, delta) * (n_a * n_b / n)
        return n, mean, m2

    def merge(self, other):
        """
        Folds another accumulator of the same shape into this one, block by
        block.
        """
        if other.dim != self.dim or other.n_blocks != self.n_blocks:
            raise ValueError("Accumulators differ in shape")
        for b in range(self.n_blocks):
            n, mean, m2 = self._combine(
                (self.n[b], self.mean[b], self.m2[b]),
                (other.n[b], other.mean[b], other.m2[b]))
            self.n[b], self.mean[b], self.m2[b] = n, mean, m2
        return self

    def _moments(self, exclude=None):
        acc = (0, np.zeros(self.dim), np.zeros((self.dim, self.dim)))
        for b in range(self.n_blocks):
            if b == exclude:
                continue
            acc = self._combine(acc, (self.n[b], self.mean[b], self.m2[b]))
        n, mean, m2 = acc
        cov = m2 / (n - 1) if n > 1 else np.full_like(m2, np.nan)
        return n, mean, cov

    def total(self):
        """ (n, mean, unbiased covariance) over all blocks """
        return self._moments()

    def jackknife(self, estimator):
        """
        Delete-one-block jackknife of an estimator.

        INPUT:
            estimator - callable(n, mean, cov) -> dict of values

        OUTPUT:
            values - estimator on all blocks
            errors - dict of standard errors (NaN with fewer than two
                     filled blocks)
        """
        values = estimator(*self.total())
        filled = [b for b in range(self.n_blocks) if self.n[b] > 0]
        if len(filled) < 2 or self.n_traj - self.n[filled].max() < 2:
            return values, {k: np.full_like(np.asarray(v, dtype=float), np.nan)
                            for k, v in values.items()}

        leave = [estimator(*self._moments(exclude=b)) for b in filled]
        n_b = len(filled)
        errors = {}
        for key in values:
            arr = np.array([np.asarray(est[key], dtype=float) for est in leave])
            spread = arr - np.nanmean(arr, axis=0)
            errors[key] = np.sqrt((n_b - 1) / n_b * np.sum(spread ** 2, axis=0))
        return values, errors


@dataclass
class Measurement:
    """
    Normally-ordered photon-number statistics of a pixel pair with jackknife
    standard errors. var_minus is <(dN_-)^2>, self_var_j is <:dN_j^2:> and
    cross_cov is <:dN_1 dN_2:>.
    """
    N1: float
    N2: float
    N_plus: float
    var_minus: float
    ratio: float
    self_var_1: float = np.nan
    self_var_2: float = np.nan
    cross_cov: float = np.nan
    n_traj: int = 0
    std_err: dict = field(default_factory=dict)
    diagnostics: list = field(default_factory=list)

    def shotNoiseBound(self, n_sigma=3.):
        """ 2 cross_cov - self_1 - self_2 <= N_+ within n_sigma errors """
        lhs = 2 * self.cross_cov - self.self_var_1 - self.self_var_2
        err = self.std_err.get("var_minus", 0.)
        return bool(lhs <= self.N_plus + n_sigma * np.nan_to_num(err))

    def asRow(self):
        row = {"N1": self.N1, "N2": self.N2, "N_plus": self.N_plus,
               "var_minus": self.var_minus, "ratio": self.ratio,
               "self_var_1": self.self_var_1, "self_var_2": self.self_var_2,
               "cross_cov": self.cross_cov, "n_traj": self.n_traj}
        for key, err in self.std_err.items():
            row["err_%s" % key] = float(err)
        return row


def _orderedPair(modes, overlap):
    """ *INTERNAL FUNCTION*
    Estimator of the normally-ordered pair statistics from Wigner moments.
    """
    M1, M2 = modes

    def estimator(n, mean, cov):
        N1 = mean[0] - M1 / 2.
        N2 = mean[1] - M2 / 2.
        var_1 = cov[0, 0] - M1 / 4.
        var_2 = cov[1, 1] - M2 / 4.
        cov_12 = cov[0, 1] - overlap / 4.
        var_minus = var_1 + var_2 - 2 * cov_12
        n_plus = N1 + N2
        return {"N1": N1, "N2": N2, "N_plus": n_plus, "var_minus": var_minus,
                "ratio": var_minus / n_plus if n_plus != 0 else np.nan,
                "self_var_1": var_1 - N1, "self_var_2": var_2 - N2,
                "cross_cov": cov_12}
    return estimator


def orderingCorrect(acc, verbose=0):
    """
    Normally-ordered pair statistics from an accumulator of Wigner counts
    (N1_W, N2_W): means lose M_j/2, and Var(N_-) loses
    (M_1 + M_2 - 2 overlap)/4.

    INPUT:
        acc - StatsAccumulator of dimension 2
        verbose - verbosity of function; defaults 0

    OUTPUT:
        meas - Measurement
    """
    if acc.dim != 2:
        raise ValueError("orderingCorrect needs an accumulator of pair counts")
    n = acc.n_traj
    if n < 2:
        raise ValueError("At least two trajectories are needed, got %d" % n)

    values, errors = acc.jackknife(_orderedPair(acc.modes, acc.overlap))
    values = {k: float(v) for k, v in values.items()}
    errors = {k: float(v) for k, v in errors.items()}

    diagnostics = []
    if n < 10:
        diagnostics.append("n_traj = %d < 10: jackknife errors unreliable" % n)

    err_plus = errors["N_plus"]
    if not values["N_plus"] > 3 * np.nan_to_num(err_plus):
        diagnostics.append("N_plus = %.4g consistent with zero: ratio "
                           "undefined" % values["N_plus"])
        values["ratio"] = np.nan
    elif values["ratio"] < -3 * np.nan_to_num(errors["ratio"]):
        diagnostics.append("ratio %.4g below -3 std.err.: unphysical, check "
                           "ordering corrections or statistics" %
                           values["ratio"])

    for txt in diagnostics:
        misc.vprint(txt, verbose)

    return Measurement(n_traj=n, std_err=errors, diagnostics=diagnostics,
                       **values)


def applyEfficiency(meas, eta, mode="general"):
    """
    Detection efficiency eta applied to a measurement.

    "general" thins the counts: means scale by eta, Var(N_-) becomes
    eta^2 Var + eta (1 - eta) <N_+>. "ideal" assumes perfect twin
    correlation: Var(N_-) = eta (1 - eta) <N_+>.

    INPUT:
        meas - Measurement
        eta - efficiency in [0, 1]
        mode - "general" or "ideal"; defaults "general"

    OUTPUT:
        meas - new Measurement
    """
    if not 0 <= eta <= 1:
        raise ValueError("Efficiency must lie in [0, 1]")
    if mode not in ("general", "ideal"):
        raise ValueError("mode must be 'general' or 'ideal'")
    if eta == 1:
        return replace(meas)

    err = dict(meas.std_err)
    n_plus = eta * meas.N_plus
    if mode == "ideal":
        var_minus = eta * (1 - eta) * meas.N_plus
        err["var_minus"] = eta * (1 - eta) * err.get("N_plus", np.nan)
    else:
        var_minus = eta ** 2 * meas.var_minus + eta * (1 - eta) * meas.N_plus
        err["var_minus"] = np.hypot(eta ** 2 * err.get("var_minus", np.nan),
                                    eta * (1 - eta) * err.get("N_plus", np.nan))
    for key in ("N1", "N2", "N_plus"):
        if key in err:
            err[key] = eta * err[key]
    for key in ("self_var_1", "self_var_2", "cross_cov"):
        if key in err:
            err[key] = eta ** 2 * err[key]

    diagnostics = list(meas.diagnostics)
    if n_plus > 0:
        ratio = var_minus / n_plus
        err["ratio"] = eta * err.get("ratio", np.nan) if mode == "general" \
            else 0.
    else:
        ratio = np.nan
        diagnostics.append("eta = 0: no photons detected")

    return replace(meas, N1=eta * meas.N1, N2=eta * meas.N2, N_plus=n_plus,
                   var_minus=var_minus, ratio=ratio,
                   self_var_1=eta ** 2 * meas.self_var_1,
                   self_var_2=eta ** 2 * meas.self_var_2,
                   cross_cov=eta ** 2 * meas.cross_cov,
                   std_err=err, diagnostics=diagnostics)


class CorrelationMap(object):
    """
    Normally-ordered covariance <:dN_i dN_j:> of binned counts.

    INPUT:
        matrix - covariance map
        mean - normally-ordered mean count per bin
        axis - bin-centre positions (m), repeated per envelope
        n_traj - trajectories behind the map
        std_err - jackknife error of the map (or None)
    """
    def __init__(self, matrix, mean, axis, n_traj, std_err=None):
        self.matrix = matrix
        self.mean = mean
        self.axis = axis
        self.n_traj = n_traj
        self.std_err = std_err

    def index(self, x, envelope=0):
        n = self.axis.size
        return envelope * n + int(np.argmin(np.abs(self.axis - x)))

    def row(self, x_fixed, envelope=0, against=None):
        """
        G(x, x_fixed) over the bins of envelope `against` (defaults to the
        other envelope when there are two, else the same one).
        """
        n = self.axis.size
        n_env = self.mean.size // n
        if against is None:
            against = (envelope + 1) % n_env
        col = self.index(x_fixed, envelope)
        return self.matrix[against * n:(against + 1) * n, col]

    def differenceVariance(self, weights_1, weights_2):
        """
        <(dN_-)^2> and <N_+> of two weighted pixels assembled from the map.
        """
        w = np.asarray(weights_1, float) - np.asarray(weights_2, float)
        s = np.asarray(weights_1, float) + np.asarray(weights_2, float)
        var = float(w @ self.matrix @ w + np.sum(w ** 2 * self.mean))
        return var, float(s @ self.mean)


def correlationMap(acc, axis, errors=True):
    """
    Normally-ordered correlation map from an accumulator of binned Wigner
    counts: G = Cov_W - diag(<N_W> - M/4).

    INPUT:
        acc - StatsAccumulator over bins (modes set per bin)
        axis - bin-centre positions (m) of one envelope
        errors - compute jackknife errors; defaults True

    OUTPUT:
        cmap - CorrelationMap
    """
    modes = acc.modes

    def estimator(n, mean, cov):
        return {"G": cov - np.diag(mean - modes / 4.),
                "mean": mean - modes / 2.}

    if errors:
        values, err = acc.jackknife(estimator)
        std_err = err["G"]
    else:
        values, std_err = estimator(*acc.total()), None
    return CorrelationMap(values["G"], values["mean"], np.asarray(axis),
                          acc.n_traj, std_err)


def gaussianFactorization(samples, cell_volume=1.):
    """
    Checks that fourth-order moments of Wigner amplitudes factorize as for
    Gaussian fields: Cov(n_i, n_j) = |<a_i^* a_j>|^2 + |<a_i a_j>|^2 with
    n_i = |a_i|^2 dV.

    INPUT:
        samples - complex array (n_traj, n_cells)
        cell_volume - dV; defaults 1

    OUTPUT:
        dict with measured, predicted, std_err matrices and max_z, the
        largest |measured - predicted| / std_err
    """
    a = np.asarray(samples, dtype=complex)
    n_traj = a.shape[0]
    if n_traj < 10:
        raise ValueError("At least 10 samples are needed")
    a = a - a.mean(axis=0)
    n = np.abs(a) ** 2 * cell_volume
    dn = n - n.mean(axis=0)

    prods = dn[:, :, None] * dn[:, None, :]
    measured = prods.mean(axis=0) * n_traj / (n_traj - 1)
    std_err = prods.std(axis=0, ddof=1) / np.sqrt(n_traj)

    normal = np.conj(a).T @ a / n_traj
    anomalous = a.T @ a / n_traj
    predicted = (np.abs(normal) ** 2 + np.abs(anomalous) ** 2) * \
        cell_volume ** 2

    z = np.abs(measured - predicted) / np.where(std_err > 0, std_err, np.inf)
    return {"measured": measured, "predicted": predicted, "std_err": std_err,
            "max_z": float(np.max(z))}


def measurementTable(measurements, key="d"):
    """
    Collects measurements into a table with one row per entry.

    INPUT:
        measurements - list of (key value, Measurement)
        key - name of the key column; defaults "d"

    OUTPUT:
        DataFrame
    """
    rows = []
    for value, meas in measurements:
        row = {key: value}
        row.update(meas.asRow())
        row["diagnostics"] = "; ".join(meas.diagnostics)
        rows.append(row)
    return pd.DataFrame(rows)
