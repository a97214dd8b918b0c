""" experiment.py

Module containing the experiment pipelines driven by a configuration
document: plane-wave-pump quadratures, Monte Carlo ensembles through the
crystal, optics and detectors, detector-size and imaging-shift scans, the
preset listing and configuration validation.

"""

import contextlib
import copy
import json
import os
import os.path as op
import time
import warnings

import joblib
import numpy as np
import pandas as pd
import scipy

from .._version import __version__
from . import misc, spdcio
from .correlation import pixelCorrelationsPWPA, ratioSurfacePWPA
from .crystal import TYPE_II, deriveScales
from .fields import FieldState
from .misc import ConfigError, EnsembleError, TwinbeamError, ValidityWarning
from .optics import FAR as FAR_PATH, NEAR as NEAR_PATH, OpticalPath, \
    applyLoss, applyPath, spectralFilter
from .propagate import EnsembleConfig, StepScheme, runEnsemble, runTrajectory
from .pwpa import meanIntensityProfile, optimalShifts
from .stats import FAR, NEAR, DetectorSpec, StatsAccumulator, binnedCounts, \
    correlationMap, countPhotons, measurementTable, orderingCorrect, \
    pixelCells

RUN_DEFAULTS = {"n_traj": 1000, "master_seed": 0, "mode": "both",
                "workers": -1, "n_blocks": 16, "allow_partial": False,
                "frame": "pump", "filter_omega": None, "rtol": 1e-4,
                "transverse_dims": 1, "batch_size": None}
DETECTOR_DEFAULTS = {"d_unit": "m", "center": 0., "center_unit": "m",
                     "T_d": None, "eta": 1., "symmetric": True, "map": False,
                     "map_bin": 1, "x_fixed": None}
OPTICS_DEFAULTS = {"f": None, "delta_z": 0., "delta_y": 0., "scan": None}
OUTPUT_DEFAULTS = {"dir": "twinbeam-out", "field_dump": False}

MODE_ALIASES = {"pwpa": "pwpa_analytic", "mc": "monte_carlo",
                "both": "both"}
UNITS = ("m", "x_coh", "x_diff")
PWPA_MAX_BANDWIDTH_RATIO = 1.


def applyOverrides(doc, overrides):
    """
    Sets dotted keys ("run.master_seed") of a configuration; None values
    are skipped.

    INPUT:
        doc - configuration mapping
        overrides - mapping of dotted key -> value

    OUTPUT:
        doc - updated copy
    """
    doc = copy.deepcopy(doc)
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        node = doc
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = value
    return doc


def _axisValues(spec):
    """ *INTERNAL FUNCTION*
    A list of values, or {"start", "stop", "num"} for an even spacing.
    """
    if isinstance(spec, dict):
        return np.linspace(spec["start"], spec["stop"], int(spec["num"]))
    return np.asarray(spec, dtype=float)


class ExperimentConfig(object):
    """
    Resolved experiment: crystal, pump sweep, lattice and the detector,
    optics, run and output settings with defaults filled in.

    INPUT:
        doc - configuration mapping (presets expanded)
    """
    def __init__(self, doc):
        self.doc = copy.deepcopy(doc)
        self.crystal = spdcio.resolveCrystal(doc["crystal"])
        self.pumps = spdcio.resolvePumps(doc["pump"], self.crystal)
        self.grid = spdcio.resolveGrid(doc["grid"])
        self.detector = dict(DETECTOR_DEFAULTS, **doc["detector"])
        self.optics = dict(OPTICS_DEFAULTS, **doc["optics"])
        self.run = dict(RUN_DEFAULTS, **doc["run"])
        self.outputs = dict(OUTPUT_DEFAULTS, **doc.get("outputs", {}))
        self.run["mode"] = MODE_ALIASES.get(self.run["mode"], self.run["mode"])

        out = []
        if self.run["mode"] not in spdcio.MODES:
            out.append("run.mode: must be one of %s" % (spdcio.MODES,))
        if self.run["frame"] not in ("pump", "lab"):
            out.append("run.frame: must be 'pump' or 'lab'")
        if int(self.run["n_traj"]) < 1:
            out.append("run.n_traj: must be >= 1")
        for key in ("d_unit", "center_unit"):
            if self.detector[key] not in UNITS:
                out.append("detector.%s: must be one of %s" % (key, UNITS))
        if not np.size(self.detector["d"]):
            out.append("detector.d: at least one pixel size is needed")
        if self.detector["plane"] not in (NEAR, FAR):
            out.append("detector.plane: must be NearField or FarField")
        if out:
            raise ConfigError("Invalid configuration", out)

    @classmethod
    def load(cls, config_file, overrides=None, verbose=0):
        doc = spdcio.loadConfig(config_file, verbose)
        return cls(applyOverrides(doc, overrides))

    def toDict(self):
        return copy.deepcopy(self.doc)

    @property
    def hash(self):
        return misc.configHash(self.doc)

    @property
    def mode(self):
        return self.run["mode"]

    def scales(self, pump):
        f = self.optics["f"]
        return deriveScales(self.crystal, pump, np.nan if f is None else f)

    def _toMetres(self, value, unit, scales):
        if unit == "m":
            return float(value)
        length = scales.x_coh if unit == "x_coh" else scales.x_diff
        if not np.isfinite(length):
            raise ConfigError("Invalid detector",
                              ["detector: unit %s needs a finite pump waist "
                               "and a focal length" % unit])
        return float(value) * length

    def ringPosition(self, scales):
        """ Far-field position of the signal ring on the walk-off axis """
        return float(scales.farFieldPosition(scales.ringCenter(1) +
                                              scales.ringRadius()))

    def _position(self, value, scales):
        if value == "ring":
            return self.ringPosition(scales) if self.detector["plane"] == FAR \
                else 0.
        return self._toMetres(value, self.detector["center_unit"], scales)

    def dValues(self, scales):
        """ Pixel sizes in metres """
        d = np.atleast_1d(self.detector["d"])
        return np.array([self._toMetres(v, self.detector["d_unit"], scales)
                         for v in d])

    def dUnitLength(self, scales):
        return self._toMetres(1., self.detector["d_unit"], scales)

    def detectorSpec(self, scales, d):
        return DetectorSpec(d=float(d),
                            center_1=self._position(self.detector["center"],
                                                    scales),
                            T_d=self.detector["T_d"],
                            plane=self.detector["plane"],
                            eta=float(self.detector["eta"]),
                            symmetric=bool(self.detector["symmetric"]))

    def xFixed(self, scales):
        value = self.detector["x_fixed"]
        if value is None:
            value = self.detector["center"]
        return self._position(value, scales)

    def opticalPath(self, pump, delta_z=None, delta_y=None):
        """
        OpticalPath of the experiment; "optimal" shifts are resolved from
        the gain.
        """
        dz = self.optics["delta_z"] if delta_z is None else delta_z
        dy = self.optics["delta_y"] if delta_y is None else delta_y
        if "optimal" in (dz, dy):
            dz_opt, dy_opt = optimalShifts(self.crystal,
                                           pump.sigmaP(self.crystal))
            dz = dz_opt if dz == "optimal" else dz
            dy = dy_opt if dy == "optimal" else dy
        wavelengths = (self.crystal.lambda_1,) if self.crystal.degenerate \
            else (self.crystal.lambda_1, self.crystal.lambda_2)
        return OpticalPath(kind=self.optics["kind"], f=self.optics["f"],
                           delta_z=float(dz), delta_y=float(dy),
                           wavelengths=wavelengths)

    def scanAxes(self, scales):
        """ (dz, dy, d) of the imaging-shift scan, or None """
        scan = self.optics["scan"]
        if not scan:
            return None
        dz = _axisValues(scan["dz"])
        dy = _axisValues(scan["dy"])
        if "d" in scan:
            d = self._toMetres(scan["d"], self.detector["d_unit"], scales)
        else:
            d_values = self.dValues(scales)
            d = d_values[np.argmin(np.abs(d_values - 2 * scales.x_coh))]
        return dz, dy, d

    def ensembleConfig(self, pump):
        scheme = StepScheme(frame=self.run["frame"])
        return EnsembleConfig(self.crystal, pump, self.grid, scheme,
                              int(self.run["master_seed"]))

    def metadata(self):
        return {"config_hash": self.hash,
                "master_seed": int(self.run["master_seed"]),
                "n_traj": int(self.run["n_traj"]),
                "grid": self.grid.toDict()}


@contextlib.contextmanager
def _stage(name, verbose=0):
    """ *INTERNAL FUNCTION*
    Tags errors escaping a pipeline stage with the stage name.
    """
    misc.vprint("Stage: %s" % name, verbose, debug=True)
    try:
        yield
    except (TwinbeamError, ValueError) as err:
        if getattr(err, "stage", None) is None:
            err.stage = name
        raise


def _zeroState(config):
    """ *INTERNAL FUNCTION*
    Empty crystal-exit field used to lay out detector-plane lattices.
    """
    crystal = config.crystal
    wavelengths = (crystal.lambda_1,) if crystal.degenerate else \
        (crystal.lambda_1, crystal.lambda_2)
    zeros = [np.zeros(config.grid.shape, dtype=complex)
             for _ in wavelengths]
    return FieldState(zeros, config.grid, crystal.l_c,
                      wavelengths=wavelengths)


def _pwpaTable(config, pump, scales, d_values, verbose=0):
    """ *INTERNAL FUNCTION*
    Plane-wave-pump pixel statistics for every pixel size.
    """
    crystal = config.crystal
    dims = int(config.run["transverse_dims"])
    path = config.opticalPath(pump)
    eta = float(config.detector["eta"])
    resolution = 1.
    if config.detector["plane"] == FAR and np.isfinite(pump.w_0):
        resolution = scales.x_res if dims == 1 else scales.S_diff

    ratios = scales.ratios(crystal, pump)
    wide = [name for name in ("dq0_over_q0", "domega0_over_Omega0")
            if ratios[name] > PWPA_MAX_BANDWIDTH_RATIO]
    if wide:
        warnings.warn("Pump bandwidth not small against the phase-matching "
                      "bandwidth (%s); plane-wave-pump results are "
                      "approximate" % ", ".join("%s = %.3g" % (n, ratios[n])
                                                 for n in wide),
                      ValidityWarning, stacklevel=3)

    rows = []
    unit = config.dUnitLength(scales)
    for d in d_values:
        det = config.detectorSpec(scales, d)
        res = pixelCorrelationsPWPA(det, crystal, pump.sigmaP(crystal), path,
                                    transverse_dims=dims,
                                    omega_cutoff=config.run["filter_omega"],
                                    resolution=resolution,
                                    rtol=config.run["rtol"], verbose=verbose)
        row = {"d": d, "d_scaled": d / unit}
        row.update(res.asRow())
        row["ratio_eta"] = eta * res.ratio + 1 - eta
        rows.append(row)
    return pd.DataFrame(rows)


def _peakNear(axis, values, x):
    """ *INTERNAL FUNCTION*
    Index of the local maximum closest to position x.
    """
    i = int(np.argmin(np.abs(axis - x)))
    span = max(2, axis.size // 64)
    lo, hi = max(0, i - span), min(axis.size, i + span + 1)
    return lo + int(np.nanargmax(values[lo:hi]))


def mapRows(cmap, x_fixed, degenerate):
    """
    Twin and self rows of a correlation map through x_fixed, with the
    height and FWHM of the peaks at -x_fixed (twin) and +x_fixed (self).

    INPUT:
        cmap - CorrelationMap
        x_fixed - fixed position (m)
        degenerate - single-envelope (type I) map

    OUTPUT:
        table - DataFrame with columns x, twin, self (and errors)
        peaks - dict of heights and widths
    """
    axis = cmap.axis
    self_row = cmap.row(x_fixed, 0, against=0)
    twin_row = self_row if degenerate else cmap.row(x_fixed, 0, against=1)
    i_twin = _peakNear(axis, twin_row, -x_fixed)
    i_self = _peakNear(axis, self_row, x_fixed)
    peaks = {"twin_height": float(twin_row[i_twin]),
             "twin_fwhm": float(misc.peakWidth(axis, twin_row, i_twin)),
             "self_height": float(self_row[i_self]),
             "self_fwhm": float(misc.peakWidth(axis, self_row, i_self))}
    table = pd.DataFrame({"x": axis, "twin": twin_row, "self": self_row})
    if cmap.std_err is not None:
        n = axis.size
        col = cmap.index(x_fixed, 0)
        table["err_self"] = cmap.std_err[:n, col]
        table["err_twin"] = table["err_self"] if degenerate else \
            cmap.std_err[n:2 * n, col]
    return table, peaks


def _monteCarlo(config, pump, d_values, with_map=False, scan=None,
                verbose=0):
    """ *INTERNAL FUNCTION*
    Runs the ensemble once and reduces every trajectory to the pixel counts
    of all pixel sizes, the binned counts of the correlation map and the
    counts over the imaging-shift scan.
    """
    crystal, grid, run = config.crystal, config.grid, config.run
    scales = config.scales(pump)

    # 1. Check the lattice resolves the configuration
    diagnostics = grid.validate(scales, pump)
    if diagnostics:
        raise ConfigError("Grid does not resolve the configuration",
                          diagnostics)

    # 2. Pixel layout on an empty detector-plane field
    path = config.opticalPath(pump)
    template = applyPath(_zeroState(config), path)
    detectors = [config.detectorSpec(scales, d) for d in d_values]
    pixels = [pixelCells(template, det) for det in detectors]
    n_blocks = int(run["n_blocks"])
    accs = [StatsAccumulator(2, n_blocks, px.modes, px.overlap)
            for px in pixels]

    map_bin = int(config.detector["map_bin"])
    if with_map:
        _, axis, modes = binnedCounts(template, detectors[0], map_bin)
        map_acc = StatsAccumulator(modes.size, n_blocks, modes)

    scan_paths = []
    if scan is not None:
        dz_list, dy_list, d_scan = scan
        scan_det = config.detectorSpec(scales, d_scan)
        scan_px = pixelCells(template, scan_det)
        scan_paths = [[config.opticalPath(pump, dz, dy) for dy in dy_list]
                      for dz in dz_list]
        scan_accs = [[StatsAccumulator(2, n_blocks, scan_px.modes,
                                       scan_px.overlap) for _ in dy_list]
                     for _ in dz_list]

    filter_omega = run["filter_omega"]
    eta = float(config.detector["eta"])

    # 3. Per-trajectory reduction, run inside the workers
    def reducer(state):
        if filter_omega is not None and grid.has_time:
            state = spectralFilter(state, filter_omega)
        if eta < 1:
            state = applyLoss(state, eta)
        plane = applyPath(state, path)
        out = {"pairs": np.array([countPhotons(plane, det, px)
                                  for det, px in zip(detectors, pixels)])}
        if with_map:
            out["map"] = binnedCounts(plane, detectors[0], map_bin)[0]
        if scan_paths:
            out["scan"] = np.array([[countPhotons(applyPath(state, p),
                                                  scan_det, scan_px)
                                     for p in row] for row in scan_paths])
        return out

    # 4. Accumulate in trajectory-index order
    partial, failures = False, {}
    ensemble = runEnsemble(int(run["n_traj"]), config.ensembleConfig(pump),
                           reducer, n_jobs=int(run["workers"]),
                           batch_size=run["batch_size"], verbose=verbose)
    try:
        for index, res in ensemble:
            for acc, counts in zip(accs, res["pairs"]):
                acc.add(counts, index)
            if with_map:
                map_acc.add(res["map"], index)
            if scan_paths:
                for acc_row, counts_row in zip(scan_accs, res["scan"]):
                    for acc, counts in zip(acc_row, counts_row):
                        acc.add(counts, index)
    except EnsembleError as err:
        if not run["allow_partial"]:
            raise
        partial, failures = True, err.failures
        misc.vprint("Keeping partial ensemble: %s" % err, verbose)

    # 5. Normally-ordered statistics
    out = {"measurements": [(d, orderingCorrect(acc, verbose))
                            for d, acc in zip(d_values, accs)],
           "partial": partial, "failures": failures}
    if with_map:
        out["map"] = correlationMap(map_acc, axis)
    if scan_paths:
        ratio = np.empty((len(dz_list), len(dy_list)))
        err = np.empty_like(ratio)
        for i, acc_row in enumerate(scan_accs):
            for j, acc in enumerate(acc_row):
                meas = orderingCorrect(acc)
                ratio[i, j] = meas.ratio
                err[i, j] = meas.std_err["ratio"]
        out["surface"] = (ratio, err)
    return out


def scanDetectorSize(config, d_list=None, pump_index=0, verbose=0):
    """
    Monte Carlo noise ratio against pixel size; one ensemble is shared by
    every size (counts are re-binned, not re-simulated).

    INPUT:
        config - ExperimentConfig
        d_list - pixel sizes (m); defaults the configured sizes
        pump_index - entry of the pump sweep; defaults 0
        verbose - verbosity of function; defaults 0

    OUTPUT:
        table - DataFrame with one Measurement row per size
    """
    label, pump = config.pumps[pump_index]
    scales = config.scales(pump)
    d_values = config.dValues(scales) if d_list is None else \
        np.asarray(d_list, dtype=float)
    with _stage("monte carlo d-scan %s" % label, verbose):
        mc = _monteCarlo(config, pump, d_values, verbose=verbose)
    table = measurementTable(mc["measurements"])
    table.insert(1, "d_scaled", table["d"] / config.dUnitLength(scales))
    return table


def scanDzDy(config, dz_list=None, dy_list=None, pump_index=0,
             monte_carlo=False, d=None, verbose=0):
    """
    Near-field noise ratio over a lattice of (delta_z, delta_y) imaging
    shifts from the plane-wave-pump quadrature, and optionally from the
    Monte Carlo ensemble.

    INPUT:
        config - ExperimentConfig of a type II near-field experiment
        dz_list, dy_list - shift lattices (m); default optics.scan
        pump_index - entry of the pump sweep; defaults 0
        monte_carlo - also run the ensemble; defaults False
        d - pixel size (m); defaults the scan size
        verbose - verbosity of function; defaults 0

    OUTPUT:
        dict with "dz", "dy", "pwpa" (ratio matrix), "minimum"
        (dz, dy, ratio), "optimal" (dz, dy) and, with monte_carlo,
        "mc" and "mc_err"
    """
    crystal = config.crystal
    if crystal.phase_match_type != TYPE_II or \
            config.detector["plane"] != NEAR:
        raise ConfigError("Invalid scan", ["optics.scan: the imaging-shift "
                                           "scan needs a type II crystal in "
                                           "the near field"])
    label, pump = config.pumps[pump_index]
    scales = config.scales(pump)
    axes = config.scanAxes(scales)
    if axes is None and (dz_list is None or dy_list is None):
        raise ConfigError("Invalid scan", ["optics.scan: shift lattices "
                                           "required"])
    dz_list = axes[0] if dz_list is None else np.asarray(dz_list, float)
    dy_list = axes[1] if dy_list is None else np.asarray(dy_list, float)
    if d is None:
        d = axes[2] if axes is not None else config.dValues(scales)[0]

    det = config.detectorSpec(scales, d)
    sigma_p = pump.sigmaP(crystal)
    with _stage("pwpa surface %s" % label, verbose):
        ratio, minimum = ratioSurfacePWPA(
            det, crystal, sigma_p, dz_list, dy_list,
            transverse_dims=int(config.run["transverse_dims"]),
            omega_cutoff=config.run["filter_omega"],
            rtol=config.run["rtol"], verbose=verbose)
    out = {"dz": dz_list, "dy": dy_list, "d": d, "pwpa": ratio,
           "minimum": minimum, "optimal": optimalShifts(crystal, sigma_p)}

    if monte_carlo:
        with _stage("monte carlo surface %s" % label, verbose):
            mc = _monteCarlo(config, pump, [d], scan=(dz_list, dy_list, d),
                             verbose=verbose)
        out["mc"], out["mc_err"] = mc["surface"]
    return out


def _slug(label):
    return label.replace("=", "-").replace(" ", "_")


def runExperiment(config, out_dir=None, verbose=0):
    """
    Runs the configured pipelines for every entry of the pump sweep and
    writes plot-ready tables, matrices and metadata.json.

    INPUT:
        config - ExperimentConfig
        out_dir - output directory; defaults outputs.dir
        verbose - verbosity of function; defaults 0

    OUTPUT:
        results - dict of sweep label -> dict of tables and matrices
        metadata - run metadata (also written to metadata.json)
    """
    start = time.time()
    if out_dir is None:
        out_dir = config.outputs["dir"]
    if not op.exists(out_dir):
        os.makedirs(out_dir)

    crystal = config.crystal
    mode = config.mode
    base_meta = config.metadata()
    results, partial = {}, False

    misc.vprint("Starting experiment %s (mode %s)" % (config.hash, mode),
                verbose)

    for i_pump, (label, pump) in enumerate(config.pumps):
        sub = op.join(out_dir, _slug(label)) if len(config.pumps) > 1 \
            else out_dir
        scales = config.scales(pump)
        d_values = config.dValues(scales)
        meta = dict(base_meta, sweep=label)
        entry = {"ratios": scales.ratios(crystal, pump)}
        misc.vprint("Sweep entry %s" % label, verbose)
        for key, val in entry["ratios"].items():
            misc.vprint("  %s = %.4g" % (key, val), verbose)

        far = config.detector["plane"] == FAR
        near_scan = config.optics["kind"] == NEAR_PATH and \
            config.optics["scan"]

        # 1. Plane-wave-pump quadratures
        if mode in ("pwpa_analytic", "both"):
            with _stage("pwpa %s" % label, verbose):
                entry["pwpa"] = _pwpaTable(config, pump, scales, d_values,
                                           verbose)
                spdcio.writeTable(entry["pwpa"],
                                  op.join(sub, "pwpa_ratio_vs_d.csv"), meta,
                                  verbose)
                if far and np.isfinite(pump.w_0) and \
                        config.optics["kind"] == FAR_PATH:
                    entry["profile"] = meanIntensityProfile(
                        crystal, pump, config.optics["f"],
                        transverse_dims=int(config.run["transverse_dims"]),
                        verbose=verbose)
                    spdcio.writeTable(entry["profile"],
                                      op.join(sub, "mean_intensity.csv"),
                                      meta, verbose)

            if near_scan:
                surface = scanDzDy(config, pump_index=i_pump,
                                   verbose=verbose)
                entry["surface"] = surface
                misc.saveMatrix(op.join(sub, "pwpa_surface.npz"),
                                surface["pwpa"],
                                {"dz": surface["dz"], "dy": surface["dy"]},
                                dict(meta, d=surface["d"],
                                     minimum=list(surface["minimum"]),
                                     optimal=list(surface["optimal"])),
                                verbose)

        # 2. Monte Carlo ensemble
        if mode in ("monte_carlo", "both"):
            scan = config.scanAxes(scales) if near_scan else None
            with _stage("monte carlo %s" % label, verbose):
                mc = _monteCarlo(config, pump, d_values,
                                 with_map=bool(config.detector["map"]),
                                 scan=scan, verbose=verbose)
            partial = partial or mc["partial"]
            mc_meta = dict(meta, partial=mc["partial"],
                           failed=sorted(mc["failures"]))

            table = measurementTable(mc["measurements"])
            table.insert(1, "d_scaled",
                         table["d"] / config.dUnitLength(scales))
            entry["mc"] = table
            spdcio.writeTable(table, op.join(sub, "mc_ratio_vs_d.csv"),
                              mc_meta, verbose)

            if "map" in mc:
                cmap = mc["map"]
                entry["map"] = cmap
                x_fixed = config.xFixed(scales)
                rows, peaks = mapRows(cmap, x_fixed, crystal.degenerate)
                entry["map_rows"], entry["peaks"] = rows, peaks
                misc.saveMatrix(op.join(sub, "mc_correlation_map.npz"),
                                cmap.matrix, {"x": cmap.axis},
                                dict(mc_meta, x_fixed=x_fixed), verbose)
                spdcio.writeTable(rows, op.join(sub, "mc_map_rows.csv"),
                                  dict(mc_meta, x_fixed=x_fixed, **peaks),
                                  verbose)

            if "surface" in mc:
                ratio, err = mc["surface"]
                entry["mc_surface"] = (ratio, err)
                misc.saveMatrix(op.join(sub, "mc_surface.npz"), ratio,
                                {"dz": scan[0], "dy": scan[1]},
                                dict(mc_meta, d=scan[2]), verbose)

            if config.outputs["field_dump"]:
                with _stage("field dump %s" % label, verbose):
                    index, state, _ = runTrajectory(0,
                                                    config.ensembleConfig(pump))
                    if state is not None:
                        spdcio.dumpField(state, op.join(sub,
                                                        "trajectory_0.fld"),
                                         verbose)

        results[label] = entry

    metadata = dict(base_meta, config=config.toDict(), mode=mode,
                    partial=partial, wall_time=time.time() - start,
                    versions={"twinbeam": __version__,
                              "numpy": np.__version__,
                              "scipy": scipy.__version__,
                              "joblib": joblib.__version__,
                              "pandas": pd.__version__},
                    sweep={label: {"ratios": entry["ratios"],
                                   "peaks": entry.get("peaks")}
                           for label, entry in results.items()})
    with open(op.join(out_dir, "metadata.json"), "w") as f:
        json.dump(metadata, f, indent=2, sort_keys=True,
                  default=spdcio._jsonDefault)

    misc.vprint("Finished experiment in %.1f s" % metadata["wall_time"],
                verbose)
    return results, metadata


def listPresets():
    """
    Shipped crystal and experiment presets.

    OUTPUT:
        table - DataFrame with columns kind, name, notes
    """
    rows = []
    for kind in ("crystals", "experiments"):
        for name in spdcio.listPresetNames(kind):
            doc = spdcio.readJSON(spdcio.presetPath(name, kind))
            rows.append({"kind": kind[:-1], "name": name,
                         "notes": doc.get("notes", "")})
    return pd.DataFrame(rows, columns=["kind", "name", "notes"])


def validateConfig(doc):
    """
    Collects every problem of a configuration without raising.

    INPUT:
        doc - configuration mapping (may name a preset)

    OUTPUT:
        report - dict with "ok", "diagnostics" and, when the physics
                 resolves, "ratios" per sweep entry
    """
    report = {"ok": False, "diagnostics": [], "ratios": {}}
    out = spdcio.unknownKeys(doc)
    if not out:
        try:
            doc = spdcio.expandPreset(doc)
        except ConfigError as err:
            out = err.diagnostics or [str(err)]
    if not out:
        out = spdcio.unknownKeys(doc) + spdcio.missingKeys(doc)
    if out:
        report["diagnostics"] = out
        return report

    try:
        config = ExperimentConfig(doc)
    except ConfigError as err:
        report["diagnostics"] = err.diagnostics or [str(err)]
        return report
    except (TypeError, ValueError) as err:
        report["diagnostics"] = [str(err)]
        return report

    out = []
    for label, pump in config.pumps:
        try:
            scales = config.scales(pump)
            report["ratios"][label] = scales.ratios(config.crystal, pump)
            path = config.opticalPath(pump)
            out.extend(path.diagnostics(config.crystal))
            if config.mode in ("monte_carlo", "both"):
                out.extend("%s [%s]" % (msg, label)
                           for msg in config.grid.validate(scales, pump))
                template = applyPath(_zeroState(config), path)
                for d in config.dValues(scales):
                    pixelCells(template, config.detectorSpec(scales, d))
        except ConfigError as err:
            out.extend(err.diagnostics or [str(err)])
        except ValueError as err:
            out.append("%s [%s]" % (err, label))

    report["diagnostics"] = list(dict.fromkeys(out))
    report["ok"] = not out
    return report
