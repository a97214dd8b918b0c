""" misc.py

Module providing miscellaneous functionality: verbose logging, the package
exception and warning classes, and matrix/metadata persistence.

"""

import hashlib
import json
import logging
import os.path as op
import numpy as np

logger = logging.getLogger("twinbeam")


class TwinbeamError(Exception):
    """ Base class of all errors raised by twinbeam """


class ConfigError(TwinbeamError, ValueError):
    """
    Invalid parameters or configuration documents.

    INPUT:
        msg - summary message
        diagnostics - list of individual problems (dotted key: message)
    """
    def __init__(self, msg, diagnostics=None):
        self.diagnostics = list(diagnostics or [])
        if self.diagnostics:
            msg = "%s\n  %s" % (msg, "\n  ".join(self.diagnostics))
        super().__init__(msg)


class NumericalError(TwinbeamError, ArithmeticError):
    """ Numerical failure during quadrature or propagation """


class QuadratureError(NumericalError):
    """ Quadrature did not converge; `trace` holds (level, value) pairs """
    def __init__(self, msg, trace=None):
        self.trace = list(trace or [])
        super().__init__("%s (refinement trace: %s)" %
                         (msg, ", ".join("%d:%.6g" % (lvl, val)
                                         for lvl, val in self.trace)))


class PropagationError(NumericalError):
    """ Non-finite field encountered while stepping through the crystal """
    def __init__(self, trajectory_index, step, z):
        self.trajectory_index = trajectory_index
        self.step = step
        self.z = z
        super().__init__("Trajectory %s diverged at step %d (z = %.4g m); "
                         "gain too high for grid" % (trajectory_index, step, z))


class EnsembleError(NumericalError):
    """ One or more trajectories of an ensemble failed """
    def __init__(self, failures, n_ok=0):
        self.failures = dict(failures)
        self.n_ok = n_ok
        idx = sorted(self.failures)
        super().__init__("%d trajectories failed (indices %s); %d succeeded" %
                         (len(idx), idx[:20], n_ok))


class ParaxialWarning(UserWarning):
    """ Transverse wave vector not small compared to the carrier """


class ValidityWarning(UserWarning):
    """ Approximation used outside its regime of validity """


def vprint(txt, verbose, debug=False):
    """
    Function used to log verbose statements

    INPUT:
        txt - message to return
        verbose - verbosity (0 silent, >=1 info, >=3 with debug messages)
        debug - flag to indicate if message should be a debug message

    OUTPUT:
        none
    """
    if debug is True:
        if verbose >= 3:
            logger.debug(txt)
    elif verbose >= 1:
        logger.info(txt)

    return


def configHash(cfg_dict):
    """
    Computes a stable hash of a configuration mapping.

    INPUT:
        cfg_dict - JSON-serializable mapping

    OUTPUT:
        hex digest (first 16 characters of sha256 of canonical JSON)
    """
    text = json.dumps(cfg_dict, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def saveMatrix(file_path, matrix, axes=None, metadata=None, verbose=0):
    """
    Function used to save a dense matrix with its axes to a compressed archive.

    INPUT:
        file_path - output path (.npz appended if missing)
        matrix - array to store
        axes - dict of axis name -> 1D array; defaults None
        metadata - dict stored as JSON text; defaults None

    OUTPUT:
        file_path - path actually written
    """
    if not file_path.endswith(".npz"):
        file_path = file_path + ".npz"

    arrays = {"matrix": np.asarray(matrix)}
    for name, axis in (axes or {}).items():
        arrays["axis_%s" % name] = np.asarray(axis)
    arrays["metadata"] = np.array(json.dumps(metadata or {}, sort_keys=True))

    np.savez_compressed(file_path, **arrays)
    vprint("Saved matrix %s to %s" % (str(np.shape(matrix)),
                                      op.realpath(file_path)), verbose)

    return file_path


def loadMatrix(file_path):
    """
    Reads a matrix written by saveMatrix.

    INPUT:
        file_path - path to .npz archive

    OUTPUT:
        matrix - stored array
        axes - dict of axis name -> array
        metadata - dict
    """
    with np.load(file_path) as archive:
        matrix = archive["matrix"]
        axes = {key[5:]: archive[key] for key in archive.files
                if key.startswith("axis_")}
        metadata = json.loads(str(archive["metadata"]))

    return matrix, axes, metadata


def peakWidth(x, y, index=None):
    """
    Full width at half maximum of a peak of a sampled curve, by linear
    interpolation of the half-maximum crossings on either side.

    INPUT:
        x - increasing sample positions
        y - sampled values
        index - index of the peak; defaults to the global maximum

    OUTPUT:
        width - FWHM (NaN when a crossing lies outside the samples)
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if index is None:
        index = int(np.nanargmax(y))
    half = 0.5 * y[index]

    left = index
    while left > 0 and y[left] > half:
        left -= 1
    right = index
    while right < y.size - 1 and y[right] > half:
        right += 1
    if y[left] > half or y[right] > half:
        return np.nan

    def cross(i, j):
        if y[j] == y[i]:
            return x[i]
        return x[i] + (half - y[i]) * (x[j] - x[i]) / (y[j] - y[i])

    return cross(right - 1, right) - cross(left, left + 1)
