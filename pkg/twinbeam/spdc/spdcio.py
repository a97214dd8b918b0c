""" spdcio.py

Module provides input/output functionality: experiment configuration
documents and shipped presets, result tables with metadata headers, and raw
field dumps.

"""

import copy
import json
import os
import os.path as op
from dataclasses import fields as dc_fields, replace

import numpy as np
import pandas as pd

from . import misc
from .crystal import CrystalParams, PumpParams, TYPE_I, deriveScales, \
    mismatchFromRing
from .fields import FieldState, TrajectorySeed
from .grid import GridSpec
from .misc import ConfigError

SCHEMA_VERSION = 1
PRESET_DIR = op.join(op.dirname(op.dirname(op.abspath(__file__))), "presets")

_CRYSTAL_REQUIRED = ("phase_match_type", "l_c", "lambda_0", "lambda_1",
                     "lambda_2", "n_0", "n_1", "n_2", "kp_0", "kp_1", "kp_2",
                     "kpp_0", "kpp_1", "kpp_2")
_CRYSTAL_KEYS = tuple(f.name for f in dc_fields(CrystalParams)) + \
    ("preset", "delta_0_lc", "ring_radius_q0", "notes")

SCHEMA = {
    "schema_version": None,
    "notes": None,
    "preset": None,
    "crystal": _CRYSTAL_KEYS,
    "pump": ("sigma_p_lc", "w_0", "dq0_over_q0", "tau_0",
             "domega0_over_Omega0", "plane_wave"),
    "grid": tuple(f.name for f in dc_fields(GridSpec)),
    "detector": ("plane", "d", "d_unit", "center", "center_unit", "T_d",
                 "eta", "symmetric", "map", "map_bin", "x_fixed"),
    "optics": ("kind", "f", "delta_z", "delta_y", "scan"),
    "run": ("n_traj", "master_seed", "mode", "workers", "n_blocks",
            "allow_partial", "frame", "filter_omega", "rtol",
            "transverse_dims", "batch_size"),
    "outputs": ("dir", "field_dump"),
}

REQUIRED = ("crystal", "pump", "pump.sigma_p_lc", "grid", "detector",
            "detector.plane", "detector.d", "optics", "optics.kind", "run",
            "run.mode")

MODES = ("pwpa_analytic", "monte_carlo", "both")


def unknownKeys(doc):
    """
    Lists keys not in the configuration schema, as dotted paths.

    INPUT:
        doc - configuration mapping

    OUTPUT:
        list of diagnostics
    """
    out = []
    if not isinstance(doc, dict):
        return ["<root>: configuration must be a mapping"]
    for key, value in doc.items():
        if key not in SCHEMA:
            out.append("%s: unknown key" % key)
            continue
        allowed = SCHEMA[key]
        if allowed is None or (key == "crystal" and isinstance(value, str)):
            continue
        if not isinstance(value, dict):
            out.append("%s: must be a mapping" % key)
            continue
        for sub, subval in value.items():
            if sub not in allowed:
                out.append("%s.%s: unknown key" % (key, sub))
            elif key == "optics" and sub == "scan":
                if not isinstance(subval, dict):
                    out.append("optics.scan: must be a mapping")
                    continue
                out.extend("optics.scan.%s: unknown key" % s
                           for s in subval if s not in ("dz", "dy", "d"))
    return out


def missingKeys(doc):
    """ Lists required keys absent from a configuration mapping """
    out = []
    for path in REQUIRED:
        node = doc
        for part in path.split("."):
            if not isinstance(node, dict) or part not in node:
                out.append("%s: required" % path)
                break
            node = node[part]
    return out


def _deepMerge(base, override):
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _deepMerge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def presetPath(name, kind="experiments"):
    """
    Path of a shipped preset.

    INPUT:
        name - preset name (file stem)
        kind - "experiments" or "crystals"; defaults "experiments"

    OUTPUT:
        path to the JSON file
    """
    path = op.join(PRESET_DIR, kind, "%s.json" % name)
    if not op.isfile(path):
        raise ConfigError("Unknown %s preset '%s'" % (kind[:-1], name),
                          ["available: %s" % ", ".join(listPresetNames(kind))])
    return path


def listPresetNames(kind="experiments"):
    folder = op.join(PRESET_DIR, kind)
    if not op.isdir(folder):
        return []
    return sorted(op.splitext(f)[0] for f in os.listdir(folder)
                  if f.endswith(".json"))


def readJSON(json_file, verbose=0):
    """
    Reads a JSON document

    INPUT:
        json_file - path to a .json file
        verbose - verbosity of function; defaults 0

    OUTPUT:
        doc - parsed document
    """
    filename, ext = op.splitext(json_file)
    if ext != ".json":
        raise IOError("Invalid / unrecognized file format.")
    misc.vprint("Reading %s..." % json_file, verbose)
    with open(json_file, "r") as f:
        try:
            return json.load(f)
        except json.JSONDecodeError as err:
            raise ConfigError("Malformed JSON in %s" % json_file, [str(err)])


def expandPreset(doc):
    """
    Resolves a top-level "preset" key: the named experiment preset is the
    base and the remaining keys of `doc` override it.
    """
    if "preset" not in doc:
        return copy.deepcopy(doc)
    base = readJSON(presetPath(doc["preset"]))
    rest = {k: v for k, v in doc.items() if k != "preset"}
    return _deepMerge(base, rest)


def loadConfig(config_file, verbose=0):
    """
    Reads and checks an experiment configuration document. Unknown keys are
    rejected; missing required keys are reported together.

    INPUT:
        config_file - path to a .json document, or the name of a shipped
                      experiment preset
        verbose - verbosity of function; defaults 0

    OUTPUT:
        doc - configuration mapping with presets expanded
    """
    if op.isfile(config_file):
        doc = readJSON(config_file, verbose)
    elif config_file in listPresetNames():
        doc = {"preset": config_file}
    else:
        raise ConfigError("Configuration '%s' is neither a file nor a "
                          "preset" % config_file)

    out = unknownKeys(doc)
    if out:
        raise ConfigError("Unknown configuration keys", out)
    doc = expandPreset(doc)
    out = unknownKeys(doc) + missingKeys(doc)
    if out:
        raise ConfigError("Invalid configuration", out)
    doc.setdefault("schema_version", SCHEMA_VERSION)
    if doc["schema_version"] != SCHEMA_VERSION:
        raise ConfigError("Unsupported schema_version %s" %
                          doc["schema_version"])
    return doc


def saveConfig(doc, config_file, verbose=0):
    """
    Writes a configuration document

    INPUT:
        doc - configuration mapping
        config_file - output .json path
        verbose - verbosity of function; defaults 0

    OUTPUT:
        none
    """
    filename, ext = op.splitext(config_file)
    if ext != ".json":
        raise IOError("Invalid file format.")
    misc.vprint("Writing %s ..." % config_file, verbose)
    with open(config_file, "w") as f:
        json.dump(doc, f, indent=2, sort_keys=True, default=_jsonDefault)
        f.write("\n")


def _jsonDefault(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError("%r is not JSON serializable" % (obj,))


def resolveCrystal(spec):
    """
    Builds CrystalParams from a preset name or an inline mapping. The
    collinear mismatch is given by exactly one of delta_0, delta_0_lc or
    ring_radius_q0; degenerate type I copies index-1 constants to index 2.

    INPUT:
        spec - preset name or mapping (optionally with "preset")

    OUTPUT:
        crystal - CrystalParams
    """
    if isinstance(spec, str):
        spec = {"preset": spec}
    spec = dict(spec)
    if "preset" in spec:
        base = readJSON(presetPath(spec.pop("preset"), "crystals"))
        given = [k for k in ("delta_0", "delta_0_lc", "ring_radius_q0")
                 if k in spec]
        if given:
            for k in ("delta_0", "delta_0_lc", "ring_radius_q0"):
                base.pop(k, None)
        base.update(spec)
        spec = base

    out = ["crystal.%s: unknown key" % k for k in spec
           if k not in _CRYSTAL_KEYS]
    if out:
        raise ConfigError("Invalid crystal", out)
    spec.pop("notes", None)

    if spec.get("phase_match_type") == TYPE_I:
        for name in ("lambda", "n", "kp", "kpp"):
            spec.setdefault("%s_2" % name, spec.get("%s_1" % name))

    given = [k for k in ("delta_0", "delta_0_lc", "ring_radius_q0")
             if k in spec]
    if len(given) > 1:
        raise ConfigError("Invalid crystal", ["crystal.%s: only one of "
                                              "delta_0, delta_0_lc, "
                                              "ring_radius_q0 may be given"
                                              % given[1]])
    delta_0_lc = spec.pop("delta_0_lc", None)
    ring = spec.pop("ring_radius_q0", None)

    out = ["crystal.%s: required" % k for k in _CRYSTAL_REQUIRED
           if k not in spec]
    if out:
        raise ConfigError("Invalid crystal", out)

    crystal = CrystalParams(**spec)
    if delta_0_lc is not None:
        crystal = replace(crystal, delta_0=float(delta_0_lc) / crystal.l_c)
    elif ring is not None:
        q_0 = np.sqrt(crystal.k_bar / crystal.l_c)
        crystal = replace(crystal, delta_0=mismatchFromRing(
            crystal.k_bar, crystal.rho_2, float(ring) * q_0))
    return crystal


def resolvePumps(spec, crystal):
    """
    Builds PumpParams from the pump section. dq0_over_q0 may be a list, in
    which case one pump per value is returned.

    INPUT:
        spec - pump mapping
        crystal - CrystalParams

    OUTPUT:
        list of (label, PumpParams)
    """
    out = []
    if "w_0" in spec and "dq0_over_q0" in spec:
        out.append("pump.w_0: give either w_0 or dq0_over_q0")
    if "tau_0" in spec and "domega0_over_Omega0" in spec:
        out.append("pump.tau_0: give either tau_0 or domega0_over_Omega0")
    if out:
        raise ConfigError("Invalid pump", out)

    sigma_p_lc = float(spec["sigma_p_lc"])
    probe = deriveScales(crystal, PumpParams.fromGain(crystal, sigma_p_lc))

    if spec.get("plane_wave", False):
        return [("plane_wave", PumpParams.fromGain(crystal, sigma_p_lc))]

    if "tau_0" in spec:
        tau_0 = float(spec["tau_0"]) if spec["tau_0"] is not None else np.inf
    elif "domega0_over_Omega0" in spec:
        tau_0 = 2. / (float(spec["domega0_over_Omega0"]) * probe.Omega_0)
    else:
        tau_0 = np.inf

    if "dq0_over_q0" in spec:
        values = spec["dq0_over_q0"]
        values = values if isinstance(values, list) else [values]
        return [("dq0_over_q0=%g" % r,
                 PumpParams.fromGain(crystal, sigma_p_lc,
                                     2. / (float(r) * probe.q_0), tau_0))
                for r in values]

    w_0 = float(spec["w_0"]) if spec.get("w_0") is not None else np.inf
    return [("w_0=%g" % w_0, PumpParams.fromGain(crystal, sigma_p_lc, w_0,
                                                 tau_0))]


def resolveGrid(spec):
    """ GridSpec from the grid section (ConfigError on invalid shapes) """
    return GridSpec(**spec)


def writeTable(table, table_file, metadata=None, verbose=0):
    """
    Writes a table as comma-separated text with '#'-prefixed metadata lines
    before the header row.

    INPUT:
        table - pandas DataFrame
        table_file - output .csv path
        metadata - mapping written as "# key: value" lines; defaults None
        verbose - verbosity of function; defaults 0

    OUTPUT:
        none
    """
    filename, ext = op.splitext(table_file)
    if ext != ".csv":
        raise IOError("Invalid file format.")
    dirpath = op.dirname(table_file)
    if dirpath and not op.exists(dirpath):
        os.makedirs(dirpath)

    misc.vprint("Writing %s ..." % table_file, verbose)
    with open(table_file, "w") as f:
        for key, value in (metadata or {}).items():
            f.write("# %s: %s\n" % (key, json.dumps(value,
                                                    default=_jsonDefault)))
        table.to_csv(f, index=False, lineterminator="\n")


def readTable(table_file, verbose=0):
    """
    Reads a table written by writeTable

    INPUT:
        table_file - .csv path
        verbose - verbosity of function; defaults 0

    OUTPUT:
        table - pandas DataFrame
        metadata - dict from the header lines
    """
    filename, ext = op.splitext(table_file)
    if ext != ".csv":
        raise IOError("Invalid / unrecognized file.")
    misc.vprint("Reading %s..." % table_file, verbose)

    metadata = {}
    with open(table_file, "r") as f:
        for line in f:
            if not line.startswith("#"):
                break
            key, _, value = line[1:].strip().partition(": ")
            metadata[key] = json.loads(value)
    table = pd.read_csv(table_file, comment="#")
    return table, metadata


def dumpField(state, field_file, verbose=0):
    """
    Writes a FieldState as one JSON header line followed by the raw
    little-endian complex128 lattices of every envelope.

    INPUT:
        state - FieldState
        field_file - output .fld path
        verbose - verbosity of function; defaults 0

    OUTPUT:
        none
    """
    filename, ext = op.splitext(field_file)
    if ext != ".fld":
        raise IOError("Invalid file format.")
    seed = None if state.seed is None else \
        [int(state.seed.master_seed), int(state.seed.trajectory_index)]
    header = {"grid": state.grid.toDict(), "shape": list(state.grid.shape),
              "n_envelopes": state.n_envelopes, "z": state.plane_z,
              "domain": state.domain, "plane": state.plane,
              "wavelengths": list(state.wavelengths),
              "pitch": [list(p) for p in state.pitch], "seed": seed,
              "dtype": "complex128", "endianness": "little"}

    misc.vprint("Writing %s ..." % field_file, verbose)
    with open(field_file, "wb") as f:
        f.write((json.dumps(header, default=_jsonDefault) + "\n")
                .encode("utf-8"))
        for a in state.envelopes:
            f.write(np.ascontiguousarray(a, dtype="<c16").tobytes())


def readField(field_file, verbose=0):
    """
    Reads a field written by dumpField

    INPUT:
        field_file - .fld path
        verbose - verbosity of function; defaults 0

    OUTPUT:
        state - FieldState
    """
    filename, ext = op.splitext(field_file)
    if ext != ".fld":
        raise IOError("Invalid / unrecognized file format.")
    misc.vprint("Reading %s..." % field_file, verbose)

    with open(field_file, "rb") as f:
        try:
            header = json.loads(f.readline().decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError):
            raise IOError("Invalid / unrecognized file.")
        if header.get("dtype") != "complex128" or \
                header.get("endianness") != "little":
            raise IOError("Unsupported field encoding.")
        raw = np.frombuffer(f.read(), dtype="<c16")

    grid = GridSpec(**header["grid"])
    shape = tuple(header["shape"])
    size = int(np.prod(shape))
    if raw.size != size * header["n_envelopes"]:
        raise IOError("Field file truncated: %d of %d values" %
                      (raw.size, size * header["n_envelopes"]))
    envelopes = [raw[i * size:(i + 1) * size].reshape(shape)
                 for i in range(header["n_envelopes"])]
    seed = None if header["seed"] is None else TrajectorySeed(*header["seed"])
    return FieldState(envelopes, grid, header["z"], header["domain"],
                      header["wavelengths"], header["pitch"], header["plane"],
                      seed)
