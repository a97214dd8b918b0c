""" commands.py

Command line interface: plane-wave-pump tables, Monte Carlo ensembles,
detector-size and imaging-shift scans, configuration validation and the
preset listing.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.

"""

import argparse
import logging
import os.path as op
import sys

import numpy as np
import pandas as pd

from .._version import __version__
from ..spdc import misc, spdcio
from ..spdc.experiment import ExperimentConfig, listPresets, runExperiment, \
    scanDetectorSize, scanDzDy, validateConfig
from ..spdc.misc import ConfigError, NumericalError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _addRunArguments(parser, mode=True):
    parser.add_argument("--config", "-c", required=True,
                        help="experiment document (.json) or preset name")
    parser.add_argument("--seed", type=int, default=None,
                        help="master seed (overrides run.master_seed)")
    parser.add_argument("--n-traj", type=int, default=None,
                        help="number of trajectories (overrides run.n_traj)")
    parser.add_argument("--out", "-o", default=None,
                        help="output directory (overrides outputs.dir)")
    parser.add_argument("--workers", type=int, default=None,
                        help="worker threads, -1 for all cores (overrides "
                             "run.workers)")
    if mode:
        parser.add_argument("--mode", choices=("pwpa", "mc", "both"),
                            default=None, help="pipelines to run")


def buildParser():
    parser = argparse.ArgumentParser(
        prog="twinbeam",
        description="Twin-beam photon-number correlations from high-gain "
                    "parametric down-conversion.",
        formatter_class=argparse.RawTextHelpFormatter)
    parser.add_argument("--version", action="version",
                        version="%(prog)s " + __version__)
    parser.add_argument("-v", "--verbose", action="count", default=1,
                        help="more output (repeat for debug messages)")
    parser.add_argument("--quiet", "-q", action="store_true",
                        help="errors only")
    sub = parser.add_subparsers(dest="command")
    sub.required = True

    p = sub.add_parser("pwpa", help="plane-wave-pump tables only")
    _addRunArguments(p, mode=False)

    p = sub.add_parser("simulate", help="run the configured pipelines")
    _addRunArguments(p)

    p = sub.add_parser("scan", help="detector-size or imaging-shift scan")
    _addRunArguments(p, mode=False)
    p.add_argument("kind", choices=("d", "dzdy"),
                   help="d: ratio against pixel size (Monte Carlo); dzdy: "
                        "ratio over imaging shifts")
    p.add_argument("--mc", action="store_true",
                   help="dzdy: also run the Monte Carlo surface")
    p.add_argument("--sweep", type=int, default=0,
                   help="entry of the pump sweep; defaults 0")

    p = sub.add_parser("validate", help="check a configuration")
    p.add_argument("--config", "-c", required=True,
                   help="experiment document (.json) or preset name")

    sub.add_parser("presets", help="list shipped presets")
    return parser


def _overrides(args, mode=None):
    return {"run.master_seed": getattr(args, "seed", None),
            "run.n_traj": getattr(args, "n_traj", None),
            "run.workers": getattr(args, "workers", None),
            "run.mode": mode if mode is not None else getattr(args, "mode",
                                                              None),
            "outputs.dir": getattr(args, "out", None)}


def _configureLogging(verbose):
    level = logging.WARNING if verbose == 0 else \
        logging.DEBUG if verbose >= 3 else logging.INFO
    logging.basicConfig(level=level,
                        format="%(asctime)s %(name)s %(levelname)s: "
                               "%(message)s")
    logging.captureWarnings(True)


def _readDocument(config):
    if op.isfile(config):
        return spdcio.readJSON(config)
    return {"preset": config}


def cmdValidate(args, verbose):
    report = validateConfig(_readDocument(args.config))
    if report["ok"]:
        print("ok")
        for label, ratios in report["ratios"].items():
            print("[%s]" % label)
            for key, val in ratios.items():
                print("  %-20s %.6g" % (key, val))
        return EXIT_OK
    for msg in report["diagnostics"]:
        print(msg)
    return EXIT_CONFIG


def cmdPresets(args, verbose):
    table = listPresets()
    with pd.option_context("display.max_colwidth", 120):
        print(table.to_string(index=False))
    return EXIT_OK


def cmdRun(args, verbose, mode=None):
    config = ExperimentConfig.load(args.config, _overrides(args, mode),
                                   verbose)
    results, metadata = runExperiment(config, verbose=verbose)
    misc.vprint("Results written to %s" % config.outputs["dir"], verbose)
    return EXIT_OK if not metadata["partial"] else EXIT_NUMERICAL


def cmdScan(args, verbose):
    config = ExperimentConfig.load(args.config, _overrides(args), verbose)
    out_dir = config.outputs["dir"]
    meta = dict(config.metadata(), sweep=config.pumps[args.sweep][0])

    if args.kind == "d":
        table = scanDetectorSize(config, pump_index=args.sweep,
                                 verbose=verbose)
        spdcio.writeTable(table, op.join(out_dir, "scan_d.csv"), meta,
                          verbose)
        return EXIT_OK

    surface = scanDzDy(config, pump_index=args.sweep, monte_carlo=args.mc,
                       verbose=verbose)
    misc.saveMatrix(op.join(out_dir, "scan_dzdy.npz"), surface["pwpa"],
                    {"dz": surface["dz"], "dy": surface["dy"]},
                    dict(meta, d=surface["d"], minimum=list(surface["minimum"]),
                         optimal=list(surface["optimal"])), verbose)
    if args.mc:
        misc.saveMatrix(op.join(out_dir, "scan_dzdy_mc.npz"), surface["mc"],
                        {"dz": surface["dz"], "dy": surface["dy"],
                         "err": np.ravel(surface["mc_err"])},
                        dict(meta, d=surface["d"]), verbose)
    dz, dy, ratio = surface["minimum"]
    print("minimum ratio %.4g at delta_z = %.4g m, delta_y = %.4g m" %
          (ratio, dz, dy))
    return EXIT_OK


def main(argv=None):
    """
    Entry point of the twinbeam command.

    INPUT:
        argv - argument list; defaults sys.argv[1:]

    OUTPUT:
        exit code
    """
    args = buildParser().parse_args(argv)
    verbose = 0 if args.quiet else args.verbose
    _configureLogging(verbose)

    commands = {"validate": cmdValidate, "presets": cmdPresets,
                "scan": cmdScan, "simulate": cmdRun,
                "pwpa": lambda a, v: cmdRun(a, v, mode="pwpa_analytic")}
    try:
        return commands[args.command](args, verbose)
    except (ConfigError, ValueError, IOError) as err:
        stage = getattr(err, "stage", None)
        print("configuration error%s: %s" %
              (" in %s" % stage if stage else "", err), file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as err:
        stage = getattr(err, "stage", None)
        print("numerical failure%s: %s" %
              (" in %s" % stage if stage else "", err), file=sys.stderr)
        return EXIT_NUMERICAL
