""" propagate.py

Module containing the stochastic propagation of signal/idler envelopes
through the crystal and the trajectory-parallel ensemble driver.

Each dz step is a Strang splitting: half a linear step as an exact Fourier
multiplier, a nonlinear step solved exactly per cell as a Bogoliubov
rotation with the local pump value at the step midpoint, and another half
linear step. Adjacent half steps are merged.

"""

from dataclasses import dataclass

import numpy as np
import scipy.fft
from joblib import Parallel, delayed

from . import misc
from .fields import FieldState, PumpEvolution, REAL, TrajectorySeed, \
    sampleVacuum
from .crystal import detuning
from .misc import EnsembleError, PropagationError


@dataclass(frozen=True)
class StepScheme:
    """
    Integration settings. n_z of None uses grid.N_z.
    """
    n_z: int = None
    frame: str = "pump"
    plane_wave: bool = None
    check_finite: bool = True
    fft_workers: int = 1


def _linearMultipliers(grid, crystal, dz, frame, n_envelopes):
    """ *INTERNAL FUNCTION*
    Full-step and half-step Fourier multipliers exp(i delta_j dz) per envelope.
    """
    q_x, q_y, Om = grid.waveVectors()
    full, half = [], []
    for j in range(1, n_envelopes + 1):
        delta = detuning(j, (q_x, q_y), Om, crystal, frame=frame)
        delta = np.broadcast_to(delta, grid.shape)
        full.append(np.exp(1j * delta * dz))
        half.append(np.exp(0.5j * delta * dz))
    return full, half


def _linearStep(envelopes, multipliers, workers):
    """ *INTERNAL FUNCTION*
    Applies the Fourier multipliers to each real-space envelope.
    """
    return [scipy.fft.ifftn(m * scipy.fft.fftn(a, workers=workers),
                            workers=workers)
            for a, m in zip(envelopes, multipliers)]


def _nonlinearStep(envelopes, kappa, dz):
    """ *INTERNAL FUNCTION*
    Exact per-cell solution of da_1/dz = kappa a_2^*, da_2/dz = kappa a_1^*
    (or da/dz = kappa a^* for one envelope) over dz with constant kappa.
    """
    mag = np.abs(kappa)
    unit = np.where(mag > 0, kappa / np.where(mag > 0, mag, 1.), 0.)
    ch = np.cosh(mag * dz)
    sh = unit * np.sinh(mag * dz)

    if len(envelopes) == 1:
        a = envelopes[0]
        return [ch * a + sh * np.conj(a)]

    a1, a2 = envelopes
    return [ch * a1 + sh * np.conj(a2), ch * a2 + sh * np.conj(a1)]


def propagate(state, crystal, pump, scheme=None, trajectory_index=None):
    """
    Propagates the envelopes from the crystal entrance to its exit face.

    INPUT:
        state - FieldState at z = 0 in real space (1 or 2 envelopes)
        crystal - CrystalParams
        pump - PumpParams
        scheme - StepScheme; defaults StepScheme()
        trajectory_index - index reported on failure; defaults None

    OUTPUT:
        state - FieldState at z = l_c in real space
    """
    if scheme is None:
        scheme = StepScheme()
    if state.domain != REAL or state.plane_z != 0:
        raise ValueError("Propagation starts from a real-space field at z = 0")
    if state.n_envelopes != crystal.n_envelopes:
        raise ValueError("%s crystal needs %d envelope(s), got %d" %
                         (crystal.phase_match_type, crystal.n_envelopes,
                          state.n_envelopes))

    grid = state.grid
    n_z = grid.N_z if scheme.n_z is None else scheme.n_z
    dz = crystal.l_c / n_z
    workers = scheme.fft_workers

    full, half = _linearMultipliers(grid, crystal, dz, scheme.frame,
                                    state.n_envelopes)
    pump_evo = PumpEvolution(grid, crystal, pump, scheme.frame,
                             scheme.plane_wave)

    envelopes = _linearStep(state.envelopes, half, workers)
    for n in range(n_z):
        z_mid = (n + 0.5) * dz
        kappa = crystal.sigma * pump_evo.at(z_mid) * \
            np.exp(-1j * crystal.delta_0 * z_mid)
        envelopes = _nonlinearStep(envelopes, kappa, dz)
        envelopes = _linearStep(envelopes, full if n < n_z - 1 else half,
                                workers)

        if scheme.check_finite and \
                not all(np.isfinite(a).all() for a in envelopes):
            raise PropagationError(trajectory_index, n, (n + 1) * dz)

    return state.replace(envelopes, plane_z=crystal.l_c)


@dataclass(frozen=True)
class EnsembleConfig:
    """
    Everything a trajectory worker needs to run one trajectory.
    """
    crystal: object
    pump: object
    grid: object
    scheme: StepScheme = StepScheme()
    master_seed: int = 0


def runTrajectory(index, config, reducer=None):
    """
    Samples the vacuum for trajectory `index`, propagates it and applies the
    reducer.

    INPUT:
        index - trajectory index
        config - EnsembleConfig
        reducer - callable(FieldState) -> result; defaults None (the state)

    OUTPUT:
        (index, result, error) with error None on success
    """
    crystal = config.crystal
    seed = TrajectorySeed(config.master_seed, index)
    wavelengths = (crystal.lambda_1,) if crystal.degenerate else \
        (crystal.lambda_1, crystal.lambda_2)
    state = sampleVacuum(config.grid, seed, crystal.n_envelopes, wavelengths)
    try:
        out = propagate(state, crystal, config.pump, config.scheme, index)
    except PropagationError as err:
        return index, None, str(err)
    return index, (out if reducer is None else reducer(out)), None


def runEnsemble(n_traj, config, reducer=None, n_jobs=1, batch_size=None,
                first_index=0, backend="threading", verbose=0):
    """
    Runs independent trajectories and yields their results in index order.
    Failed trajectories are skipped; after the last batch an EnsembleError
    lists them.

    INPUT:
        n_traj - number of trajectories (>= 1)
        config - EnsembleConfig
        reducer - callable(FieldState) -> result applied in the worker;
                  defaults None (yield the final FieldState)
        n_jobs - number of processes/threads (-1 uses all available
                 resources); defaults 1
        batch_size - trajectories per dispatch; defaults 4 per worker
        first_index - index of the first trajectory; defaults 0
        backend - joblib backend; defaults "threading"
        verbose - verbosity of function; defaults 0

    OUTPUT:
        generator of (index, result)
    """
    if n_traj < 1:
        raise ValueError("n_traj must be >= 1")

    if batch_size is None:
        workers = n_jobs if n_jobs > 0 else 8
        batch_size = max(1, 4 * workers)

    indices = list(range(first_index, first_index + n_traj))
    failures = {}
    n_ok = 0

    misc.vprint("Running %d trajectories (n_jobs=%d)" % (n_traj, n_jobs),
                verbose)

    with Parallel(n_jobs=n_jobs, backend=backend) as parallel:
        for start in range(0, n_traj, batch_size):
            batch = indices[start:start + batch_size]
            results = parallel(delayed(runTrajectory)(i, config, reducer)
                               for i in batch)
            for index, result, error in results:
                if error is not None:
                    failures[index] = error
                    misc.vprint(error, verbose)
                    continue
                n_ok += 1
                yield index, result
            misc.vprint("%d/%d trajectories done" % (start + len(batch), n_traj),
                        verbose, debug=True)

    if failures:
        raise EnsembleError(failures, n_ok)
