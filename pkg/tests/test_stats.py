import dataclasses

import numpy as np
import pytest

from twinbeam.spdc.fields import FieldState, TrajectorySeed, complexGaussian, \
    sampleVacuum
from twinbeam.spdc.propagate import EnsembleConfig, StepScheme, runEnsemble
from twinbeam.spdc.stats import DetectorSpec, Measurement, StatsAccumulator, \
    applyEfficiency, binnedCounts, correlationMap, countPhotons, \
    gaussianFactorization, measurementTable, orderingCorrect, pixelCells


def _twinSamples(rng, n_traj, n_cells, r):
    """ Per-cell two-mode squeezed Wigner amplitudes with dV = 1 """
    b1 = complexGaussian(rng, (n_traj, n_cells), 0.5)
    b2 = complexGaussian(rng, (n_traj, n_cells), 0.5)
    ch, sh = np.cosh(r), np.sinh(r)
    return ch * b1 + sh * np.conj(b2), ch * b2 + sh * np.conj(b1)


def _pairAccumulator(n1, n2, modes, n_blocks=16):
    acc = StatsAccumulator(2, n_blocks, modes=modes)
    for i, x in enumerate(zip(n1, n2)):
        acc.add(x, i)
    return acc


class TestPixels:
    def test_cell_counts(self, small_grid):
        state = sampleVacuum(small_grid, TrajectorySeed(0, 0))
        det = DetectorSpec(d=4 * small_grid.dx, plane="NearField")
        pixels = pixelCells(state, det)
        assert pixels.modes.tolist() == [4. * small_grid.N_t] * 2
        assert pixels.overlap == 0.
        assert (pixels.envelope_1, pixels.envelope_2) == (0, 1)

    def test_detection_window(self, small_grid):
        state = sampleVacuum(small_grid, TrajectorySeed(0, 0))
        det = DetectorSpec(d=small_grid.dx, T_d=small_grid.dt,
                           plane="NearField")
        assert pixelCells(state, det).modes.tolist() == [1., 1.]

    def test_far_field_mirror(self, small_grid):
        state = sampleVacuum(small_grid, TrajectorySeed(0, 0))
        det = DetectorSpec(d=4 * small_grid.dx, center_1=10 * small_grid.dx)
        pixels = pixelCells(state, det)
        n = small_grid.N_x
        for i in range(1, n):
            assert pixels.mask_2[n - i, 0] == pixels.mask_1[i, 0]

    def test_degenerate_overlap(self, small_grid):
        state = sampleVacuum(small_grid, TrajectorySeed(0, 0), 1)
        det = DetectorSpec(d=4 * small_grid.dx, center_2=small_grid.dx,
                           plane="NearField")
        pixels = pixelCells(state, det)
        assert pixels.envelope_2 == 0
        assert pixels.overlap == 3. * small_grid.N_t

    def test_pixel_errors(self, small_grid):
        state = sampleVacuum(small_grid, TrajectorySeed(0, 0))
        with pytest.raises(ValueError):
            pixelCells(state, DetectorSpec(d=0.5 * small_grid.dx,
                                           plane="NearField"))
        with pytest.raises(ValueError):
            pixelCells(state, DetectorSpec(d=small_grid.dx, center_1=1e-2,
                                           plane="NearField"))
        with pytest.raises(ValueError):
            pixelCells(state, DetectorSpec(d=small_grid.dx, T_d=1.,
                                           plane="NearField"))

    def test_count_uniform_field(self, small_grid):
        state = FieldState([np.ones(small_grid.shape)] * 2, small_grid)
        det = DetectorSpec(d=2 * small_grid.dx, plane="NearField")
        n1, n2 = countPhotons(state, det)
        assert n1 == n2 == pytest.approx(2 * small_grid.N_t *
                                         small_grid.cell_volume)

    def test_signal_idler_pair(self, small_grid):
        state = sampleVacuum(small_grid, TrajectorySeed(0, 1),
                             wavelengths=(800e-9, 800e-9))
        det = DetectorSpec(d=4 * small_grid.dx, plane="NearField")
        assert countPhotons(state.split(), det) == countPhotons(state, det)


class TestOrderingCorrections:
    @pytest.mark.parametrize("d_cells, window, n_x", [(1, True, 64),
                                                      (1, False, 64),
                                                      (16, False, 64),
                                                      (256, True, 512)])
    def test_vacuum_is_empty(self, small_grid, d_cells, window, n_x):
        grid = dataclasses.replace(small_grid, N_x=n_x,
                                   L_x=n_x * small_grid.dx)
        det = DetectorSpec(d=d_cells * grid.dx,
                           T_d=grid.dt if window else None,
                           plane="NearField")
        pixels = None
        acc = None
        for i in range(1000):
            state = sampleVacuum(grid, TrajectorySeed(9, i))
            if pixels is None:
                pixels = pixelCells(state, det)
                acc = StatsAccumulator(2, modes=pixels.modes)
            acc.add(countPhotons(state, det, pixels), i)
        assert pixels.modes[0] == d_cells * (1 if window else grid.N_t)
        meas = orderingCorrect(acc)
        err = meas.std_err
        assert abs(meas.N1) < 4 * err["N1"]
        assert abs(meas.N2) < 4 * err["N2"]
        assert abs(meas.var_minus) < 4 * err["var_minus"]

    @pytest.mark.parametrize("r", [0.5, 1., 3.])
    def test_twin_beam_oracle(self, rng, r):
        n_cells = 8
        a1, a2 = _twinSamples(rng, 4000, n_cells, r)
        n1 = np.sum(np.abs(a1) ** 2, axis=1)
        n2 = np.sum(np.abs(a2) ** 2, axis=1)
        meas = orderingCorrect(_pairAccumulator(n1, n2, [n_cells] * 2))
        expected = n_cells * np.sinh(r) ** 2
        assert meas.N1 == pytest.approx(expected, abs=4 * meas.std_err["N1"])
        assert abs(meas.var_minus) < 4 * meas.std_err["var_minus"]
        assert abs(meas.ratio) < 4 * meas.std_err["ratio"]
        assert meas.shotNoiseBound()
        assert meas.diagnostics == []

    def test_few_trajectories(self, rng):
        a1, a2 = _twinSamples(rng, 5, 4, 1.)
        acc = _pairAccumulator(np.sum(np.abs(a1) ** 2, 1),
                               np.sum(np.abs(a2) ** 2, 1), [4, 4], n_blocks=4)
        meas = orderingCorrect(acc)
        assert any("n_traj" in d for d in meas.diagnostics)

    def test_errors(self):
        with pytest.raises(ValueError):
            orderingCorrect(StatsAccumulator(3))
        acc = StatsAccumulator(2).add([1., 1.], 0)
        with pytest.raises(ValueError):
            orderingCorrect(acc)


class TestAccumulator:
    def test_merge_is_exact(self, rng):
        x = rng.normal(size=(50, 3))
        whole = StatsAccumulator(3, n_blocks=4)
        left = StatsAccumulator(3, n_blocks=4)
        right = StatsAccumulator(3, n_blocks=4)
        for i, row in enumerate(x):
            whole.add(row, i)
            (left if i < 20 else right).add(row, i)
        n, mean, cov = left.merge(right).total()
        n_w, mean_w, cov_w = whole.total()
        assert n == n_w == 50
        np.testing.assert_allclose(mean, mean_w, rtol=1e-12)
        np.testing.assert_allclose(cov, cov_w, rtol=1e-10)
        np.testing.assert_allclose(cov, np.cov(x.T), rtol=1e-10)

    def test_shape_checks(self):
        with pytest.raises(ValueError):
            StatsAccumulator(2, n_blocks=0)
        with pytest.raises(ValueError):
            StatsAccumulator(2).add([1., 2., 3.], 0)
        with pytest.raises(ValueError):
            StatsAccumulator(2, 4).merge(StatsAccumulator(2, 8))

    def test_single_block_has_no_errors(self, rng):
        acc = StatsAccumulator(2, n_blocks=1)
        for i in range(10):
            acc.add(rng.normal(size=2), i)
        _, errors = acc.jackknife(lambda n, mean, cov: {"m": mean})
        assert np.all(np.isnan(errors["m"]))


class TestEfficiency:
    @pytest.fixture
    def twin(self):
        return Measurement(N1=5., N2=5., N_plus=10., var_minus=0., ratio=0.,
                           self_var_1=20., self_var_2=20., cross_cov=25.,
                           n_traj=100, std_err={"N_plus": 0.1,
                                                "var_minus": 0.2,
                                                "ratio": 0.02})

    @pytest.mark.parametrize("mode", ["general", "ideal"])
    def test_perfect_twins(self, twin, mode):
        out = applyEfficiency(twin, 0.5, mode)
        assert out.N_plus == 5.
        assert out.var_minus == pytest.approx(2.5)
        assert out.ratio == pytest.approx(0.5)
        assert out.cross_cov == pytest.approx(6.25)

    def test_general_keeps_excess_noise(self, twin):
        noisy = applyEfficiency(dataclasses.replace(twin, var_minus=10.,
                                                    ratio=1.), 0.5)
        assert noisy.ratio == pytest.approx(1.)

    def test_lossless_and_dark(self, twin):
        assert applyEfficiency(twin, 1.) == twin
        dark = applyEfficiency(twin, 0.)
        assert np.isnan(dark.ratio)
        assert dark.diagnostics

    def test_invalid(self, twin):
        with pytest.raises(ValueError):
            applyEfficiency(twin, -0.1)
        with pytest.raises(ValueError):
            applyEfficiency(twin, 0.5, "thinned")

    def test_table(self, twin):
        table = measurementTable([(1e-5, twin), (2e-5, twin)])
        assert table.shape[0] == 2
        assert list(table["d"]) == [1e-5, 2e-5]
        assert "err_var_minus" in table.columns


class TestCorrelationMap:
    @pytest.fixture
    def binned(self, small_grid):
        det = DetectorSpec(d=small_grid.dx, plane="NearField")
        acc = None
        for i in range(60):
            state = sampleVacuum(small_grid, TrajectorySeed(4, i))
            counts, axis, modes = binnedCounts(state, det, map_bin=4)
            if acc is None:
                acc = StatsAccumulator(counts.size, n_blocks=6, modes=modes)
            acc.add(counts, i)
        return acc, axis

    def test_bins_cover_the_lattice(self, small_grid):
        state = sampleVacuum(small_grid, TrajectorySeed(4, 0))
        det = DetectorSpec(d=small_grid.dx, plane="NearField")
        counts, axis, modes = binnedCounts(state, det, map_bin=4)
        assert counts.size == 2 * small_grid.N_x // 4
        assert counts.sum() == pytest.approx(state.photonSum())
        assert modes.sum() == 2 * np.prod(small_grid.shape)
        with pytest.raises(ValueError):
            binnedCounts(state, det, map_bin=3)

    def test_difference_variance_matches_pair(self, binned):
        acc, axis = binned
        cmap = correlationMap(acc, axis)
        n = axis.size
        w1 = np.zeros(2 * n)
        w2 = np.zeros(2 * n)
        w1[5:8] = 1.
        w2[n + 5:n + 8] = 1.

        _, mean, cov = acc.total()
        pair = StatsAccumulator(2, n_blocks=6, modes=[w1 @ acc.modes,
                                                      w2 @ acc.modes])
        pair.n[:] = acc.n
        pair.mean = acc.mean @ np.stack([w1, w2], axis=1)
        pair.m2 = np.einsum("ia,bij,jc->bac", np.stack([w1, w2]).T,
                            acc.m2, np.stack([w1, w2]).T)
        meas = orderingCorrect(pair)

        var, n_plus = cmap.differenceVariance(w1, w2)
        assert var == pytest.approx(meas.var_minus, rel=1e-9)
        assert n_plus == pytest.approx(meas.N_plus, rel=1e-9, abs=1e-9)

    def test_row_and_errors(self, binned):
        acc, axis = binned
        cmap = correlationMap(acc, axis)
        assert cmap.row(axis[3]).shape == axis.shape
        assert cmap.std_err.shape == cmap.matrix.shape
        assert correlationMap(acc, axis, errors=False).std_err is None
        assert cmap.index(axis[3], envelope=1) == axis.size + 3


class TestGaussianFactorization:
    def test_squeezed_samples_factorize(self, rng):
        a1, a2 = _twinSamples(rng, 4000, 2, 0.8)
        out = gaussianFactorization(np.concatenate([a1, a2], axis=1))
        assert out["max_z"] < 5.
        # twin cells carry anomalous correlations
        assert out["predicted"][0, 2] > 0.1

    def test_needs_samples(self, rng):
        with pytest.raises(ValueError):
            gaussianFactorization(rng.normal(size=(5, 2)))

    def test_propagated_fields_factorize(self, small_grid, bbo,
                                         pulsed_bbo_pump):
        config = EnsembleConfig(bbo, pulsed_bbo_pump, small_grid,
                                StepScheme(n_z=4), master_seed=12)
        cx, ct = small_grid.N_x // 2, small_grid.N_t // 2
        block = (slice(cx - 4, cx + 4), slice(ct - 4, ct + 4))

        def cells(state):
            return np.concatenate([a[block].ravel() for a in state.envelopes])

        samples = np.array([c for _, c in runEnsemble(600, config, cells,
                                                      n_jobs=2)])
        assert samples.shape == (600, 128)
        out = gaussianFactorization(samples, small_grid.cell_volume)
        assert out["max_z"] < 6.
        # signal and idler cells carry anomalous correlations
        assert np.max(out["predicted"][:64, 64:]) > 0.1
