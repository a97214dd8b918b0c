import numpy as np
import pytest

from twinbeam.spdc.crystal import PumpParams, deriveScales
from twinbeam.spdc.grid import GridSpec
from twinbeam.spdc.misc import ConfigError


class TestGridSpec:
    def test_shapes(self):
        assert GridSpec(dims="X_T", N_x=32, N_t=8).shape == (32, 8)
        assert GridSpec(dims="XY", N_x=16, N_y=8, L_y=1e-3).shape == (16, 8)
        grid = GridSpec(dims="XY_T", N_x=16, N_y=8, N_t=4, L_y=1e-3)
        assert grid.shape == (16, 8, 4)
        assert grid.time_axis == 2
        assert grid.transverse_axes == (0, 1)

    def test_power_of_two(self):
        with pytest.raises(ConfigError) as err:
            GridSpec(N_x=100, N_t=30)
        assert len(err.value.diagnostics) == 2

    def test_missing_y_window(self):
        with pytest.raises(ConfigError):
            GridSpec(dims="XY", N_x=16, N_y=16)

    def test_cell_volume(self, small_grid):
        assert small_grid.cell_volume == pytest.approx(
            small_grid.dx * small_grid.dt)
        grid = GridSpec(dims="XY", N_x=16, N_y=8, L_x=1e-3, L_y=2e-3)
        assert not grid.has_time
        assert grid.cell_volume == pytest.approx(grid.dx * grid.dy)

    def test_axis_is_centred(self, small_grid):
        x = small_grid.axis("x")
        assert x[small_grid.N_x // 2] == 0.
        assert x[1] - x[0] == pytest.approx(small_grid.dx)

    def test_frequency_signs(self, small_grid):
        q = small_grid.frequency("x")
        Om = small_grid.frequency("t")
        assert q[1] > 0
        assert Om[1] < 0
        assert q[1] == pytest.approx(2 * np.pi / small_grid.L_x)

    def test_one_dimensional_axis_is_walk_off(self, small_grid):
        x, y, t = small_grid.realCoordinates()
        assert np.all(x == 0.)
        assert np.shape(y) == (small_grid.N_x, 1)
        assert np.shape(t) == (1, small_grid.N_t)
        q_x, q_y, Om = small_grid.waveVectors()
        assert np.all(q_x == 0.)
        assert np.shape(q_y) == (small_grid.N_x, 1)

    def test_conjugate_index(self, small_grid, rng):
        a = rng.normal(size=small_grid.shape)
        spec = np.fft.fftn(a)
        # real input: F(-k) = F(k)^*
        np.testing.assert_allclose(spec[small_grid.conjugateIndex()],
                                   np.conj(spec), atol=1e-10)

    def test_to_dict(self, small_grid):
        assert GridSpec(**small_grid.toDict()) == small_grid


class TestValidate:
    def test_resolving_grid(self, bbo):
        pump = PumpParams.fromGain(bbo, 3., w_0=332e-6, tau_0=1.5e-12)
        grid = GridSpec(N_x=1024, N_t=128, L_x=2.4e-3, T_win=12e-12)
        assert grid.validate(deriveScales(bbo, pump), pump) == []

    def test_coarse_grid(self, bbo):
        pump = PumpParams.fromGain(bbo, 3., w_0=332e-6, tau_0=1.5e-12)
        grid = GridSpec(N_x=64, N_t=4, L_x=2.4e-3, T_win=12e-12)
        out = grid.validate(deriveScales(bbo, pump), pump)
        assert any(d.startswith("grid.N_x") for d in out)
        assert any(d.startswith("grid.N_t") for d in out)

    def test_small_window(self, bbo):
        pump = PumpParams.fromGain(bbo, 3., w_0=1e-3, tau_0=5e-12)
        grid = GridSpec(N_x=2048, N_t=128, L_x=2.4e-3, T_win=12e-12)
        out = grid.validate(deriveScales(bbo, pump), pump)
        assert any(d.startswith("grid.L_x") for d in out)
        assert any(d.startswith("grid.T_win") for d in out)

    def test_plane_wave_skips_windows(self, bbo):
        pump = PumpParams.fromGain(bbo, 3.)
        grid = GridSpec(N_x=1024, N_t=128, L_x=2.4e-3, T_win=12e-12)
        assert grid.validate(deriveScales(bbo, pump), pump) == []
