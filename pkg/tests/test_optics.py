import numpy as np
import pytest

from twinbeam.spdc.fields import FieldState, TrajectorySeed, sampleVacuum, \
    vacuumLike
from twinbeam.spdc.misc import ConfigError
from twinbeam.spdc.optics import FAR, FREE, NEAR, OpticalPath, applyLoss, \
    applyPath, farFieldAxis, freeSpace, imageNearField, shiftTransverse, \
    spectralFilter, toFarField

WAVELENGTHS = (812e-9, 812e-9)


@pytest.fixture
def vacuum(small_grid):
    return sampleVacuum(small_grid, TrajectorySeed(21, 0),
                        wavelengths=WAVELENGTHS)


class TestOpticalPath:
    def test_kinds(self):
        with pytest.raises(ConfigError):
            OpticalPath(kind="Telescope")
        with pytest.raises(ConfigError):
            OpticalPath(kind=FAR, f=-0.1)

    def test_diagnostics(self, lbo, bbo):
        assert OpticalPath(kind=FAR).diagnostics(lbo)
        assert OpticalPath(kind=NEAR, delta_z=2 * bbo.l_c).diagnostics(bbo)
        assert OpticalPath(kind=NEAR).diagnostics(lbo)
        assert OpticalPath(kind=NEAR, delta_z=1e-4).diagnostics(bbo) == []

    def test_to_dict(self):
        path = OpticalPath(kind=NEAR, delta_z=1e-4, delta_y=2e-5)
        assert OpticalPath(**path.toDict()) == path


class TestFreeSpace:
    def test_unitary_and_reversible(self, vacuum):
        out = freeSpace(vacuum, 0.05)
        assert out.photonSum() == pytest.approx(vacuum.photonSum(), rel=1e-12)
        assert out.plane_z == pytest.approx(0.05)
        back = freeSpace(out, -0.05)
        for a, b in zip(vacuum.envelopes, back.envelopes):
            np.testing.assert_allclose(b, a, atol=1e-9 * np.abs(a).max())

    def test_needs_wavelengths(self, small_grid):
        state = sampleVacuum(small_grid, TrajectorySeed(21, 1))
        with pytest.raises(ValueError):
            freeSpace(state, 0.01)

    def test_integer_shift_is_a_roll(self, vacuum, small_grid):
        out = shiftTransverse(vacuum, 3 * small_grid.dx)
        np.testing.assert_allclose(out.envelopes[1],
                                   np.roll(vacuum.envelopes[1], 3, axis=0),
                                   atol=1e-9 * np.abs(vacuum.envelopes[1]).max())
        np.testing.assert_allclose(out.envelopes[0], vacuum.envelopes[0])


class TestFarField:
    def test_preserves_photon_number(self, vacuum):
        out = toFarField(vacuum, OpticalPath(kind=FAR, f=0.2))
        assert out.plane == "far"
        assert out.photonSum() == pytest.approx(vacuum.photonSum(), rel=1e-12)

    def test_mode_lands_at_lens_position(self, small_grid):
        n = np.arange(small_grid.N_x)[:, None]
        a = np.exp(2j * np.pi * 5 * n / small_grid.N_x) * \
            np.ones((1, small_grid.N_t))
        state = FieldState([a], small_grid, wavelengths=(812e-9,))
        out = toFarField(state, OpticalPath(kind=FAR, f=0.2))
        profile = np.sum(np.abs(out.envelopes[0]) ** 2, axis=1)
        x = farFieldAxis(out)
        q = 2 * np.pi * 5 / small_grid.L_x
        assert x[np.argmax(profile)] == pytest.approx(812e-9 * 0.2 * q /
                                                      (2 * np.pi))
        assert out.pitch[0][0] == pytest.approx(812e-9 * 0.2 /
                                                small_grid.L_x)

    def test_needs_focal_length(self, vacuum):
        with pytest.raises(ValueError):
            toFarField(vacuum, OpticalPath(kind=FAR))

    def test_dispatch(self, vacuum):
        assert applyPath(vacuum, OpticalPath(kind=FAR, f=0.2)).plane == "far"
        out = applyPath(vacuum, OpticalPath(kind=FREE, delta_z=0.01))
        assert out.plane_z == pytest.approx(0.01)


class TestNearField:
    def test_returns_signal_and_idler(self, vacuum):
        path = OpticalPath(kind=NEAR, delta_z=1e-4, delta_y=2e-5)
        signal, idler = imageNearField(vacuum, path)
        assert signal.plane == idler.plane == "near"
        assert signal.n_envelopes == idler.n_envelopes == 1
        assert signal.photonSum() + idler.photonSum() == \
            pytest.approx(vacuum.photonSum(), rel=1e-12)

    def test_no_shift_is_identity(self, vacuum):
        signal, idler = imageNearField(vacuum, OpticalPath(kind=NEAR))
        np.testing.assert_allclose(idler.envelopes[0], vacuum.envelopes[1])

    def test_aliasing(self, vacuum):
        with pytest.raises(ValueError):
            imageNearField(vacuum, OpticalPath(kind=NEAR, delta_z=1e3))

    def test_needs_two_envelopes(self, small_grid):
        state = sampleVacuum(small_grid, TrajectorySeed(21, 2), 1,
                             wavelengths=(812e-9,))
        with pytest.raises(ValueError):
            imageNearField(state, OpticalPath(kind=NEAR))


class TestDetectionChain:
    def test_filter_keeps_pass_band(self, vacuum, small_grid):
        omega_max = 0.5 * np.abs(small_grid.frequency("t")).max()
        out = spectralFilter(vacuum, omega_max)
        Om = small_grid.frequency("t")
        keep = np.abs(Om) <= omega_max
        before = np.fft.fft(vacuum.envelopes[0], axis=1)[:, keep]
        after = np.fft.fft(out.envelopes[0], axis=1)[:, keep]
        np.testing.assert_allclose(after, before,
                                   atol=1e-9 * np.abs(before).max())
        rejected = np.fft.fft(out.envelopes[0], axis=1)[:, ~keep]
        assert not np.allclose(
            rejected, np.fft.fft(vacuum.envelopes[0], axis=1)[:, ~keep])

    def test_filter_errors(self, vacuum, small_grid):
        with pytest.raises(ValueError):
            spectralFilter(vacuum, 0.)
        with pytest.raises(ValueError):
            spectralFilter(vacuum.replace(seed=None), 1e13)

    def test_lossless(self, vacuum):
        out = applyLoss(vacuum, 1.)
        for a, b in zip(vacuum.envelopes, out.envelopes):
            np.testing.assert_array_equal(a, b)

    def test_total_loss_is_fresh_vacuum(self, vacuum):
        out = applyLoss(vacuum, 0.)
        fresh = vacuumLike(vacuum, vacuum.seed.generator(2))
        for a, b in zip(fresh, out.envelopes):
            np.testing.assert_allclose(b, a)

    def test_invalid_efficiency(self, vacuum):
        with pytest.raises(ValueError):
            applyLoss(vacuum, 1.5)
