import dataclasses

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from twinbeam.spdc import pwpa
from twinbeam.spdc.crystal import PumpParams, deriveScales, detuning
from twinbeam.spdc.misc import QuadratureError


def _interactionPictureOracle(crystal, sigma_p, q, Omega):
    """
    Integrates dA1/dz = i d1 A1 + sigma_p e^{-i Delta_0 z} B*,
    dB*/dz = -i d2 B* + sigma_p e^{i Delta_0 z} A1 with d2 the idler
    detuning at (-q, -Omega), in the interaction picture. Returns the
    coefficients (U1, V1) of A1(l_c) on A1(0) and B*(0).
    """
    d1 = float(detuning(1, q, Omega, crystal))
    d2 = float(detuning(2, -q, -Omega, crystal))
    total = crystal.delta_0 + d1 + d2

    def rhs(z, y):
        alpha, beta = y
        return [sigma_p * np.exp(-1j * total * z) * beta,
                sigma_p * np.exp(1j * total * z) * alpha]

    out = []
    for y0 in ([1. + 0j, 0j], [0j, 1. + 0j]):
        sol = solve_ivp(rhs, (0., crystal.l_c), y0, method="DOP853",
                        rtol=1e-12, atol=1e-14)
        out.append(np.exp(1j * d1 * crystal.l_c) * sol.y[0, -1])
    return tuple(out)


class TestGainUV:
    @pytest.mark.parametrize("gain", [0.5, 3., 4.])
    @pytest.mark.parametrize("name", ["lbo", "bbo"])
    def test_unitarity(self, request, name, gain):
        crystal = request.getfixturevalue(name)
        pump = PumpParams.fromGain(crystal, gain)
        scales = deriveScales(crystal, pump)
        Omega_0 = scales.Omega_0
        q = np.linspace(-4 * scales.q_0, 4 * scales.q_0, 100)
        Om = np.linspace(-4 * Omega_0, 4 * Omega_0, 100)
        qq, WW = np.meshgrid(q, Om, indexing="ij")
        sigma_p = pump.sigmaP(crystal)

        g = pwpa.gainUV(qq, WW, crystal, sigma_p)
        gm = pwpa.gainUV(-qq, -WW, crystal, sigma_p)
        assert np.max(np.abs(np.abs(g.U1) ** 2 - np.abs(g.V1) ** 2 - 1)) \
            < 1e-10
        assert np.max(np.abs(np.abs(g.U2) ** 2 - np.abs(g.V2) ** 2 - 1)) \
            < 1e-10
        assert np.max(np.abs(g.U1 * gm.V2 - gm.U2 * g.V1)) < 1e-10
        np.testing.assert_allclose(np.abs(g.V1), np.abs(gm.V2), rtol=1e-12,
                                   atol=1e-14)

    def test_no_gain(self, bbo):
        g = pwpa.gainUV(np.linspace(-1e5, 1e5, 11), 1e12, bbo, 0.)
        assert np.all(g.V1 == 0) and np.all(g.V2 == 0)
        np.testing.assert_allclose(np.abs(g.U1), 1., rtol=1e-14)

    def test_phase_matched_gain(self, lbo):
        pump = PumpParams.fromGain(lbo, 3.)
        scales = deriveScales(lbo, pump)
        g = pwpa.gainUV(scales.q_R, 0., lbo, pump.sigmaP(lbo))
        assert np.abs(g.V1) ** 2 == pytest.approx(np.sinh(3.) ** 2, rel=1e-8)

    @pytest.mark.parametrize("q_scale, Omega_scale", [(0.5, 0.3),
                                                      (3.5, -0.2),
                                                      (6., 1.)])
    def test_two_mode_oracle(self, lbo, q_scale, Omega_scale):
        pump = PumpParams.fromGain(lbo, 3.)
        scales = deriveScales(lbo, pump)
        sigma_p = pump.sigmaP(lbo)
        q = q_scale * scales.q_0
        Omega = Omega_scale * scales.Omega_0
        U1, V1 = _interactionPictureOracle(lbo, sigma_p, q, Omega)
        g = pwpa.gainUV(q, Omega, lbo, sigma_p)
        assert abs(g.U1 - U1) < 1e-8 * abs(U1)
        assert abs(g.V1 - V1) < 1e-8 * max(abs(V1), 1e-3)

    def test_two_mode_oracle_walk_off(self, bbo):
        sigma_p = 3. / bbo.l_c
        q, Omega = -4e5, 5e11
        U1, V1 = _interactionPictureOracle(bbo, sigma_p, q, Omega)
        g = pwpa.gainUV(q, Omega, bbo, sigma_p)
        assert abs(g.U1 - U1) < 1e-8 * abs(U1)
        assert abs(g.V1 - V1) < 1e-8 * max(abs(V1), 1e-3)

    def test_partial_length(self, lbo):
        g = pwpa.gainUV(0., 0., lbo, 1. / lbo.l_c, z=0.5 * lbo.l_c)
        assert np.isfinite(g.U1)
        with pytest.raises(ValueError):
            pwpa.gainUV(0., 0., lbo, 1., z=2 * lbo.l_c)
        with pytest.raises(ValueError):
            pwpa.gainUV(0., 0., lbo, -1.)

    def test_gain_table(self, lbo):
        table = pwpa.gainTable(lbo, 3. / lbo.l_c, np.linspace(0, 2e5, 5),
                               np.linspace(-1e14, 1e14, 3))
        assert list(table.columns) == ["q", "Omega", "U2", "V2", "Delta_lc"]
        assert len(table) == 15
        np.testing.assert_allclose(table["U2"] - table["V2"], 1., rtol=1e-10)


class TestRefineQuadrature:
    def test_converges(self):
        val, trace = pwpa.refineQuadrature(lambda lvl: 1. + 2. ** (-20 * lvl),
                                           rtol=1e-4)
        assert val == pytest.approx(1.)
        assert [lvl for lvl, _ in trace] == [0, 1, 2]

    def test_reports_trace(self):
        with pytest.raises(QuadratureError) as err:
            pwpa.refineQuadrature(lambda lvl: float(lvl + 1), max_levels=2)
        assert [lvl for lvl, _ in err.value.trace] == [0, 1, 2]


class TestQuadratureWindows:
    @pytest.fixture
    def scales(self, bbo):
        return deriveScales(bbo, PumpParams.fromGain(bbo, 3.))

    def test_default_window(self, bbo, scales):
        Q_x, Q_y, W, Omega_0 = pwpa.quadratureWindows(bbo, scales)
        assert Omega_0 == scales.Omega_0
        assert W == pytest.approx(6 * Omega_0)
        assert Q_y == pytest.approx(scales.q_C + Q_x)

    def test_filter_sets_transverse_window(self, bbo, scales):
        W = 1.9004e13
        Q_x, Q_y, W_out, _ = pwpa.quadratureWindows(bbo, scales,
                                                    omega_cutoff=W)
        assert W_out == W
        omega_lc = bbo.l_c * (abs(bbo.kp_1 - bbo.kp_2) * W +
                              0.5 * abs(bbo.kpp_1 + bbo.kpp_2) * W ** 2)
        edge = np.sqrt((scales.q_R / scales.q_0) ** 2 + omega_lc)
        assert Q_x == pytest.approx((edge + 6.) * scales.q_0)
        assert Q_y == pytest.approx(scales.q_C + Q_x)
        wider = pwpa.quadratureWindows(bbo, scales, omega_cutoff=2 * W)[0]
        assert wider > Q_x

    def test_invalid_filter(self, bbo, scales):
        with pytest.raises(ValueError):
            pwpa.quadratureWindows(bbo, scales, omega_cutoff=0.)


class TestMeanIntensity:
    def test_no_gain(self, lbo):
        assert pwpa.meanIntensityNear(lbo, PumpParams.fromGain(lbo, 0.)) == 0.

    def test_spontaneous_scaling(self, lbo):
        low = pwpa.meanIntensityNear(lbo, PumpParams.fromGain(lbo, 0.01),
                                     transverse_dims=1, rtol=1e-3)
        high = pwpa.meanIntensityNear(lbo, PumpParams.fromGain(lbo, 0.02),
                                      transverse_dims=1, rtol=1e-3)
        assert high / low == pytest.approx(4., rel=1e-2)

    def test_far_field_ring(self, lbo):
        pump = PumpParams.fromGain(lbo, 3., w_0=2. / (0.1 * 43546.))
        scales = deriveScales(lbo, pump, 0.2)
        table = pwpa.meanIntensityProfile(lbo, pump, 0.2, n_points=129)
        peak = table["x"][table["intensity"].idxmax()]
        assert abs(abs(peak) - scales.farFieldPosition(scales.q_R)) < \
            0.5 * scales.x_0

        far = scales.farFieldPosition(scales.q_R + 8 * scales.q_0)
        outside = pwpa.meanIntensityFar(np.array([far]), lbo, pump, 0.2,
                                        transverse_dims=1)
        assert outside[0] < 1e-3 * table["intensity"].max()

    def test_collinear_peak_on_axis(self, lbo):
        crystal = dataclasses.replace(lbo, delta_0=0.)
        pump = PumpParams.fromGain(crystal, 3., w_0=1e-3)
        x = np.linspace(-2e-3, 2e-3, 41)
        flux = pwpa.meanIntensityFar(x, crystal, pump, 0.2, transverse_dims=1)
        assert np.argmax(flux) == 20

    def test_far_field_needs_waist(self, lbo):
        with pytest.raises(ValueError):
            pwpa.meanIntensityFar(0., lbo, PumpParams.fromGain(lbo, 1.), 0.2)


class TestOptimalShifts:
    def test_reference_values(self, bbo):
        dz, dy = pwpa.optimalShifts(bbo, 3. / bbo.l_c)
        assert dz == pytest.approx(407e-6, abs=0.5e-6)
        assert dy == pytest.approx(47.5e-6, abs=0.05e-6)

    def test_low_gain_limit(self, bbo):
        dz, dy = pwpa.optimalShifts(bbo, 0.)
        assert dz == pytest.approx(bbo.l_c * (bbo.n_1 + bbo.n_2) /
                                   (4 * bbo.n_1 * bbo.n_2))
        assert dy == pytest.approx(0.5 * bbo.rho_2 * bbo.l_c)

    def test_gain_four(self, bbo):
        dz, dy = pwpa.optimalShifts(bbo, 4. / bbo.l_c)
        assert dy == pytest.approx(np.tanh(4.) / 8. * bbo.rho_2 * bbo.l_c)

    def test_type_I_rejected(self, lbo):
        with pytest.raises(ValueError):
            pwpa.optimalShifts(lbo, 1.)


class TestGainProductPhase:
    def test_identical_arguments(self, bbo):
        exact, approx, _ = pwpa.phaseOfGainProduct(1e4, 1e4, 0., bbo,
                                                   3. / bbo.l_c)
        assert exact == pytest.approx(0., abs=1e-12)
        assert approx == pytest.approx(0., abs=1e-12)

    def test_high_gain_linearization(self, bbo):
        sigma_p = 3. / bbo.l_c
        scales = deriveScales(bbo, PumpParams.fromGain(bbo, 3.))
        q = -scales.q_C + np.linspace(-0.5, 0.5, 11) * scales.q_0
        exact, approx, in_band = pwpa.phaseOfGainProduct(
            q, -scales.q_C, 0., bbo, sigma_p)
        assert in_band.all()
        wrapped = np.angle(np.exp(1j * (exact - approx)))
        assert np.max(np.abs(wrapped)) < 0.1

    def test_imaging_shifts_cancel_phase(self, bbo):
        sigma_p = 3. / bbo.l_c
        scales = deriveScales(bbo, PumpParams.fromGain(bbo, 3.))
        rng = np.random.default_rng(5)
        q = -scales.q_C + rng.uniform(-1, 1, 200) * scales.q_0
        q_ref = -scales.q_C + rng.uniform(-1, 1, 200) * scales.q_0
        exact, _, in_band = pwpa.phaseOfGainProduct(q, q_ref, 0., bbo,
                                                    sigma_p)
        dz, dy = pwpa.optimalShifts(bbo, sigma_p)
        lam = bbo.lambda_1 + bbo.lambda_2
        shift = lam * (q ** 2 - q_ref ** 2) * dz / (4 * np.pi) + \
            (q - q_ref) * dy
        total = np.angle(np.exp(1j * (exact + shift)))
        better = np.abs(total) <= np.abs(exact)
        assert better[in_band].mean() >= 0.95


class TestQuasiStationary:
    def test_pump_centre(self, lbo):
        pump = PumpParams.fromGain(lbo, 3., w_0=1e-3, tau_0=1e-12)
        q, Om = np.linspace(-1e5, 1e5, 7), 2e13
        U, V = pwpa.quasiStationaryKernels(lbo.l_c, q, Om, 0., 0., lbo, pump)
        g = pwpa.gainUV(q, Om, lbo, pump.sigmaP(lbo))
        np.testing.assert_allclose(U, g.U1, rtol=1e-12)
        np.testing.assert_allclose(V, g.V1, rtol=1e-12)

    def test_outside_pump(self, lbo):
        pump = PumpParams.fromGain(lbo, 3., w_0=1e-4, tau_0=1e-12)
        _, V = pwpa.quasiStationaryKernels(lbo.l_c, 0., 0., 2e-3, 0., lbo,
                                           pump)
        assert abs(V) < 1e-10

    def test_twin_correlation_is_strongest_at_mirror(self, lbo):
        scales = deriveScales(lbo, PumpParams.fromGain(lbo, 3.))
        pump = PumpParams.fromGain(lbo, 3., w_0=2. / (0.1 * scales.q_0),
                                   tau_0=1e-12)
        q = scales.q_R
        partner = -q + np.linspace(-0.5, 0.5, 21) * scales.q_0
        corr = np.abs(pwpa.farFieldCorrelationQS(q, partner, 0., lbo, pump,
                                                 n_x=128, n_t=16))
        assert np.argmax(corr) == 10


def test_pump_profile_peak(lbo):
    pump = PumpParams.fromGain(lbo, 2., w_0=1e-3, tau_0=1e-12)
    assert pwpa.pumpProfile(0., 0., pump) == pytest.approx(pump.A_p)
    assert pwpa.pumpProfile((1e-3, 0.), 0., pump) == \
        pytest.approx(pump.A_p * np.exp(-1))
