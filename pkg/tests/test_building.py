import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hvacgrid.building import (BuildingState, HvacParams, ZoneBank, ZoneParams,
                               band_distance, chiller_power, comfort_factor,
                               fan_power, hvac_power, rc_step, return_air_temp,
                               zone_step)

HVAC = HvacParams(k_fan=0.5, cop=3.0, cp_air=1.005, supply_temp_c=15.0,
                  return_temp_c=30.0, mdot_min=0.0, mdot_max=2.5)
ZONE = ZoneParams(thermal_capacitance=2.0, envelope_resistance=5.0,
                  internal_gain_kw=0.0, desired_temp_c=25.0, criticality=0.6)


class TestFanChiller:
    def test_fan_hand_value(self):
        assert fan_power(HVAC, 2.0) == pytest.approx(2.0, abs=1e-9)

    def test_fan_zero(self):
        assert fan_power(HVAC, 0.0) == 0.0

    def test_fan_quadratic(self):
        assert fan_power(HVAC, 2.4) == pytest.approx(4 * fan_power(HVAC, 1.2), abs=1e-9)

    def test_chiller_hand_value(self):
        assert chiller_power(HVAC, 1.0) == pytest.approx(5.025, abs=1e-9)

    def test_chiller_zero_flow(self):
        assert chiller_power(HVAC, 0.0) == 0.0

    def test_chiller_linear(self):
        assert chiller_power(HVAC, 2.0) == pytest.approx(2 * chiller_power(HVAC, 1.0),
                                                         abs=1e-9)

    def test_chiller_nonnegative(self):
        assert chiller_power(HVAC, 1.7) >= 0.0


class TestHvacPower:
    def test_all_zero(self):
        assert hvac_power(HVAC, [0.0, 0.0, 0.0]) == 0.0

    def test_single_zone_reduction(self):
        m = 0.8
        assert hvac_power(HVAC, [m]) == pytest.approx(
            fan_power(HVAC, m) + chiller_power(HVAC, m), abs=1e-12)

    def test_two_zone_hand_value(self):
        # k_f=0.5, cp=1.005, cop=3, Ts-Tc=15, mdots=[1,1]: 0.5*4 + 5.025*2
        assert hvac_power(HVAC, [1.0, 1.0]) == pytest.approx(12.05, abs=1e-9)

    def test_bounds_enforced(self):
        with pytest.raises(ValueError):
            hvac_power(HVAC, [3.0])
        with pytest.raises(ValueError):
            hvac_power(HVAC, [-0.1])

    def test_weighted_return_air(self):
        temps = np.array([20.0, 30.0])
        mdots = np.array([1.0, 1.0])
        assert return_air_temp(HVAC, mdots, temps) == pytest.approx(25.0)
        assert return_air_temp(HVAC, np.zeros(2), temps) == HVAC.return_temp_c
        expect = fan_power(HVAC, 2.0) + chiller_power(HVAC, 2.0, 25.0)
        assert hvac_power(HVAC, mdots, zone_temps=temps) == pytest.approx(expect, abs=1e-12)

    @given(st.lists(st.floats(0.0, 2.4), min_size=1, max_size=5), st.floats(0.001, 0.1))
    def test_strictly_increasing_in_flow(self, mdots, bump):
        mdots = np.array(mdots)
        if np.sum(mdots) + bump > HVAC.mdot_max * len(mdots):
            return
        lo = hvac_power(HVAC, mdots)
        hi = hvac_power(HVAC, np.minimum(mdots + bump / len(mdots), HVAC.mdot_max))
        assert hi > lo


class TestZoneStep:
    def test_equilibrium_unchanged(self):
        t = zone_step(ZONE, HVAC, 30.0, 30.0, 0.0, 0.5)
        assert t == pytest.approx(30.0, abs=1e-12)

    def test_cooling_sign(self):
        t = zone_step(ZONE, HVAC, 30.0, 30.0, 1.0, 0.5)
        assert t < 30.0

    def test_matches_fine_substep_reference(self):
        # 24 h trajectory at 1-minute substeps vs a literal 1-second Euler loop
        t_coarse = 28.0
        t_ref = 28.0
        t_out = 34.0
        mdot = 0.4
        dt = 0.5
        h_ref = 1.0 / 3600.0
        k = (1.0 / (ZONE.envelope_resistance * ZONE.thermal_capacitance)
             + HVAC.cp_air * mdot / ZONE.thermal_capacitance)
        c = (t_out / ZONE.envelope_resistance
             + HVAC.cp_air * mdot * HVAC.supply_temp_c
             + ZONE.internal_gain_kw) / ZONE.thermal_capacitance
        for _ in range(48):
            t_coarse = zone_step(ZONE, HVAC, t_coarse, t_out, mdot, dt)
            for _ in range(1800):
                t_ref = t_ref + h_ref * (c - k * t_ref)
            assert abs(t_coarse - t_ref) < 0.05

    def test_mdot_bounds_enforced(self):
        with pytest.raises(ValueError):
            zone_step(ZONE, HVAC, 25.0, 30.0, 5.0, 0.5)

    @given(st.floats(10.0, 45.0), st.floats(15.0, 45.0), st.floats(0.05, 2.0))
    @settings(max_examples=60)
    def test_contraction_toward_outdoor(self, t0, t_out, dt):
        # mdot = 0, q = 0: the zone relaxes toward T_out without overshoot
        t1 = zone_step(ZONE, HVAC, t0, t_out, 0.0, round(dt * 60) / 60.0 or 1 / 60)
        assert abs(t1 - t_out) <= abs(t0 - t_out) + 1e-12

    def test_more_airflow_never_warmer_steady_state(self):
        # supply air colder than the zone: raising airflow lowers equilibrium
        temps = []
        for mdot in (0.1, 0.5, 1.0):
            t = 30.0
            for _ in range(500):
                t = zone_step(ZONE, HVAC, t, 34.0, mdot, 0.5)
            temps.append(t)
        assert temps[0] > temps[1] > temps[2]
        assert all(t > HVAC.supply_temp_c for t in temps)


class TestComfortFactor:
    def test_single_step_hand_value(self):
        assert comfort_factor([27.0], desired=25.0) == pytest.approx(0.5, abs=1e-9)

    def test_clamped_at_setpoint(self):
        assert comfort_factor([25.0], desired=25.0, eps_comfort=0.1) == pytest.approx(10.0)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            comfort_factor([], desired=25.0)

    def test_always_finite(self):
        traj = np.array([25.0, 25.0, 25.0000001])
        assert np.isfinite(comfort_factor(traj, 25.0))

    @given(st.lists(st.floats(0.0, 10.0), min_size=1, max_size=8),
           st.lists(st.floats(0.0, 1.0), min_size=8, max_size=8))
    def test_pointwise_closer_is_more_comfortable(self, devs, shrink):
        devs = np.array(devs)
        closer = devs * np.array(shrink[: len(devs)])
        cf_far = comfort_factor(25.0 + devs, 25.0)
        cf_near = comfort_factor(25.0 + closer, 25.0)
        assert cf_near >= cf_far - 1e-12


class TestBandDistance:
    def test_inside_zero(self):
        assert np.all(band_distance([24.0, 26.9], 23.0, 27.0) == 0.0)

    def test_above_and_below(self):
        d = band_distance([22.0, 29.0], 23.0, 27.0)
        assert d[0] == pytest.approx(1.0) and d[1] == pytest.approx(2.0)


class TestTypes:
    def test_building_state_shape_checked(self):
        with pytest.raises(ValueError):
            BuildingState(np.array([25.0, 26.0]), n_zones=3)

    def test_zone_validation(self):
        with pytest.raises(ValueError):
            ZoneParams(-1.0, 5.0, 0.0, 25.0, 0.5)
        with pytest.raises(ValueError):
            ZoneParams(1.0, 5.0, 0.0, 25.0, 1.5)

    def test_hvac_validation(self):
        with pytest.raises(ValueError):
            HvacParams(k_fan=0.5, cop=3.0, supply_temp_c=30.0, return_temp_c=20.0)

    def test_zone_bank_roundtrip(self):
        zones = [ZONE, ZoneParams(1.0, 2.0, 0.1, 24.0, 0.9)]
        bank = ZoneBank.from_zones(zones)
        assert bank.n == 2
        assert bank.desired[1] == 24.0

    def test_rc_step_batched_matches_scalar(self):
        bank = ZoneBank.from_zones([ZONE, ZONE])
        temps = np.array([[28.0, 31.0], [26.0, 29.0]])
        mdots = np.array([[0.3, 0.0], [1.0, 0.2]])
        out = rc_step(bank, HVAC, temps, 33.0, mdots, 0.5)
        for b in range(2):
            for z in range(2):
                single = zone_step(ZONE, HVAC, temps[b, z], 33.0, mdots[b, z], 0.5)
                assert out[b, z] == pytest.approx(single, abs=1e-12)
