"""House thermal-model tests against the closed-form exponential, plus
thermostat hysteresis and unpowered-drift behavior."""

import pytest
from oracles import analytic_temperature

from tesgrid.loads import BTU_PER_KWH, HouseState, hvac_power, init_mode, solar_output, step_house


def make_house(**overrides):
    params = dict(
        name="h",
        t_in=80.0,
        t_set=75.0,
        deadband=2.0,
        capacitance=2000.0,
        ua=550.0,
        internal_gains=1800.0,
        hvac_kw=4.0,
        cop=3.5,
    )
    params.update(overrides)
    return HouseState(**params)


def test_exponential_approach_matches_euler():
    """Acceptance: 1 h at dt = 1 s within 0.1% of the closed form."""
    house = make_house(t_in=70.0, t_set=200.0)  # thermostat never engages
    init_mode(house)
    assert house.mode == "OFF"
    t_out = 95.0
    for _ in range(3600):
        step_house(house, t_out, 1.0)
    exact = analytic_temperature(70.0, t_out, house.ua, house.capacitance, house.internal_gains, 1.0)
    assert abs(house.t_in - exact) / abs(exact) < 1e-3


def test_cooling_toward_ambient():
    house = make_house(t_in=90.0, t_set=200.0, internal_gains=0.0)
    init_mode(house)
    t_out = 60.0
    for _ in range(3600):
        step_house(house, t_out, 1.0)
    exact = analytic_temperature(90.0, t_out, house.ua, house.capacitance, 0.0, 1.0)
    assert abs(house.t_in - exact) / abs(exact) < 1e-3


def test_q_hvac_units():
    house = make_house()
    assert house.q_hvac == pytest.approx(4.0 * 3.5 * BTU_PER_KWH)


def test_thermostat_hysteresis():
    house = make_house(t_in=75.0)
    init_mode(house)
    assert house.mode == "OFF"
    house.t_in = 76.5  # above t_set + deadband/2
    step_house(house, 95.0, 60.0)
    assert house.mode == "COOL"
    # stays COOL inside the band
    house.t_in = 75.0
    step_house(house, 95.0, 60.0)
    assert house.mode == "COOL"
    house.t_in = 73.5  # below t_set - deadband/2 after the step
    step_house(house, 60.0, 60.0)
    assert house.mode == "OFF"


def test_limit_cycle_stays_in_band():
    house = make_house(t_in=75.0)
    init_mode(house)
    for _ in range(24 * 60):
        step_house(house, 95.0, 60.0)
        assert 73.5 <= house.t_in <= 76.5


def test_duty_cycle_matches_heat_balance():
    """Long-run ON fraction equals gain/extraction ratio."""
    house = make_house(t_in=75.0)
    init_mode(house)
    on = 0
    steps = 48 * 60
    for _ in range(steps):
        step_house(house, 95.0, 60.0)
        on += house.mode == "COOL"
    gain = house.ua * (95.0 - 75.0) + house.internal_gains
    expected = gain / house.q_hvac
    assert on / steps == pytest.approx(expected, rel=0.05)


def test_hvac_power():
    house = make_house()
    house.mode = "COOL"
    assert hvac_power(house) == 4.0
    house.mode = "OFF"
    assert hvac_power(house) == 0.0


def test_unpowered_house_drifts_and_stays_off():
    house = make_house(t_in=80.0)
    house.mode = "COOL"
    step_house(house, 95.0, 60.0, powered=False)
    assert house.mode == "OFF"
    before = house.t_in
    step_house(house, 95.0, 60.0, powered=False)
    assert house.t_in > before  # warming, never re-engages
    assert house.mode == "OFF"


def test_init_mode():
    hot = make_house(t_in=80.0)
    init_mode(hot)
    assert hot.mode == "COOL"
    cool = make_house(t_in=74.0)
    init_mode(cool)
    assert cool.mode == "OFF"


def test_solar_output():
    assert solar_output(3.0, 0.9, 0.5) == pytest.approx(1.35)
    assert solar_output(3.0, 0.9, 0.0) == 0.0
