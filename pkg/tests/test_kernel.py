"""Kernel tests: step fenceposts, event ordering, audit log, player and
schedule application, outage/restore behavior, and determinism."""

import os
from datetime import datetime, timedelta

import pytest

from tesgrid.errors import NotSwitchable, UnknownProperty
from tesgrid.glm import parse_scenario
from tesgrid.kernel import Engine, Event, EventQueue, build_event_list
from tesgrid.model import AttackConfig
from tesgrid.recorder import write_results

START = datetime(2013, 7, 1, 0, 0, 0)


def run_small(text, **kwargs):
    model = parse_scenario(text)
    engine = Engine(model, **kwargs)
    return engine, engine.run()


def test_fencepost_row_count(small_text):
    _, result = run_small(small_text)
    # one hour at 60 s: boundaries at 00:00 .. 01:00 inclusive = 61 rows
    for table in result.tables.values():
        assert len(table.rows) == 61
    assert result.metadata["steps"] == 60


def test_market_round_every_period(small_text):
    engine, _ = run_small(small_text)
    # 300 s period over [0, 3600] inclusive: rounds at 0, 5, ..., 60 min
    assert engine.markets["A1"].current_period == 13


def test_event_queue_fifo_ties():
    queue = EventQueue()
    t = START
    queue.push(Event(t, "h1", "cooling_setpoint", 71.0, "schedule"))
    queue.push(Event(t, "h1", "cooling_setpoint", 72.0, "schedule"))
    queue.push(Event(t + timedelta(60), "h1", "cooling_setpoint", 73.0, "schedule"))
    due = queue.pop_due(t)
    assert [e.value for e in due] == [71.0, 72.0]
    assert len(queue) == 1


def test_same_time_events_last_wins(small_text):
    text = small_text + (
        'schedule {\n'
        '  entry "2013-07-01 00:10:00" h1 cooling_setpoint 71 degF;\n'
        '  entry "2013-07-01 00:10:00" h1 cooling_setpoint 72 degF;\n'
        '}\n'
    )
    engine, result = run_small(text)
    assert engine.houses["h1"].t_set == 72.0
    rows = [r for r in result.audit if r.prop == "cooling_setpoint"]
    assert [(r.old_value, r.new_value) for r in rows] == [(70.0, 71.0), (71.0, 72.0)]
    assert all(r.origin == "schedule" for r in rows)


def test_schedule_repeat_expansion():
    model = parse_scenario(
        'schedule { name s; entry "2013-07-01 00:05:00" h1 cooling_setpoint 71 degF; repeat 1200 s; }'
    )
    queue = build_event_list(model.schedules, [], START, START + timedelta(hours=1))
    times = []
    while len(queue):
        times.extend(e.time for e in queue.pop_due(START + timedelta(hours=2)))
    assert times == [START + timedelta(minutes=m) for m in (5, 25, 45)]


def test_out_of_window_warning():
    model = parse_scenario(
        'schedule { name s; entry "2013-06-30 23:00:00" h1 cooling_setpoint 71 degF; }'
    )
    queue = build_event_list(model.schedules, [], START, START + timedelta(hours=1))
    assert len(queue) == 0
    assert len(queue.warnings) == 1 and "OutOfWindow" in queue.warnings[0]


def test_unknown_property_aborts(small_text):
    engine = Engine(parse_scenario(small_text))
    queue = EventQueue()
    queue.push(Event(START, "h1", "paint_color", 1.0, "schedule"))
    with pytest.raises(UnknownProperty):
        engine.run(queue)


def test_event_on_transformer_status_aborts(small_text):
    engine = Engine(parse_scenario(small_text))
    queue = EventQueue()
    queue.push(Event(START, "T1", "status", "OPEN", "schedule"))
    with pytest.raises(NotSwitchable):
        engine.run(queue)


def test_player_sets_property(small_text, tmp_path):
    csv = tmp_path / "zip.csv"
    csv.write_text(
        "time,value\n2013-07-01 00:00:00,1.2\n2013-07-01 00:30:00,2.5\n"
    )
    text = small_text + (
        f'player {{ name p1; target z1; property base_power; file {csv.name}; }}\n'
    )
    engine, result = run_small(text, base_dir=str(tmp_path))
    assert engine.appliances["z1"].power_kw == 2.5
    player_rows = [r for r in result.audit if r.origin == "player"]
    # step-hold: only the 00:30 change is a mutation (00:00 matches the model)
    assert [(r.time.minute, r.new_value) for r in player_rows] == [(30, 2.5)]


def test_line_attack_outage_and_restore(small_text):
    text = small_text + (
        'attack { name phys; kind LINE_STATUS; start "2013-07-01 00:20:00"; '
        'end "2013-07-01 00:30:00"; lines UL1; status OPEN; }\n'
    )
    engine, result = run_small(text)
    tm3 = {r[0]: r for r in result.tables["rec_tm3"].rows}
    before = tm3["2013-07-01 00:10:00"]
    during = tm3["2013-07-01 00:25:00"]
    after = tm3["2013-07-01 00:45:00"]
    assert float(during[1]) == 0.0 and float(during[2]) == 0.0  # voltage, power
    assert during[3] == "0" and "DEENERGIZED" in during[4]
    assert after[1] == before[1] and after[2] == before[2]  # steady state restored
    statuses = [r for r in result.audit if r.prop == "status"]
    assert [(r.time.minute, r.new_value) for r in statuses] == [(20, "OPEN"), (30, "CLOSED")]
    assert all(r.origin == "attack" for r in statuses)


def test_deenergized_house_drifts_without_hvac(small_text):
    text = small_text + (
        'attack { name phys; kind LINE_STATUS; start "2013-07-01 00:10:00"; '
        'end "2013-07-01 00:50:00"; lines UL1; status OPEN; }\n'
    )
    engine, _ = run_small(text)
    # h3 lost power for 40 min and warmed; h1 kept cooling
    assert engine.houses["h3"].t_in > engine.houses["h1"].t_in


def test_power_balance_every_step(small_text):
    _, result = run_small(small_text)
    assert result.summary["powerflow_worst_mismatch_pu"] < 1e-6
    assert result.summary["complete"] == 1


def test_summary_has_no_wall_clock(small_text):
    _, result = run_small(small_text)
    assert set(result.summary) == {
        "start", "stop", "timestep_s", "steps", "seed", "topology", "attacks",
        "complete", "powerflow_solves", "powerflow_max_iterations",
        "powerflow_worst_mismatch_pu", "max_clearing_price",
    }


def test_determinism_byte_identical(small_text, tmp_path):
    text = small_text + (
        'attack { name phys; kind LINE_STATUS; start "2013-07-01 00:20:00"; '
        'end "2013-07-01 00:30:00"; lines UL1; status OPEN; }\n'
    )
    outputs = []
    for sub in ("a", "b"):
        _, result = run_small(text, seed=3)
        out = tmp_path / sub
        manifest = write_results(result, str(out))
        blob = {}
        for name in manifest:
            with open(out / name, "rb") as fh:
                blob[name] = fh.read()
        outputs.append(blob)
    assert outputs[0] == outputs[1]


def test_direct_topology_runs(small_text):
    engine, result = run_small(small_text, topology="direct")
    assert result.complete
    assert engine.aux_markets == {}


def test_auxiliary_creates_mirror_market(small_text):
    engine, _ = run_small(small_text, topology="auxiliary")
    assert set(engine.aux_markets) == {"A1"}
    assert engine.aux_markets["A1"].name == "A1_aux"


def test_market_attack_under_direct_topology_rejected(small_text):
    model = parse_scenario(small_text)
    model.attacks.append(
        AttackConfig("a", "SELLER_PRICE_OVERRIDE", START + timedelta(minutes=10),
                     START + timedelta(minutes=20), price=0.63)
    )
    from tesgrid.errors import ConfigError
    with pytest.raises(ConfigError):
        Engine(model, topology="direct")
