from __future__ import annotations

import json
import time

import pytest

from privacycube.errors import (
    MalformedDocument,
    MissingField,
    ScenarioRunError,
    TimestampsOutOfOrder,
    UnknownDeviceRef,
)
from privacycube.scenario import (
    InstantClock,
    ScaledClock,
    parse_clock_spec,
    parse_scenario,
    read_notice_log,
    run_scenario,
    write_notice_log,
)

SECTION_III_DATA = {"environmental", "biometric", "audio", "location", "visual", "usage"}
SECTION_III_USAGE = {
    "revenue", "surveillance", "analytics", "security",
    "targeted_ads", "lifestyle", "productivity", "research",
}
SECTION_III_ACCESS = {
    "resource_owner", "trusted_party", "service_provider",
    "device_manufacturer", "law_enforcement", "third_party", "marketing",
}


def scenario_doc(events, refs=("smart-lock",), name="test") -> bytes:
    return json.dumps({"name": name, "profile_refs": list(refs), "events": events}).encode()


def strip_wall_clock(log_bytes: bytes) -> bytes:
    lines = []
    for line in log_bytes.decode().splitlines():
        obj = json.loads(line)
        obj.pop("wall_ms")
        lines.append(json.dumps(obj, separators=(",", ":")))
    return ("\n".join(lines) + "\n").encode()


class TestParseScenario:
    def test_zero_events(self):
        scenario = parse_scenario(scenario_doc([], refs=[]))
        assert scenario.events == ()

    def test_smart_lock_fixture(self, scenario_dir):
        scenario = parse_scenario((scenario_dir / "smart-lock.scn.json").read_bytes())
        assert len(scenario.events) == 1
        assert scenario.events[0].type == "start"
        assert scenario.events[0].t_ms == 1000

    def test_timestamps_out_of_order(self):
        with pytest.raises(TimestampsOutOfOrder):
            parse_scenario(
                scenario_doc(
                    [
                        {"t_ms": 5, "type": "start", "device_id": "smart-lock"},
                        {"t_ms": 3, "type": "stop", "device_id": "smart-lock"},
                    ]
                )
            )

    def test_equal_timestamps_allowed(self):
        scenario = parse_scenario(
            scenario_doc(
                [
                    {"t_ms": 5, "type": "start", "device_id": "smart-lock"},
                    {"t_ms": 5, "type": "stop", "device_id": "smart-lock"},
                ]
            )
        )
        assert [e.t_ms for e in scenario.events] == [5, 5]

    def test_unknown_device_ref(self):
        with pytest.raises(UnknownDeviceRef):
            parse_scenario(
                scenario_doc([{"t_ms": 1, "type": "start", "device_id": "ghost"}])
            )

    def test_focus_null_needs_no_ref(self):
        scenario = parse_scenario(
            scenario_doc([{"t_ms": 1, "type": "focus", "device_id": None}], refs=[])
        )
        assert scenario.events[0].device_id is None

    def test_missing_name(self):
        with pytest.raises(MissingField):
            parse_scenario(b'{"profile_refs": [], "events": []}')

    def test_categories_on_stop_rejected(self):
        with pytest.raises(MalformedDocument):
            parse_scenario(
                scenario_doc(
                    [{"t_ms": 1, "type": "stop", "device_id": "smart-lock",
                      "categories": ["audio"]}]
                )
            )

    def test_empty_categories_rejected(self):
        with pytest.raises(MalformedDocument):
            parse_scenario(
                scenario_doc(
                    [{"t_ms": 1, "type": "start", "device_id": "smart-lock",
                      "categories": []}]
                )
            )

    def test_unknown_event_field_rejected(self):
        with pytest.raises(MalformedDocument):
            parse_scenario(
                scenario_doc(
                    [{"t_ms": 1, "type": "start", "device_id": "smart-lock", "x": 1}]
                )
            )


class TestRunScenario:
    def test_empty_scenario_single_initial_entry(self, fixture_registry):
        scenario = parse_scenario(scenario_doc([], refs=[]))
        log = run_scenario(scenario, fixture_registry)
        assert len(log.entries) == 1
        assert log.entries[0].trigger == "initial"
        assert log.entries[0].state.version == 0
        assert log.entries[0].state.lit_icons("data") == set()

    def test_smart_lock_final_lit_sets_match_enumerations(
        self, fixture_registry, scenario_dir
    ):
        scenario = parse_scenario((scenario_dir / "smart-lock.scn.json").read_bytes())
        log = run_scenario(scenario, fixture_registry)
        final = log.entries[-1].state
        assert final.lit_icons("data") == SECTION_III_DATA
        assert final.lit_icons("usage") == SECTION_III_USAGE
        assert final.lit_icons("access") == SECTION_III_ACCESS
        assert final.lit_icons("top") == {"smart-lock"}

    def test_log_length_law(self, fixture_registry, scenario_dir):
        for path in sorted(scenario_dir.glob("*.scn.json")):
            scenario = parse_scenario(path.read_bytes())
            log = run_scenario(scenario, fixture_registry)
            assert len(log.entries) == len(scenario.events) + 1

    def test_versions_strictly_increase(self, fixture_registry, scenario_dir):
        scenario = parse_scenario((scenario_dir / "busy-evening.scn.json").read_bytes())
        log = run_scenario(scenario, fixture_registry)
        versions = [e.state.version for e in log.entries]
        assert versions == sorted(set(versions))

    def test_unregistered_ref_fails_fast(self, fixture_registry):
        scenario = parse_scenario(
            scenario_doc([], refs=["smart-lock", "ghost"], name="bad")
        )
        with pytest.raises(UnknownDeviceRef):
            run_scenario(scenario, fixture_registry)

    def test_engine_error_carries_event_index(self, fixture_registry):
        scenario = parse_scenario(
            scenario_doc(
                [
                    {"t_ms": 1, "type": "start", "device_id": "smart-lock"},
                    {"t_ms": 2, "type": "stop", "device_id": "smart-lock"},
                    {"t_ms": 3, "type": "stop", "device_id": "smart-lock"},
                ]
            )
        )
        with pytest.raises(ScenarioRunError) as excinfo:
            run_scenario(scenario, fixture_registry)
        assert excinfo.value.event_index == 2
        assert excinfo.value.cause.code == "stop_without_session"

    def test_double_run_instant_byte_identical(self, fixture_registry, scenario_dir):
        scenario = parse_scenario((scenario_dir / "busy-evening.scn.json").read_bytes())
        first = write_notice_log(run_scenario(scenario, fixture_registry, InstantClock()))
        second = write_notice_log(run_scenario(scenario, fixture_registry, InstantClock()))
        assert first == second

    def test_clock_independence_modulo_wall_metadata(self, fixture_registry, scenario_dir):
        scenario = parse_scenario((scenario_dir / "busy-evening.scn.json").read_bytes())
        instant = write_notice_log(run_scenario(scenario, fixture_registry, InstantClock()))
        scaled = write_notice_log(
            run_scenario(scenario, fixture_registry, ScaledClock(1000))
        )
        assert instant != scaled  # wall stamps differ
        assert strip_wall_clock(instant) == strip_wall_clock(scaled)

    def test_scaled_clock_sleeps_scaled_gaps(self, fixture_registry):
        scenario = parse_scenario(
            scenario_doc(
                [
                    {"t_ms": 0, "type": "start", "device_id": "smart-lock"},
                    {"t_ms": 400, "type": "stop", "device_id": "smart-lock"},
                ]
            )
        )
        begin = time.monotonic()
        run_scenario(scenario, fixture_registry, ScaledClock(10))
        elapsed = time.monotonic() - begin
        assert elapsed >= 0.04


class TestNoticeLogSerialization:
    def test_empty_scenario_writes_one_line(self, fixture_registry):
        log = run_scenario(parse_scenario(scenario_doc([], refs=[])), fixture_registry)
        data = write_notice_log(log)
        assert data.count(b"\n") == 1

    def test_write_twice_identical(self, fixture_registry, scenario_dir):
        scenario = parse_scenario((scenario_dir / "smart-lock.scn.json").read_bytes())
        log = run_scenario(scenario, fixture_registry)
        assert write_notice_log(log) == write_notice_log(log)

    def test_parse_back_recovers_cube_states(self, fixture_registry, scenario_dir):
        scenario = parse_scenario((scenario_dir / "busy-evening.scn.json").read_bytes())
        log = run_scenario(scenario, fixture_registry)
        recovered = read_notice_log(write_notice_log(log), scenario=log.scenario)
        assert [e.state for e in recovered.entries] == [e.state for e in log.entries]
        assert [e.trigger for e in recovered.entries] == [e.trigger for e in log.entries]


class TestClockSpec:
    def test_instant(self):
        assert isinstance(parse_clock_spec("instant"), InstantClock)

    def test_scaled(self):
        clock = parse_clock_spec("scaled:250")
        assert isinstance(clock, ScaledClock)
        assert clock.factor == 250

    @pytest.mark.parametrize("spec", ["", "fast", "scaled:", "scaled:zero", "scaled:-1"])
    def test_rejects_bad_specs(self, spec):
        with pytest.raises(ValueError):
            parse_clock_spec(spec)
