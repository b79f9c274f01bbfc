import asyncio
import json

import pytest

pytest.importorskip("mcp")

from modebeam import server  # noqa: E402


def test_list_presets():
    data = json.loads(asyncio.run(server.list_presets()))
    assert sorted(data) == ["antenna1", "antenna2"]


def test_resonance_tool():
    data = json.loads(asyncio.run(server.resonance("antenna2", "C")))
    assert data["radiators"]["ring"]["flat_ghz"] == pytest.approx(5.76)


def test_steer_tool():
    data = json.loads(asyncio.run(server.steer("antenna1", 20.0, plane="yz")))
    assert data["solver"]["pair"] == ["F2", "F3"]


def test_errors_are_text():
    reply = asyncio.run(server.pattern_cut("antenna3", ["F1"]))
    assert reply.startswith("[Modebeam] Error:")


def test_run_scenario_tool(tmp_path):
    reply = json.loads(asyncio.run(server.run_scenario({"antenna": "antenna2", "steering": [{"azimuth": 0}]}, str(tmp_path))))
    assert reply["exit_code"] == 0
    assert "report.json" in reply["files"]


def test_steer_tool_normalization():
    data = json.loads(asyncio.run(server.steer("antenna1", 20.0, normalization="equal_power")))
    assert abs(data["achieved_peak_deg"] - 20.0) > 3.0
    reply = asyncio.run(server.steer("antenna1", 20.0, normalization="loudest"))
    assert reply.startswith("[Modebeam] Error:")
