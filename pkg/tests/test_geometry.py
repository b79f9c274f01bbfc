import math
from dataclasses import replace

import numpy as np
import pytest

from modebeam.core.geometry import (
    FLAT,
    BendSpec,
    bend_map,
    bend_points,
    build_antenna2,
    chord_factor,
    electrical_size,
    preset,
    unbend_map,
)
from modebeam.core.modes import unit_power_gain
from modebeam.errors import ConfigError, GeometryError


class TestPresets:
    def test_antenna1_dimensions(self, antenna1):
        assert antenna1.board_side == 34.0
        assert antenna1.design_frequency == 5.7
        assert antenna1.patch_diameter == 17.0
        assert (antenna1.ring_inner_diameter, antenna1.ring_outer_diameter) == (18.0, 34.0)
        assert antenna1.port("F4").position == (-9.2, 9.2)
        assert antenna1.metal_thickness == 0.06

    def test_antenna1_electrical_size(self, antenna1):
        # 34 mm at 5.7 GHz is 0.6465 wavelengths, quoted as 0.64
        assert electrical_size(antenna1) == pytest.approx(0.64, abs=0.01)

    def test_antenna2_dimensions(self, antenna2):
        assert antenna2.port("F1").position == (0.0, 0.0)
        assert len(antenna2.ports) == 3
        assert antenna2.design_frequency == 5.76
        assert electrical_size(antenna2) == pytest.approx(0.71, rel=0.005)

    def test_mode_assignments(self, antenna1, antenna2):
        a1 = {m.port: (m.family, m.orientation) for m in antenna1.modes}
        assert a1 == {
            "F1": ("patch_tm11", "cos"),
            "F2": ("patch_tm11", "sin"),
            "F3": ("ring_tm21", "cos"),
            "F4": ("ring_tm21", "sin"),
        }
        a2 = {m.port: (m.family, m.orientation) for m in antenna2.modes}
        assert a2 == {
            "F1": ("patch_tm01_monopole", "cos"),
            "F2": ("ring_tm21", "cos"),
            "F3": ("ring_tm21", "sin"),
        }

    def test_unknown_port_and_preset(self, antenna2):
        with pytest.raises(ConfigError):
            antenna2.port("F4")
        with pytest.raises(ConfigError):
            preset("antenna3")

    @pytest.mark.parametrize(
        "changes",
        [
            {"ring_inner_diameter": 16.0},
            {"ring_outer_diameter": 40.0},
            {"ports": ()},
        ],
    )
    def test_invariants_enforced(self, antenna1, changes):
        with pytest.raises(GeometryError):
            replace(antenna1, **changes)

    def test_port_outside_radiator(self, antenna1):
        ports = list(antenna1.ports)
        ports[0] = replace(ports[0], position=(12.0, 0.0))
        with pytest.raises(GeometryError):
            replace(antenna1, ports=tuple(ports))

    def test_to_dict(self, antenna1):
        data = antenna1.to_dict()
        assert data["name"] == "antenna1"
        assert [p["id"] for p in data["ports"]] == ["F1", "F2", "F3", "F4"]
        assert len(data["modes"]) == 4
        assert data["gain_normalization"] == "elevation_anchor"


class TestGainNormalization:
    def test_equal_power_gains(self, antenna1_equal_power):
        for mode in antenna1_equal_power.modes:
            assert mode.gain_scale == pytest.approx(unit_power_gain(mode, 5.7), rel=1e-12)
        assert antenna1_equal_power.gain_normalization == "equal_power"

    def test_anchor_rescales_ring_only(self, antenna1, antenna1_equal_power):
        for port in ("F1", "F2"):
            assert antenna1.mode_for(port) == antenna1_equal_power.mode_for(port)
        anchored, equal = antenna1.mode_for("F3").gain_scale, antenna1_equal_power.mode_for("F3").gain_scale
        assert anchored != pytest.approx(equal, rel=1e-3)

    def test_antenna2_unaffected(self, antenna2):
        equal = build_antenna2("equal_power")
        assert equal.modes == antenna2.modes

    def test_preset_passes_normalization(self):
        assert preset("antenna1", "equal_power").gain_normalization == "equal_power"

    def test_unknown_normalization(self, antenna1):
        with pytest.raises(ConfigError, match="normalization"):
            preset("antenna1", "peak_gain")
        with pytest.raises(ConfigError):
            replace(antenna1, gain_normalization="peak_gain")


class TestBendMap:
    def test_center_line_fixed(self):
        pos, frame = bend_map((5.0, 0.0, 0.0), BendSpec("x", 10.0))
        np.testing.assert_allclose(pos, [5.0, 0.0, 0.0], atol=1e-12)
        np.testing.assert_allclose(frame, np.eye(3), atol=1e-12)

    def test_quarter_turn(self):
        pos, frame = bend_map((0.0, math.pi * 10.0 / 2.0, 0.0), BendSpec("x", 10.0))
        np.testing.assert_allclose(pos, [0.0, 10.0, 10.0], atol=1e-12)
        np.testing.assert_allclose(frame @ [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], atol=1e-12)
        np.testing.assert_allclose(frame @ [0.0, 0.0, 1.0], [0.0, -1.0, 0.0], atol=1e-12)
        np.testing.assert_allclose(frame @ [1.0, 0.0, 0.0], [1.0, 0.0, 0.0], atol=1e-12)

    def test_flat_bypass(self):
        pos, frame = bend_map((1.0, 7.0, 0.2), FLAT)
        np.testing.assert_allclose(pos, [1.0, 7.0, 0.2])
        np.testing.assert_allclose(frame, np.eye(3))

    def test_axis_coordinate_preserved(self):
        rng = np.random.default_rng(7)
        pts = rng.uniform(-15.0, 15.0, size=(50, 3))
        pts[:, 2] = rng.uniform(-0.5, 0.5, size=50)
        bent_x, _ = bend_points(pts, BendSpec("x", 10.0))
        bent_y, _ = bend_points(pts, BendSpec("y", 10.0))
        np.testing.assert_array_equal(bent_x[:, 0], pts[:, 0])
        np.testing.assert_array_equal(bent_y[:, 1], pts[:, 1])

    @pytest.mark.parametrize("axis", ["x", "y"])
    def test_inverse(self, axis):
        rng = np.random.default_rng(11)
        pts = rng.uniform(-17.0, 17.0, size=(100, 3))
        pts[:, 2] = rng.uniform(-0.6, 0.6, size=100)
        bend = BendSpec(axis, 10.0)
        bent, _ = bend_points(pts, bend)
        np.testing.assert_allclose(unbend_map(bent, bend), pts, atol=1e-10)

    def test_arc_length_preserved(self):
        s = np.linspace(0.0, 15.0, 4001)
        pts = np.column_stack([np.zeros_like(s), s, np.zeros_like(s)])
        bent, _ = bend_points(pts, BendSpec("x", 10.0))
        length = np.sum(np.linalg.norm(np.diff(bent, axis=0), axis=1))
        assert length == pytest.approx(15.0, rel=1e-6)

    def test_frames_are_rotations(self):
        pts = np.column_stack([np.linspace(-17, 17, 9), np.zeros(9), np.zeros(9)])
        _, frames = bend_points(pts, BendSpec("y", 8.0))
        for frame in frames:
            np.testing.assert_allclose(frame @ frame.T, np.eye(3), atol=1e-12)
            assert np.linalg.det(frame) == pytest.approx(1.0)

    def test_over_wrap(self):
        with pytest.raises(GeometryError):
            bend_map((0.0, 40.0, 0.0), BendSpec("x", 10.0))

    def test_bend_spec_validation(self):
        with pytest.raises(GeometryError):
            BendSpec("x", 4.0)
        with pytest.raises(GeometryError):
            BendSpec("z", 10.0)


class TestChordFactor:
    def test_flat(self, antenna1):
        assert chord_factor(antenna1, FLAT) == 1.0

    def test_antenna1_x_bend(self, antenna1):
        value = chord_factor(antenna1, BendSpec("x", 10.0))
        assert value == pytest.approx(2 * 10 * math.sin(34 / 20) / 34, rel=1e-12)
        assert value == pytest.approx(0.5832, abs=1e-3)

    def test_antenna2_y_bend(self, antenna2):
        value = chord_factor(antenna2, BendSpec("y", 10.0))
        assert value == pytest.approx(2 * 10 * math.sin(37 / 20) / 37, rel=1e-12)
        assert value == pytest.approx(0.5204, abs=1e-3)

    def test_monotone_in_radius(self, antenna1):
        values = [chord_factor(antenna1, BendSpec("x", r)) for r in (8, 10, 20, 50, 1000)]
        assert values == sorted(values)
        assert all(0 < v <= 1 for v in values)
