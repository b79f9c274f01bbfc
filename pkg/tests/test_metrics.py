import math

import numpy as np
import pytest

from modebeam.core.farfield import FarField
from modebeam.core.modes import mode_field
from modebeam.core.numerics import make_sphere_grid
from modebeam.errors import ConfigError, DegenerateError, InsufficientSpanError, OpenBeamError
from modebeam.features.metrics import (
    PatternCut,
    beamwidth,
    build_report,
    cut_points,
    directivity,
    ecc,
    ecc_matrix,
    front_to_back,
    hpbw,
    make_cut,
    peak_direction,
)

OPEN = np.arange(-90.0, 91.0, 1.0)
CLOSED = np.arange(0.0, 360.0, 1.0)


def _theta_field(fn):
    return FarField(lambda th, ph: (fn(th) + 0j * ph, np.zeros(th.shape, dtype=complex)))


class TestCuts:
    def test_plane_angles(self):
        angles, theta, phi = cut_points("xz")
        assert angles[0] == -180.0 and angles[-1] == 179.0
        assert theta[angles == -30.0] == pytest.approx(math.radians(30.0))
        assert phi[angles == -30.0] == pytest.approx(math.pi)
        angles, theta, _ = cut_points("horizontal", elevation=45.0)
        assert len(angles) == 360
        assert np.all(theta == pytest.approx(math.pi / 4))

    def test_unknown_plane(self):
        with pytest.raises(ConfigError):
            cut_points("xy")

    def test_floor_and_normalization(self):
        cut = PatternCut.from_power(CLOSED, (1 + np.cos(np.radians(CLOSED))) ** 2)
        assert cut.power_db.max() == 0.0
        assert cut.power_db.min() == pytest.approx(-60.0)
        assert cut.closed

    def test_open_detection(self):
        assert not PatternCut.from_power(OPEN, np.cos(np.radians(OPEN)) ** 2).closed

    def test_make_cut_is_closed(self, antenna1):
        cut = make_cut(mode_field(antenna1.mode_for("F1"), 5.7), "yz")
        assert cut.closed and cut.plane == "yz"
        assert cut.fields is not None and len(cut.fields.e_theta) == 360


class TestPeakDirection:
    def test_cos_squared(self):
        assert peak_direction(PatternCut.from_power(OPEN, np.cos(np.radians(OPEN)) ** 2)) == pytest.approx(0.0, abs=1e-9)

    def test_shifted(self):
        angles = np.arange(-70.0, 111.0, 1.0)
        cut = PatternCut.from_power(angles, np.cos(np.radians(angles - 20.0)) ** 2)
        assert peak_direction(cut) == pytest.approx(20.0, abs=0.1)

    def test_off_grid_peak_refined(self):
        angles = np.arange(-90.0, 91.0, 1.0)
        cut = PatternCut.from_power(angles, np.cos(np.radians(angles - 10.4)) ** 2)
        assert peak_direction(cut) == pytest.approx(10.4, abs=0.05)

    def test_tm11_broadside(self, antenna1):
        cut = make_cut(mode_field(antenna1.mode_for("F1"), 5.7), "xz")
        assert peak_direction(cut) == pytest.approx(0.0, abs=0.5)

    def test_flat_cut(self):
        with pytest.raises(DegenerateError):
            peak_direction(PatternCut.from_power(CLOSED, np.ones_like(CLOSED)))


class TestBeamwidth:
    def test_cos_squared(self):
        assert hpbw(PatternCut.from_power(OPEN, np.cos(np.radians(OPEN)) ** 2)) == pytest.approx(90.0, abs=1e-6)

    def test_azimuthal_lobe(self):
        cut = PatternCut.from_power(CLOSED, np.cos(2 * np.radians(CLOSED)) ** 2)
        width = beamwidth(cut)
        assert width.width == pytest.approx(45.0, abs=0.01)
        assert not width.one_sided

    def test_scale_invariant(self):
        power = np.cos(np.radians(OPEN)) ** 2
        a = hpbw(PatternCut.from_power(OPEN, power))
        b = hpbw(PatternCut.from_power(OPEN, 7.5 * power))
        assert a == pytest.approx(b, abs=1e-9)

    def test_one_sided(self):
        angles = np.arange(0.0, 91.0, 1.0)
        width = beamwidth(PatternCut.from_power(angles, np.cos(np.radians(angles)) ** 2))
        assert width.one_sided
        assert width.width == pytest.approx(90.0, abs=1e-6)

    def test_isotropic(self):
        with pytest.raises(OpenBeamError):
            beamwidth(PatternCut.from_power(CLOSED, np.ones_like(CLOSED)))


class TestFrontToBack:
    def test_cardioid(self):
        cut = PatternCut.from_power(CLOSED, (1 + np.cos(np.radians(CLOSED))) ** 2)
        assert front_to_back(cut) == pytest.approx(60.0, abs=1e-6)

    def test_bidirectional(self):
        cut = PatternCut.from_power(CLOSED, np.cos(np.radians(CLOSED)) ** 2)
        assert front_to_back(cut) == pytest.approx(0.0, abs=1e-9)

    def test_tm11_backlobe(self, antenna1):
        cut = make_cut(mode_field(antenna1.mode_for("F1"), 5.7), "xz")
        assert front_to_back(cut) == pytest.approx(13.98, abs=0.1)

    def test_open_cut(self):
        with pytest.raises(InsufficientSpanError):
            front_to_back(PatternCut.from_power(OPEN, np.cos(np.radians(OPEN)) ** 2))


class TestDirectivity:
    def test_isotropic(self, grid):
        assert directivity(_theta_field(np.ones_like), grid) == pytest.approx(0.0, abs=1e-9)

    def test_cos_squared(self, grid):
        assert directivity(_theta_field(np.cos), grid) == pytest.approx(4.77, abs=0.01)

    def test_sin_squared(self, grid):
        assert directivity(_theta_field(np.sin), grid) == pytest.approx(1.76, abs=0.01)

    def test_zero_field(self, grid):
        with pytest.raises(DegenerateError):
            directivity(_theta_field(np.zeros_like), grid)

    def test_grid_converged(self, antenna1, grid):
        field = mode_field(antenna1.mode_for("F1"), 5.7)
        fine = make_sphere_grid(128, 256)
        assert directivity(field, fine) == pytest.approx(directivity(field, grid), abs=1e-6)


class TestEcc:
    def test_self(self, antenna1, grid):
        field = mode_field(antenna1.mode_for("F1"), 5.7)
        assert ecc(field, field, grid) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal_modes(self, antenna1, antenna2, grid):
        assert ecc(mode_field(antenna1.mode_for("F1"), 5.7), mode_field(antenna1.mode_for("F2"), 5.7), grid) < 1e-10
        assert ecc(mode_field(antenna2.mode_for("F1"), 5.76), mode_field(antenna2.mode_for("F2"), 5.76), grid) < 1e-10

    def test_symmetric_and_scale_invariant(self, antenna1, grid):
        f1, f2, f3 = (mode_field(antenna1.mode_for(p), 5.7) for p in ("F1", "F2", "F3"))
        a, b = f1 + f3, f2 + f3
        value = ecc(a, b, grid)
        assert 0.0 < value < 1.0
        assert ecc(b, a, grid) == pytest.approx(value, rel=1e-12)
        assert ecc((2 - 1j) * a, 0.3j * b, grid) == pytest.approx(value, rel=1e-9)

    def test_matrix_keys(self, antenna1, grid):
        fields = {m.port: mode_field(m, 5.7) for m in antenna1.modes}
        matrix = ecc_matrix(fields, grid)
        assert sorted(matrix) == ["F1-F2", "F1-F3", "F1-F4", "F2-F3", "F2-F4", "F3-F4"]
        assert all(v < 0.01 for v in matrix.values())

    def test_grid_converged(self, antenna1, grid):
        f1, f3 = mode_field(antenna1.mode_for("F1"), 5.7), mode_field(antenna1.mode_for("F3"), 5.7)
        fine = make_sphere_grid(128, 256)
        assert ecc(f1 + f3, f3, fine) == pytest.approx(ecc(f1 + f3, f3, grid), abs=1e-6)


def test_build_report(antenna1, grid):
    field = mode_field(antenna1.mode_for("F1"), 5.7)
    cut = make_cut(field, "xz")
    report = build_report(field, cut, grid, {"F1-F2": 0.0})
    data = report.to_dict()
    assert data["peak_direction_deg"] == pytest.approx(0.0, abs=0.5)
    assert data["front_to_back_db"] == pytest.approx(13.98, abs=0.1)
    assert data["hpbw_deg"] > 0 and not data["hpbw_one_sided"]
    assert data["directivity_dbi"] > 0
    assert data["ecc"] == {"F1-F2": 0.0}
