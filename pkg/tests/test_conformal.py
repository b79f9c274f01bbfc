import math

import numpy as np
import pytest

from modebeam.core.geometry import FLAT, BendSpec
from modebeam.core.modes import mode_field
from modebeam.errors import ConfigError
from modebeam.features.conformal import _bent, conformal_farfield, rotate_aperture, sample_aperture
from modebeam.features.metrics import hpbw, make_cut


def _cut_db(field, plane):
    return make_cut(field, plane).power_db


class TestSampling:
    def test_monopole_moments_equal(self, antenna2):
        samples = sample_aperture(antenna2, antenna2.mode_for("F1"), 64)
        assert samples.sample_count == 64
        assert np.ptp(np.abs(samples.moments)) == 0.0
        assert samples.is_planar

    def test_tm21_moment_null(self, antenna1):
        samples = sample_aperture(antenna1, antenna1.mode_for("F3"), 64)
        # phi' = 45 deg
        assert abs(samples.moments[8]) < 1e-12

    def test_positions_on_effective_radius(self, antenna1):
        mode = antenna1.mode_for("F1")
        samples = sample_aperture(antenna1, mode, 128)
        radii = np.hypot(samples.positions[:, 0], samples.positions[:, 1])
        np.testing.assert_allclose(radii, mode.effective_radius)

    def test_undersampling_rejected(self, antenna1):
        with pytest.raises(ConfigError):
            sample_aperture(antenna1, antenna1.mode_for("F3"), 47)
        sample_aperture(antenna1, antenna1.mode_for("F3"), 48)

    def test_foreign_mode_rejected(self, antenna1, antenna2):
        with pytest.raises(ConfigError):
            sample_aperture(antenna2, antenna1.mode_for("F4"), 64)


class TestFlatLimit:
    @pytest.mark.parametrize("port", ["F1", "F2", "F3", "F4"])
    @pytest.mark.parametrize("plane", ["xz", "yz", "horizontal"])
    def test_matches_closed_form(self, antenna1, port, plane):
        mode = antenna1.mode_for(port)
        closed = make_cut(mode_field(mode, 5.7), plane)
        conformal = make_cut(conformal_farfield(sample_aperture(antenna1, mode), FLAT, 5.7), plane)
        above = closed.power_db > -40.0
        assert np.max(np.abs(conformal.power_db[above] - closed.power_db[above])) < 0.05

    def test_monopole_matches_closed_form(self, antenna2):
        mode = antenna2.mode_for("F1")
        closed = make_cut(mode_field(mode, 5.76), "xz")
        conformal = make_cut(conformal_farfield(sample_aperture(antenna2, mode), FLAT, 5.76), "xz")
        above = closed.power_db > -40.0
        assert np.max(np.abs(conformal.power_db[above] - closed.power_db[above])) < 0.05

    def test_huge_radius_is_flat(self, antenna1):
        mode = antenna1.mode_for("F1")
        samples = sample_aperture(antenna1, mode)
        flat = _cut_db(conformal_farfield(samples, FLAT, 5.7), "xz")
        nearly = _cut_db(conformal_farfield(samples, BendSpec("x", 1e6), 5.7), "xz")
        above = flat > -40.0
        assert np.max(np.abs(flat[above] - nearly[above])) < 1e-3

    def test_rotation_consistency(self, antenna1):
        samples = sample_aperture(antenna1, antenna1.mode_for("F3"))
        delta = 0.3
        rotated = conformal_farfield(rotate_aperture(samples, delta), FLAT, 5.7)
        original = conformal_farfield(samples, FLAT, 5.7)
        rng = np.random.default_rng(5)
        theta = rng.uniform(0.0, math.pi, 100)
        phi = rng.uniform(0.0, 2 * math.pi, 100)
        a, b = rotated(theta, phi), original(theta, phi - delta)
        scale = np.sqrt(a.power().max())
        np.testing.assert_allclose(a.e_theta, b.e_theta, atol=1e-9 * scale)
        np.testing.assert_allclose(a.e_phi, b.e_phi, atol=1e-9 * scale)


class TestBent:
    def test_sampling_converged(self, antenna1, x_bend):
        mode = antenna1.mode_for("F3")
        coarse = _cut_db(conformal_farfield(sample_aperture(antenna1, mode, 256), x_bend, 5.45), "xz")
        fine = _cut_db(conformal_farfield(sample_aperture(antenna1, mode, 512), x_bend, 5.45), "xz")
        above = fine > -40.0
        assert np.max(np.abs(coarse[above] - fine[above])) < 0.01

    def test_power_preserved(self, antenna1, x_bend, grid):
        mode = antenna1.mode_for("F1")
        samples = sample_aperture(antenna1, mode)
        flat = conformal_farfield(samples, FLAT, 5.45).sample(grid).total_power()
        bent = conformal_farfield(samples, x_bend, 5.45).sample(grid).total_power()
        assert bent == pytest.approx(flat, rel=1e-9)

    def test_positions_leave_plane(self, antenna1, x_bend):
        samples = _bent(sample_aperture(antenna1, antenna1.mode_for("F3")), x_bend)
        assert not samples.is_planar
        assert np.all(samples.positions[:, 2] >= -1e-12)

    def test_curvature_broadens_beam(self, antenna1, x_bend):
        mode = antenna1.mode_for("F2")
        flat = hpbw(make_cut(mode_field(mode, 5.7), "yz"))
        bent = hpbw(make_cut(conformal_farfield(sample_aperture(antenna1, mode), x_bend, 5.45), "yz"))
        assert bent > flat

    def test_tm11_broadens_in_curvature_plane(self, antenna1, y_bend):
        # cylinder axis y curves the board in xz
        mode = antenna1.mode_for("F1")
        flat = hpbw(make_cut(mode_field(mode, 5.7), "xz"))
        bent = hpbw(make_cut(conformal_farfield(sample_aperture(antenna1, mode), y_bend, 5.45), "xz"))
        assert bent > flat
