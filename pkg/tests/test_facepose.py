import math

import numpy as np
import pytest

from agile_head.errors import (BadCalibration, DegenerateGeometry,
                               MalformedFrame, TooFewPoints)
from agile_head.facepose import (LandmarkFrame,
                                 default_config, estimate_face_angles,
                                 estimate_pitch, estimate_roll, estimate_yaw,
                                 eye_command, eyelid_openness, polygon_area)
from agile_head.mesh import canonical_points, mirror_frame, render_frame

RNG = np.random.default_rng(99)
DEG = math.degrees


def frame_with_eyes(left, right):
    """A valid frame whose configured eye landmarks sit at two given points."""
    cfg = default_config()
    pts = np.tile([0.5, 0.5, 0.0], (468, 1))
    pts[list(cfg.left_eye)] = [*left, 0.0] if len(left) == 2 else left
    pts[list(cfg.right_eye)] = [*right, 0.0] if len(right) == 2 else right
    return LandmarkFrame(stamp_us=0, width=640, height=480, points=pts)


def fan_area(pts):
    """Triangulation oracle: sum of signed triangle areas from vertex 0."""
    total = 0.0
    for i in range(1, len(pts) - 1):
        a, b, c = pts[0], pts[i], pts[i + 1]
        total += 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
    return abs(total)


def random_convex_polygon(n):
    angles = np.sort(RNG.uniform(0, 2 * math.pi, size=n))
    radius = RNG.uniform(0.2, 1.5)
    cx, cy = RNG.uniform(-2, 2, size=2)
    return np.column_stack([cx + radius * np.cos(angles), cy + radius * np.sin(angles)])


class TestRoll:
    def test_level_eyes(self):
        assert estimate_roll(frame_with_eyes((0.4, 0.5), (0.6, 0.5))) == 0.0

    def test_slope_example(self):
        got = estimate_roll(frame_with_eyes((0.4, 0.45), (0.6, 0.55)))
        assert abs(got - math.atan(0.5)) < 1e-12
        assert abs(DEG(got) - 26.565) < 1e-2

    def test_mirror_negates(self):
        frame = render_frame(roll=math.radians(9), yaw=math.radians(4))
        assert abs(estimate_roll(mirror_frame(frame)) + estimate_roll(frame)) < 1e-12

    def test_degenerate(self):
        with pytest.raises(DegenerateGeometry):
            estimate_roll(frame_with_eyes((0.5, 0.4), (0.5, 0.6)))


class TestYaw:
    def test_frontal_zero(self):
        assert estimate_yaw(frame_with_eyes((0.4, 0.5), (0.6, 0.5))) == 0.0

    def test_depth_slope_example(self):
        frame = frame_with_eyes((0.4, 0.5, 0.0), (0.6, 0.5, 0.05))
        got = estimate_yaw(frame)
        assert abs(got - math.atan(0.25)) < 1e-12
        assert abs(DEG(got) - 14.036) < 1e-2

    def test_synthetic_rotation(self):
        got = estimate_yaw(render_frame(yaw=math.radians(10)))
        assert abs(DEG(got) - 10.0) < 2.0

    def test_mirror_negates(self):
        frame = render_frame(yaw=math.radians(7))
        assert abs(estimate_yaw(mirror_frame(frame)) + estimate_yaw(frame)) < 1e-12


class TestPitch:
    def test_canonical_neutral_zero(self):
        assert abs(estimate_pitch(render_frame())) < 1e-12

    def test_synthetic_rotation(self):
        got = estimate_pitch(render_frame(pitch=math.radians(10)))
        assert abs(DEG(got) - 10.0) < 2.0

    def test_mirror_preserves(self):
        frame = render_frame(pitch=math.radians(8), roll=math.radians(3))
        assert abs(estimate_pitch(mirror_frame(frame)) - estimate_pitch(frame)) < 1e-12

    def test_degenerate(self):
        cfg = default_config()
        pts = render_frame().points.copy()
        pts[cfg.nose_top, 2] = pts[cfg.nose_lower, 2]
        with pytest.raises(DegenerateGeometry):
            estimate_pitch(LandmarkFrame(0, 640, 640, pts))


class TestSyntheticOracle:
    @pytest.mark.parametrize("axis", ["roll", "yaw", "pitch"])
    def test_single_axis_sweep(self, axis):
        for deg in np.linspace(-15, 15, 13):
            frame = render_frame(**{axis: math.radians(deg)})
            got = DEG(getattr(estimate_face_angles(frame), axis))
            assert abs(got - deg) < 2.0, (axis, deg, got)

    def test_combined_small(self):
        frame = render_frame(roll=math.radians(8), yaw=math.radians(-10),
                             pitch=math.radians(14))
        a = estimate_face_angles(frame)
        assert abs(DEG(a.roll) - 8) < 2.0
        assert abs(DEG(a.yaw) + 10) < 2.0
        assert abs(DEG(a.pitch) - 14) < 2.0

    def test_translation_invariance(self):
        for _ in range(20):
            angles = RNG.uniform(-0.2, 0.2, size=3)
            frame = render_frame(*angles)
            shift = RNG.uniform(-0.1, 0.1, size=2)
            pts = frame.points.copy()
            pts[:, :2] += shift
            moved = LandmarkFrame(0, 640, 640, pts)
            for est in (estimate_roll, estimate_yaw, estimate_pitch):
                assert abs(est(moved) - est(frame)) < 1e-12

    def test_roll_scale_invariance(self):
        for _ in range(100):
            frame = render_frame(*RNG.uniform(-0.2, 0.2, size=3))
            scale = RNG.uniform(0.5, 2.0)
            center = RNG.uniform(0.2, 0.8, size=2)
            pts = frame.points.copy()
            pts[:, :2] = center + (pts[:, :2] - center) * scale
            pts[:, 2] *= scale
            scaled = LandmarkFrame(0, 640, 640, pts)
            assert abs(estimate_roll(scaled) - estimate_roll(frame)) < 1e-12


class TestPolygonArea:
    def test_unit_square(self):
        assert polygon_area([(0, 0), (1, 0), (1, 1), (0, 1)]) == 1.0

    def test_triangle(self):
        assert polygon_area([(0, 0), (1, 0), (0, 1)]) == 0.5

    def test_orientation_independent(self):
        square = [(0, 0), (1, 0), (1, 1), (0, 1)]
        assert polygon_area(square) == polygon_area(square[::-1])

    def test_matches_fan_triangulation(self):
        for _ in range(1000):
            pts = random_convex_polygon(int(RNG.integers(3, 12)))
            assert abs(polygon_area(pts) - fan_area(pts)) < 1e-12

    def test_octagon_oracle(self):
        pts = random_convex_polygon(8)
        assert abs(polygon_area(pts) - fan_area(pts)) < 1e-12

    def test_too_few_points(self):
        with pytest.raises(TooFewPoints):
            polygon_area([(0, 0), (1, 1)])


class TestEyelidOpenness:
    def test_extremes_and_midpoint(self):
        cal = (0.2, 0.8)
        assert eyelid_openness(0.8, cal) == 1.0
        assert eyelid_openness(0.2, cal) == 0.0
        assert abs(eyelid_openness(0.5, cal) - 0.5) < 1e-12

    def test_clamps(self):
        assert eyelid_openness(5.0, (0.0, 1.0)) == 1.0
        assert eyelid_openness(-5.0, (0.0, 1.0)) == 0.0

    def test_bad_calibration(self):
        with pytest.raises(BadCalibration):
            eyelid_openness(0.5, (1.0, 1.0))


class TestEyeCommand:
    def test_centered_face(self):
        # canonical render centers the mesh at (0.5, 0.5) up to scatter asymmetry
        pts = render_frame().points.copy()
        pts[:, :2] -= pts[:, :2].mean(axis=0) - 0.5
        cmd = eye_command(LandmarkFrame(0, 640, 640, pts))
        assert abs(cmd.pan) < 1e-12 and abs(cmd.tilt) < 1e-12
        assert abs(cmd.lid_openness - 1.0) < 1e-9  # canonical lids are the open area

    def test_edge_saturates(self):
        cfg = default_config()
        pts = render_frame().points.copy()
        pts[:, 0] += 1.0 - pts[:, 0].mean()
        cmd = eye_command(LandmarkFrame(0, 640, 640, pts), cfg)
        assert abs(cmd.pan + cfg.pan_max) < 1e-12

    def test_quarter_offset(self):
        cfg = default_config()
        pts = render_frame().points.copy()
        pts[:, 0] += 0.25 - pts[:, 0].mean()
        cmd = eye_command(LandmarkFrame(0, 640, 640, pts), cfg)
        assert abs(cmd.pan - 0.5 * cfg.pan_max) < 1e-12


class TestLandmarkFrame:
    def test_validate_shape(self):
        with pytest.raises(MalformedFrame):
            LandmarkFrame(0, 640, 480, np.zeros((10, 3))).validate()

    def test_validate_range(self):
        pts = np.tile([0.5, 0.5, 0.0], (468, 1))
        pts[0, 0] = 2.0
        with pytest.raises(MalformedFrame):
            LandmarkFrame(0, 640, 480, pts).validate()

    def test_payload_roundtrip(self):
        frame = render_frame(roll=0.05, stamp_us=123456)
        back = LandmarkFrame.from_payload(frame.to_payload())
        assert back.stamp_us == 123456
        np.testing.assert_array_equal(back.points, frame.points)

    def test_bad_payload(self):
        with pytest.raises(MalformedFrame):
            LandmarkFrame.from_payload({"stamp_us": 0, "w": 1})

    def test_mesh_is_committed_exactly(self):
        p = canonical_points()
        assert p.shape == (468, 3)
        cfg = default_config()
        left = p[list(cfg.left_eye)].mean(axis=0)
        right = p[list(cfg.right_eye)].mean(axis=0)
        assert left[1] == right[1]  # same height exactly
        assert abs(left[2] - right[2]) < 1e-12  # same depth up to rounding order
