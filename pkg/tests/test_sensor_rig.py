import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from advsim.config import JitterMotion, LinearMotion, MotionSpec, RotationMotion, parse_scenario
from advsim.scene import build_scene, step
from advsim.sensor_rig import SensorTrack, intrinsics_for, pose_at, project, triangle_wave, world_to_camera
from advsim.transforms import Transform


def test_intrinsics_90_degrees():
    K = intrinsics_for(800, 600, 90)
    assert math.isclose(K.focal, 400.0) and (K.cx, K.cy) == (400.0, 300.0)
    assert np.allclose(K.matrix(), [[400, 0, 400], [0, 400, 300], [0, 0, 1]])
    with pytest.raises(ValueError):
        intrinsics_for(800, 600, 180)


def test_project_axis_conventions():
    pose = Transform((0, 0, 0))
    K = intrinsics_for(800, 600, 90)
    assert project((10, 0, 0), pose, K) == (400.0, 300.0, 10.0)
    u, v, d = project((10, 2, 1), pose, K)  # right and up
    assert (u, v, d) == (480.0, 260.0, 10.0)
    assert project((-1, 0, 0), pose, K) is None
    assert project((0.01, 0, 0), pose, K) is None


@given(st.floats(-170, 170), st.floats(-60, 60), st.floats(-10, 10), st.floats(-10, 10), st.floats(1, 50))
def test_projection_inverts_pixel_ray(yaw, pitch, ry, rz, depth):
    pose = Transform((3, -2, 1.5), (pitch, yaw, 0))
    K = intrinsics_for(640, 480, 75)
    cam = np.array([depth, ry, rz])
    world = cam @ pose.matrix().T + pose.translation()
    assert np.allclose(world_to_camera(world[None], pose)[0], cam, atol=1e-9)
    u, v, d = project(world, pose, K)
    assert math.isclose(d, depth, rel_tol=1e-9)
    assert math.isclose(u, K.cx + K.focal * ry / depth, rel_tol=1e-9, abs_tol=1e-9)


def test_triangle_wave():
    assert [triangle_wave(f, 8) for f in range(9)] == [0, 0.5, 1, 0.5, 0, -0.5, -1, -0.5, 0]


def _track(motion=None, attach=None, index=0, seed=5):
    return SensorTrack(Transform((1, 2, 3), (0, 10, 0)), index, attach, motion, seed)


def test_linear_motion_clamps_at_destination():
    m = MotionSpec(linear=LinearMotion(Transform((1, 12, 3)), speed=3.0))
    t = _track(m)
    assert pose_at(t, 0, fps=30).location == (1.0, 2.0, 3.0)
    assert np.allclose(pose_at(t, 30, fps=30).location, (1, 5, 3))
    assert pose_at(t, 1000, fps=30).location == (1.0, 12.0, 3.0)


def test_rotation_sweep():
    m = MotionSpec(rotation=RotationMotion("yaw", 20.0, 40))
    t = _track(m)
    assert pose_at(t, 10).yaw == 30.0
    assert pose_at(t, 30).yaw == -10.0
    assert pose_at(t, 40).yaw == 10.0


@given(st.integers(0, 10**6), st.integers(0, 7))
def test_jitter_bounded_and_deterministic(frame, index):
    m = MotionSpec(jitter=JitterMotion((0.05, 0.05, 0.05), (1.0, 1.0, 1.0)))
    t = _track(m, index=index)
    p = pose_at(t, frame)
    assert np.all(np.abs(np.subtract(p.location, (1, 2, 3))) <= 0.05)
    assert np.all(np.abs(np.subtract(p.rotation, (0, 10, 0))) <= 1.0)
    assert pose_at(_track(m, index=index), frame) == p


def test_jitter_differs_per_sensor_and_frame():
    m = MotionSpec(jitter=JitterMotion((0.05, 0.05, 0.05), (1.0, 1.0, 1.0)))
    assert pose_at(_track(m, index=0), 3) != pose_at(_track(m, index=1), 3)
    assert pose_at(_track(m), 3) != pose_at(_track(m), 4)
    assert pose_at(_track(m, seed=5), 3) != pose_at(_track(m, seed=6), 3)


def test_attached_sensor_follows_host():
    c = parse_scenario("""
carla: {sync: {fps: 30}}
max_frames: 1
spawn_actors:
  - blueprint: {name: walker.pedestrian.0001, attr: {role_name: host}}
    transform: {location: {x: -91, y: 150, z: 0.9}}
    destination_transform: {location: {x: -91, y: 170, z: 0.9}}
  - blueprint: {name: sensor.camera.rgb}
    transform: {location: {x: 0.5, z: 0.8}}
    attach_to: host
""")
    scene = build_scene(c)
    t = SensorTrack.from_spec(c.sensors[0], 0, c.sim.seed)
    for _ in range(30):
        scene = step(scene)
    host = scene.actor_by_role("host").transform
    p = pose_at(t, 30, scene)
    assert host.yaw == 90.0
    assert np.allclose(p.location, np.add(host.location, (0.0, 0.5, 0.8)))
    assert p.yaw == 90.0
    with pytest.raises(ValueError):
        pose_at(t, 0)
