import os
import subprocess

import numpy as np
import pytest

import flipperplan as fp


def test_flat_plan_is_level():
    heights = np.zeros((120, 200))
    emap = fp.ElevationMap(heights, 0.005, origin=(-0.12, -0.2975))
    params = fp.RobotParams()
    inflated = fp.inflate(emap, params.wheel_radius)
    assert np.allclose(inflated.values, params.wheel_radius)
    start = fp.make_start_pose(inflated, params)
    path = fp.plan(start, inflated, emap, params)
    assert len(path) == 25
    assert path.total_cost() == 0.0
    for step in path.steps:
        assert step.morphology.pitch == 0.0
        assert step.morphology.roll == 0.0


def test_step_plan_and_follow(tmp_path):
    spec = fp.ObstacleSpec()
    spec.kind = fp.ObstacleKind.STEP
    spec.rotation_deg = 15.0
    emap = fp.generate_obstacle(spec)
    assert emap.heights.shape == (120, 200)
    params = fp.RobotParams()
    inflated = fp.inflate(emap, params.wheel_radius)
    settings = fp.SearchSettings()
    settings.h_samples = 20
    path = fp.plan(fp.make_start_pose(inflated, params), inflated, emap, params, settings)
    split = max(abs(s.morphology.flippers.front_left - s.morphology.flippers.front_right)
                for s in path.steps)
    assert split > 0.05

    file = tmp_path / "path.txt"
    fp.export_path(path, file)
    assert fp.import_path(file) == path

    report = fp.follow(path, params)
    assert report.completed
    assert report.position_error.shape == (report.ticks, 3)
    assert np.linalg.norm(report.position_error[-1]) < 0.005

    joints = fp.forward_kinematics(path.steps[-1].morphology, params)
    assert joints.shape == (2, 4, 3)


def test_errors_map_to_python_exceptions():
    emap = fp.ElevationMap(np.zeros((4, 4)), 0.005)
    with pytest.raises(fp.InvalidArgument):
        fp.inflate(emap, 0.0)
    with pytest.raises(fp.OutOfMapError):
        emap.height_at(1.0, 1.0)
    spec = fp.ObstacleSpec()
    spec.obstacle_height = 0.3
    wall = fp.generate_obstacle(spec)
    params = fp.RobotParams()
    inflated = fp.inflate(wall, params.wheel_radius)
    with pytest.raises(fp.DeadEndError):
        fp.plan(fp.make_start_pose(inflated, params), inflated, wall, params)
    assert issubclass(fp.DeadEndError, fp.Error)


def test_cli_params_dump():
    cli = os.environ.get("FLIPPERPLAN_CLI")
    if not cli:
        pytest.skip("CLI path not provided")
    out = subprocess.run([cli, "params", "--dump"], check=True, capture_output=True, text=True)
    assert "wheel_radius = 0.035" in out.stdout
