import math
import os

import pytest

import cloudrecon as cr

SCENARIO_DIR = os.environ.get("CLOUDRECON_SCENARIO_DIR", "scenarios")


def scenario_path(name):
    return os.path.join(SCENARIO_DIR, name)


def test_angle_helpers():
    angles = cr.misr_angles()
    assert len(angles) == 9
    assert angles[4] == pytest.approx(math.pi / 2)
    assert cr.paper_polar_angles()[0] == 0.0


def test_forward_nadir_reads_alpha():
    cloud = cr.GraphCloud(x_left=-1.0, x_right=1.0, base=0.0, heights=[0.8] * 9)
    alpha = cr.AlphaField(segment_values=[1.0] * 8, alpha_L=1.0, alpha_R=1.0)
    beta = cr.BetaProfile.sine(4)
    det = cr.DetectorLine()
    det.Z = 10.0
    det.pixel_size = 0.1
    det.first_pixel = -8
    det.pixel_count = 16
    det.angles = [math.pi / 2]
    det.subsamples = 4

    ms = cr.measure(cloud, alpha, beta, det)
    mid = ms.pixel_count // 2
    assert ms.status(mid, 0) == cr.PixelStatus.Hit
    assert ms.value(mid, 0) == pytest.approx(1.0, abs=1e-10)


def test_noise_is_deterministic():
    cloud = cr.GraphCloud(-1.0, 1.0, 0.0, [0.8] * 9)
    alpha = cr.AlphaField([1.0] * 8, 1.0, 1.0)
    beta = cr.BetaProfile.sine(4)
    det = cr.DetectorLine()
    det.first_pixel = -8
    det.pixel_count = 16
    det.angles = [math.pi / 2]
    ms = cr.measure(cloud, alpha, beta, det)
    a = cr.add_noise(ms, 0.01, 5)
    b = cr.add_noise(ms, 0.01, 5)
    assert a.values == b.values
    assert a.values != ms.values


def test_reconstruction_round_trip():
    sc = cr.load_scenario(scenario_path("graph_constant_alpha.json"))
    truth = sc.graph_truth
    det = sc.graph_detector

    data = cr.measure(truth.cloud, truth.alpha, truth.beta, det)
    res = cr.reconstruct(data, det, truth, sc.solver)
    assert res.converged
    assert res.final_residual <= 1e-10
    assert cr.relative_misfit(data, data) == 0.0


def test_diagnose_flags_flat_constant_speed():
    sc = cr.load_scenario(scenario_path("diagnose_flat_constant.json"))
    rep = cr.diagnose(sc.graph_init, sc.graph_detector, with_speed=True)
    assert rep.speed_degenerate
    assert rep.angular_slope_matches_cot
    assert "rank" in rep.summary()


def test_scenario_error_is_mapped():
    with pytest.raises(cr.ScenarioError):
        cr.load_scenario(scenario_path("does_not_exist.json"))


def test_invert_command_writes_artifacts(tmp_path):
    sc = cr.load_scenario(
        scenario_path("graph_constant_alpha.json"), out=str(tmp_path)
    )
    out = cr.run_invert(sc)
    assert out.converged
    assert (tmp_path / "reconstruction.csv").exists()
    assert (tmp_path / "diagnostics.txt").exists()
