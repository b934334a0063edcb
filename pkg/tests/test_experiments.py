import math

import numpy as np
import pytest

from specklesim.experiments import (
    AlphaScanResult,
    ScenarioConfig,
    build_medium,
    build_source,
    dip_half_width,
    emit_scenario,
    fit_visibility_cosine,
    montecarlo_visibility,
    reference_delay,
    run_alpha_scan,
    run_enhancement_study,
    run_hom_reproduction,
)
from specklesim.rng import rng_for
from specklesim.shaping import DegenerateFitError, ideal_circuit
from specklesim.twophoton import hom_scan, source_preset


# ---------------------------------------------------------------------------
# cosine fit
# ---------------------------------------------------------------------------


def test_fit_cosine_exact():
    alphas = np.linspace(0.0, math.pi, 5)
    v0, err = fit_visibility_cosine(alphas, np.cos(alphas))
    assert v0 == pytest.approx(1.0, abs=1e-15)
    assert err < 1e-15


def test_fit_cosine_sign_preserved():
    alphas = np.linspace(0.0, math.pi, 7)
    v0, _ = fit_visibility_cosine(alphas, -0.5 * np.cos(alphas))
    assert v0 == pytest.approx(-0.5, abs=1e-15)


def test_fit_cosine_noisy_within_three_standard_errors():
    rng = rng_for(1234)
    alphas = np.linspace(0.0, math.pi, 9)
    values = 0.9 * np.cos(alphas) + rng.normal(0.0, 0.05, alphas.size)
    v0, err = fit_visibility_cosine(alphas, values)
    assert abs(v0 - 0.9) < 3.0 * err


def test_fit_cosine_degenerate():
    with pytest.raises(DegenerateFitError):
        fit_visibility_cosine([math.pi / 2.0], [0.1])


def test_alpha_scan_result_validation():
    with pytest.raises(ValueError):
        AlphaScanResult(
            alphas=np.array([0.0]),
            visibilities=np.array([2.0]),
            std_errs=np.array([0.0]),
            v0_fit=2.0,
            v0_std_err=0.0,
        )


# ---------------------------------------------------------------------------
# alpha scan
# ---------------------------------------------------------------------------


def test_alpha_scan_noiseless_unit_overlap():
    config = ScenarioConfig(circuit="ideal", counting="analytic", overlap=1.0)
    result = run_alpha_scan(config, master_seed=0)
    assert abs(result.v0_fit - 1.0) < 1e-6
    midpoint = np.argmin(np.abs(result.alphas - math.pi / 2.0))
    assert abs(result.visibilities[midpoint]) < 1e-9
    assert np.all(result.std_errs == 0.0)


def test_alpha_scan_noiseless_preset_overlap():
    config = ScenarioConfig(circuit="ideal", counting="analytic", source="filtered")
    result = run_alpha_scan(config, master_seed=0)
    assert abs(result.v0_fit - 0.86) < 1e-9


def test_visibility_cosine_law_pointwise():
    # V(alpha) = overlap * cos(alpha) at zero delay, 9-point grid
    source = source_preset("filtered")
    for alpha in np.linspace(0.0, math.pi, 9):
        circuit = ideal_circuit(0.45, float(alpha))
        scan = hom_scan(circuit, source, [0.0, reference_delay(source)])
        v = scan.coincidence_rate[0] / scan.coincidence_rate[1] - 1.0
        assert abs(v - source.intrinsic_overlap * math.cos(alpha)) < 1e-9


def test_alpha_scan_residuals_have_no_second_harmonic():
    config = ScenarioConfig(circuit="ideal", counting="analytic", overlap=1.0)
    result = run_alpha_scan(config, master_seed=0)
    residuals = result.visibilities - result.v0_fit * np.cos(result.alphas)
    second = np.cos(2.0 * result.alphas)
    c2 = float(np.sum(residuals * second) / np.sum(second * second))
    sigma_c2 = float(np.std(residuals) / math.sqrt(np.sum(second * second)))
    assert abs(c2) <= max(3.0 * sigma_c2, 1e-9)


def test_alpha_scan_montecarlo_zero_at_half_pi():
    config = ScenarioConfig(
        circuit="ideal",
        counting="montecarlo",
        overlap=1.0,
        mean_pairs_per_pulse=0.05,
        pulses_per_point=150_000,
        alpha_grid=np.array([0.0, math.pi / 2.0, math.pi]),
    )
    result = run_alpha_scan(config, master_seed=7)
    mid = result.visibilities[1]
    assert abs(mid) < 3.0 * result.std_errs[1]
    assert result.visibilities[0] > 0.5
    assert result.visibilities[2] < -0.5


def test_alpha_scan_shaped_pipeline_tracks_overlap():
    config = ScenarioConfig(
        circuit="shaped",
        counting="analytic",
        overlap=1.0,
        n_out=256,
        segments=480,
        alpha_grid=np.linspace(0.0, math.pi, 5),
    )
    result = run_alpha_scan(config, master_seed=11)
    assert abs(result.v0_fit - 1.0) < 0.1


# ---------------------------------------------------------------------------
# hom reproduction
# ---------------------------------------------------------------------------


def test_hom_reproduction_preset_visibilities_and_widths():
    config = ScenarioConfig()
    scans = run_hom_reproduction(config, master_seed=0)
    widths = {}
    for name, expected in (("broadband", 0.64), ("filtered", 0.86)):
        scan = scans[name]
        source = source_preset(name)
        baseline = hom_scan(
            ideal_circuit(1.0 / math.sqrt(2.0), math.pi), source, [reference_delay(source)]
        ).coincidence_rate[0]
        center = np.argmin(np.abs(scan.delays))
        vis = scan.coincidence_rate[center] / baseline - 1.0
        assert abs(vis + expected) < 0.01
        widths[name] = dip_half_width(scan)
    bandwidth_ratio = source_preset("broadband").rms_angular_bandwidth / source_preset(
        "filtered"
    ).rms_angular_bandwidth
    assert abs(widths["filtered"] / widths["broadband"] - bandwidth_ratio) < 0.05 * bandwidth_ratio


def test_dip_half_width_against_closed_form():
    source = source_preset("filtered", overlap=0.9)
    circuit = ideal_circuit(1.0 / math.sqrt(2.0), math.pi)
    scan = hom_scan(circuit, source, np.linspace(-4e-12, 4e-12, 801))
    expected = math.sqrt(math.log(2.0)) / source.rms_angular_bandwidth
    assert abs(dip_half_width(scan) - expected) < 0.01 * expected


def test_dip_width_grows_monotonically_as_bandwidth_shrinks():
    circuit = ideal_circuit(1.0 / math.sqrt(2.0), math.pi)
    widths = []
    for fwhm in (3.0, 1.5, 0.75):
        source = source_preset("filtered", filter_fwhm_nm=fwhm)
        grid = np.linspace(-30e-12, 30e-12, 2001)
        widths.append(dip_half_width(hom_scan(circuit, source, grid)))
    assert widths[0] < widths[1] < widths[2]


# ---------------------------------------------------------------------------
# enhancement study
# ---------------------------------------------------------------------------


def test_enhancement_study_matches_law():
    config = ScenarioConfig(n_out=512, seeds=20, segment_counts=(64, 256))
    rows = run_enhancement_study(config, master_seed=5)
    for row in rows:
        assert row.predicted == pytest.approx(1.0 + (math.pi / 4.0) * (row.n_segments - 1))
        assert abs(row.mean_enhancement / row.predicted - 1.0) < 0.10


def test_enhancement_study_small_segment_count():
    config = ScenarioConfig(n_out=128, seeds=150, segment_counts=(2,))
    rows = run_enhancement_study(config, master_seed=2)
    assert abs(rows[0].mean_enhancement / (1.0 + math.pi / 4.0) - 1.0) < 0.15


def test_enhancement_study_one_segment_is_uncontrolled():
    # a single phase segment cannot enhance; per-seed ratios scatter like
    # plain speckle around one
    config = ScenarioConfig(n_out=64, seeds=200, segment_counts=(1,))
    rows = run_enhancement_study(config, master_seed=3)
    assert rows[0].predicted == 1.0
    assert abs(rows[0].mean_enhancement - 1.0) < 0.25


# ---------------------------------------------------------------------------
# monte carlo visibility vs pump power
# ---------------------------------------------------------------------------


def test_multi_pair_emission_reduces_visibility():
    circuit = ideal_circuit(1.0 / math.sqrt(2.0), math.pi)
    low = source_preset("broadband", mean_pairs_per_pulse=0.01)
    high = source_preset("highpower")  # same overlap, mu = 0.5
    v_low = montecarlo_visibility(circuit, low, 300_000, seed=3)
    v_high = montecarlo_visibility(circuit, high, 300_000, seed=4)
    combined = math.hypot(v_low.std_err, v_high.std_err)
    assert abs(v_high.v) < abs(v_low.v) - 3.0 * combined


# ---------------------------------------------------------------------------
# emission and config plumbing
# ---------------------------------------------------------------------------


def test_emit_scenario_refuses_overwrite(tmp_path):
    config = ScenarioConfig()
    emit_scenario(tmp_path, "alpha-scan", 0, {"x.csv": "a\n"}, config)
    with pytest.raises(FileExistsError):
        emit_scenario(tmp_path, "alpha-scan", 0, {"x.csv": "b\n"}, config)
    emit_scenario(tmp_path, "alpha-scan", 0, {"x.csv": "b\n"}, config, force=True)
    assert (tmp_path / "alpha-scan_seed0.x.csv").read_text() == "b\n"


def test_emitted_files_are_deterministic(tmp_path):
    config = ScenarioConfig(circuit="ideal", alpha_grid=np.linspace(0.0, math.pi, 5))
    first = tmp_path / "a"
    second = tmp_path / "b"
    run_alpha_scan(config, master_seed=3, out_dir=first)
    run_alpha_scan(config, master_seed=3, out_dir=second)
    for name in ("alpha-scan_seed3.manifest.txt", "alpha-scan_seed3.visibility.csv", "alpha-scan_seed3.fit.csv"):
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_manifest_contents(tmp_path):
    config = ScenarioConfig()
    run_alpha_scan(config, master_seed=9, out_dir=tmp_path)
    manifest = (tmp_path / "alpha-scan_seed9.manifest.txt").read_text()
    assert "scenario = alpha-scan\n" in manifest
    assert "master_seed = 9\n" in manifest
    assert "segments = 960\n" in manifest


def test_scenario_config_validation():
    with pytest.raises(ValueError):
        ScenarioConfig(segments=0)
    with pytest.raises(ValueError):
        ScenarioConfig(n_in=100, segments=960)  # cannot host two modes
    with pytest.raises(ValueError):
        ScenarioConfig(alpha_grid=np.array([]))
    with pytest.raises(ValueError):
        ScenarioConfig(output_m=1, output_n=1)
    with pytest.raises(ValueError):
        ScenarioConfig(circuit="magic")


def test_build_medium_kinds():
    gaussian = build_medium(ScenarioConfig(n_out=32, n_in=16, segments=8), master_seed=4)
    assert gaussian.entries.shape == (32, 16)
    unitary = build_medium(
        ScenarioConfig(medium_kind="unitary", n_out=16, n_in=16, segments=8), master_seed=4
    )
    assert unitary.entries.shape == (16, 16)
    with pytest.raises(ValueError):
        build_medium(ScenarioConfig(medium_kind="unitary", n_out=32, n_in=16, segments=8), 4)


def test_build_source_overrides():
    config = ScenarioConfig(source="broadband", overlap=0.5, mean_pairs_per_pulse=0.2)
    source = build_source(config)
    assert source.intrinsic_overlap == 0.5
    assert source.mean_pairs_per_pulse == 0.2
