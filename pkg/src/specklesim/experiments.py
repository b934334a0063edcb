"""End-to-end scenario runners wiring medium, shaping and statistics.

Each runner reproduces one reference curve at desk scale and emits
plot-ready CSV files plus a ``key = value`` manifest into its output
directory.  Everything is deterministic in the master seed: replicate
media draw child seeds along fixed integer paths, Monte Carlo points use
per-point substreams, and emitted files are byte-identical across runs
and worker counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .medium import TransmissionMatrix, gaussian_transmission_matrix, haar_unitary
from .rng import child_seed
from .shaping import (
    DegenerateFitError,
    PhasePattern,
    ProgrammedCircuit,
    effective_circuit,
    combine_patterns,
    ideal_circuit,
    mode_templates,
    optimize_pattern,
    shaped_input,
    target_intensity,
)
from .twophoton import (
    CoincidenceScan,
    PhotonPairSource,
    VisibilityResult,
    hom_scan,
    montecarlo_counts,
    source_preset,
    visibility,
)

__all__ = [
    "ScenarioConfig",
    "AlphaScanResult",
    "EnhancementRow",
    "build_medium",
    "build_source",
    "program_circuit",
    "reference_delay",
    "analytic_visibility",
    "montecarlo_visibility",
    "fit_visibility_cosine",
    "run_alpha_scan",
    "run_hom_reproduction",
    "run_enhancement_study",
    "dip_half_width",
    "emit_scenario",
]

# child-seed derivation tags (part of the determinism contract)
_TAG_ALPHA_POINT = 1
_TAG_STUDY = 2


def _default_alpha_grid() -> np.ndarray:
    return np.linspace(0.0, math.pi, 9)


def _default_delay_grid() -> np.ndarray:
    return np.linspace(-3e-12, 3e-12, 241)


def _default_theta_grid() -> np.ndarray:
    return np.linspace(0.0, 2.0 * math.pi, 25)


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    """Knobs shared by all scenario runners.

    ``circuit`` selects how the 2x2 circuit is realized: ``"ideal"`` uses
    the exact programmed-splitter form with amplitude ``t`` (no medium),
    ``"shaped"`` programs it into a random medium by wavefront shaping.
    ``counting`` selects noiseless analytic rates or Monte Carlo pulse
    counting with ``pulses_per_point`` pulses per measurement.
    """

    medium_kind: str = "gaussian"
    n_out: int = 4000
    n_in: int | None = None  # defaults to 2 * segments
    medium_seed: int | None = None  # defaults to the master seed
    segments: int = 960
    output_m: int = 0
    output_n: int = 1
    circuit: str = "ideal"
    t: float = 0.45
    alpha: float = math.pi
    method: str = "analytic"
    steps: int = 8
    alpha_grid: np.ndarray = field(default_factory=_default_alpha_grid)
    delta_theta_grid: np.ndarray = field(default_factory=_default_theta_grid)
    delay_grid: np.ndarray = field(default_factory=_default_delay_grid)
    source: str = "filtered"
    overlap: float | None = None
    bandwidth_fwhm_nm: float | None = None
    mean_pairs_per_pulse: float | None = None
    counting: str = "analytic"
    pulses_per_point: int = 200_000
    seeds: int = 20
    segment_counts: tuple[int, ...] = (64, 256, 960)
    out_dir: str = "out"

    def __post_init__(self) -> None:
        for name in ("alpha_grid", "delta_theta_grid", "delay_grid"):
            grid = np.atleast_1d(np.asarray(getattr(self, name), dtype=float))
            if grid.size == 0:
                raise ValueError(f"{name} must be non-empty")
            object.__setattr__(self, name, grid)
        object.__setattr__(self, "segment_counts", tuple(int(c) for c in self.segment_counts))
        for name, value in (
            ("n_out", self.n_out),
            ("segments", self.segments),
            ("steps", self.steps),
            ("pulses_per_point", self.pulses_per_point),
            ("seeds", self.seeds),
        ):
            if int(value) != value or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
        if any(c < 1 for c in self.segment_counts):
            raise ValueError("segment_counts must be positive integers")
        if self.medium_kind not in ("gaussian", "unitary"):
            raise ValueError(f"medium_kind must be 'gaussian' or 'unitary', got {self.medium_kind!r}")
        if self.circuit not in ("ideal", "shaped"):
            raise ValueError(f"circuit must be 'ideal' or 'shaped', got {self.circuit!r}")
        if self.counting not in ("analytic", "montecarlo"):
            raise ValueError(f"counting must be 'analytic' or 'montecarlo', got {self.counting!r}")
        if self.method not in ("analytic", "stepped"):
            raise ValueError(f"method must be 'analytic' or 'stepped', got {self.method!r}")
        if self.t < 0:
            raise ValueError("t must be nonnegative")
        if self.overlap is not None and not 0.0 <= self.overlap <= 1.0:
            raise ValueError("overlap must be in [0, 1]")
        if self.output_m == self.output_n:
            raise ValueError("output_m and output_n must differ")
        if self.output_m < 0 or self.output_n < 0:
            raise ValueError("output modes must be nonnegative channel indices")
        if self.resolved_n_in < 2 * self.segments:
            raise ValueError(
                f"n_in = {self.resolved_n_in} cannot host two disjoint modes of {self.segments} segments"
            )

    @property
    def resolved_n_in(self) -> int:
        return int(self.n_in) if self.n_in is not None else 2 * self.segments

    def resolved_medium_seed(self, master_seed: int) -> int:
        return int(self.medium_seed) if self.medium_seed is not None else int(master_seed)

    def echo(self) -> dict[str, str]:
        """Config as manifest-ready strings."""
        out: dict[str, str] = {}
        for name in (
            "medium_kind", "n_out", "segments", "output_m", "output_n", "circuit",
            "method", "steps", "source", "counting", "pulses_per_point", "seeds",
        ):
            out[name] = str(getattr(self, name))
        out["n_in"] = str(self.resolved_n_in)
        out["medium_seed"] = "master" if self.medium_seed is None else str(self.medium_seed)
        out["t"] = _fmt(self.t)
        out["alpha"] = _fmt(self.alpha)
        for name in ("alpha_grid", "delta_theta_grid", "delay_grid"):
            out[name] = ",".join(_fmt(v) for v in getattr(self, name))
        out["segment_counts"] = ",".join(str(c) for c in self.segment_counts)
        for name in ("overlap", "bandwidth_fwhm_nm", "mean_pairs_per_pulse"):
            value = getattr(self, name)
            out[name] = "preset" if value is None else _fmt(value)
        return out


def build_medium(config: ScenarioConfig, master_seed: int) -> TransmissionMatrix:
    """Generate the medium described by a config."""
    seed = config.resolved_medium_seed(master_seed)
    if config.medium_kind == "unitary":
        if config.n_out != config.resolved_n_in:
            raise ValueError("unitary media must be square: set n_out = n_in")
        return haar_unitary(config.n_out, seed)
    return gaussian_transmission_matrix(config.n_out, config.resolved_n_in, seed)


def build_source(config: ScenarioConfig) -> PhotonPairSource:
    """Pair source from the configured preset plus overrides."""
    return source_preset(
        config.source,
        overlap=config.overlap,
        filter_fwhm_nm=config.bandwidth_fwhm_nm,
        mean_pairs_per_pulse=config.mean_pairs_per_pulse,
    )


def program_circuit(
    medium: TransmissionMatrix,
    segments: int,
    m: int,
    n: int,
    alpha: float,
    method: str = "analytic",
    steps: int = 8,
) -> tuple[PhasePattern, PhasePattern, ProgrammedCircuit]:
    """Optimize four patterns, combine them with ``alpha``, read the circuit."""
    template_k, template_l = mode_templates(segments)
    p_km = optimize_pattern(medium, template_k, m, method, steps)
    p_kn = optimize_pattern(medium, template_k, n, method, steps)
    p_lm = optimize_pattern(medium, template_l, m, method, steps)
    p_ln = optimize_pattern(medium, template_l, n, method, steps)
    pattern_k, pattern_l = combine_patterns(p_km, p_kn, p_lm, p_ln, alpha)
    circuit = effective_circuit(medium, pattern_k, pattern_l, m, n, alpha)
    return pattern_k, pattern_l, circuit


def reference_delay(source: PhotonPairSource) -> float:
    """Delay standing in for the experiment's far-out baseline.

    ``10 / sigma_omega`` leaves a residual overlap below ``exp(-100)``,
    indistinguishable from fully distinguishable photons.
    """
    return 10.0 / source.rms_angular_bandwidth


def analytic_visibility(circuit: ProgrammedCircuit, source: PhotonPairSource) -> VisibilityResult:
    """Noiseless visibility: zero-delay rate against the far-delay baseline."""
    scan = hom_scan(circuit, source, [0.0, reference_delay(source)])
    return visibility(scan.coincidence_rate[0], scan.coincidence_rate[1])


def montecarlo_visibility(
    circuit: ProgrammedCircuit,
    source: PhotonPairSource,
    n_pulses: int,
    seed: int,
) -> VisibilityResult:
    """Visibility estimated from two Monte Carlo runs (zero and far delay).

    The standard error follows from first-order propagation of the
    counting variances through ``v = c0/cref - 1``.
    """
    _, _, c0 = montecarlo_counts(circuit, source, n_pulses, child_seed(seed, 0), delay_s=0.0)
    _, _, cref = montecarlo_counts(
        circuit, source, n_pulses, child_seed(seed, 1), delay_s=reference_delay(source)
    )
    if cref == 0:
        raise DegenerateFitError("no reference coincidences; raise pulses_per_point")
    var0 = c0 * max(0.0, 1.0 - c0 / n_pulses)
    varref = cref * max(0.0, 1.0 - cref / n_pulses)
    std_err = math.sqrt(var0 / cref**2 + c0**2 * varref / cref**4)
    return visibility(float(c0), float(cref), std_err=std_err)


def fit_visibility_cosine(alphas, visibilities) -> tuple[float, float]:
    """One-parameter least squares of ``V(alpha) = V0 * cos(alpha)``.

    Returns ``(v0, std_err)`` with the standard error taken from the
    residual variance.  Degenerate when every ``cos(alpha)`` vanishes.
    """
    alphas = np.asarray(alphas, dtype=float)
    values = np.asarray(visibilities, dtype=float)
    if alphas.shape != values.shape or alphas.ndim != 1 or alphas.size == 0:
        raise ValueError("alphas and visibilities must be matching non-empty 1-d arrays")
    cos = np.cos(alphas)
    denom = float(np.sum(cos * cos))
    # cos(pi/2) is ~6e-17 in floats; treat anything at rounding scale as zero
    if denom < 1e-20:
        raise DegenerateFitError("all cos(alpha) vanish; V0 is unconstrained")
    v0 = float(np.sum(values * cos) / denom)
    if alphas.size > 1:
        residuals = values - v0 * cos
        std_err = math.sqrt(float(np.sum(residuals**2)) / (alphas.size - 1) / denom)
    else:
        std_err = 0.0
    return v0, std_err


@dataclass(frozen=True, eq=False)
class AlphaScanResult:
    """Programmability curve: visibility versus programmed phase."""

    alphas: np.ndarray
    visibilities: np.ndarray
    std_errs: np.ndarray
    v0_fit: float
    v0_std_err: float

    def __post_init__(self) -> None:
        for name in ("alphas", "visibilities", "std_errs"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if not (self.alphas.shape == self.visibilities.shape == self.std_errs.shape):
            raise ValueError("alphas, visibilities and std_errs must share a shape")
        if abs(self.v0_fit) > 1.0 + 3.0 * self.v0_std_err + 1e-12:
            raise ValueError(f"v0_fit = {self.v0_fit} is not a physical visibility amplitude")


def run_alpha_scan(
    config: ScenarioConfig,
    master_seed: int = 0,
    out_dir: str | Path | None = None,
    force: bool = False,
) -> AlphaScanResult:
    """Scan the programmed phase and fit the visibility cosine law.

    For every ``alpha`` on the grid the circuit is programmed (ideally or
    by shaping the configured medium), its coincidence rate is measured
    at zero delay and at the far reference delay, and the visibility is
    recorded.  The scan is then summarized by the one-parameter cosine
    fit.
    """
    source = build_source(config)
    medium = build_medium(config, master_seed) if config.circuit == "shaped" else None
    visibilities = []
    std_errs = []
    for index, alpha in enumerate(config.alpha_grid):
        if medium is None:
            circuit = ideal_circuit(config.t, float(alpha))
        else:
            _, _, circuit = program_circuit(
                medium, config.segments, config.output_m, config.output_n,
                float(alpha), config.method, config.steps,
            )
        if config.counting == "analytic":
            result = analytic_visibility(circuit, source)
        else:
            point_seed = child_seed(master_seed, _TAG_ALPHA_POINT, index)
            result = montecarlo_visibility(circuit, source, config.pulses_per_point, point_seed)
        visibilities.append(result.v)
        std_errs.append(result.std_err)
    v0, v0_err = fit_visibility_cosine(config.alpha_grid, visibilities)
    scan = AlphaScanResult(
        alphas=config.alpha_grid,
        visibilities=np.array(visibilities),
        std_errs=np.array(std_errs),
        v0_fit=v0,
        v0_std_err=v0_err,
    )
    if out_dir is not None:
        rows = ["alpha_rad,visibility,std_err"]
        for a, v, e in zip(scan.alphas, scan.visibilities, scan.std_errs):
            rows.append(f"{a:.17g},{v:.17g},{e:.17g}")
        emit_scenario(
            out_dir,
            "alpha-scan",
            master_seed,
            files={
                "visibility.csv": "\n".join(rows) + "\n",
                "fit.csv": f"v0_fit,v0_std_err\n{v0:.17g},{v0_err:.17g}\n",
            },
            config=config,
            force=force,
        )
    return scan


def run_hom_reproduction(
    config: ScenarioConfig,
    master_seed: int = 0,
    out_dir: str | Path | None = None,
    force: bool = False,
) -> dict[str, CoincidenceScan]:
    """Delay scans of an ideal 50:50 circuit for two source presets.

    The broadband and filtered presets differ in overlap and bandwidth;
    the dip depths reproduce the overlaps and the dip widths scale with
    the inverse bandwidths.
    """
    circuit = ideal_circuit(1.0 / math.sqrt(2.0), math.pi)
    scans: dict[str, CoincidenceScan] = {}
    summary = ["preset,visibility,half_width_s"]
    files: dict[str, str] = {}
    for name in ("broadband", "filtered"):
        source = source_preset(name, mean_pairs_per_pulse=config.mean_pairs_per_pulse)
        scan = hom_scan(circuit, source, config.delay_grid)
        scans[name] = scan
        baseline = hom_scan(circuit, source, [reference_delay(source)]).coincidence_rate[0]
        vis = visibility(scan.coincidence_rate[np.argmin(np.abs(scan.delays))], baseline)
        summary.append(f"{name},{vis.v:.17g},{dip_half_width(scan):.17g}")
        rows = ["delay_s,coincidence,singles_m,singles_n"]
        for i in range(scan.delays.size):
            rows.append(
                f"{scan.delays[i]:.17g},{scan.coincidence_rate[i]:.17g},"
                f"{scan.singles_m[i]:.17g},{scan.singles_n[i]:.17g}"
            )
        files[f"hom_{name}.csv"] = "\n".join(rows) + "\n"
    files["summary.csv"] = "\n".join(summary) + "\n"
    if out_dir is not None:
        emit_scenario(out_dir, "hom-reproduction", master_seed, files, config, force)
    return scans


def dip_half_width(scan: CoincidenceScan) -> float:
    """Half width at half depth of a coincidence dip, by interpolation.

    The baseline is the average of the scan's end points; the dip depth
    is measured at the deepest sample and the crossings of the half-depth
    level are located by linear interpolation on both flanks.
    """
    c = scan.coincidence_rate
    tau = scan.delays
    baseline = 0.5 * (c[0] + c[-1])
    bottom = int(np.argmin(c))
    depth = baseline - c[bottom]
    if depth <= 0:
        raise ValueError("scan has no dip")
    level = baseline - 0.5 * depth
    left = _crossing(tau, c, bottom, -1, level)
    right = _crossing(tau, c, bottom, +1, level)
    return 0.5 * (right - left)


def _crossing(tau: np.ndarray, c: np.ndarray, start: int, step: int, level: float) -> float:
    i = start
    while 0 <= i + step < c.size and c[i + step] < level:
        i += step
    j = i + step
    if not 0 <= j < c.size:
        raise ValueError("dip is not resolved inside the scan window")
    # linear interpolation between the bracketing samples
    frac = (level - c[i]) / (c[j] - c[i])
    return float(tau[i] + frac * (tau[j] - tau[i]))


@dataclass(frozen=True)
class EnhancementRow:
    n_segments: int
    mean_enhancement: float
    std_enhancement: float
    predicted: float


def run_enhancement_study(
    config: ScenarioConfig,
    master_seed: int = 0,
    out_dir: str | Path | None = None,
    force: bool = False,
) -> list[EnhancementRow]:
    """Measure the focusing enhancement against the phase-only law.

    For each segment count, ``config.seeds`` fresh media are drawn, one
    input mode is optimized onto one output channel, and the optimized
    target intensity is divided by the medium's mean unshaped speckle
    intensity.  The prediction for ``N`` phase-only segments is
    ``1 + (pi/4) (N - 1)``.
    """
    rows: list[EnhancementRow] = []
    for idx, n_seg in enumerate(config.segment_counts):
        ratios = []
        for replicate in range(config.seeds):
            seed = child_seed(master_seed, _TAG_STUDY, idx, replicate)
            medium = gaussian_transmission_matrix(config.n_out, n_seg, seed)
            template = PhasePattern(np.zeros(n_seg), "k", np.arange(n_seg, dtype=np.int64))
            pattern = optimize_pattern(medium, template, config.output_m, config.method, config.steps)
            flat = shaped_input(template, medium.n_in)
            background = float(np.mean(np.abs(medium.entries @ flat) ** 2))
            ratios.append(target_intensity(medium, pattern, config.output_m) / background)
        rows.append(
            EnhancementRow(
                n_segments=int(n_seg),
                mean_enhancement=float(np.mean(ratios)),
                std_enhancement=float(np.std(ratios)),
                predicted=1.0 + (math.pi / 4.0) * (n_seg - 1),
            )
        )
    if out_dir is not None:
        lines = ["n_segments,mean_enhancement,std_enhancement,predicted"]
        for row in rows:
            lines.append(
                f"{row.n_segments},{row.mean_enhancement:.17g},"
                f"{row.std_enhancement:.17g},{row.predicted:.17g}"
            )
        emit_scenario(
            out_dir, "enhancement-study", master_seed,
            {"enhancement.csv": "\n".join(lines) + "\n"}, config, force,
        )
    return rows


# ---------------------------------------------------------------------------
# Artifact emission
# ---------------------------------------------------------------------------


def emit_scenario(
    out_dir: str | Path,
    scenario: str,
    master_seed: int,
    files: dict[str, str],
    config: ScenarioConfig | None,
    force: bool = False,
) -> Path:
    """Write a manifest plus data files with deterministic names.

    Every file is named ``<scenario>_seed<seed>.<name>``.  An existing
    manifest is never overwritten unless ``force`` is set.
    Returns the manifest path.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    prefix = f"{scenario}_seed{master_seed}"
    manifest_path = out / f"{prefix}.manifest.txt"
    if manifest_path.exists() and not force:
        raise FileExistsError(
            f"{manifest_path} already exists; pass force/--force to overwrite"
        )
    entries = {
        "scenario": scenario,
        "artifact_version": __version__,
        "master_seed": str(master_seed),
    }
    if config is not None:
        entries.update(config.echo())
    text = "".join(f"{key} = {value}\n" for key, value in entries.items())
    manifest_path.write_text(text, newline="\n")
    for name, content in files.items():
        (out / f"{prefix}.{name}").write_text(content, newline="\n")
    return manifest_path


def _fmt(value: float) -> str:
    return f"{float(value):.17g}"
