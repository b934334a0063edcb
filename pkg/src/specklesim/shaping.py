"""Phase-only wavefront shaping and 2x2 circuit programming.

The spatial light modulator splits each input mode into segments and
imposes one phase per segment.  Against a random medium this buys three
capabilities, built on top of each other:

1. :func:`optimize_pattern` finds the per-segment phases that make all
   contributions at one target output channel interfere constructively,
   turning a speckle grain into a bright enhanced spot.
2. :func:`combine_patterns` merges two single-target patterns per input
   mode into one phase-only pattern that feeds both outputs at once, with
   a programmable phase ``alpha`` inserted on one path.
3. :func:`effective_circuit` reads back the resulting 2x2 field matrix
   between the two shaped inputs and the two target outputs and fits the
   programmed-splitter form ``t * [[1, 1], [1, exp(i*alpha)]]``.

Phase reference.  All analytic patterns are measured against a fixed
phase origin: the phase the medium imprints on input channel 0 at the
pattern's target output, as if every measurement interfered with the
same reference channel.  A shared origin is what keeps patterns for
*different* input modes mutually consistent; with per-pattern origins
the programmed phase between the combined patterns would be scrambled by
an arbitrary per-mode offset.  A pattern whose first segment drives
channel 0 therefore carries phase 0 on that segment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .medium import MatrixKind, TransmissionMatrix

__all__ = [
    "DegenerateFitError",
    "PhasePattern",
    "ProgrammedCircuit",
    "ClassicalScan",
    "mode_templates",
    "optimize_pattern",
    "combine_patterns",
    "effective_circuit",
    "ideal_circuit",
    "classical_scan",
    "fit_sine",
    "shaped_input",
    "target_intensity",
    "phase_distance",
    "pattern_csv",
    "save_pattern",
    "load_pattern",
    "circuit_csv",
    "save_circuit",
]

TWO_PI = 2.0 * math.pi

# Input channel whose transmission phase serves as the global phase origin.
REFERENCE_CHANNEL = 0


class DegenerateFitError(ValueError):
    """Least-squares fit has singular normal equations."""


def _wrap_phase(values: np.ndarray) -> np.ndarray:
    # np.mod can round a tiny negative input up to exactly 2*pi
    wrapped = np.mod(values, TWO_PI)
    return np.where(wrapped >= TWO_PI, 0.0, wrapped)


@dataclass(frozen=True, eq=False)
class PhasePattern:
    """Per-segment modulator phases for one input mode.

    ``segment_to_channel[s]`` is the medium input channel driven by
    segment ``s``; mappings of different input modes must be disjoint.
    """

    phases: np.ndarray
    input_mode_id: str
    segment_to_channel: np.ndarray

    def __post_init__(self) -> None:
        phases = np.asarray(self.phases, dtype=float)
        channels = np.asarray(self.segment_to_channel, dtype=np.int64)
        object.__setattr__(self, "phases", phases)
        object.__setattr__(self, "segment_to_channel", channels)
        if phases.ndim != 1 or phases.size == 0:
            raise ValueError("pattern needs at least one segment")
        if channels.shape != phases.shape:
            raise ValueError("segment_to_channel must map every segment")
        if np.any(~np.isfinite(phases)) or np.any(phases < 0.0) or np.any(phases >= TWO_PI):
            raise ValueError("phases must lie in [0, 2*pi)")
        if np.any(channels < 0):
            raise ValueError("channel indices must be nonnegative")
        if np.unique(channels).size != channels.size:
            raise ValueError("segment_to_channel must be injective")

    @property
    def n_segments(self) -> int:
        return self.phases.size


def mode_templates(n_segments: int, mode_ids: tuple[str, ...] = ("k", "l")) -> list[PhasePattern]:
    """Zero-phase pattern templates on contiguous disjoint channel blocks.

    Mode ``i`` drives channels ``[i*n_segments, (i+1)*n_segments)``.
    """
    if int(n_segments) != n_segments or n_segments < 1:
        raise ValueError(f"n_segments must be a positive integer, got {n_segments}")
    out = []
    for i, mode_id in enumerate(mode_ids):
        channels = np.arange(i * n_segments, (i + 1) * n_segments, dtype=np.int64)
        out.append(PhasePattern(np.zeros(n_segments), mode_id, channels))
    return out


def shaped_input(pattern: PhasePattern, n_in: int) -> np.ndarray:
    """Unit-power input field realizing a pattern.

    Total power 1 is spread evenly over the pattern's segments, so
    programmed-circuit amplitudes are comparable across segment counts.
    """
    if int(pattern.segment_to_channel.max()) >= n_in:
        raise ValueError("pattern drives channels outside the medium")
    field = np.zeros(n_in, dtype=np.complex128)
    field[pattern.segment_to_channel] = np.exp(1j * pattern.phases) / math.sqrt(pattern.n_segments)
    return field


def target_intensity(matrix: TransmissionMatrix, pattern: PhasePattern, target_output: int) -> float:
    """Intensity at one output channel for a shaped unit-power input."""
    _check_target(matrix, target_output)
    field = shaped_input(pattern, matrix.n_in)
    return float(abs(matrix.entries[target_output] @ field) ** 2)


def optimize_pattern(
    matrix: TransmissionMatrix,
    template: PhasePattern,
    target_output: int,
    method: str = "analytic",
    steps: int = 8,
) -> PhasePattern:
    """Phases maximizing constructive interference at one output channel.

    Parameters
    ----------
    matrix:
        The medium.
    template:
        Pattern defining the segment-to-channel mapping; its phases are
        the starting state for the stepped method.
    target_output:
        Output channel to enhance.
    method:
        ``"analytic"`` reads the optimum off the matrix: each segment
        phase is the negative transmission phase of its channel, offset
        to the shared channel-0 reference (see the module docstring).
        ``"stepped"`` emulates a feedback experiment: each segment is
        scanned over ``steps`` equally spaced phases against the
        otherwise unmodified template pattern, the intensity response is
        sinusoid-fitted, and all fitted maximizers are applied together
        at the end.  With noiseless intensities it reproduces the
        analytic pattern up to the finite strength of the unshaped
        reference field.
    steps:
        Phase steps per segment for ``"stepped"``; at least 3, or the
        sinusoid is under-determined.

    The optimized field at the target is real-positive up to the global
    reference phase, and the target intensity never drops below its
    template value.
    """
    _check_target(matrix, target_output)
    channels = template.segment_to_channel
    if int(channels.max()) >= matrix.n_in:
        raise ValueError("pattern drives channels outside the medium")
    row = matrix.entries[target_output]
    if method == "analytic":
        reference = np.angle(row[REFERENCE_CHANNEL])
        phases = _wrap_phase(reference - np.angle(row[channels]))
        return PhasePattern(phases, template.input_mode_id, channels.copy())
    if method != "stepped":
        raise ValueError(f"unknown method {method!r}; expected 'analytic' or 'stepped'")
    if int(steps) != steps or steps < 3:
        raise ValueError(f"steps must be an integer >= 3, got {steps}")

    amplitude = 1.0 / math.sqrt(template.n_segments)
    contributions = amplitude * row[channels] * np.exp(1j * template.phases)
    total = contributions.sum()
    scan_phases = np.arange(steps) * TWO_PI / steps
    phasors = np.exp(1j * scan_phases)
    phases = np.array(template.phases, dtype=float)
    for s in range(template.n_segments):
        rest = total - contributions[s]
        response = np.abs(rest + amplitude * row[channels[s]] * phasors) ** 2
        _, fit_amplitude, fit_phase = fit_sine(scan_phases, response)
        if fit_amplitude > 0.0:
            phases[s] = float(_wrap_phase(np.asarray(math.pi / 2.0 - fit_phase)))
    return PhasePattern(phases, template.input_mode_id, channels.copy())


def combine_patterns(
    p_km: PhasePattern,
    p_kn: PhasePattern,
    p_lm: PhasePattern,
    p_ln: PhasePattern,
    alpha: float,
) -> tuple[PhasePattern, PhasePattern]:
    """Merge four single-target patterns into one pattern per input mode.

    Per segment the two parent phasors are added and only the argument is
    kept (the modulator is phase-only; the amplitude penalty of dropping
    the modulus surfaces later as a lower fitted ``t``).  The programmed
    phase ``alpha`` is inserted on the second mode's path to output ``n``
    before combining; any single-arm placement is equivalent for the
    resulting 2x2 circuit, fixing one keeps results deterministic.

    Where the two parent phasors cancel exactly, the tie breaks to the
    first parent's phase.
    """
    _check_siblings(p_km, p_kn)
    _check_siblings(p_lm, p_ln)
    combined_k = _phasor_sum_phase(p_km.phases, p_kn.phases, 0.0)
    combined_l = _phasor_sum_phase(p_lm.phases, p_ln.phases, alpha)
    return (
        PhasePattern(combined_k, p_km.input_mode_id, p_km.segment_to_channel.copy()),
        PhasePattern(combined_l, p_lm.input_mode_id, p_lm.segment_to_channel.copy()),
    )


def _phasor_sum_phase(first: np.ndarray, second: np.ndarray, offset: float) -> np.ndarray:
    total = np.exp(1j * first) + np.exp(1j * (second + offset))
    return _wrap_phase(np.where(total == 0, first, np.angle(total)))


def _check_siblings(a: PhasePattern, b: PhasePattern) -> None:
    if a.input_mode_id != b.input_mode_id:
        raise ValueError(f"patterns drive different input modes: {a.input_mode_id!r} vs {b.input_mode_id!r}")
    if not np.array_equal(a.segment_to_channel, b.segment_to_channel):
        raise ValueError("patterns of one input mode must share their segment mapping")


@dataclass(frozen=True, eq=False)
class ProgrammedCircuit:
    """Effective 2x2 field matrix carved out of the medium.

    ``sub_matrix[i, j]`` couples shaped input mode ``j`` (k, l) to output
    mode ``i`` (m, n).  ``t_fit`` and ``alpha_fit`` are the least-squares
    parameters of the programmed-splitter form after factoring out global
    and relative input/output phases.
    """

    sub_matrix: np.ndarray
    alpha_set: float
    t_fit: float
    alpha_fit: float
    output_modes: tuple[int, int]
    largest_singular_value: float

    def __post_init__(self) -> None:
        sub = np.asarray(self.sub_matrix, dtype=np.complex128)
        object.__setattr__(self, "sub_matrix", sub)
        if sub.shape != (2, 2):
            raise ValueError(f"sub_matrix must be 2x2, got {sub.shape}")
        if not np.all(np.isfinite(sub.view(np.float64))):
            raise ValueError("sub_matrix must be finite")
        if self.t_fit < 0 or self.largest_singular_value < 0:
            raise ValueError("t_fit and largest_singular_value must be nonnegative")

    @property
    def is_embeddable(self) -> bool:
        return self.largest_singular_value <= 1.0 + 1e-9


def ideal_circuit(t: float, alpha: float, output_modes: tuple[int, int] = (0, 1)) -> ProgrammedCircuit:
    """Exactly programmed splitter ``t * [[1, 1], [1, exp(i*alpha)]]``."""
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    sub = t * np.array([[1.0, 1.0], [1.0, np.exp(1j * alpha)]])
    sigma = float(np.linalg.svd(sub, compute_uv=False)[0])
    return ProgrammedCircuit(
        sub_matrix=sub,
        alpha_set=float(alpha),
        t_fit=float(t),
        alpha_fit=float(alpha),
        output_modes=output_modes,
        largest_singular_value=sigma,
    )


def effective_circuit(
    matrix: TransmissionMatrix,
    pattern_k: PhasePattern,
    pattern_l: PhasePattern,
    m: int,
    n: int,
    alpha_set: float,
) -> ProgrammedCircuit:
    """Read back the 2x2 circuit realized by two combined patterns.

    Each input mode is driven with a unit-power field spread evenly over
    its segments; the four complex couplings to outputs ``m`` and ``n``
    form the sub-matrix.  ``t_fit`` is the least-squares common amplitude
    (the mean of the four magnitudes) and ``alpha_fit`` the gauge
    invariant relative phase ``arg(a*d / (b*c))``, the only phase left
    after factoring out per-input and per-output phases.
    """
    if m == n:
        raise ValueError("output modes m and n must differ")
    _check_target(matrix, m)
    _check_target(matrix, n)
    overlap = np.intersect1d(pattern_k.segment_to_channel, pattern_l.segment_to_channel)
    if overlap.size:
        raise ValueError(f"input modes share medium channels {overlap[:4].tolist()}")
    inputs = np.column_stack(
        [shaped_input(pattern_k, matrix.n_in), shaped_input(pattern_l, matrix.n_in)]
    )
    sub = matrix.entries[[m, n], :] @ inputs
    t_fit = float(np.mean(np.abs(sub)))
    alpha_fit = float(np.angle(sub[0, 0] * sub[1, 1] * np.conj(sub[0, 1] * sub[1, 0])))
    sigma = float(np.linalg.svd(sub, compute_uv=False)[0])
    if matrix.kind is MatrixKind.UNITARY and sigma > 1.0 + 1e-9:
        raise ValueError(f"sub-block of a unitary medium has singular value {sigma} > 1")
    return ProgrammedCircuit(
        sub_matrix=sub,
        alpha_set=float(alpha_set),
        t_fit=t_fit,
        alpha_fit=alpha_fit,
        output_modes=(m, n),
        largest_singular_value=sigma,
    )


@dataclass(frozen=True, eq=False)
class ClassicalScan:
    """Output intensities versus the relative phase of the two inputs."""

    delta_theta: np.ndarray
    intensity_m: np.ndarray
    intensity_n: np.ndarray

    def __post_init__(self) -> None:
        for name in ("delta_theta", "intensity_m", "intensity_n"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if self.delta_theta.ndim != 1 or self.delta_theta.size == 0:
            raise ValueError("delta_theta grid must be non-empty")
        for name in ("intensity_m", "intensity_n"):
            arr = getattr(self, name)
            if arr.shape != self.delta_theta.shape:
                raise ValueError(f"{name} must match the grid length")
            if np.any(arr < 0):
                raise ValueError(f"{name} must be nonnegative")


def classical_scan(
    matrix: TransmissionMatrix,
    pattern_k: PhasePattern,
    pattern_l: PhasePattern | None,
    m: int,
    n: int,
    delta_theta,
) -> ClassicalScan:
    """Classical two-beam interference scan of a programmed circuit.

    Equal-power coherent fields enter both shaped input modes with a
    relative phase ``delta_theta``; the intensities at outputs ``m`` and
    ``n`` trace sinusoids whose relative phase reveals the programmed
    ``alpha``.  Pass ``pattern_l=None`` to switch the second input off
    (single-beam scans are flat).
    """
    grid = np.asarray(delta_theta, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("delta_theta grid must be a non-empty 1-d array")
    _check_target(matrix, m)
    _check_target(matrix, n)
    field_k = shaped_input(pattern_k, matrix.n_in)
    a, c = matrix.entries[[m, n], :] @ field_k
    if pattern_l is None:
        b = d = 0.0 + 0.0j
    else:
        field_l = shaped_input(pattern_l, matrix.n_in)
        b, d = matrix.entries[[m, n], :] @ field_l
    rotation = np.exp(1j * grid)
    return ClassicalScan(
        delta_theta=grid,
        intensity_m=np.abs(a + b * rotation) ** 2,
        intensity_n=np.abs(c + d * rotation) ** 2,
    )


def fit_sine(x, y) -> tuple[float, float, float]:
    """Least-squares fit of ``y = offset + amplitude * sin(x + phase)``.

    Returns ``(offset, amplitude, phase)`` with ``amplitude >= 0``.
    Raises ``ValueError`` for fewer than 3 samples and
    :class:`DegenerateFitError` when the normal equations are singular
    (for example all ``x`` equal).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-d arrays of equal length")
    if x.size < 3:
        raise ValueError(f"need at least 3 samples to fit a sinusoid, got {x.size}")
    design = np.column_stack([np.ones_like(x), np.sin(x), np.cos(x)])
    coef, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < 3:
        raise DegenerateFitError("sinusoid fit is degenerate (rank-deficient design)")
    offset, a, b = coef
    amplitude = float(np.hypot(a, b))
    phase = float(math.atan2(b, a))
    return float(offset), amplitude, phase


def phase_distance(a: float, b: float) -> float:
    """Circular distance between two phases, in [0, pi]."""
    return abs(float(np.angle(np.exp(1j * (np.asarray(a) - np.asarray(b))))))


def _check_target(matrix: TransmissionMatrix, channel: int) -> None:
    if not 0 <= channel < matrix.n_out:
        raise ValueError(f"output channel {channel} out of range [0, {matrix.n_out})")


# ---------------------------------------------------------------------------
# CSV persistence
# ---------------------------------------------------------------------------


def pattern_csv(pattern: PhasePattern) -> str:
    """Pattern as CSV text, one segment per ``segment,channel,phase_rad`` row."""
    lines = ["segment,channel,phase_rad"]
    for s in range(pattern.n_segments):
        lines.append(f"{s},{pattern.segment_to_channel[s]},{pattern.phases[s]:.17g}")
    return "\n".join(lines) + "\n"


def save_pattern(pattern: PhasePattern, path: str | Path) -> None:
    """Write one segment per row as ``segment,channel,phase_rad``."""
    Path(path).write_text(pattern_csv(pattern), newline="\n")


def load_pattern(path: str | Path, input_mode_id: str = "k") -> PhasePattern:
    """Read a pattern written by :func:`save_pattern`."""
    lines = Path(path).read_text().strip().splitlines()
    if not lines or lines[0] != "segment,channel,phase_rad":
        raise ValueError(f"{path}: not a pattern CSV")
    channels = []
    phases = []
    for line in lines[1:]:
        _, channel, phase = line.split(",")
        channels.append(int(channel))
        phases.append(float(phase))
    return PhasePattern(np.array(phases), input_mode_id, np.array(channels, dtype=np.int64))


def circuit_csv(circuit: ProgrammedCircuit) -> str:
    """Circuit as one CSV row: four complex couplings plus fit parameters."""
    header = (
        "t_mk_re,t_mk_im,t_ml_re,t_ml_im,t_nk_re,t_nk_im,t_nl_re,t_nl_im,"
        "alpha_set,alpha_fit,t_fit,sigma_max"
    )
    sub = circuit.sub_matrix
    values = []
    for entry in (sub[0, 0], sub[0, 1], sub[1, 0], sub[1, 1]):
        values.extend([entry.real, entry.imag])
    values.extend([circuit.alpha_set, circuit.alpha_fit, circuit.t_fit, circuit.largest_singular_value])
    row = ",".join(f"{value:.17g}" for value in values)
    return header + "\n" + row + "\n"


def save_circuit(circuit: ProgrammedCircuit, path: str | Path) -> None:
    """Write the four complex couplings and the fitted parameters."""
    Path(path).write_text(circuit_csv(circuit), newline="\n")
