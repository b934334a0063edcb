"""Two-photon output statistics of a programmed 2x2 circuit.

A 2x2 circuit carved out of a scattering medium maps input modes
``(k, l)`` to output modes ``(m, n)`` with the field matrix
``t * [[1, 1], [1, exp(i*alpha)]]``.  Because the two monitored outputs
are a tiny sub-space of the medium, the circuit is in general lossy and
non-unitary; it is embeddable in a physical (unitary) medium only while
its largest singular value stays at or below one.

For one photon in each input, this module provides:

- the closed-form six-outcome distribution over
  ``(2m,0n), (0m,2n), (1m,1n), (1m,0n), (0m,1n), (0m,0n)``;
- an independent brute-force route: embed the 2x2 block in a unitary
  completion, propagate the pair with matrix permanents, and aggregate
  the absorbing loss channels;
- partial distinguishability as a scalar overlap ``x`` in [0, 1] that
  weights the two-photon interference cross term (exact for pure photons
  with identical Gaussian envelopes and a relative delay);
- analytic Hong-Ou-Mandel delay scans and Monte Carlo coincidence
  counting with Poisson multi-pair emission.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .rng import check_seed, rng_for

if TYPE_CHECKING:  # pragma: no cover - typing only
    from .shaping import ProgrammedCircuit

__all__ = [
    "EmbeddabilityError",
    "UndefinedVisibilityError",
    "OutcomeDistribution",
    "OUTCOME_LABELS",
    "PhotonPairSource",
    "SOURCE_PRESETS",
    "VisibilityResult",
    "CoincidenceScan",
    "embeddability_bound",
    "outcome_probabilities",
    "permanent",
    "unitary_completion",
    "pair_outcome_components",
    "outcome_distribution",
    "two_photon_coincidence",
    "overlap_from_delay",
    "rms_bandwidth_from_filter_fwhm",
    "source_preset",
    "visibility",
    "hom_scan",
    "montecarlo_counts",
    "outcome_csv",
]

_SPEED_OF_LIGHT = 299_792_458.0

_SIGMA_TOL = 1e-9
_PERMANENT_MAX_SIDE = 20
_STREAM_MONTECARLO = 2
_MC_CHUNK = 1 << 16  # pulses per substream; fixed, part of the stream contract


class EmbeddabilityError(ValueError):
    """Circuit parameters cannot sit inside any unitary medium."""


class UndefinedVisibilityError(ValueError):
    """Visibility is undefined when the reference rate is zero."""


OUTCOME_LABELS = ("2m0n", "0m2n", "1m1n", "1m0n", "0m1n", "0m0n")

# photons arriving at m and at n for each outcome label above
_PHOTONS_M = np.array([2, 0, 1, 1, 0, 0])
_PHOTONS_N = np.array([0, 2, 1, 0, 1, 0])


@dataclass(frozen=True)
class OutcomeDistribution:
    """Probabilities of the six two-photon detection outcomes."""

    p20: float
    p02: float
    p11: float
    p10: float
    p01: float
    p00: float

    def __post_init__(self) -> None:
        for name, value in self.as_dict().items():
            if not -1e-12 <= value <= 1 + 1e-12:
                raise ValueError(f"{name} = {value} outside [0, 1]")
            # IEEE residue at the embeddability boundary may dip a hair
            # below zero; clamp it rather than reporting -2e-16.
            object.__setattr__(self, name, min(max(float(value), 0.0), 1.0))
        total = sum(self.as_array())
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"outcome probabilities sum to {total}, expected 1")

    def as_array(self) -> np.ndarray:
        return np.array([self.p20, self.p02, self.p11, self.p10, self.p01, self.p00])

    def as_dict(self) -> dict[str, float]:
        return {
            "p20": self.p20,
            "p02": self.p02,
            "p11": self.p11,
            "p10": self.p10,
            "p01": self.p01,
            "p00": self.p00,
        }


def embeddability_bound(alpha: float) -> float:
    """Largest splitting amplitude ``t`` embeddable at a given phase.

    The 2x2 form ``t*[[1, 1], [1, exp(i*alpha)]]`` has largest singular
    value ``t*sqrt(2 + 2*|cos(alpha/2)|)``; requiring it to stay at or
    below one gives ``t_max = 1/sqrt(2 + 2*|cos(alpha/2)|)``.  Only at
    ``alpha = pi`` does the bound reach ``1/sqrt(2)``, the lossless 50:50
    splitter.
    """
    return 1.0 / math.sqrt(2.0 + 2.0 * abs(math.cos(alpha / 2.0)))


def outcome_probabilities(t: float, alpha: float) -> OutcomeDistribution:
    """Closed-form outcome distribution for two indistinguishable photons.

    Parameters
    ----------
    t:
        Common field amplitude of the programmed splitter, ``t >= 0``.
    alpha:
        Programmed relative phase in radians.

    Returns
    -------
    OutcomeDistribution
        With ``u = t**2``::

            p20 = p02 = 2 u**2
            p11 = 2 u**2 (1 + cos alpha)
            p10 = p01 = 2 u - 2 u**2 (3 + cos alpha)
            p00 = 1 - 4 u + 2 u**2 (3 + cos alpha)

        The six components always sum to one.

    Raises
    ------
    EmbeddabilityError
        If ``t`` exceeds :func:`embeddability_bound` for this ``alpha``
        (exactly the parameter region that would produce negative
        probabilities).
    """
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    bound = embeddability_bound(alpha)
    if t > bound:
        raise EmbeddabilityError(
            f"t = {t:.17g} violates the embeddability bound t <= {bound:.17g} "
            f"at alpha = {alpha:.17g} rad (largest singular value would exceed 1)"
        )
    u = t * t
    c = math.cos(alpha)
    p20 = 2.0 * u * u
    p11 = 2.0 * u * u * (1.0 + c)
    p10 = 2.0 * u - 2.0 * u * u * (3.0 + c)
    p00 = 1.0 - 4.0 * u + 2.0 * u * u * (3.0 + c)
    return OutcomeDistribution(p20=p20, p02=p20, p11=p11, p10=p10, p01=p10, p00=p00)


def permanent(matrix: np.ndarray) -> complex:
    """Exact matrix permanent by subset-sum inclusion-exclusion.

    ``perm(A) = (-1)^n sum_{S != {}} (-1)^{|S|} prod_i sum_{j in S} A[i, j]``

    Cost is ``O(2^n * n)``; the side is capped at 20.  Subsets are
    processed in vectorized blocks.
    """
    a = np.asarray(matrix, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"permanent requires a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n > _PERMANENT_MAX_SIDE:
        raise ValueError(f"matrix side {n} exceeds the supported maximum {_PERMANENT_MAX_SIDE}")
    if n == 0:
        return 1.0 + 0.0j
    if not np.all(np.isfinite(a.view(np.float64))):
        raise ValueError("matrix entries must be finite")

    bit_index = np.arange(n, dtype=np.uint64)
    total = 0.0 + 0.0j
    block = 1 << 14
    for start in range(1, 1 << n, block):
        stop = min(start + block, 1 << n)
        subsets = np.arange(start, stop, dtype=np.uint64)
        masks = ((subsets[:, None] >> bit_index[None, :]) & np.uint64(1)).astype(np.float64)
        row_sums = masks @ a.T
        products = row_sums.prod(axis=1)
        parity = (n - masks.sum(axis=1)) % 2
        signs = 1.0 - 2.0 * parity
        total += (signs * products).sum()
    return complex(total)


def unitary_completion(block: np.ndarray) -> np.ndarray:
    """Embed an ``r x c`` contraction as the top-left block of a unitary.

    Returns the ``(r+c) x (r+c)`` dilation::

        [[ M,                sqrt(I - M M^dag) ]
         [ sqrt(I - M^dag M),     -M^dag       ]]

    The first ``c`` columns are the physical inputs and the first ``r``
    rows the monitored outputs; the remaining channels absorb the loss.
    Both square roots are assembled from one SVD of ``M`` so that the
    off-diagonal blocks cancel exactly even when singular values sit at
    one (a lossless block keeps zero coupling to the loss channels).

    Raises
    ------
    EmbeddabilityError
        If the largest singular value of ``block`` exceeds ``1 + 1e-9``.
        Singular values inside the tolerance band are clipped to one.
    """
    m = np.asarray(block, dtype=np.complex128)
    if m.ndim != 2:
        raise ValueError("block must be a 2-d matrix")
    left, s, right_h = np.linalg.svd(m)
    if s.size and float(s[0]) > 1.0 + _SIGMA_TOL:
        raise EmbeddabilityError(
            f"largest singular value {float(s[0]):.17g} exceeds 1: block is not embeddable"
        )
    s = np.clip(s, 0.0, 1.0)
    r, c = m.shape
    s_rows = np.zeros(r)
    s_rows[: s.size] = s
    s_cols = np.zeros(c)
    s_cols[: s.size] = s
    upper_right = (left * np.sqrt(1.0 - s_rows**2)) @ left.conj().T
    lower_left = (right_h.conj().T * np.sqrt(1.0 - s_cols**2)) @ right_h
    rebuilt = (left[:, : s.size] * s) @ right_h[: s.size, :]
    u = np.block([[rebuilt, upper_right], [lower_left, -rebuilt.conj().T]])
    defect = np.max(np.abs(u.conj().T @ u - np.eye(r + c)))
    if defect > 1e-10:
        raise EmbeddabilityError(f"unitary completion failed, defect {defect:.3g}")
    return u


def pair_outcome_components(block: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Brute-force six-outcome probabilities for one photon per input.

    Propagates the pair through the unitary completion of ``block`` and
    aggregates everything outside the two monitored outputs as loss.
    Returns ``(indistinguishable, distinguishable)`` six-vectors ordered
    as :data:`OUTCOME_LABELS`; a distribution at overlap ``x`` is their
    convex mix ``x*ind + (1-x)*dist``.

    The indistinguishable amplitudes are permanents of 2x2 sub-blocks,
    ``|perm|^2`` divided by the bunching factorial; the distinguishable
    baseline is classical path counting over the same completion.
    """
    u = unitary_completion(block)
    size = u.shape[0]
    ind = np.zeros(6)
    dist = np.zeros(6)
    for i in range(size):
        for j in range(i, size):
            sub = u[np.ix_((i, j), (0, 1))]
            if i == j:
                p_ind = abs(permanent(sub)) ** 2 / 2.0
                p_dist = abs(sub[0, 0] * sub[1, 1]) ** 2
            else:
                p_ind = abs(permanent(sub)) ** 2
                p_dist = abs(sub[0, 0] * sub[1, 1]) ** 2 + abs(sub[0, 1] * sub[1, 0]) ** 2
            slot = _outcome_slot(i, j)
            ind[slot] += p_ind
            dist[slot] += p_dist
    return ind, dist


def _outcome_slot(i: int, j: int) -> int:
    """Map an output pair of the completion onto the six detection bins."""
    if i == 0 and j == 0:
        return 0
    if i == 1 and j == 1:
        return 1
    if i == 0 and j == 1:
        return 2
    if i == 0:
        return 3
    if i == 1:
        return 4
    return 5


def outcome_distribution(block: np.ndarray, overlap: float) -> OutcomeDistribution:
    """Six-outcome distribution of a 2x2 block at a given overlap."""
    if not 0.0 <= overlap <= 1.0:
        raise ValueError(f"overlap must be in [0, 1], got {overlap}")
    ind, dist = pair_outcome_components(block)
    p = overlap * ind + (1.0 - overlap) * dist
    return OutcomeDistribution(*p)


def two_photon_coincidence(matrix, inputs: tuple[int, int], outputs: tuple[int, int], overlap: float) -> float:
    """Joint detection probability for one photon in each of two inputs.

    Parameters
    ----------
    matrix:
        A :class:`~specklesim.medium.TransmissionMatrix` (or bare complex
        matrix) of any size.
    inputs:
        Distinct input channels ``(k, l)`` carrying one photon each.
    outputs:
        Output channels ``(m, n)``.  For ``m != n`` this is the
        coincidence probability; for ``m == n`` the bunched probability
        of both photons in that single channel.
    overlap:
        Indistinguishability ``x`` in [0, 1].  ``x = 1`` reproduces the
        permanent-squared quantum case, ``x = 0`` the classical baseline.

    Notes
    -----
    With ``A = T[m,k]*T[n,l]`` and ``B = T[m,l]*T[n,k]``::

        m != n:  |A|^2 + |B|^2 + 2 x Re(A conj(B))
        m == n:  (1 + x) |T[m,k]*T[m,l]|^2

    The bunched convention interpolates one classical path (``x = 0``)
    up to the factor-2 boson enhancement (``x = 1``).
    """
    t = matrix.entries if hasattr(matrix, "entries") else np.asarray(matrix, dtype=np.complex128)
    if not 0.0 <= overlap <= 1.0:
        raise ValueError(f"overlap must be in [0, 1], got {overlap}")
    k, l = inputs
    m, n = outputs
    if k == l:
        raise ValueError("input channels must be distinct")
    n_out, n_in = t.shape
    for name, idx, limit in (("k", k, n_in), ("l", l, n_in), ("m", m, n_out), ("n", n, n_out)):
        if not 0 <= idx < limit:
            raise ValueError(f"channel {name} = {idx} out of range [0, {limit})")
    if m == n:
        return float((1.0 + overlap) * abs(t[m, k] * t[m, l]) ** 2)
    a = t[m, k] * t[n, l]
    b = t[m, l] * t[n, k]
    return float(abs(a) ** 2 + abs(b) ** 2 + 2.0 * overlap * (a * np.conj(b)).real)


# ---------------------------------------------------------------------------
# Photon-pair source
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PhotonPairSource:
    """Spectral and emission model of a pulsed down-conversion pair source.

    ``intrinsic_overlap`` is the indistinguishability of the two photons
    at zero delay (residual spectral mismatch keeps it below one);
    ``rms_angular_bandwidth`` sets how fast the overlap decays with
    delay; ``mean_pairs_per_pulse`` is the Poisson mean of the number of
    pairs emitted per pump pulse.
    """

    rms_angular_bandwidth: float
    intrinsic_overlap: float
    mean_pairs_per_pulse: float
    pulse_rate_hz: float = 76e6
    center_wavelength_m: float = 790e-9
    pump_wavelength_m: float = 395e-9

    def __post_init__(self) -> None:
        if self.rms_angular_bandwidth <= 0:
            raise ValueError("rms_angular_bandwidth must be positive")
        if not 0.0 <= self.intrinsic_overlap <= 1.0:
            raise ValueError(f"intrinsic_overlap must be in [0, 1], got {self.intrinsic_overlap}")
        if self.mean_pairs_per_pulse < 0:
            raise ValueError("mean_pairs_per_pulse must be nonnegative")
        if self.pulse_rate_hz <= 0 or self.center_wavelength_m <= 0 or self.pump_wavelength_m <= 0:
            raise ValueError("rates and wavelengths must be positive")


def rms_bandwidth_from_filter_fwhm(fwhm_nm: float, center_wavelength_m: float = 790e-9) -> float:
    """Convert a Gaussian bandpass FWHM in nm to an rms angular bandwidth.

    Conversion chain:
      sigma_lambda = FWHM / (2 sqrt(2 ln 2))   (Gaussian FWHM to rms)
      sigma_nu     = c * sigma_lambda / lambda^2
      sigma_omega  = 2 pi * sigma_nu           (rad/s)
    """
    if fwhm_nm <= 0:
        raise ValueError("fwhm_nm must be positive")
    sigma_lambda = fwhm_nm * 1e-9 / (2.0 * math.sqrt(2.0 * math.log(2.0)))
    sigma_nu = _SPEED_OF_LIGHT * sigma_lambda / center_wavelength_m**2
    return 2.0 * math.pi * sigma_nu


# Named source calibrations used by the reference scenarios.  The overlap
# values are configuration, chosen to reproduce the visibility levels of
# an unfiltered and a 1.5 nm filtered down-conversion source; the
# unfiltered spectral width is a modeling default, only its ratio to the
# filtered width matters downstream.
SOURCE_PRESETS: dict[str, dict[str, float]] = {
    "broadband": {"overlap": 0.64, "filter_fwhm_nm": 4.5, "mean_pairs_per_pulse": 0.01},
    "filtered": {"overlap": 0.86, "filter_fwhm_nm": 1.5, "mean_pairs_per_pulse": 0.01},
    "highpower": {"overlap": 0.64, "filter_fwhm_nm": 4.5, "mean_pairs_per_pulse": 0.5},
}


def source_preset(
    name: str,
    *,
    overlap: float | None = None,
    filter_fwhm_nm: float | None = None,
    mean_pairs_per_pulse: float | None = None,
) -> PhotonPairSource:
    """Build a pair source from a named preset, with optional overrides."""
    if name not in SOURCE_PRESETS:
        known = ", ".join(sorted(SOURCE_PRESETS))
        raise ValueError(f"unknown source preset {name!r}; known presets: {known}")
    preset = SOURCE_PRESETS[name]
    fwhm = preset["filter_fwhm_nm"] if filter_fwhm_nm is None else filter_fwhm_nm
    return PhotonPairSource(
        rms_angular_bandwidth=rms_bandwidth_from_filter_fwhm(fwhm),
        intrinsic_overlap=preset["overlap"] if overlap is None else overlap,
        mean_pairs_per_pulse=(
            preset["mean_pairs_per_pulse"] if mean_pairs_per_pulse is None else mean_pairs_per_pulse
        ),
    )


def overlap_from_delay(source: PhotonPairSource, delay_s):
    """Indistinguishability overlap at a relative delay.

    ``x(tau) = intrinsic_overlap * exp(-(sigma_omega * tau)^2)`` for a
    Gaussian spectral envelope: unity-minus-mismatch at zero delay,
    monotonically decaying to zero.  Accepts scalar or array delays.
    """
    tau = np.asarray(delay_s, dtype=float)
    x = source.intrinsic_overlap * np.exp(-((source.rms_angular_bandwidth * tau) ** 2))
    return float(x) if np.isscalar(delay_s) or tau.ndim == 0 else x


# ---------------------------------------------------------------------------
# Visibility and scans
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VisibilityResult:
    """Normalized dip/peak depth ``(r_indist - r_dist) / r_dist``."""

    v: float
    r_dist: float
    r_indist: float
    std_err: float = 0.0

    def __post_init__(self) -> None:
        if self.r_dist <= 0:
            raise UndefinedVisibilityError("reference (distinguishable) rate must be positive")
        if self.std_err < 0:
            raise ValueError("std_err must be nonnegative")
        expected = (self.r_indist - self.r_dist) / self.r_dist
        if abs(self.v - expected) > 1e-12 * max(1.0, abs(expected)):
            raise ValueError(f"v = {self.v} inconsistent with rates (expected {expected})")


def visibility(r_indist: float, r_dist: float, std_err: float = 0.0) -> VisibilityResult:
    """Visibility from interfering and reference coincidence rates.

    Negative values are dips, positive values peaks; ``r_dist`` must be
    positive or the visibility is undefined.
    """
    if r_dist <= 0:
        raise UndefinedVisibilityError(f"r_dist = {r_dist} must be positive")
    v = (r_indist - r_dist) / r_dist
    return VisibilityResult(v=v, r_dist=float(r_dist), r_indist=float(r_indist), std_err=std_err)


@dataclass(frozen=True, eq=False)
class CoincidenceScan:
    """Coincidence and singles rates versus relative delay."""

    delays: np.ndarray
    coincidence_rate: np.ndarray
    singles_m: np.ndarray
    singles_n: np.ndarray

    def __post_init__(self) -> None:
        for name in ("delays", "coincidence_rate", "singles_m", "singles_n"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        n = self.delays.shape[0]
        if n == 0:
            raise ValueError("scan must contain at least one delay")
        for name in ("coincidence_rate", "singles_m", "singles_n"):
            arr = getattr(self, name)
            if arr.shape != (n,):
                raise ValueError(f"{name} must have the same length as delays")
            if np.any(arr < 0):
                raise ValueError(f"{name} must be nonnegative")


def hom_scan(circuit: "ProgrammedCircuit", source: PhotonPairSource, delays) -> CoincidenceScan:
    """Noiseless Hong-Ou-Mandel delay scan of a programmed circuit.

    At each delay the pair overlap follows :func:`overlap_from_delay`;
    coincidence and singles rates are the corresponding per-pulse outcome
    probabilities scaled by the source's pair emission rate.  At large
    delay the coincidence rate settles on the distinguishable baseline;
    at zero delay the relative modulation is ``intrinsic_overlap *
    cos(alpha)`` for an ideally programmed circuit.
    """
    delays = np.asarray(delays, dtype=float)
    if delays.ndim != 1 or delays.size == 0:
        raise ValueError("delays must be a non-empty 1-d array")
    _require_embeddable(circuit)
    ind, dist = pair_outcome_components(circuit.sub_matrix)
    x = overlap_from_delay(source, delays)[:, None]
    probs = x * ind[None, :] + (1.0 - x) * dist[None, :]
    scale = source.mean_pairs_per_pulse * source.pulse_rate_hz
    click_m = probs[:, [0, 2, 3]].sum(axis=1)
    click_n = probs[:, [1, 2, 4]].sum(axis=1)
    return CoincidenceScan(
        delays=delays,
        coincidence_rate=scale * probs[:, 2],
        singles_m=scale * click_m,
        singles_n=scale * click_n,
    )


def montecarlo_counts(
    circuit: "ProgrammedCircuit",
    source: PhotonPairSource,
    n_pulses: int,
    seed: int,
    *,
    delay_s: float = 0.0,
    detector_efficiency: float = 1.0,
) -> tuple[int, int, int]:
    """Sampled click statistics over a train of pump pulses.

    Per pulse the pair count is Poisson with the source mean; each pair
    propagates through the circuit independently (no spectral correlation
    between pairs), photons leaving through unselected channels are
    absorbed, and the two detectors are non-number-resolving per pulse.
    A coincidence is a pulse in which both detectors click.

    Returns ``(singles_m, singles_n, coincidences)`` as integer counts.
    Deterministic in ``seed`` and independent of how the fixed-size pulse
    chunks would be distributed over workers.
    """
    if int(n_pulses) != n_pulses or n_pulses < 1:
        raise ValueError(f"n_pulses must be a positive integer, got {n_pulses}")
    if not 0.0 < detector_efficiency <= 1.0:
        raise ValueError(f"detector_efficiency must be in (0, 1], got {detector_efficiency}")
    check_seed(seed)
    _require_embeddable(circuit)
    mu = source.mean_pairs_per_pulse
    x = overlap_from_delay(source, delay_s)
    ind, dist = pair_outcome_components(circuit.sub_matrix)
    cum_ind = _cumulative(ind)
    cum_dist = _cumulative(dist)

    singles_m = singles_n = coincidences = 0
    n_pulses = int(n_pulses)
    for chunk_index, start in enumerate(range(0, n_pulses, _MC_CHUNK)):
        size = min(_MC_CHUNK, n_pulses - start)
        rng = rng_for(seed, _STREAM_MONTECARLO, chunk_index)
        pairs = rng.poisson(mu, size)
        photons_m = np.zeros(size, dtype=np.int64)
        photons_n = np.zeros(size, dtype=np.int64)
        for round_idx in range(int(pairs.max()) if size else 0):
            active = pairs > round_idx
            count = int(active.sum())
            if count == 0:
                break
            quantum = rng.random(count) < x
            u = rng.random(count)
            outcome = np.where(
                quantum,
                np.searchsorted(cum_ind, u, side="right"),
                np.searchsorted(cum_dist, u, side="right"),
            )
            photons_m[active] += _PHOTONS_M[outcome]
            photons_n[active] += _PHOTONS_N[outcome]
        if detector_efficiency >= 1.0:
            click_m = photons_m > 0
            click_n = photons_n > 0
        else:
            miss = 1.0 - detector_efficiency
            click_m = rng.random(size) < 1.0 - miss**photons_m
            click_n = rng.random(size) < 1.0 - miss**photons_n
        singles_m += int(click_m.sum())
        singles_n += int(click_n.sum())
        coincidences += int((click_m & click_n).sum())
    return singles_m, singles_n, coincidences


def outcome_csv(distribution: OutcomeDistribution) -> str:
    """Distribution as CSV text, one ``outcome,probability`` row per label."""
    lines = ["outcome,probability"]
    for label, value in zip(OUTCOME_LABELS, distribution.as_array()):
        lines.append(f"{label},{value:.17g}")
    return "\n".join(lines) + "\n"


def _cumulative(probs: np.ndarray) -> np.ndarray:
    cum = np.cumsum(probs / probs.sum())
    cum[-1] = 1.0
    return cum


def _require_embeddable(circuit: "ProgrammedCircuit") -> None:
    if circuit.largest_singular_value > 1.0 + _SIGMA_TOL:
        raise EmbeddabilityError(
            f"circuit largest singular value {circuit.largest_singular_value:.17g} exceeds 1"
        )
