"""Random transmission matrices of a multiple-scattering medium.

A thick scattering layer couples every input channel to every output
channel.  At the level of monochromatic fields that coupling is a single
complex matrix ``T``: output field amplitudes are ``T @ input``.  Two
ensembles are provided:

- ``gaussian_transmission_matrix`` draws i.i.d. circular complex Gaussian
  entries, the maximal-entropy model of a deeply multiple-scattering
  medium.  Entry variance is ``1/n_in`` so every row has unit expected
  power throughput and speckle statistics are dimension-free.
- ``haar_unitary`` draws a lossless medium from the uniform (rotation
  invariant) measure, the ground truth for checks that need exact photon
  number conservation.

All generation is deterministic in ``(kind, dims, seed)``; see
:mod:`specklesim.rng` for the stream derivation rule.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .rng import check_seed, rng_for

__all__ = [
    "MatrixKind",
    "TransmissionMatrix",
    "gaussian_transmission_matrix",
    "haar_unitary",
    "transmit",
    "save_matrix",
    "load_matrix",
]

_UNITARITY_TOL = 1e-10

# Stream tags keeping the two ensembles on disjoint substreams of one seed.
_STREAM_GAUSSIAN = 0
_STREAM_UNITARY = 1


class MatrixKind(enum.Enum):
    GAUSSIAN = "gaussian"
    UNITARY = "unitary"


@dataclass(frozen=True, eq=False)
class TransmissionMatrix:
    """Complex channel-coupling matrix of a scattering medium.

    ``entries[i, j]`` is the field-transmission coefficient from input
    channel ``j`` to output channel ``i``.  Instances are immutable and
    safe to share across workers.
    """

    entries: np.ndarray
    kind: MatrixKind
    seed: int

    def __post_init__(self) -> None:
        entries = np.asarray(self.entries, dtype=np.complex128)
        object.__setattr__(self, "entries", entries)
        if entries.ndim != 2 or entries.shape[0] < 1 or entries.shape[1] < 1:
            raise ValueError(f"entries must be a 2-d matrix with positive dims, got shape {entries.shape}")
        if not np.all(np.isfinite(entries.view(np.float64))):
            raise ValueError("entries must all be finite")
        check_seed(self.seed)
        if self.kind is MatrixKind.UNITARY:
            n_out, n_in = entries.shape
            if n_out != n_in:
                raise ValueError("unitary ensemble requires a square matrix")
            gram = entries.conj().T @ entries
            if np.max(np.abs(gram - np.eye(n_in))) > _UNITARITY_TOL:
                raise ValueError(f"matrix is not unitary within {_UNITARITY_TOL}")

    @property
    def n_out(self) -> int:
        return self.entries.shape[0]

    @property
    def n_in(self) -> int:
        return self.entries.shape[1]


def gaussian_transmission_matrix(n_out: int, n_in: int, seed: int) -> TransmissionMatrix:
    """Draw a maximal-entropy (i.i.d. complex Gaussian) transmission matrix.

    Parameters
    ----------
    n_out, n_in:
        Positive channel counts (rows, columns).
    seed:
        64-bit unsigned seed; the same ``(dims, seed)`` regenerates
        bit-identical entries.

    Notes
    -----
    Each entry is circular complex Gaussian with mean 0 and total
    variance ``1/n_in``, i.e. real and imaginary parts are independent
    normal with variance ``1/(2 n_in)``.  Rows then have expected squared
    norm 1, so a lossless-on-average medium of any width produces O(1)
    programmed-circuit amplitudes.
    """
    _check_dims(n_out, n_in)
    rng = rng_for(check_seed(seed), _STREAM_GAUSSIAN)
    z = rng.standard_normal((n_out, n_in, 2))
    entries = (z[..., 0] + 1j * z[..., 1]) * np.sqrt(0.5 / n_in)
    return TransmissionMatrix(entries=entries, kind=MatrixKind.GAUSSIAN, seed=seed)


def haar_unitary(n: int, seed: int) -> TransmissionMatrix:
    """Draw an ``n x n`` unitary from the uniform (Haar) measure.

    QR-orthonormalizes a complex Ginibre matrix and then rephases each
    column by the phase of the corresponding diagonal entry of the
    triangular factor.  The rephasing is mandatory: without it the raw QR
    output is biased and entry statistics drift away from the uniform
    measure.
    """
    _check_dims(n, n)
    rng = rng_for(check_seed(seed), _STREAM_UNITARY)
    z = rng.standard_normal((n, n, 2))
    ginibre = (z[..., 0] + 1j * z[..., 1]) * np.sqrt(0.5)
    q, r = np.linalg.qr(ginibre)
    diag = np.diagonal(r)
    # diag entries vanish only on a measure-zero set; guard anyway
    mag = np.abs(diag)
    phase = np.where(mag > 0, diag / np.where(mag > 0, mag, 1.0), 1.0)
    entries = q * phase
    return TransmissionMatrix(entries=entries, kind=MatrixKind.UNITARY, seed=seed)


def transmit(matrix: TransmissionMatrix, field: np.ndarray) -> np.ndarray:
    """Propagate an input field vector through the medium.

    ``field`` must have length ``matrix.n_in`` and finite entries; the
    result is the output field vector of length ``matrix.n_out``.
    """
    field = np.asarray(field, dtype=np.complex128)
    if field.ndim != 1 or field.shape[0] != matrix.n_in:
        raise ValueError(f"input field has length {field.shape}, expected ({matrix.n_in},)")
    if not np.all(np.isfinite(field.view(np.float64))):
        raise ValueError("input field must be finite")
    return matrix.entries @ field


def _check_dims(n_out: int, n_in: int) -> None:
    for name, value in (("n_out", n_out), ("n_in", n_in)):
        if int(value) != value or value < 1:
            raise ValueError(f"{name} must be a positive integer, got {value!r}")
        if value > 2**32 - 1:
            raise ValueError(f"{name} too large: {value}")


# ---------------------------------------------------------------------------
# Binary container
#
# Layout (all little-endian):
#   bytes  0..7   magic  b"SPKLTMAT"
#   bytes  8..11  format version (u32, currently 1)
#   bytes 12..15  reserved (u32, zero)
#   bytes 16..31  n_out (u64), n_in (u64)
#   bytes 32..39  kind tag (u32: 0 gaussian, 1 unitary), reserved (u32)
#   bytes 40..47  seed (u64)
#   payload       n_out*n_in complex values, row-major, interleaved
#                 (real, imaginary) float64
# ---------------------------------------------------------------------------

_MAGIC = b"SPKLTMAT"
_VERSION = 1
_KIND_CODES = {MatrixKind.GAUSSIAN: 0, MatrixKind.UNITARY: 1}
_CODE_KINDS = {code: kind for kind, code in _KIND_CODES.items()}


def save_matrix(matrix: TransmissionMatrix, path: str | Path) -> None:
    """Write a matrix to the binary container; round-trips bit-exactly."""
    header = struct.pack("<8sII", _MAGIC, _VERSION, 0)
    dims = struct.pack("<QQ", matrix.n_out, matrix.n_in)
    meta = struct.pack("<IIQ", _KIND_CODES[matrix.kind], 0, matrix.seed)
    payload = np.ascontiguousarray(matrix.entries, dtype="<c16").tobytes()
    Path(path).write_bytes(header + dims + meta + payload)


def load_matrix(path: str | Path) -> TransmissionMatrix:
    """Read a matrix previously written by :func:`save_matrix`."""
    blob = Path(path).read_bytes()
    if len(blob) < 48:
        raise ValueError(f"{path}: truncated container")
    magic, version, _ = struct.unpack_from("<8sII", blob, 0)
    if magic != _MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    if version != _VERSION:
        raise ValueError(f"{path}: unsupported container version {version}")
    n_out, n_in = struct.unpack_from("<QQ", blob, 16)
    kind_code, _, seed = struct.unpack_from("<IIQ", blob, 32)
    if kind_code not in _CODE_KINDS:
        raise ValueError(f"{path}: unknown kind tag {kind_code}")
    expected = 48 + 16 * n_out * n_in
    if len(blob) != expected:
        raise ValueError(f"{path}: payload size {len(blob) - 48} does not match dims {n_out}x{n_in}")
    entries = np.frombuffer(blob, dtype="<c16", offset=48).reshape(n_out, n_in).copy()
    return TransmissionMatrix(entries=entries, kind=_CODE_KINDS[kind_code], seed=seed)
