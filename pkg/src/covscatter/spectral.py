"""Sample covariance estimation, symmetric eigendecomposition and wavelet operators.

The eigensolver is a cyclic Jacobi iteration (compiled kernel when
available, NumPy fallback otherwise) with a deterministic ordering and sign
convention so that every downstream transform is reproducible bit-for-bit.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigError,
    DegenerateCovariance,
    InsufficientSamples,
    InvalidData,
    NoConvergence,
    NotSymmetric,
    ShapeError,
)

if os.environ.get("COVSCATTER_DISABLE_EXTENSION"):
    from . import _jacobi_py as _jacobi
else:
    try:
        from . import _jacobi_cy as _jacobi
    except ImportError:  # pragma: no cover - depends on the build environment
        from . import _jacobi_py as _jacobi

JACOBI_BACKEND = _jacobi.BACKEND

# off-diagonal Frobenius tolerance relative to the input norm, and sweep cap
JACOBI_TOL_SCALE = 1e-12
JACOBI_MAX_SWEEPS = 100

NORMALIZED = "normalized"
INVERTED = "inverted"
OPERATOR_KINDS = (NORMALIZED, INVERTED)


def _readonly(arr):
    # canonical C layout so BLAS paths (and thus output bits) are reproducible
    out = np.array(arr, dtype=np.float64, copy=True, order="C")
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class DataMatrix:
    """N x T data: rows are features, columns are observations."""

    values: np.ndarray
    feature_names: list[str] | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise InvalidData(f"expected a 2-D data matrix, got shape {values.shape}")
        n, t = values.shape
        if n < 2:
            raise InvalidData(f"need at least 2 features, got {n}")
        if t < 2:
            raise InsufficientSamples(f"need at least 2 observations, got {t}")
        if not np.all(np.isfinite(values)):
            raise InvalidData("data matrix contains non-finite entries")
        if self.feature_names is not None and len(self.feature_names) != n:
            raise InvalidData(
                f"{len(self.feature_names)} feature names for {n} features"
            )
        object.__setattr__(self, "values", _readonly(values))

    @property
    def n_features(self) -> int:
        return self.values.shape[0]

    @property
    def n_samples(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class SampleCovariance:
    """Covariance estimate with the sample mean and count that produced it."""

    matrix: np.ndarray
    mean: np.ndarray
    sample_count: int

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ShapeError(f"covariance must be square, got shape {m.shape}")
        scale = max(1.0, float(np.linalg.norm(m)))
        if float(np.linalg.norm(m - m.T)) > 1e-12 * scale:
            raise NotSymmetric("covariance matrix is not symmetric")
        mean = np.asarray(self.mean, dtype=np.float64)
        if mean.shape != (m.shape[0],):
            raise ShapeError("mean length does not match covariance size")
        if self.sample_count < 1:
            raise InsufficientSamples("sample_count must be positive")
        object.__setattr__(self, "matrix", _readonly(m))
        object.__setattr__(self, "mean", _readonly(mean))

    @property
    def n_features(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class SpectralDecomposition:
    """Orthogonal eigenvectors (columns) and eigenvalues sorted descending."""

    eigenvectors: np.ndarray
    eigenvalues: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "eigenvectors", _readonly(self.eigenvectors))
        object.__setattr__(self, "eigenvalues", _readonly(self.eigenvalues))


@dataclass(frozen=True)
class WaveletOperator:
    """Rescaled covariance matrix the wavelet kernels act on.

    ``normalized`` maps the covariance spectrum onto [0, gamma] keeping the
    eigenvalue order; ``inverted`` reverses it, which favours kernels that
    discriminate at the low end of the spectrum.
    """

    kind: str
    gamma: float
    matrix: np.ndarray
    decomposition: SpectralDecomposition

    @property
    def n_features(self) -> int:
        return self.matrix.shape[0]


def sample_covariance(data: DataMatrix | np.ndarray) -> SampleCovariance:
    """Mean-removed covariance with 1/T normalization.

    The accumulated matrix is symmetrized by averaging with its transpose so
    the result is exactly symmetric.
    """
    if not isinstance(data, DataMatrix):
        data = DataMatrix(np.asarray(data))
    x = data.values
    t = data.n_samples
    mean = x.mean(axis=1)
    centered = x - mean[:, None]
    cov = (centered @ centered.T) / t
    cov = (cov + cov.T) / 2.0
    return SampleCovariance(matrix=cov, mean=mean, sample_count=t)


def eig_sym(matrix: np.ndarray) -> SpectralDecomposition:
    """Eigendecomposition of a symmetric matrix via cyclic Jacobi rotations.

    Eigenvalues are returned in descending order (stable sort, so repeated
    eigenvalues keep the rotation order) and each eigenvector is scaled so
    its largest-magnitude entry is positive, first such entry winning ties.
    """
    a = np.asarray(matrix, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {a.shape}")
    fro = float(np.linalg.norm(a))
    if float(np.linalg.norm(a - a.T)) > 1e-10 * max(1.0, fro):
        raise NotSymmetric("matrix is not symmetric to 1e-10 relative")
    work = np.ascontiguousarray((a + a.T) / 2.0)
    vectors = np.ascontiguousarray(np.eye(a.shape[0]))
    tol = JACOBI_TOL_SCALE * fro
    sweeps = _jacobi.jacobi_cycle(work, vectors, tol, JACOBI_MAX_SWEEPS)
    if sweeps < 0:
        raise NoConvergence(
            f"Jacobi iteration did not converge in {JACOBI_MAX_SWEEPS} sweeps"
        )
    values = np.diagonal(work).copy()
    order = np.argsort(-values, kind="stable")
    values = values[order]
    vectors = vectors[:, order]
    lead = np.argmax(np.abs(vectors), axis=0)
    signs = np.where(vectors[lead, np.arange(vectors.shape[1])] < 0.0, -1.0, 1.0)
    vectors = vectors * signs
    return SpectralDecomposition(eigenvectors=vectors, eigenvalues=values)


def wavelet_operator(
    cov: SampleCovariance,
    kind: str,
    gamma: float,
    decomposition: SpectralDecomposition | None = None,
) -> WaveletOperator:
    """Build the normalized or inverted operator from a covariance estimate.

    The operator decomposition is derived from the covariance decomposition
    (computed here if not supplied); there is no second eigensolve. Operator
    eigenvalues are clipped into [0, gamma] to absorb roundoff from nearly
    singular covariances.
    """
    if kind not in OPERATOR_KINDS:
        raise ConfigError(f"unknown operator kind {kind!r}")
    if not gamma > 0.0:
        raise ConfigError("gamma must be positive")
    dec = decomposition if decomposition is not None else eig_sym(cov.matrix)
    w1 = float(dec.eigenvalues[0])
    if w1 <= 0.0:
        raise DegenerateCovariance("largest covariance eigenvalue is not positive")
    if kind == NORMALIZED:
        matrix = gamma * cov.matrix / w1
        values = gamma * dec.eigenvalues / w1
        vectors = dec.eigenvectors
    else:
        matrix = gamma * (np.eye(cov.n_features) - cov.matrix / w1)
        values = (gamma * (1.0 - dec.eigenvalues / w1))[::-1]
        vectors = dec.eigenvectors[:, ::-1]
    matrix = (matrix + matrix.T) / 2.0
    values = np.clip(values, 0.0, gamma)
    return WaveletOperator(
        kind=kind,
        gamma=float(gamma),
        matrix=_readonly(matrix),
        decomposition=SpectralDecomposition(vectors.copy(), values),
    )
