"""Pruned covariance scattering transforms.

A model holds one wavelet operator with its filterbank and dense wavelet
matrices; transforming a signal recursively applies every kernel followed
by an absolute-value nonlinearity, discarding branches whose energy ratio
to their parent does not exceed the pruning threshold. Coefficients are
laid out breadth-first by layer, then lexicographically by scale indices,
so serialized features are comparable across runs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InvalidData, InvalidScaleCount, ShapeError
from .spectral import (
    NORMALIZED,
    OPERATOR_KINDS,
    SampleCovariance,
    wavelet_operator,
)
from .wavelets import (
    Filterbank,
    KernelFamily,
    WaveletMatrixSet,
    build_filterbank,
    default_gamma,
    wavelet_matrices,
)

AGG_IDENTITY = "identity"
AGG_MEAN = "mean"
AGGREGATIONS = (AGG_IDENTITY, AGG_MEAN)

RHO_ABS = "abs"

Path = tuple[int, ...]


@dataclass(frozen=True)
class CstConfig:
    family: KernelFamily
    J: int
    L: int
    tau: float = 0.0
    rho: str = RHO_ABS
    aggregation: str = AGG_IDENTITY
    operator_kind: str = NORMALIZED
    gamma_override: float | None = None

    def __post_init__(self):
        if self.J < 2:
            raise InvalidScaleCount(f"need J >= 2, got {self.J}")
        if self.L < 1:
            raise ConfigError(f"need L >= 1, got {self.L}")
        if not 0.0 <= self.tau < 1.0:
            raise ConfigError(f"pruning threshold must be in [0, 1), got {self.tau}")
        if self.rho != RHO_ABS:
            raise ConfigError(f"unsupported nonlinearity {self.rho!r}")
        if self.aggregation not in AGGREGATIONS:
            raise ConfigError(f"unsupported aggregation {self.aggregation!r}")
        if self.operator_kind not in OPERATOR_KINDS:
            raise ConfigError(f"unknown operator kind {self.operator_kind!r}")
        if self.gamma_override is not None and not self.gamma_override > 0.0:
            raise ConfigError("gamma override must be positive")


@dataclass(frozen=True)
class CstModel:
    """Reusable operator + filterbank + wavelet matrices bundle."""

    config: CstConfig
    gamma: float
    operator: object
    filterbank: Filterbank
    matrices: WaveletMatrixSet

    @property
    def n_features(self) -> int:
        return self.operator.n_features

    @property
    def feature_width(self) -> int:
        return self.n_features if self.config.aggregation == AGG_IDENTITY else 1

    @property
    def aggregation_norm_bound(self) -> float:
        """Operator norm of the per-path aggregation U."""
        if self.config.aggregation == AGG_IDENTITY:
            return 1.0
        return 1.0 / np.sqrt(self.n_features)


@dataclass(frozen=True)
class ScatterTree:
    """Retained scattering signals keyed by path, plus what pruning removed."""

    nodes: dict  # path -> (signal, energy)
    pruned_paths: dict  # path -> energy ratio that removed it


@dataclass(frozen=True)
class FeatureVector:
    coefficients: np.ndarray
    layout: tuple[Path, ...]
    width: int


@dataclass(frozen=True)
class ScatterLayout:
    """Shared retention decision for a batch: retained paths in output order."""

    paths: tuple[Path, ...]
    mean_ratio: dict
    pruned: dict


@dataclass(frozen=True)
class BatchFeatures:
    matrix: np.ndarray  # (n_samples, n_paths * width)
    layout: tuple[Path, ...]
    width: int
    mean_ratio: dict
    pruned: dict


def feature_count(J: int, L: int) -> int:
    """Path count of an unpruned tree with no zero-energy nodes: (J^L - 1)/(J - 1)."""
    if J < 2:
        raise InvalidScaleCount(f"need J >= 2, got {J}")
    if L < 1:
        raise ConfigError(f"need L >= 1, got {L}")
    return (J**L - 1) // (J - 1)


def path_name(path: Path) -> str:
    return "p_root" if not path else "p_" + ".".join(str(j) for j in path)


def cst_fit(cov: SampleCovariance, config: CstConfig) -> CstModel:
    """Build the operator, filterbank and wavelet matrices once for reuse."""
    gamma = (
        config.gamma_override
        if config.gamma_override is not None
        else default_gamma(config.family, config.J)
    )
    operator = wavelet_operator(cov, config.operator_kind, gamma)
    filterbank = build_filterbank(operator, config.family, config.J)
    matrices = wavelet_matrices(filterbank, operator)
    return CstModel(
        config=config,
        gamma=float(gamma),
        operator=operator,
        filterbank=filterbank,
        matrices=matrices,
    )


def _aggregate(model: CstModel, signal: np.ndarray) -> np.ndarray:
    if model.config.aggregation == AGG_IDENTITY:
        return signal
    return np.atleast_1d(signal.mean(axis=0))


def cst_transform(
    model: CstModel,
    x: np.ndarray,
    tau: float | None = None,
    prune: bool = True,
) -> tuple[ScatterTree, FeatureVector]:
    """Scatter one signal.

    A child is retained iff its energy exceeds ``tau`` times its parent's
    (strict inequality), so zero-energy children are always pruned; children
    of a zero-energy node are pruned by the same convention. ``prune=False``
    keeps the full tree regardless of energies, which the perturbation-bound
    checks rely on to compare identically shaped outputs.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != model.n_features:
        raise ShapeError(f"expected a length-{model.n_features} signal, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InvalidData("signal contains non-finite entries")
    if tau is None:
        tau = model.config.tau
    elif not 0.0 <= tau < 1.0:
        raise ConfigError(f"pruning threshold must be in [0, 1), got {tau}")

    mats = model.matrices.matrices
    nodes: dict[Path, tuple[np.ndarray, float]] = {(): (x, float(np.linalg.norm(x)))}
    pruned: dict[Path, float] = {}
    order: list[Path] = [()]
    frontier: list[Path] = [()]
    for _ in range(1, model.config.L):
        next_frontier: list[Path] = []
        for path in frontier:
            signal, parent_norm = nodes[path]
            for j in range(model.config.J):
                child = np.abs(mats[j] @ signal)
                child_norm = float(np.linalg.norm(child))
                ratio = child_norm / parent_norm if parent_norm > 0.0 else 0.0
                child_path = path + (j,)
                if prune and not ratio > tau:
                    pruned[child_path] = ratio
                    continue
                nodes[child_path] = (child, child_norm)
                order.append(child_path)
                next_frontier.append(child_path)
        frontier = next_frontier

    blocks = [_aggregate(model, nodes[path][0]) for path in order]
    features = FeatureVector(
        coefficients=np.concatenate(blocks),
        layout=tuple(order),
        width=model.feature_width,
    )
    return ScatterTree(nodes=nodes, pruned_paths=pruned), features


def decide_layout(
    model: CstModel,
    x: np.ndarray,
    tau: float | None = None,
    prune: bool = True,
) -> ScatterLayout:
    """Shared retention decision for a batch of signals.

    A path is retained iff the mean over the batch of its per-sample
    normalized energy (child norm over parent norm, zero where the parent
    has zero energy) strictly exceeds ``tau``. Every sample then yields an
    identically shaped feature vector, which downstream regression needs.
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.shape[0] != model.n_features:
        raise ShapeError(f"expected {model.n_features} rows, got {x.shape[0]}")
    if tau is None:
        tau = model.config.tau
    elif not 0.0 <= tau < 1.0:
        raise ConfigError(f"pruning threshold must be in [0, 1), got {tau}")

    mats = model.matrices.matrices
    paths: list[Path] = [()]
    mean_ratio: dict[Path, float] = {(): 1.0}
    pruned: dict[Path, float] = {}
    frontier: list[tuple[Path, np.ndarray, np.ndarray]] = [
        ((), x, np.linalg.norm(x, axis=0))
    ]
    for _ in range(1, model.config.L):
        next_frontier = []
        for path, signals, parent_norms in frontier:
            safe_parent = np.where(parent_norms > 0.0, parent_norms, 1.0)
            for j in range(model.config.J):
                children = np.abs(mats[j] @ signals)
                child_norms = np.linalg.norm(children, axis=0)
                ratios = np.where(parent_norms > 0.0, child_norms / safe_parent, 0.0)
                ratio = float(ratios.mean())
                child_path = path + (j,)
                if prune and not ratio > tau:
                    pruned[child_path] = ratio
                    continue
                paths.append(child_path)
                mean_ratio[child_path] = ratio
                next_frontier.append((child_path, children, child_norms))
        frontier = next_frontier
    return ScatterLayout(paths=tuple(paths), mean_ratio=mean_ratio, pruned=pruned)


def transform_with_layout(model: CstModel, x: np.ndarray, layout: ScatterLayout) -> np.ndarray:
    """Scatter a batch along a fixed retained-path layout; returns (n_samples, D)."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.shape[0] != model.n_features:
        raise ShapeError(f"expected {model.n_features} rows, got {x.shape[0]}")
    mats = model.matrices.matrices
    by_layer: dict[int, list[Path]] = {}
    for path in layout.paths:
        by_layer.setdefault(len(path), []).append(path)

    def agg(block):
        if model.config.aggregation == AGG_IDENTITY:
            return block.T
        return block.mean(axis=0)[:, None]

    blocks = {(): agg(x)}
    level = {(): x}
    for layer in range(1, max(by_layer) + 1):
        next_level = {}
        for path in by_layer.get(layer, []):
            signals = np.abs(mats[path[-1]] @ level[path[:-1]])
            next_level[path] = signals
            blocks[path] = agg(signals)
        level = next_level
    return np.concatenate([blocks[path] for path in layout.paths], axis=1)


def cst_transform_batch(
    model: CstModel,
    data,
    tau: float | None = None,
    prune: bool = True,
) -> BatchFeatures:
    """Batch transform with the shared pruning decision of :func:`decide_layout`."""
    x = data.values if hasattr(data, "values") else np.asarray(data, dtype=np.float64)
    layout = decide_layout(model, x, tau=tau, prune=prune)
    matrix = transform_with_layout(model, x, layout)
    return BatchFeatures(
        matrix=matrix,
        layout=layout.paths,
        width=model.feature_width,
        mean_ratio=layout.mean_ratio,
        pruned=layout.pruned,
    )
