"""Covariance wavelet filterbanks and scattering transforms.

Untrained hierarchical feature extractors built on the spectrum of a sample
covariance matrix, with PCA/ridge baselines, synthetic data generation,
stability-bound evaluators and a reproducible experiment harness.
"""

from .bounds import (
    BoundConstants,
    cst_stability_bound,
    estimate_kmax,
    measured_wavelet_delta,
    pca_gap_scale,
    pruning_preserved,
    signal_stability_bound,
    wavelet_delta,
)
from .readout import PcaModel, RidgeModel, mae, mse, pca_fit, pca_fit_transform, pca_transform, ridge_fit
from .scattering import (
    CstConfig,
    CstModel,
    FeatureVector,
    ScatterTree,
    cst_fit,
    cst_transform,
    cst_transform_batch,
    feature_count,
)
from .spectral import (
    JACOBI_BACKEND,
    DataMatrix,
    SampleCovariance,
    SpectralDecomposition,
    WaveletOperator,
    eig_sym,
    sample_covariance,
    wavelet_operator,
)
from .synthdata import SynthDataset, SynthSpec, synth_generate
from .wavelets import (
    Diffusion,
    Filterbank,
    Hann,
    Monic,
    WaveletMatrixSet,
    build_filterbank,
    diffusion_apply,
    diffusion_gamma,
    kernel_eval,
    localization_profile,
    wavelet_matrices,
)

__version__ = "0.1.0"

__all__ = [
    "BoundConstants",
    "CstConfig",
    "CstModel",
    "DataMatrix",
    "Diffusion",
    "FeatureVector",
    "Filterbank",
    "Hann",
    "JACOBI_BACKEND",
    "Monic",
    "PcaModel",
    "RidgeModel",
    "SampleCovariance",
    "ScatterTree",
    "SpectralDecomposition",
    "SynthDataset",
    "SynthSpec",
    "WaveletMatrixSet",
    "WaveletOperator",
    "build_filterbank",
    "cst_fit",
    "cst_stability_bound",
    "cst_transform",
    "cst_transform_batch",
    "diffusion_apply",
    "diffusion_gamma",
    "eig_sym",
    "estimate_kmax",
    "feature_count",
    "kernel_eval",
    "localization_profile",
    "mae",
    "measured_wavelet_delta",
    "mse",
    "pca_fit",
    "pca_fit_transform",
    "pca_gap_scale",
    "pca_transform",
    "pruning_preserved",
    "ridge_fit",
    "sample_covariance",
    "signal_stability_bound",
    "synth_generate",
    "wavelet_delta",
    "wavelet_matrices",
    "wavelet_operator",
]
