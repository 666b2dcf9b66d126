"""Covariance wavelet kernel families, filterbanks and wavelet matrices.

Three families are provided, all acting on the eigenvalues of a wavelet
operator with spectrum in [0, gamma]:

* diffusion: ``h_0(x) = 1 - x`` and ``h_j(x) = x^(2^(j-1)) - x^(2^j)``,
  cheap to apply without an eigendecomposition via repeated operator
  products;
* Hann: translated raised-cosine windows truncated to their support, with
  an optional logarithmic warping of the spectrum, plus a reflected
  half-window at the origin so the filterbank covers ``x = 0``;
* monic: the piecewise power/cubic/power kernel evaluated on scaled
  eigenvalues, scales log-spaced from the spectrum quartiles.

Every filterbank exposes exactly ``J`` kernels with scale indices
``0 .. J-1`` so the scattering branching factor is ``J`` for all families.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import (
    ConfigError,
    DegenerateSpectrum,
    DomainError,
    InvalidScaleCount,
    NumericalError,
    ShapeError,
)
from .spectral import WaveletOperator

DEFAULT_HANN_GAMMA = 10.0
DEFAULT_MONIC_GAMMA = 1.0

# relative slack accepted at the edges of the kernel domain [0, gamma]
_DOMAIN_SLACK = 1e-12


@dataclass(frozen=True)
class Diffusion:
    """Dyadic diffusion wavelets; no extra parameters."""


@dataclass(frozen=True)
class Hann:
    R: float = 3.0
    warp: bool = True

    def __post_init__(self):
        if not self.R > 0.0:
            raise ConfigError("Hann overlap R must be positive")


@dataclass(frozen=True)
class Monic:
    alpha: float = 2.0
    beta: float = 2.0
    K: float = 20.0

    def __post_init__(self):
        if self.alpha < 1.0 or self.beta < 1.0:
            raise ConfigError("monic exponents alpha, beta must be >= 1")
        if not self.K > 0.0:
            raise ConfigError("monic resolution K must be positive")


KernelFamily = Union[Diffusion, Hann, Monic]

FAMILY_NAMES = {"diffusion": Diffusion, "hann": Hann, "monic": Monic}


def family_name(family: KernelFamily) -> str:
    return type(family).__name__.lower()


def diffusion_gamma(J: int) -> float:
    """Spectrum rescaling that puts the largest-scale diffusion peak at the top eigenvalue."""
    if J < 2:
        raise InvalidScaleCount(f"diffusion filterbank needs J >= 2, got {J}")
    return 0.5 ** (1.0 / 2 ** (J - 2))


def default_gamma(family: KernelFamily, J: int) -> float:
    if isinstance(family, Diffusion):
        return diffusion_gamma(J)
    if isinstance(family, Hann):
        return DEFAULT_HANN_GAMMA
    return DEFAULT_MONIC_GAMMA


@dataclass(frozen=True)
class Filterbank:
    """J kernels of one family with frame bounds and Lipschitz constants attached.

    ``frame_lower``/``frame_upper`` bound the total filterbank response on
    the spectrum the bank was built from; ``lipschitz[j]`` bounds the
    variation of kernel ``j`` over the whole domain [0, gamma].
    """

    family: KernelFamily
    J: int
    gamma: float
    scales: dict = field(repr=False)
    frame_lower: float
    frame_upper: float
    lipschitz: np.ndarray
    n_eigenvalues: int

    def kernel_values(self, lams: np.ndarray) -> np.ndarray:
        """Evaluate all J kernels on an array of eigenvalues; returns (J, len)."""
        lams = np.atleast_1d(np.asarray(lams, dtype=np.float64))
        return np.stack(
            [_evaluate(self.family, self.J, self.gamma, self.scales, j, lams) for j in range(self.J)]
        )

    def provenance(self) -> dict:
        """Flat key-value description for experiment logs."""
        out = {
            "family": family_name(self.family),
            "J": self.J,
            "gamma": self.gamma,
            "frame_lower": self.frame_lower,
            "frame_upper": self.frame_upper,
            "lipschitz": ",".join(repr(float(p)) for p in self.lipschitz),
        }
        if isinstance(self.family, Hann):
            out["hann.R"] = self.family.R
            out["hann.warp"] = self.family.warp
            out["hann.translations"] = ",".join(repr(float(t)) for t in self.scales["translations"])
        elif isinstance(self.family, Monic):
            out["monic.alpha"] = self.family.alpha
            out["monic.beta"] = self.family.beta
            out["monic.K"] = self.family.K
            out["monic.lambda_bar1"] = self.scales["lambda_bar1"]
            out["monic.lambda_bar2"] = self.scales["lambda_bar2"]
            out["monic.scales"] = ",".join(repr(float(t)) for t in self.scales["t"])
        return out


@dataclass(frozen=True)
class WaveletMatrixSet:
    """Dense wavelet matrices H_j = V diag(h_j(lambda)) V^T for one operator."""

    matrices: np.ndarray  # (J, N, N)
    operator: WaveletOperator
    filterbank: Filterbank


@dataclass(frozen=True)
class LocalizationProfile:
    """Wavelet column centered on one feature plus its covariance-distance bound."""

    center: int
    scale: int
    values: np.ndarray
    bound: np.ndarray | None
    distances: dict | None


# ---------------------------------------------------------------------------
# kernel evaluation


def _pow2k(x, k):
    # x^(2^k) by repeated squaring; exact for k = 0
    out = np.array(x, dtype=np.float64, copy=True)
    for _ in range(k):
        out = out * out
    return out


def _diffusion_values(j, lams):
    if j == 0:
        return 1.0 - lams
    a = _pow2k(lams, j - 1)
    return a - a * a


def _warp(lams, gamma, scales):
    # log map anchored to the spectrum the bank was built from, affinely
    # rescaled onto [0, gamma]; values outside the anchor range are clamped
    lo, hi = scales["warp_lo"], scales["warp_hi"]
    u = gamma * (np.log(lams + scales["warp_eps"]) - lo) / (hi - lo)
    return np.clip(u, 0.0, gamma)


def _hann_values(family, J, gamma, scales, j, lams):
    u = _warp(lams, gamma, scales) if family.warp else lams
    translations = scales["translations"]
    if j == 0:
        t1 = translations[0]
        vals = 0.5 + 0.5 * np.cos(np.pi * u / t1)
        return np.where(u <= t1, vals, 0.0)
    t = translations[j - 1]
    width = family.R * gamma / (J + 1 - family.R)
    theta = 2.0 * np.pi * (J + 1 - family.R) / (family.R * gamma) * (u - t) + np.pi
    vals = 0.5 + 0.5 * np.cos(theta)
    return np.where((u > t - width) & (u < t), vals, 0.0)


def _monic_base(u, l1, l2, alpha, beta, coeffs):
    u = np.asarray(u, dtype=np.float64)
    out = np.empty_like(u)
    rise = u < l1
    decay = u > l2
    mid = ~(rise | decay)
    out[rise] = (u[rise] / l1) ** alpha
    out[mid] = np.polyval(coeffs, u[mid])
    out[decay] = (l2 / u[decay]) ** beta
    return out


def _monic_values(scales, family, j, lams):
    t = scales["t"][j]
    return _monic_base(
        t * lams,
        scales["lambda_bar1"],
        scales["lambda_bar2"],
        family.alpha,
        family.beta,
        scales["cubic"],
    )


def _evaluate(family, J, gamma, scales, j, lams):
    if isinstance(family, Diffusion):
        return _diffusion_values(j, lams)
    if isinstance(family, Hann):
        return _hann_values(family, J, gamma, scales, j, lams)
    return _monic_values(scales, family, j, lams)


def kernel_eval(filterbank: Filterbank, j: int, lam) -> np.ndarray | float:
    """Evaluate kernel ``j`` of a built filterbank at eigenvalue(s) ``lam``.

    ``lam`` must lie in the kernel domain: [0, 1] for diffusion (the
    rescaling keeps the spectrum inside it), [0, gamma] otherwise.
    """
    if not 0 <= j < filterbank.J:
        raise IndexError(f"scale index {j} outside 0..{filterbank.J - 1}")
    arr = np.atleast_1d(np.asarray(lam, dtype=np.float64))
    top = 1.0 if isinstance(filterbank.family, Diffusion) else filterbank.gamma
    slack = _DOMAIN_SLACK * max(1.0, top)
    if np.any(arr < -slack) or np.any(arr > top + slack):
        raise DomainError(f"eigenvalue outside [0, {top}]")
    vals = _evaluate(filterbank.family, filterbank.J, filterbank.gamma, filterbank.scales, j, arr)
    return float(vals[0]) if np.isscalar(lam) or np.asarray(lam).ndim == 0 else vals


# ---------------------------------------------------------------------------
# filterbank construction


def _monic_cubic_coeffs(l1, l2, alpha, beta):
    # s(l1) = s(l2) = 1, s'(l1) = alpha/l1, s'(l2) = -beta/l2
    system = np.array(
        [
            [l1**3, l1**2, l1, 1.0],
            [l2**3, l2**2, l2, 1.0],
            [3.0 * l1**2, 2.0 * l1, 1.0, 0.0],
            [3.0 * l2**2, 2.0 * l2, 1.0, 0.0],
        ]
    )
    rhs = np.array([1.0, 1.0, alpha / l1, -beta / l2])
    return np.linalg.solve(system, rhs)


def _monic_scales(family, J, gamma, spectrum):
    n = spectrum.shape[0]
    ascending = np.sort(spectrum)
    i1 = max(n // 4, 1)
    i2 = min(-(-3 * n // 4), n)  # ceil(3N/4), clamped
    l1 = float(ascending[i1 - 1])
    l2 = float(ascending[i2 - 1])
    if l1 <= 0.0:
        raise DegenerateSpectrum("monic quartile lambda_bar1 is not positive")
    if l2 - l1 <= _DOMAIN_SLACK * max(1.0, gamma):
        raise DegenerateSpectrum("monic spectrum quartiles coincide")
    exponents = (J - np.arange(1, J + 1)) / (J - 1)
    t = (l2 / gamma) * family.K**exponents
    return {
        "t": t,
        "lambda_bar1": l1,
        "lambda_bar2": l2,
        "cubic": _monic_cubic_coeffs(l1, l2, family.alpha, family.beta),
    }


def _quad_abs_max(coeffs, lo, hi):
    # max |3*c3*u^2 + 2*c2*u + c1| over [lo, hi]
    c3, c2, c1, _ = coeffs
    candidates = [lo, hi]
    if c3 != 0.0:
        vertex = -c2 / (3.0 * c3)
        if lo < vertex < hi:
            candidates.append(vertex)
    return max(abs(3.0 * c3 * u * u + 2.0 * c2 * u + c1) for u in candidates)


def _monic_lipschitz(family, gamma, scales):
    l1 = scales["lambda_bar1"]
    l2 = scales["lambda_bar2"]
    alpha, beta = family.alpha, family.beta
    out = []
    for t in scales["t"]:
        u_max = t * gamma
        sup = 0.0
        u_end = min(l1, u_max)
        if u_end > 0.0:
            sup = max(sup, t * alpha * u_end ** (alpha - 1.0) / l1**alpha)
        if u_max > l1:
            sup = max(sup, t * _quad_abs_max(scales["cubic"], l1, min(l2, u_max)))
        if u_max > l2:
            sup = max(sup, t * beta / l2)
        out.append(sup)
    return np.array(out)


def _hann_warp_scales(gamma, spectrum):
    """Warp anchors from the spectrum; degenerate spectra fall back to [0, gamma]."""
    eps = 1e-6 * gamma
    lo = float(np.log(spectrum.min() + eps))
    hi = float(np.log(spectrum.max() + eps))
    if hi - lo < 1e-12:
        lo = float(np.log(eps))
        hi = float(np.log(gamma + eps))
    return {"warp_eps": eps, "warp_lo": lo, "warp_hi": hi}


def _hann_warp_derivative_sup(gamma, scales):
    # the log map is steepest at the low anchor of the warp
    lam_lo = np.exp(scales["warp_lo"]) - scales["warp_eps"]
    return gamma / ((lam_lo + scales["warp_eps"]) * (scales["warp_hi"] - scales["warp_lo"]))


def build_filterbank(operator: WaveletOperator, family: KernelFamily, J: int) -> Filterbank:
    """Build the J-kernel filterbank for one operator.

    Frame bounds follow the family: diffusion uses the analytic pair
    ``B = 1``, ``A = 1 - gamma``; the other families take the min/max of the
    summed squared kernel response over the actual operator spectrum. A
    spectrum with eigenvalues outside every kernel support yields a frame
    lower bound near zero, which is reported rather than rejected.
    """
    if J < 2:
        raise InvalidScaleCount(f"filterbank needs J >= 2, got {J}")
    gamma = operator.gamma
    spectrum = operator.decomposition.eigenvalues

    if isinstance(family, Diffusion):
        if gamma > 1.0 + _DOMAIN_SLACK:
            raise ConfigError("diffusion kernels require gamma <= 1")
        scales: dict = {}
        lipschitz = np.array([1.0] + [2.0 ** (j - 1) for j in range(1, J)])
        lower, upper = 1.0 - gamma, 1.0
    elif isinstance(family, Hann):
        if not family.R < J + 1:
            raise ConfigError(f"Hann requires R < J + 1, got R={family.R}, J={J}")
        translations = np.arange(1, J) * gamma / (J + 1 - family.R)
        scales = {"translations": translations}
        scales.update(_hann_warp_scales(gamma, spectrum))
        p_translate = np.pi * (J + 1 - family.R) / (family.R * gamma)
        p_dc = np.pi / (2.0 * translations[0])
        lipschitz = np.array([p_dc] + [p_translate] * (J - 1))
        if family.warp:
            # kernels act on warped eigenvalues; chain the warp slope
            lipschitz = lipschitz * _hann_warp_derivative_sup(gamma, scales)
        lower, upper = None, None
    elif isinstance(family, Monic):
        if not np.any(spectrum > 0.0):
            raise DegenerateSpectrum("operator spectrum is all zeros")
        scales = _monic_scales(family, J, gamma, spectrum)
        lipschitz = _monic_lipschitz(family, gamma, scales)
        lower, upper = None, None
    else:
        raise ConfigError(f"unknown kernel family {family!r}")

    if lower is None:
        response = np.stack(
            [_evaluate(family, J, gamma, scales, j, spectrum) for j in range(J)]
        )
        g = np.sum(response * response, axis=0)
        lower = float(np.sqrt(max(float(g.min()), 0.0)))
        upper = float(np.sqrt(float(g.max())))

    return Filterbank(
        family=family,
        J=J,
        gamma=gamma,
        scales=scales,
        frame_lower=float(lower),
        frame_upper=float(upper),
        lipschitz=lipschitz,
        n_eigenvalues=spectrum.shape[0],
    )


def wavelet_matrices(filterbank: Filterbank, operator: WaveletOperator) -> WaveletMatrixSet:
    """Materialize H_j = V diag(h_j(lambda_i)) V^T for every scale."""
    if operator.n_features != filterbank.n_eigenvalues:
        raise ShapeError(
            f"filterbank built for N={filterbank.n_eigenvalues}, operator has N={operator.n_features}"
        )
    vectors = operator.decomposition.eigenvectors
    values = filterbank.kernel_values(operator.decomposition.eigenvalues)
    mats = np.empty((filterbank.J, operator.n_features, operator.n_features))
    for j in range(filterbank.J):
        h = (vectors * values[j]) @ vectors.T
        mats[j] = (h + h.T) / 2.0
    mats.flags.writeable = False
    return WaveletMatrixSet(matrices=mats, operator=operator, filterbank=filterbank)


def diffusion_apply(operator_matrix: np.ndarray, x: np.ndarray, J: int) -> list[np.ndarray]:
    """Apply all J diffusion wavelets to ``x`` by repeated operator products.

    Avoids the eigendecomposition entirely: only matrix-vector (or
    matrix-block) products with the operator are used, caching the signals
    at power-of-two exponents.
    """
    t = np.asarray(operator_matrix, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if t.shape[0] != x.shape[0]:
        raise ShapeError("operator and signal dimensions differ")
    if J < 2:
        raise InvalidScaleCount(f"need J >= 2, got {J}")
    powers = {0: x}
    current = x
    reached = 0
    for k in range(J):
        target = 2**k
        for _ in range(target - reached):
            current = t @ current
        reached = target
        powers[target] = current
    out = [x - powers[1]]
    for j in range(1, J):
        out.append(powers[2 ** (j - 1)] - powers[2**j])
    return out


def localization_profile(matrixset: WaveletMatrixSet, center: int, scale: int) -> LocalizationProfile:
    """Wavelet centered on one feature, with the covariance-distance decay bound.

    For diffusion kernels the entry at feature ``b`` is bounded by
    ``1/d^s1(center, b) + 1/d^s2(center, b)`` where ``d^s(a, b)`` is the
    inverse magnitude of the s-step operator entry; the bound is evaluated
    and checked here.
    """
    n = matrixset.operator.n_features
    if not 0 <= center < n:
        raise IndexError(f"center {center} outside 0..{n - 1}")
    if not 0 <= scale < matrixset.filterbank.J:
        raise IndexError(f"scale {scale} outside 0..{matrixset.filterbank.J - 1}")
    values = matrixset.matrices[scale][:, center].copy()
    if not isinstance(matrixset.filterbank.family, Diffusion):
        return LocalizationProfile(center, scale, values, None, None)

    s1 = 2 ** (scale - 1) if scale >= 1 else 0
    s2 = 2**scale
    delta = np.zeros(n)
    delta[center] = 1.0
    col = delta
    cols = {0: delta.copy()}
    for step in range(1, s2 + 1):
        col = matrixset.operator.matrix @ col
        if step in (s1, s2):
            cols[step] = col.copy()
    bound = np.abs(cols[s1]) + np.abs(cols[s2])
    if np.any(np.abs(values) > bound + 1e-12):
        raise NumericalError("localization bound violated; operator state is inconsistent")
    with np.errstate(divide="ignore"):
        distances = {s1: 1.0 / np.abs(cols[s1]), s2: 1.0 / np.abs(cols[s2])}
    return LocalizationProfile(center, scale, values, bound, distances)
