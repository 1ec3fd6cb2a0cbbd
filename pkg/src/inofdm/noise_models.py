"""Impulsive-noise models: Bernoulli-Gaussian, Middleton Class A, and SaS.

All samples are complex baseband.  Every variance in this module is a *total*
complex power: a draw from ``CN(0, sigma2)`` has independent real and
imaginary parts of variance ``sigma2 / 2`` each, so ``E|x|^2 == sigma2``.

The Bernoulli-Gaussian and Middleton Class A models are finite mixtures of
zero-mean circularly-symmetric complex Gaussians and expose their component
weights/variances for density evaluation.  The symmetric alpha-stable model
has no density in closed form and no per-sample ground truth; its sampler
returns ``labels=None``.

Random state is always an explicit ``numpy.random.Generator`` (or an integer
seed from which one is built); there is no module-level RNG.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

#: Minimum pre-truncation probability mass the retained Class A terms must
#: carry; construction fails below this.
MCA_MIN_MASS = 0.999


def _resolve_rng(rng: Union[int, np.random.Generator]) -> Tuple[np.random.Generator, Optional[int]]:
    """Return a Generator plus the integer seed when one was given."""
    if isinstance(rng, np.random.Generator):
        return rng, None
    return np.random.default_rng(rng), int(rng)


@dataclass(frozen=True)
class BGNoise:
    """Bernoulli-Gaussian mixture parameters.

    With probability ``1 - epsilon`` a sample is background only,
    ``CN(0, sigma_w2)``; with probability ``epsilon`` an impulse adds
    ``sigma_i2`` of extra power, giving ``CN(0, sigma_w2 + sigma_i2)``.

    Attributes:
        epsilon: Impulse probability in [0, 1].
        sigma_w2: Background (thermal) complex power, > 0.
        sigma_i2: Extra complex power of an impulse, > 0.
    """

    epsilon: float
    sigma_w2: float
    sigma_i2: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must be in [0, 1], got {self.epsilon}")
        if self.sigma_w2 <= 0.0 or self.sigma_i2 <= 0.0:
            raise ValueError("variances must be strictly positive")


@dataclass(frozen=True)
class MCANoise:
    """Middleton Class A parameters (truncated Poisson-Gaussian mixture).

    The number of simultaneously active interferers j is Poisson with mean
    ``overlap_a``; conditioned on j the sample is ``CN(0, sigma_j2)`` with

        sigma_j2 = (j / overlap_a + gamma) / (1 + gamma) * sigma_n2

    so j = 0 is the thermal background ``gamma/(1+gamma) * sigma_n2`` and the
    average total power over the untruncated mixture is ``sigma_n2``.  The
    series is truncated to ``j < j_trunc`` and the weights renormalized.

    Attributes:
        overlap_a: Impulsive index A (mean number of overlapping emissions).
        gamma: Background-to-impulsive power ratio.
        sigma_n2: Mean total complex noise power before truncation.
        j_trunc: Number of retained mixture terms (j = 0 .. j_trunc - 1).

    Raises:
        ValueError: On non-positive parameters, or when the retained terms
            carry less than ``MCA_MIN_MASS`` of the Poisson mass, meaning
            ``j_trunc`` is too small for this ``overlap_a``.
    """

    overlap_a: float
    gamma: float
    sigma_n2: float
    j_trunc: int = 10

    def __post_init__(self) -> None:
        if self.overlap_a <= 0.0 or self.gamma <= 0.0 or self.sigma_n2 <= 0.0:
            raise ValueError("overlap_a, gamma and sigma_n2 must be strictly positive")
        if self.j_trunc < 1:
            raise ValueError("j_trunc must be at least 1")
        mass = sum(mca_component(self.overlap_a, self.gamma, self.sigma_n2, j)[0]
                   for j in range(self.j_trunc))
        if mass < MCA_MIN_MASS:
            raise ValueError(
                f"truncated Class A mass {mass:.6f} < {MCA_MIN_MASS}; "
                f"increase j_trunc for overlap_a={self.overlap_a}")


@dataclass(frozen=True)
class SASNoise:
    """Symmetric (or skewed) alpha-stable parameters, applied per component.

    The sampler draws independent stable variates for the real and imaginary
    parts, each distributed S(alpha, beta, scale, loc).

    Attributes:
        alpha: Characteristic exponent in (0, 2].
        beta: Skewness in [-1, 1] (0 for the symmetric case).
        scale: Dispersion gamma > 0 of each component.
        loc: Location mu of each component.
    """

    alpha: float
    beta: float = 0.0
    scale: float = 1.0
    loc: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha <= 2.0:
            raise ValueError(f"alpha must be in (0, 2], got {self.alpha}")
        if not -1.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must be in [-1, 1], got {self.beta}")
        if self.scale <= 0.0:
            raise ValueError("scale must be strictly positive")


NoiseSpec = Union[BGNoise, MCANoise, SASNoise]


@dataclass
class LabeledNoiseBlock:
    """A block of noise samples with per-sample contamination ground truth.

    Attributes:
        samples: Complex noise samples, shape (count,).
        labels: uint8 array, 1 where an impulse is present, 0 otherwise.
            ``None`` for stable noise, which has no impulse indicator.
        spec: The generating parameter set.
        seed: Integer seed the block was drawn from, or ``None`` when the
            caller supplied a live Generator.
    """

    samples: np.ndarray
    labels: Optional[np.ndarray]
    spec: NoiseSpec
    seed: Optional[int]


def mca_component(overlap_a: float, gamma: float, sigma_n2: float,
                  j: int) -> Tuple[float, float]:
    """Return the pre-normalization (weight, variance) of Class A term j.

    weight = exp(-A) A^j / j!  and  variance = (j/A + gamma)/(1+gamma) * sigma_n2.
    """
    if j < 0:
        raise ValueError("term index j must be nonnegative")
    weight = math.exp(-overlap_a) * overlap_a ** j / math.factorial(j)
    variance = (j / overlap_a + gamma) / (1.0 + gamma) * sigma_n2
    return weight, variance


def mixture_weights(spec: NoiseSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Return normalized component weights and total-power variances.

    For ``BGNoise`` this is the two-term mixture; for ``MCANoise`` the
    truncated, renormalized Poisson weights.  Stable noise is not a Gaussian
    mixture and is rejected.

    Returns:
        (weights, variances) as float arrays; weights sum to 1 exactly.
    """
    if isinstance(spec, BGNoise):
        weights = np.array([1.0 - spec.epsilon, spec.epsilon])
        variances = np.array([spec.sigma_w2, spec.sigma_w2 + spec.sigma_i2])
        return weights, variances
    if isinstance(spec, MCANoise):
        pairs = [mca_component(spec.overlap_a, spec.gamma, spec.sigma_n2, j)
                 for j in range(spec.j_trunc)]
        weights = np.array([p for p, _ in pairs])
        weights = weights / weights.sum()
        variances = np.array([v for _, v in pairs])
        return weights, variances
    raise TypeError("stable noise has no Gaussian mixture representation")


def mixture_pdf(spec: NoiseSpec, x) -> np.ndarray:
    """Evaluate the complex mixture density at x (scalar or array).

    Each component contributes weight * exp(-|x|^2/sigma2) / (pi * sigma2),
    the circularly-symmetric complex Gaussian density in the total-power
    convention.

    Raises:
        TypeError: For stable specs (no closed-form density here).
    """
    weights, variances = mixture_weights(spec)
    mag2 = np.abs(np.asarray(x)) ** 2
    dens = np.tensordot(weights / (np.pi * variances),
                        np.exp(-np.multiply.outer(1.0 / variances, mag2)), axes=1)
    return dens if dens.ndim else float(dens)


def complex_gaussian(rng: np.random.Generator, count: int, sigma2) -> np.ndarray:
    """Draw CN(0, sigma2) samples; sigma2 may be scalar or per-sample array."""
    scale = np.sqrt(np.asarray(sigma2, dtype=float) / 2.0)
    return scale * (rng.standard_normal(count) + 1j * rng.standard_normal(count))


def sample_bg(spec: BGNoise, count: int,
              rng: Union[int, np.random.Generator]) -> LabeledNoiseBlock:
    """Draw Bernoulli-Gaussian noise with per-sample impulse labels."""
    if count < 0:
        raise ValueError("count must be nonnegative")
    gen, seed = _resolve_rng(rng)
    labels = (gen.random(count) < spec.epsilon).astype(np.uint8)
    sigma2 = np.where(labels == 1, spec.sigma_w2 + spec.sigma_i2, spec.sigma_w2)
    samples = complex_gaussian(gen, count, sigma2)
    return LabeledNoiseBlock(samples, labels, spec, seed)


def sample_mca(spec: MCANoise, count: int,
               rng: Union[int, np.random.Generator]) -> LabeledNoiseBlock:
    """Draw Middleton Class A noise; label 1 marks any term with j >= 1."""
    if count < 0:
        raise ValueError("count must be nonnegative")
    gen, seed = _resolve_rng(rng)
    weights, variances = mixture_weights(spec)
    term = gen.choice(spec.j_trunc, size=count, p=weights)
    samples = complex_gaussian(gen, count, variances[term])
    labels = (term >= 1).astype(np.uint8)
    return LabeledNoiseBlock(samples, labels, spec, seed)


def standard_stable(alpha: float, beta: float, u: np.ndarray,
                    w: np.ndarray) -> np.ndarray:
    """Map uniform/exponential draws to unit-scale stable variates.

    Implements the Chambers-Mallows-Stuck transform: ``u`` must be uniform on
    (-pi/2, pi/2) and ``w`` exponential with mean 1.  For alpha = 2 the output
    is N(0, 2), i.e. the usual stable convention where scale = sigma/sqrt(2).
    """
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)
    if abs(alpha - 1.0) < 1e-12:
        half_pi = np.pi / 2.0
        arg = half_pi + beta * u
        return (arg * np.tan(u)
                - beta * np.log(half_pi * w * np.cos(u) / arg)) / half_pi
    shift = math.atan(beta * math.tan(np.pi * alpha / 2.0)) / alpha
    scale = (1.0 + beta ** 2 * math.tan(np.pi * alpha / 2.0) ** 2) ** (1.0 / (2.0 * alpha))
    angle = alpha * (u + shift)
    return (scale * np.sin(angle) / np.cos(u) ** (1.0 / alpha)
            * (np.cos(u - angle) / w) ** ((1.0 - alpha) / alpha))


def sample_sas(spec: SASNoise, count: int,
               rng: Union[int, np.random.Generator]) -> LabeledNoiseBlock:
    """Draw complex stable noise, independent stable real and imaginary parts.

    Each component is scale * X + loc with X a unit-scale stable variate (for
    alpha = 1 the standard drift correction ``loc + 2/pi * beta*scale*ln scale``
    applies).  No labels: the model carries no impulse indicator.
    """
    if count < 0:
        raise ValueError("count must be nonnegative")
    gen, seed = _resolve_rng(rng)
    parts = []
    for _ in range(2):
        u = (gen.random(count) - 0.5) * np.pi
        w = gen.exponential(1.0, count)
        x = standard_stable(spec.alpha, spec.beta, u, w)
        if abs(spec.alpha - 1.0) < 1e-12:
            shift = spec.loc + 2.0 / np.pi * spec.beta * spec.scale * math.log(spec.scale)
        else:
            shift = spec.loc
        parts.append(spec.scale * x + shift)
    samples = parts[0] + 1j * parts[1]
    return LabeledNoiseBlock(samples, None, spec, seed)


def sample_bursty(spec: BGNoise, burst_len: int, count: int,
                  rng: Union[int, np.random.Generator]) -> LabeledNoiseBlock:
    """Draw Bernoulli-Gaussian noise whose impulses arrive in bursts.

    Burst starts are Bernoulli with rate ``epsilon / burst_len`` and each
    start contaminates ``burst_len`` consecutive samples (overlaps merge,
    bursts truncate at the block end), so the marginal contamination rate is
    1 - (1 - eps/burst_len)^burst_len, within a few percent of ``epsilon``
    for the burst lengths of interest.  ``burst_len=1`` reduces exactly to
    :func:`sample_bg` statistics.

    Args:
        spec: Mixture parameters; ``epsilon`` is the target marginal rate.
        burst_len: Number of consecutive contaminated samples per burst, >= 1.
        count: Block length.
        rng: Seed or Generator.
    """
    if burst_len < 1:
        raise ValueError("burst_len must be at least 1")
    if count < 0:
        raise ValueError("count must be nonnegative")
    gen, seed = _resolve_rng(rng)
    starts = gen.random(count) < spec.epsilon / burst_len
    labels = np.zeros(count, dtype=np.uint8)
    for offset in range(burst_len):
        labels[offset:] |= starts[:count - offset]
    sigma2 = np.where(labels == 1, spec.sigma_w2 + spec.sigma_i2, spec.sigma_w2)
    samples = complex_gaussian(gen, count, sigma2)
    return LabeledNoiseBlock(samples, labels, spec, seed)


def sample_noise(spec: NoiseSpec, count: int,
                 rng: Union[int, np.random.Generator],
                 burst_len: int = 1) -> LabeledNoiseBlock:
    """Dispatch to the sampler matching ``spec`` (bursts for BG only)."""
    if isinstance(spec, BGNoise):
        if burst_len > 1:
            return sample_bursty(spec, burst_len, count, rng)
        return sample_bg(spec, count, rng)
    if burst_len > 1:
        raise ValueError("burst sampling is defined for Bernoulli-Gaussian noise only")
    if isinstance(spec, MCANoise):
        return sample_mca(spec, count, rng)
    if isinstance(spec, SASNoise):
        return sample_sas(spec, count, rng)
    raise TypeError(f"unknown noise spec {type(spec).__name__}")
