"""Impulse detection and suppression, decoupled into detector + suppressor.

A detector turns a block of received time-domain samples into a 0/1 mask;
a suppressor rewrites the flagged samples.  Any detector composes with any
suppressor through :class:`MitigationPolicy`:

* threshold detector - flags |r| above a fixed level, or above the
  Neyman-Pearson level sqrt(-sigma2_clean * ln p_fa); sigma2_clean is
  either supplied by the caller (the classic receiver computes it from
  its assumed Gaussian signal-plus-background model) or, failing that,
  estimated robustly per block (median of |r|^2 over ln 2, exact for
  Rayleigh envelopes and insensitive to a minority of impulses);
* network detector - the trained classifier of :mod:`inofdm.dnn` over the
  window features of :mod:`inofdm.features`;
* blanking - flagged samples are zeroed;
* clipping - flagged samples are clamped to a magnitude ceiling, phase
  preserved; flagged samples already at or below the ceiling pass through.

All sample functions accept leading batch dimensions (blocks on the last
axis).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from . import dnn
from .features import DEFAULT_HALF_WIDTH, extract_features

#: False-alarm rate used whenever a policy needs a threshold level and the
#: caller did not fix one.
DEFAULT_P_FA = 0.01


def np_threshold(sigma2_clean: float, p_fa: float) -> float:
    """Detection level with false-alarm rate p_fa on a clean Rayleigh block.

    For impulse-free samples with total complex power sigma2_clean,
    P(|r| > T) = exp(-T^2 / sigma2_clean); solving for T gives
    sqrt(-sigma2_clean * ln p_fa).
    """
    if not 0.0 < p_fa < 1.0:
        raise ValueError(f"p_fa must be in (0, 1), got {p_fa}")
    if np.any(np.asarray(sigma2_clean) <= 0.0):
        raise ValueError("sigma2_clean must be strictly positive")
    return np.sqrt(-sigma2_clean * math.log(p_fa))


def estimate_clean_power(samples: np.ndarray) -> np.ndarray:
    """Robust per-block estimate of the impulse-free complex power.

    median(|r|^2) / ln 2 along the last axis: the median of an exponential
    with mean sigma2 is sigma2 ln 2, and the median barely moves when a
    small fraction of samples is contaminated.
    """
    samples = np.asarray(samples)
    if samples.shape[-1] < 1:
        raise ValueError("need at least one sample")
    return np.median(np.abs(samples) ** 2, axis=-1) / math.log(2.0)


def threshold_detect(samples: np.ndarray, threshold) -> np.ndarray:
    """Flag samples whose magnitude exceeds the threshold (broadcastable)."""
    if np.any(np.asarray(threshold) <= 0.0):
        raise ValueError("threshold must be strictly positive")
    samples = np.asarray(samples)
    return (np.abs(samples) > threshold).astype(np.uint8)


def blank(samples: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Zero the flagged samples, leave the rest untouched."""
    samples = np.asarray(samples)
    mask = np.asarray(mask)
    if mask.shape != samples.shape:
        raise ValueError("mask shape must match samples")
    return np.where(mask == 1, 0.0 + 0.0j, samples)


def clip(samples: np.ndarray, mask: np.ndarray, level: float) -> np.ndarray:
    """Clamp flagged samples to magnitude ``level``, preserving phase.

    Flagged samples with |r| <= level are returned unchanged (clamp
    semantics); unflagged samples always pass through.
    """
    if level <= 0.0:
        raise ValueError("clip level must be strictly positive")
    samples = np.asarray(samples)
    mask = np.asarray(mask)
    if mask.shape != samples.shape:
        raise ValueError("mask shape must match samples")
    mags = np.abs(samples)
    shrink = (mask == 1) & (mags > level)
    out = samples.astype(complex, copy=True)
    out[shrink] *= level / mags[shrink]
    return out


@dataclass(frozen=True)
class ThresholdDetector:
    """Magnitude-threshold detection.

    The level is resolved in precedence order:

    1. ``threshold`` - a fixed absolute level;
    2. ``sigma2_clean`` - the Neyman-Pearson level at ``p_fa`` computed
       from this *assumed* clean power.  This is the classic receiver: it
       trusts its Gaussian signal-plus-background model, so a model
       mismatch (heavier tails, fading power swings) miscalibrates it;
    3. neither - the level is derived per block from the robust in-situ
       power estimate at ``p_fa``.
    """

    p_fa: float = DEFAULT_P_FA
    threshold: Optional[float] = None
    sigma2_clean: Optional[float] = None

    def __post_init__(self) -> None:
        if not 0.0 < self.p_fa < 1.0:
            raise ValueError("p_fa must be in (0, 1)")
        if self.threshold is not None and self.threshold <= 0.0:
            raise ValueError("fixed threshold must be strictly positive")
        if self.sigma2_clean is not None and self.sigma2_clean <= 0.0:
            raise ValueError("sigma2_clean must be strictly positive")


@dataclass(frozen=True, eq=False)
class DnnDetector:
    """Feature-network detection with a decision threshold on the output."""

    params: dnn.MlpParams
    half_width: int = DEFAULT_HALF_WIDTH
    threshold: float = 0.5

    def __post_init__(self) -> None:
        if self.half_width < 1:
            raise ValueError("half_width must be at least 1")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("decision threshold must be in (0, 1)")


Detector = Union[ThresholdDetector, DnnDetector]


@dataclass(frozen=True)
class Blank:
    """Suppress flagged samples by zeroing them."""


@dataclass(frozen=True)
class Clip:
    """Suppress flagged samples by magnitude clamping.

    ``level=None`` reuses the detection threshold when the detector is
    threshold-based, otherwise the Neyman-Pearson level at
    :data:`DEFAULT_P_FA` from the block's robust power estimate.
    """

    level: Optional[float] = None

    def __post_init__(self) -> None:
        if self.level is not None and self.level <= 0.0:
            raise ValueError("clip level must be strictly positive")


Suppressor = Union[Blank, Clip]


@dataclass(frozen=True, eq=False)
class MitigationPolicy:
    """A detector/suppressor pairing; ``detector=None`` passes samples through."""

    detector: Optional[Detector]
    suppressor: Suppressor
    name: str = ""


def _block_threshold(samples: np.ndarray, detector: ThresholdDetector):
    """Per-block detection level, broadcastable over the last axis."""
    if detector.threshold is not None:
        return detector.threshold
    if detector.sigma2_clean is not None:
        return np_threshold(detector.sigma2_clean, detector.p_fa)
    sigma2 = estimate_clean_power(samples)
    return np.asarray(np_threshold(sigma2, detector.p_fa))[..., None]


def detector_features(samples: np.ndarray, half_width: int) -> np.ndarray:
    """Per-sample features for the learned detector, gain-normalized per block.

    Raw magnitude-based features scale with the received level, which swings
    block to block with the fading realization and the noise floor.  Each
    block (last axis) is divided by its robust scale estimate — the same
    estimator the threshold detector calibrates with — so the learned
    decision boundary transfers across blocks and operating points instead
    of being pinned to the levels seen during training.
    """
    samples = np.asarray(samples)
    power = np.maximum(estimate_clean_power(samples), np.finfo(float).tiny)
    return extract_features(samples / np.sqrt(power)[..., None], n=half_width)


def detect(samples: np.ndarray, detector: Detector) -> np.ndarray:
    """Run a detector over blocks, returning the 0/1 impulse mask."""
    samples = np.asarray(samples)
    if isinstance(detector, ThresholdDetector):
        return threshold_detect(samples, _block_threshold(samples, detector))
    if isinstance(detector, DnnDetector):
        feats = detector_features(samples, detector.half_width)
        return dnn.classify(detector.params, feats, threshold=detector.threshold)
    raise TypeError(f"unknown detector {type(detector).__name__}")


def mitigate(samples: np.ndarray, policy: MitigationPolicy) -> np.ndarray:
    """Detect and suppress in one pass; the input is never modified."""
    samples = np.asarray(samples)
    if policy.detector is None:
        return samples.astype(complex, copy=True)
    mask = detect(samples, policy.detector)
    if isinstance(policy.suppressor, Blank):
        return blank(samples, mask)
    if isinstance(policy.suppressor, Clip):
        level = policy.suppressor.level
        if level is not None:
            return clip(samples, mask, level)
        if isinstance(policy.detector, ThresholdDetector):
            levels = np.asarray(_block_threshold(samples, policy.detector))
        else:
            levels = np.asarray(
                np_threshold(estimate_clean_power(samples), DEFAULT_P_FA))[..., None]
        # Same clamp as clip(), but with a per-block level.
        lvl = np.broadcast_to(levels, samples.shape)
        mags = np.abs(samples)
        shrink = (mask == 1) & (mags > lvl)
        out = samples.astype(complex, copy=True)
        out[shrink] *= lvl[shrink] / mags[shrink]
        return out
    raise TypeError(f"unknown suppressor {type(policy.suppressor).__name__}")
