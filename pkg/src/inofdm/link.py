"""End-to-end coded OFDM link under impulsive noise, and its experiments.

Transmit chain per OFDM symbol: random message bits -> rate-1/2
convolutional encoder (zero tail) -> optional bit interleaver -> Gray QPSK
-> active-carrier grid with fixed pilots -> 1/sqrt(N) inverse DFT + cyclic
prefix -> fresh sparse Rayleigh channel -> additive noise at the configured
Eb/N0 (and SIR for mixture noise).  Receive chain: impulse mitigation on
the time-domain samples -> DFT -> pilot least-squares channel estimate (or
perfect CSI) -> zero-forcing equalization -> per-bit LLRs -> deinterleave
-> soft Viterbi.

Power conventions (unit-energy QPSK on every active carrier):

* The thermal noise power per sample (equal to the per-carrier noise power
  under the chosen DFT scaling) is N0 = 1 / (2 * R * Eb/N0) with R = 1/2.
  Pilot, prefix and the six tail bits are protocol overhead excluded from
  Eb.
* Mixture (BG) runs set the impulse power from the SIR: average impulse
  power = signal power / SIR with time-domain signal power |S_A|/N.
* Class A runs tie the background component to N0; the impulse power then
  follows from the background-to-impulse ratio gamma.
* Stable runs replace the whole noise with a stable stream scaled so its
  alpha=2 Gaussian-equivalent power equals N0 (per-component dispersion
  gamma * sqrt(N0)/2); at alpha=2 the run is statistically identical to the
  AWGN-only run.  Stable noise has no finite power, so no SIR applies.

With a receiver-side time interleaver the noise is inserted in interleaved
sample order: the channel output is interleaved, noise added, and the
receiver mitigates on that stream *before* deinterleaving and prefix
removal (the prefix positions are only restored by the deinterleaver).
Detection therefore faces the raw bursts while the decoder sees dispersed
residuals.

Monte Carlo sweeps draw every trial batch from a seed derived from
(master seed, stream tag, grid point, batch index), so all policies at a
grid point see bit-identical bits, channels and noise, and extending a
budget appends batches without disturbing earlier ones.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace as dc_replace
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .coding import (CODE_RATE, DEFAULT_CODE, conv_encode, deinterleave,
                     interleave, viterbi_decode_soft)
from .config import ExperimentConfig
from .dnn import MlpParams
from .mitigation import (Blank, Clip, Detector, DnnDetector, MitigationPolicy,
                         ThresholdDetector, detect, detector_features, mitigate)
from .noise_models import (BGNoise, MCANoise, NoiseSpec, SASNoise,
                           mca_component, sample_noise)
from .ofdm import (ChannelRealization, assemble_active, channel_apply,
                   channel_generate, equalize, estimate_channel, ofdm_demodulate,
                   ofdm_modulate, qpsk_llr, qpsk_map)

#: Symbols simulated per Monte Carlo batch.
BATCH_SYMBOLS = 32

# Seed-stream tags so different activities never share random draws.
_TAG_SWEEP = 0
_TAG_DATASET = 1
_TAG_EVAL = 2
_TAG_SHUFFLE = 3


def bits_per_symbol(cfg: ExperimentConfig) -> int:
    """Information bits carried by one OFDM symbol (tail excluded)."""
    m = cfg.ofdm.n_data - DEFAULT_CODE.n_tail
    if m < 1:
        raise ValueError("carrier grid too small for the termination tail")
    return m


def awgn_power(ebn0_db: float) -> float:
    """Thermal complex noise power per sample for unit-energy carriers."""
    return 1.0 / (2.0 * CODE_RATE * 10.0 ** (ebn0_db / 10.0))


def signal_power(cfg: ExperimentConfig) -> float:
    """Average time-domain transmit power, |S_A| / N."""
    return cfg.ofdm.n_active / cfg.ofdm.n_fft


def noise_spec_for(cfg: ExperimentConfig, ebn0_db: float) -> NoiseSpec:
    """Noise parameters for one grid point under the power conventions."""
    n0 = awgn_power(ebn0_db)
    if cfg.noise_model == "bg":
        if cfg.epsilon == 0.0:
            return BGNoise(epsilon=0.0, sigma_w2=n0, sigma_i2=1.0)
        sir = 10.0 ** (cfg.sir_db / 10.0)
        sigma_i2 = signal_power(cfg) / (cfg.epsilon * sir)
        return BGNoise(epsilon=cfg.epsilon, sigma_w2=n0, sigma_i2=sigma_i2)
    if cfg.noise_model == "mca":
        sigma_n2 = n0 * (1.0 + cfg.mca_gamma) / cfg.mca_gamma
        return MCANoise(overlap_a=cfg.mca_a, gamma=cfg.mca_gamma,
                        sigma_n2=sigma_n2, j_trunc=cfg.mca_j_trunc)
    if cfg.noise_model == "sas":
        return SASNoise(alpha=cfg.sas_alpha, beta=cfg.sas_beta,
                        scale=cfg.sas_scale * math.sqrt(n0) / 2.0,
                        loc=cfg.sas_loc)
    raise ValueError(f"unknown noise model {cfg.noise_model!r}")


def gaussian_equivalent_power(spec: NoiseSpec) -> float:
    """Thermal-component power the LLR stage assumes after mitigation."""
    if isinstance(spec, BGNoise):
        return spec.sigma_w2
    if isinstance(spec, MCANoise):
        return mca_component(spec.overlap_a, spec.gamma, spec.sigma_n2, 0)[1]
    if isinstance(spec, SASNoise):
        return 4.0 * spec.scale ** 2
    raise TypeError(f"unknown noise spec {type(spec).__name__}")


@dataclass(eq=False)
class SymbolBatch:
    """Everything shared by all policies when decoding one trial batch.

    ``rx``/``clean``/``labels`` live in the stream domain: natural sample
    order normally, interleaved order when a time interleaver is active.
    """

    tx_bits: np.ndarray                  # (B, m) message bits
    rx: np.ndarray                       # (B, N+cp) received stream
    clean: np.ndarray                    # (B, N+cp) noise-free stream
    labels: Optional[np.ndarray]         # (B, N+cp) impulse indicators
    channels: List[ChannelRealization]
    spec: NoiseSpec
    ebn0_db: float


def simulate_batch(cfg: ExperimentConfig, ebn0_db: float, count: int,
                   rng: np.random.Generator) -> SymbolBatch:
    """Draw ``count`` OFDM symbols through transmitter, channel and noise.

    Draw order is fixed (bits, then per-symbol channels, then noise) so a
    seeded generator reproduces the batch exactly.
    """
    if count < 1:
        raise ValueError("count must be positive")
    m = bits_per_symbol(cfg)
    bits = rng.integers(0, 2, size=(count, m), dtype=np.uint8)
    coded = conv_encode(bits)
    if cfg.tx_interleaver is not None:
        coded = interleave(coded, cfg.tx_interleaver)
    active = assemble_active(cfg.ofdm, qpsk_map(coded))
    tx_time = ofdm_modulate(cfg.ofdm, active)
    channels = [channel_generate(rng, cfg.channel, max_delay=cfg.ofdm.cp_len)
                for _ in range(count)]
    faded = np.stack([channel_apply(tx_time[i], channels[i])
                      for i in range(count)])
    stream = faded
    if cfg.time_interleaver is not None:
        stream = interleave(faded, cfg.time_interleaver)
    spec = noise_spec_for(cfg, ebn0_db)
    block = sample_noise(spec, count * cfg.ofdm.symbol_len, rng,
                         burst_len=cfg.burst_len)
    noise = block.samples.reshape(count, cfg.ofdm.symbol_len)
    labels = None
    if block.labels is not None:
        labels = block.labels.reshape(count, cfg.ofdm.symbol_len)
    return SymbolBatch(tx_bits=bits, rx=stream + noise, clean=stream,
                       labels=labels, channels=channels, spec=spec,
                       ebn0_db=ebn0_db)


def receiver_stream(cfg: ExperimentConfig, batch: SymbolBatch) -> np.ndarray:
    """The samples the detector actually sees (mitigation input).

    Plain chain: the N-sample symbol bodies (prefix discarded before
    detection).  Time-interleaved chain: the full interleaved stream.
    """
    if cfg.time_interleaver is not None:
        return batch.rx
    return batch.rx[:, cfg.ofdm.cp_len:]


def receiver_stream_labels(cfg: ExperimentConfig,
                           batch: SymbolBatch) -> Optional[np.ndarray]:
    """Impulse labels aligned with :func:`receiver_stream`."""
    if batch.labels is None:
        return None
    if cfg.time_interleaver is not None:
        return batch.labels
    return batch.labels[:, cfg.ofdm.cp_len:]


def receive_batch(cfg: ExperimentConfig, batch: SymbolBatch,
                  policy: MitigationPolicy) -> np.ndarray:
    """Decode a simulated batch under one mitigation policy.

    Returns:
        Decoded message bits, shape matching ``batch.tx_bits``.
    """
    cleaned = mitigate(receiver_stream(cfg, batch), policy)
    if cfg.time_interleaver is not None:
        natural = deinterleave(cleaned, cfg.time_interleaver)
        body = natural[:, cfg.ofdm.cp_len:]
    else:
        body = cleaned
    carriers = ofdm_demodulate(cfg.ofdm, body)
    if cfg.perfect_csi:
        response = np.stack([ch.frequency_response(cfg.ofdm.n_fft)
                             for ch in batch.channels])
    else:
        response = estimate_channel(cfg.ofdm, carriers)
    data = carriers[:, cfg.ofdm.data_carriers]
    eq, noise_scale = equalize(data, response[:, cfg.ofdm.data_carriers])
    base = gaussian_equivalent_power(batch.spec)
    llrs = qpsk_llr(eq, base * noise_scale)
    if cfg.tx_interleaver is not None:
        llrs = deinterleave(llrs, cfg.tx_interleaver)
    return viterbi_decode_soft(llrs)


def run_link_once(cfg: ExperimentConfig, policy: MitigationPolicy,
                  rng: np.random.Generator,
                  ebn0_db: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
    """One OFDM symbol through the whole chain; returns (sent, decoded) bits."""
    point = cfg.ebn0_db[0] if ebn0_db is None else ebn0_db
    batch = simulate_batch(cfg, point, 1, rng)
    decoded = receive_batch(cfg, batch, policy)
    return batch.tx_bits[0], decoded[0]


def run_link_once_named(cfg: ExperimentConfig, policy_name: str,
                        rng: np.random.Generator,
                        params: Optional[MlpParams] = None,
                        ebn0_db: Optional[float] = None
                        ) -> Tuple[np.ndarray, np.ndarray]:
    """Convenience wrapper: build the named policy and run it at the point."""
    point = cfg.ebn0_db[0] if ebn0_db is None else ebn0_db
    policy = build_policy(cfg, policy_name, params)
    return run_link_once(cfg, policy, rng, ebn0_db=point)


def assumed_clean_power(cfg: ExperimentConfig, ebn0_db: float) -> float:
    """Model-implied average clean received power at an operating point.

    Signal power plus the Gaussian background the configured noise model
    exhibits at this Eb/N0.  A reference figure for calibration studies;
    the sweep's threshold policies deliberately do not use it (a fixed
    average-power level over-blanks faded-up symbols), relying on the
    per-block robust estimate instead.
    """
    spec = noise_spec_for(cfg, ebn0_db)
    return signal_power(cfg) + gaussian_equivalent_power(spec)


def build_policy(cfg: ExperimentConfig, name: str,
                 params: Optional[MlpParams] = None) -> MitigationPolicy:
    """Instantiate one of the named policies.

    none - pass-through; bln/clp - threshold detection at the configured
    false-alarm rate with blanking/clipping; dnn/dnn-clp - network
    detection with blanking/clipping.  The threshold policies calibrate
    their level from the robust per-block power estimate rather than the
    model-implied average: with per-symbol fading a fixed average-power
    level over-blanks strong symbols and floors the curve near 1e-2, and
    a practical receiver tracks its own front-end level anyway.
    """
    if name == "none":
        return MitigationPolicy(None, Blank(), name="none")
    if name in ("bln", "clp"):
        detector = ThresholdDetector(p_fa=cfg.p_fa)
        suppressor = Blank() if name == "bln" else Clip()
        return MitigationPolicy(detector, suppressor, name=name)
    if name in ("dnn", "dnn-clp"):
        if params is None:
            raise ValueError(f"policy {name!r} needs trained model parameters")
        detector = DnnDetector(params=params, half_width=cfg.half_width)
        suppressor = Blank() if name == "dnn" else Clip()
        return MitigationPolicy(detector, suppressor, name=name)
    raise ValueError(f"unknown policy {name!r}")


# ---------------------------------------------------------------------------
# Labeled dataset generation


def training_grid(cfg: ExperimentConfig) -> List[Tuple[float, float, float]]:
    """The (Eb/N0, SIR, epsilon) combinations the training set spans."""
    return list(itertools.product(cfg.train_ebn0_db, cfg.train_sir_db,
                                  cfg.train_epsilon))


def generate_dataset(cfg: ExperimentConfig) -> Tuple[np.ndarray, np.ndarray]:
    """Features and labels for training, over the mixture-noise grid.

    ``cfg.train_symbols`` OFDM symbols are spread round-robin over the
    training grid and run through the plain chain (no time interleaver);
    features come from the receiver's time-domain bodies before any
    mitigation, prefix samples excluded.  Rows are shuffled with a seed
    derived from the master seed, so the on-disk order is deterministic.

    Returns:
        (features, labels) with ``cfg.train_symbols * n_fft`` rows.
    """
    combos = training_grid(cfg)
    if cfg.train_symbols < len(combos):
        raise ValueError("train.symbols must cover the grid at least once")
    base = cfg.train_symbols // len(combos)
    extra = cfg.train_symbols % len(combos)
    feature_parts = []
    label_parts = []
    for ci, (ebn0, sir, eps) in enumerate(combos):
        count = base + (1 if ci < extra else 0)
        if count == 0:
            continue
        point_cfg = dc_replace(cfg, noise_model="bg", sir_db=sir, epsilon=eps,
                               burst_len=1, time_interleaver=None)
        rng = np.random.default_rng(np.random.SeedSequence(
            (cfg.seed, _TAG_DATASET, ci)))
        batch = simulate_batch(point_cfg, ebn0, count, rng)
        body = receiver_stream(point_cfg, batch)
        feats = detector_features(body, cfg.half_width)
        feature_parts.append(feats.reshape(-1, 3))
        label_parts.append(receiver_stream_labels(point_cfg, batch).reshape(-1))
    features = np.concatenate(feature_parts, axis=0)
    labels = np.concatenate(label_parts, axis=0)
    order = np.random.default_rng(np.random.SeedSequence(
        (cfg.seed, _TAG_SHUFFLE))).permutation(len(labels))
    return features[order], labels[order]


# ---------------------------------------------------------------------------
# BER sweeps


@dataclass
class BerPoint:
    ebn0_db: float
    ber: float
    bits: int
    errors: int


@dataclass
class BerCurve:
    """One policy's BER-vs-Eb/N0 curve plus provenance metadata."""

    detector: str
    points: List[BerPoint]
    config_hash: str
    seed: int

    def ber_at(self, ebn0_db: float) -> float:
        for point in self.points:
            if point.ebn0_db == ebn0_db:
                return point.ber
        raise KeyError(f"no point at {ebn0_db} dB")


def ber_sweep(cfg: ExperimentConfig, params: Optional[MlpParams] = None,
              log: Optional[Callable[[str], None]] = None) -> Dict[str, BerCurve]:
    """Paired Monte Carlo BER curves for every configured policy.

    All policies at a grid point decode the *same* batches (common random
    numbers).  Each point accumulates whole batches until every policy has
    at least ``cfg.min_errors`` bit errors or ``cfg.max_bits`` information
    bits have been simulated, whichever comes first.
    """
    m = bits_per_symbol(cfg)
    curves = {name: BerCurve(detector=name, points=[],
                             config_hash=cfg.config_hash, seed=cfg.seed)
              for name in cfg.policies}
    policies = {name: build_policy(cfg, name, params)
                for name in cfg.policies}
    for point_idx, ebn0 in enumerate(cfg.ebn0_db):
        errors = {name: 0 for name in policies}
        bits = 0
        batch_idx = 0
        while True:
            rng = np.random.default_rng(np.random.SeedSequence(
                (cfg.seed, _TAG_SWEEP, point_idx, batch_idx)))
            batch = simulate_batch(cfg, ebn0, BATCH_SYMBOLS, rng)
            for name, policy in policies.items():
                decoded = receive_batch(cfg, batch, policy)
                errors[name] += int(np.sum(decoded != batch.tx_bits))
            bits += BATCH_SYMBOLS * m
            batch_idx += 1
            if bits >= cfg.max_bits or min(errors.values()) >= cfg.min_errors:
                break
        for name in policies:
            curves[name].points.append(BerPoint(
                ebn0_db=ebn0, ber=errors[name] / bits, bits=bits,
                errors=errors[name]))
        if log is not None:
            summary = " ".join(f"{n}={errors[n] / bits:.3g}" for n in policies)
            log(f"ebn0={ebn0:g} dB bits={bits} {summary}")
    return curves


def write_curve_csv(path, curve: BerCurve) -> None:
    """Serialize a curve with '#'-prefixed provenance metadata."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"# config_hash={curve.config_hash}\n")
        fh.write(f"# seed={curve.seed}\n")
        fh.write("ebn0_db,detector,ber,bits,errors\n")
        for p in curve.points:
            fh.write(f"{p.ebn0_db:.17g},{curve.detector},{p.ber:.17g},"
                     f"{p.bits},{p.errors}\n")


def read_curve_csv(path) -> BerCurve:
    """Inverse of :func:`write_curve_csv`."""
    meta = {}
    points = []
    detector = ""
    with open(path, "r", encoding="ascii") as fh:
        header_seen = False
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                meta[key.strip()] = value.strip()
                continue
            if not header_seen:
                if line != "ebn0_db,detector,ber,bits,errors":
                    raise ValueError(f"unexpected curve header: {line!r}")
                header_seen = True
                continue
            ebn0, detector, ber, nbits, nerr = line.split(",")
            points.append(BerPoint(float(ebn0), float(ber), int(nbits), int(nerr)))
    if not header_seen:
        raise ValueError("curve file has no header line")
    return BerCurve(detector=detector, points=points,
                    config_hash=meta.get("config_hash", ""),
                    seed=int(meta.get("seed", "0")))


# ---------------------------------------------------------------------------
# Detector operating-point evaluation


@dataclass
class DetectionReport:
    """Sample-level detector rates over simulated receiver streams."""

    detection_rate: float
    false_alarm_rate: float
    missed_rate: float
    n_impulse: int
    n_clean: int


def detection_rates(cfg: ExperimentConfig, detector: Detector,
                    ebn0_db: float, n_symbols: int = 200) -> DetectionReport:
    """Measure detection/false-alarm/miss rates on labeled noise.

    Raises:
        ValueError: For stable noise, which carries no ground-truth labels.
    """
    hits = misses = false_alarms = clean = 0
    done = 0
    batch_idx = 0
    while done < n_symbols:
        count = min(BATCH_SYMBOLS, n_symbols - done)
        rng = np.random.default_rng(np.random.SeedSequence(
            (cfg.seed, _TAG_EVAL, batch_idx)))
        batch = simulate_batch(cfg, ebn0_db, count, rng)
        labels = receiver_stream_labels(cfg, batch)
        if labels is None:
            raise ValueError("stable noise has no impulse labels to score against")
        mask = detect(receiver_stream(cfg, batch), detector)
        impulse = labels == 1
        hits += int(np.sum(mask[impulse] == 1))
        misses += int(np.sum(mask[impulse] == 0))
        false_alarms += int(np.sum(mask[~impulse] == 1))
        clean += int(np.sum(~impulse))
        done += count
        batch_idx += 1
    n_impulse = hits + misses
    detection = hits / n_impulse if n_impulse else float("nan")
    return DetectionReport(
        detection_rate=detection,
        false_alarm_rate=false_alarms / clean if clean else float("nan"),
        missed_rate=1.0 - detection if n_impulse else float("nan"),
        n_impulse=n_impulse, n_clean=clean)
