"""OFDM baseband blocks: carrier grid, QPSK, cyclic prefix, fading channel.

Conventions fixed here and relied on everywhere else:

* The modulator applies an inverse DFT with 1/sqrt(N) scaling,
  ``s[t] = (1/sqrt(N)) * sum_k S[k] exp(+2j pi k t / N)``, and the
  demodulator the matching forward DFT with 1/sqrt(N), so
  sample energy equals carrier energy (Parseval) and a round trip is the
  identity.
* QPSK is Gray-mapped with unit symbol energy; bit pair (b0, b1) maps to
  ``((1-2 b0) + 1j (1-2 b1)) / sqrt(2)`` (00 -> first quadrant).
* Bit LLRs are ``log P(bit=0|y) / P(bit=1|y)``, so a positive LLR votes for
  bit 0 and the sign is the hard decision.
* ``noise_var`` arguments are total complex powers, as in
  :mod:`inofdm.noise_models`.

Array-valued functions accept leading batch dimensions and operate on the
last axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .noise_models import complex_gaussian

_SQRT2 = math.sqrt(2.0)

#: Fixed seed of the pilot phase pattern; part of the waveform definition.
_PILOT_PHASE_SEED = 0xC04B


@dataclass(frozen=True, eq=False)
class OfdmConfig:
    """Carrier partition and cyclic-prefix length of one OFDM symbol.

    The data, pilot and null index sets must be disjoint and cover
    0 .. n_fft-1 exactly.

    Attributes:
        n_fft: DFT size N.
        data_carriers: Sorted indices carrying payload symbols.
        pilot_carriers: Sorted indices carrying pilot symbols.
        null_carriers: Sorted indices left empty (guard band).
        cp_len: Cyclic prefix length in samples.
        pilot_value: Base pilot modulation value.  The transmitted pilots
            are this value rotated by a fixed pseudo-random QPSK phase
            pattern (``pilot_symbols``), known to the receiver.  A constant
            value on an equally spaced pilot comb would concentrate a
            quarter of the symbol energy into a few periodic time-domain
            peaks, which any amplitude-based impulse detector would then
            blank; the phase pattern keeps the time-domain samples
            statistically flat.
    """

    n_fft: int
    data_carriers: np.ndarray
    pilot_carriers: np.ndarray
    null_carriers: np.ndarray
    cp_len: int
    pilot_value: complex = (1.0 + 1.0j) / _SQRT2

    def __post_init__(self) -> None:
        if self.n_fft < 1 or self.cp_len < 0 or self.cp_len >= self.n_fft:
            raise ValueError("need n_fft >= 1 and 0 <= cp_len < n_fft")
        if self.pilot_value == 0:
            raise ValueError("pilot_value must be nonzero (pilots are divided out)")
        for name in ("data_carriers", "pilot_carriers", "null_carriers"):
            arr = np.asarray(getattr(self, name), dtype=np.intp)
            object.__setattr__(self, name, arr)
        merged = np.concatenate(
            [self.data_carriers, self.pilot_carriers, self.null_carriers])
        if (len(merged) != self.n_fft
                or not np.array_equal(np.sort(merged), np.arange(self.n_fft))):
            raise ValueError(
                "data/pilot/null carriers must partition 0..n_fft-1")

    @cached_property
    def active_carriers(self) -> np.ndarray:
        """Data and pilot indices merged, ascending."""
        return np.sort(np.concatenate([self.data_carriers, self.pilot_carriers]))

    @cached_property
    def pilot_symbols(self) -> np.ndarray:
        """Transmitted pilot values, one per pilot carrier in ascending order.

        ``pilot_value`` rotated by a deterministic pseudo-random multiple
        of 90 degrees per carrier; magnitude (hence pilot power) is
        untouched.  The pattern depends only on the pilot count, so
        transmitter and receiver always agree on it.
        """
        rng = np.random.default_rng(_PILOT_PHASE_SEED)
        quarter_turns = rng.integers(0, 4, size=len(self.pilot_carriers))
        return self.pilot_value * 1j ** quarter_turns

    @cached_property
    def _data_slots(self) -> np.ndarray:
        return np.searchsorted(self.active_carriers, np.sort(self.data_carriers))

    @cached_property
    def _pilot_slots(self) -> np.ndarray:
        return np.searchsorted(self.active_carriers, np.sort(self.pilot_carriers))

    @property
    def n_data(self) -> int:
        return len(self.data_carriers)

    @property
    def n_active(self) -> int:
        return len(self.data_carriers) + len(self.pilot_carriers)

    @property
    def symbol_len(self) -> int:
        """Transmitted length of one symbol, CP included."""
        return self.n_fft + self.cp_len


def make_config(n_fft: int = 1024, cp_len: int = 64, pilot_spacing: int = 4,
                n_null: int = 96) -> OfdmConfig:
    """Build the standard carrier partition.

    Pilots sit on every ``pilot_spacing``-th carrier across the whole band
    (equally spaced, so pilot-based estimation covers the band edges), and
    the ``n_null`` guard carriers are the lowest and highest non-pilot
    indices, split evenly.  The default is the 1024-carrier profile with
    672 data / 256 pilot / 96 null carriers and a 64-sample prefix.
    """
    if n_null % 2 != 0:
        raise ValueError("n_null must be even (split across both band edges)")
    pilots = np.arange(0, n_fft, pilot_spacing)
    others = np.setdiff1d(np.arange(n_fft), pilots)
    if n_null > len(others):
        raise ValueError("more null carriers requested than non-pilot carriers")
    nulls = np.concatenate([others[:n_null // 2],
                            others[len(others) - n_null // 2:]])
    data = np.setdiff1d(others, nulls)
    return OfdmConfig(n_fft=n_fft, data_carriers=data, pilot_carriers=pilots,
                      null_carriers=np.sort(nulls), cp_len=cp_len)


# ---------------------------------------------------------------------------
# QPSK mapping and soft demapping


def qpsk_map(bits: np.ndarray) -> np.ndarray:
    """Map a bit sequence (last axis, even length) to unit-energy QPSK."""
    bits = np.asarray(bits)
    if bits.shape[-1] % 2 != 0:
        raise ValueError("bit count must be even for QPSK")
    b0 = bits[..., 0::2]
    b1 = bits[..., 1::2]
    return ((1.0 - 2.0 * b0) + 1j * (1.0 - 2.0 * b1)) / _SQRT2


def qpsk_hard(symbols: np.ndarray) -> np.ndarray:
    """Nearest-constellation-point bit decisions (inverse of qpsk_map)."""
    symbols = np.asarray(symbols)
    out = np.empty(symbols.shape[:-1] + (2 * symbols.shape[-1],), dtype=np.uint8)
    out[..., 0::2] = symbols.real < 0
    out[..., 1::2] = symbols.imag < 0
    return out


def qpsk_llr(symbols: np.ndarray, noise_var) -> np.ndarray:
    """Per-bit LLRs for Gray QPSK in circular Gaussian noise.

    Args:
        symbols: Received (equalized) symbols, shape (..., m).
        noise_var: Total complex noise power per symbol; scalar or
            broadcastable to ``symbols``.  ``inf`` yields LLR 0 (erasure).

    Returns:
        LLRs, shape (..., 2 m), bit order matching :func:`qpsk_map`.
    """
    symbols = np.asarray(symbols)
    noise_var = np.broadcast_to(np.asarray(noise_var, dtype=float), symbols.shape)
    scale = np.zeros_like(noise_var)
    np.divide(2.0 * _SQRT2, noise_var, out=scale, where=noise_var > 0)
    llr = np.empty(symbols.shape[:-1] + (2 * symbols.shape[-1],), dtype=float)
    llr[..., 0::2] = scale * symbols.real
    llr[..., 1::2] = scale * symbols.imag
    return llr


# ---------------------------------------------------------------------------
# Modulation / demodulation


def assemble_active(cfg: OfdmConfig, data_symbols: np.ndarray) -> np.ndarray:
    """Merge payload symbols and pilots into the active-carrier vector."""
    data_symbols = np.asarray(data_symbols)
    if data_symbols.shape[-1] != cfg.n_data:
        raise ValueError(
            f"expected {cfg.n_data} data symbols, got {data_symbols.shape[-1]}")
    active = np.empty(data_symbols.shape[:-1] + (cfg.n_active,), dtype=complex)
    active[..., cfg._data_slots] = data_symbols
    active[..., cfg._pilot_slots] = cfg.pilot_symbols
    return active

def ofdm_modulate(cfg: OfdmConfig, active_values: np.ndarray) -> np.ndarray:
    """Synthesize one time-domain symbol (CP prepended) from active carriers.

    Args:
        cfg: Carrier grid.
        active_values: One value per active carrier in ascending carrier
            order, shape (..., n_active); null carriers are implicitly zero.

    Returns:
        Time samples, shape (..., n_fft + cp_len).
    """
    active_values = np.asarray(active_values)
    if active_values.shape[-1] != cfg.n_active:
        raise ValueError(
            f"expected {cfg.n_active} active-carrier values, "
            f"got {active_values.shape[-1]}")
    grid = np.zeros(active_values.shape[:-1] + (cfg.n_fft,), dtype=complex)
    grid[..., cfg.active_carriers] = active_values
    body = np.fft.ifft(grid, axis=-1) * math.sqrt(cfg.n_fft)
    return np.concatenate([body[..., cfg.n_fft - cfg.cp_len:], body], axis=-1)


def ofdm_demodulate(cfg: OfdmConfig, samples: np.ndarray) -> np.ndarray:
    """Recover all N carrier values from one received symbol.

    Accepts either the full transmitted symbol (CP stripped internally) or
    the N-sample body when the receiver has already discarded the prefix.
    """
    samples = np.asarray(samples)
    if samples.shape[-1] == cfg.symbol_len:
        samples = samples[..., cfg.cp_len:]
    elif samples.shape[-1] != cfg.n_fft:
        raise ValueError(
            f"expected {cfg.symbol_len} or {cfg.n_fft} samples, "
            f"got {samples.shape[-1]}")
    return np.fft.fft(samples, axis=-1) / math.sqrt(cfg.n_fft)


# ---------------------------------------------------------------------------
# Sparse multipath channel


@dataclass(frozen=True)
class ChannelProfile:
    """Statistical description of the sparse Rayleigh multipath channel.

    Attributes:
        n_taps: Number of discrete paths.
        mean_arrival: Mean inter-arrival spacing in samples (Poisson
            arrivals; the default 6 corresponds to 1 ms at a 6 kHz rate).
        decay: e-folding constant (samples) of the average tap power.
    """

    n_taps: int = 10
    mean_arrival: float = 6.0
    decay: float = 20.0

    def __post_init__(self) -> None:
        if self.n_taps < 1 or self.mean_arrival <= 0 or self.decay <= 0:
            raise ValueError("n_taps >= 1 and positive mean_arrival/decay required")


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """One drawn channel: complex tap gains at strictly increasing delays."""

    gains: np.ndarray
    delays: np.ndarray

    def frequency_response(self, n_fft: int) -> np.ndarray:
        """Exact N-point response H[k] = sum_p gain_p exp(-2j pi k delay_p/N)."""
        dense = np.zeros(n_fft, dtype=complex)
        np.add.at(dense, self.delays, self.gains)
        return np.fft.fft(dense)


def channel_generate(rng: np.random.Generator,
                     profile: ChannelProfile = ChannelProfile(),
                     max_delay: int = 64, max_tries: int = 100) -> ChannelRealization:
    """Draw a Rayleigh-faded sparse channel realization.

    Path delays start at zero with exponential inter-arrivals quantized to
    the sample grid (collisions pushed to the next free sample, keeping the
    delays strictly increasing).  Average tap powers decay as
    exp(-delay/decay) and are normalized to sum to one, so E|gain_p|^2 sums
    to unit average channel power; realizations whose spread reaches
    ``max_delay`` (the CP length) are redrawn.

    Raises:
        RuntimeError: When no realization fits within ``max_delay`` after
            ``max_tries`` attempts.
    """
    for _ in range(max_tries):
        gaps = rng.exponential(profile.mean_arrival, profile.n_taps - 1)
        arrivals = np.concatenate([[0.0], np.cumsum(gaps)])
        delays = np.rint(arrivals).astype(np.intp)
        for p in range(1, len(delays)):
            if delays[p] <= delays[p - 1]:
                delays[p] = delays[p - 1] + 1
        if delays[-1] < max_delay:
            break
    else:
        raise RuntimeError(
            f"no channel fit within max_delay={max_delay} after {max_tries} tries; "
            "loosen the profile or lengthen the prefix")
    powers = np.exp(-delays / profile.decay)
    powers = powers / powers.sum()
    gains = complex_gaussian(rng, profile.n_taps, powers)
    return ChannelRealization(gains=gains, delays=delays)


def channel_apply(signal: np.ndarray, channel: ChannelRealization) -> np.ndarray:
    """Convolve a sample stream with the sparse channel, same-length output.

    ``out[t] = sum_p gain_p * signal[t - delay_p]`` with zeros before the
    stream starts; the tail beyond the input length is dropped (within one
    OFDM symbol the cyclic prefix absorbs it).
    """
    signal = np.asarray(signal)
    out = np.zeros_like(signal, dtype=complex)
    length = signal.shape[-1]
    for gain, delay in zip(channel.gains, channel.delays):
        if delay < length:
            out[..., delay:] += gain * signal[..., :length - delay]
    return out


# ---------------------------------------------------------------------------
# Pilot-based estimation and equalization


def estimate_channel(cfg: OfdmConfig, carriers: np.ndarray) -> np.ndarray:
    """Least-squares pilot estimates, linearly interpolated to all carriers.

    Args:
        cfg: Carrier grid (pilot positions and value).
        carriers: Demodulated values on all N carriers, shape (..., n_fft).

    Returns:
        Complex channel estimate on every carrier, shape (..., n_fft).
        Between pilots the estimate is linear in the carrier index; beyond
        the first/last pilot it extrapolates the edge slope.
    """
    carriers = np.asarray(carriers)
    if carriers.shape[-1] != cfg.n_fft:
        raise ValueError(f"expected {cfg.n_fft} carrier values")
    pilots = np.sort(cfg.pilot_carriers).astype(float)
    if len(pilots) < 2:
        raise ValueError("need at least two pilots to interpolate")
    ls = carriers[..., np.sort(cfg.pilot_carriers)] / cfg.pilot_symbols
    k = np.arange(cfg.n_fft, dtype=float)
    # Interval index for every carrier, clipped so edge carriers reuse the
    # first/last segment slope (linear extrapolation).
    seg = np.clip(np.searchsorted(pilots, k, side="right") - 1, 0, len(pilots) - 2)
    t = (k - pilots[seg]) / (pilots[seg + 1] - pilots[seg])
    return ls[..., seg] * (1.0 - t) + ls[..., seg + 1] * t


def equalize(values: np.ndarray, response: np.ndarray,
             floor: float = 1e-9) -> tuple[np.ndarray, np.ndarray]:
    """Zero-forcing equalization with per-carrier noise bookkeeping.

    Returns:
        (equalized, noise_scale): ``equalized = values / response`` and
        ``noise_scale = 1/|response|^2``, the factor by which the flat noise
        variance must be multiplied for LLR computation.  Carriers whose
        ``|response|`` falls below ``floor`` are erased: equalized value 0
        and infinite noise scale (downstream LLRs become exactly 0).
    """
    values = np.asarray(values)
    response = np.broadcast_to(np.asarray(response), values.shape)
    ok = np.abs(response) >= floor
    equalized = np.zeros_like(values, dtype=complex)
    np.divide(values, response, out=equalized, where=ok)
    noise_scale = np.full(values.shape, np.inf)
    np.divide(1.0, np.abs(response) ** 2, out=noise_scale, where=ok)
    return equalized, noise_scale
