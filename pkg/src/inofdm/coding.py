"""Rate-1/2 convolutional code with soft Viterbi decoding, plus interleaving.

The code is the constraint-length-7 pair with octal generators (171, 133),
written MSB-first on the current input: 171 = 1 + D + D^2 + D^3 + D^6 and
133 = 1 + D^2 + D^3 + D^5 + D^6.  Encoding appends K-1 = 6 zero tail bits so
the trellis starts and ends in the all-zero state, and the decoder exploits
both endpoints.

The decoder consumes log-likelihood ratios log P(c=0)/P(c=1) (positive LLR
votes for coded bit 0, matching :func:`inofdm.ofdm.qpsk_llr`) and maximizes
the correlation metric sum_t (1-2 c_t) llr_t.  Metric ties select the branch
from the lower-numbered predecessor state - the one whose shifted-out bit is
0 - so an all-zero-LLR input decodes deterministically to the all-zero
message.

The block interleaver writes row-wise and reads column-wise; lengths shorter
than rows*cols use the same read-out order restricted to occupied cells, so
interleave/deinterleave are exact inverses at any length.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

import numpy as np


def _reverse_bits(value: int, width: int) -> int:
    out = 0
    for _ in range(width):
        out = (out << 1) | (value & 1)
        value >>= 1
    return out


@dataclass(frozen=True)
class ConvCode:
    """Feed-forward convolutional code description."""

    constraint_length: int = 7
    generators: Tuple[int, int] = (0o171, 0o133)

    def __post_init__(self) -> None:
        if self.constraint_length < 2:
            raise ValueError("constraint_length must be at least 2")
        top = 1 << self.constraint_length
        if any(not 0 < g < top for g in self.generators):
            raise ValueError("generators must fit the constraint length")

    @property
    def n_states(self) -> int:
        return 1 << (self.constraint_length - 1)

    @property
    def n_tail(self) -> int:
        return self.constraint_length - 1


DEFAULT_CODE = ConvCode()
CODE_RATE = 0.5


@lru_cache(maxsize=4)
def _tables(code: ConvCode):
    """Precompute per-state transition tables.

    States hold the most recent K-1 input bits, newest in the LSB.  Shifting
    in bit u maps state s to ((s << 1) | u) & (n_states - 1); the register
    driving the outputs is r = (s << 1) | u with bit i holding the input
    from i steps back, so the generator masks are the octal words
    bit-reversed to lag order.

    Returns:
        (out_pair, pred0, pred1, sym0, sym1) where out_pair[s, u] is the
        2-bit output 2*c0 + c1 of the branch (s, u); pred0/pred1 are the two
        predecessors of each state (pred0 < pred1), and sym0/sym1 the output
        pairs along those incoming branches.
    """
    k = code.constraint_length
    n_states = code.n_states
    masks = [_reverse_bits(g, k) for g in code.generators]
    parity = np.zeros(1 << k, dtype=np.uint8)
    for r in range(1 << k):
        parity[r] = bin(r).count("1") & 1
    out_pair = np.zeros((n_states, 2), dtype=np.intp)
    for s in range(n_states):
        for u in (0, 1):
            r = (s << 1) | u
            c0 = parity[r & masks[0]]
            c1 = parity[r & masks[1]]
            out_pair[s, u] = 2 * c0 + c1
    states = np.arange(n_states, dtype=np.intp)
    pred0 = states >> 1
    pred1 = (states >> 1) | (n_states >> 1)
    sym0 = out_pair[pred0, states & 1]
    sym1 = out_pair[pred1, states & 1]
    return out_pair, pred0, pred1, sym0, sym1


def conv_encode(bits: np.ndarray, code: ConvCode = DEFAULT_CODE) -> np.ndarray:
    """Encode messages with zero-tail termination.

    Args:
        bits: Message bits, shape (..., m), values 0/1.
        code: Code description.

    Returns:
        Coded bits, shape (..., 2*(m + K - 1)), the two generator outputs
        interleaved per input bit.
    """
    bits = np.asarray(bits)
    if bits.ndim == 0 or bits.shape[-1] == 0:
        raise ValueError("message must contain at least one bit")
    if not np.isin(bits, (0, 1)).all():
        raise ValueError("message bits must be 0 or 1")
    out_pair, *_ = _tables(code)
    lead = bits.shape[:-1]
    m = bits.shape[-1]
    flat = bits.reshape(-1, m).astype(np.intp)
    n_steps = m + code.n_tail
    coded = np.empty((flat.shape[0], 2 * n_steps), dtype=np.uint8)
    state = np.zeros(flat.shape[0], dtype=np.intp)
    mask = code.n_states - 1
    for t in range(n_steps):
        u = flat[:, t] if t < m else np.zeros_like(state)
        pair = out_pair[state, u]
        coded[:, 2 * t] = pair >> 1
        coded[:, 2 * t + 1] = pair & 1
        state = ((state << 1) | u) & mask
    return coded.reshape(lead + (2 * n_steps,))


def viterbi_decode_soft(llrs: np.ndarray,
                        code: ConvCode = DEFAULT_CODE) -> np.ndarray:
    """Soft-decision Viterbi decode of a zero-terminated block.

    Args:
        llrs: Coded-bit LLRs, shape (..., 2*(m + K - 1)); positive means the
            coded bit is more likely 0.
        code: Code description.

    Returns:
        Decoded message bits, shape (..., m), tail removed.
    """
    llrs = np.asarray(llrs, dtype=float)
    if llrs.shape[-1] % 2 != 0:
        raise ValueError("LLR count must be even (two coded bits per step)")
    n_steps = llrs.shape[-1] // 2
    if n_steps <= code.n_tail:
        raise ValueError("block too short for the termination tail")
    _, pred0, pred1, sym0, sym1 = _tables(code)
    lead = llrs.shape[:-1]
    flat = llrs.reshape(-1, 2 * n_steps)
    n_rows = flat.shape[0]
    # Correlation metric of each of the four output pairs, per step.
    sign0 = np.array([1.0, 1.0, -1.0, -1.0])   # 1 - 2*c0 for pair index
    sign1 = np.array([1.0, -1.0, 1.0, -1.0])   # 1 - 2*c1
    metric = np.full((n_rows, code.n_states), -np.inf)
    metric[:, 0] = 0.0
    choose_hi = np.empty((n_steps, n_rows, code.n_states), dtype=bool)
    for t in range(n_steps):
        bm = (np.outer(flat[:, 2 * t], sign0)
              + np.outer(flat[:, 2 * t + 1], sign1))
        cand_lo = metric[:, pred0] + bm[:, sym0]
        cand_hi = metric[:, pred1] + bm[:, sym1]
        take = cand_hi > cand_lo          # ties keep the lower predecessor
        metric = np.where(take, cand_hi, cand_lo)
        choose_hi[t] = take
    rows = np.arange(n_rows)
    state = np.zeros(n_rows, dtype=np.intp)
    decoded = np.empty((n_rows, n_steps), dtype=np.uint8)
    high_bit = code.n_states >> 1
    for t in range(n_steps - 1, -1, -1):
        decoded[:, t] = state & 1
        came_hi = choose_hi[t][rows, state]
        state = (state >> 1) | np.where(came_hi, high_bit, 0)
    return decoded[:, :n_steps - code.n_tail].reshape(lead + (n_steps - code.n_tail,))


# ---------------------------------------------------------------------------
# Block interleaver


@dataclass(frozen=True)
class InterleaverSpec:
    """Row/column geometry of a block interleaver."""

    rows: int
    cols: int

    def __post_init__(self) -> None:
        if self.rows < 1 or self.cols < 1:
            raise ValueError("rows and cols must be positive")

    @property
    def capacity(self) -> int:
        return self.rows * self.cols


@lru_cache(maxsize=32)
def _read_order(rows: int, cols: int, length: int) -> np.ndarray:
    full = np.arange(rows * cols).reshape(rows, cols).T.ravel()
    return full[full < length]


def interleave(seq: np.ndarray, spec: InterleaverSpec) -> np.ndarray:
    """Permute the last axis: write row-wise into the grid, read column-wise.

    Sequences shorter than the grid permute through the occupied cells only;
    longer sequences are an error.  Consecutive input positions emerge at
    least ``rows`` apart (for a full grid), which is what disperses error
    bursts.
    """
    seq = np.asarray(seq)
    if seq.shape[-1] > spec.capacity:
        raise ValueError(
            f"sequence of {seq.shape[-1]} exceeds {spec.rows}x{spec.cols} grid")
    return seq[..., _read_order(spec.rows, spec.cols, seq.shape[-1])]


def deinterleave(seq: np.ndarray, spec: InterleaverSpec) -> np.ndarray:
    """Invert :func:`interleave` for the same spec and length."""
    seq = np.asarray(seq)
    if seq.shape[-1] > spec.capacity:
        raise ValueError(
            f"sequence of {seq.shape[-1]} exceeds {spec.rows}x{spec.cols} grid")
    order = _read_order(spec.rows, spec.cols, seq.shape[-1])
    inverse = np.empty_like(order)
    inverse[order] = np.arange(len(order))
    return seq[..., inverse]
