"""Quasi-static Rayleigh flat-fading MIMO channel and PAM/QAM mapping.

The channel model is Y = sqrt(snr) * X @ H + W with H (N x N_r) and W
(T x N_r) i.i.d. circularly-symmetric complex Gaussian of unit variance.
All SNR scaling lives in the sqrt(snr) factor; the noise variance is fixed.

Real symbols take values from a square-QAM half: a sqrt(M)-ary PAM alphabet
scaled to energy 1/2 per real dimension, Gray-mapped, so that each complex
symbol (a pair of reals) has unit average energy.
"""

from functools import lru_cache

import numpy as np
from dataclasses import dataclass

from .lindesign import RealSymbolVector


@dataclass(frozen=True, eq=False)
class PamAlphabet:
    """Equally spaced, zero-mean PAM levels with a Gray bit mapping."""

    levels: np.ndarray  # ascending
    bit_width: int

    def __post_init__(self):
        lv = np.asarray(self.levels, dtype=float).copy()
        lv.setflags(write=False)
        object.__setattr__(self, "levels", lv)

    @property
    def size(self):
        return self.levels.size

    @property
    def spacing(self):
        return float(self.levels[1] - self.levels[0]) if self.size > 1 else 1.0

    def nearest_index(self, x):
        """Index of the nearest level; exact midpoints resolve to the lower index."""
        x = np.asarray(x, dtype=float)
        if self.size == 1:
            return np.zeros(x.shape, dtype=np.int64)
        pos = (x - self.levels[0]) / self.spacing
        idx = np.ceil(pos - 0.5).astype(np.int64)
        return np.minimum(np.maximum(idx, 0), self.size - 1)

    def quantize(self, x):
        return self.levels[self.nearest_index(x)]

    def index_to_bits(self, idx):
        idx = np.asarray(idx, dtype=np.int64)
        gray = idx ^ (idx >> 1)
        shifts = np.arange(self.bit_width - 1, -1, -1)
        return ((gray[:, None] >> shifts) & 1).ravel()

    def bits_to_index(self, bits):
        bits = np.asarray(bits, dtype=np.int64).reshape(-1, self.bit_width)
        gray = np.zeros(len(bits), dtype=np.int64)
        for b in range(self.bit_width):
            gray = (gray << 1) | bits[:, b]
        idx = gray.copy()
        shift = 1
        while shift < self.bit_width:
            idx ^= idx >> shift
            shift *= 2
        return idx


@lru_cache(maxsize=None)
def pam_for_qam(m):
    """The sqrt(M)-ary PAM alphabet whose pairs form square M-QAM (M a power of 4)."""
    root = round(np.sqrt(m))
    if root * root != m or root & (root - 1) or m < 4:
        raise ValueError(f"only square QAM with power-of-4 size is supported, got {m}")
    raw = np.arange(-(root - 1), root, 2, dtype=float)  # -(L-1), ..., L-1 step 2
    levels = raw * np.sqrt(0.5 / np.mean(raw ** 2))
    return PamAlphabet(levels, bit_width=root.bit_length() - 1)


def modulate(bits, alphabet):
    """Gray-map a bit array onto PAM levels; length must divide the bit width."""
    bits = np.asarray(bits, dtype=np.int64)
    if bits.size % alphabet.bit_width:
        raise ValueError("bit count must be a multiple of the per-symbol width")
    idx = alphabet.bits_to_index(bits)
    x = alphabet.levels[idx]
    return RealSymbolVector(x, alphabets=(alphabet,) * x.size)


def demap(x, alphabet):
    """Quantize real values to the alphabet and return their Gray bits."""
    x = x.entries if isinstance(x, RealSymbolVector) else np.asarray(x, dtype=float)
    return alphabet.index_to_bits(alphabet.nearest_index(x))


@dataclass(frozen=True, eq=False)
class LinkInstance:
    """One channel use: fading matrix, noise realization and linear SNR."""

    h: np.ndarray  # (N, N_r) complex
    w: np.ndarray  # (T, N_r) complex
    snr: float

    def __post_init__(self):
        if self.snr < 0:
            raise ValueError("snr must be non-negative")
        for name in ("h", "w"):
            a = np.asarray(getattr(self, name), dtype=complex).copy()
            a.setflags(write=False)
            object.__setattr__(self, name, a)


def sample_link(antennas, receive_antennas, delay, snr_db, rng):
    """Draw one quasi-static Rayleigh link; entries are CN(0, 1)."""
    scale = np.sqrt(0.5)
    h = scale * (rng.standard_normal((antennas, receive_antennas))
                 + 1j * rng.standard_normal((antennas, receive_antennas)))
    w = scale * (rng.standard_normal((delay, receive_antennas))
                 + 1j * rng.standard_normal((delay, receive_antennas)))
    return LinkInstance(h, w, float(10.0 ** (snr_db / 10.0)))


def transmit(x, link):
    """Received matrix Y = sqrt(snr) * X @ H + W."""
    x = np.asarray(x, dtype=complex)
    if x.shape[1] != link.h.shape[0]:
        raise ValueError(f"codeword has {x.shape[1]} columns, channel has "
                         f"{link.h.shape[0]} rows")
    return np.sqrt(link.snr) * (x @ link.h) + link.w
