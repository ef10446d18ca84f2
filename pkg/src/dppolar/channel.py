"""Channel models: BI-AWGN with BPSK, discrete BMS channels and their
one-step polar transforms, and per-trial random streams."""
from __future__ import annotations

from dataclasses import dataclass, field
from math import isfinite

import numpy as np


@dataclass(frozen=True)
class AwgnChannel:
    """BPSK over AWGN parameterised by Eb/N0 (dB) and the code rate.

    ``sigma`` is derived as sqrt(1 / (2 R 10^(ebn0/10))) unless given
    explicitly, in which case ``ebn0_db`` is informational only.
    """

    ebn0_db: float
    rate: float = 1.0
    sigma: float = field(default=None)

    def __post_init__(self):
        if not 0.0 < self.rate <= 1.0:
            raise ValueError(f"rate must lie in (0, 1], got {self.rate}")
        if self.sigma is None:
            sigma = float(np.sqrt(1.0 / (2.0 * self.rate * 10.0 ** (self.ebn0_db / 10.0))))
            object.__setattr__(self, "sigma", sigma)
        if not (isfinite(self.sigma) and self.sigma > 0):
            raise ValueError(f"sigma must be finite and positive, got {self.sigma}")

    @classmethod
    def from_sigma(cls, sigma: float) -> "AwgnChannel":
        return cls(ebn0_db=float("nan"), rate=1.0, sigma=sigma)

    @property
    def variance(self) -> float:
        return self.sigma ** 2


def modulate_bpsk(x) -> np.ndarray:
    """Bit 0 -> +1.0, bit 1 -> -1.0."""
    return 1.0 - 2.0 * np.asarray(x, dtype=np.float64)


def hard_decision(y) -> np.ndarray:
    return (np.asarray(y) < 0).astype(np.uint8)


class RngStream:
    """Counter-based stream keyed by (master_seed, domain) and indexed per trial.

    Stream ``i`` uses Philox with the trial index in the most significant
    counter word, so streams never overlap and identical
    (seed, domain, index) triples reproduce identical draws no matter the
    order or thread on which they are evaluated.
    """

    def __init__(self, master_seed: int, stream_index: int, domain: tuple[int, ...] = ()):
        if stream_index < 0:
            raise ValueError("stream_index must be nonnegative")
        self.master_seed = int(master_seed)
        self.stream_index = int(stream_index)
        self.domain = tuple(int(d) for d in domain)
        key = stream_key(self.master_seed, self.domain)
        self.generator = np.random.Generator(
            np.random.Philox(key=key, counter=[0, 0, 0, self.stream_index])
        )

    def normal(self, size) -> np.ndarray:
        return self.generator.standard_normal(size)

    def bits(self, size) -> np.ndarray:
        return self.generator.integers(0, 2, size, dtype=np.uint8)


def stream_key(master_seed: int, domain: tuple[int, ...] = ()) -> np.ndarray:
    seq = np.random.SeedSequence([int(master_seed) & (2**64 - 1), *domain])
    return seq.generate_state(2, dtype=np.uint64)


def draw_trials(master_seed: int, start: int, count: int, n: int, k: int,
                domain: tuple[int, ...] = ()) -> tuple[np.ndarray, np.ndarray]:
    """Message bits (count, k) and unit-variance noise (count, n) for trials
    ``start .. start+count-1``; each row comes from its own stream."""
    msgs = np.empty((count, k), dtype=np.uint8)
    noise = np.empty((count, n), dtype=np.float64)
    key = stream_key(master_seed, domain)
    for t in range(count):
        g = np.random.Generator(np.random.Philox(key=key, counter=[0, 0, 0, start + t]))
        msgs[t] = g.integers(0, 2, k, dtype=np.uint8)
        noise[t] = g.standard_normal(n)
    return msgs, noise


def transmit(symbols, ch: AwgnChannel, rng: RngStream) -> np.ndarray:
    s = np.asarray(symbols, dtype=np.float64)
    return s + ch.sigma * rng.normal(s.shape)


def llr_from_awgn(y, ch: AwgnChannel) -> np.ndarray:
    """log W(y|0)/W(y|1) = 2y / sigma^2; positive favours bit 0."""
    return 2.0 * np.asarray(y, dtype=np.float64) / ch.variance


# --- discrete binary-input memoryless symmetric channels -----------------

class AlphabetTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class DiscreteBms:
    """Transition matrix ``W[x, y]`` and an involutive output permutation
    ``perm`` with W[1, y] == W[0, perm[y]]."""

    W: np.ndarray
    perm: np.ndarray
    tol: float = 1e-12

    def __post_init__(self):
        W = np.asarray(self.W, dtype=np.float64)
        perm = np.asarray(self.perm, dtype=np.int64)
        if W.ndim != 2 or W.shape[0] != 2 or perm.shape != (W.shape[1],):
            raise ValueError("W must have shape (2, |Y|) and perm shape (|Y|,)")
        if np.any(W < 0) or not np.allclose(W.sum(axis=1), 1.0, atol=self.tol, rtol=0):
            raise ValueError("rows of W must be probability vectors")
        if not np.array_equal(perm[perm], np.arange(perm.size)):
            raise ValueError("perm is not an involution")
        if not np.allclose(W[1], W[0, perm], atol=self.tol, rtol=0):
            raise ValueError("W(y|1) != W(perm(y)|0)")
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "perm", perm)

    @property
    def outputs(self) -> int:
        return self.W.shape[1]


def bec(eps: float) -> DiscreteBms:
    """Outputs 0, 1, erasure."""
    W = np.array([[1 - eps, 0.0, eps], [0.0, 1 - eps, eps]])
    return DiscreteBms(W, np.array([1, 0, 2]))


def bsc(p: float) -> DiscreteBms:
    return DiscreteBms(np.array([[1 - p, p], [p, 1 - p]]), np.array([1, 0]))


def capacity(w: DiscreteBms) -> float:
    """Mutual information in bits under a uniform input."""
    W = w.W
    py = 0.5 * (W[0] + W[1])
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(W > 0, W * np.log2(W / py), 0.0)
    return float(0.5 * terms.sum())


MAX_OUTPUTS = 1 << 16


def bms_minus(w: DiscreteBms, max_outputs: int = MAX_OUTPUTS) -> DiscreteBms:
    """W^-((y0, y1) | u0) = 1/2 sum_u1 W(y0 | u0+u1) W(y1 | u1).

    Output (y0, y1) is flattened to y0 * |Y| + y1.
    """
    q = w.outputs
    if q * q > max_outputs:
        raise AlphabetTooLarge(f"minus transform needs {q * q} outputs (limit {max_outputs})")
    W = w.W
    out = np.empty((2, q * q))
    for u0 in (0, 1):
        acc = np.zeros((q, q))
        for u1 in (0, 1):
            acc += np.outer(W[u0 ^ u1], W[u1])
        out[u0] = 0.5 * acc.ravel()
    y0, y1 = np.divmod(np.arange(q * q), q)
    perm = w.perm[y0] * q + y1
    return DiscreteBms(out, perm)


def bms_plus(w: DiscreteBms, max_outputs: int = MAX_OUTPUTS) -> DiscreteBms:
    """W^+((u0, y0, y1) | u1) = 1/2 W(y0 | u0+u1) W(y1 | u1).

    Output (u0, y0, y1) is flattened to (u0 * |Y| + y0) * |Y| + y1.
    """
    q = w.outputs
    if 2 * q * q > max_outputs:
        raise AlphabetTooLarge(f"plus transform needs {2 * q * q} outputs (limit {max_outputs})")
    W = w.W
    out = np.empty((2, 2 * q * q))
    for u1 in (0, 1):
        out[u1] = np.concatenate(
            [0.5 * np.outer(W[u0 ^ u1], W[u1]).ravel() for u0 in (0, 1)]
        )
    idx = np.arange(2 * q * q)
    u0, rest = np.divmod(idx, q * q)
    y0, y1 = np.divmod(rest, q)
    perm = (u0 * q + w.perm[y0]) * q + w.perm[y1]
    return DiscreteBms(out, perm)


def reduce_bms(w: DiscreteBms, decimals: int = 12) -> DiscreteBms:
    """Merge outputs with equal posterior P(x=0 | y); lossless for capacity.

    Zero-probability outputs are dropped.
    """
    W = w.W
    tot = W[0] + W[1]
    keep = tot > 0
    post = np.round(W[0, keep] / tot[keep], decimals)
    groups, inv = np.unique(post, return_inverse=True)
    merged = np.zeros((2, groups.size))
    np.add.at(merged[0], inv, W[0, keep])
    np.add.at(merged[1], inv, W[1, keep])
    # the symmetric partner of posterior p has posterior 1 - p
    partner = np.round(1.0 - groups, decimals)
    perm = np.searchsorted(groups, partner)
    return DiscreteBms(merged, perm, tol=max(w.tol, 10.0 ** (-decimals + 2)))


def as_bec(w: DiscreteBms, decimals: int = 12) -> float:
    """Erasure probability if ``w`` is equivalent to a BEC, else ValueError."""
    r = reduce_bms(w, decimals)
    post = r.W[0] / (r.W[0] + r.W[1])
    erasure = 0.0
    for j, p in enumerate(post):
        if abs(p - 0.5) < 10.0 ** -decimals:
            erasure = float(r.W[0, j])
        elif not (p < 10.0 ** -decimals or p > 1 - 10.0 ** -decimals):
            raise ValueError("channel is not erasure-equivalent")
    return erasure


def random_bms(rng: np.random.Generator, max_outputs: int = 8) -> DiscreteBms:
    """Random BMS channel with at most ``max_outputs`` outputs."""
    pairs = int(rng.integers(1, max_outputs // 2 + 1))
    selfsym = int(rng.integers(0, max_outputs - 2 * pairs + 1))
    q = 2 * pairs + selfsym
    w0 = rng.random(q) + 1e-3
    w0 /= w0.sum()
    perm = np.arange(q)
    for p in range(pairs):
        perm[2 * p], perm[2 * p + 1] = 2 * p + 1, 2 * p
    return DiscreteBms(np.vstack([w0, w0[perm]]), perm)
