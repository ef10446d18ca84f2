"""GF(2) polar transform, code specifications and index arithmetic.

Indexing follows the natural binary expansion of the row index (no
bit-reversal): the most significant bit of ``i`` selects the first
channel transform applied to the physical channel.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Iterable, Sequence

import numpy as np


def _log2_exact(n: int) -> int:
    if n < 1 or n & (n - 1):
        raise ValueError(f"length {n} is not a power of two")
    return n.bit_length() - 1


@dataclass(frozen=True)
class CodeSpec:
    """An (n, k) code defined by its information index set."""

    n: int
    info_set: tuple[int, ...]
    m: int = field(init=False)
    k: int = field(init=False)

    def __post_init__(self):
        m = _log2_exact(self.n)
        info = tuple(sorted(int(i) for i in self.info_set))
        if len(set(info)) != len(info):
            raise ValueError("duplicate indices in info_set")
        if info and (info[0] < 0 or info[-1] >= self.n):
            raise ValueError(f"info_set indices must lie in [0, {self.n})")
        object.__setattr__(self, "info_set", info)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "k", len(info))

    @classmethod
    def from_indices(cls, n: int, indices: Iterable[int]) -> "CodeSpec":
        return cls(n, tuple(indices))

    @property
    def frozen_set(self) -> tuple[int, ...]:
        info = set(self.info_set)
        return tuple(i for i in range(self.n) if i not in info)

    @property
    def info_mask(self) -> np.ndarray:
        mask = np.zeros(self.n, dtype=np.bool_)
        mask[list(self.info_set)] = True
        return mask

    @property
    def rate(self) -> float:
        return self.k / self.n


def wt(i: int) -> int:
    """Hamming weight of the binary expansion of ``i``."""
    if i < 0:
        raise ValueError("wt is defined for nonnegative integers")
    return bin(i).count("1")


def polar_transform(u) -> np.ndarray:
    """Return ``u @ G_m`` over GF(2) with ``G_m = [[1,0],[1,1]]^{(x)m}``.

    Accepts a 1-D bit vector or a 2-D batch (one frame per row); the
    last axis must have power-of-two length.
    """
    x = np.array(u, dtype=np.uint8, copy=True)
    n = x.shape[-1]
    _log2_exact(n)
    lead = x.shape[:-1]
    step = 1
    # butterfly: at each stage the first element of every pair absorbs the second
    while step < n:
        v = x.reshape(*lead, n // (2 * step), 2, step)
        v[..., 0, :] ^= v[..., 1, :]
        step *= 2
    return x


def encode(message_bits, spec: CodeSpec) -> np.ndarray:
    """Place message bits on ``spec.info_set`` (ascending) and transform."""
    msg = np.asarray(message_bits, dtype=np.uint8)
    if msg.shape[-1] != spec.k:
        raise ValueError(f"message has {msg.shape[-1]} bits, code dimension is {spec.k}")
    u = np.zeros(msg.shape[:-1] + (spec.n,), dtype=np.uint8)
    u[..., list(spec.info_set)] = msg
    return polar_transform(u)


def index_to_sign_sequence(i: int, m: int) -> str:
    """Sign string of index ``i``: '-' for a 0 digit, '+' for a 1, MSB first."""
    if m < 0 or not 0 <= i < (1 << m):
        raise ValueError(f"index {i} out of range for m={m}")
    return "".join("+" if (i >> (m - 1 - j)) & 1 else "-" for j in range(m))


def sign_sequence_to_index(s: Sequence[str]) -> int:
    i = 0
    for c in s:
        if c not in "+-":
            raise ValueError(f"bad sign symbol {c!r}")
        i = 2 * i + (c == "+")
    return i


def rm_info_set(m: int, r: int) -> CodeSpec:
    """Reed-Muller RM(r, m): rows of G_m whose index has weight >= m - r."""
    if m < 0 or not 0 <= r <= m:
        raise ValueError(f"need 0 <= r <= m, got r={r}, m={m}")
    n = 1 << m
    spec = CodeSpec(n, tuple(i for i in range(n) if wt(i) >= m - r))
    assert spec.k == sum(comb(m, j) for j in range(r + 1))
    return spec


def rm_dimension(m: int, r: int) -> int:
    return sum(comb(m, j) for j in range(r + 1))
