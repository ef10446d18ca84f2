"""SC, SCL and exhaustive ML decoders plus CRC handling.

LLR convention: positive favours bit 0. Channel LLRs are clipped to
``+-LLR_CLIP`` before decoding so noiseless inputs stay finite.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Optional

import numpy as np

from . import _kernels
from .polar import CodeSpec, encode, polar_transform

LLR_CLIP = 300.0
DEFAULT_CRC_SEED = 20220613
ML_MAX_K = 20


# --- CRC ---------------------------------------------------------------

@dataclass(frozen=True)
class CrcSpec:
    """``length`` parity bits appended to the message.

    kind ``"random-linear"`` draws a seeded full-rank parity matrix per
    message length; kind ``"polynomial"`` uses the generator polynomial
    ``poly`` written MSB first (``"1011"`` is x^3 + x + 1).
    """

    length: int
    kind: str = "random-linear"
    seed: int = DEFAULT_CRC_SEED
    poly: Optional[str] = None

    def __post_init__(self):
        if self.length < 0:
            raise ValueError("CRC length must be nonnegative")
        if self.kind == "polynomial":
            if not self.poly or set(self.poly) - {"0", "1"} or self.poly[0] != "1":
                raise ValueError(f"bad generator polynomial {self.poly!r}")
            if len(self.poly) - 1 != self.length:
                raise ValueError("polynomial degree must equal the CRC length")
        elif self.kind != "random-linear":
            raise ValueError(f"unknown CRC kind {self.kind!r}")

    def parity_matrix(self, k: int) -> np.ndarray:
        """(length, k) GF(2) matrix P with parity = P @ message."""
        if self.length == 0:
            return np.zeros((0, k), dtype=np.uint8)
        if self.kind == "polynomial":
            return _poly_parity_matrix(self.poly, k)
        rng = np.random.default_rng([self.seed, k])
        target = min(self.length, k)
        while True:
            P = rng.integers(0, 2, (self.length, k), dtype=np.uint8)
            if gf2_rank(P) == target:
                return P


def gf2_rank(M) -> int:
    A = np.array(M, dtype=np.uint8) & 1
    rank = 0
    rows, cols = A.shape
    for c in range(cols):
        pivot = np.nonzero(A[rank:, c])[0]
        if pivot.size == 0:
            continue
        p = rank + pivot[0]
        A[[rank, p]] = A[[p, rank]]
        others = np.nonzero(A[:, c])[0]
        others = others[others != rank]
        A[others] ^= A[rank]
        rank += 1
        if rank == rows:
            break
    return rank


def _poly_parity_matrix(poly: str, k: int) -> np.ndarray:
    # column j holds x^(k-1-j+deg) mod g(x), coefficients MSB first
    deg = len(poly) - 1
    g = int(poly, 2)
    P = np.zeros((deg, k), dtype=np.uint8)
    r = 1 << deg  # x^deg, reduced below
    rem = []
    for _ in range(k):
        if r >> deg:
            r ^= g
        rem.append(r)
        r <<= 1
    for j in range(k):
        val = rem[k - 1 - j]
        P[:, j] = [(val >> (deg - 1 - b)) & 1 for b in range(deg)]
    return P


def crc_attach(message, crc: CrcSpec) -> np.ndarray:
    msg = np.asarray(message, dtype=np.uint8)
    if crc.length == 0:
        return msg.copy()
    P = crc.parity_matrix(msg.shape[-1])
    parity = (msg.astype(np.int64) @ P.T.astype(np.int64)) & 1
    return np.concatenate([msg, parity.astype(np.uint8)], axis=-1)


def crc_check(bits, crc: CrcSpec) -> bool:
    b = np.asarray(bits, dtype=np.uint8)
    k = b.shape[-1] - crc.length
    if k < 0:
        raise ValueError("bit vector shorter than the CRC")
    return bool(np.array_equal(crc_attach(b[:k], crc), b))


# --- results -----------------------------------------------------------

@dataclass
class DecodeResult:
    message: np.ndarray
    u_hat: np.ndarray
    success: bool = True
    best_metric: float = float("nan")


def _prepare(llr, spec: CodeSpec) -> np.ndarray:
    llr = np.asarray(llr, dtype=np.float64)
    if llr.shape[-1] != spec.n:
        raise ValueError(f"LLR length {llr.shape[-1]} != code length {spec.n}")
    return np.clip(llr, -LLR_CLIP, LLR_CLIP)


def boxplus(a, b, exact: bool = True):
    """Check-node combination 2 atanh(tanh(a/2) tanh(b/2)), log-domain stable."""
    r = np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))
    if exact:
        r = r + np.log1p(np.exp(-np.abs(a + b))) - np.log1p(np.exp(-np.abs(a - b)))
    return r


# --- successive cancellation -------------------------------------------

def sc_decode_batch(llr, spec: CodeSpec, exact: bool = True, genie=None):
    """Recursive SC on a (B, n) batch.

    Returns ``(u_hat, leaf_llrs)``. With ``genie`` (a (B, n) array of true
    u-bits) each bit is decided from its own LLR but the true value is fed
    forward, which is the genie-aided estimate of each synthetic channel.
    """
    llr = _prepare(llr, spec)
    if llr.ndim == 1:
        llr = llr[None, :]
    B, n = llr.shape
    mask = spec.info_mask
    u = np.zeros((B, n), dtype=np.uint8)
    leaves = np.zeros((B, n))
    g = None if genie is None else np.asarray(genie, dtype=np.uint8)

    def rec(lam, lo, hi):
        if genie is None and not mask[lo:hi].any():
            return np.zeros((B, hi - lo), dtype=np.uint8)
        if hi - lo == 1:
            leaves[:, lo] = lam[:, 0]
            if g is not None:
                u[:, lo] = g[:, lo]
            elif mask[lo]:
                u[:, lo] = lam[:, 0] < 0
            return u[:, lo:hi].copy()
        h = (hi - lo) // 2
        a, b = lam[:, :h], lam[:, h:]
        x1 = rec(boxplus(a, b, exact), lo, lo + h)
        x2 = rec(b + (1.0 - 2.0 * x1) * a, lo + h, hi)
        return np.concatenate([x1 ^ x2, x2], axis=1)

    rec(llr, 0, n)
    return u, leaves


def sc_decode(llr, spec: CodeSpec, exact: bool = True) -> DecodeResult:
    u, _ = sc_decode_batch(llr, spec, exact)
    u = u[0]
    return DecodeResult(message=u[list(spec.info_set)], u_hat=u)


# --- successive cancellation list --------------------------------------

def scl_decode_batch(llr, spec: CodeSpec, L: int, crc: Optional[CrcSpec] = None,
                     exact: bool = True):
    """Returns ``(u_hat (B, n), success (B,), metric (B,))``.

    With a CRC, the last ``crc.length`` entries of ``spec.info_set`` are the
    parity positions.
    """
    if L < 1:
        raise ValueError("list size must be >= 1")
    llr = np.ascontiguousarray(_prepare(llr, spec))
    if llr.ndim == 1:
        llr = llr[None, :]
    lc = 0 if crc is None else crc.length
    if lc > spec.k:
        raise ValueError("CRC longer than the information set")
    parity = (np.zeros((0, spec.k), dtype=np.uint8) if lc == 0
              else crc.parity_matrix(spec.k - lc))
    B = llr.shape[0]
    out_u = np.zeros((B, spec.n), dtype=np.uint8)
    ok = np.zeros(B, dtype=np.bool_)
    metric = np.zeros(B)
    _kernels.scl_batch(llr, spec.info_mask, int(L), np.ascontiguousarray(parity),
                       bool(exact), out_u, ok, metric)
    return out_u, ok, metric


def scl_decode(llr, spec: CodeSpec, L: int, crc: Optional[CrcSpec] = None,
               exact: bool = True) -> DecodeResult:
    u, ok, metric = scl_decode_batch(llr, spec, L, crc, exact)
    info = list(spec.info_set)
    k = spec.k - (0 if crc is None else crc.length)
    return DecodeResult(message=u[0, info][:k], u_hat=u[0], success=bool(ok[0]),
                        best_metric=float(metric[0]))


def scl_list(llr, spec: CodeSpec, L: int, exact: bool = True):
    """Final candidate list ``(u_hats, metrics)`` sorted by metric."""
    if L < 1:
        raise ValueError("list size must be >= 1")
    llr = np.ascontiguousarray(_prepare(llr, spec))
    return _kernels.scl_list(llr, spec.info_mask, int(L), bool(exact))


# --- maximum likelihood ------------------------------------------------

def codebook(spec: CodeSpec) -> tuple[np.ndarray, np.ndarray]:
    """All 2^k messages in lexicographic order and their codewords."""
    if spec.k > ML_MAX_K:
        raise ValueError(f"k={spec.k} exceeds the exhaustive-search guard ({ML_MAX_K})")
    msgs = np.array(list(product((0, 1), repeat=spec.k)), dtype=np.uint8).reshape(-1, spec.k)
    return msgs, encode(msgs, spec)


def correlation(codewords, llr) -> np.ndarray:
    """sum_j (1 - 2 x_j) llr_j; larger means more likely."""
    return (1.0 - 2.0 * np.asarray(codewords, dtype=np.float64)) @ np.asarray(llr, dtype=np.float64)


def ml_decode(llr, spec: CodeSpec) -> DecodeResult:
    llr = _prepare(llr, spec)
    msgs, words = codebook(spec)
    scores = correlation(words, llr)
    best = int(np.argmax(scores))  # first maximum = lexicographically smallest message
    u = polar_transform(words[best])
    return DecodeResult(message=msgs[best], u_hat=u, best_metric=float(scores[best]))
