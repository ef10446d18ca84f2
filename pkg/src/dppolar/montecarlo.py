"""Chunked, reproducible Monte Carlo frame-error counting.

Trial ``t`` always draws its message and noise from stream ``t`` of the
(seed, domain) key, and chunks are reduced in index order, so counts do
not depend on the number of workers.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .channel import draw_trials
from .decode import CrcSpec, crc_attach, sc_decode_batch, scl_decode_batch
from .polar import CodeSpec, encode

DEFAULT_CHUNK = 1000


def decode_frames(spec: CodeSpec, L: int, msgs: np.ndarray, noise: np.ndarray, sigma: float,
                  crc: Optional[CrcSpec] = None, exact: bool = True) -> np.ndarray:
    """Boolean frame-error flags for a block of pre-drawn trials.

    L == 1 without CRC uses the SC decoder; otherwise SCL.
    """
    bits = msgs if crc is None or crc.length == 0 else crc_attach(msgs, crc)
    x = encode(bits, spec)
    y = (1.0 - 2.0 * x) + sigma * noise
    llr = 2.0 * y / sigma ** 2
    if L == 1 and (crc is None or crc.length == 0):
        u, _ = sc_decode_batch(llr, spec, exact)
    else:
        u, _, _ = scl_decode_batch(llr, spec, L, crc, exact)
    k = msgs.shape[1]
    dec = u[:, list(spec.info_set)][:, :k]
    return np.any(dec != msgs, axis=1)


@dataclass
class ErrorCount:
    trials: int
    errors: int

    @property
    def fer(self) -> float:
        return self.errors / self.trials if self.trials else 0.0


def run_chunked(count_chunk: Callable[[int, int], int], trials: int, *,
                chunk: int = DEFAULT_CHUNK, min_errors: Optional[int] = None,
                min_trials: int = 0, workers: int = 1) -> ErrorCount:
    """Evaluate ``count_chunk(start, size)`` over fixed chunks of ``trials``.

    Stops after the first chunk (in index order) at which ``min_errors``
    errors and ``min_trials`` trials have both been reached. Chunks
    computed speculatively past that point are discarded.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    bounds = [(s, min(chunk, trials - s)) for s in range(0, trials, chunk)]
    done = ErrorCount(0, 0)

    def stop():
        return (min_errors is not None and done.errors >= min_errors
                and done.trials >= min_trials)

    if workers <= 1:
        for s, c in bounds:
            done.errors += count_chunk(s, c)
            done.trials += c
            if stop():
                break
        return done
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for w in range(0, len(bounds), workers):
            wave = bounds[w:w + workers]
            results = list(pool.map(lambda b: count_chunk(*b), wave))
            for (s, c), e in zip(wave, results):
                done.errors += e
                done.trials += c
                if stop():
                    return done
    return done


def count_errors(spec: CodeSpec, L: int, sigma: float, trials: int, seed: int, *,
                 crc: Optional[CrcSpec] = None, domain: Sequence[int] = (), exact: bool = True,
                 chunk: int = DEFAULT_CHUNK, min_errors: Optional[int] = None,
                 min_trials: int = 0, workers: int = 1) -> ErrorCount:
    k = spec.k - (0 if crc is None else crc.length)
    domain = tuple(domain)

    def one(start, size):
        msgs, noise = draw_trials(seed, start, size, spec.n, k, domain)
        return int(decode_frames(spec, L, msgs, noise, sigma, crc, exact).sum())

    return run_chunked(one, trials, chunk=chunk, min_errors=min_errors,
                       min_trials=min_trials, workers=workers)


def count_errors_shared(specs: Sequence[CodeSpec], L: int, sigma: float, trials: int, seed: int,
                        *, domain: Sequence[int] = (), exact: bool = True,
                        chunk: int = DEFAULT_CHUNK, stop_errors: Optional[int] = None,
                        workers: int = 1) -> list[ErrorCount]:
    """Error counts for several same-(n, k) codes on common random numbers.

    Each chunk of trials is drawn once and decoded by every code still
    running; a code stops after the chunk where it reaches ``stop_errors``.
    """
    if not specs:
        return []
    n, k = specs[0].n, specs[0].k
    if any(s.n != n or s.k != k for s in specs):
        raise ValueError("shared evaluation needs codes of equal (n, k)")
    if trials < 1:
        raise ValueError("need at least one trial")
    domain = tuple(domain)
    counts = [ErrorCount(0, 0) for _ in specs]
    bounds = [(s, min(chunk, trials - s)) for s in range(0, trials, chunk)]

    def one(b, active):
        msgs, noise = draw_trials(seed, b[0], b[1], n, k, domain)
        return [int(decode_frames(specs[j], L, msgs, noise, sigma, exact=exact).sum())
                for j in active]

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        w = 0
        while w < len(bounds):
            active = [j for j, c in enumerate(counts)
                      if stop_errors is None or c.errors < stop_errors]
            if not active:
                break
            wave = bounds[w:w + max(1, workers)]
            results = list(pool.map(lambda b: one(b, active), wave))
            for (s, c), errs in zip(wave, results):
                for j, e in zip(active, errs):
                    if stop_errors is not None and counts[j].errors >= stop_errors:
                        continue
                    counts[j].errors += e
                    counts[j].trials += c
            w += len(wave)
    return counts
