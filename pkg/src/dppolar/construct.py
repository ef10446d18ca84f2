"""Code construction: the reliability-ranking baseline and the
dynamic-programming construction driven by a minus array.

A minus array maps (n, k) to the number of information bits placed in
the first half (the minus branch) of a length-n code of dimension k.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .channel import AwgnChannel, draw_trials
from .decode import sc_decode_batch
from .montecarlo import count_errors, count_errors_shared
from .polar import CodeSpec, _log2_exact, encode

HEADER_PREFIX = "# minus-array"
FORMAT_VERSION = 1
SHIPPED_L32 = ("minus_L32_n2-256.tsv", "minus_L32_n512.tsv", "minus_L32_n1024.tsv")
EXAMPLE_FILE = "minus_example_n16.tsv"


class MinusArrayError(ValueError):
    """Malformed or invalid minus-array data."""


class IncompleteArrayError(MinusArrayError, KeyError):
    pass


def minus_range(n: int, k: int) -> tuple[int, int]:
    """Inclusive bounds on minus(n, k)."""
    return max(0, k - n // 2), min(k, n // 2)


@dataclass
class MinusArray:
    L: int
    entries: dict = field(default_factory=dict)
    label: str = ""

    def __getitem__(self, nk: tuple[int, int]) -> int:
        try:
            return self.entries[nk]
        except KeyError:
            raise IncompleteArrayError(f"minus array has no entry for (n, k) = {nk}") from None

    def __setitem__(self, nk: tuple[int, int], value: int):
        n, k = nk
        lo, hi = minus_range(n, k)
        if not lo <= value <= hi:
            raise MinusArrayError(f"minus({n},{k}) = {value} outside [{lo}, {hi}]")
        self.entries[(n, k)] = int(value)

    def __contains__(self, nk) -> bool:
        return nk in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def lengths(self) -> list[int]:
        return sorted({n for n, _ in self.entries})

    @property
    def max_n(self) -> int:
        return max(self.lengths, default=0)

    def row(self, n: int) -> list[int]:
        return [self[n, k] for k in range(n + 1)]

    def validate(self, *, chain: bool = True, partial_last: bool = False) -> None:
        """Range check every entry, require full k-coverage per length
        (except the last length when ``partial_last``), and optionally a
        contiguous 2, 4, ..., max_n chain."""
        for (n, k), v in self.entries.items():
            try:
                _log2_exact(n)
            except ValueError:
                raise MinusArrayError(f"length {n} is not a power of two") from None
            if n < 2 or not 0 <= k <= n:
                raise MinusArrayError(f"entry (n={n}, k={k}) out of bounds")
            lo, hi = minus_range(n, k)
            if not lo <= v <= hi:
                raise MinusArrayError(f"range violation: minus({n},{k}) = {v} not in [{lo}, {hi}]")
        ns = self.lengths
        for n in ns:
            missing = [k for k in range(n + 1) if (n, k) not in self.entries]
            if missing and not (partial_last and n == ns[-1]):
                raise MinusArrayError(f"gap in coverage: n={n} lacks k={missing[:5]}")
        if chain and ns:
            expect = [2 ** j for j in range(1, _log2_exact(ns[-1]) + 1)]
            if ns != expect:
                raise MinusArrayError(f"lengths {ns} do not form the chain 2..{ns[-1]}")

    def merged(self, other: "MinusArray") -> "MinusArray":
        if other.L != self.L:
            raise MinusArrayError(f"cannot merge arrays for L={self.L} and L={other.L}")
        out = MinusArray(self.L, dict(self.entries), self.label)
        for nk, v in other.entries.items():
            if nk in out.entries and out.entries[nk] != v:
                raise MinusArrayError(f"conflicting values for {nk}")
            out.entries[nk] = v
        return out

    def restricted(self, max_n: int) -> "MinusArray":
        return MinusArray(self.L, {nk: v for nk, v in self.entries.items() if nk[0] <= max_n},
                          self.label)


# --- persistence -------------------------------------------------------

def format_minus_array(arr: MinusArray, progress: Optional[tuple[int, int]] = None) -> str:
    lines = [f"{HEADER_PREFIX} L={arr.L} version={FORMAT_VERSION}"
             + (f" label={arr.label}" if arr.label else "")]
    for (n, k) in sorted(arr.entries):
        lines.append(f"{n}\t{k}\t{arr.entries[n, k]}")
    if progress is not None:
        lines.append(f"# progress n={progress[0]} k={progress[1]}")
    return "\n".join(lines) + "\n"


def save_minus_array(arr: MinusArray, path, progress: Optional[tuple[int, int]] = None) -> None:
    """Write atomically (temp file + rename)."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(format_minus_array(arr, progress))
    os.replace(tmp, path)


def parse_minus_array(text: str, source: str = "<string>") -> tuple[MinusArray, Optional[tuple[int, int]]]:
    lines = text.splitlines()
    if not lines or not lines[0].startswith(HEADER_PREFIX):
        raise MinusArrayError(f"{source}: missing '{HEADER_PREFIX}' header")
    meta = dict(tok.split("=", 1) for tok in lines[0][len(HEADER_PREFIX):].split() if "=" in tok)
    try:
        L = int(meta["L"])
        version = int(meta.get("version", FORMAT_VERSION))
    except (KeyError, ValueError):
        raise MinusArrayError(f"{source}: header needs L=<int>") from None
    if version != FORMAT_VERSION:
        raise MinusArrayError(f"{source}: unsupported version {version}")
    if L < 1:
        raise MinusArrayError(f"{source}: list size must be positive")
    arr = MinusArray(L, label=meta.get("label", ""))
    progress = None
    prev = None
    for lineno, line in enumerate(lines[1:], start=2):
        s = line.strip()
        if not s:
            continue
        if s.startswith("#"):
            if s.startswith("# progress"):
                kv = dict(tok.split("=", 1) for tok in s.split()[2:])
                progress = (int(kv["n"]), int(kv["k"]))
            continue
        parts = s.split("\t") if "\t" in s else s.split()
        try:
            n, k, v = (int(p) for p in parts)
        except ValueError:
            raise MinusArrayError(f"{source}:{lineno}: expected '<n> <k> <minus>', got {s!r}") from None
        if prev is not None and (n, k) <= prev:
            raise MinusArrayError(f"{source}:{lineno}: rows not sorted by (n, k)")
        prev = (n, k)
        arr.entries[(n, k)] = v
    return arr, progress


def load_minus_array(*paths, chain: bool = True) -> MinusArray:
    """Load and merge one or more minus-array files, then validate."""
    if not paths:
        raise ValueError("no paths given")
    arr = None
    for p in paths:
        part, progress = parse_minus_array(Path(p).read_text(), str(p))
        if progress is not None:
            raise MinusArrayError(f"{p}: is an unfinished checkpoint; resume it with dp-build")
        arr = part if arr is None else arr.merged(part)
    arr.validate(chain=chain)
    return arr


def data_path(name: str) -> Path:
    return Path(str(resources.files("dppolar") / "data" / name))


def shipped_minus_array(max_n: int = 1024) -> MinusArray:
    """The published L = 32 array for n = 2 .. 1024."""
    files = [SHIPPED_L32[0]] + [f for f, n in zip(SHIPPED_L32[1:], (512, 1024)) if n <= max_n]
    arr = load_minus_array(*(data_path(f) for f in files))
    return arr.restricted(max_n)


def example_minus_array() -> MinusArray:
    """Small illustrative array for n <= 16 (not the L = 32 table)."""
    return load_minus_array(data_path(EXAMPLE_FILE))


# --- construction from a minus array -----------------------------------

def minus_construct(n: int, k: int, arr: MinusArray) -> CodeSpec:
    """Information set obtained by recursively splitting k with the array."""
    _log2_exact(n)
    if not 0 <= k <= n:
        raise ValueError(f"dimension {k} out of range for length {n}")

    def split(length, dim, offset):
        if length == 1:
            return [offset] if dim == 1 else []
        km = arr[length, dim]
        lo, hi = minus_range(length, dim)
        if not lo <= km <= hi:
            raise MinusArrayError(f"minus({length},{dim}) = {km} outside [{lo}, {hi}]")
        half = length // 2
        return split(half, km, offset) + split(half, dim - km, offset + half)

    return CodeSpec(n, tuple(split(n, k, 0)))


def combine_halves(first: CodeSpec, second: CodeSpec) -> CodeSpec:
    """Plotkin combination: ``first`` on the minus branch, ``second`` shifted."""
    if first.n != second.n:
        raise ValueError("halves must have equal length")
    h = first.n
    return CodeSpec(2 * h, first.info_set + tuple(i + h for i in second.info_set))


# --- dynamic-programming training --------------------------------------

@dataclass
class TrainingConfig:
    list_size: int = 32
    trials: int = 100_000
    ebn0_db: float = 2.0
    sigma: Optional[float] = None
    window: tuple[int, int] = (-2, 4)
    full_range_max_n: int = 16
    stop_errors: Optional[int] = None
    seed: int = 2022
    chunk: int = 2000
    workers: int = 1
    exact: bool = True

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.list_size < 1:
            raise ValueError("list size must be >= 1")
        if self.window[0] > self.window[1]:
            raise ValueError("empty search window")

    def sigma_for(self, n: int, k: int) -> float:
        if self.sigma is not None:
            return self.sigma
        # a rate-0 code carries nothing; any finite noise level works
        rate = k / n if k else 1.0 / n
        return AwgnChannel(self.ebn0_db, rate).sigma


def candidate_values(n: int, k: int, prev: Optional[int], cfg: TrainingConfig) -> list[int]:
    """Values of minus(n, k) to test: the whole range for short codes or
    k == 0, otherwise the window around minus(n, k-1), clamped."""
    lo, hi = minus_range(n, k)
    if n <= cfg.full_range_max_n or prev is None:
        return list(range(lo, hi + 1))
    a, b = prev + cfg.window[0], prev + cfg.window[1]
    vals = [v for v in range(a, b + 1) if lo <= v <= hi]
    if not vals:
        # window entirely outside the range: fall back to the nearest bound
        vals = [lo if b < lo else hi]
    return vals


def candidate_spec(n: int, k: int, k_minus: int, arr: MinusArray) -> CodeSpec:
    half = n // 2
    return combine_halves(minus_construct(half, k_minus, arr),
                          minus_construct(half, k - k_minus, arr))


def decoding_error(spec: CodeSpec, cfg: TrainingConfig) -> float:
    """Monte Carlo FER of ``spec`` under SCL(cfg.list_size) at cfg's channel.

    Streams are keyed by (n, k), so every code of the same (n, k) sees the
    same noise and messages.
    """
    if spec.k == 0:
        return 0.0
    res = count_errors(spec, cfg.list_size, cfg.sigma_for(spec.n, spec.k), cfg.trials, cfg.seed,
                       domain=(spec.n, spec.k), exact=cfg.exact, chunk=cfg.chunk,
                       min_errors=cfg.stop_errors, workers=cfg.workers)
    return res.fer


def evaluate_candidates(n: int, k: int, values: Sequence[int], arr: MinusArray,
                        cfg: TrainingConfig) -> list[float]:
    specs = [candidate_spec(n, k, v, arr) for v in values]
    if k == 0:
        return [0.0] * len(specs)
    counts = count_errors_shared(specs, cfg.list_size, cfg.sigma_for(n, k), cfg.trials, cfg.seed,
                                 domain=(n, k), exact=cfg.exact, chunk=cfg.chunk,
                                 stop_errors=cfg.stop_errors, workers=cfg.workers)
    return [c.fer for c in counts]


def first_minimizer(values: Sequence[int], errors: Sequence[float]) -> int:
    """First value (in the given ascending order) with strictly smallest error."""
    best, best_err = values[0], math.inf
    for v, e in zip(values, errors):
        if e < best_err:
            best, best_err = v, e
    return best


def calculate_minus_array(N: int, cfg: TrainingConfig, *, checkpoint=None,
                          start: Optional[MinusArray] = None,
                          on_entry: Optional[Callable[[int, int, int, list, list], None]] = None
                          ) -> MinusArray:
    """Fill minus(n, k) for n = 2 .. N and k = 0 .. n in DP order.

    With ``checkpoint`` the partial array is written after every entry and
    an existing checkpoint is resumed.
    """
    if _log2_exact(N) < 1:
        raise ValueError("N must be a power of two >= 2")
    arr = MinusArray(cfg.list_size) if start is None else start
    if checkpoint is not None and Path(checkpoint).exists():
        loaded, _ = parse_minus_array(Path(checkpoint).read_text(), str(checkpoint))
        loaded.validate(partial_last=True)
        if loaded.L != cfg.list_size:
            raise MinusArrayError(f"checkpoint is for L={loaded.L}, config has L={cfg.list_size}")
        arr = loaded
    n = 2
    while n <= N:
        for k in range(n + 1):
            if (n, k) in arr:
                continue
            prev = arr[n, k - 1] if k > 0 else None
            values = candidate_values(n, k, prev, cfg)
            if len(values) == 1:
                errors = [float("nan")]
                choice = values[0]
            else:
                errors = evaluate_candidates(n, k, values, arr, cfg)
                choice = first_minimizer(values, errors)
            arr[n, k] = choice
            if checkpoint is not None:
                done = k == n and n == N
                save_minus_array(arr, checkpoint, None if done else (n, k))
            if on_entry is not None:
                on_entry(n, k, choice, values, errors)
        n *= 2
    return arr


# --- standard construction ---------------------------------------------

_GA_A, _GA_B, _GA_C = 0.4527, 0.86, 0.0218


def _ln_phi(x: float) -> float:
    """log of the Gaussian-approximation function phi (two-piece form)."""
    if x <= 0:
        return 0.0
    if x < 10.0:
        return -_GA_A * x ** _GA_B + _GA_C
    return 0.5 * math.log(math.pi / x) - x / 4.0 + math.log1p(-10.0 / (7.0 * x))


_LN_PHI_10 = _ln_phi(10.0)


def _ln_phi_inv(y: float) -> float:
    if y >= _GA_C:
        return 0.0
    if y >= _LN_PHI_10:
        return ((_GA_C - y) / _GA_A) ** (1.0 / _GA_B)
    hi = 20.0
    while _ln_phi(hi) > y:
        hi *= 2.0
    return brentq(lambda x: _ln_phi(x) - y, 10.0, hi, xtol=1e-12, rtol=1e-14)


def ga_minus(mean: float) -> float:
    """Mean LLR after the check-node transform: phi^-1(1 - (1 - phi(m))^2)."""
    lp = _ln_phi(mean)
    p = math.exp(lp)
    # log(1 - (1-p)^2) = log p + log(2 - p)
    return _ln_phi_inv(lp + math.log(2.0 - p))


def ga_means(n: int, ch: AwgnChannel) -> np.ndarray:
    """Mean LLR of every synthetic channel, natural (MSB-first) indexing."""
    m = _log2_exact(n)
    means = np.array([2.0 / ch.variance])
    for _ in range(m):
        nxt = np.empty(2 * means.size)
        nxt[0::2] = [ga_minus(v) for v in means]
        nxt[1::2] = 2.0 * means
        means = nxt
    return means


def genie_error_counts(n: int, ch: AwgnChannel, trials: int, seed: int = 0) -> np.ndarray:
    """Per-index decision errors of genie-aided SC over ``trials`` frames."""
    full = CodeSpec(n, tuple(range(n)))
    errs = np.zeros(n, dtype=np.int64)
    chunk = 2000
    for start in range(0, trials, chunk):
        size = min(chunk, trials - start)
        u, noise = draw_trials(seed, start, size, n, n, domain=(n, 0x6E1E))
        y = (1.0 - 2.0 * encode(u, full)) + ch.sigma * noise
        _, leaves = sc_decode_batch(2.0 * y / ch.variance, full, genie=u)
        errs += ((leaves < 0).astype(np.uint8) != u).sum(axis=0)
    return errs


def rank_select(scores: Iterable[float], k: int) -> tuple[int, ...]:
    """Indices of the k largest scores; ties go to the larger index."""
    scores = np.asarray(list(scores), dtype=np.float64)
    idx = np.arange(scores.size)
    order = np.lexsort((-idx, -scores))
    return tuple(sorted(int(i) for i in order[:k]))


def standard_construct(n: int, k: int, ch: AwgnChannel, method: str = "gaussian-approx",
                       trials: int = 10_000, seed: int = 0) -> CodeSpec:
    """Pick the k most reliable synthetic channels.

    ``gaussian-approx`` ranks by density-evolution mean LLR;
    ``genie-mc`` by the error count of genie-aided SC over ``trials`` frames.
    """
    _log2_exact(n)
    if not 0 <= k <= n:
        raise ValueError(f"dimension {k} out of range for length {n}")
    if method in ("gaussian-approx", "ga"):
        scores = ga_means(n, ch)
    elif method in ("genie-mc", "mc"):
        if trials < 1:
            raise ValueError("genie-mc needs trials >= 1")
        scores = -genie_error_counts(n, ch, trials, seed).astype(np.float64)
    else:
        raise ValueError(f"unknown construction method {method!r}")
    return CodeSpec(n, rank_select(scores, k))
