"""FER sweep campaigns and CSV reports."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from statsmodels.stats.proportion import proportion_confint

from .channel import AwgnChannel
from .construct import load_minus_array, minus_construct, shipped_minus_array, standard_construct
from .decode import CrcSpec
from .montecarlo import DEFAULT_CHUNK, count_errors
from .polar import CodeSpec, rm_info_set

CSV_COLUMNS = ("ebn0_db", "n", "k", "L", "crc_len", "trials", "frame_errors", "fer",
               "ci95_low", "ci95_high", "seed", "construction")
CONSTRUCTIONS = ("standard", "dp", "rm", "explicit")


class ConfigError(ValueError):
    pass


@dataclass
class SimConfig:
    n: int
    k: int
    construction: str = "standard"
    list_size: int = 32
    crc: Optional[CrcSpec] = None
    ebn0_db: Sequence[float] = (2.0,)
    trials: int = 10_000
    min_errors: Optional[int] = None
    min_trials: int = 1000
    seed: int = 1
    workers: int = 1
    arrays: Sequence[str] = ()
    info_set: Optional[Sequence[int]] = None
    rm_r: Optional[int] = None
    method: str = "gaussian-approx"
    design_ebn0_db: float = 2.0
    chunk: int = DEFAULT_CHUNK
    exact: bool = True

    @property
    def crc_len(self) -> int:
        return 0 if self.crc is None else self.crc.length

    def validate(self) -> None:
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not list(self.ebn0_db):
            raise ConfigError("at least one Eb/N0 point is required")
        if self.construction not in CONSTRUCTIONS:
            raise ConfigError(f"unknown construction {self.construction!r}")
        if self.list_size < 1:
            raise ConfigError("list size must be >= 1")
        if self.k + self.crc_len > self.n or self.k < 0:
            raise ConfigError(f"k + crc_len = {self.k + self.crc_len} out of range for n = {self.n}")


def resolve_spec(cfg: SimConfig) -> CodeSpec:
    """Information set of size k + crc_len for the configured construction."""
    kk = cfg.k + cfg.crc_len
    if cfg.construction == "standard":
        ch = AwgnChannel(cfg.design_ebn0_db, max(kk, 1) / cfg.n)
        return standard_construct(cfg.n, kk, ch, cfg.method)
    if cfg.construction == "dp":
        arr = load_minus_array(*cfg.arrays) if cfg.arrays else shipped_minus_array()
        if cfg.n > arr.max_n:
            raise ConfigError(f"minus array covers n <= {arr.max_n}, need n = {cfg.n}")
        return minus_construct(cfg.n, kk, arr)
    if cfg.construction == "rm":
        if cfg.rm_r is None:
            raise ConfigError("rm construction needs r")
        spec = rm_info_set(int(np.log2(cfg.n)), cfg.rm_r)
        if spec.k != kk:
            raise ConfigError(f"RM(r={cfg.rm_r}) has dimension {spec.k}, not {kk}")
        return spec
    if cfg.info_set is None:
        raise ConfigError("explicit construction needs an index list")
    spec = CodeSpec(cfg.n, tuple(cfg.info_set))
    if spec.k != kk:
        raise ConfigError(f"explicit index list has {spec.k} entries, expected {kk}")
    return spec


def wilson_interval(errors: int, trials: int, alpha: float = 0.05) -> tuple[float, float]:
    lo, hi = proportion_confint(errors, trials, alpha=alpha, method="wilson")
    return max(0.0, float(lo)), min(1.0, float(hi))


@dataclass
class SimRow:
    ebn0_db: float
    n: int
    k: int
    L: int
    crc_len: int
    trials: int
    frame_errors: int
    fer: float
    ci95_low: float
    ci95_high: float
    seed: int
    construction: str


@dataclass
class SimReport:
    rows: list[SimRow] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow([f"{r.ebn0_db:g}", r.n, r.k, r.L, r.crc_len, r.trials, r.frame_errors,
                        f"{r.fer:.6g}", f"{r.ci95_low:.6g}", f"{r.ci95_high:.6g}", r.seed,
                        r.construction])
        return buf.getvalue()


def point_domain(cfg: SimConfig, ebn0: float) -> tuple[int, ...]:
    # same (n, k, crc, Eb/N0) => same noise, whatever the construction
    return (cfg.n, cfg.k, cfg.crc_len, int(np.float64(ebn0).view(np.uint64)))


def run_fer_sweep(cfg: SimConfig, spec: Optional[CodeSpec] = None) -> SimReport:
    cfg.validate()
    spec = resolve_spec(cfg) if spec is None else spec
    report = SimReport()
    for ebn0 in cfg.ebn0_db:
        if cfg.k == 0:
            trials, errors = cfg.trials, 0
        else:
            sigma = AwgnChannel(float(ebn0), cfg.k / cfg.n).sigma
            res = count_errors(spec, cfg.list_size, sigma, cfg.trials, cfg.seed,
                               crc=cfg.crc, domain=point_domain(cfg, ebn0), exact=cfg.exact,
                               chunk=cfg.chunk, min_errors=cfg.min_errors,
                               min_trials=cfg.min_trials, workers=cfg.workers)
            trials, errors = res.trials, res.errors
        lo, hi = wilson_interval(errors, trials)
        report.rows.append(SimRow(float(ebn0), cfg.n, cfg.k, cfg.list_size, cfg.crc_len, trials,
                                  errors, errors / trials, lo, hi, cfg.seed, cfg.construction))
    return report


def compare(cfg: SimConfig, constructions: Sequence[str] = ("dp", "standard")) -> dict[str, SimReport]:
    """Run the same sweep for several constructions (shared noise)."""
    return {c: run_fer_sweep(replace(cfg, construction=c)) for c in constructions}
