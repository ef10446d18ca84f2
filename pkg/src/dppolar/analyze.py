"""Overlap between information sets of DP, standard and Reed-Muller codes."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional

from .construct import IncompleteArrayError, MinusArray, minus_construct
from .polar import CodeSpec, rm_dimension, rm_info_set


def overlap(a: CodeSpec, b: CodeSpec) -> Fraction:
    if a.n != b.n or a.k != b.k:
        raise ValueError(f"similarity needs equal (n, k); got ({a.n},{a.k}) and ({b.n},{b.k})")
    if a.k == 0:
        raise ValueError("similarity is undefined for k = 0")
    return Fraction(len(set(a.info_set) & set(b.info_set)), a.k)


def similarity(a: CodeSpec, b: CodeSpec) -> float:
    """|A_a & A_b| / k."""
    return float(overlap(a, b))


@dataclass(frozen=True)
class SimilarityReport:
    n: int
    k: int
    L: int
    s_polar: Optional[Fraction]
    s_rm: Optional[Fraction]
    dp_size: int = 0
    polar_overlap: int = 0
    rm_overlap: int = 0

    @property
    def present(self) -> bool:
        return self.s_rm is not None


def similarity_report(arr: MinusArray, baseline: CodeSpec, r: int) -> SimilarityReport:
    m = baseline.m
    rm = rm_info_set(m, r)
    if baseline.k != rm.k:
        raise ValueError(f"RM comparison needs k = {rm.k} for r={r}, baseline has k={baseline.k}")
    dp = minus_construct(baseline.n, baseline.k, arr)
    po = len(set(dp.info_set) & set(baseline.info_set))
    ro = len(set(dp.info_set) & set(rm.info_set))
    return SimilarityReport(baseline.n, baseline.k, arr.L, overlap(dp, baseline), overlap(dp, rm),
                            dp.k, po, ro)


def similarity_table(n: int, r: int, arrays: Mapping[int, Optional[MinusArray]],
                     baseline: CodeSpec) -> list[SimilarityReport]:
    """One report per list size; an array that is missing or does not
    cover ``n`` yields a row with no values."""
    k = rm_dimension(baseline.m, r)
    if baseline.n != n or baseline.k != k:
        raise ValueError(f"baseline must be an ({n},{k}) code")
    rows = []
    for L in sorted(arrays):
        arr = arrays[L]
        try:
            if arr is None:
                raise IncompleteArrayError("absent")
            rows.append(similarity_report(arr, baseline, r))
        except IncompleteArrayError:
            rows.append(SimilarityReport(n, k, L, None, None))
    return rows


def _fmt(x: Optional[Fraction]) -> str:
    return "-" if x is None else f"{float(x):.2f}"


def table_csv(rows: list[SimilarityReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "k", "L", "s_polar", "s_rm", "polar_overlap", "rm_overlap"])
    for r in rows:
        w.writerow([r.n, r.k, r.L, _fmt(r.s_polar), _fmt(r.s_rm),
                    r.polar_overlap if r.present else "", r.rm_overlap if r.present else ""])
    return buf.getvalue()


def table_text(rows: list[SimilarityReport]) -> str:
    head = ["L"] + [str(r.L) for r in rows]
    sp = ["S_polar"] + [_fmt(r.s_polar) for r in rows]
    sr = ["S_RM"] + [_fmt(r.s_rm) for r in rows]
    widths = [max(len(c[i]) for c in (head, sp, sr)) for i in range(len(head))]
    return "\n".join("  ".join(c.rjust(w) for c, w in zip(line, widths))
                     for line in (head, sp, sr)) + "\n"
