import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import norm

from dppolar.channel import AwgnChannel
from dppolar.construct import (IncompleteArrayError, MinusArray, MinusArrayError, TrainingConfig,
                               calculate_minus_array, candidate_values, combine_halves,
                               decoding_error, example_minus_array, first_minimizer, ga_means,
                               ga_minus, format_minus_array, load_minus_array, minus_construct,
                               minus_range, parse_minus_array, rank_select, save_minus_array,
                               shipped_minus_array, standard_construct)
from dppolar.polar import CodeSpec

EXAMPLE_SET = (3, 5, 6, 7, 9, 10, 11, 12, 13, 14, 15)


@pytest.fixture(scope="module")
def shipped():
    return shipped_minus_array()


# --- arrays ------------------------------------------------------------

def test_minus_range():
    assert minus_range(8, 2) == (0, 2)
    assert minus_range(8, 7) == (3, 4)
    assert minus_range(16, 16) == (8, 8)


def test_shipped_counts_and_boundaries(shipped):
    assert len(shipped) == sum(2 ** j for j in range(1, 11)) + 10 == 2056
    for n in shipped.lengths:
        assert shipped[n, 0] == 0 and shipped[n, n] == n // 2
    shipped.validate()


def test_shipped_small_rows(shipped):
    assert shipped.row(2) == [0, 0, 1]
    assert shipped.row(4) == [0, 0, 0, 1, 2]
    assert shipped.row(8) == [0, 0, 0, 0, 1, 1, 2, 3, 4]


def test_example_array_differs_from_table_at_n16(shipped):
    ex = example_minus_array()
    assert ex.max_n == 16
    assert ex[16, 8] == 2 and shipped[16, 8] == 1


def test_roundtrip_shipped(shipped, tmp_path):
    path = tmp_path / "a.tsv"
    save_minus_array(shipped, path)
    again = load_minus_array(path)
    assert again.entries == shipped.entries and again.L == shipped.L


def valid_arrays(max_m=5):
    @st.composite
    def build(draw):
        arr = MinusArray(int(draw(st.sampled_from([1, 2, 8, 32]))))
        for m in range(1, draw(st.integers(1, max_m)) + 1):
            n = 2 ** m
            for k in range(n + 1):
                lo, hi = minus_range(n, k)
                arr[n, k] = draw(st.integers(lo, hi))
        return arr
    return build()


@given(valid_arrays())
@settings(max_examples=40, deadline=None)
def test_roundtrip_property(arr):
    back, progress = parse_minus_array(format_minus_array(arr))
    assert progress is None and back.entries == arr.entries and back.L == arr.L


def test_range_violation_rejected(tmp_path):
    text = format_minus_array(shipped_minus_array(8)).replace("8\t2\t0", "8\t2\t5")
    path = tmp_path / "bad.tsv"
    path.write_text(text)
    with pytest.raises(MinusArrayError, match="range"):
        load_minus_array(path)
    with pytest.raises(MinusArrayError):
        MinusArray(32)[8, 2] = 5


def test_gap_rejected(tmp_path):
    text = format_minus_array(shipped_minus_array(8)).replace("4\t3\t1\n", "")
    path = tmp_path / "gap.tsv"
    path.write_text(text)
    with pytest.raises(MinusArrayError, match="gap"):
        load_minus_array(path)


@pytest.mark.parametrize("text", ["", "2 0 0\n", "# minus-array version=1\n",
                                  "# minus-array L=32 version=1\n2\t0\tx\n",
                                  "# minus-array L=32 version=1\n2\t1\t0\n2\t0\t0\n"])
def test_malformed_rejected(text):
    with pytest.raises(MinusArrayError):
        parse_minus_array(text)


def test_checkpoint_file_not_loadable(tmp_path):
    path = tmp_path / "ck.tsv"
    save_minus_array(shipped_minus_array(4), path, progress=(4, 4))
    with pytest.raises(MinusArrayError, match="checkpoint"):
        load_minus_array(path)


def test_missing_entry_is_incomplete():
    with pytest.raises(IncompleteArrayError):
        minus_construct(32, 5, shipped_minus_array(16))


# --- minus_construct ---------------------------------------------------

def test_worked_example_both_arrays(shipped):
    assert minus_construct(16, 11, example_minus_array()).info_set == EXAMPLE_SET
    assert minus_construct(16, 11, shipped).info_set == EXAMPLE_SET


def test_construct_small(shipped):
    assert minus_construct(2, 1, shipped).info_set == (1,)
    assert minus_construct(8, 8, shipped).info_set == tuple(range(8))
    assert minus_construct(8, 0, shipped).info_set == ()
    with pytest.raises(ValueError):
        minus_construct(8, 9, shipped)


def check_split(spec, arr, n, k, offset=0):
    if n == 1:
        return
    h = n // 2
    first = [i for i in spec.info_set if offset <= i < offset + h]
    second = [i for i in spec.info_set if offset + h <= i < offset + n]
    assert len(first) == arr[n, k]
    assert len(first) + len(second) == k
    check_split(spec, arr, h, len(first), offset)
    check_split(spec, arr, h, len(second), offset + h)


@given(st.integers(1, 10).flatmap(lambda m: st.tuples(st.just(2 ** m), st.integers(0, 2 ** m))))
@settings(max_examples=80, deadline=None)
def test_construct_split_invariant(nk):
    arr = shipped_minus_array()
    n, k = nk
    spec = minus_construct(n, k, arr)
    assert spec.k == k
    check_split(spec, arr, n, k)


def test_combine_halves():
    s = combine_halves(CodeSpec(4, (3,)), CodeSpec(4, (1, 3)))
    assert s.info_set == (3, 5, 7) and s.n == 8


# --- DP training -------------------------------------------------------

def test_candidate_window():
    cfg = TrainingConfig(full_range_max_n=16)
    assert candidate_values(64, 20, 5, cfg) == [3, 4, 5, 6, 7, 8, 9]
    assert candidate_values(64, 3, 1, cfg) == [0, 1, 2, 3]
    assert candidate_values(64, 63, 31, cfg) == [31, 32]
    assert candidate_values(8, 4, 1, cfg) == [0, 1, 2, 3, 4]
    assert candidate_values(64, 0, None, cfg) == [0]


def test_first_minimizer_strict():
    assert first_minimizer([0, 1, 2], [0.3, 0.1, 0.1]) == 1
    assert first_minimizer([2, 3], [1.0, 1.0]) == 2
    assert first_minimizer([0, 1], [0.0, 0.0]) == 0


def test_training_config_validation():
    for kw in ({"trials": 0}, {"list_size": 0}, {"window": (3, 1)}):
        with pytest.raises(ValueError):
            TrainingConfig(**kw)


def test_decoding_error_trivial_cases():
    assert decoding_error(CodeSpec(8, ()), TrainingConfig(trials=10)) == 0.0
    quiet = TrainingConfig(trials=500, ebn0_db=40.0, list_size=4)
    assert decoding_error(CodeSpec(16, EXAMPLE_SET), quiet) == 0.0


def test_decoding_error_repetition_oracle():
    cfg = TrainingConfig(list_size=1, trials=100_000, chunk=10_000)
    fer = decoding_error(CodeSpec(8, (7,)), cfg)
    p = norm.sf(math.sqrt(8 * 2 * (1 / 8) * 10 ** 0.2))
    assert abs(fer - p) <= 3 * math.sqrt(p * (1 - p) / cfg.trials)


def test_decoding_error_worker_invariant():
    spec = CodeSpec(16, EXAMPLE_SET)
    a = decoding_error(spec, TrainingConfig(list_size=4, trials=3000, chunk=500, workers=1))
    b = decoding_error(spec, TrainingConfig(list_size=4, trials=3000, chunk=500, workers=3))
    assert a == b


def small_cfg(**kw):
    base = dict(list_size=4, trials=2000, chunk=500, ebn0_db=1.0)
    base.update(kw)
    return TrainingConfig(**base)


def test_calculate_small_array_valid_and_deterministic():
    a = calculate_minus_array(8, small_cfg())
    b = calculate_minus_array(8, small_cfg(workers=2))
    a.validate()
    assert a.entries == b.entries and a[2, 1] in (0, 1) and a.L == 4


def test_checkpoint_resume(tmp_path):
    ck = tmp_path / "ck.tsv"
    full = calculate_minus_array(8, small_cfg())

    class Stop(Exception):
        pass

    def interrupt(n, k, *_):
        if (n, k) == (8, 3):
            raise Stop
    with pytest.raises(Stop):
        calculate_minus_array(8, small_cfg(), checkpoint=ck, on_entry=interrupt)
    partial, progress = parse_minus_array(ck.read_text())
    assert progress == (8, 3) and (8, 4) not in partial
    resumed = calculate_minus_array(8, small_cfg(), checkpoint=ck)
    assert resumed.entries == full.entries
    assert parse_minus_array(ck.read_text())[1] is None


def test_calculate_rejects_bad_n():
    with pytest.raises(ValueError):
        calculate_minus_array(6, small_cfg())


# --- standard construction ---------------------------------------------

def test_ga_minus_bounds():
    for m in (0.1, 1.0, 5.0, 20.0, 80.0):
        assert 0 < ga_minus(m) < m


def test_ga_means_polarise():
    means = ga_means(8, AwgnChannel(2.0, 0.5))
    assert means[0] == means.min() and means[7] == means.max()


@pytest.mark.parametrize("method", ["gaussian-approx", "genie-mc"])
def test_standard_examples(method):
    ch = AwgnChannel(2.0, 11 / 16)
    assert standard_construct(16, 11, ch, method, trials=20_000).info_set == EXAMPLE_SET
    assert standard_construct(2, 1, ch, method).info_set == (1,)
    assert standard_construct(8, 8, ch, method).info_set == tuple(range(8))


def test_standard_bad_method():
    with pytest.raises(ValueError):
        standard_construct(8, 4, AwgnChannel(2.0, 0.5), "density")


def test_rank_select_ties_prefer_larger_index():
    assert rank_select([1.0, 2.0, 2.0, 0.5], 1) == (2,)
    assert rank_select([3.0, 3.0, 3.0], 2) == (1, 2)
