"""Command-line entry point: ``dppolar <subcommand> ...``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .analyze import similarity_table, table_csv, table_text
from .channel import AwgnChannel
from .construct import (
    EXAMPLE_FILE, SHIPPED_L32, MinusArrayError, TrainingConfig, calculate_minus_array,
    data_path, example_minus_array, format_minus_array, load_minus_array, minus_construct,
    shipped_minus_array, standard_construct,
)
from .decode import CrcSpec, ml_decode, sc_decode, scl_decode
from .harness import CONSTRUCTIONS, ConfigError, SimConfig, resolve_spec, run_fer_sweep
from .polar import encode, rm_dimension


class CliError(Exception):
    pass


def _float_list(s: str) -> list[float]:
    try:
        return [float(x) for x in s.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {s!r}") from None


def _int_list(s: str) -> list[int]:
    try:
        return [int(x) for x in s.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers, got {s!r}") from None


def _add_code_args(p, *, sim: bool = False):
    p.add_argument("--n", type=int, help="code length (power of two)")
    p.add_argument("--k", type=int, help="code dimension (message bits)")
    p.add_argument("--rate", type=float, help="k/n, used when --k is absent")
    p.add_argument("--construction", choices=CONSTRUCTIONS, help="information-set source")
    p.add_argument("--dp", metavar="PATH", action="append",
                   help="shorthand for --construction dp --array PATH")
    p.add_argument("--array", action="append", metavar="PATH",
                   help="minus-array file(s), merged (default: shipped L=32)")
    p.add_argument("--r", type=int, help="RM order for --construction rm")
    p.add_argument("--info-set", type=_int_list, help="explicit indices for --construction explicit")
    p.add_argument("--method", choices=("gaussian-approx", "genie-mc"),
                   help="standard construction estimator")
    p.add_argument("--design-ebn0", type=float, help="design Eb/N0 of the standard construction (dB)")
    p.add_argument("--crc-len", type=int, help="CRC length (bits)")
    p.add_argument("--crc-kind", choices=("random-linear", "polynomial"))
    p.add_argument("--crc-poly", help="generator polynomial for --crc-kind polynomial, e.g. 1011")
    p.add_argument("--crc-seed", type=int)
    p.add_argument("--list-size", type=int, help="SCL list size L")
    if sim:
        p.add_argument("--ebn0", type=_float_list, help="comma-separated Eb/N0 points (dB)")
        p.add_argument("--trials", type=int, help="maximum frames per point")
        p.add_argument("--min-errors", type=int, help="stop a point after this many frame errors")
        p.add_argument("--min-trials", type=int, help="floor on frames before early stop")
        p.add_argument("--seed", type=int)
        p.add_argument("--workers", type=int)
        p.add_argument("--config", help="JSON or YAML file with the same keys as the flags")
        p.add_argument("--out", help="CSV output path (default: stdout)")


def _load_config(path: str) -> dict:
    text = Path(path).read_text()
    if path.endswith((".yaml", ".yml")):
        import yaml
        data = yaml.safe_load(text)
    else:
        data = json.loads(text)
    if not isinstance(data, dict):
        raise CliError(f"config {path}: expected a mapping at top level")
    return {key.replace("-", "_"): v for key, v in data.items()}


def _settings(args) -> dict:
    """Config-file values overridden by explicit flags."""
    merged = _load_config(args.config) if getattr(args, "config", None) else {}
    for key, v in vars(args).items():
        if v is not None and key not in ("cmd", "func", "config"):
            merged[key] = v
    if merged.get("dp"):
        merged["construction"] = "dp"
        merged["array"] = list(merged.get("array") or []) + list(merged["dp"])
    if isinstance(merged.get("ebn0"), (int, float)):
        merged["ebn0"] = [merged["ebn0"]]
    if isinstance(merged.get("ebn0"), str):
        merged["ebn0"] = _float_list(merged["ebn0"])
    return merged


def _sim_config(s: dict, *, sim: bool) -> SimConfig:
    if s.get("n") is None:
        raise CliError("--n is required")
    n = int(s["n"])
    k = s.get("k")
    if k is None:
        if s.get("rate") is not None:
            k = int(round(float(s["rate"]) * n))
        elif s.get("construction") == "rm" and s.get("r") is not None:
            k = rm_dimension(int(np.log2(n)), int(s["r"]))
        else:
            raise CliError("--k or --rate is required")
    crc = None
    if s.get("crc_len"):
        crc = CrcSpec(int(s["crc_len"]), s.get("crc_kind", "random-linear"),
                      **({"seed": int(s["crc_seed"])} if s.get("crc_seed") is not None else {}),
                      poly=s.get("crc_poly"))
    cfg = SimConfig(
        n=n, k=int(k), construction=s.get("construction", "standard"),
        list_size=int(s.get("list_size", 32)), crc=crc,
        ebn0_db=list(s.get("ebn0", [2.0])) if sim else [2.0],
        trials=int(s.get("trials", 10_000)),
        min_errors=None if s.get("min_errors") is None else int(s["min_errors"]),
        min_trials=int(s.get("min_trials", 1000)), seed=int(s.get("seed", 1)),
        workers=int(s.get("workers", 1)), arrays=list(s.get("array") or []),
        info_set=s.get("info_set"), rm_r=s.get("r"),
        method=s.get("method", "gaussian-approx"),
        design_ebn0_db=float(s.get("design_ebn0", 2.0)),
    )
    return cfg


def _write(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# --- subcommands --------------------------------------------------------

def cmd_construct(args) -> int:
    cfg = _sim_config(_settings(args), sim=False)
    spec = resolve_spec(cfg)
    print(" ".join(str(i) for i in spec.info_set))
    return 0


def cmd_simulate(args) -> int:
    s = _settings(args)
    if "ebn0" in s and not s["ebn0"]:
        raise ConfigError("no Eb/N0 points given")
    cfg = _sim_config(s, sim=True)
    report = run_fer_sweep(cfg)
    _write(report.to_csv(), s.get("out"))
    return 0


def cmd_dp_build(args) -> int:
    s = _settings(args)
    cfg = TrainingConfig(
        list_size=int(s.get("list_size", 32)), trials=int(s.get("trials", 100_000)),
        ebn0_db=float(s.get("ebn0", [2.0])[0]), seed=int(s.get("seed", 2022)),
        workers=int(s.get("workers", 1)),
        window=tuple(s.get("window", (-2, 4))),
        full_range_max_n=int(s.get("full_range_max_n", 16)),
        stop_errors=s.get("stop_errors"),
    )
    quiet = s.get("quiet", False)

    def report(n, k, choice, values, errors):
        if not quiet:
            errs = " ".join(f"{v}:{e:.5f}" for v, e in zip(values, errors))
            print(f"n={n} k={k} minus={choice}  [{errs}]", file=sys.stderr)

    arr = calculate_minus_array(int(s["max_n"]), cfg, checkpoint=s.get("checkpoint"),
                                on_entry=report)
    _write(format_minus_array(arr), s.get("out"))
    return 0


def cmd_similarity(args) -> int:
    s = _settings(args)
    n = int(s.get("n", 128))
    m = int(np.log2(n))
    r = int(s["r"])
    k = rm_dimension(m, r)
    arrays = {}
    for path in s.get("array") or []:
        arr = load_minus_array(path)
        arrays[arr.L] = arr
    if not arrays:
        arrays[32] = shipped_minus_array()
    method = s.get("method", "gaussian-approx")
    ch = AwgnChannel(float(s.get("design_ebn0", 2.0)), k / n)
    baseline = standard_construct(n, k, ch, method)
    rows = similarity_table(n, r, arrays, baseline)
    text = table_csv(rows) if s.get("format", "text") == "csv" else table_text(rows)
    _write(text, s.get("out"))
    return 0


def cmd_tables(args) -> int:
    names = list(SHIPPED_L32) + [EXAMPLE_FILE]
    if args.validate:
        for name in names:
            load_minus_array(data_path(name), chain=name in (SHIPPED_L32[0], EXAMPLE_FILE))
        arr = shipped_minus_array()
        for n in arr.lengths:
            if arr[n, 0] != 0 or arr[n, n] != n // 2:
                raise MinusArrayError(f"boundary rows violated at n={n}")
        example_minus_array()
        print(f"ok: {len(arr)} entries for n <= {arr.max_n}, L={arr.L}; example array ok")
    if args.dump:
        arr = example_minus_array() if args.which == "example" else shipped_minus_array()
        if args.n:
            arr = type(arr)(arr.L, {nk: v for nk, v in arr.entries.items() if nk[0] == args.n},
                            arr.label)
        _write(format_minus_array(arr), args.out)
    if not (args.validate or args.dump):
        for name in names:
            print(data_path(name))
    return 0


def _read_tokens(path: str) -> list[str]:
    return Path(path).read_text().split()


def cmd_encode(args) -> int:
    cfg = _sim_config(_settings(args), sim=False)
    spec = resolve_spec(cfg)
    tokens = _read_tokens(args.input)
    if set(tokens) - {"0", "1"}:
        raise CliError(f"{args.input}: message file must contain only 0/1 tokens")
    msg = np.array([int(t) for t in tokens], dtype=np.uint8)
    if cfg.crc is not None:
        from .decode import crc_attach
        msg = crc_attach(msg, cfg.crc) if msg.size == cfg.k else msg
    if msg.size != spec.k:
        raise CliError(f"message has {msg.size} bits, expected {cfg.k}")
    _write(" ".join(str(b) for b in encode(msg, spec)) + "\n", args.out)
    return 0


def cmd_decode(args) -> int:
    cfg = _sim_config(_settings(args), sim=False)
    spec = resolve_spec(cfg)
    try:
        llr = np.array([float(t) for t in _read_tokens(args.input)])
    except ValueError:
        raise CliError(f"{args.input}: LLR file must contain numbers") from None
    if args.decoder == "sc":
        res = sc_decode(llr, spec)
    elif args.decoder == "ml":
        res = ml_decode(llr, spec)
    else:
        res = scl_decode(llr, spec, cfg.list_size, cfg.crc)
    bits = res.message[:cfg.k]
    _write(" ".join(str(b) for b in bits) + "\n", args.out)
    if not res.success:
        print("warning: no list candidate passed the CRC", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dppolar", description=__doc__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("construct", help="print an information set")
    _add_code_args(p)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("simulate", help="FER sweep to CSV")
    _add_code_args(p, sim=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("dp-build", help="compute a minus array by Monte Carlo DP")
    p.add_argument("--max-n", type=int, required=True, help="largest code length N")
    p.add_argument("--list-size", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--ebn0", type=_float_list, help="training Eb/N0 (dB)")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--window", type=_int_list, help="search offsets, e.g. -2,4")
    p.add_argument("--full-range-max-n", type=int)
    p.add_argument("--stop-errors", type=int)
    p.add_argument("--checkpoint", help="checkpoint file (resumed if present)")
    p.add_argument("--config")
    p.add_argument("--out", help="output minus-array file (default: stdout)")
    p.add_argument("--quiet", action="store_true", default=None)
    p.set_defaults(func=cmd_dp_build)

    p = sub.add_parser("similarity", help="S_polar / S_RM table")
    p.add_argument("--n", type=int)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--array", action="append", help="minus array per list size (repeatable)")
    p.add_argument("--method", choices=("gaussian-approx", "genie-mc"))
    p.add_argument("--design-ebn0", type=float)
    p.add_argument("--format", choices=("text", "csv"))
    p.add_argument("--out")
    p.set_defaults(func=cmd_similarity)

    p = sub.add_parser("tables", help="list, validate or dump the shipped minus arrays")
    p.add_argument("--validate", action="store_true")
    p.add_argument("--dump", action="store_true")
    p.add_argument("--which", choices=("L32", "example"), default="L32")
    p.add_argument("--n", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_tables)

    for name, fn, helptext in (("encode", cmd_encode, "message file -> codeword"),
                               ("decode", cmd_decode, "LLR file -> message")):
        p = sub.add_parser(name, help=helptext)
        _add_code_args(p)
        p.add_argument("--in", dest="input", required=True)
        p.add_argument("--out")
        if name == "decode":
            p.add_argument("--decoder", choices=("sc", "scl", "ml"), default="scl")
        p.set_defaults(func=fn)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, ConfigError, MinusArrayError, ValueError, OSError, KeyError) as e:
        print(f"dppolar {args.cmd}: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
