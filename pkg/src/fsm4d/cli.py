"""Command-line entry point.

    fsm4d <experiment> [--config cfg.json] [--full] [--seed S]
                       [--out result.csv] [--schemes fsm,ttd,...]

Exit status: 0 success, 1 configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import _kernels, bench
from .experiments import DESK_PRESET, RUNNERS, ExperimentSpec, run
from .physics import ConfigError, SystemConfig, config_from_dict, load_config_file

log = logging.getLogger("fsm4d")

_SECTION_KEYS = ("grid", "scheme_params", "schemes", "options")


def _csv_list(kind):
    def parse(text: str):
        try:
            return [kind(tok) for tok in text.split(",") if tok.strip()]
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from exc

    return parse


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fsm4d", description="Near-field 4D manifold experiments")
    names = sorted(RUNNERS) + sorted(n.replace("_", "-") for n in RUNNERS if "_" in n)
    p.add_argument("experiment", choices=names, metavar="experiment", help=", ".join(sorted(RUNNERS)))
    p.add_argument("--config", type=Path, help="JSON configuration file")
    p.add_argument("--full", action="store_true", help="full-scale run (N=4096, n_t=4096, n_mc=64)")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", type=Path, help="output CSV (metadata goes to <out>.json)")
    p.add_argument("--schemes", type=_csv_list(str), help="comma list from fsm,btsm,ttd,otfs,ldma")
    p.add_argument("-v", "--verbose", action="store_true")

    g = p.add_argument_group("dfnt-bench")
    g.add_argument("--sizes", type=_csv_list(int), help="aperture sizes, powers of two")
    g.add_argument("--repeats", type=int)
    g.add_argument("--flops-rate", type=float, help="FLOP/s for the latency model")

    d = p.add_argument_group("detect")
    d.add_argument("--A", type=int)
    d.add_argument("--B", type=int)
    d.add_argument("--C", type=int)
    d.add_argument("--qam", type=int, help="QAM order")
    d.add_argument("--snr", type=_csv_list(float), help="SNR sweep in dB")
    d.add_argument("--n-symbols", type=int)

    k = p.add_argument_group("kernels")
    k.add_argument("--bench-kernels", action="store_true", help="also time numba vs numpy link kernels")
    return p


def build_spec(args: argparse.Namespace) -> ExperimentSpec:
    doc = load_config_file(args.config) if args.config else {}
    sections = {key: doc.pop(key) for key in _SECTION_KEYS if key in doc}
    for key in ("grid", "scheme_params", "options"):
        if key in sections and not isinstance(sections[key], dict):
            raise ConfigError(f"{key!r} must be a JSON object")
    base = SystemConfig() if args.full else SystemConfig().replace(**DESK_PRESET)
    cfg = config_from_dict(doc, base)
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)

    grid = dict(sections.get("grid", {}))
    for flag, key in (("A", "A"), ("B", "B"), ("C", "C"), ("qam", "qam_order")):
        if getattr(args, flag) is not None:
            grid[key] = getattr(args, flag)
    options = dict(sections.get("options", {}))
    for flag, key in (
        ("sizes", "sizes"),
        ("repeats", "repeats"),
        ("flops_rate", "flops_rate"),
        ("snr", "snr_db"),
        ("n_symbols", "n_symbols"),
    ):
        if getattr(args, flag) is not None:
            options[key] = getattr(args, flag)
    schemes = args.schemes or sections.get("schemes")
    kw = {"schemes": tuple(schemes)} if schemes else {}
    name = args.experiment.replace("-", "_")
    out = args.out or Path(f"{name}.csv")
    return ExperimentSpec(
        name, cfg, output_path=out, grid=grid, scheme_params=dict(sections.get("scheme_params", {})), options=options, **kw
    )


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        spec = build_spec(args)
    except (ConfigError, ValueError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    if args.verbose:
        spec.options["progress"] = lambda i, n: log.info("trial %d/%d", i, n)
    try:
        log.info("running %s on the %s backend", spec.name, _kernels.backend())
        result = run(spec)
        if args.bench_kernels:
            timing = bench.bench_kernels()
            result.meta["kernel_seconds"] = timing
            result.write(spec.output_path)
            print("link kernel: " + ", ".join(f"{k} {v * 1e3:.1f} ms" for k, v in timing.items()))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - surfaced as exit status 2
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {spec.output_path}")
    for key in ("slope_dfnt", "slope_direct", "max_abs_diff"):
        if key in result.meta:
            print(f"{key} = {result.meta[key]:.4g}")
    if "table" in result.meta:
        print(json.dumps(result.meta["table"], indent=1))
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
