"""Command-line interface: ``deltadiv {compute,sample,experiment,sweep,metric-search}``.

Exit codes: 0 success, 1 computation or validation failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass
from datetime import datetime, timezone

import numpy as np

from . import __version__, kernels
from .classical import measure_by_name
from .delta import delta_divergence, delta_max, delta_star
from .errors import DivergenceError, InvariantViolation, WriteFailure
from .experiments import (
    KL_CEILING,
    OPTIONAL_MEASURES,
    metric_violation_search,
    read_csv,
    threshold_sweep,
    write_run,
)
from .sampling import (
    BLOCK_SIZE,
    LAW,
    Mode,
    SamplerConfig,
    allocate,
    block_rng,
    diff_grid,
    sample_pair_rows,
)
from .simplex import parse_distribution

ALL_MEASURES = ("kl", "kl-sym", "js", "tv", "delta", "delta-star", "delta-max")
DEFAULT_GRID = "0:1:0.05"
DEFAULT_SWEEP = "0.25,0.5,0.75,1,2,3,4,8"


class UsageError(Exception):
    pass


def fmt_num(x: float) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    if math.isnan(x):
        return '"nan"'
    return "%.17g" % x


def to_json(obj) -> str:
    """JSON with every float at 17 significant digits and infinities as "inf"."""
    if obj is None:
        return "null"
    if isinstance(obj, (bool, int, float)):
        return fmt_num(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {to_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(to_json(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


@dataclass
class RunManifest:
    tool_version: str
    command: str
    config: dict
    seed: int
    started: str
    finished: str
    output_path: str
    output_sha256: str
    rows: int
    backend: str
    block_size: int
    sampling_law: str


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _common(parser: argparse.ArgumentParser, formats=("csv", "jsonl", "json"), default="json"):
    g = parser.add_argument_group("global options")
    g.add_argument("--format", choices=formats, default=default, help=f"output format (default: {default})")
    g.add_argument("--out", default="-", help="output path, '-' for stdout (default: -)")
    g.add_argument("--seed", type=int, default=None, help="random seed; required by sampling commands")
    g.add_argument("--workers", type=int, default=1, help="worker threads (default: 1)")
    g.add_argument(
        "--log-base-kl", type=float, default=math.e, help="log base for K-L measures (default: e)"
    )


def _sampler_flags(parser: argparse.ArgumentParser) -> None:
    g = parser.add_argument_group("sampler")
    g.add_argument("--classes", type=int, required=True, help="number of classes m >= 2")
    g.add_argument(
        "--mode",
        choices=[m.value for m in Mode],
        default=Mode.UNCONSTRAINED.value,
        help="constraint mode (default: unconstrained)",
    )
    g.add_argument("--mu", type=int, default=None, help="constrained class index (0-based)")
    g.add_argument("--p-mu", type=float, default=None, help="fixed P[mu] for dominant-value mode")
    g.add_argument("--diff", type=float, default=None, help="|P[mu] - Q[mu]| for dominant-diff mode")
    g.add_argument(
        "--diff-grid",
        default=None,
        help=f"diff values for dominant-diff mode, 'start:stop:step' or comma list "
        f"(default when --diff is absent: {DEFAULT_GRID}); --count is split evenly",
    )
    g.add_argument("--count", type=int, default=1, help="number of pairs (default: 1)")
    g.add_argument(
        "--both-dominant",
        action="store_true",
        help="in dominant-diff mode also require mu to be dominant for Q",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="deltadiv", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", help="evaluate measures on one pair of distributions")
    p.add_argument("--p", required=True, help="first distribution, e.g. 0.5,0.3,0.2")
    p.add_argument("--q", required=True, help="second distribution")
    p.add_argument(
        "--measure",
        default="all",
        help="comma list of kl, kl-sym, js, tv, renyi:<alpha>, f-div:<kl|tv|squared>, "
        "bregman:<kl|tv|squared>, delta, delta-star, delta-max, or 'all' (default: all)",
    )
    p.add_argument("--verbose", action="store_true", help="include the full Delta breakdown")
    _common(p)

    p = sub.add_parser("sample", help="draw distribution pairs")
    _sampler_flags(p)
    _common(p, ("csv", "jsonl"), "csv")

    p = sub.add_parser("experiment", help="run a scatter experiment and write records")
    _sampler_flags(p)
    p.add_argument(
        "--measures",
        default=",".join(OPTIONAL_MEASURES),
        help="optional measures to include (default: kl,kl-sym,js)",
    )
    p.add_argument("--kl-ceiling", type=float, default=KL_CEILING, help="K-L plot ceiling (default: 8)")
    p.add_argument("--manifest", default=None, help="manifest path (default: <out>.manifest.json)")
    _common(p, ("csv", "jsonl"), "csv")

    p = sub.add_parser("sweep", help="false positive/negative rates of a thresholded measure")
    p.add_argument("--in", dest="infile", required=True, help="CSV written by 'experiment'")
    p.add_argument("--measure", default="kl", help="measure to threshold (default: kl)")
    p.add_argument(
        "--reference-threshold", type=float, required=True, help="d_delta threshold defining ground truth"
    )
    p.add_argument("--thresholds", default=DEFAULT_SWEEP, help=f"candidate thresholds (default: {DEFAULT_SWEEP})")
    _common(p)

    p = sub.add_parser("metric-search", help="look for a triangle-inequality violation of Delta divergence")
    p.add_argument("--classes", type=int, required=True, help="number of classes m >= 2")
    p.add_argument("--triples", type=int, default=10**6, help="triples to try (default: 1000000)")
    _common(p)
    return parser


def _floats(text: str, flag: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"{flag}: expected a comma-separated list of numbers, got {text!r}") from None


def _grid(text: str) -> list[float]:
    if ":" in text:
        try:
            start, stop, step = (float(x) for x in text.split(":"))
        except ValueError:
            raise UsageError(f"--diff-grid: expected start:stop:step, got {text!r}") from None
        if step <= 0:
            raise UsageError("--diff-grid: step must be positive")
        return diff_grid(start, stop, step)
    return _floats(text, "--diff-grid")


def _require_seed(args) -> int:
    if args.seed is None:
        raise UsageError(f"{args.command}: --seed is required")
    return args.seed


def _config(args) -> SamplerConfig:
    mode = Mode(args.mode)
    if mode is not Mode.UNCONSTRAINED and args.mu is None:
        raise UsageError(f"--mode {mode.value} requires --mu")
    if mode is Mode.DOMINANT_VALUE and args.p_mu is None:
        raise UsageError("--mode dominant-value requires --p-mu")
    grid = None
    diff = args.diff
    if mode is Mode.DOMINANT_DIFF:
        if args.diff is not None and args.diff_grid is not None:
            raise UsageError("give --diff or --diff-grid, not both")
        if args.diff is None:
            grid = tuple(_grid(args.diff_grid or DEFAULT_GRID))
            if len(grid) > args.count:
                raise UsageError(f"--count {args.count} is smaller than the {len(grid)}-value diff grid")
    try:
        return SamplerConfig(
            m=args.classes,
            mode=mode,
            mu=args.mu if mode is not Mode.UNCONSTRAINED else None,
            p_mu=args.p_mu if mode is Mode.DOMINANT_VALUE else None,
            diff=diff if mode is Mode.DOMINANT_DIFF else None,
            count=args.count,
            seed=_require_seed(args),
            both_dominant=args.both_dominant,
            diff_grid=grid,
        )
    except DivergenceError as exc:
        raise UsageError(f"infeasible sampler configuration: {exc}") from None


def _open_out(path: str):
    if path == "-":
        return sys.stdout, False
    try:
        return open(path, "w", newline=""), True
    except OSError as exc:
        raise WriteFailure(f"cannot open {path}: {exc}") from exc


def _emit(args, text: str) -> None:
    fh, close = _open_out(args.out)
    try:
        fh.write(text)
    finally:
        if close:
            fh.close()


def cmd_compute(args) -> int:
    p = parse_distribution(args.p)
    q = parse_distribution(args.q)
    names = ALL_MEASURES if args.measure.strip() == "all" else [x.strip() for x in args.measure.split(",") if x.strip()]
    values = {}
    breakdown = None
    for name in names:
        if name == "delta":
            br = delta_divergence(p, q)
            values[name] = br.value
            breakdown = br
        elif name == "delta-star":
            values[name] = delta_star(p, q).value
        elif name == "delta-max":
            values[name] = delta_max(p, q).value
        else:
            values[name] = measure_by_name(name, p, q, args.log_base_kl).value
    if args.format == "json":
        doc = dict(values)
        if args.verbose and breakdown is not None:
            doc["delta_breakdown"] = breakdown.as_dict()
        text = to_json(doc) + "\n"
    elif args.format == "jsonl":
        text = "".join(to_json({"measure": k, "value": v}) + "\n" for k, v in values.items())
        if args.verbose and breakdown is not None:
            text += to_json({"delta_breakdown": breakdown.as_dict()}) + "\n"
    else:
        text = "measure,value\n" + "".join(f"{k},{fmt_num(v).strip(chr(34))}\n" for k, v in values.items())
    _emit(args, text)
    return 0


def cmd_sample(args) -> int:
    config = _config(args)
    m = config.m
    buf = io.StringIO()
    if args.format == "csv":
        buf.write(",".join(["sample_id"] + [f"p{i}" for i in range(m)] + [f"q{i}" for i in range(m)]) + "\n")
    for start in range(0, config.count, BLOCK_SIZE):
        stop = min(start + BLOCK_SIZE, config.count)
        P, Q = sample_pair_rows(
            config, block_rng(config.seed, start // BLOCK_SIZE), stop - start, diffs=config.diffs_for(start, stop)
        )
        ids = np.arange(start, stop, dtype=np.int64)
        if args.format == "csv":
            buf.write(kernels.format_rows([ids] + list(P.T) + list(Q.T), ["i"] + ["f"] * (2 * m)))
        else:
            for i, prow, qrow in zip(ids.tolist(), P.tolist(), Q.tolist()):
                buf.write(to_json({"sample_id": i, "p": prow, "q": qrow}) + "\n")
    _emit(args, buf.getvalue())
    return 0


def cmd_experiment(args) -> int:
    config = _config(args)
    measures = tuple(x.strip() for x in args.measures.split(",") if x.strip())
    bad = set(measures) - set(OPTIONAL_MEASURES)
    if bad:
        raise UsageError(f"--measures: unknown {sorted(bad)}; choose from {','.join(OPTIONAL_MEASURES)}")
    if args.workers < 1:
        raise UsageError("--workers must be >= 1")
    started = _now()
    t0 = time.perf_counter()
    fh, close = _open_out(args.out)
    try:
        rows, digest = write_run(
            config, fh, measures, args.format, args.log_base_kl, args.workers, args.kl_ceiling
        )
    finally:
        if close:
            fh.close()
    elapsed = time.perf_counter() - t0

    flags = {k: v for k, v in vars(args).items() if k != "func"}
    manifest = RunManifest(
        tool_version=__version__,
        command="experiment",
        config={"flags": flags, "sampler": config.as_dict(), "measures": list(measures)},
        seed=config.seed,
        started=started,
        finished=_now(),
        output_path=args.out,
        output_sha256=digest,
        rows=rows,
        backend=kernels.BACKEND,
        block_size=BLOCK_SIZE,
        sampling_law=LAW,
    )
    manifest_path = args.manifest or (None if args.out == "-" else args.out + ".manifest.json")
    if manifest_path:
        try:
            with open(manifest_path, "w") as mf:
                mf.write(to_json(asdict(manifest)) + "\n")
        except OSError as exc:
            raise WriteFailure(f"cannot write manifest {manifest_path}: {exc}") from exc
    if args.out != "-":
        print(f"rows={rows} runtime={elapsed:.3f}s out={args.out} sha256={digest}")
    return 0


def cmd_sweep(args) -> int:
    try:
        cols = read_csv(args.infile)
    except OSError as exc:
        raise WriteFailure(f"cannot read {args.infile}: {exc}") from exc
    thresholds = _floats(args.thresholds, "--thresholds")
    if not 0 <= args.reference_threshold <= 1:
        raise UsageError("--reference-threshold must lie in [0, 1]")
    reports = threshold_sweep(cols, args.measure, args.reference_threshold, thresholds)
    dicts = [asdict(r) for r in reports]
    if args.format == "json":
        text = to_json(dicts) + "\n"
    elif args.format == "jsonl":
        text = "".join(to_json(d) + "\n" for d in dicts)
    else:
        keys = list(dicts[0])
        text = ",".join(keys) + "\n" + "".join(
            ",".join(fmt_num(d[k]) if not isinstance(d[k], str) else d[k] for k in keys) + "\n" for d in dicts
        )
    _emit(args, text)
    return 0


def cmd_metric_search(args) -> int:
    seed = _require_seed(args)
    if args.classes < 2:
        raise UsageError("--classes must be >= 2")
    if args.triples < 1:
        raise UsageError("--triples must be >= 1")
    found = metric_violation_search(args.classes, args.triples, seed)
    doc = {"classes": args.classes, "triples": args.triples, "seed": seed,
           "violation": found.as_dict() if found else None}
    _emit(args, to_json(doc) + "\n")
    return 0


COMMANDS = {
    "compute": cmd_compute,
    "sample": cmd_sample,
    "experiment": cmd_experiment,
    "sweep": cmd_sweep,
    "metric-search": cmd_metric_search,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (DivergenceError, InvariantViolation, OSError) as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
