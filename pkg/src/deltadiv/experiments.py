"""Monte-Carlo scatter experiments comparing Delta divergence with other measures.

A run samples ``config.count`` pairs, evaluates every measure on each pair and
streams the results block by block.  Blocks are generated from per-block
random streams, so output is identical for any number of worker threads.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from typing import IO, Iterable, Iterator, Optional, Sequence

import numpy as np

from . import kernels
from .errors import EmptyInput, InvariantViolation, UnknownMeasure, WriteFailure
from .sampling import BLOCK_SIZE, Mode, SamplerConfig, block_rng, sample_pair_rows, sample_simplex_rows

TOL = 1e-12
KL_CEILING = 8.0
OPTIONAL_MEASURES = ("kl", "kl-sym", "js")
CASE_LABELS = ("LabelAgreement", "DisagreeBothNonnegative", "DisagreeMixedSign")


@dataclass(frozen=True)
class ScatterRecord:
    sample_id: int
    m: int
    dom_diff: float
    d_kl: float
    d_kl_sym: float
    d_js: float
    d_tv: float
    d_delta: float
    delta_star: float
    delta_max: float
    case_tag: str
    clutter_tv: float
    clutter_delta: float
    a_term: float
    b_term: float
    log_base_kl: float
    kl_clipped: int


ALL_COLUMNS = tuple(f.name for f in fields(ScatterRecord))
_INT_COLUMNS = {"sample_id", "m", "kl_clipped"}
# optional columns and the measure that switches them on
_NEEDS = {"d_kl": "kl", "log_base_kl": "kl", "kl_clipped": "kl", "d_kl_sym": "kl-sym", "d_js": "js"}


def columns_for(measures: Iterable[str]) -> tuple[str, ...]:
    """CSV columns emitted for a selection of the optional measures."""
    chosen = set(measures)
    unknown = chosen - set(OPTIONAL_MEASURES)
    if unknown:
        raise UnknownMeasure(f"unknown measures {sorted(unknown)}; choose from {OPTIONAL_MEASURES}")
    if "kl-sym" in chosen:
        chosen.add("kl")
    return tuple(c for c in ALL_COLUMNS if c not in _NEEDS or _NEEDS[c] in chosen)


def _kind(col: str):
    if col == "case_tag":
        return CASE_LABELS
    return "i" if col in _INT_COLUMNS else "f"


@dataclass
class ScatterBlock:
    """Columnar batch of records; ``columns`` maps column name to a numpy array.

    ``case_tag`` is stored as integer codes into :data:`CASE_LABELS`.
    """

    start: int
    columns: dict

    def __len__(self) -> int:
        return len(self.columns["sample_id"])

    def records(self) -> Iterator[ScatterRecord]:
        cols = self.columns
        lists = {c: cols[c].tolist() if c in cols else None for c in ALL_COLUMNS}
        for i in range(len(self)):
            row = {}
            for c in ALL_COLUMNS:
                vals = lists[c]
                if vals is None:
                    row[c] = 0 if c == "kl_clipped" else math.nan
                elif c == "case_tag":
                    row[c] = CASE_LABELS[vals[i]]
                else:
                    row[c] = vals[i]
            yield ScatterRecord(**row)


def _check_block(out: dict, start: int) -> None:
    def fail(mask, what):
        bad = np.flatnonzero(mask)
        if bad.size:
            raise InvariantViolation(f"{what} violated at sample_id {start + int(bad[0])}")

    d = out["d_delta"]
    fail(d > out["d_tv"] + TOL, "d_delta <= d_tv")
    fail(out["clutter_delta"] > out["clutter_tv"] + TOL, "clutter_delta <= clutter_tv")
    fail(out["delta_star"] > d + TOL, "delta_star <= d_delta")
    fail(d > 2 * out["delta_star"] + TOL, "d_delta <= 2 delta_star")
    fail(np.abs(d - out["d_delta_def"]) > TOL, "closed form == three-event definition")
    fail(np.abs(out["delta_max"] - out["delta_max_closed"]) > TOL, "delta_max forms agree")
    disagree = out["omega"] != out["omega_tilde"]
    fail(disagree & (out["a"] < 0) & (out["b"] < 0), "not both a < 0 and b < 0")


def compute_block(
    config: SamplerConfig,
    block: int,
    measures: Sequence[str] = OPTIONAL_MEASURES,
    log_base_kl: float = math.e,
    kl_ceiling: float = KL_CEILING,
    block_size: int = BLOCK_SIZE,
) -> ScatterBlock:
    start = block * block_size
    stop = min(start + block_size, config.count)
    n = stop - start
    rng = block_rng(config.seed, block)
    P, Q = sample_pair_rows(config, rng, n, diffs=config.diffs_for(start, stop))
    want_kl = "kl" in measures or "kl-sym" in measures
    out = kernels.batch_measures(P, Q, log_base_kl, want_kl, "js" in measures)
    _check_block(out, start)

    if config.mode is Mode.UNCONSTRAINED:
        dom_diff = np.abs(out["b"])
    else:
        dom_diff = np.abs(P[:, config.mu] - Q[:, config.mu])
    cols = {
        "sample_id": np.arange(start, stop, dtype=np.int64),
        "m": np.full(n, config.m, dtype=np.int64),
        "dom_diff": dom_diff,
        "d_tv": out["d_tv"],
        "d_delta": out["d_delta"],
        "delta_star": out["delta_star"],
        "delta_max": out["delta_max"],
        "case_tag": out["case"].astype(np.int64),
        "clutter_tv": out["clutter_tv"],
        "clutter_delta": out["clutter_delta"],
        "a_term": out["a"],
        "b_term": out["b"],
    }
    if want_kl:
        cols["d_kl"] = out["d_kl"]
        cols["log_base_kl"] = np.full(n, float(log_base_kl))
        cols["kl_clipped"] = (out["d_kl"] > kl_ceiling).astype(np.int64)
    if "kl-sym" in measures:
        cols["d_kl_sym"] = out["d_kl"] + out["d_kl_rev"]
    if "js" in measures:
        cols["d_js"] = out["d_js"]
    return ScatterBlock(start, cols)


def iter_blocks(
    config: SamplerConfig,
    measures: Sequence[str] = OPTIONAL_MEASURES,
    log_base_kl: float = math.e,
    workers: int = 1,
    kl_ceiling: float = KL_CEILING,
    block_size: int = BLOCK_SIZE,
) -> Iterator[ScatterBlock]:
    """Yield the run's blocks in sample-id order."""
    columns_for(measures)
    nblocks = -(-config.count // block_size)

    def job(b):
        return compute_block(config, b, measures, log_base_kl, kl_ceiling, block_size)

    if workers <= 1:
        for b in range(nblocks):
            yield job(b)
        return
    window = 2 * workers
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for lo in range(0, nblocks, window):
            yield from pool.map(job, range(lo, min(lo + window, nblocks)))


def run_scatter(
    config: SamplerConfig,
    measures: Sequence[str] = OPTIONAL_MEASURES,
    log_base_kl: float = math.e,
    workers: int = 1,
    kl_ceiling: float = KL_CEILING,
) -> Iterator[ScatterRecord]:
    """Stream one :class:`ScatterRecord` per sampled pair, ordered by sample id."""
    for block in iter_blocks(config, measures, log_base_kl, workers, kl_ceiling):
        yield from block.records()


def collect(blocks: Iterable[ScatterBlock]) -> dict:
    """Concatenate blocks into one column dict (only for runs that fit in memory)."""
    blocks = list(blocks)
    if not blocks:
        raise EmptyInput("no blocks to collect")
    names = blocks[0].columns.keys()
    return {c: np.concatenate([b.columns[c] for b in blocks]) for c in names}


def _csv_chunk(block: ScatterBlock, cols: Sequence[str]) -> str:
    return kernels.format_rows([block.columns[c] for c in cols], [_kind(c) for c in cols])


def _jsonl_chunk(block: ScatterBlock, cols: Sequence[str]) -> str:
    lists = [block.columns[c].tolist() for c in cols]
    lines = []
    for row in zip(*lists):
        parts = []
        for c, v in zip(cols, row):
            if c == "case_tag":
                parts.append(f'"{c}": "{CASE_LABELS[v]}"')
            elif c in _INT_COLUMNS:
                parts.append(f'"{c}": {v}')
            elif math.isinf(v):
                parts.append(f'"{c}": "inf"')
            else:
                parts.append(f'"{c}": %.17g' % v)
        lines.append("{" + ", ".join(parts) + "}\n")
    return "".join(lines)


def _render(block: ScatterBlock, cols: Sequence[str], fmt: str) -> str:
    if fmt == "csv":
        return _csv_chunk(block, cols)
    if fmt == "jsonl":
        return _jsonl_chunk(block, cols)
    raise ValueError(f"unknown output format {fmt!r}")


class _Sink:
    def __init__(self, fh: IO[str]):
        self.fh = fh
        self.digest = hashlib.sha256()

    def __call__(self, text: str) -> None:
        try:
            self.fh.write(text)
        except OSError as exc:
            raise WriteFailure(str(exc)) from exc
        self.digest.update(text.encode("ascii"))


def write_blocks(
    blocks: Iterable[ScatterBlock],
    fh: IO[str],
    measures: Sequence[str] = OPTIONAL_MEASURES,
    fmt: str = "csv",
) -> tuple[int, str]:
    """Write blocks as CSV or JSON lines; returns ``(rows, sha256 hex of the bytes)``."""
    cols = columns_for(measures)
    sink = _Sink(fh)
    rows = 0
    if fmt == "csv":
        sink(",".join(cols) + "\n")
    for block in blocks:
        sink(_render(block, cols, fmt))
        rows += len(block)
    return rows, sink.digest.hexdigest()


def write_run(
    config: SamplerConfig,
    fh: IO[str],
    measures: Sequence[str] = OPTIONAL_MEASURES,
    fmt: str = "csv",
    log_base_kl: float = math.e,
    workers: int = 1,
    kl_ceiling: float = KL_CEILING,
) -> tuple[int, str]:
    """Run an experiment straight to ``fh``, rendering text inside the workers.

    Output bytes do not depend on ``workers``.  Returns ``(rows, sha256 hex)``.
    """
    cols = columns_for(measures)
    if fmt not in ("csv", "jsonl"):
        raise ValueError(f"unknown output format {fmt!r}")
    nblocks = -(-config.count // BLOCK_SIZE)

    def job(b):
        block = compute_block(config, b, measures, log_base_kl, kl_ceiling)
        return len(block), _render(block, cols, fmt)

    sink = _Sink(fh)
    if fmt == "csv":
        sink(",".join(cols) + "\n")
    rows = 0
    if workers <= 1:
        results = map(job, range(nblocks))
        for n, text in results:
            sink(text)
            rows += n
    else:
        window = 2 * workers
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for lo in range(0, nblocks, window):
                for n, text in pool.map(job, range(lo, min(lo + window, nblocks))):
                    sink(text)
                    rows += n
    return rows, sink.digest.hexdigest()


def read_csv(path_or_fh) -> dict:
    """Load a CSV written by :func:`write_blocks` back into columns."""
    fh = open(path_or_fh, newline="") if isinstance(path_or_fh, str) else path_or_fh
    try:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise EmptyInput("empty CSV input")
        raw = list(zip(*reader))
    finally:
        if isinstance(path_or_fh, str):
            fh.close()
    if not raw:
        raise EmptyInput("CSV has a header but no rows")
    cols = {}
    for name, values in zip(header, raw):
        if name == "case_tag":
            cols[name] = np.array([CASE_LABELS.index(v) for v in values], dtype=np.int64)
        elif name in _INT_COLUMNS:
            cols[name] = np.array(values, dtype=np.int64)
        else:
            cols[name] = np.array(values, dtype=float)
    return cols


def as_columns(records) -> dict:
    """Normalize records (column dict, block, blocks or ScatterRecords) to columns."""
    if isinstance(records, dict):
        return records
    if isinstance(records, ScatterBlock):
        return records.columns
    items = list(records)
    if not items:
        raise EmptyInput("no records")
    if isinstance(items[0], ScatterBlock):
        return collect(items)
    cols = {}
    for name in ALL_COLUMNS:
        vals = [getattr(r, name) for r in items]
        if name == "case_tag":
            cols[name] = np.array([CASE_LABELS.index(str(v)) for v in vals], dtype=np.int64)
        else:
            cols[name] = np.array(vals)
    return cols


_ALIASES = {
    "kl": "d_kl",
    "kl-sym": "d_kl_sym",
    "js": "d_js",
    "tv": "d_tv",
    "delta": "d_delta",
    "delta-star": "delta_star",
    "delta-max": "delta_max",
}


def _column_name(measure: str, cols: dict) -> str:
    name = _ALIASES.get(measure, measure)
    if name not in cols or name in _INT_COLUMNS or name == "case_tag":
        raise UnknownMeasure(f"measure {measure!r} is not available in these records")
    return name


@dataclass(frozen=True)
class ThresholdReport:
    threshold: float
    measure_name: str
    reference_measure: str
    reference_threshold: float
    false_positive_rate: float
    false_negative_rate: float
    sample_count: int
    false_positives: int
    false_negatives: int


def threshold_sweep(
    records,
    measure_name: str,
    reference_threshold: float,
    thresholds: Sequence[float],
) -> list[ThresholdReport]:
    """Compare a thresholded measure with the Delta-divergence reference labels.

    A record is incongruent by reference when ``d_delta > reference_threshold``
    and flagged by the candidate when ``measure > threshold``.  The false
    positive rate is the share of congruent records that get flagged; the false
    negative rate the share of incongruent ones that do not.
    """
    if not 0 <= reference_threshold <= 1:
        raise ValueError(f"reference threshold must lie in [0, 1], got {reference_threshold!r}")
    cols = as_columns(records)
    name = _column_name(measure_name, cols)
    n = len(cols["d_delta"])
    if n == 0:
        raise EmptyInput("no records")
    incongruent = cols["d_delta"] > reference_threshold
    values = cols[name]
    n_pos = int(incongruent.sum())
    n_neg = n - n_pos
    reports = []
    for t in thresholds:
        flagged = values > t
        fp = int((flagged & ~incongruent).sum())
        fn = int((~flagged & incongruent).sum())
        reports.append(
            ThresholdReport(
                threshold=float(t),
                measure_name=name,
                reference_measure="d_delta",
                reference_threshold=float(reference_threshold),
                false_positive_rate=fp / n_neg if n_neg else 0.0,
                false_negative_rate=fn / n_pos if n_pos else 0.0,
                sample_count=n,
                false_positives=fp,
                false_negatives=fn,
            )
        )
    return reports


@dataclass(frozen=True)
class BinSummary:
    lo: float
    hi: float
    count: int
    # measure -> (min, max, mean)
    stats: dict


BINNED_MEASURES = ("d_tv", "d_kl", "delta_star", "delta_max")


def bin_by_delta(records, bin_width: float) -> list[BinSummary]:
    """Group records by ``d_delta`` into bins of ``bin_width`` and summarize each."""
    if not 0 < bin_width <= 1:
        raise ValueError(f"bin width must lie in (0, 1], got {bin_width!r}")
    cols = as_columns(records)
    d = cols["d_delta"]
    if len(d) == 0:
        raise EmptyInput("no records")
    nbins = max(1, math.ceil(1.0 / bin_width - 1e-9))
    idx = np.minimum((d / bin_width).astype(np.int64), nbins - 1)
    order = np.argsort(idx, kind="stable")
    sorted_idx = idx[order]
    present, starts = np.unique(sorted_idx, return_index=True)
    ends = np.append(starts[1:], len(order))
    measures = [c for c in BINNED_MEASURES if c in cols]
    out = []
    for b, s, e in zip(present.tolist(), starts.tolist(), ends.tolist()):
        rows = order[s:e]
        stats = {}
        for c in measures:
            v = cols[c][rows]
            stats[c] = (float(v.min()), float(v.max()), float(v.mean()))
        out.append(BinSummary(b * bin_width, (b + 1) * bin_width, e - s, stats))
    return out


@dataclass(frozen=True)
class MetricViolation:
    index: int
    p: tuple
    q: tuple
    r: tuple
    d_pq: float
    d_qr: float
    d_pr: float

    @property
    def margin(self) -> float:
        return self.d_pr - self.d_pq - self.d_qr

    def as_dict(self) -> dict:
        return {
            "index": self.index,
            "p": list(self.p),
            "q": list(self.q),
            "r": list(self.r),
            "d_pq": self.d_pq,
            "d_qr": self.d_qr,
            "d_pr": self.d_pr,
            "margin": self.margin,
        }


def metric_violation_search(
    m: int, triples: int, seed: int, block_size: int = BLOCK_SIZE
) -> Optional[MetricViolation]:
    """Search uniform random triples for a triangle-inequality failure of Delta divergence.

    Returns the first triple (in sample order) with
    ``D(p, r) > D(p, q) + D(q, r) + 1e-12``, or ``None``.
    """
    if m < 2:
        raise ValueError(f"need at least 2 classes, got m={m}")
    for start in range(0, triples, block_size):
        n = min(block_size, triples - start)
        rng = block_rng(seed, start // block_size)
        # full blocks even at the tail, so triple k is the same for any budget
        P = sample_simplex_rows(rng, block_size, m)[:n]
        Q = sample_simplex_rows(rng, block_size, m)[:n]
        R = sample_simplex_rows(rng, block_size, m)[:n]
        d_pq = kernels.batch_delta(P, Q)
        d_qr = kernels.batch_delta(Q, R)
        d_pr = kernels.batch_delta(P, R)
        bad = np.flatnonzero(d_pr > d_pq + d_qr + TOL)
        if bad.size:
            i = int(bad[0])
            return MetricViolation(
                start + i,
                tuple(P[i].tolist()),
                tuple(Q[i].tolist()),
                tuple(R[i].tolist()),
                float(d_pq[i]),
                float(d_qr[i]),
                float(d_pr[i]),
            )
    return None


def report_json(obj) -> str:
    """Serialize dataclass reports with ``inf`` rendered as the string "inf"."""

    def conv(x):
        if isinstance(x, float) and math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if isinstance(x, dict):
            return {k: conv(v) for k, v in x.items()}
        if isinstance(x, (list, tuple)):
            return [conv(v) for v in x]
        return x

    return json.dumps(conv(obj))
