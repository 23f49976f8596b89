import io
import json
import math
from pathlib import Path

import numpy as np
import pytest

from deltadiv.delta import delta_divergence
from deltadiv.errors import EmptyInput, InvariantViolation, UnknownMeasure
from deltadiv.experiments import (
    ALL_COLUMNS,
    ScatterRecord,
    _check_block,
    as_columns,
    bin_by_delta,
    collect,
    columns_for,
    iter_blocks,
    metric_violation_search,
    read_csv,
    run_scatter,
    threshold_sweep,
    write_blocks,
    write_run,
)
from deltadiv import kernels
from deltadiv.sampling import SamplerConfig

FIXTURE = Path(__file__).parent / "fixtures" / "metric_violation_m3.json"


def _run(config, **kw):
    buf = io.StringIO()
    rows, digest = write_run(config, buf, **kw)
    return buf.getvalue(), rows, digest


def test_columns_for():
    assert columns_for(("kl", "kl-sym", "js")) == ALL_COLUMNS
    base = columns_for(())
    assert "d_kl" not in base and "d_js" not in base and "kl_clipped" not in base
    assert "d_kl" in columns_for(("kl-sym",))
    with pytest.raises(UnknownMeasure):
        columns_for(("tv",))


def test_records_stream():
    cfg = SamplerConfig(m=3, count=50, seed=5)
    recs = list(run_scatter(cfg))
    assert len(recs) == 50
    assert [r.sample_id for r in recs] == list(range(50))
    r = recs[7]
    assert isinstance(r, ScatterRecord)
    assert r.case_tag in ("LabelAgreement", "DisagreeBothNonnegative", "DisagreeMixedSign")
    assert r.d_kl_sym >= r.d_kl >= 0
    assert r.log_base_kl == math.e


def test_determinism_and_workers():
    cfg = SamplerConfig(m=6, count=30000, seed=42)
    a = _run(cfg)
    b = _run(cfg)
    c = _run(cfg, workers=4)
    assert a == b == c
    assert a[1] == 30000
    other = _run(SamplerConfig(m=6, count=30000, seed=43))
    assert other[2] != a[2]


def test_write_blocks_matches_write_run():
    cfg = SamplerConfig(m=3, count=20000, seed=1)
    buf = io.StringIO()
    rows, digest = write_blocks(iter_blocks(cfg, workers=3), buf)
    assert (buf.getvalue(), rows, digest) == _run(cfg)


def test_two_class_audit(tmp_path):
    cfg = SamplerConfig(m=2, count=10**4, seed=1)
    path = tmp_path / "run.csv"
    with open(path, "w") as fh:
        write_run(cfg, fh)
    cols = read_csv(str(path))
    assert len(cols["d_delta"]) == 10**4
    assert np.abs(cols["d_delta"] - cols["d_tv"]).max() <= 1e-12
    # one nondominant class at most: merging changes nothing
    np.testing.assert_array_equal(cols["clutter_tv"], cols["clutter_delta"])
    disagree = cols["case_tag"] != 0
    assert (cols["clutter_tv"][disagree] == 0).all()


def test_csv_roundtrip_is_exact():
    cfg = SamplerConfig(m=4, count=300, seed=9)
    text, _, _ = _run(cfg)
    back = read_csv(io.StringIO(text))
    mem = collect(iter_blocks(cfg))
    for c in mem:
        np.testing.assert_array_equal(back[c], mem[c], err_msg=c)


def test_jsonl_output():
    cfg = SamplerConfig(m=3, count=20, seed=2)
    text, rows, _ = _run(cfg, fmt="jsonl", measures=("js",))
    lines = [json.loads(x) for x in text.splitlines()]
    assert rows == 20 and len(lines) == 20
    assert "d_kl" not in lines[0] and "d_js" in lines[0]
    assert lines[3]["sample_id"] == 3


def test_infinite_kl_written():
    cfg = SamplerConfig(m=3, mode="dominant-diff", mu=0, diff=1.0, count=10, seed=0)
    text, _, _ = _run(cfg)
    cols = read_csv(io.StringIO(text))
    assert np.isinf(cols["d_kl"]).all()
    assert (cols["kl_clipped"] == 1).all()
    jl = _run(cfg, fmt="jsonl")[0]
    assert json.loads(jl.splitlines()[0])["d_kl"] == "inf"


def test_dominant_diff_zero_kl_spread():
    cfg = SamplerConfig(m=6, mode="dominant-diff", mu=0, diff=0.0, count=10**5, seed=11)
    cols = collect(iter_blocks(cfg, measures=("kl",)))
    assert (cols["dom_diff"] == 0).all()
    assert cols["d_kl"].max() > 2.0


def test_diff_grid_run():
    cfg = SamplerConfig(m=3, mode="dominant-diff", mu=1, diff_grid=(0.0, 0.25, 0.5), count=9000, seed=3)
    cols = collect(iter_blocks(cfg))
    got = np.round(cols["dom_diff"], 12)
    np.testing.assert_array_equal(np.unique(got), [0.0, 0.25, 0.5])
    assert (got[:3000] == 0).all() and (got[-3000:] == 0.5).all()


def test_check_block_catches_corruption():
    cfg = SamplerConfig(m=3, count=100, seed=0)
    from deltadiv.sampling import block_rng, sample_pair_rows

    P, Q = sample_pair_rows(cfg, block_rng(0, 0), 100)
    out = kernels.batch_measures(P, Q)
    _check_block(out, 0)
    out["d_delta"] = out["d_delta"].copy()
    out["d_delta"][17] += 1e-6
    with pytest.raises(InvariantViolation, match="sample_id 17"):
        _check_block(out, 0)


def test_threshold_sweep_self_consistency():
    cols = collect(iter_blocks(SamplerConfig(m=6, count=20000, seed=4)))
    (rep,) = threshold_sweep(cols, "delta", 0.3, [0.3])
    assert rep.false_positives == rep.false_negatives == 0
    assert rep.false_positive_rate == rep.false_negative_rate == 0.0
    assert rep.sample_count == 20000
    reps = threshold_sweep(cols, "kl", 0.3, [0.0, 1.0, 1e9])
    assert reps[0].false_negative_rate == 0.0 and reps[0].false_positive_rate > 0.9
    assert reps[2].false_positive_rate == 0.0 and reps[2].false_negative_rate == 1.0
    with pytest.raises(UnknownMeasure):
        threshold_sweep(cols, "case_tag", 0.3, [1])
    with pytest.raises(ValueError):
        threshold_sweep(cols, "kl", 1.5, [1])


def test_threshold_sweep_two_class_tv():
    cols = collect(iter_blocks(SamplerConfig(m=2, count=5000, seed=4)))
    (rep,) = threshold_sweep(cols, "tv", 0.3, [0.3])
    assert rep.false_positives == rep.false_negatives == 0


def test_bin_by_delta():
    cols = collect(iter_blocks(SamplerConfig(m=6, count=20000, seed=6)))
    bins = bin_by_delta(cols, 0.05)
    assert sum(b.count for b in bins) == 20000
    for b in bins:
        lo_tv, hi_tv, _ = b.stats["d_tv"]
        assert lo_tv >= b.lo - 1e-12
    zeros = {"d_delta": np.zeros(4), "d_tv": np.array([0.0, 0.1, 0.2, 0.0])}
    (only,) = bin_by_delta(zeros, 0.01)
    assert only.count == 4 and only.stats["d_tv"][0] == 0.0
    with pytest.raises(EmptyInput):
        bin_by_delta({"d_delta": np.array([])}, 0.1)


def test_as_columns_from_records():
    recs = list(run_scatter(SamplerConfig(m=3, count=10, seed=0)))
    cols = as_columns(recs)
    assert len(cols["d_delta"]) == 10


def test_metric_search_two_classes_none():
    assert metric_violation_search(2, 10**4, seed=0) is None


def test_metric_violation_fixture():
    doc = json.loads(FIXTURE.read_text())
    v = doc["violation"]
    p, q, r = v["p"], v["q"], v["r"]
    d_pq = delta_divergence(p, q).value
    d_qr = delta_divergence(q, r).value
    d_pr = delta_divergence(p, r).value
    assert d_pr - d_pq - d_qr > 1e-9
    assert d_pr - d_pq - d_qr == pytest.approx(v["margin"], abs=1e-12)
    found = metric_violation_search(doc["classes"], doc["triples"], doc["seed"])
    assert found.index == v["index"]
    assert list(found.p) == p
