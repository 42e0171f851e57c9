import csv
import io
import json

import pytest
from hypothesis import given, strategies as st

from stridecap.core import ValidationError
from stridecap.report import (ORDER, AggregateTable, MetricStat, RunRecord, UsageError,
                              aggregate_runs, emit_table, mean_std, table_from_json)

FULL_ORDER = ["B@4", "METEOR", "CIDEr", "BERT P", "BERT R", "BERT F1", "SBERT", "Align_DTW",
              "Contradict_NLI", "NSP True", "NSP Shuffled", "NSP Delta"]


def _record(seed, corpus, fp="fp"):
    return RunRecord.from_report({"seed": seed, "corpus": corpus, "config_fingerprint": fp})


def _full_corpus(x):
    return {"bleu4": x, "meteor": x, "cider": x, "bert": {"p": x, "r": x, "f1": x}, "sbert": x,
            "dtw_align": x, "nli_contradict": x, "nsp": {"true": x, "shuffled": x, "delta": x}}


def test_mean_std_textbook():
    assert mean_std([1.0, 2.0, 3.0]) == (2.0, 1.0)
    assert mean_std([5.0]) == (5.0, 0.0)
    assert mean_std([1.0, 3.0], ddof=0) == (2.0, 1.0)


def test_paper_style_cell():
    t = aggregate_runs([_record(i, {"cider": v}) for i, v in enumerate([4.15, 4.18, 4.21])])
    assert t.stats["cider"].cell() == "4.18 (0.03)"
    assert emit_table(t, "markdown").splitlines()[2] == "| 4.18 (0.03) |"


def test_single_record_has_zero_std():
    t = aggregate_runs([_record(0, {"bleu4": 0.25})])
    assert t.stats["bleu4"] == MetricStat(0.25, 0.0, 1)
    assert t.stats["bleu4"].cell() == "0.25 (0.00)"


def test_mixed_fingerprints_rejected_unless_forced():
    recs = [_record(0, {"bleu4": 1.0}, "a"), _record(1, {"bleu4": 2.0}, "b")]
    with pytest.raises(ValidationError):
        aggregate_runs(recs)
    assert aggregate_runs(recs, force=True).config_fingerprint == "mixed"


def test_population_flag_and_scale():
    recs = [_record(i, {"bleu4": v}) for i, v in enumerate([0.01, 0.03])]
    t = aggregate_runs(recs, population=True, scale={"bleu4": 100.0})
    assert t.stats["bleu4"].mean == pytest.approx(2.0)
    assert t.stats["bleu4"].std == pytest.approx(1.0)
    assert t.ddof == 0


def test_column_order_in_every_format():
    t = aggregate_runs([_record(i, _full_corpus(0.1 * i)) for i in range(3)])
    md = emit_table(t, "markdown").splitlines()
    assert md[0] == "| " + " | ".join(FULL_ORDER) + " |"
    assert len(md) == 3
    rows = list(csv.reader(io.StringIO(emit_table(t, "csv"))))
    assert [c.removesuffix("_mean") for c in rows[0][2::2]] == ORDER
    assert len(rows) == 2 and rows[1][0] == "corpus"
    assert list(json.loads(emit_table(t, "json"))["metrics"]) == ORDER


def test_nsp_and_nli_absent_columns_are_dropped():
    t = aggregate_runs([_record(0, {"bleu4": 0.2, "nsp": None})])
    assert t.columns() == ["bleu4"]


def test_json_round_trip():
    t = aggregate_runs([_record(i, _full_corpus(0.3 + 0.01 * i)) for i in range(3)])
    assert table_from_json(emit_table(t, "json")) == t


def test_unknown_format():
    with pytest.raises(UsageError):
        emit_table(AggregateTable({}), "html")


def test_load_from_file(tmp_path):
    p = tmp_path / "m.json"
    p.write_text(json.dumps({"seed": 4, "corpus": {"bleu4": 0.5}, "config_fingerprint": "z",
                             "created_at": "2026-01-01T00:00:00+00:00"}))
    r = RunRecord.load(p)
    assert (r.seed, r.config_fingerprint, r.timestamp) == (4, "z", "2026-01-01T00:00:00+00:00")
    assert r.corpus_values() == {"bleu4": 0.5}


@given(st.lists(st.floats(-100, 100, allow_nan=False), min_size=1, max_size=6), st.randoms())
def test_aggregate_is_permutation_invariant(values, rnd):
    recs = [_record(i, {"cider": v, "bert": {"p": v, "r": -v, "f1": v / 2}}) for i, v in enumerate(values)]
    shuffled = list(recs)
    rnd.shuffle(shuffled)
    assert aggregate_runs(shuffled) == aggregate_runs(recs)


@given(st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=1, max_size=8))
def test_std_non_negative(values):
    mean, std = mean_std(values)
    assert std >= 0
    assert min(values) - 1e-9 <= mean <= max(values) + 1e-9
