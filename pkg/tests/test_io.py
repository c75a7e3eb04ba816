import json

import numpy as np
import pytest

from probeval import (
    DiscreteForecast,
    HistogramForecast,
    LeaderboardRow,
    QuantileForecast,
    RunRecord,
    SampleForecast,
)
from probeval.io import (
    ForecastRecord,
    read_forecasts,
    read_runs,
    validate_forecast_file,
    validate_run_file,
    write_forecasts,
    write_leaderboard,
    write_runs,
    write_scores,
)
from probeval.errors import (
    AmbiguousFormError,
    DuplicateKeyError,
    InvalidValueError,
    RecordParseError,
    UnknownFormError,
)


def write_lines(path, lines):
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")


class TestReadForecasts:
    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("", encoding="utf-8")
        assert read_forecasts(path) == []

    def test_single_histogram_record(self, tmp_path):
        path = tmp_path / "one.jsonl"
        write_lines(path, [json.dumps(
            {"id": "a", "target": 0.5, "type": "histogram", "edges": [0, 1], "probs": [1.0]}
        )])
        records = read_forecasts(path)
        assert len(records) == 1
        assert records[0].id == "a"
        assert records[0].target == 0.5
        assert isinstance(records[0].forecast, HistogramForecast)

    def test_quantile_and_sample_records(self, tmp_path):
        path = tmp_path / "two.jsonl"
        write_lines(path, [
            json.dumps({"id": "q", "target": 1.0, "type": "quantiles",
                        "levels": [0.25, 0.75], "values": [0.0, 1.0]}),
            json.dumps({"id": "s", "target": 2.0, "type": "samples", "values": [1.0, 2.0]}),
        ])
        records = read_forecasts(path)
        assert isinstance(records[0].forecast, QuantileForecast)
        assert isinstance(records[1].forecast, SampleForecast)

    def test_two_forms_is_ambiguous(self, tmp_path):
        path = tmp_path / "amb.jsonl"
        write_lines(path, [json.dumps(
            {"id": "a", "target": 0.5, "type": "histogram",
             "edges": [0, 1], "probs": [1.0], "levels": [0.5], "values": [1.0]}
        )])
        with pytest.raises(AmbiguousFormError):
            read_forecasts(path)

    def test_unknown_form(self, tmp_path):
        path = tmp_path / "unk.jsonl"
        write_lines(path, [json.dumps({"id": "a", "target": 0.5, "type": "gaussian"})])
        with pytest.raises(UnknownFormError):
            read_forecasts(path)

    def test_parse_error_carries_line_number(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        write_lines(path, [
            json.dumps({"id": "a", "target": 0.0, "type": "samples", "values": [1.0]}),
            "not json at all {",
        ])
        with pytest.raises(RecordParseError) as err:
            read_forecasts(path)
        assert err.value.line == 2

    def test_non_finite_target_rejected(self, tmp_path):
        path = tmp_path / "nan.jsonl"
        write_lines(path, ['{"id": "a", "target": NaN, "type": "samples", "values": [1.0]}'])
        with pytest.raises(RecordParseError):
            read_forecasts(path)

    def test_missing_field(self, tmp_path):
        path = tmp_path / "missing.jsonl"
        write_lines(path, [json.dumps({"id": "a", "type": "samples", "values": [1.0]})])
        with pytest.raises(RecordParseError, match="target"):
            read_forecasts(path)

    def test_round_trip(self, tmp_path):
        records = [
            ForecastRecord("h", 0.1, HistogramForecast([0, 1, 2], [0.3, 0.7])),
            ForecastRecord("q", 0.2, QuantileForecast([0.1, 0.9], [-1.0, 1.0])),
            ForecastRecord("s", 0.3, SampleForecast([5.0, 5.0, 6.0])),
        ]
        path = tmp_path / "rt.jsonl"
        write_forecasts(records, path)
        back = read_forecasts(path)
        assert [r.id for r in back] == ["h", "q", "s"]
        np.testing.assert_array_equal(back[0].forecast.edges, [0, 1, 2])
        np.testing.assert_array_equal(back[1].forecast.values, [-1.0, 1.0])


class TestReadRuns:
    def test_two_rows(self, tmp_path):
        path = tmp_path / "runs.csv"
        write_lines(path, [
            "model,dataset,fold,metric,value",
            "a,x,0,crps,1.5",
            "b,x,0,crps,2.5",
        ])
        records = read_runs(path)
        assert records == [RunRecord("a", "x", 0, "crps", 1.5), RunRecord("b", "x", 0, "crps", 2.5)]

    def test_duplicate_key(self, tmp_path):
        path = tmp_path / "dup.csv"
        write_lines(path, [
            "model,dataset,fold,metric,value",
            "a,x,0,crps,1.5",
            "a,x,0,crps,1.6",
        ])
        with pytest.raises(DuplicateKeyError, match="line 3"):
            read_runs(path)

    def test_nan_value(self, tmp_path):
        path = tmp_path / "nan.csv"
        write_lines(path, ["model,dataset,fold,metric,value", "a,x,0,crps,NaN"])
        with pytest.raises(InvalidValueError):
            read_runs(path)

    def test_bad_header(self, tmp_path):
        path = tmp_path / "hdr.csv"
        write_lines(path, ["model,dataset,value", "a,x,1.0"])
        with pytest.raises(RecordParseError, match="header"):
            read_runs(path)

    def test_bad_fold(self, tmp_path):
        path = tmp_path / "fold.csv"
        write_lines(path, ["model,dataset,fold,metric,value", "a,x,first,crps,1.0"])
        with pytest.raises(RecordParseError, match="fold"):
            read_runs(path)

    def test_round_trip_exact(self, tmp_path):
        records = [
            RunRecord("a", "x", 0, "crps", 0.1 + 0.2),
            RunRecord("b", "x", 4, "crps", 1.0 / 3.0),
            RunRecord("a", "y", 1, "rmse", -2.718281828459045e-12),
        ]
        path = tmp_path / "rt.csv"
        write_runs(records, path)
        assert read_runs(path) == records


class TestWriteLeaderboard:
    def test_three_decimal_rounding(self, tmp_path):
        rows = [LeaderboardRow(1, "m", 0.000049, 1.234567, 1.4)]
        path = tmp_path / "lb.csv"
        write_leaderboard(rows, path)
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "Rank,Model,p-value,Observed,AverageRank"
        assert lines[1] == "1,m,0.000,1.235,1.400"

    def test_empty_rows_header_only(self, tmp_path):
        path = tmp_path / "lb.csv"
        write_leaderboard([], path)
        assert path.read_text(encoding="utf-8") == "Rank,Model,p-value,Observed,AverageRank\n"

    def test_two_rows_in_rank_order(self, tmp_path):
        rows = [
            LeaderboardRow(1, "best", 0.001, 0.5, 1.0),
            LeaderboardRow(2, "other", 1.0, 1.5, 2.0),
        ]
        path = tmp_path / "lb.csv"
        write_leaderboard(rows, path)
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[1].startswith("1,best,")
        assert lines[2].startswith("2,other,")

    def test_lf_line_endings(self, tmp_path):
        path = tmp_path / "lb.csv"
        write_leaderboard([LeaderboardRow(1, "m", 0.5, 0.5, 1.0)], path)
        raw = path.read_bytes()
        assert b"\r" not in raw
        assert raw.endswith(b"\n")

    def test_wide_columns_keep_full_precision(self, tmp_path):
        rows = [LeaderboardRow(1, "m", 1.0 / 20001.0, 1.2345678901234, 1.4)]
        path = tmp_path / "lb.csv"
        write_leaderboard(rows, path, wide=True)
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0].endswith("p-value-full,Observed-full,AverageRank-full")
        assert repr(1.0 / 20001.0) in lines[1]

    def test_byte_identical_rewrites(self, tmp_path):
        rows = [LeaderboardRow(1, "m", 0.25, 0.333333, 1.0)]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        write_leaderboard(rows, a)
        write_leaderboard(rows, b)
        assert a.read_bytes() == b.read_bytes()


class TestWriteScores:
    def test_table_layout(self, tmp_path):
        from probeval import score_batch

        records = [
            ForecastRecord("a", 0.0, DiscreteForecast([0.0, 1.0], [0.5, 0.5])),
            ForecastRecord("b", 1.0, DiscreteForecast([1.0], [1.0])),
        ]
        results = score_batch(records, ["crps", "rmse"])
        path = tmp_path / "scores.csv"
        write_scores(records, results, path)
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "id,target,crps,rmse"
        assert lines[1].split(",")[0] == "a"
        assert lines[1].split(",")[3] == ""  # rmse has no per-instance value
        assert lines[-1].split(",")[0] == "mean"
        assert float(lines[-1].split(",")[2]) == pytest.approx(results["crps"].mean)
        assert float(lines[-1].split(",")[3]) == pytest.approx(results["rmse"].mean)


class TestValidators:
    def test_clean_forecast_file(self, tmp_path):
        path = tmp_path / "ok.jsonl"
        write_lines(path, [json.dumps(
            {"id": "a", "target": 0.5, "type": "histogram", "edges": [0, 1], "probs": [1.0]}
        )])
        n, repaired, violations = validate_forecast_file(path)
        assert (n, repaired, violations) == (1, 0, [])

    def test_crossing_quantiles_counted(self, tmp_path):
        path = tmp_path / "crossing.jsonl"
        write_lines(path, [json.dumps(
            {"id": "q", "target": 0.5, "type": "quantiles",
             "levels": [0.2, 0.8], "values": [2.0, 1.0]}
        )])
        n, repaired, violations = validate_forecast_file(path)
        assert n == 1
        assert repaired == 1
        assert any("repaired" in v.message for v in violations)

    def test_mass_deviation_reported(self, tmp_path):
        path = tmp_path / "mass.jsonl"
        write_lines(path, [json.dumps(
            {"id": "h", "target": 0.5, "type": "histogram", "edges": [0, 1, 2], "probs": [0.5, 0.4]}
        )])
        n, repaired, violations = validate_forecast_file(path)
        assert any("mass" in v.message for v in violations)

    def test_run_duplicates_listed_with_lines(self, tmp_path):
        path = tmp_path / "dup.csv"
        write_lines(path, [
            "model,dataset,fold,metric,value",
            "a,x,0,crps,1.0",
            "a,x,0,crps,2.0",
        ])
        n, violations = validate_run_file(path)
        assert n == 2
        assert len(violations) == 1
        assert violations[0].line == 3
        assert "line 2" in violations[0].message

    def test_clean_run_file(self, tmp_path):
        path = tmp_path / "ok.csv"
        write_lines(path, ["model,dataset,fold,metric,value", "a,x,0,crps,1.0"])
        assert validate_run_file(path) == (1, [])
