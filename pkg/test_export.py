"""
test_export.py — CSV/JSON artifacts, configuration hashing and PDF reports.

Run with: uv run pytest test_export.py -v
"""

import sys
import os
import json
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '.')))
from core.certify import certify_model
from core.config import (
    DEFAULT_SEED,
    ENV_OUTPUT_DIR,
    ENV_SEED,
    SCHEMA_VERSION,
    CliConfig,
    default_output_dir,
    default_seed,
    format_rational,
    parse_rational,
)
from core.errors import UsageError
from core.experiments import fence_experiment
from core.export import (
    dumps_json,
    fence_csv_text,
    read_fence_csv,
    read_json,
    with_schema,
    write_fence_csv,
    write_json,
)
from core.reporting import ReportGenerator


@pytest.fixture(scope="module")
def small_fence():
    return fence_experiment(2, 3, 20, seed=11)


class TestConfig:
    def test_parse_rational(self):
        assert parse_rational("1/3") == Fraction(1, 3)
        assert parse_rational(" 2 ") == 2
        assert format_rational(Fraction(2, 6)) == "1/3"
        with pytest.raises(UsageError, match="--y"):
            parse_rational("one third", "--y")
        with pytest.raises(UsageError):
            parse_rational("1/0")

    def test_seed_from_environment(self, monkeypatch):
        monkeypatch.delenv(ENV_SEED, raising=False)
        assert default_seed() == DEFAULT_SEED
        monkeypatch.setenv(ENV_SEED, "0x10")
        assert default_seed() == 16
        monkeypatch.setenv(ENV_SEED, "-4")
        with pytest.raises(UsageError):
            default_seed()

    def test_output_dir_from_environment(self, monkeypatch, tmp_path):
        monkeypatch.setenv(ENV_OUTPUT_DIR, str(tmp_path))
        assert default_output_dir() == tmp_path

    def test_hash_ignores_paths_and_workers(self):
        a = CliConfig("fence", {"d": 2}, seed=1, output="a.json", parallel=1)
        b = CliConfig("fence", {"d": 2}, seed=1, output="b.json", parallel=8)
        c = CliConfig("fence", {"d": 3}, seed=1)
        assert a.config_hash() == b.config_hash()
        assert a.config_hash() != c.config_hash()
        assert a.header_lines()[1] == "# seed 1"

    def test_default_output_path(self, monkeypatch, tmp_path):
        monkeypatch.setenv(ENV_OUTPUT_DIR, str(tmp_path))
        cfg = CliConfig("delta", {"n": 1}, output_format="json")
        assert cfg.output_path() == tmp_path / f"delta_{cfg.config_hash()[:12]}.json"


class TestJson:
    def test_schema_fields(self):
        payload = with_schema("delta", {"n": 1})
        assert payload["schema_version"] == SCHEMA_VERSION
        assert payload["kind"] == "delta"

    def test_write_and_read(self, tmp_path):
        path = write_json(tmp_path / "sub" / "x.json", with_schema("mu", {"d": 6}))
        assert read_json(path)["d"] == 6
        assert dumps_json({"b": 1, "a": 2}).index('"a"') < dumps_json({"b": 1, "a": 2}).index('"b"')

    def test_unknown_schema(self, tmp_path):
        path = tmp_path / "old.json"
        path.write_text(json.dumps({"schema_version": 0}))
        with pytest.raises(ValueError):
            read_json(path)


class TestFenceCsv:
    def test_header_and_rows(self, small_fence):
        lines = fence_csv_text(small_fence).splitlines()
        assert lines[0] == "d,k,reps,mean_A,stderr_A,scaled,mean_root_visits,aborted"
        assert len(lines) == 4
        assert lines[1].startswith("2,1,20,2,0,1,")

    def test_write_and_read(self, small_fence, tmp_path):
        path = write_fence_csv(tmp_path / "fence.csv", small_fence)
        rows = read_fence_csv(path)
        assert [r["k"] for r in rows] == [1, 2, 3]
        for row, expected in zip(rows, small_fence.rows()):
            assert row["mean_A"] == pytest.approx(expected["mean_A"], rel=1e-9)

    def test_bad_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(ValueError):
            read_fence_csv(path)


class TestReport:
    def test_pdf_written(self, small_fence, tmp_path):
        cert = certify_model("phi6", 66)
        path = ReportGenerator(tmp_path).generate_report(
            ["# frogtrees 0.1.0", "# seed 11"], fence=small_fence, certificates=[cert], name="combined"
        )
        assert Path(path).exists()
        assert path.endswith(".pdf")

    def test_rows(self, small_fence):
        rows = ReportGenerator.fence_rows(small_fence)
        assert rows[0][0] == "k"
        assert len(rows) == 4
        cert_rows = ReportGenerator.certificate_rows([certify_model("phi6", 65)])
        assert cert_rows[1][-1] == "FAIL"
        assert cert_rows[1][1] == "1/3"
