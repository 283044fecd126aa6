# SPDX-FileCopyrightText: fradelay developers (2026)
# SPDX-License-Identifier: GPL-3.0-or-later
import json

from click.testing import CliRunner
import pytest

from fradelay.cli import cli
from fradelay.helper import parse_csv

STABLE = {"alpha": 0.5, "tau": 1.0, "A": [[-1]], "T": 2.0, "h_step": 0.05}


@pytest.fixture
def run(tmp_path):
    def invoke(document, *args, output=True, env=None):
        path = tmp_path / "input.json"
        path.write_text(document if isinstance(document, str) else json.dumps(document))
        out = tmp_path / "result.out"
        if out.exists():
            out.unlink()
        options = ["--input", str(path)]
        if output:
            options += ["--output", str(out)]
        result = CliRunner().invoke(cli, options + list(args), env=env)
        text = out.read_text() if out.exists() else None
        return result, text
    return invoke


class TestRegionCommands:
    def test_inside(self, run):
        result, text = run({"alpha": 0.5, "tau": 1, "lambdas": [-1, [-0.5, 0.5]]}, "region-check")
        assert result.exit_code == 0
        report = json.loads(text)
        assert report["all_member"] is True
        assert [e["member"] for e in report["eigenvalues"]] == [True, True]
        assert "REGION OK" in result.output

    def test_outside(self, run):
        result, text = run({"alpha": 0.5, "tau": 1, "A": [[1, 0], [0, -1]]}, "region-check")
        assert result.exit_code == 3
        assert json.loads(text)["all_member"] is False
        assert "REGION CRITICAL" in result.output

    def test_invalid(self, run):
        result, text = run({"alpha": 2, "tau": 1, "lambdas": [-1]}, "region-check")
        assert result.exit_code == 2
        assert text is None
        assert "REGION-CHECK UNKNOWN - alpha" in result.output

    def test_malformed(self, run):
        result, _ = run("{not json", "region-check")
        assert result.exit_code == 2

    def test_boundary(self, run):
        result, text = run({"alpha": 0.5, "tau": 1}, "region-boundary", "--points", "8")
        assert result.exit_code == 0
        header, rows = parse_csv(text)
        assert header == ["theta", "radius", "re", "im"]
        assert rows.shape == (8, 4)
        assert rows[-1, 1] == pytest.approx(1.53499, abs=1e-5)

    def test_char_roots(self, run):
        result, text = run({"alpha": 0.5, "tau": 1, "lambdas": [-1, 1]}, "char-roots")
        assert result.exit_code == 0
        report = json.loads(text)
        assert [r["count"] for r in report["roots"]][0] == 0
        assert report["total"] >= 1

    def test_char_roots_small_lambda(self, run):
        document = {"alpha": 0.4, "tau": 1, "lambdas": [[0.0298, -0.0402], [0.0497, 0.0005]]}
        result, text = run(document, "char-roots")
        assert result.exit_code == 0
        report = json.loads(text)
        assert [r["count"] for r in report["roots"]] == [0, 1]
        assert report["roots"][0]["window"]["re_min"] < 1e-6


class TestMLCommands:
    def test_eval(self, run):
        result, text = run({"alpha": 0.5, "beta": 1, "lambda": -1, "tau": 1, "t": [0, 0.5, 1.5]}, "ml-eval")
        assert result.exit_code == 0
        header, rows = parse_csv(text)
        assert header == ["t", "re", "im", "abs"]
        assert rows[:, 1] == pytest.approx([1.0, 1.0, 0.2021154], abs=1e-6)

    def test_negative_time(self, run):
        result, _ = run({"alpha": 0.5, "beta": 1, "lambda": -1, "tau": 1, "t": [-1]}, "ml-eval")
        assert result.exit_code == 2

    def test_integral(self, run):
        document = {"alpha": 0.5, "beta": 0.5, "lambda": -1, "tau": 2, "t": [0, 1]}
        result, text = run(document, "ml-integral")
        assert result.exit_code == 0
        header, rows = parse_csv(text)
        assert header == ["t", "abs_integral"]
        assert rows[0, 1] == 0.0
        assert rows[1, 1] == pytest.approx(1.12838, rel=1e-3)


class TestSystemCommands:
    def test_simulate(self, run):
        result, text = run(STABLE, "simulate", "--solver", "both")
        assert result.exit_code == 0
        header, rows = parse_csv(text)
        assert header == ["t", "re_x1", "im_x1"]
        assert rows.shape == (61, 3)
        assert rows[0, 0] == pytest.approx(-1.0)
        assert "max deviation picard/direct" in result.output

    def test_simulate_overflow(self, run):
        document = {"alpha": 0.5, "tau": 0.01, "A": [[1e6]], "phi": {"payload": 1}, "T": 10, "h_step": 0.01}
        result, text = run(document, "simulate", "--solver", "direct")
        assert result.exit_code == 5
        _, rows = parse_csv(text)
        assert 1 < rows.shape[0] < 1002

    def test_simulate_picard_overflow(self, run):
        document = {"alpha": 0.5, "tau": 0.01, "A": [[1e6]], "phi": {"payload": 1}, "T": 10, "h_step": 0.01}
        result, text = run(document, "simulate", "--solver", "picard")
        assert result.exit_code == 5
        assert text is not None
        _, rows = parse_csv(text)
        assert 2 <= rows.shape[0] < 1002
        assert rows[0, 1] == 1.0

    def test_simulate_misaligned(self, run):
        result, _ = run(STABLE, "simulate", "--step", "0.03")
        assert result.exit_code == 2

    def test_constants(self, run):
        result, text = run(STABLE, "constants")
        assert result.exit_code == 0
        report = json.loads(text)
        assert report["q"] == 0.0
        assert report["eigenvalues"] == [[-1.0, 0.0]]

    def test_constants_outside(self, run):
        result, _ = run(dict(STABLE, A=[[1]]), "constants")
        assert result.exit_code == 6

    def test_verify(self, run):
        args = ("verify", "--seed", "1", "--n-histories", "1")
        result, first = run(dict(STABLE, phi={"payload": 1}), *args)
        assert result.exit_code == 0
        assert json.loads(first)["verdict"] == "stable_certified"
        assert "STABILITY OK" in result.output
        _, second = run(dict(STABLE, phi={"payload": 1}), *args)
        assert first == second

    def test_verify_needs_seed(self, run):
        result, _ = run(STABLE, "verify")
        assert result.exit_code == 2

    def test_log_level(self, run):
        result, _ = run(STABLE, "constants", env={"FRADELAY_LOG": "chatty"})
        assert result.exit_code == 2
