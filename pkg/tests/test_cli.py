import json

import pytest

from faircover.cli import main

from support import FIXA_ALPHA, FIXA_PREMIA


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def write_json(tmp_path, name, record):
    path = tmp_path / name
    path.write_text(json.dumps(record))
    return path


class TestAnalyze:
    def test_fixture_report_and_exit_code(self, fixa_file, capsys):
        code, out, _ = run_cli(capsys, "analyze", str(fixa_file), "--format", "json")
        assert code == 0
        report = json.loads(out)
        assert report["all_passed"] is True
        for got, want in zip(report["premia"], FIXA_PREMIA):
            assert got == pytest.approx(want, abs=1e-4)
        for got, want in zip(report["benefit_shares"], FIXA_ALPHA):
            assert got == pytest.approx(want, abs=1e-3)
        assert report["aggregate"]["default_outcomes"] == [2]
        assert report["aggregate"]["default_probability"] == pytest.approx(0.2)
        for record in report["certificates"].values():
            assert record.get("passed", True) is True

    def test_text_format_rounds_to_five_decimals(self, fixa_file, capsys):
        code, out, _ = run_cli(capsys, "analyze", str(fixa_file))
        assert code == 0
        assert "1.41421" in out
        assert "all certificates passed" in out

    def test_invalid_mass_names_probabilities(self, tmp_path, capsys):
        path = write_json(
            tmp_path,
            "bad.json",
            {
                "probabilities": [0.5, 0.4],
                "k0": 1,
                "agents": [{"name": "a", "losses": [0, 1]}],
                "distortion": {"kind": "identity"},
            },
        )
        code, out, err = run_cli(capsys, "analyze", str(path))
        assert code == 1
        assert "probabilities" in err

    def test_degenerate_portfolio_reports_warning(self, tmp_path, capsys):
        path = write_json(
            tmp_path,
            "degenerate.json",
            {
                "probabilities": [0.5, 0.5],
                "k0": 0,
                "agents": [{"name": "a", "losses": [1, 1]}],
                "distortion": {"kind": "power", "gamma": 0.5},
            },
        )
        code, out, _ = run_cli(capsys, "analyze", str(path), "--format", "json")
        assert code == 0
        report = json.loads(out)
        assert report["warnings"] == ["degenerate: no default risk"]
        assert report["benefit_shares"] == [1.0, 0.0]
        assert report["certificates"]["state_fairness"] == {"skipped": "degenerate: no default risk"}

    def test_missing_file_is_an_input_error(self, tmp_path, capsys):
        code, _, err = run_cli(capsys, "analyze", str(tmp_path / "absent.json"))
        assert code == 1
        assert "cannot read" in err

    def test_malformed_json_is_an_input_error(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        code, _, err = run_cli(capsys, "analyze", str(path))
        assert code == 1
        assert "not valid JSON" in err


class TestCertify:
    def test_designed_contract_passes(self, fixa_file, capsys):
        code, out, _ = run_cli(
            capsys,
            "certify",
            str(fixa_file),
            "--premia",
            "1",
            "1.4142135623730951",
            "1.3416407864998738",
            "--format",
            "json",
        )
        assert code == 0
        report = json.loads(out)
        assert report["all_passed"] is True
        assert set(report["certificates"]) == {
            "core",
            "admissibility",
            "payoff_fairness",
            "maximality",
            "shareholder",
        }

    def test_overpriced_agent_fails_core_at_its_singleton(self, fixa_file, capsys):
        code, out, _ = run_cli(
            capsys,
            "certify",
            str(fixa_file),
            "--premia",
            "1",
            "1.6",
            "1.15586",
            "--format",
            "json",
        )
        assert code == 2
        report = json.loads(out)
        core = report["certificates"]["core"]
        assert core["passed"] is False
        assert core["worst_label"] == "{1}"
        assert core["worst_slack"] == pytest.approx(1.4142135623730951 - 1.6, abs=1e-9)

    def test_dividend_in_default_fails_admissibility(self, fixa_file, tmp_path, capsys):
        code, out, _ = run_cli(capsys, "analyze", str(fixa_file), "--format", "json")
        baseline = json.loads(out)["payoffs"]
        baseline[0][2] += 0.4
        baseline[2][2] -= 0.4
        override = write_json(tmp_path, "payoffs.json", {"payoffs": baseline})
        code, out, _ = run_cli(
            capsys, "certify", str(fixa_file), "--payoffs", str(override), "--format", "json"
        )
        assert code == 2
        report = json.loads(out)
        assert report["certificates"]["admissibility"]["passed"] is False

    def test_premium_dimension_mismatch(self, fixa_file, capsys):
        code, _, err = run_cli(capsys, "certify", str(fixa_file), "--premia", "1", "2")
        assert code == 1
        assert "premia" in err

    def test_payoff_dimension_mismatch(self, fixa_file, tmp_path, capsys):
        override = write_json(tmp_path, "payoffs.json", {"payoffs": [[1, 2, 3], [1, 2, 3]]})
        code, _, err = run_cli(capsys, "certify", str(fixa_file), "--payoffs", str(override))
        assert code == 1
        assert "rows" in err


class TestDeterminismAndExitContract:
    def test_json_reports_are_byte_identical(self, fixa_file, capsys):
        _, first, _ = run_cli(
            capsys, "analyze", str(fixa_file), "--format", "json", "--seed", "42"
        )
        _, second, _ = run_cli(
            capsys, "analyze", str(fixa_file), "--format", "json", "--seed", "42"
        )
        assert first == second

    def test_seed_is_echoed_in_config(self, fixa_file, capsys):
        _, out, _ = run_cli(
            capsys, "analyze", str(fixa_file), "--format", "json", "--seed", "7"
        )
        report = json.loads(out)
        assert report["config"]["seed"] == 7
        assert report["certificates"]["state_fuzzy_core"]["seed"] == 7

    def test_usage_error_exits_one(self, capsys):
        code, _, err = run_cli(capsys, "frobnicate")
        assert code == 1
        assert err

    def test_exit_codes_cover_the_contract(self, fixa_file, tmp_path, capsys):
        ok, _, _ = run_cli(capsys, "analyze", str(fixa_file))
        missing, _, _ = run_cli(capsys, "analyze", str(tmp_path / "none.json"))
        failing, _, _ = run_cli(
            capsys, "certify", str(fixa_file), "--premia", "1", "2", "0.7558543488729689"
        )
        assert (ok, missing, failing) == (0, 1, 2)

    def test_tolerance_flag_overrides_file(self, fixa_file, capsys):
        _, out, _ = run_cli(
            capsys, "analyze", str(fixa_file), "--format", "json", "--tolerance", "1e-7"
        )
        assert json.loads(out)["config"]["tolerance"] == 1e-7
