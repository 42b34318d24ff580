import json

import pytest

from mtel import cli


def run_cli(capsys, argv):
    code = cli.main(argv)
    out = capsys.readouterr().out
    return code, out


def test_tau_command(capsys):
    code, out = run_cli(capsys, ["tau", "--bound", "3"])
    assert code == 0
    payload = json.loads(out)
    assert payload == {"bound": 3, "coefficients": [1, -24, 252]}
    code, out = run_cli(capsys, ["tau", "--bound", "1"])
    assert json.loads(out)["coefficients"] == [1]


def test_tau_rejects_bad_bound(capsys):
    with pytest.raises(SystemExit):
        cli.main(["tau", "--bound", "0"])


def test_congruence_command(capsys):
    code, out = run_cli(capsys, ["congruence", "--p", "3", "--curve", "27a1", "--bound", "300"])
    assert code == 0
    payload = json.loads(out)
    assert payload["passed"] is True
    assert payload["reports"][0]["curve"] == "27a1"


def test_congruence_unknown_label(capsys):
    code = cli.main(["congruence", "--p", "3", "--curve", "nope1"])
    err = capsys.readouterr().err
    assert code == 2
    assert "unknown curve label" in err and "27a1" in err


def test_theta_command(capsys):
    code, out = run_cli(capsys, ["theta", "--form", "delta", "--p", "3", "--n", "1"])
    assert code == 0
    payload = json.loads(out)
    assert payload["lambda"] == 1
    assert payload["basis"] == "X-power"
    assert payload["precision_certified"] is True

    code, out = run_cli(capsys, ["theta", "--curve", "27a1", "--p", "3", "--n", "2"])
    assert json.loads(out)["lambda"] == 7

    code, out = run_cli(capsys, ["theta", "--form", "delta", "--p", "5", "--n", "1"])
    assert json.loads(out)["lambda"] == 4


def test_theta_budget_guard(capsys):
    with pytest.raises(SystemExit):
        cli.main(["--budget", "10", "theta", "--form", "delta", "--p", "3", "--n", "3"])


def test_lambda_table_json_and_csv(capsys):
    argv = ["lambda-table", "--p", "3", "--forms", "delta,27a1", "--n-max", "2"]
    code, out = run_cli(capsys, argv)
    assert code == 0
    payload = json.loads(out)
    rows = {row["form"]: row for row in payload["rows"]}
    for form in ("delta", "27a1"):
        assert rows[form]["levels"]["1"]["lambda"] == 1
        assert rows[form]["levels"]["2"]["lambda"] == 7
        assert rows[form]["levels"]["1"]["precision_certified"] is True
    assert rows["delta"]["pattern"] == "3^m - 2"
    assert rows["27a1"]["pattern"] == "3^m - 2"

    code, csv_out = run_cli(capsys, argv + ["--out", "csv"])
    lines = csv_out.strip().splitlines()
    assert lines[0] == "form,n=1,n=2,pattern"
    assert lines[1].startswith("27a1,1,7,")


def test_lambda_table_reproducible(capsys):
    argv = ["lambda-table", "--p", "2", "--forms", "32a1", "--n-max", "2"]
    _, first = run_cli(capsys, argv)
    _, second = run_cli(capsys, argv)
    assert first == second
    payload = json.loads(first)
    assert payload["rows"][0]["levels"]["1"]["lambda"] == "inf"
    assert payload["rows"][0]["levels"]["2"]["lambda"] == 1


def test_predict_lambda_examples(capsys):
    code, out = run_cli(capsys, ["predict-lambda", "--pattern", "3^m - 2", "--p", "3", "--m", "3"])
    assert json.loads(out)["lambda"] == 25
    code, out = run_cli(capsys, ["predict-lambda", "--pattern", "q_{m+1}", "--p", "3", "--m", "3"])
    assert json.loads(out)["lambda"] == 20
    code, out = run_cli(capsys, ["predict-lambda", "--pattern", "q_m", "--p", "5", "--m", "1"])
    assert json.loads(out)["lambda"] == 0


def test_predict_lambda_parity_and_errors():
    pattern = "2^{m-1} - 1 (m even); 2^{m-2} + 1 (m odd)"
    assert cli.predict_lambda(pattern, 2, 4) == 7
    assert cli.predict_lambda(pattern, 2, 5) == 9
    assert cli.predict_lambda("3*2^{m-3} - 2", 2, 5) == 10
    with pytest.raises(cli.PatternError):
        cli.predict_lambda("3^m - ?", 3, 2)
    with pytest.raises(cli.PatternError):
        cli.predict_lambda("2^{m-3}", 2, 2)  # negative exponent


def test_q_value_closed_form():
    # alternating sums, straight from the definition
    for p in (2, 3, 5, 7):
        for m in range(2, 9):
            if m % 2 == 0:
                expected = sum((-1) ** (m - 1 - i) * p**i for i in range(0, m))
            else:
                expected = sum((-1) ** (m - 1 - j) * p**j for j in range(1, m))
            assert cli.q_value(p, m) == expected
    assert cli.q_value(3, 1) == 0
    assert cli.q_value(3, 4) == 20


def test_verify_tau_lemma(capsys):
    code, out = run_cli(capsys, ["verify", "--check", "tau-lemma", "--p", "3", "--bound", "500"])
    assert code == 0 and json.loads(out)["passed"] is True


def test_verify_q_congruence(capsys):
    code, out = run_cli(capsys, ["verify", "--check", "q-congruence", "--p", "3", "--bound", "300"])
    assert code == 0 and json.loads(out)["passed"] is True
    code, out = run_cli(capsys, ["verify", "--check", "q-congruence", "--p", "2", "--bound", "300"])
    assert code == 0


def test_verify_norm_relation(capsys):
    code, out = run_cli(
        capsys, ["verify", "--check", "norm-relation", "--p", "3", "--curve", "27a1", "--n", "1"]
    )
    payload = json.loads(out)
    assert code == 0 and payload["report"]["sides_zero"] is True


def test_verify_lower_bound(capsys):
    code, out = run_cli(
        capsys,
        ["verify", "--check", "lower-bound", "--p", "3", "--curve", "27a1", "--n-max", "3"],
    )
    assert code == 0 and json.loads(out)["passed"] is True


def test_cache_warm_cold_identical(tmp_path, capsys):
    cache = str(tmp_path / "cache")
    argv = ["--cache-dir", cache, "theta", "--curve", "27a1", "--p", "3", "--n", "1"]
    _, cold = run_cli(capsys, argv)
    files = list((tmp_path / "cache").glob("eigsym_*.json"))
    assert len(files) == 1
    _, warm = run_cli(capsys, argv)
    assert cold == warm


def test_registry_loads_required_labels():
    registry = cli.load_registry()
    for label in ("11a1", "24a1", "27a1", "32a1", "36a1", "45a1", "99c1"):
        assert label in registry
