import json

from nonassoc.catalog import x_squared_y_loop
from nonassoc.cli import EXIT_FAIL, EXIT_PASS, EXIT_USAGE, main

ASSOC = "((x1 * x2) * x3) = (x1 * (x2 * x3))"
MOUFANG = "(x1*(x2*(x1*x3)))=(((x1*x2)*x1)*x3)"


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_verify_identity_pass(capsys):
    code, out, _ = run(
        capsys,
        "verify-identity",
        "--loop", "builtin:dual-numbers-loop",
        "--identity", ASSOC,
        "--degree", "4",
    )
    assert code == EXIT_PASS
    assert "holds to degree 4: yes" in out


def test_verify_identity_fail_with_witness(capsys):
    code, out, _ = run(
        capsys,
        "verify-identity",
        "--loop", "builtin:jordan-k3-loop",
        "--identity", MOUFANG,
        "--degree", "4",
        "--format", "json",
    )
    assert code == EXIT_FAIL
    report = json.loads(out)
    assert report["schema_version"] == 1
    assert report["result"]["holds"] is False
    witness = report["result"]["witness"]
    assert {"multidegree", "monomials", "difference", "series_difference"} <= set(witness)


def test_verify_identity_bialgebra_mode(capsys):
    code, out, _ = run(
        capsys,
        "verify-identity",
        "--loop", "builtin:dual-numbers-loop",
        "--identity", ASSOC,
        "--mode", "bialgebra",
        "--degree", "4",
        "--samples", "5",
        "--seed", "11",
        "--format", "json",
    )
    assert code == EXIT_PASS
    report = json.loads(out)
    assert report["result"]["seed"] == 11


def test_verify_identity_syntax_error(capsys):
    code, _, err = run(
        capsys,
        "verify-identity",
        "--loop", "builtin:jordan-k3-loop",
        "--identity", "(x1 * )",
    )
    assert code == EXIT_USAGE
    assert "offset 6" in err


def test_unknown_loop_is_usage_error(capsys):
    code, _, err = run(
        capsys, "verify-identity", "--loop", "builtin:missing", "--identity", ASSOC
    )
    assert code == EXIT_USAGE
    assert "unknown builtin loop" in err


def test_memory_cap_exceeded_is_usage_error(capsys):
    code, _, err = run(
        capsys,
        "verify-identity",
        "--loop", "builtin:split-octonion-loop",
        "--identity", ASSOC,
        "--degree", "5",
    )
    assert code == EXIT_USAGE
    assert "cap" in err


def test_brackets_both_methods(capsys):
    code, out, _ = run(
        capsys,
        "brackets",
        "--loop", "builtin:jordan-k3-loop",
        "--arity", "1",
        "--degree", "4",
        "--format", "json",
    )
    assert code == EXIT_PASS
    report = json.loads(out)
    assert report["result"]["arity"] == 3
    assert report["result"]["equal"] is True
    assert len(report["result"]["entries"]) == 27


def test_brackets_arity_overflow(capsys):
    code, _, err = run(
        capsys, "brackets", "--loop", "builtin:jordan-k3-loop", "--arity", "5",
        "--degree", "4",
    )
    assert code == EXIT_USAGE


def test_brackets_su_only_on_associative_loop(capsys):
    code, out, _ = run(
        capsys,
        "brackets",
        "--loop", "builtin:dual-numbers-loop",
        "--arity", "1",
        "--method", "su",
        "--degree", "4",
        "--format", "json",
    )
    assert code == EXIT_PASS
    report = json.loads(out)
    assert all(set(e["value"]) == {"0"} for e in report["result"]["entries"])


def test_bernoulli_rows(capsys):
    code, out, _ = run(capsys, "bernoulli", "--max-degree", "6", "--format", "json")
    assert code == EXIT_PASS
    report = json.loads(out)
    rows = report["result"]["rows"]
    assert len(rows) == 6
    assert all(row["pass"] for row in rows)
    assert rows[5]["sum"] == "-1/6"


def test_explog_coefficients_and_check(capsys):
    code, out, _ = run(capsys, "explog", "--degree", "3", "--format", "json")
    assert code == EXIT_PASS
    report = json.loads(out)
    coeffs = {item["tree"]: item["coeff"] for item in report["result"]["coefficients"]}
    assert coeffs["(xx)"] == "-1/2"
    assert coeffs["((xx)x)"] == "1/12"
    assert coeffs["(x(xx))"] == "1/4"
    code, out, _ = run(capsys, "explog", "--degree", "8", "--check")
    assert code == EXIT_PASS
    assert "exp(log(1+x)) = 1+x: OK" in out


def test_raltify_reports_q2(capsys, tmp_path):
    spec = {"type": "components", **x_squared_y_loop(5).to_json()}
    path = tmp_path / "xsqy.json"
    path.write_text(json.dumps(spec))
    code, out, _ = run(
        capsys, "raltify", "--loop", f"file:{path}", "--degree", "5", "--format", "json"
    )
    assert code == EXIT_PASS
    report = json.loads(out)
    assert report["result"]["changed"] is True
    modified = report["result"]["modified_loop"]
    entries = {
        tuple(comp["multidegree"]): comp["entries"] for comp in modified["components"]
    }
    # q2 = x y^2 + x^3 y^2 in the series view means 2 and 12 in the tables
    assert entries[(1, 2)][0]["value"] == ["2"]
    assert entries[(3, 2)][0]["value"] == ["12"]


def test_multioperator_report(capsys):
    code, out, _ = run(
        capsys, "multioperator", "--degree", "4", "--bidegree", "1", "3",
        "--method", "both", "--format", "json",
    )
    assert code == EXIT_PASS
    report = json.loads(out)
    assert report["result"]["equal"] is False  # geodesic and symmetrized differ
    code, out, _ = run(
        capsys, "multioperator", "--degree", "4", "--bidegree", "1", "2",
        "--method", "su",
    )
    assert code == EXIT_PASS
    assert "1/2" in out


def test_multioperator_bidegree_overflow(capsys):
    code, _, err = run(
        capsys, "multioperator", "--degree", "3", "--bidegree", "2", "3"
    )
    assert code == EXIT_USAGE


def test_reports_are_deterministic(capsys):
    argv = [
        "brackets", "--loop", "builtin:jordan-k3-loop", "--arity", "0",
        "--degree", "4", "--format", "json",
    ]
    _, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert first == second


def test_config_file_provides_defaults(capsys, tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"degree": 5, "format": "json"}))
    code, out, _ = run(
        capsys, "bernoulli", "--config", str(config), "--max-degree", "4"
    )
    assert code == EXIT_PASS
    report = json.loads(out)  # format came from the config file
    assert len(report["result"]["rows"]) == 4


def test_json_reports_carry_config(capsys):
    code, out, _ = run(
        capsys,
        "verify-identity",
        "--loop", "builtin:dual-numbers-loop",
        "--identity", ASSOC,
        "--degree", "3",
        "--format", "json",
    )
    report = json.loads(out)
    assert report["config"]["degree"] == 3
    assert report["config"]["loop"] == "builtin:dual-numbers-loop"
    assert "memory_cap" in report["config"]
