"""Command-line behavior: formats, exit codes, determinism."""

import json

import pytest

import tablefixtures as tf
from fsz_forge.cli import DEFAULT_LIMIT, build_parser, run, serialize_report


def _run(capsys, *argv):
    code = run(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_serialize_csv_header_and_rows():
    report = {"rows": [("check", "p=3", "ok")], "head": ["title"]}
    out = serialize_report(report, "csv")
    assert out.splitlines() == ["check_or_query,parameters,value", "check,p=3,ok"]


def test_serialize_empty_csv_is_header_only():
    assert serialize_report({"rows": []}, "csv") == "check_or_query,parameters,value\n"


def test_serialize_json_is_sorted_and_newline_terminated():
    report = {"rows": [("a", "b", "c")], "zeta": 1, "alpha": 2}
    out = serialize_report(report, "json")
    assert out.endswith("\n")
    parsed = json.loads(out)
    assert "rows" not in parsed
    assert list(parsed) == sorted(parsed)
    assert serialize_report(report, "json") == out


def test_verify_passes_on_the_default_grid(capsys):
    for p, j in ((3, 1), (3, 2), (7, 1)):
        code, out, err = _run(capsys, "verify", "--p", str(p), "--j", str(j))
        assert code == 0, err
        assert "all checks passed: yes" in out


def test_witness_json_fields(capsys):
    code, out, err = _run(
        capsys, "witness", "--p", "5", "--j", "1", "--format", "json"
    )
    assert code == 0
    payload = json.loads(out)
    w = payload["witness"]
    assert set(w) == {"u", "g", "m", "count_g", "count_gm"}
    assert (w["count_g"], w["count_gm"], w["m"]) == (0, 625, 2)
    assert payload["verdict"] == "non-FSZ_5"


def test_witness_is_byte_deterministic_in_process(capsys):
    args = ("witness", "--p", "5", "--j", "1", "--format", "json")
    _, out1, _ = _run(capsys, *args)
    _, out2, _ = _run(capsys, *args)
    _, out3, _ = _run(capsys, *args, "--threads", "8")
    assert out1 == out2 == out3


def test_count_reports_both_counters(capsys):
    code, out, _ = _run(
        capsys,
        "count", "--p", "5", "--j", "1", "--n", "5",
        "--u", "b a1", "--g", "a1^5",
    )
    assert code == 0
    assert "count_structured [n=5 u=a1^1 a2^4 b^1 g=a1^5]: 0" in out
    assert "count_bruteforce [n=5 u=a1^1 a2^4 b^1 g=a1^5]: 0" in out
    assert "counters_agree [n=5 u=a1^1 a2^4 b^1 g=a1^5]: yes" in out


def test_count_structured_only_when_brute_is_infeasible(capsys):
    code, out, _ = _run(
        capsys,
        "count", "--p", "5", "--j", "1", "--n", "5",
        "--u", "b a1", "--g", "a1^10", "--limit", "100",
    )
    assert code == 0
    assert "count_structured" in out
    assert "count_bruteforce" not in out


def test_count_brute_flag_errors_when_infeasible(capsys):
    code, out, err = _run(
        capsys,
        "count", "--p", "5", "--j", "1", "--n", "5",
        "--u", "b a1", "--g", "a1^10", "--limit", "100", "--brute",
    )
    assert code == 1
    assert "error:" in err


def test_count_without_any_feasible_counter_errors(capsys):
    # n != p^j rules out the structured counter; the limit rules out brute force
    code, out, err = _run(
        capsys,
        "count", "--p", "5", "--j", "1", "--n", "2",
        "--u", "e", "--g", "e", "--limit", "100",
    )
    assert code == 1
    assert "error:" in err


def test_fsz_table_input(tmp_path, capsys):
    path = tmp_path / "z6.json"
    path.write_text(json.dumps({"order": 6, "table": tf.cyclic(6), "name": "Z6"}))
    code, out, _ = _run(capsys, "fsz", "--table", str(path), "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "check_or_query,parameters,value"
    assert "fsz_overall,,FSZ" in lines
    code, out, _ = _run(capsys, "fsz", "--table", str(path), "--n", "2")
    assert code == 0
    assert "FSZ_2" in out


def test_fsz_spj_single_n(capsys):
    code, out, _ = _run(capsys, "fsz", "--p", "5", "--j", "1", "--n", "5")
    assert code == 0
    assert "non-FSZ_5" in out


def test_fsz_requires_exactly_one_source(capsys, tmp_path):
    path = tmp_path / "z2.json"
    path.write_text(json.dumps({"order": 2, "table": [[0, 1], [1, 0]]}))
    code, _, err = _run(capsys, "fsz", "--p", "3", "--j", "1", "--table", str(path))
    assert code == 1 and "error:" in err
    code, _, err = _run(capsys, "fsz")
    assert code == 1 and "error:" in err


@pytest.mark.parametrize(
    "argv",
    [
        ("bogus",),
        ("verify", "--p", "4", "--j", "1"),
        ("verify", "--p", "3"),
        ("count", "--p", "3", "--j", "1", "--n", "3", "--u", "a9", "--g", "e"),
        ("count", "--p", "3", "--j", "1", "--n", "0", "--u", "e", "--g", "e"),
        ("witness", "--p", "5", "--j", "1", "--format", "yaml"),
        ("fsz", "--table", "/nonexistent/nowhere.json"),
    ],
)
def test_usage_and_input_errors_exit_1(capsys, argv):
    code, _, err = _run(capsys, *argv)
    assert code == 1
    assert err.strip()


def test_verification_failure_exits_2(capsys, monkeypatch):
    import fsz_forge.cli as cli
    from fsz_forge.fszcheck import VerificationError

    def boom(params):
        raise VerificationError("designated pair gave counts (7, 7)")

    monkeypatch.setattr(cli.fszcheck, "spj_witness", boom)
    code, _, err = _run(capsys, "witness", "--p", "5", "--j", "1")
    assert code == 2
    assert "verification failure:" in err


def test_threads_env_variable_is_honored(capsys, monkeypatch):
    monkeypatch.setenv("FSZ_FORGE_THREADS", "2")
    code, out, _ = _run(
        capsys,
        "count", "--p", "3", "--j", "1", "--n", "3", "--u", "b a1", "--g", "a1^3",
    )
    assert code == 0
    assert "counters_agree" in out


def test_selftest_grid_passes(capsys):
    code, out, _ = _run(capsys, "selftest")
    assert code == 0
    assert "FAIL" not in out
    for tag in ("S(3,1)", "S(3,2)", "S(5,1)", "S(5,2)", "S(7,1)"):
        assert tag in out


def test_parser_defaults():
    cfg = build_parser().parse_args(["verify", "--p", "3", "--j", "1"])
    assert cfg.format == "text"
    assert cfg.seed == 0
    assert cfg.limit == DEFAULT_LIMIT
