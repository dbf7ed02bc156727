import json

from brst_reduction.report import FAIL, PASS, CheckResult, RunReport, validate_report
from brst_reduction.ring import scalar


def _report(*results, timing=False):
    report = RunReport("verify", {"n": 1}, timing=timing)
    for result in results:
        report.add(result)
    return report


def test_from_failures():
    assert CheckResult.from_failures("koszul", 3, []).status == PASS
    failed = CheckResult.from_failures("koszul", 3, [{"witness": "z1"}])
    assert failed.status == FAIL
    assert not failed.passed


def test_witnesses_are_stringified():
    result = CheckResult.from_failures("star_conventions", 1, [{"value": scalar(0, 1), "k": 2}, "plain"])
    out = result.to_json()
    assert out["witnesses"] == [{"value": str(scalar(0, 1)), "k": 2}, {"witness": "plain"}]


def test_timing_only_when_requested():
    result = CheckResult(name="koszul", status=PASS, checked=1, seconds=0.12345)
    assert "seconds" not in _report(result).to_json()["results"][0]
    assert _report(result, timing=True).to_json()["results"][0]["seconds"] == 0.123


def test_exit_code_and_status():
    good = CheckResult("a", PASS, 1)
    bad = CheckResult.from_failures("b", 1, [{"witness": "x"}])
    assert _report(good).exit_code == 0
    report = _report(good, bad)
    assert report.exit_code == 1
    assert report.to_json()["status"] == FAIL


def test_dumps_is_valid_against_schema():
    result = CheckResult("reduced_product", PASS, 2, certificate={"nu_order": 2, "degree_bound": None},
                         data={"series": ["1"]})
    data = json.loads(_report(result).dumps())
    assert validate_report(data) == []


def test_failing_check_needs_witness():
    data = _report(CheckResult("koszul", FAIL, 1)).to_json()
    errors = validate_report(data)
    assert errors
    assert errors[0]["path"].startswith("results")


def test_unknown_command_is_invalid():
    data = _report(CheckResult("koszul", PASS, 1)).to_json()
    data["command"] = "explode"
    assert validate_report(data)


def test_to_text():
    report = _report(CheckResult("kirwan", PASS, 1, certificate={"degree_bound": 8}, data={"class": "EQUAL"}),
                     CheckResult.from_failures("koszul", 2, [{"witness": "z1"}]))
    text = report.to_text()
    assert text.splitlines()[0] == "verify: FAIL"
    assert "[PASS] kirwan (1 checked) degree_bound=8" in text
    assert "class: EQUAL" in text
    assert "witness:" in text
