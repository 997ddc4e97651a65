import io
import json
import subprocess
import sys

import pytest

from minisol_iv.cli import RunConfig, collect_sources, main, run
from minisol_iv.detectors import DetectorConfig
from minisol_iv.errors import ConfigError
from minisol_iv.report import Report, dump_states, render_json

from conftest import FIXTURES, fixture


def cli(*args):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(args), out, err)
    return code, out.getvalue(), err.getvalue()


def test_empty_report_json():
    assert render_json(Report(version="0.1.0")) == (
        '{"version":"0.1.0","files":[],"summary":{"error":0,"warning":0,"info":0}}')


def test_vulnerable_corpus_exit_1():
    code, out, _ = cli("--format", "json", str(FIXTURES / "vulnerable"))
    doc = json.loads(out)
    assert code == 1
    assert len(doc["files"]) == 6
    assert sum(len(f["diagnostics"]) for f in doc["files"]) == 7
    assert doc["summary"] == {"error": 2, "warning": 4, "info": 1}


def test_enum_golden_json():
    code, out, _ = cli("--format", "json", str(fixture("vulnerable/unmatched_enum.sol")))
    (f,) = json.loads(out)["files"]
    (d,) = f["diagnostics"]
    assert list(d) == ["detector", "severity", "line", "column", "endLine", "endColumn", "message", "evidence"]
    assert (d["detector"], d["severity"], d["line"], d["column"]) == ("D6-unmatched-type", "warning", 9, 30)
    assert json.dumps(d["evidence"], separators=(",", ":")) == '{"option":"[0, max]","enumRange":"[0, 2]"}'


def test_json_top_level_key_order():
    _, out, _ = cli("--format", "json", str(fixture("extra/empty.sol")))
    assert list(json.loads(out)) == ["version", "files", "summary"]


def test_text_format_line():
    code, out, _ = cli(str(fixture("vulnerable/unvalidated_index.sol")))
    first = out.splitlines()[0]
    assert first.endswith("unvalidated_index.sol:9:16: warning[D5-unvalidated-input]: "
                          "index index may be out of bounds for _array (index ∈ [0, max], _array.length ∈ [5, 5])")
    assert "\033[" not in out


def test_patched_corpus_clean_for_guarded_detectors():
    code, out, _ = cli("--format", "json", "--detectors", "d2,d5,d6", str(FIXTURES / "patched"))
    assert code == 0 and json.loads(out)["summary"] == {"error": 0, "warning": 0, "info": 0}


def test_empty_contract_exit_0():
    assert cli(str(fixture("extra/empty.sol")))[0] == 0


def test_fail_on_threshold():
    target = str(fixture("vulnerable/division_remainder.sol"))
    assert cli(target)[0] == 0
    assert cli("--fail-on", "info", target)[0] == 1
    assert cli("--fail-on", "error", str(fixture("vulnerable/unmatched_enum.sol")))[0] == 0


@pytest.mark.parametrize("args", [
    ["--detectors", "d9", "x.sol"],
    ["--widen-delay", "0", "x.sol"],
    ["missing.sol"],
    [],
])
def test_bad_input_exit_2(args, tmp_path):
    code, _, err = cli(*args)
    assert code == 2 and err


def test_syntax_error_exit_2(tmp_path):
    bad = tmp_path / "bad.sol"
    bad.write_text("contract C { function f( }")
    code, out, err = cli(str(bad))
    assert code == 2 and "ParseError" in err and out == ""


def test_directory_scan_recursive(tmp_path):
    (tmp_path / "a" / "b").mkdir(parents=True)
    (tmp_path / "a" / "b" / "z.sol").write_text("contract Z { }")
    (tmp_path / "y.sol").write_text("contract Y { }")
    (tmp_path / "notes.txt").write_text("skip me")
    found = collect_sources([str(tmp_path)])
    assert [p.name for p in found] == ["z.sol", "y.sol"]  # sorted by full path


def test_dump_streams():
    target = str(fixture("vulnerable/unmatched_enum.sol"))
    _, out, err = cli("--dump-cfg", "--dump-states", target)
    assert "cfg UnmatchedType.vote" in out and "states UnmatchedType.vote" in out and err == ""
    _, out, err = cli("--format", "json", "--dump-states", target)
    json.loads(out)
    assert "states UnmatchedType.vote" in err


def test_dump_states_table_rows(vote_analysis):
    text = dump_states(vote_analysis.results["vote"])
    section = text.split("B0.1 ")[1].split("B0.2")[0]
    assert "  option ∈ [0, max]" in section and "  _votes[msg.sender] ∈ [0, 2]" in section
    end = text.split("end:\n")[1]
    assert "  option ∈ [0, max]\n" in end and "  _votes[msg.sender] ∈ [0, 2]\n" in end
    assert "$t" not in "\n".join(l for l in text.splitlines() if l.startswith("  "))


def test_run_config_validation():
    with pytest.raises(ConfigError):
        RunConfig([])
    with pytest.raises(ConfigError):
        RunConfig(["x"], fail_on="fatal")


def test_run_api():
    report, code = run(RunConfig([str(fixture("vulnerable/uninitialized_owner.sol"))],
                                 detectors=DetectorConfig.parse("d4")))
    assert code == 1 and report.summary()["error"] == 1


def test_json_byte_identical_across_runs():
    a = cli("--format", "json", str(FIXTURES))[1]
    b = cli("--format", "json", str(FIXTURES))[1]
    assert a == b


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "minisol_iv", "--format", "json", str(fixture("extra/empty.sol"))],
                          capture_output=True, text=True, env={"MINISOL_IV_NO_COLOR": "1", "PATH": ""})
    assert proc.returncode == 0 and json.loads(proc.stdout)["summary"]["error"] == 0
