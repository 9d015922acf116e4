import io
import json
import subprocess
import sys
from contextlib import redirect_stdout
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from approxmod.cli import main, run

ROOT_CASES = json.loads((Path(__file__).parent.parent / "examples" / "golden" / "cases.json").read_text())


def invoke(argv):
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = main(argv)
    return code, buf.getvalue()


@pytest.mark.parametrize("case", ROOT_CASES, ids=[c["name"] for c in ROOT_CASES])
def test_golden_replay(case, root, monkeypatch):
    monkeypatch.chdir(root)
    want = json.loads((root / "examples" / "golden" / f"{case['name']}.json").read_text())
    code, out = invoke(case["argv"] + ["--json"])
    assert code == want["exit"]
    assert out == want["stdout"]


def test_eq_top_example():
    rep, code = run(["eq", "--mode", "congr", "mu X. Y -> #X", "Top"])
    assert code == 0 and rep["verdict"] == "true" and rep["command"] == "eq"


def test_decide_refutable_with_frame():
    rep, code = run(["logic", "decide", "--system", "migl", "X -> #X"])
    assert code == 1 and rep["verdict"] == "Refutable"
    cm = rep["payload"]["countermodel"]
    assert {"worlds", "wf", "pre", "val", "world"} <= set(cm)


def test_type_check_y(root, monkeypatch):
    monkeypatch.chdir(root)
    rep, code = run(["type", "check", "examples/y_combinator.json"])
    assert code == 0 and rep["verdict"] == "valid"


def test_unknown_exit_code():
    rep, code = run(["sub", "prove", "Y", "X"])
    assert code == 2 and rep["verdict"] == "unknown"


def test_report_shape():
    for argv in (["measure", "X"], ["frobnicate"], ["eq", "(", "X"], ["type", "check", "/nonexistent.json"]):
        rep, code = run(argv)
        assert set(rep) == {"command", "verdict", "payload", "diagnostics"}
        assert isinstance(rep["diagnostics"], list)
    assert run(["frobnicate"])[1] == 64
    assert run(["type", "check", "/nonexistent.json"])[1] == 65


def test_bad_certificate_file(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"rule": "Var", "ctx": 3}')
    rep, code = run(["type", "check", str(p)])
    assert code == 65 or code == 1
    p.write_text("not json")
    assert run(["logic", "check", str(p)])[1] == 65


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "approxmod", "classify", "X", "--json"], capture_output=True, text=True)
    assert out.returncode == 0
    assert json.loads(out.stdout)["payload"]["tail_finite"] is True


# -- malformed input never escapes as a crash ------------------------------

junk = st.text(alphabet="XYZ#()->.mu \\xyTop0", max_size=25)
commands = st.sampled_from([
    ["measure"], ["canon"], ["classify"], ["comp"], ["term", "hnf", "--fuel", "50"], ["term", "bohm", "--depth", "2", "--fuel", "50"],
])


@settings(max_examples=150)
@given(commands, junk)
def test_junk_types_and_terms(cmd, text):
    rep, code = run(cmd + [text])
    # a leading "-" reads as a flag, hence 64
    assert code in (0, 1, 2, 64, 65)
    json.dumps(rep)


@settings(max_examples=80)
@given(junk, junk, st.sampled_from(["eq", "sub"]))
def test_junk_pairs(a, b, cmd):
    argv = [cmd, a, b] if cmd == "eq" else [cmd, "check", a, b]
    rep, code = run(argv)
    assert code in (0, 1, 2, 64, 65)


FIELDS = ["rule", "ctx", "term", "type", "premises", "worlds", "wf", "pre", "val", "goal", "system", "lhs", "rhs", "gamma"]
json_junk = st.recursive(
    st.none() | st.integers(-2, 5) | st.text(alphabet="XYpq#->w0", max_size=5),
    lambda c: st.lists(c, max_size=3) | st.dictionaries(st.sampled_from(FIELDS), c, max_size=4),
    max_leaves=12,
)
checkers = st.sampled_from([["type", "check"], ["sub", "check"], ["logic", "check"], ["kripke", "validate"]])


@settings(max_examples=60)
@given(obj=json_junk, cmd=checkers)
def test_junk_certificates(obj, cmd, tmp_path_factory):
    p = tmp_path_factory.mktemp("junk") / "c.json"
    p.write_text(json.dumps(obj))
    rep, code = run(cmd + [str(p)])
    assert code in (0, 1, 2, 65), rep
