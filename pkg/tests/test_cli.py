import io
import json
import subprocess
import sys

import pytest

from linat import config
from linat.atm import read_file
from linat.cli import COUNTER_KEYS, EXIT_INVALID, EXIT_OK, EXIT_PARTIAL, parse_witness, run, witness_text
from linat.divisor import verify_witness

REPORT_KEYS = {"command", "inputs", "verdict", "atoms", "witnesses", "details", "timing", "exit_code", *COUNTER_KEYS}


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


def call_json(*argv):
    code, out, _ = call(*argv, "--json")
    return code, json.loads(out)


class TestExitCodes:
    def test_invalid_files(self, corpus):
        for name in ("badtable", "badaxiom"):
            code, rep = call_json("check", corpus / f"{name}.atm")
            assert code == EXIT_INVALID and rep["verdict"] == "invalid"

    def test_bad_flag(self, corpus):
        code, _, err = call("decompose", corpus / "atom.atm", "--no-such-flag")
        assert code == EXIT_INVALID and err

    def test_missing_file(self, tmp_path):
        code, rep = call_json("check", tmp_path / "absent.atm")
        assert code == EXIT_INVALID

    def test_partial(self, corpus):
        code, rep = call_json("decompose", corpus / "gl22.atm")
        assert code == EXIT_PARTIAL and rep["verdict"] == "partial"
        assert any(a["atom"] == "HALT" for a in rep["atoms"])

    def test_atom(self, corpus):
        code, rep = call_json("decompose", corpus / "atom.atm")
        assert code == EXIT_OK and rep["verdict"] == "complete"
        assert all(rep[k] == 0 for k in COUNTER_KEYS if k not in ("linear_atoms", "group_atoms"))
        assert rep["linear_atoms"] == rep["group_atoms"] == 1

    def test_valid_check(self, corpus):
        code, out, _ = call("check", corpus / "s3gf7.atm")
        assert code == EXIT_OK

    def test_cap_exceeded(self, corpus):
        before = config.get_caps()
        code, rep = call_json("product", "--kind", "wreath-pure", corpus / "flipflop2.atm", corpus / "flipflop2.atm", "--cap", "wreath=4")
        assert code == EXIT_PARTIAL and rep["verdict"] == "cap-exceeded"
        assert config.get_caps() == before


class TestReport:
    def test_keys(self, corpus):
        _, rep = call_json("complexity", corpus / "s3gf7.atm")
        assert REPORT_KEYS <= set(rep)
        assert isinstance(rep["atoms"], list) and isinstance(rep["witnesses"], list)
        assert rep["inputs"][0]["path"].endswith("s3gf7.atm") and len(rep["inputs"][0]["sha256"]) == 64

    def test_s3_counters(self, corpus):
        _, rep = call_json("complexity", corpus / "s3gf7.atm")
        assert (rep["tri_count"], rep["wr_linear_count"], rep["wr_pure_count"], rep["compress_count"]) == (1, 1, 0, 1)
        assert rep["op_count"] == 3
        assert rep["group_atoms"] == rep["linear_atoms"] + 1

    def test_b2x3(self, corpus):
        _, rep = call_json("complexity", corpus / "b2x3.atm")
        assert rep["op_count"] == 8 and rep["compress_count"] == 3

    def test_text_lists_counters(self, corpus):
        code, out, _ = call("complexity", corpus / "unitri.atm")
        for k in COUNTER_KEYS:
            assert f"{k}: " in out
        assert "verdict: complete" in out

    def test_deterministic(self, corpus):
        a = call_json("decompose", corpus / "b2.atm")[1]
        b = call_json("decompose", corpus / "b2.atm")[1]
        a.pop("timing"), b.pop("timing")
        assert a == b

    def test_out_file(self, corpus, tmp_path):
        target = tmp_path / "rep.json"
        code, out, _ = call("complexity", corpus / "unipotent.atm", "--json", "--out", target)
        assert code == EXIT_OK and out == ""
        assert json.loads(target.read_text())["command"] == "complexity"

    def test_rewrite_budget(self, corpus):
        _, rep = call_json("complexity", corpus / "s3gf7.atm", "--rewrite-budget", "2")
        rw = rep["details"]["rewrite"]
        assert rw["op_count"] <= rep["op_count"]


class TestDivisor:
    def test_search_and_replay(self, corpus, tmp_path):
        ff2, ff3 = corpus / "flipflop2.atm", corpus / "flipflop3.atm"
        wfile = tmp_path / "w.txt"
        code, out, _ = call("divisor", ff2, ff3, "--out", wfile)
        assert code == EXIT_OK and "found" in out
        w = parse_witness(wfile.read_text())
        assert verify_witness(w, read_file(ff2)[1], read_file(ff3)[1])
        assert call("divisor", ff2, ff3, "--replay", wfile)[0] == EXIT_OK

    def test_tampered_replay(self, corpus, tmp_path):
        ff2, ff3 = corpus / "flipflop2.atm", corpus / "flipflop3.atm"
        wfile = tmp_path / "w.txt"
        call("divisor", ff2, ff3, "--out", wfile)
        w = parse_witness(wfile.read_text())
        w.h_a = [0] * len(w.h_a)
        wfile.write_text(witness_text(w))
        code, rep = call_json("divisor", ff2, ff3, "--replay", wfile)
        assert code == EXIT_INVALID and rep["verdict"] == "rejected"

    def test_refuted(self, corpus):
        code, rep = call_json("divisor", corpus / "flipflop3.atm", corpus / "flipflop2.atm")
        assert code == EXIT_OK and rep["verdict"] == "refuted"

    def test_exhausted(self, corpus):
        code, rep = call_json("divisor", corpus / "flipflop2.atm", corpus / "flipflop3.atm", "--budget", "0")
        assert code == EXIT_PARTIAL and rep["verdict"] == "exhausted"


class TestProducts:
    def test_cascade(self, corpus, tmp_path):
        ff2 = corpus / "flipflop2.atm"
        out = tmp_path / "c.atm"
        code, rep = call_json("product", "--kind", "cascade", ff2, ff2, corpus / "cascade_control.atm", "--out", out)
        assert code == EXIT_OK
        assert rep["witnesses"][0]["status"] == "verified"
        assert read_file(out)[1].gamma.order == rep["details"]["order"]

    @pytest.mark.parametrize(
        "kind, files",
        [("wreath-pure", ["flipflop2", "flipflop2"]), ("tri-rep", ["atom", "atom"]), ("tri-atm", ["universal211", "atom"]), ("wreath-linear", ["atom", "flipflop2"])],
    )
    def test_kinds_reparse(self, corpus, tmp_path, kind, files):
        out = tmp_path / "p.atm"
        code, _, _ = call("product", "--kind", kind, *[corpus / f"{f}.atm" for f in files], "--out", out)
        assert code == EXIT_OK
        read_file(out)

    def test_arity(self, corpus):
        code, _, _ = call("product", "--kind", "cascade", corpus / "flipflop2.atm")
        assert code == EXIT_INVALID

    def test_wrong_type(self, corpus):
        code, _, _ = call("product", "--kind", "wreath-linear", corpus / "flipflop2.atm", corpus / "atom.atm")
        assert code == EXIT_INVALID


class TestOtherCommands:
    def test_compress(self, corpus, tmp_path):
        out = tmp_path / "c.atm"
        code, rep = call_json("compress", corpus / "c3zero.atm", "--out", out)
        assert code == EXIT_OK and rep["details"]["null"] == [3]
        assert read_file(out)[1].gamma.order == 4

    def test_series(self, corpus):
        code, rep = call_json("series", corpus / "unitri.atm")
        assert code == EXIT_OK
        assert len(rep["details"]["series_A"]) - 1 == 2
        code, out, _ = call("series", corpus / "s3gf7.atm")
        assert "group: length 2" in out

    def test_info(self, corpus):
        code, _, _ = call("info")
        assert code == EXIT_OK
        assert call("info", corpus / "b2.atm")[0] == EXIT_OK


def test_module_entry_point(corpus):
    done = subprocess.run([sys.executable, "-m", "linat", "check", str(corpus / "atom.atm")], capture_output=True, text=True)
    assert done.returncode == EXIT_OK
