"""Tests for the command-line interface."""

from fractions import Fraction

import pytest

from entrobound.cli import main
from entrobound.lp import parse_certificate
from entrobound.problemfile import format_problem, parse_problem, problem_digest
from entrobound.regen import build_regen


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


BOUND3 = ("bound", "--n", "3", "--eta", "1", "--seed", "1",
          "--kappa", "48", "--episodes", "10", "--stagnation", "3")


class TestOracleCommand:
    def test_worked_example(self, capsys):
        code, out, _ = run(capsys, "oracle", "--n", "5", "--r", "3",
                           "--term", "{S_1_2,S_2_1}")
        assert code == 0
        assert "6/20" in out and "3/10" in out

    def test_single_message(self, capsys):
        code, out, _ = run(capsys, "oracle", "--n", "6", "--r", "3",
                           "--term", "{S_1_2}")
        assert code == 0 and "1/10" in out

    def test_inner_points(self, capsys):
        code, out, _ = run(capsys, "oracle", "--n", "6", "--inner-points")
        assert code == 0
        lines = [ln for ln in out.splitlines() if ln.startswith("r=")]
        assert len(lines) == 5
        assert "r=4: alpha=2/9 beta=2/15" in out

    def test_bad_term(self, capsys):
        code, _, err = run(capsys, "oracle", "--n", "5", "--r", "3",
                           "--term", "{S_9_9}")
        assert code == 2 and "term" in err

    def test_missing_flags(self, capsys):
        code, _, err = run(capsys, "oracle", "--n", "5")
        assert code == 2


class TestEmitAndVerify:
    def test_emit_problem_roundtrip(self, capsys, tmp_path):
        out_path = tmp_path / "p.problem"
        code, out, _ = run(capsys, "emit-problem", "--n", "3", "--out",
                           str(out_path))
        assert code == 0
        text = out_path.read_text()
        assert parse_problem(text) == build_regen(3).to_problem()
        assert problem_digest(text) in out

    def test_bound_verify_roundtrip(self, capsys, tmp_path):
        cert = tmp_path / "c.cert"
        prob = tmp_path / "p.problem"
        code, out, _ = run(capsys, *BOUND3, "--out-cert", str(cert),
                           "--emit-problem", str(prob))
        assert code == 0
        assert "bound: alpha + 1*beta >=" in out
        code, out, _ = run(capsys, "verify", "--cert", str(cert),
                           "--problem", str(prob))
        assert code == 0 and "certificate OK" in out

    def test_verify_rejects_byte_flip(self, capsys, tmp_path):
        cert = tmp_path / "c.cert"
        prob = tmp_path / "p.problem"
        run(capsys, *BOUND3, "--out-cert", str(cert),
            "--emit-problem", str(prob))
        text = cert.read_text()
        pos = text.index("bound: ") + len("bound: ")
        flipped = text[:pos] + ("2" if text[pos] != "2" else "3") + text[pos + 1:]
        cert.write_text(flipped)
        code, _, err = run(capsys, "verify", "--cert", str(cert),
                           "--problem", str(prob))
        assert code == 1 and "INVALID" in err

    def test_verify_wrong_problem(self, capsys, tmp_path):
        cert = tmp_path / "c.cert"
        prob = tmp_path / "p.problem"
        run(capsys, *BOUND3, "--out-cert", str(cert),
            "--emit-problem", str(prob))
        other = tmp_path / "q.problem"
        other.write_text(format_problem(build_regen(4).to_problem()))
        code, _, err = run(capsys, "verify", "--cert", str(cert),
                           "--problem", str(other))
        assert code == 1 and "digest" in err


class TestBoundCommand:
    def test_deterministic_certificates(self, capsys, tmp_path):
        texts = []
        for name in ("a.cert", "b.cert"):
            cert = tmp_path / name
            code, _, _ = run(capsys, *BOUND3, "--out-cert", str(cert))
            assert code == 0
            texts.append(cert.read_text())
        assert texts[0] == texts[1]

    def test_manifest_written(self, capsys, tmp_path):
        cert = tmp_path / "c.cert"
        stats = tmp_path / "s.csv"
        manifest = tmp_path / "m.manifest"
        code, _, _ = run(capsys, *BOUND3, "--out-cert", str(cert),
                         "--out-stats", str(stats),
                         "--out-manifest", str(manifest))
        assert code == 0
        text = manifest.read_text()
        assert text.startswith("manifest-format: 1\ncommand: bound\n")
        assert "config seed: 1" in text
        assert "input problem-digest: " in text
        assert f"output {cert}: sha256 " in text
        assert stats.read_text().startswith("episode,value,")

    def test_problem_file_flag(self, capsys, tmp_path):
        prob = tmp_path / "p.problem"
        prob.write_text(format_problem(build_regen(3).to_problem()))
        cert = tmp_path / "c.cert"
        code, out, _ = run(capsys, "bound", "--problem-file", str(prob),
                           "--n", "3", "--eta", "0", "--episodes", "5",
                           "--kappa", "32", "--stagnation", "2",
                           "--out-cert", str(cert))
        assert code == 0
        assert parse_certificate(cert.read_text()).eta == 0


class TestFullLP:
    def test_n3_known_value(self, capsys, tmp_path):
        cert = tmp_path / "c.cert"
        code, out, _ = run(capsys, "full-lp", "--n", "3", "--eta", "1",
                           "--out-cert", str(cert),
                           "--out-manifest", str(tmp_path / "m"))
        assert code == 0
        assert "alpha + 1*beta >= 1 " in out
        assert parse_certificate(cert.read_text()).bound == 1

    def test_eta_zero_min_alpha(self, capsys, tmp_path):
        code, out, _ = run(capsys, "full-lp", "--n", "3", "--eta", "0",
                           "--out-manifest", str(tmp_path / "m"))
        assert code == 0 and ">= 1/2 " in out

    def test_symmetry_neutral(self, capsys, tmp_path):
        code, out, _ = run(capsys, "full-lp", "--n", "3", "--eta", "2",
                           "--symmetry", "--out-manifest", str(tmp_path / "m"))
        assert code == 0 and ">= 4/3 " in out

    def test_refuses_large_universe(self, capsys, tmp_path):
        code, _, err = run(capsys, "full-lp", "--n", "6",
                           "--out-manifest", str(tmp_path / "m"))
        assert code == 2
        assert "116769423390" in err and "--force" in err


class TestSweep:
    def test_sweep_csv(self, capsys, tmp_path):
        csv = tmp_path / "curve.csv"
        code, out, _ = run(capsys, "sweep", "--n", "3",
                           "--etas", "0,1", "--kappa", "48",
                           "--episodes", "8", "--stagnation", "3",
                           "--out-csv", str(csv))
        assert code == 0
        lines = csv.read_text().strip().splitlines()
        assert lines[0] == "eta,bound,bound_decimal"
        assert len(lines) == 3
        inner = tmp_path / "curve_inner_points.csv"
        assert inner.read_text().startswith("r,alpha,beta\n")

    def test_empty_etas(self, capsys, tmp_path):
        code, _, err = run(capsys, "sweep", "--n", "3", "--etas", " ",
                           "--out-csv", str(tmp_path / "x.csv"))
        assert code == 2 and "empty" in err
