"""Command-line behaviour: exit codes, formats, determinism, golden output."""

import json
import subprocess
import sys
from pathlib import Path

import pytest

from tmln.cli import main
from tmln.network import ground, weight_str
from tmln.cli import formula_text

DATA = Path(__file__).parent.parent / "src" / "tmln" / "data"
ORESME = str(DATA / "oresme.tmln")
SWEEP = str(DATA / "table3.sweep")
GOLDEN = DATA / "table3_golden.json"


def run_cli(*argv, capsys=None):
    code = main(list(argv))
    out, err = capsys.readouterr() if capsys else ("", "")
    return code, out, err


class TestValidate:
    def test_bundled_kb_is_valid(self, capsys):
        code, _, err = run_cli("validate", ORESME, capsys=capsys)
        assert code == 0 and err == ""

    def test_bad_weight_exits_one(self, tmp_path, capsys):
        bad = tmp_path / "bad.tmln"
        bad.write_text(
            "sort S\ntimeline 0 9\nconst A : S\npred P(S)\nfact P(A, 0, 1) : 1.3\n"
        )
        code, _, err = run_cli("validate", str(bad), capsys=capsys)
        assert code == 1
        assert "weight outside [0,1]" in err
        assert "5:" in err  # line number in the diagnostic

    def test_missing_file_exits_two(self, capsys):
        with pytest.raises(SystemExit) as exc:
            run_cli("validate", "no-such-file.tmln", capsys=capsys)
        assert exc.value.code == 2


class TestGround:
    def test_lists_rule_instances_with_exact_weights(self, capsys):
        code, out, _ = run_cli("ground", ORESME, capsys=capsys)
        assert code == 0
        assert "=> PeasantFamily(NO, TMIN, TMAX) : 0.4" in out
        assert "=> PeasantFamily(NO, TMIN, TMAX) : 0.5" in out
        assert "=> !PeasantFamily(NO, TMIN, TMAX) : 0.8" in out

    def test_json_round_trips_the_instantiation(self, oresme, capsys):
        code, out, _ = run_cli("ground", ORESME, "--json", capsys=capsys)
        assert code == 0
        payload = json.loads(out)
        assert payload["schema_version"] == 1
        records = {(r["text"], r["weight"]) for r in payload["instantiation"]}
        expected = {
            (formula_text(wf, oresme.timeline), weight_str(wf.weight))
            for wf in ground(oresme)
        }
        assert records == expected


class TestMap:
    def test_reports_conclusion_and_strength(self, capsys):
        code, out, _ = run_cli(
            "map", ORESME, "--delta", "tCon", "--sigma", "id", "--theta", "sum",
            "--query", "PeasantFamily(*,*,*)", capsys=capsys,
        )
        assert code == 0
        assert "strength: 5.2" in out
        assert "(!PeasantFamily(NO, TMIN, TMAX), 0.8)" in out

    # A knowledge base whose optimum under <tCon, rule, sum> keeps a rule
    # whose premise lost its fact: the slot is zero, so the default display
    # hides the rule while --full shows it marked.
    SUPPRESSED_KB = (
        "sort S\n"
        "timeline 0 5\n"
        "const A : S\n"
        "pred P(S)\npred Q(S)\npred R(S)\n"
        "fact P(A, 0, 1) : 0.9\n"
        "fact Q(A, 0, 3) : 0.2\n"
        "fact !Q(A, 2, 5) : 0.9\n"
        "rule R1 : 1 { Q(x, t, u) => R(x, 0, 5) }\n"
    )

    def test_suppressed_display_hides_zero_slots(self, tmp_path, capsys):
        kb = tmp_path / "suppressed.tmln"
        kb.write_text(self.SUPPRESSED_KB)
        _, out, _ = run_cli(
            "map", str(kb), "--delta", "tCon", "--sigma", "rule",
            "--theta", "sum", capsys=capsys,
        )
        assert "strength: 1.8" in out
        assert "=> R(A," not in out  # zero-contribution rule hidden

    def test_full_flag_shows_suppressed_members(self, tmp_path, capsys):
        kb = tmp_path / "suppressed.tmln"
        kb.write_text(self.SUPPRESSED_KB)
        _, out, _ = run_cli(
            "map", str(kb), "--delta", "tCon", "--sigma", "rule", "--theta",
            "sum", "--full", capsys=capsys,
        )
        assert "[0] R1: Q(A, 0, 3) => R(A, TMIN, TMAX) : 0.2" in out

    def test_unknown_component_exits_one(self, capsys):
        code, _, err = run_cli(
            "map", ORESME, "--delta", "bogus", capsys=capsys,
        )
        assert code == 1 and "unknown relation" in err

    def test_bound_exceeded_without_pruned(self, capsys):
        code, _, err = run_cli(
            "map", ORESME, "--delta", "tCon", "--bound", "4", capsys=capsys,
        )
        assert code == 1 and "pruned" in err

    def test_pruned_matches_exhaustive_output(self, capsys):
        _, exhaustive, _ = run_cli(
            "map", ORESME, "--delta", "pCon", "--json", capsys=capsys,
        )
        _, pruned, _ = run_cli(
            "map", ORESME, "--delta", "pCon", "--json", "--pruned", capsys=capsys,
        )
        assert json.loads(exhaustive) == json.loads(pruned)

    def test_empty_kb_single_empty_map(self, tmp_path, capsys):
        empty = tmp_path / "empty.tmln"
        empty.write_text("timeline 0 3\n")
        code, out, _ = run_cli("map", str(empty), "--delta", "tCon", capsys=capsys)
        assert code == 0
        assert "strength: 0" in out


class TestSweep:
    def test_single_config_matches_map(self, tmp_path, capsys):
        sweep = tmp_path / "one.sweep"
        sweep.write_text("delta=tCon sigma=id theta=sum\n")
        _, sweep_out, _ = run_cli(
            "sweep", ORESME, str(sweep), "--json", "--query",
            "PeasantFamily(*,*,*)", capsys=capsys,
        )
        _, map_out, _ = run_cli(
            "map", ORESME, "--delta", "tCon", "--sigma", "id", "--theta", "sum",
            "--json", "--query", "PeasantFamily(*,*,*)", capsys=capsys,
        )
        row = json.loads(sweep_out)["rows"][0]
        direct = json.loads(map_out)
        assert row["config"] == direct["config"]
        assert row["maps"] == direct["maps"]

    def test_bundled_sweep_reproduces_the_golden_file(self, capsys):
        code, out, _ = run_cli(
            "sweep", ORESME, SWEEP, "--json", "--query", "PeasantFamily(*,*,*)",
            capsys=capsys,
        )
        assert code == 0
        assert out == GOLDEN.read_text(encoding="utf-8")

    def test_validator_sweep_respects_strength_ordering(self, tmp_path, capsys):
        sweep = tmp_path / "chain.sweep"
        sweep.write_text(
            "delta=tCon sigma=id theta=sum\n"
            "delta=pInc sigma=id theta=sum\n"
            "delta=pCon sigma=id theta=sum\n"
            "delta=tInc sigma=id theta=sum\n"
        )
        _, out, _ = run_cli("sweep", ORESME, str(sweep), "--json", capsys=capsys)
        rows = json.loads(out)["rows"]
        tcon, pinc, pcon, tinc = (float(r["strength"]) for r in rows)
        assert tcon == pinc <= pcon <= tinc

    def test_malformed_sweep_file(self, tmp_path, capsys):
        sweep = tmp_path / "bad.sweep"
        sweep.write_text("delta=tCon nonsense\n")
        code, _, err = run_cli("sweep", ORESME, str(sweep), capsys=capsys)
        assert code == 1 and "bad sweep entry" in err


class TestCheck:
    def test_seeded_run_is_reproducible(self, capsys):
        code1, out1, _ = run_cli("check", "--seed", "5", "--trials", "40", capsys=capsys)
        code2, out2, _ = run_cli("check", "--seed", "5", "--trials", "40", capsys=capsys)
        assert code1 == code2 == 0
        assert out1 == out2
        assert "suites passed" in out1

    def test_planted_mutant_is_surfaced(self, capsys):
        code, out, _ = run_cli(
            "check", "--mutant", "theta-b", "--trials", "200", capsys=capsys
        )
        assert code == 1
        assert "theta-b" in out and "mutant detected" in out

    def test_kb_argument_adds_a_suite(self, capsys):
        code, out, _ = run_cli(
            "check", ORESME, "--seed", "1", "--trials", "20", capsys=capsys
        )
        assert code == 0
        assert "kb-oracle-equivalence(oresme.tmln)" in out


class TestOracleCompare:
    def test_bundled_kb_all_match(self, capsys):
        code, out, _ = run_cli("oracle-compare", ORESME, capsys=capsys)
        assert code == 0
        assert "MISMATCH" not in out
        assert "closure: match" in out
        assert "map: match" in out

    def test_empty_kb_all_match(self, tmp_path, capsys):
        empty = tmp_path / "empty.tmln"
        empty.write_text("timeline 0 3\n")
        code, out, _ = run_cli("oracle-compare", str(empty), capsys=capsys)
        assert code == 0


def test_entry_point_runs_in_subprocess():
    proc = subprocess.run(
        [sys.executable, "-m", "tmln.cli", "validate", ORESME],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
