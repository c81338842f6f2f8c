import csv
import io
import json
import subprocess
import sys

import pytest

from affinewalk.cli import EXIT_CAP, EXIT_VALIDATION, main, parse_step_law
from affinewalk.measures import StepLaw


def _run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def _csv_rows(text):
    body = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(body))))


def test_parse_step_law_forms():
    assert parse_step_law("u{-1,0,1}") == StepLaw.uniform([-1, 0, 1])
    assert parse_step_law("-1:1,0:1,1:1") == StepLaw.uniform([-1, 0, 1])
    assert parse_step_law(" 1:3 , -1:1 ,0:2") == StepLaw(((-1, 1), (0, 2), (1, 3)))


@pytest.mark.parametrize("spec,msg", [
    ("0:1,2:1", r"gcd\(supp mu - supp mu\) = 1"),
    ("0:1,0:2", "duplicate"),
    ("u{0,0,1}", "duplicate"),
    ("0-1", "cannot parse"),
    ("0:0,1:1", "positive"),
    ("u{a,b}", "bad uniform"),
])
def test_parse_step_law_errors(spec, msg):
    with pytest.raises(ValueError, match=msg):
        parse_step_law(spec)


def test_mix_scan_schema(capsys):
    code, out, _ = _run(["mix-scan", "--q-min", "10001", "--q-max", "10101", "--odd", "--eps", "0.25",
                         "--no-timestamp"], capsys)
    assert code == 0
    rows = _csv_rows(out)
    assert list(rows[0]) == ["q", "is_prime", "t_mix", "log2_q", "normalized", "log2_ratio"]
    assert rows[-1]["q"] == "aggregate_median"
    assert len(rows) == 52
    assert '# status: "complete"' in out
    assert "tv_convention" in out


def test_hhms_json(capsys):
    code, out, _ = _run(["hhms", "--levels", "12", "--format", "json", "--no-timestamp"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert [r["n"] for r in doc["rows"]] == list(range(1, 13))
    assert {"n", "pair_count", "a_n"} <= set(doc["rows"][0])
    assert doc["summary"]["ratio"] == pytest.approx(0.98876, abs=1e-4)
    assert doc["meta"]["config"]["levels"] == 12
    assert "timestamp" not in doc["meta"]


def test_tv_matches_oracle(capsys):
    from fractions import Fraction

    from conftest import enumerate_law_uniform, half_tv_oracle

    code, out, _ = _run(["tv", "--a", "2", "--step", "u{-1,0,1}", "--q", "5", "--n-max", "12"], capsys)
    assert code == 0
    for row in _csv_rows(out):
        counts, den = enumerate_law_uniform(2, [-1, 0, 1], int(row["n"]))
        ref = half_tv_oracle({x: Fraction(c, den) for x, c in counts.items()}, 5)
        assert float(row["half_tv"]) == pytest.approx(float(ref), abs=1e-12)


def test_entropy_has_nats_and_bits(capsys):
    code, out, _ = _run(["entropy", "--n-max", "6", "--format", "json"], capsys)
    doc = json.loads(out)
    row = doc["rows"][3]
    assert row["H_bits"] == pytest.approx(row["H_nats"] / 0.6931471805599453)
    assert doc["summary"]["width_kind"] == "heuristic"


def test_other_subcommands_run(capsys, tmp_path):
    for argv in (
        ["smb", "--n", "30", "--samples", "200", "--exact-n", "10"],
        ["spectrum", "--q", "7", "--n", "4"],
        ["sieve-check", "--q", "12", "--trials", "10", "--sieve-trials", "2", "--N", "50", "--Q", "8"],
        ["exceptional", "--k-min", "6", "--k-max", "7", "--controls", "5"],
    ):
        path = tmp_path / f"{argv[0]}.csv"
        code, _, err = _run(argv + ["-o", str(path)], capsys)
        assert code == 0, err
        assert path.read_text().startswith("# tool")


def test_byte_identical_output(tmp_path, capsys):
    outs = []
    for k in range(2):
        path = tmp_path / f"run{k}.csv"
        main(["smb", "--n", "40", "--samples", "300", "--exact-n", "9", "--seed", "5",
              "--no-timestamp", "-o", str(path)])
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_validation_exit_codes(capsys):
    code, _, err = _run(["tv", "--q", "5", "--step", "0:1,2:1"], capsys)
    assert code == EXIT_VALIDATION and "gcd(supp mu - supp mu) = 1" in err
    code, _, _ = _run(["tv", "--q", "10"], capsys)
    assert code == EXIT_VALIDATION
    code, _, _ = _run(["tv", "--q", "5", "--eps", "1.5"], capsys)
    assert code == EXIT_VALIDATION


def test_cap_exit_code(capsys):
    code, _, err = _run(["entropy", "--n-max", "40"], capsys)
    assert code == EXIT_CAP and "cap" in err


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "affinewalk", "hhms", "--levels", "5", "--no-timestamp"],
                         capture_output=True, text=True, check=True)
    assert "pair_count" in res.stdout


def test_workers_env(monkeypatch):
    from affinewalk.cli import build_parser

    monkeypatch.setenv("AFFINEWALK_WORKERS", "3")
    args = build_parser().parse_args(["tv", "--q", "5"])
    assert args.workers == 3


def test_partial_results_marked_incomplete(capsys, monkeypatch):
    from affinewalk import cli

    def broken(args, out):
        out.columns = ["n"]
        out.add(n=1)
        raise cli.CapExceeded("ran out of room")

    monkeypatch.setitem(cli.COMMANDS, "tv", broken)
    code, out, err = _run(["tv", "--q", "5"], capsys)
    assert code == EXIT_CAP
    assert '# status: "incomplete"' in out and "ran out of room" in err
