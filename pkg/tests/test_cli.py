import json

import pytest

from matchq import cli


def run_json(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, (json.loads(out.out) if code == 0 else None), out.err


def test_kplayer_example(capsys):
    code, doc, _ = run_json(capsys, "analytic", "kplayer", "--k", "4", "--lambda", "1")
    assert code == 0
    assert doc["schemaVersion"] == 1
    assert doc["provenance"] == "analytic"
    assert doc["results"]["meanWait"] == 1.5


def test_min_variance(capsys):
    code, doc, _ = run_json(capsys, "analytic", "min-variance")
    assert code == 0
    assert doc["results"]["ratio"] == pytest.approx(0.489125, abs=1e-6)


def test_sides_example(capsys):
    code, doc, _ = run_json(capsys, "analytic", "sides", "--la", "0.3", "--lb", "0.3",
                            "--lc", "0.4")
    assert code == 0
    assert doc["results"]["meanOverall"] == pytest.approx(1.043103, abs=1e-6)


@pytest.mark.parametrize("argv,code", [
    (["analytic", "sides", "--la", "0.5", "--lb", "0.3", "--lc", "0.2"], 2),
    (["oracle", "sides", "--la", "0.5", "--lb", "0.3", "--lc", "0.2"], 2),
    (["analytic", "central", "--l1", "0", "--l2", "1"], 3),
    (["analytic", "central", "--l1", "1"], 1),
    (["analytic", "twoqueue", "--l1", "-1", "--l2", "1"], 1),
    (["analytic", "nonsense"], 1),
    ([], 1),
])
def test_exit_codes(capsys, argv, code):
    try:
        got = cli.main(argv)
    except SystemExit as exc:  # argparse usage errors
        got = exc.code
    assert got == code
    assert capsys.readouterr().err


def test_oracle_sides(capsys):
    code, doc, _ = run_json(capsys, "oracle", "sides", "--la", "0.3", "--lb", "0.3",
                            "--lc", "0.4")
    assert code == 0
    r = doc["results"]
    assert r["boundaryMass"] < 1e-10
    assert r["overall"]["mean"] == pytest.approx(1.043103, abs=1e-6)


def test_oracle_central(capsys):
    code, doc, _ = run_json(capsys, "oracle", "central", "--l1", "0.5", "--l2", "0.25",
                            "--order", "lifo")
    assert code == 0
    assert doc["provenance"] == "ctmc"
    assert doc["results"]["overall"]["mean"] == pytest.approx(1.5, abs=1e-10)


def test_simulate_and_trace(capsys, tmp_path):
    trace = tmp_path / "t.csv"
    code, doc, _ = run_json(capsys, "simulate", "central", "--l1", "0.5", "--l2", "0.25",
                            "--arrivals", "5000", "--warmup", "100", "--reps", "2",
                            "--trace", str(trace))
    assert code == 0
    r = doc["results"]
    assert r["stable"] and r["converged"] and r["unmatchedCensored"] == 0
    assert set(r["classes"]) == {"individual", "team", "overall"}
    assert r["classes"]["overall"]["replications"] == 2
    assert doc["command"]["config"]["seed"] == 0
    lines = trace.read_text().splitlines()
    assert lines[0] == "arrivalTime,class,matchTime,wait"
    assert len(lines) == 5001


def test_simulate_unstable_reports_flag(capsys):
    code, doc, _ = run_json(capsys, "simulate", "sides", "--la", "0.5", "--lb", "0.3",
                            "--lc", "0.2", "--arrivals", "2000", "--warmup", "0", "--reps", "1")
    assert code == 0
    assert doc["results"]["stable"] is False
    assert doc["results"]["converged"] is False


def test_rerun_reproduces(capsys, tmp_path):
    code, doc, _ = run_json(capsys, "simulate", "zones", "--la", "0.3", "--lb", "0.5",
                            "--lc", "0.2", "--arrivals", "3000", "--reps", "2", "--seed", "7")
    assert code == 0
    saved = tmp_path / "out.json"
    saved.write_text(json.dumps(doc))
    code, again, _ = run_json(capsys, "rerun", str(saved))
    assert code == 0
    assert json.dumps(again, sort_keys=True) == json.dumps(doc, sort_keys=True)


def test_figure(capsys, tmp_path):
    out = tmp_path / "fig10.csv"
    code, doc, _ = run_json(capsys, "figure", "fig10", "--out", str(out), "--step", "0.1")
    assert code == 0
    assert out.read_text().splitlines()[0] == "lambdaA,lambdaB,lambdaC,series,provenance,value,flag"
    assert doc["results"]["rows"] == 66


def test_audit(capsys, tmp_path):
    out = tmp_path / "audit.csv"
    code, doc, err = run_json(capsys, "audit", "--out", str(out))
    assert code == 0
    assert "litmus" in err
    assert len(doc["results"]["rows"]) > 0
    assert out.exists()
