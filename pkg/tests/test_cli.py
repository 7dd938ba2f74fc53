import random
import shutil

import pytest

from cote.cli import main
from cote.io import format_examples, format_facts, format_model, parse_list, read_list_header
from cote.synthetic import uwcse_domain, uwcse_ensemble

from conftest import FIXTURES

ADVISING_FACTS = """\
Professor(P1).
Professor(P2).
Student(S1).
Student(S2).
Publication(T1,P1).
Publication(T1,S1).
Publication(T2,P2).
TaughtBy(C1,P1,Q1).
Ta(C1,S1,Q1).
"""


@pytest.fixture
def advising_files(tmp_path):
    model = tmp_path / "model.json"
    shutil.copy(FIXTURES / "advising_model.json", model)
    facts = tmp_path / "facts.txt"
    facts.write_text(ADVISING_FACTS)
    pos = tmp_path / "pos.txt"
    pos.write_text("AdvisedBy(S1,P1).\n")
    neg = tmp_path / "neg.txt"
    neg.write_text("AdvisedBy(S2,P1).\nAdvisedBy(S1,P2).\n")
    return tmp_path, model, facts, pos, neg


def report_fields(path):
    return dict(line.split("=", 1) for line in path.read_text().splitlines())


def test_compress_scote(advising_files, capsys):
    d, model, facts, _, _ = advising_files
    out = d / "list.txt"
    code = main(["compress", "--model", str(model), "--mode", "scote", "--facts", str(facts),
                 "--out", str(out), "--diagnostics", str(d / "sm.csv")])
    assert code == 0
    dl = parse_list(out.read_text())
    assert len(dl.rules) == 20
    fields = report_fields(d / "list.txt.report")
    assert fields["faithfulness"] == "exact"
    assert fields["rules_before"] == "25" and fields["rules_after"] == "20"
    assert (d / "sm.csv").read_text().startswith("key_i")
    assert "25 naive rules -> 20 rules" in capsys.readouterr().out


def test_compress_ecote_and_eval(advising_files, capsys):
    d, model, facts, pos, neg = advising_files
    out = d / "list.txt"
    report = d / "r.txt"
    code = main(["compress", "--model", str(model), "--mode", "ecote", "--facts", str(facts),
                 "--pos", str(pos), "--neg", str(neg), "--out", str(out), "--report", str(report)])
    assert code == 0
    assert report_fields(report)["faithfulness"] == "trainExact"
    assert read_list_header(out.read_text())["mode"] == "ecote"
    capsys.readouterr()
    code = main(["eval", "--list", str(out), "--facts", str(facts), "--pos", str(pos), "--neg", str(neg),
                 "--model", str(model), "--machine"])
    assert code == 0
    text = capsys.readouterr().out
    rows = [l.split(",") for l in text.splitlines() if l.startswith(("list,", "ensemble,"))]
    assert rows[0][1:3] == rows[1][1:3]
    assert float(rows[0][1]) == 1.0


def test_usage_errors(advising_files):
    d, model, facts, pos, _ = advising_files
    assert main([]) == 1
    assert main(["compress", "--model", str(model)]) == 1
    assert main(["compress", "--model", str(model), "--mode", "ecote", "--facts", str(facts),
                 "--out", str(d / "o")]) == 1
    assert main(["compress", "--model", str(d / "missing.json"), "--mode", "scote", "--facts", str(facts),
                 "--out", str(d / "o")]) == 1
    assert main(["eval", "--list", str(d / "o"), "--facts", str(facts)]) == 1


def test_parse_errors(advising_files, capsys):
    d, model, facts, _, _ = advising_files
    bad = d / "bad.txt"
    bad.write_text("Professor(P1\n")
    code = main(["compress", "--model", str(model), "--mode", "scote", "--facts", str(bad), "--out", str(d / "o")])
    assert code == 2
    assert "bad.txt:1" in capsys.readouterr().err
    bad.write_text("Professor(P1,P2).\n")
    assert main(["compress", "--model", str(model), "--mode", "scote", "--facts", str(bad), "--out", str(d / "o")]) == 2


def test_ecote_on_uwcse_domain(tmp_path):
    rng = random.Random(3)
    fb, ex = uwcse_domain(rng, n_examples=80)
    trees = uwcse_ensemble(rng, 4)
    (tmp_path / "m.json").write_text(format_model(trees))
    (tmp_path / "f.txt").write_text(format_facts(fb))
    pos, neg = format_examples(ex)
    (tmp_path / "p.txt").write_text(pos)
    (tmp_path / "n.txt").write_text(neg)
    code = main(["compress", "--model", str(tmp_path / "m.json"), "--mode", "ecote",
                 "--facts", str(tmp_path / "f.txt"), "--pos", str(tmp_path / "p.txt"),
                 "--neg", str(tmp_path / "n.txt"), "--out", str(tmp_path / "o.txt")])
    assert code == 0
    fields = report_fields(tmp_path / "o.txt.report")
    assert int(fields["rules_after"]) <= len(ex) + 1
