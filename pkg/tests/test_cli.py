from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

import pytest

from betrayal.cli import main

from helpers import B, V, alliance_dict, game_dict, jsonl, order, season

SMALL = ("n_games = 12\nfolds = 5\nbootstrap = 200\nk_features = 4,all\nscorers = anova_f\n"
         "class_weights = none\nregularizers = l1,l2\nc_exponents = -2,0,2\n")


def files_of(d: Path) -> dict[str, bytes]:
    return {str(p.relative_to(d)): p.read_bytes() for p in sorted(d.rglob("*")) if p.is_file()}


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    (root / "small.cfg").write_text(SMALL)
    assert main(["synth", "--config", str(root / "small.cfg"), "--seed", "3", "--out", str(root / "synth")]) == 0
    return root


def test_synth_outputs(workspace):
    truth = json.loads((workspace / "synth" / "truth.json").read_text())
    assert truth["n_games"] == 12 and truth["spec"]["seed"] == 3
    lines = (workspace / "synth" / "corpus.jsonl").read_text().splitlines()
    assert len(lines) == 12
    assert (workspace / "synth" / "manifest-synth.json").exists()


def test_relate_alliance(tmp_path):
    path = tmp_path / "alliance.jsonl"
    path.write_text(jsonl(alliance_dict()))
    assert main(["relate", str(path), "--out", str(tmp_path / "o")]) == 0
    spans = (tmp_path / "o" / "spans.jsonl").read_text().splitlines()
    bets = [json.loads(x) for x in (tmp_path / "o" / "betrayals.jsonl").read_text().splitlines()]
    assert len(spans) == 1 and json.loads(spans[0])["length_seasons"] == 4
    assert len(bets) == 1 and (bets[0]["betrayer"], bets[0]["victim"]) == (B, V)
    assert (tmp_path / "o" / "transitions.csv").read_text().startswith("relationship,age,")


def test_relate_without_supports(tmp_path):
    path = tmp_path / "c.jsonl"
    path.write_text(jsonl(game_dict([season(i, [order("ITALY", "ROM", {"hold": None})]) for i in range(4)])))
    assert main(["relate", str(path), "--out", str(tmp_path / "o")]) == 0
    summary = json.loads((tmp_path / "o" / "relations_summary.json").read_text())
    assert summary["n_spans"] == 0 and summary["n_betrayals"] == 0


def test_relate_recovers_synthetic_betrayals(workspace):
    out = workspace / "relate"
    assert main(["relate", str(workspace / "synth" / "corpus.jsonl"), "--out", str(out)]) == 0
    truth = json.loads((workspace / "synth" / "truth.json").read_text())
    n = json.loads((out / "relations_summary.json").read_text())["n_betrayals"]
    assert n == truth["n_betrayals"] > 0


def test_ingest_three_games(tmp_path):
    msgs = [{"from": "ITALY", "to": "FRANCE", "text": "Hello. Shall we?", "admin": False},
            {"from": "GM", "to": "ITALY", "text": "setup", "admin": True}]
    path = tmp_path / "c.jsonl"
    path.write_text(jsonl(*(game_dict([season(0, messages=msgs[: i + 1])], game_id=f"g{i}") for i in range(3))))
    assert main(["ingest", str(path), "--out", str(tmp_path / "o")]) == 0
    summary = json.loads((tmp_path / "o" / "corpus_summary.json").read_text())
    assert [(g["game_id"], g["messages"]) for g in summary["games"]] == [("g0", 1), ("g1", 1), ("g2", 1)]
    assert summary["stats"]["n_games"] == 3


@pytest.mark.parametrize("content", ["", "\n\n"])
def test_ingest_empty_file_is_input_error(tmp_path, content):
    path = tmp_path / "empty.jsonl"
    path.write_text(content)
    assert main(["ingest", str(path), "--out", str(tmp_path / "o")]) == 2


def test_input_errors(tmp_path, capsys):
    bad = tmp_path / "bad.jsonl"
    bad.write_text(jsonl(game_dict([season(0)])) + "{oops\n")
    assert main(["ingest", str(bad), "--out", str(tmp_path / "o")]) == 2
    assert "line 2" in capsys.readouterr().err
    assert main(["relate", str(tmp_path / "missing.jsonl"), "--out", str(tmp_path / "o")]) == 2
    cfg = tmp_path / "c.cfg"
    cfg.write_text("strict_balance = maybe\n")
    assert main(["relate", str(bad), "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    cfg.write_text("no equals sign\n")
    assert main(["relate", str(bad), "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert main(["synth", "--hazard", "2", "--out", str(tmp_path / "s")]) == 2


def test_runtime_failure_exit_code(tmp_path):
    path = tmp_path / "alliance.jsonl"
    path.write_text(jsonl(alliance_dict()))
    # one betrayal and no never-betrayed friendship to match it with
    assert main(["cohort", str(path), "--out", str(tmp_path / "o")]) == 1


def test_pipeline_chain_and_rerun(workspace, capsys):
    cfg = ["--config", str(workspace / "small.cfg"), "--seed", "1"]
    corpus = str(workspace / "synth" / "corpus.jsonl")
    out = workspace / "chain"
    assert main(["ingest", corpus, "--out", str(out)] + cfg) == 0
    clean = str(out / "corpus.jsonl")
    assert main(["cohort", clean, "--out", str(out)] + cfg) == 0
    assert main(["featurize", clean, "--out", str(out)] + cfg) == 0
    feats = str(out / "features.csv")
    assert main(["train", feats, "--out", str(out)] + cfg) == 0
    assert main(["evaluate", str(out / "model.kv"), feats, "--out", str(out)] + cfg) == 0
    assert main(["report", feats, "--out", str(out)] + cfg) == 0
    for name in ("pairs.jsonl", "instances.csv", "model.kv", "train_report.json", "ranking.txt", "ranking.svg",
                 "evaluation.json", "curves.csv", "imbalance_tests.json", "figures/curve_positive_sentiment.svg"):
        assert (out / name).exists(), name
    report = json.loads((out / "train_report.json").read_text())
    assert report["best_config"]["objective_metric"] == "accuracy"
    assert set(report["report"]["ci"]) == {"mcc", "accuracy"}
    before = files_of(out)
    capsys.readouterr()
    assert main(["train", feats, "--out", str(out)] + cfg) == 0
    assert "up to date" in capsys.readouterr().err
    assert files_of(out) == before
    # a changed option invalidates the manifest
    assert main(["train", feats, "--out", str(out), "--folds", "4"] + cfg) == 0
    assert "up to date" not in capsys.readouterr().err


def test_flags_override_config(workspace):
    out = workspace / "override"
    assert main(["cohort", str(workspace / "synth" / "corpus.jsonl"), "--out", str(out), "--config",
                 str(workspace / "small.cfg"), "--task", "imminent"]) == 0
    manifest = json.loads((out / "manifest-cohort.json").read_text())
    assert manifest["options"]["task"] == "imminent"


def test_evaluate_rejects_foreign_model(workspace, tmp_path):
    feats = workspace / "chain" / "features.csv"
    if not feats.exists():
        pytest.skip("chain outputs missing")
    model = tmp_path / "m.kv"
    model.write_text("format = betrayal-logistic\nversion = 1\nintercept = 0.0\nn_features = 1\n"
                     "feature.0.name = B:nonsense\nfeature.0.index = 0\nfeature.0.mean = 0.0\n"
                     "feature.0.sd = 1.0\nfeature.0.weight = 1.0\n")
    assert main(["evaluate", str(model), str(feats), "--out", str(tmp_path / "o")]) == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "betrayal", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip()
