"""CLI subcommands end to end on fixture data."""

import json

import pytest

from asag.cli import main
from asag.corpus import read_pairs_csv, write_pairs_csv
from asag.model import HeadConfig
from asag.splitter import SplitSpec
from asag.trainer import TrainConfig, fit_with_controller

from conftest import build_mohler_tree, build_seb_tree, synthetic_corpus


def test_ingest_mohler(tmp_path, capsys):
    tree = build_mohler_tree(tmp_path / "m")
    out = tmp_path / "mohler.csv"
    assert main(["ingest", "mohler", str(tree), "-o", str(out)]) == 0
    corpus = read_pairs_csv(out, expect_scores=True, score_max=5.0)
    assert len(corpus) == 6


def test_ingest_seb_mapping(tmp_path):
    tree = build_seb_tree(tmp_path / "s")
    out = tmp_path / "ua.csv"
    assert main(["ingest", "seb", str(tree), "--split", "ua", "-o", str(out)]) == 0
    corpus = read_pairs_csv(out, expect_scores=True, score_max=2.0)
    assert sorted(p.gold_score for p in corpus) == [0.0, 2.0]


def test_ingest_expect_pairs_mismatch(tmp_path):
    tree = build_mohler_tree(tmp_path / "m")
    out = tmp_path / "mohler.csv"
    assert main(["ingest", "mohler", str(tree), "-o", str(out), "--expect-pairs", "2442"]) == 1


def test_ingest_missing_tree_is_domain_error(tmp_path):
    assert main(["ingest", "mohler", str(tmp_path / "void"), "-o", str(tmp_path / "x.csv")]) == 1


def test_split_command(tmp_path):
    corpus, _ = synthetic_corpus(n_pairs=100, n_questions=10, dim=16, seed=5)
    src = tmp_path / "all.csv"
    write_pairs_csv(corpus, src, include_scores=True)
    outs = [tmp_path / name for name in ("train.csv", "val.csv", "test.csv")]
    code = main([
        "split", str(src), "--fractions", "0.8,0.1,0.1", "--seed", "40",
        "-o", ",".join(str(p) for p in outs),
    ])
    assert code == 0
    sizes = [len(read_pairs_csv(p, expect_scores=True, score_max=5.0)) for p in outs]
    assert sum(sizes) == 100
    assert sizes == [80, 10, 10]


def test_featurize_command(tmp_path):
    corpus, _ = synthetic_corpus(n_pairs=20, n_questions=4, dim=16, seed=6)
    src = tmp_path / "pairs.csv"
    write_pairs_csv(corpus, src, include_scores=True)
    out = tmp_path / "features.csv"
    code = main([
        "featurize", str(src), "--set", "all", "--provider", "hash:16", "-o", str(out)
    ])
    assert code == 0
    lines = out.read_text("utf-8").splitlines()
    assert len(lines) == 21
    assert lines[0].count(",") == 26  # id + 26 feature columns


def test_train_score_eval_round_trip(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    corpus, _ = synthetic_corpus(n_pairs=200, n_questions=10, dim=64, seed=321)
    train_csv = tmp_path / "train.csv"
    write_pairs_csv(corpus, train_csv, include_scores=True)
    ckpt = tmp_path / "model.ckpt"
    code = main([
        "train", str(train_csv), "--provider", "hash:64", "--seed", "40",
        "--lr", "3e-3", "--hidden-dims", "64", "-o", str(ckpt),
        "--curve-log", str(tmp_path / "curve.ndjson"),
    ])
    assert code == 0
    assert ckpt.is_file()
    curve_lines = (tmp_path / "curve.ndjson").read_text().splitlines()
    assert len(curve_lines) >= 1
    assert "val_pearson" in json.loads(curve_lines[0])

    test_csv = tmp_path / "test.csv"
    write_pairs_csv(corpus, test_csv, include_scores=False)
    scored = tmp_path / "scored.csv"
    assert main(["score", str(test_csv), "--model", str(ckpt),
                 "--provider", "hash:64", "-o", str(scored)]) == 0

    assert main(["eval", "--pred", str(scored), "--gold", str(train_csv),
                 "--score-max", "5"]) == 0
    out = capsys.readouterr().out
    report = json.loads(out.splitlines()[0])
    assert report["n"] == 200
    assert report["pearson"] > 0.9
    assert "Correlation:" in out


def test_cli_checkpoint_matches_library_run(tmp_path, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    corpus, provider = synthetic_corpus(n_pairs=100, n_questions=10, dim=32, seed=9)
    train_csv = tmp_path / "train.csv"
    write_pairs_csv(corpus, train_csv, include_scores=True)
    cli_ckpt = tmp_path / "cli.ckpt"
    assert main([
        "train", str(train_csv), "--provider", "hash:32", "--seed", "40",
        "--lr", "3e-3", "--hidden-dims", "16", "-o", str(cli_ckpt),
    ]) == 0

    from asag.model import checkpoint_timestamp, save_checkpoint

    reread = read_pairs_csv(train_csv, expect_scores=True, score_max=5.0)
    config = TrainConfig(base_seed=40, lr_peak=3e-3)
    head = HeadConfig(input_dim=32, hidden_dims=(16,))
    report, model = fit_with_controller(
        reread, provider, head, config, SplitSpec(fractions=(0.9, 0.1), seed=40)
    )
    lib_ckpt = tmp_path / "lib.ckpt"
    save_checkpoint(model, lib_ckpt, {
        "score_max": 5.0,
        "created_at": checkpoint_timestamp(),
        "seed": 40,
        "chosen_epoch": report.chosen_epoch,
        "chosen_attempt": report.chosen_attempt,
        "accepted": report.accepted,
        "pipeline": "head",
        "provider_dim": 32,
    })
    assert cli_ckpt.read_bytes() == lib_ckpt.read_bytes()


def test_forest_pipeline_cli(tmp_path):
    corpus, _ = synthetic_corpus(n_pairs=60, n_questions=6, dim=16, seed=11)
    train_csv = tmp_path / "train.csv"
    write_pairs_csv(corpus, train_csv, include_scores=True)
    ckpt = tmp_path / "forest.ckpt"
    assert main([
        "train", str(train_csv), "--pipeline", "forest", "--provider", "hash:16",
        "--feature-set", "vecsim", "--trees", "10", "-o", str(ckpt),
    ]) == 0
    scored = tmp_path / "scored.csv"
    test_csv = tmp_path / "test.csv"
    write_pairs_csv(corpus, test_csv, include_scores=False)
    assert main(["score", str(test_csv), "--model", str(ckpt),
                 "--provider", "hash:16", "-o", str(scored)]) == 0
    result = read_pairs_csv(scored, expect_scores=True, score_max=5.0)
    assert len(result) == 60


def test_eval_perfect_predictions(tmp_path, capsys):
    corpus, _ = synthetic_corpus(n_pairs=30, n_questions=5, dim=8, seed=2)
    gold = tmp_path / "gold.csv"
    write_pairs_csv(corpus, gold, include_scores=True)
    assert main(["eval", "--pred", str(gold), "--gold", str(gold), "--score-max", "5"]) == 0
    report = json.loads(capsys.readouterr().out.splitlines()[0])
    assert report["pearson"] == 1.0
    assert report["rmse"] == 0.0


def test_usage_error_exits_2():
    with pytest.raises(SystemExit) as excinfo:
        main(["split", "--bogus-flag"])
    assert excinfo.value.code == 2


def test_unknown_subcommand_exits_2():
    with pytest.raises(SystemExit) as excinfo:
        main(["transmogrify"])
    assert excinfo.value.code == 2
