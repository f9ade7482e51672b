import json

import pytest

from config import config
from main import build_parser, main
from treebank import read_conllu, write_conllu

SUBCOMMANDS = (
    "validate", "stats", "compare", "agree", "augment", "synth", "split",
    "train", "finetune", "parse", "eval", "render", "fetch", "results",
)


@pytest.fixture
def faulty(tmp_path, sample_path):
    # second root in the first sentence
    broken = sample_path.read_text(encoding="utf-8").replace("\tNUM\t_\t_\t3\tnummod", "\tNUM\t_\t_\t0\troot", 1)
    path = tmp_path / "faulty.conllu"
    path.write_text(broken, encoding="utf-8")
    return path


@pytest.fixture
def ledger(tmp_path, monkeypatch):
    path = tmp_path / "results.json"
    monkeypatch.setattr(config, "LEDGER_PATH", str(path))
    return path


def test_validate_clean_corpus(sample_path, capsys):
    assert main(["validate", "--strict", str(sample_path)]) == 0
    assert "✅" in capsys.readouterr().err


def test_validate_strict_exit_code(faulty, capsys):
    assert main(["validate", str(faulty)]) == 0
    assert main(["validate", "--strict", str(faulty)]) == 1
    captured = capsys.readouterr()
    assert "R1" in captured.out
    assert "❌" in captured.err


def test_validate_json(sample_path, capsys):
    assert main(["validate", "--format", "json", str(sample_path)]) == 0
    assert json.loads(capsys.readouterr().out)["violations"] == []


def test_stats(sample_path, capsys):
    assert main(["stats", "--format", "tsv", "--lengths", str(sample_path)]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[:2] == ["relation\tcount\tpercentage", "root\t7\t26.9"]
    assert "4\t4" in out


def test_stats_json_with_coverage(sample_path, capsys):
    assert main(["stats", "--format", "json", "--coverage", str(sample_path)]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["relations"][0]["count"] == 7
    assert "preterm" in payload["coverage"]["used"]


def test_compare(sample_path, capsys):
    assert main(["compare", "--top-k", "2", "--names", "A", "B", str(sample_path), str(sample_path)]) == 0
    assert capsys.readouterr().out.splitlines()[0].split() == ["A", "B"]


def test_agree_identical(sample_path, capsys):
    assert main(["agree", str(sample_path), str(sample_path)]) == 0
    assert capsys.readouterr().out == "100.0 100.0\n"
    assert main(["agree", "--per-sentence", str(sample_path), str(sample_path)]) == 0
    assert capsys.readouterr().out.splitlines()[0] == "sent_id\ttokens\tunlabeled\tlabeled"


def test_eval_identical(sample_path, capsys, ledger):
    assert main(["eval", "--record", "self", str(sample_path), str(sample_path)]) == 0
    assert capsys.readouterr().out == "100.00 100.00\n"
    assert json.loads(ledger.read_text(encoding="utf-8"))[0]["name"] == "self"

    assert main(["results", "--format", "tsv"]) == 0
    assert capsys.readouterr().out.splitlines()[1] == "self\t100.00\t100.00\t25"


def test_eval_single_relation(sample_path, capsys):
    assert main(["eval", "--relation", "obj", str(sample_path), str(sample_path)]) == 0
    assert capsys.readouterr().out == "obj\tgold 5\tpredicted 5\tcorrect 5\n"


def test_synth_augment_split(tmp_path, capsys):
    clean = tmp_path / "clean.conllu"
    assert main(["synth", "--seed", "3", "40", str(clean)]) == 0
    assert len(read_conllu(clean)) == 40

    first, second = tmp_path / "a.conllu", tmp_path / "b.conllu"
    assert main(["augment", "--seed", "5", str(clean), str(first)]) == 0
    assert main(["augment", "--seed", "5", str(clean), str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()
    assert main(["validate", "--strict", str(first)]) == 0

    train_path, test_path = tmp_path / "train.conllu", tmp_path / "test.conllu"
    assert main(["split", "--test-size", "10", str(first), str(train_path), str(test_path)]) == 0
    assert (len(read_conllu(train_path)), len(read_conllu(test_path))) == (30, 10)


def test_augment_with_config_file(tmp_path, sample_path):
    cfg = tmp_path / "augment.cfg"
    cfg.write_text("seed = 1\nword_drop = 0\nword_split = 0\nself_correct = 0\nstutter = 1\nfiller = 0\n"
                   "preterm_truncate = 0\n", encoding="utf-8")
    out = tmp_path / "out.conllu"
    assert main(["augment", "--config", str(cfg), str(sample_path), str(out)]) == 0
    augmented = read_conllu(out)
    assert all(s.comment_value("augmented") == "stutter" for s in augmented)


def test_augment_config_without_seed_uses_environment(tmp_path, sample_path, monkeypatch, capsys):
    cfg = tmp_path / "augment.cfg"
    cfg.write_text("stutter = 0.5\n", encoding="utf-8")
    monkeypatch.setattr(config, "SEED", 11)
    assert main(["augment", "--config", str(cfg), str(sample_path), str(tmp_path / "a.conllu")]) == 0
    assert "seed 11;" in capsys.readouterr().err
    assert main(["augment", "--config", str(cfg), "--seed", "12", str(sample_path), str(tmp_path / "b.conllu")]) == 0
    assert "seed 12;" in capsys.readouterr().err


def test_render(sample_path, capsys, tmp_path):
    assert main(["render", "--sent-id", "sample-1", str(sample_path)]) == 0
    assert "got" in capsys.readouterr().out
    svg = tmp_path / "tree.svg"
    assert main(["render", "--index", "2", "--svg", "--out", str(svg), str(sample_path)]) == 0
    assert svg.read_text(encoding="utf-8").startswith("<svg")
    assert main(["render", "--index", "99", str(sample_path)]) == 2


def test_train_parse_eval(tmp_path, capsys):
    corpus = tmp_path / "corpus.conllu"
    assert main(["synth", "--seed", "2", "30", str(corpus)]) == 0
    cfg = tmp_path / "parser.cfg"
    cfg.write_text("embed_dim = 8\nhidden_size = 8\nlayers = 1\narc_dim = 8\nlabel_dim = 6\n", encoding="utf-8")
    ckpt, log_path = tmp_path / "parser.ckpt", tmp_path / "train.tsv"
    assert main(["train", "--config", str(cfg), "--epochs", "1", "--dev", str(corpus),
                 "--out", str(ckpt), "--log", str(log_path), str(corpus)]) == 0
    assert log_path.read_text(encoding="utf-8").startswith("epoch\ttrain_loss")

    assert main(["finetune", "--epochs", "1", "--dev", str(corpus), "--out", str(tmp_path / "tuned.ckpt"),
                 str(ckpt), str(corpus)]) == 0

    parsed = tmp_path / "parsed.conllu"
    assert main(["parse", str(ckpt), str(corpus), str(parsed)]) == 0
    assert [s.forms for s in read_conllu(parsed)] == [s.forms for s in read_conllu(corpus)]
    capsys.readouterr()
    assert main(["eval", str(corpus), str(parsed)]) == 0
    uas, las = map(float, capsys.readouterr().out.split())
    assert 0.0 <= las <= uas <= 100.0


def test_parse_to_stdout(tmp_path, capsys, sample_path):
    corpus = tmp_path / "corpus.conllu"
    main(["synth", "10", str(corpus)])
    ckpt = tmp_path / "parser.ckpt"
    cfg = tmp_path / "parser.cfg"
    cfg.write_text("embed_dim = 4\nhidden_size = 4\nlayers = 1\narc_dim = 4\nlabel_dim = 4\n", encoding="utf-8")
    assert main(["train", "--config", str(cfg), "--epochs", "1", "--dev", str(corpus), "--out", str(ckpt),
                 str(corpus)]) == 0
    capsys.readouterr()
    assert main(["parse", str(ckpt), str(sample_path)]) == 0
    out = capsys.readouterr().out
    assert out.count("# sent_id") == 7
    assert out.endswith("\n\n")


def test_damaged_checkpoint(tmp_path, sample_path, capsys):
    ckpt = tmp_path / "bad.ckpt"
    ckpt.write_bytes(b"not a checkpoint")
    assert main(["parse", str(ckpt), str(sample_path)]) == 2
    assert "bad-magic" in capsys.readouterr().err


def test_missing_file(tmp_path, capsys):
    assert main(["stats", str(tmp_path / "nope.conllu")]) == 2
    assert "❌" in capsys.readouterr().err


def test_malformed_input(tmp_path, capsys):
    path = tmp_path / "bad.conllu"
    path.write_text("1\tgo\n\n", encoding="utf-8")
    assert main(["validate", str(path)]) == 2
    assert "bad.conllu:1" in capsys.readouterr().err


def test_settings_file(tmp_path, sample_path, capsys):
    cfg = tmp_path / "scudkit.cfg"
    cfg.write_text("FORMAT = tsv\n", encoding="utf-8")
    assert main(["stats", "--config", str(cfg), str(sample_path)]) == 0
    assert capsys.readouterr().out.startswith("relation\tcount")
    # the flag wins over the file
    assert main(["stats", "--config", str(cfg), "--format", "text", str(sample_path)]) == 0
    assert capsys.readouterr().out.startswith("Tag")

    cfg.write_text("format = yaml\n", encoding="utf-8")
    assert main(["stats", "--config", str(cfg), str(sample_path)]) == 2


def test_fetch_without_url(monkeypatch, capsys):
    monkeypatch.setattr(config, "CORPUS_URL", "")
    assert main(["fetch"]) == 2
    assert "SCUDKIT_CORPUS_URL" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [[], ["frobnicate"], ["stats", "--bogus", "x"], ["split", "a", "b", "c"]])
def test_usage_errors(argv):
    with pytest.raises(SystemExit) as excinfo:
        main(argv)
    assert excinfo.value.code == 2


@pytest.mark.parametrize("command", SUBCOMMANDS)
def test_every_subcommand_has_help(command, capsys):
    with pytest.raises(SystemExit) as excinfo:
        main([command, "--help"])
    assert excinfo.value.code == 0
    out = capsys.readouterr().out
    for flag in ("--tagset", "--format", "--jobs", "--seed", "--config"):
        assert flag in out


def test_parser_lists_every_subcommand():
    choices = build_parser()._subparsers._group_actions[0].choices
    assert set(choices) == set(SUBCOMMANDS)


def test_round_trip_through_cli_keeps_bytes(sample_path, tmp_path):
    out = tmp_path / "copy.conllu"
    assert main(["split", "--test-size", "0", str(sample_path), str(out), str(tmp_path / "empty.conllu")]) == 0
    assert out.read_text(encoding="utf-8") == write_conllu(read_conllu(sample_path))
