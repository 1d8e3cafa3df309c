import subprocess
import sys
from pathlib import Path

import pytest

from jointparse.cli import EXIT_CHECK, EXIT_DATA, EXIT_OK, EXIT_USAGE, build_parser, main
from jointparse.conll import format_conll, read_conll
from jointparse.synthetic import example_sentence, toy_corpus

SAMPLE = Path(__file__).parent / "data" / "sample.conllu"
SMALL_FLAGS = ["--word-dim", "6", "--tag-dim", "3", "--char-dim", "3", "--char-hidden", "3",
               "--encoder-hidden", "5", "--tag-hidden", "3", "--classifier-hidden", "8"]


@pytest.fixture
def toy_files(tmp_path):
    train = tmp_path / "train.conllu"
    train.write_text(format_conll(toy_corpus(6, seed=4)))
    dev = tmp_path / "dev.conllu"
    dev.write_text(format_conll(toy_corpus(3, seed=5)))
    return train, dev


def run_train(train, dev, model, *extra):
    return main(["-q", "train", "--train", str(train), "--dev", str(dev), "--model", str(model),
                 "--epochs", "2", *SMALL_FLAGS, *extra])


def test_help_lists_defaults(capsys):
    with pytest.raises(SystemExit) as info:
        main(["train", "--help"])
    assert info.value.code == 0
    text = capsys.readouterr().out
    for needle in ("--word-dim", "default: 150", "default: 50", "default: 300", "default: 5.0",
                   "default: 1e-08", "default: 0.25", "default: 0.9", "--tag-to-parse",
                   "--parse-to-tag", "--embeddings", "--lr", "--seed", "--dialect"):
        assert needle in text, needle
    parser = build_parser()
    sub = next(a for a in parser._actions if a.dest == "command")
    for name, p in sub.choices.items():
        for action in p._actions:
            if action.dest != "help":
                assert action.help, f"{name} {action.dest} has no help text"


def test_usage_errors_exit_1(capsys):
    with pytest.raises(SystemExit) as info:
        main(["nosuchcommand"])
    assert info.value.code == EXIT_USAGE
    with pytest.raises(SystemExit) as info:
        main(["train", "--train", "x"])
    assert info.value.code == EXIT_USAGE
    with pytest.raises(SystemExit) as info:
        main(["train", "--train", "x", "--model", "m", "--tag-to-parse", "maybe"])
    assert info.value.code == EXIT_USAGE


def test_bad_hyperparameter_is_usage_error(toy_files, tmp_path, capsys):
    train, dev = toy_files
    code = run_train(train, dev, tmp_path / "m.bin", "--dropout", "1.5")
    assert code == EXIT_USAGE
    assert not (tmp_path / "m.bin").exists()


def test_train_parse_eval_pipeline(toy_files, tmp_path, capsys):
    train, dev = toy_files
    model = tmp_path / "m.bin"
    assert run_train(train, dev, model) == EXIT_OK
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("epoch=1 loss=") and "las=" in out[0] and len(out) == 2

    pred = tmp_path / "pred.conllu"
    assert main(["-q", "parse", "--model", str(model), "--input", str(dev),
                 "--output", str(pred)]) == EXIT_OK
    gold = read_conll(dev)
    predicted = read_conll(pred)
    assert predicted.n_tokens == gold.n_tokens
    assert [s.forms for s in predicted] == [s.forms for s in gold]

    capsys.readouterr()
    assert main(["-q", "eval", "--gold", str(dev), "--pred", str(pred)]) == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[-1].startswith("pos=") and lines[-1].endswith(f"tokens={gold.n_tokens}")
    assert any(l.startswith("LAS") for l in lines)


def test_same_seed_same_bytes(toy_files, tmp_path):
    train, dev = toy_files
    a, b, c = tmp_path / "a.bin", tmp_path / "b.bin", tmp_path / "c.bin"
    assert run_train(train, dev, a, "--seed", "7") == EXIT_OK
    assert run_train(train, dev, b, "--seed", "7") == EXIT_OK
    assert run_train(train, dev, c, "--seed", "8") == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes() != c.read_bytes()


def test_seed_from_environment(toy_files, tmp_path, monkeypatch):
    train, dev = toy_files
    monkeypatch.setenv("JOINTPARSE_SEED", "7")
    assert run_train(train, dev, tmp_path / "env.bin") == EXIT_OK
    monkeypatch.delenv("JOINTPARSE_SEED")
    assert run_train(train, dev, tmp_path / "flag.bin", "--seed", "7") == EXIT_OK
    assert (tmp_path / "env.bin").read_bytes() == (tmp_path / "flag.bin").read_bytes()
    monkeypatch.setenv("JOINTPARSE_SEED", "seven")
    assert run_train(train, dev, tmp_path / "bad.bin") == EXIT_USAGE


def test_ablation_flags_are_stored(toy_files, tmp_path):
    from jointparse.serialization import load_model

    train, dev = toy_files
    model = tmp_path / "m.bin"
    assert run_train(train, dev, model, "--tag-to-parse", "off", "--parse-to-tag", "off") == 0
    m = load_model(model)
    assert not m.ablation.tag_to_parse and not m.ablation.parse_to_tag


def test_train_projectivizes_and_logs(tmp_path, capsys):
    train = tmp_path / "t.conllu"
    train.write_text(SAMPLE.read_text())
    model = tmp_path / "m.bin"
    code = main(["train", "--train", str(train), "--model", str(model), "--epochs", "1",
                 *SMALL_FLAGS])
    assert code == EXIT_OK
    err = capsys.readouterr().err
    assert "projectivized 2 of 4 training sentences" in err
    assert '"epochs": 1' in err  # resolved configuration is logged


def test_parse_empty_input_and_stdout(toy_files, tmp_path, capsys):
    train, dev = toy_files
    model = tmp_path / "m.bin"
    run_train(train, dev, model)
    empty = tmp_path / "empty.conllu"
    empty.write_text("")
    out = tmp_path / "out.conllu"
    assert main(["-q", "parse", "--model", str(model), "--input", str(empty),
                 "--output", str(out)]) == 0
    assert out.read_text() == ""
    capsys.readouterr()
    assert main(["-q", "parse", "--model", str(model), "--input", str(dev)]) == 0
    assert capsys.readouterr().out.count("\n\n") == 3


def test_parse_ignores_gold_columns(toy_files, tmp_path):
    train, dev = toy_files
    model = tmp_path / "m.bin"
    run_train(train, dev, model)
    stripped = tmp_path / "raw.conllu"
    lines = []
    for line in dev.read_text().splitlines():
        cols = line.split("\t")
        if len(cols) == 10:
            cols[3] = cols[6] = cols[7] = "_"
        lines.append("\t".join(cols))
    stripped.write_text("\n".join(lines) + "\n")
    a, b = tmp_path / "a.conllu", tmp_path / "b.conllu"
    main(["-q", "parse", "--model", str(model), "--input", str(dev), "--output", str(a)])
    main(["-q", "parse", "--model", str(model), "--input", str(stripped), "--output", str(b)])
    assert a.read_text() == b.read_text()


def test_parse_bad_model(tmp_path, capsys):
    bad = tmp_path / "bad.bin"
    bad.write_bytes(b"JNTPARSE\x07\0\0\0\0")
    assert main(["parse", "--model", str(bad), "--input", str(SAMPLE)]) == EXIT_DATA
    assert "version 7" in capsys.readouterr().err


def test_oracle_example(tmp_path, capsys):
    path = tmp_path / "fig.conllu"
    path.write_text(format_conll([example_sentence()]))
    assert main(["-q", "oracle", "--input", str(path)]) == EXIT_OK
    out = capsys.readouterr().out.splitlines()
    assert out[0].split() == ["Shift", "Tag_PRP", "Shift", "Tag_VBD", "Left", "Label_nsubj",
                              "Shift", "Tag_DT", "Shift", "Tag_NN", "Left", "Label_det",
                              "Right", "Label_dobj"]
    assert "shift=4" in out[1] and "tokens=4" in out[1] and "length_check=ok" in out[1]


def test_oracle_non_projective(capsys):
    assert main(["-q", "oracle", "--input", str(SAMPLE)]) == EXIT_DATA
    captured = capsys.readouterr()
    assert "sentence 2: non-projective" in captured.err
    assert "sentence 4: non-projective" in captured.err
    assert "failed=2" in captured.out
    assert main(["-q", "oracle", "--input", str(SAMPLE), "--projectivize"]) == EXIT_OK
    stats = capsys.readouterr().out.splitlines()[-1]
    assert "sentences=4" in stats and "tokens=27" in stats and "shift=27" in stats
    assert "lifted=2" in stats and "failed=0" in stats


def test_eval_examples(tmp_path, capsys):
    s = example_sentence()
    gold = tmp_path / "g.conllu"
    gold.write_text(format_conll([s]))
    assert main(["-q", "eval", "--gold", str(gold), "--pred", str(gold)]) == 0
    assert capsys.readouterr().out.strip().endswith("pos=1.0000 uas=1.0000 las=1.0000 tokens=4")
    pred = tmp_path / "p.conllu"
    pred.write_text(format_conll([s.with_annotation(s.tags, s.heads,
                                                    ["nsubj", "root", "amod", "dobj"])]))
    assert main(["-q", "eval", "--gold", str(gold), "--pred", str(pred)]) == 0
    assert "las=0.7500" in capsys.readouterr().out
    missing = tmp_path / "missing.conllu"
    assert main(["-q", "eval", "--gold", str(gold), "--pred", str(missing)]) == EXIT_DATA
    assert str(missing) in capsys.readouterr().err
    other = tmp_path / "o.conllu"
    other.write_text(format_conll(toy_corpus(1)))
    assert main(["-q", "eval", "--gold", str(gold), "--pred", str(other)]) == EXIT_DATA


def test_eval_exclude_punct(capsys):
    assert main(["-q", "eval", "--gold", str(SAMPLE), "--pred", str(SAMPLE),
                 "--exclude-punct"]) == 0
    assert "tokens=23" in capsys.readouterr().out


def test_gradcheck(capsys):
    assert main(["-q", "gradcheck", "--seed", "2"]) == EXIT_OK
    first = capsys.readouterr().out
    assert first.startswith("gradcheck pass")
    assert main(["-q", "gradcheck", "--seed", "2"]) == EXIT_OK
    assert capsys.readouterr().out == first
    assert main(["-q", "gradcheck", "--seed", "2", "--tolerance", "0"]) == EXIT_CHECK
    assert "FAIL" in capsys.readouterr().out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "jointparse", "--help"], capture_output=True,
                          text=True, check=False)
    assert proc.returncode == 0
    assert "gradcheck" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "jointparse", "eval"], capture_output=True,
                          text=True, check=False)
    assert proc.returncode == EXIT_USAGE
