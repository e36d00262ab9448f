import json

import pytest

from csfusion.cli import dispatch
from csfusion.corpus import GenConfig, generate, load_predictions, save
from csfusion.mamsim import MamNoiseConfig
from csfusion.vocab import load_vocab, save_vocab

from conftest import make_vocab

VOCAB = make_vocab()


@pytest.fixture()
def workdir(tmp_path):
    vocab_path = tmp_path / "vocab.tsv"
    save_vocab(VOCAB, vocab_path)
    corpus = generate(GenConfig(utterance_count=8, len_range=(3, 6), cs_rate=1.0, seed=1), VOCAB)
    corpus_path = tmp_path / "corpus.txt"
    save(corpus, corpus_path)
    return tmp_path, str(vocab_path), str(corpus_path)


def test_score_identical_files(workdir, capsys):
    _, vocab_path, corpus_path = workdir
    code = dispatch(["score", "--ref", corpus_path, "--hyp", corpus_path, "--vocab", vocab_path])
    out = capsys.readouterr().out
    assert code == 0
    assert "MER 0.00" in out


def test_score_json_output(workdir, capsys):
    _, vocab_path, corpus_path = workdir
    code = dispatch(["score", "--ref", corpus_path, "--hyp", corpus_path, "--vocab", vocab_path, "--json"])
    assert code == 0
    data = json.loads(capsys.readouterr().out)
    assert data["mer"] == 0.0


def test_unknown_subcommand_is_usage_error(capsys):
    assert dispatch(["frobnicate"]) == 1
    assert "usage" in capsys.readouterr().err.lower()


def test_no_subcommand_is_usage_error(capsys):
    assert dispatch([]) == 1


def test_missing_required_flag_is_usage_error(capsys):
    assert dispatch(["score", "--ref", "x"]) == 1


def test_help_exits_zero(capsys):
    assert dispatch(["--help"]) == 0
    assert dispatch(["score", "--help"]) == 0


def test_missing_file_is_data_error(workdir, capsys):
    _, vocab_path, _ = workdir
    code = dispatch(["score", "--ref", "/nonexistent", "--hyp", "/nonexistent", "--vocab", vocab_path])
    assert code == 2


def test_simulate_unknown_token_reports_line(workdir, capsys):
    tmp_path, vocab_path, _ = workdir
    bad = tmp_path / "bad.txt"
    bad.write_text("一 丁\n一 zzz\n", encoding="utf-8")
    code = dispatch(["simulate", "--vocab", vocab_path, "--corpus", str(bad), "--seed", "1"])
    err = capsys.readouterr().err
    assert code == 2
    assert "line 2" in err


def test_gen_corpus_and_mask(workdir, capsys):
    tmp_path, vocab_path, _ = workdir
    gen_cfg = tmp_path / "gen.json"
    gen_cfg.write_text(
        json.dumps(
            {
                "utterance_count": 5,
                "len_range": [3, 5],
                "cs_rate": 1.0,
                "span_len_range": [1, 2],
                "spans_per_utt_range": [1, 1],
                "seed": 3,
            }
        ),
        encoding="utf-8",
    )
    out = tmp_path / "gen.txt"
    assert dispatch(["gen-corpus", "--vocab", vocab_path, "--config", str(gen_cfg), "--out", str(out)]) == 0
    assert len(out.read_text(encoding="utf-8").splitlines()) == 5

    assert dispatch(["mask", "--vocab", vocab_path, "--corpus", str(out)]) == 0
    man = load_predictions(str(out) + ".man", VOCAB)
    eng = load_predictions(str(out) + ".eng", VOCAB)
    assert len(man) == len(eng) == 5


def test_simulate_emulate_outputs(workdir):
    tmp_path, vocab_path, corpus_path = workdir
    assert dispatch(["simulate", "--vocab", vocab_path, "--corpus", corpus_path, "--seed", "5"]) == 0
    sim_m = load_predictions(corpus_path + ".simM", VOCAB)
    assert len(sim_m) == 8

    noise = tmp_path / "noise.json"
    noise.write_text(json.dumps(MamNoiseConfig.ft(seed=2).to_json_dict()), encoding="utf-8")
    assert dispatch([
        "emulate", "--vocab", vocab_path, "--corpus", corpus_path,
        "--config-m", str(noise), "--config-e", str(noise),
    ]) == 0
    assert len(load_predictions(corpus_path + ".mamM", VOCAB)) == 8


def test_train_decode_round_trip(workdir, capsys):
    tmp_path, vocab_path, corpus_path = workdir
    assert dispatch(["simulate", "--vocab", vocab_path, "--corpus", corpus_path, "--seed", "5"]) == 0
    belm_cfg = tmp_path / "belm.json"
    belm_cfg.write_text(
        json.dumps(
            {
                "enc_layers": 1, "dec_layers": 1, "d_model": 16, "heads": 2,
                "d_ff": 32, "dropout": 0.0, "max_len": 64, "warmup_steps": 5, "seed": 4,
            }
        ),
        encoding="utf-8",
    )
    ckpt = tmp_path / "model.ckpt"
    code = dispatch([
        "train", "--vocab", vocab_path,
        "--pred-m", corpus_path + ".simM", "--pred-e", corpus_path + ".simE",
        "--target", corpus_path, "--config", str(belm_cfg),
        "--epochs", "2", "--batch-size", "4", "--checkpoint", str(ckpt),
    ])
    assert code == 0
    assert ckpt.exists()

    hyp = tmp_path / "out.hyp"
    code = dispatch([
        "decode", "--vocab", vocab_path, "--checkpoint", str(ckpt),
        "--pred-m", corpus_path + ".simM", "--pred-e", corpus_path + ".simE",
        "--beam", "2", "--out", str(hyp),
    ])
    assert code == 0
    assert len(load_predictions(hyp, VOCAB)) == 8

    code = dispatch(["score", "--ref", corpus_path, "--hyp", str(hyp), "--vocab", vocab_path])
    assert code == 0


def test_experiment_subcommand(workdir, capsys):
    tmp_path, vocab_path, _ = workdir
    exp_cfg = {
        "gen": {
            "utterance_count": 40, "len_range": [3, 6], "cs_rate": 0.8,
            "span_len_range": [1, 2], "spans_per_utt_range": [1, 1], "seed": 5,
        },
        "sim": {"p_unk": 0.5, "seed": 6},
        "mam_cfg_m": MamNoiseConfig.ft(seed=7).to_json_dict(),
        "mam_cfg_e": MamNoiseConfig.ft(seed=8).to_json_dict(),
        "belm": {
            "enc_layers": 1, "dec_layers": 1, "d_model": 16, "heads": 2,
            "d_ff": 32, "dropout": 0.0, "max_len": 64, "warmup_steps": 5, "seed": 9,
        },
        "training_source": "textsim",
        "beam": 2,
        "seed": 10,
        "epochs": 1,
        "batch_size": 8,
        "vocab_path": vocab_path,
    }
    cfg_path = tmp_path / "exp.json"
    cfg_path.write_text(json.dumps(exp_cfg), encoding="utf-8")
    out_dir = tmp_path / "run"
    assert dispatch(["experiment", "--config", str(cfg_path), "--out", str(out_dir)]) == 0
    assert (out_dir / "report.json").exists()
    assert "MER" in capsys.readouterr().out


def test_vocab_file_loads_back(workdir):
    _, vocab_path, _ = workdir
    assert load_vocab(vocab_path) == VOCAB
