import pytest
import torch

from csfusion.belm import (
    BelmConfig,
    BelmModel,
    average_checkpoints,
    build_input,
    decode,
    load_checkpoint,
    save_checkpoint,
    train,
)
from csfusion.errors import ShapeMismatch, VersionMismatch
from csfusion.vocab import UNK_ID

from conftest import make_vocab

VOCAB = make_vocab(n_mandarin=6, n_english=4)
TINY = BelmConfig(
    enc_layers=1, dec_layers=1, d_model=16, heads=2, d_ff=32,
    dropout=0.0, max_len=32, warmup_steps=10, seed=17,
)


@pytest.fixture()
def trained(tmp_path):
    model = BelmModel(TINY, VOCAB.size)
    inp = build_input((4, 5), (UNK_ID, UNK_ID), VOCAB)
    train(model, [(inp, (4, 5))], epochs=10, batch_size=1)
    path = tmp_path / "model.ckpt"
    save_checkpoint(model, path)
    return model, inp, path


def test_round_trip_bit_identical_decode(trained):
    model, inp, path = trained
    loaded = load_checkpoint(path)
    assert loaded.step == model.step
    assert loaded.config == model.config
    for (name_a, pa), (name_b, pb) in zip(model.named_parameters(), loaded.named_parameters()):
        assert name_a == name_b
        assert torch.equal(pa, pb)
    a = decode(model, inp, beam=3, max_out_len=8)
    b = decode(loaded, inp, beam=3, max_out_len=8)
    assert a == b


def test_save_is_byte_deterministic(trained, tmp_path):
    model, _, path = trained
    other = tmp_path / "again.ckpt"
    save_checkpoint(model, other)
    assert other.read_bytes() == path.read_bytes()


def test_truncated_file(trained, tmp_path):
    _, _, path = trained
    raw = path.read_bytes()
    for cut in (0, 2, 10, len(raw) // 2, len(raw) - 3):
        bad = tmp_path / f"cut{cut}.ckpt"
        bad.write_bytes(raw[:cut])
        with pytest.raises(VersionMismatch):
            load_checkpoint(bad)


def test_bad_magic(tmp_path):
    path = tmp_path / "bad.ckpt"
    path.write_bytes(b"NOPE" + b"\x00" * 64)
    with pytest.raises(VersionMismatch):
        load_checkpoint(path)


def test_trailing_garbage(trained, tmp_path):
    _, _, path = trained
    bad = tmp_path / "trailing.ckpt"
    bad.write_bytes(path.read_bytes() + b"\x00")
    with pytest.raises(VersionMismatch):
        load_checkpoint(bad)


def test_expected_config_mismatch(trained):
    _, _, path = trained
    other_cfg = BelmConfig(
        enc_layers=2, dec_layers=1, d_model=16, heads=2, d_ff=32,
        dropout=0.0, max_len=32, warmup_steps=10, seed=17,
    )
    with pytest.raises(ShapeMismatch):
        load_checkpoint(path, expect_config=other_cfg)
    with pytest.raises(ShapeMismatch):
        load_checkpoint(path, expect_vocab_size=VOCAB.size + 1)
    load_checkpoint(path, expect_config=TINY, expect_vocab_size=VOCAB.size)


def test_average_checkpoints(tmp_path):
    paths = []
    models = []
    for seed_shift in range(2):
        cfg = BelmConfig(
            enc_layers=1, dec_layers=1, d_model=16, heads=2, d_ff=32,
            dropout=0.0, max_len=32, warmup_steps=10, seed=17,
        )
        model = BelmModel(cfg, VOCAB.size)
        inp = build_input((4 + seed_shift,), (), VOCAB)
        train(model, [(inp, (4 + seed_shift,))], epochs=3 + seed_shift, batch_size=1)
        path = tmp_path / f"m{seed_shift}.ckpt"
        save_checkpoint(model, path)
        paths.append(path)
        models.append(model)
    averaged = average_checkpoints(paths)
    for name, p in averaged.named_parameters():
        expected = torch.stack(
            [dict(m.named_parameters())[name].detach() for m in models]
        ).mean(dim=0)
        assert torch.allclose(p, expected, atol=0, rtol=0)


def test_average_rejects_mismatched(tmp_path, trained):
    _, _, path = trained
    other_cfg = BelmConfig(
        enc_layers=1, dec_layers=1, d_model=32, heads=2, d_ff=32,
        dropout=0.0, max_len=32, warmup_steps=10, seed=17,
    )
    other = BelmModel(other_cfg, VOCAB.size)
    other_path = tmp_path / "other.ckpt"
    save_checkpoint(other, other_path)
    with pytest.raises(ShapeMismatch):
        average_checkpoints([path, other_path])
