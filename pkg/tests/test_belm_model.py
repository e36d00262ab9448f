import pytest
import torch

from csfusion.belm import BelmConfig, BelmModel, build_input, forward, loss
from csfusion.errors import PurityViolation, TooLong
from csfusion.vocab import BLANK_ID, SOS_ID, UNK_ID, LanguageTag

from conftest import make_vocab

M = LanguageTag.MANDARIN
E = LanguageTag.ENGLISH

VOCAB = make_vocab(n_mandarin=6, n_english=4)
TINY = BelmConfig(
    enc_layers=1, dec_layers=1, d_model=16, heads=2, d_ff=32,
    dropout=0.0, max_len=32, warmup_steps=10, seed=5,
)


@pytest.fixture(scope="module")
def model():
    return BelmModel(TINY, VOCAB.size)


def eng(i):
    return VOCAB.english_ids[i]


class TestBuildInput:
    def test_definition(self):
        assert build_input((4, UNK_ID), (UNK_ID, eng(0)), VOCAB) == (4, UNK_ID, BLANK_ID, UNK_ID, eng(0))

    def test_empty_segments(self):
        assert build_input((), (), VOCAB) == (BLANK_ID,)

    def test_purity(self):
        with pytest.raises(PurityViolation):
            build_input((eng(0),), (), VOCAB)
        with pytest.raises(PurityViolation):
            build_input((), (4,), VOCAB)

    def test_too_long(self):
        with pytest.raises(TooLong):
            build_input((4,) * 20, (), VOCAB, max_len=10)


class TestForward:
    def test_rows_normalize(self, model):
        inp = build_input((4, 5), (UNK_ID, eng(1)), VOCAB)
        logits = forward(model, inp, (SOS_ID, 4, 5))
        sums = torch.softmax(logits, dim=-1).sum(dim=-1)
        assert torch.allclose(sums, torch.ones_like(sums), atol=1e-6)

    def test_causality_exact(self, model):
        inp = build_input((4, 5, 6), (eng(0),), VOCAB)
        prefix = (SOS_ID, 4, 5, 6, 7)
        base = forward(model, inp, prefix)
        for t in range(1, len(prefix)):
            perturbed = list(prefix)
            perturbed[t] = 8 if perturbed[t] != 8 else 9
            changed = forward(model, inp, tuple(perturbed))
            assert torch.equal(base[:t], changed[:t])
            assert not torch.equal(base[t:], changed[t:])

    def test_eval_deterministic(self):
        cfg = BelmConfig(enc_layers=1, dec_layers=1, d_model=16, heads=2, d_ff=32,
                         dropout=0.3, max_len=32, warmup_steps=10, seed=5)
        dropout_model = BelmModel(cfg, VOCAB.size)
        inp = build_input((4,), (eng(0),), VOCAB)
        a = forward(dropout_model, inp, (SOS_ID, 4))
        b = forward(dropout_model, inp, (SOS_ID, 4))
        assert torch.equal(a, b)

    def test_too_long(self, model):
        with pytest.raises(TooLong):
            forward(model, (4,) * 40, (SOS_ID,))


class TestLoss:
    def test_uniform_logits_give_log_vocab(self):
        cfg = BelmConfig(enc_layers=1, dec_layers=1, d_model=16, heads=2, d_ff=32,
                         dropout=0.0, label_smoothing=0.0, max_len=32, warmup_steps=10, seed=5)
        model = BelmModel(cfg, VOCAB.size)
        with torch.no_grad():
            model.out_proj.weight.zero_()
            model.out_proj.bias.zero_()
        inp = build_input((4, 5), (), VOCAB)
        value = loss(model, inp, (4, 5, 6)).detach()
        expected = torch.log(torch.tensor(float(VOCAB.size)))
        assert abs(float(value) - float(expected)) < 1e-6

    def test_uniform_logits_log_vocab_any_smoothing(self):
        # Cross-entropy against uniform logits is log|V| for any target dist.
        model = BelmModel(TINY, VOCAB.size)
        with torch.no_grad():
            model.out_proj.weight.zero_()
            model.out_proj.bias.zero_()
        inp = build_input((4,), (), VOCAB)
        value = loss(model, inp, (4,)).detach()
        assert abs(float(value) - float(torch.log(torch.tensor(float(VOCAB.size))))) < 1e-6

    def test_nonnegative(self, model):
        inp = build_input((4, 5), (UNK_ID,), VOCAB)
        assert float(loss(model, inp, (4, 5)).detach()) > 0.0

    def test_too_long(self, model):
        with pytest.raises(TooLong):
            loss(model, (4,), (5,) * 40)


def test_model_rejects_bad_config():
    with pytest.raises(ValueError):
        BelmConfig(d_model=15, heads=2)
    with pytest.raises(ValueError):
        BelmConfig(dropout=1.0)
    with pytest.raises(ValueError):
        BelmConfig(enc_layers=0)


def test_same_seed_same_parameters():
    a = BelmModel(TINY, VOCAB.size)
    b = BelmModel(TINY, VOCAB.size)
    for pa, pb in zip(a.parameters(), b.parameters()):
        assert torch.equal(pa, pb)
