"""Scratch calibration for the acceptance-scale experiment (not shipped)."""

import sys
import time

sys.path.insert(0, "src")

import torch

from csfusion.belm import BelmConfig
from csfusion.corpus import GenConfig
from csfusion.experiment import ExperimentConfig, run
from csfusion.mamsim import MamNoiseConfig
from csfusion.textsim import SimParams
from csfusion.vocab import LanguageTag, build_vocab

M, E = LanguageTag.MANDARIN, LanguageTag.ENGLISH


def acceptance_vocab():
    entries = [(chr(0x4E00 + i), M) for i in range(200)]
    consonants = "bcdfghjklmnpqrstvwxz"
    vowels = "aeiou"
    pieces = []
    i = 0
    while len(pieces) < 100:
        syl = consonants[i % 20] + vowels[i % 5] + consonants[(i * 7 + 3) % 20]
        if syl not in {p.lstrip("_") for p in pieces}:
            pieces.append("_" + syl if len(pieces) < 60 else syl)
        i += 1
    return build_vocab(entries + [(p, E) for p in pieces])


def main(epochs=8, beam=4):
    torch.set_num_threads(1)
    vocab = acceptance_vocab()
    config = ExperimentConfig(
        gen=GenConfig(
            utterance_count=6000,
            len_range=(8, 16),
            cs_rate=0.8,
            span_len_range=(2, 4),
            spans_per_utt_range=(1, 2),
            seed=101,
        ),
        sim=SimParams(p_unk=0.5, seed=102),
        mam_cfg_m=MamNoiseConfig.ft(seed=103, p_own_sub=0.05),
        mam_cfg_e=MamNoiseConfig.ft(seed=104, p_own_sub=0.05),
        belm=BelmConfig(seed=105, warmup_steps=500),
        training_source="textsim",
        beam=beam,
        seed=106,
        split_fractions=(5000 / 6000, 500 / 6000, 500 / 6000),
        epochs=epochs,
        batch_size=32,
    )
    t0 = time.time()
    report = run(config, vocab, "/tmp/calib", threads=1)
    t1 = time.time()
    print(f"epochs={epochs} beam={beam} wall={t1 - t0:.1f}s")
    for name, s in report.systems.items():
        print(f"  {name:<14} mer={s['mer']:.4f} cer={s['cer']:.4f} wer={s['wer']:.4f}")
    print("  loss first/last:", report.loss_history[0], report.loss_history[-1])


if __name__ == "__main__":
    main(epochs=int(sys.argv[1]) if len(sys.argv) > 1 else 8)
