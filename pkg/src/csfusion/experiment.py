"""End-to-end desk-scale experiments.

Pipeline: generate a code-switched corpus, split it, build training
pairs (text simulation or emulated recognizers), emulate recognizer
predictions for the test set, train the fusion model, decode the test
set, and score three systems against the references: the Mandarin-side
prediction alone, the English-side prediction alone, and the fusion
output. Every stage is seeded, so a config maps to byte-identical
artifacts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import torch

from . import corpus as corpus_mod
from .belm import BelmConfig, BelmModel, build_input, decode, save_checkpoint, train
from .corpus import Corpus, GenConfig
from .errors import ParseError, SchemaMismatch
from .mamsim import MamNoiseConfig, emulate_corpus
from .metrics import ScoreReport, score
from .textsim import SimParams, simulate_corpus
from .vocab import VocabSpec

SCHEMA_VERSION = 1

TRAIN_TEXTSIM = "textsim"
TRAIN_MAM = "mam"

_REGIME_NOTES = (
    "Noise regimes: FT-style recognizers map other-language tokens to unk "
    "(p_other_unk near 1); PT-style recognizers hallucinate runs of "
    "own-language tokens instead (p_other_unk near 0, expansion > 1). "
    "Training pairs come either from text simulation or from the emulated "
    "recognizers themselves."
)


@dataclass(frozen=True)
class ExperimentConfig:
    gen: GenConfig
    sim: SimParams
    mam_cfg_m: MamNoiseConfig
    mam_cfg_e: MamNoiseConfig
    belm: BelmConfig
    training_source: str
    beam: int
    seed: int
    split_fractions: tuple[float, float, float] = (0.8, 0.1, 0.1)
    epochs: int = 10
    batch_size: int = 32
    vocab_path: str | None = None

    def __post_init__(self):
        if self.training_source not in (TRAIN_TEXTSIM, TRAIN_MAM):
            raise ValueError(f"training_source must be {TRAIN_TEXTSIM!r} or {TRAIN_MAM!r}")
        if self.beam < 1:
            raise ValueError("beam must be >= 1")
        if self.epochs < 0 or self.batch_size < 1:
            raise ValueError("epochs must be >= 0 and batch_size >= 1")

    def to_json_dict(self) -> dict:
        return {
            "gen": {
                "utterance_count": self.gen.utterance_count,
                "len_range": list(self.gen.len_range),
                "cs_rate": self.gen.cs_rate,
                "span_len_range": list(self.gen.span_len_range),
                "spans_per_utt_range": list(self.gen.spans_per_utt_range),
                "seed": self.gen.seed,
            },
            "sim": {"p_unk": self.sim.p_unk, "seed": self.sim.seed},
            "mam_cfg_m": self.mam_cfg_m.to_json_dict(),
            "mam_cfg_e": self.mam_cfg_e.to_json_dict(),
            "belm": self.belm.to_json_dict(),
            "training_source": self.training_source,
            "beam": self.beam,
            "seed": self.seed,
            "split_fractions": list(self.split_fractions),
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "vocab_path": self.vocab_path,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "ExperimentConfig":
        try:
            gen_data = dict(data["gen"])
            for key in ("len_range", "span_len_range", "spans_per_utt_range"):
                if key in gen_data:
                    gen_data[key] = tuple(int(x) for x in gen_data[key])
            return cls(
                gen=GenConfig(**gen_data),
                sim=SimParams(**data["sim"]),
                mam_cfg_m=MamNoiseConfig.from_json_dict(data["mam_cfg_m"]),
                mam_cfg_e=MamNoiseConfig.from_json_dict(data["mam_cfg_e"]),
                belm=BelmConfig.from_json_dict(data["belm"]),
                training_source=data["training_source"],
                beam=int(data["beam"]),
                seed=int(data["seed"]),
                split_fractions=tuple(float(x) for x in data.get("split_fractions", (0.8, 0.1, 0.1))),
                epochs=int(data.get("epochs", 10)),
                batch_size=int(data.get("batch_size", 32)),
                vocab_path=data.get("vocab_path"),
            )
        except KeyError as exc:
            raise ParseError(f"experiment config is missing key {exc}") from exc


@dataclass(frozen=True)
class ExperimentReport:
    config: dict
    systems: dict[str, dict]
    loss_history: list[float]
    sizes: dict[str, int]
    schema_version: int = SCHEMA_VERSION
    regime_notes: str = _REGIME_NOTES

    def to_json_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "regime_notes": self.regime_notes,
            "config": self.config,
            "systems": self.systems,
            "loss_history": self.loss_history,
            "sizes": self.sizes,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n"


def _score_dict(report: ScoreReport) -> dict:
    return report.to_json_dict()


def _summary_table(systems: dict[str, dict]) -> str:
    lines = [f"{'system':<14} {'CER%':>8} {'WER%':>8} {'MER%':>8}"]
    for name in ("mandarin_only", "english_only", "fusion"):
        s = systems[name]
        lines.append(
            f"{name:<14} {100 * s['cer']:>8.2f} {100 * s['wer']:>8.2f} {100 * s['mer']:>8.2f}"
        )
    return "\n".join(lines) + "\n"


def build_training_pairs(config: ExperimentConfig, train_corpus: Corpus, vocab: VocabSpec):
    if config.training_source == TRAIN_TEXTSIM:
        triples = simulate_corpus(train_corpus.utterances, config.sim, vocab)
    else:
        triples = emulate_corpus(train_corpus.utterances, config.mam_cfg_m, config.mam_cfg_e, vocab)
    return [
        (build_input(pred_m, pred_e, vocab, config.belm.max_len), target)
        for pred_m, pred_e, target in triples
    ]


def run(config: ExperimentConfig, vocab: VocabSpec, out_dir, threads: int = 1) -> ExperimentReport:
    """Run one condition end to end, writing all artifacts under ``out_dir``."""
    torch.set_num_threads(threads)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    full = corpus_mod.generate(config.gen, vocab)
    train_c, dev_c, test_c = corpus_mod.split(full, config.split_fractions, config.seed)

    pairs = build_training_pairs(config, train_c, vocab)
    model = BelmModel(config.belm, vocab.size)
    history = train(model, pairs, config.epochs, config.batch_size)

    test_triples = emulate_corpus(test_c.utterances, config.mam_cfg_m, config.mam_cfg_e, vocab)
    preds_m = [t[0] for t in test_triples]
    preds_e = [t[1] for t in test_triples]
    hyps = [
        decode(model, build_input(m, e, vocab, config.belm.max_len), config.beam).tokens
        for m, e in zip(preds_m, preds_e)
    ]

    systems = {
        "mandarin_only": _score_dict(score(test_c, preds_m, vocab)),
        "english_only": _score_dict(score(test_c, preds_e, vocab)),
        "fusion": _score_dict(score(test_c, hyps, vocab)),
    }
    report = ExperimentReport(
        config=config.to_json_dict(),
        systems=systems,
        loss_history=history,
        sizes={"train": len(train_c), "dev": len(dev_c), "test": len(test_c)},
    )

    corpus_mod.save(test_c, out / "test.ref")
    corpus_mod.save_predictions(preds_m, vocab, out / "test.mamM")
    corpus_mod.save_predictions(preds_e, vocab, out / "test.mamE")
    corpus_mod.save_predictions(hyps, vocab, out / "test.hyp")
    save_checkpoint(model, out / "belm.ckpt")
    (out / "report.json").write_text(report.to_json(), encoding="utf-8")
    (out / "summary.txt").write_text(_summary_table(systems), encoding="utf-8")
    return report


def evaluate_predictions(
    model: BelmModel,
    test_corpus: Corpus,
    cfg_m: MamNoiseConfig,
    cfg_e: MamNoiseConfig,
    beam: int,
    vocab: VocabSpec,
) -> dict[str, ScoreReport]:
    """Re-score an existing model under different test-time noise configs."""
    triples = emulate_corpus(test_corpus.utterances, cfg_m, cfg_e, vocab)
    preds_m = [t[0] for t in triples]
    preds_e = [t[1] for t in triples]
    hyps = [
        decode(model, build_input(m, e, vocab, model.config.max_len), beam).tokens
        for m, e in zip(preds_m, preds_e)
    ]
    return {
        "mandarin_only": score(test_corpus, preds_m, vocab),
        "english_only": score(test_corpus, preds_e, vocab),
        "fusion": score(test_corpus, hyps, vocab),
    }


def _numeric_leaves(data, prefix: str = "") -> dict[str, float]:
    out: dict[str, float] = {}
    if isinstance(data, bool):
        return out
    if isinstance(data, (int, float)):
        out[prefix] = float(data)
    elif isinstance(data, dict):
        for key, value in data.items():
            out.update(_numeric_leaves(value, f"{prefix}.{key}" if prefix else str(key)))
    elif isinstance(data, (list, tuple)):
        for i, value in enumerate(data):
            out.update(_numeric_leaves(value, f"{prefix}[{i}]"))
    return out


def compare(report_a: ExperimentReport | dict, report_b: ExperimentReport | dict) -> dict[str, float]:
    """Field-wise numeric deltas (a minus b) over the two reports' systems."""
    a = report_a.to_json_dict() if isinstance(report_a, ExperimentReport) else report_a
    b = report_b.to_json_dict() if isinstance(report_b, ExperimentReport) else report_b
    if a.get("schema_version") != b.get("schema_version"):
        raise SchemaMismatch(a.get("schema_version"), b.get("schema_version"))
    leaves_a = _numeric_leaves(a["systems"])
    leaves_b = _numeric_leaves(b["systems"])
    if set(leaves_a) != set(leaves_b):
        raise SchemaMismatch("systems fields differ", "")
    return {key: leaves_a[key] - leaves_b[key] for key in sorted(leaves_a)}
