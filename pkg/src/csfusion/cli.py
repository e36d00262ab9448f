"""Command-line entry point.

One subcommand per pipeline stage. Exit codes: 0 success, 1 usage error,
2 data error (bad files/configs/tokens), 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys

import torch

from . import corpus as corpus_mod
from . import experiment as experiment_mod
from .belm import BelmConfig, BelmModel, build_input, decode, load_checkpoint, save_checkpoint, train
from .errors import DataError
from .lat import mask_corpus
from .mamsim import load_noise_config
from .metrics import score
from .textsim import SimParams, simulate_corpus
from .vocab import LanguageTag, load_vocab


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _load_json(path) -> dict:
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def _cmd_gen_corpus(args) -> int:
    vocab = load_vocab(args.vocab)
    data = _load_json(args.config)
    if args.seed is not None:
        data["seed"] = args.seed
    for key in ("len_range", "span_len_range", "spans_per_utt_range"):
        if key in data:
            data[key] = tuple(int(x) for x in data[key])
    config = corpus_mod.GenConfig(**data)
    corpus = corpus_mod.generate(config, vocab)
    corpus_mod.save(corpus, args.out)
    print(f"wrote {len(corpus)} utterances to {args.out}")
    return 0


def _cmd_mask(args) -> int:
    vocab = load_vocab(args.vocab)
    corpus = corpus_mod.load(args.corpus, vocab)
    for lang, suffix in ((LanguageTag.MANDARIN, ".man"), (LanguageTag.ENGLISH, ".eng")):
        masked = mask_corpus(corpus.utterances, lang, vocab)
        corpus_mod.save_predictions(masked, vocab, args.corpus + suffix)
    print(f"wrote {args.corpus}.man and {args.corpus}.eng")
    return 0


def _cmd_simulate(args) -> int:
    vocab = load_vocab(args.vocab)
    corpus = corpus_mod.load(args.corpus, vocab)
    params = SimParams(p_unk=args.p_unk, seed=args.seed)
    triples = simulate_corpus(corpus.utterances, params, vocab)
    corpus_mod.save_predictions([t[0] for t in triples], vocab, args.corpus + ".simM")
    corpus_mod.save_predictions([t[1] for t in triples], vocab, args.corpus + ".simE")
    corpus_mod.save_predictions([t[2] for t in triples], vocab, args.corpus + ".target")
    print(f"wrote {args.corpus}.simM, {args.corpus}.simE and {args.corpus}.target")
    return 0


def _cmd_emulate(args) -> int:
    vocab = load_vocab(args.vocab)
    corpus = corpus_mod.load(args.corpus, vocab)
    cfg_m = load_noise_config(args.config_m)
    cfg_e = load_noise_config(args.config_e)
    from .mamsim import emulate_corpus

    triples = emulate_corpus(corpus.utterances, cfg_m, cfg_e, vocab)
    corpus_mod.save_predictions([t[0] for t in triples], vocab, args.corpus + ".mamM")
    corpus_mod.save_predictions([t[1] for t in triples], vocab, args.corpus + ".mamE")
    print(f"wrote {args.corpus}.mamM and {args.corpus}.mamE")
    return 0


def _cmd_train(args) -> int:
    torch.set_num_threads(args.threads)
    vocab = load_vocab(args.vocab)
    config_data = _load_json(args.config) if args.config else {}
    if args.seed is not None:
        config_data["seed"] = args.seed
    config = BelmConfig.from_json_dict(config_data)
    preds_m = corpus_mod.load_predictions(args.pred_m, vocab)
    preds_e = corpus_mod.load_predictions(args.pred_e, vocab)
    targets = corpus_mod.load(args.target, vocab).utterances
    if not len(preds_m) == len(preds_e) == len(targets):
        raise DataError(
            f"prediction/target files disagree on length: "
            f"{len(preds_m)}/{len(preds_e)}/{len(targets)}"
        )
    pairs = [
        (build_input(m, e, vocab, config.max_len), t)
        for m, e, t in zip(preds_m, preds_e, targets)
    ]
    model = BelmModel(config, vocab.size)
    history = train(model, pairs, args.epochs, args.batch_size)
    save_checkpoint(model, args.checkpoint)
    final = history[-1] if history else float("nan")
    print(f"trained {model.step} steps, final loss {final:.6f}, saved {args.checkpoint}")
    return 0


def _cmd_decode(args) -> int:
    torch.set_num_threads(args.threads)
    vocab = load_vocab(args.vocab)
    model = load_checkpoint(args.checkpoint, expect_vocab_size=vocab.size)
    preds_m = corpus_mod.load_predictions(args.pred_m, vocab)
    preds_e = corpus_mod.load_predictions(args.pred_e, vocab)
    if len(preds_m) != len(preds_e):
        raise DataError(f"prediction files disagree on length: {len(preds_m)}/{len(preds_e)}")
    hyps = [
        decode(model, build_input(m, e, vocab, model.config.max_len), args.beam).tokens
        for m, e in zip(preds_m, preds_e)
    ]
    corpus_mod.save_predictions(hyps, vocab, args.out)
    print(f"decoded {len(hyps)} utterances to {args.out}")
    return 0


def _cmd_score(args) -> int:
    vocab = load_vocab(args.vocab)
    refs = corpus_mod.load_predictions(args.ref, vocab)
    hyps = corpus_mod.load_predictions(args.hyp, vocab)
    report = score(refs, hyps, vocab)
    if args.json:
        print(json.dumps(report.to_json_dict(), sort_keys=True, indent=2))
    else:
        print(f"MER {100 * report.mer:.2f}")
        print(f"CER {100 * report.cer:.2f}" + ("" if report.cer_defined else " (no Mandarin reference units)"))
        print(f"WER {100 * report.wer:.2f}" + ("" if report.wer_defined else " (no English reference units)"))
        m, e = report.mandarin, report.english
        print(
            f"M sub/del/ins/ref {m.substitutions}/{m.deletions}/{m.insertions}/{m.ref_len}  "
            f"E sub/del/ins/ref {e.substitutions}/{e.deletions}/{e.insertions}/{e.ref_len}  "
            f"unk-ins {report.unk_insertions}  utts {report.utterances}"
        )
    return 0


def _cmd_experiment(args) -> int:
    data = _load_json(args.config)
    if args.seed is not None:
        data["seed"] = args.seed
    config = experiment_mod.ExperimentConfig.from_json_dict(data)
    if config.vocab_path is None:
        raise DataError("experiment config must set vocab_path")
    vocab = load_vocab(config.vocab_path)
    report = experiment_mod.run(config, vocab, args.out, threads=args.threads)
    print((experiment_mod._summary_table(report.systems)).rstrip())
    print(f"artifacts in {args.out}")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="csfusion", description=__doc__)
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("gen-corpus", help="generate a synthetic code-switched corpus")
    p.add_argument("--vocab", required=True)
    p.add_argument("--config", required=True, help="GenConfig JSON file")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.set_defaults(func=_cmd_gen_corpus)

    p = sub.add_parser("mask", help="write language-aware masked targets (.man/.eng)")
    p.add_argument("--vocab", required=True)
    p.add_argument("--corpus", required=True)
    p.set_defaults(func=_cmd_mask)

    p = sub.add_parser("simulate", help="text-simulate prediction pairs (.simM/.simE)")
    p.add_argument("--vocab", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--p-unk", type=float, default=0.5, dest="p_unk")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("emulate", help="emulate monolingual recognizers (.mamM/.mamE)")
    p.add_argument("--vocab", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--config-m", required=True, dest="config_m", help="Mandarin noise-config JSON")
    p.add_argument("--config-e", required=True, dest="config_e", help="English noise-config JSON")
    p.set_defaults(func=_cmd_emulate)

    p = sub.add_parser("train", help="train the fusion model")
    p.add_argument("--vocab", required=True)
    p.add_argument("--pred-m", required=True, dest="pred_m")
    p.add_argument("--pred-e", required=True, dest="pred_e")
    p.add_argument("--target", required=True)
    p.add_argument("--config", default=None, help="BelmConfig JSON file (defaults apply)")
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--batch-size", type=int, default=32, dest="batch_size")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("decode", help="beam-decode prediction pairs with a checkpoint")
    p.add_argument("--vocab", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--pred-m", required=True, dest="pred_m")
    p.add_argument("--pred-e", required=True, dest="pred_e")
    p.add_argument("--beam", type=int, default=10)
    p.add_argument("--out", required=True)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=_cmd_decode)

    p = sub.add_parser("score", help="score hypotheses against references")
    p.add_argument("--ref", required=True)
    p.add_argument("--hyp", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("experiment", help="run one end-to-end experiment condition")
    p.add_argument("--config", required=True, help="ExperimentConfig JSON file")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=_cmd_experiment)

    return parser


def dispatch(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "func", None) is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        return args.func(args)
    except (DataError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"csfusion: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"csfusion: internal error: {exc!r}", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))
