"""Command-line interface.

Subcommands: gen-data, train, eval, tag, nn, export-embeddings,
baseline-logreg. Exit codes: 0 success, 1 usage error, 2 runtime error.
Every command that writes artifacts embeds the resolved configuration and
seed so the run can be reproduced exactly.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import io as model_io
from .baseline import FeatureScaler, build_corpus_stats, feature_matrix, train_logreg
from .data import encode_pairs, read_dataset
from .errors import SesaError, UsageError
from .interpret import export_skill_embeddings, job2skill, nearest_skills
from .linalg import SeededRng
from .synth import gen_aligned_embeddings, gen_dataset
from .text import build_skill_vocab, build_word_vocab, load_embeddings, tokenize
from .training import score_examples, train


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="sesa", description="Interpretable job-profile relevance ranking")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)

    p = sub.add_parser("gen-data", help="generate a synthetic labeled corpus")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--config", help="run-config JSON file (generator keys)")
    p.add_argument("--seed", type=int, help="generator seed")
    p.add_argument("--n-examples", type=int, dest="n_examples")
    p.add_argument("--n-skills", type=int, dest="n_skills")
    p.add_argument("--pos-rate", type=float, dest="pos_rate")
    p.add_argument("--label-noise", type=float, dest="label_noise")
    p.add_argument("--train-frac", type=float, dest="train_frac")
    p.add_argument("--valid-frac", type=float, dest="valid_frac")
    p.add_argument("--test-frac", type=float, dest="test_frac")
    p.add_argument("--embeddings-dim", type=int, dest="embeddings_dim",
                   help="also write aligned embeddings of this width")

    p = sub.add_parser("train", help="train a model")
    p.add_argument("--train", required=True, dest="train_file")
    p.add_argument("--valid", required=True, dest="valid_file")
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--config", help="run-config JSON file (training keys)")
    p.add_argument("--embeddings", help="pretrained word-vector file")
    p.add_argument("--history", help="run-history file (default: <out>.history.jsonl)")
    p.add_argument("--seed", type=int, help="override the config seed")

    p = sub.add_parser("eval", help="evaluate a model on a labeled split")
    p.add_argument("--model", required=True)
    p.add_argument("--test", required=True, dest="test_file")
    p.add_argument("--report", required=True, help="report JSON file to write")

    p = sub.add_parser("tag", help="tag a job description with skills")
    p.add_argument("--model", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--text", help="job description text")
    group.add_argument("--file", help="file containing the job description")
    p.add_argument("--top-k", type=int, default=5, dest="top_k")

    p = sub.add_parser("nn", help="nearest skills in the learned embedding")
    p.add_argument("--model", required=True)
    p.add_argument("--skill", required=True, help="query skill name")
    p.add_argument("--k", type=int, default=10)

    p = sub.add_parser("export-embeddings",
                       help="write learned skill embeddings as a text file")
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("baseline-logreg",
                       help="similarity-feature logistic regression baseline")
    p.add_argument("--train", required=True, dest="train_file")
    p.add_argument("--test", required=True, dest="test_file")
    p.add_argument("--report", required=True)
    p.add_argument("--iters", type=int, default=100)
    p.add_argument("--l2-rate", type=float, default=0.1, dest="l2_rate")

    return parser


def _cmd_gen_data(args) -> int:
    config_map = model_io.load_run_config(args.config) if args.config else model_io.run_config_schema()
    for key in ("seed", "n_examples", "n_skills", "pos_rate", "label_noise",
                "train_frac", "valid_frac", "test_frac"):
        value = getattr(args, key)
        if value is not None:
            config_map[key] = value
    config = model_io.gen_config_from(config_map)
    _, _, lexicon = gen_dataset(config, out_dir=args.out)
    if args.embeddings_dim:
        # Derive a distinct stream so embedding noise never aliases corpus noise.
        rng = SeededRng(config.seed + 1)
        gen_aligned_embeddings(lexicon, args.embeddings_dim, rng,
                               path=Path(args.out) / "embeddings.txt")
    sizes = {name: len(read_dataset(Path(args.out) / f"{name}.jsonl"))
             for name in ("train", "valid", "test")}
    print(f"wrote {args.out}: train={sizes['train']} valid={sizes['valid']} test={sizes['test']}")
    return 0


def _cmd_train(args) -> int:
    config_map = model_io.load_run_config(args.config) if args.config else model_io.run_config_schema()
    if args.seed is not None:
        config_map["seed"] = args.seed
    config = model_io.train_config_from(config_map)
    config.validate()

    train_pairs = read_dataset(args.train_file)
    valid_pairs = read_dataset(args.valid_file)
    word_vocab = build_word_vocab((tokenize(p.job_text) for p in train_pairs), config.word_min_count)
    skill_vocab = build_skill_vocab((p.profile_skills for p in train_pairs), config.skill_min_count)
    train_examples, dropped_train = encode_pairs(train_pairs, word_vocab, skill_vocab, config.max_seq_len)
    valid_examples, dropped_valid = encode_pairs(valid_pairs, word_vocab, skill_vocab, config.max_seq_len)
    if dropped_train or dropped_valid:
        print(f"warning: dropped {dropped_train + dropped_valid} profile skills "
              "not in the skill vocabulary", file=sys.stderr)

    pretrained = None
    if args.embeddings:
        pretrained, coverage = load_embeddings(args.embeddings, word_vocab, config.emb_dim,
                                               SeededRng(config.seed))
        print(f"embeddings: covered {coverage}/{word_vocab.size - 1} vocabulary words")

    params, history = train(
        config, train_examples, valid_examples,
        n_skills=skill_vocab.size, vocab_size=word_vocab.size, pretrained=pretrained,
    )
    model_io.save_model(args.out, params, word_vocab, skill_vocab, config.as_dict(), config.seed)
    history_path = args.history or f"{args.out}.history.jsonl"
    model_io.write_history(history_path, history)
    best = max((r.valid_auc for r in history.records), default=float("nan"))
    print(f"trained {len(history)} evaluations, best validation AUC {best:.4f}; "
          f"model -> {args.out}, history -> {history_path}")
    return 0


def _load_model_examples(model_path, dataset_path):
    params, word_vocab, skill_vocab, meta = model_io.load_model(model_path)
    pairs = read_dataset(dataset_path)
    max_len = int(meta["config"].get("max_seq_len", 256))
    examples, dropped = encode_pairs(pairs, word_vocab, skill_vocab, max_len)
    if dropped:
        print(f"warning: dropped {dropped} profile skills not in the model's skill vocabulary",
              file=sys.stderr)
    return params, word_vocab, skill_vocab, meta, examples


def _cmd_eval(args) -> int:
    params, _, _, meta, examples = _load_model_examples(args.model, args.test_file)
    mode = meta["config"].get("score_mode", "dot")
    scores = score_examples(params, examples, mode)
    from .metrics import Metrics, roc_auc

    labels = np.array([float(ex.label) for ex in examples])
    diff = scores - labels
    metrics = Metrics(
        auc=roc_auc(scores, labels),
        mse=float(np.mean(diff * diff)),
        n_pos=int((labels == 1.0).sum()),
        n_neg=int((labels == 0.0).sum()),
    )
    model_io.write_report(args.report, metrics, meta["config_digest"],
                          model_io.file_digest(args.model))
    print(f"auc={metrics.auc:.4f} mse={metrics.mse:.4f} "
          f"n_pos={metrics.n_pos} n_neg={metrics.n_neg}; report -> {args.report}")
    return 0


def _cmd_tag(args) -> int:
    params, word_vocab, skill_vocab, meta = model_io.load_model(args.model)
    if args.text is not None:
        text = args.text
    else:
        text = Path(args.file).read_text(encoding="utf-8")
    result = job2skill(params, word_vocab, skill_vocab, text, args.top_k,
                       int(meta["config"].get("max_seq_len", 256)))
    print("positive skills:")
    for name, value in result.positive:
        print(f"  {name}\t{value:.6f}")
    print("negative skills:")
    for name, value in result.negative:
        print(f"  {name}\t{value:.6f}")
    return 0


def _cmd_nn(args) -> int:
    params, _, skill_vocab, _ = model_io.load_model(args.model)
    skill_id = skill_vocab.lookup(args.skill)
    if skill_id is None:
        raise SesaError(f"skill {args.skill!r} is not in the model's skill vocabulary")
    for other_id, sim in nearest_skills(params, skill_id, args.k):
        print(f"{skill_vocab.names[other_id]}\t{sim:.6f}")
    return 0


def _cmd_export_embeddings(args) -> int:
    params, _, skill_vocab, _ = model_io.load_model(args.model)
    export_skill_embeddings(args.out, params, skill_vocab)
    print(f"wrote {skill_vocab.size} skill embeddings -> {args.out}")
    return 0


def _cmd_baseline_logreg(args) -> int:
    train_pairs = read_dataset(args.train_file)
    test_pairs = read_dataset(args.test_file)
    stats = build_corpus_stats(tokenize(p.job_text) for p in train_pairs)
    as_xy = lambda pairs: ([(p.job_text, p.profile_skills) for p in pairs],
                           np.array([float(p.label) for p in pairs]))
    X_train, y_train = as_xy(train_pairs)
    X_test, y_test = as_xy(test_pairs)
    scaler = FeatureScaler.fit(feature_matrix(X_train, stats))
    model = train_logreg(scaler.transform(feature_matrix(X_train, stats)), y_train,
                         iters=args.iters, l2_rate=args.l2_rate)
    scores = model.decision_function(scaler.transform(feature_matrix(X_test, stats)))

    from .metrics import Metrics, roc_auc

    probs = 1.0 / (1.0 + np.exp(-scores))
    diff = probs - y_test
    metrics = Metrics(
        auc=roc_auc(scores, y_test),
        mse=float(np.mean(diff * diff)),
        n_pos=int((y_test == 1.0).sum()),
        n_neg=int((y_test == 0.0).sum()),
    )
    config = {"baseline": "similarity-logreg", "iters": args.iters, "l2_rate": args.l2_rate}
    model_io.write_report(args.report, metrics, model_io.config_digest(config), "-")
    print(f"baseline auc={metrics.auc:.4f} n_pos={metrics.n_pos} n_neg={metrics.n_neg}; "
          f"report -> {args.report}")
    return 0


_COMMANDS = {
    "gen-data": _cmd_gen_data,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "tag": _cmd_tag,
    "nn": _cmd_nn,
    "export-embeddings": _cmd_export_embeddings,
    "baseline-logreg": _cmd_baseline_logreg,
}


def run(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            return 1
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # argparse --help
        return 0 if exc.code in (0, None) else 1
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
