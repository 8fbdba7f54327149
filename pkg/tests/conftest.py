import time
from dataclasses import dataclass

import numpy as np
import pytest

from sesa.baseline import FeatureScaler, build_corpus_stats, feature_matrix, train_logreg
from sesa.data import encode_pairs
from sesa.interpret import job2skill
from sesa.linalg import SeededRng
from sesa.metrics import roc_auc
from sesa.synth import GenConfig, gen_aligned_embeddings, gen_dataset
from sesa.text import build_skill_vocab, build_word_vocab, load_embeddings, tokenize
from sesa.training import TrainConfig, score_examples, train

# Fixed configuration for the directional-analogue experiment shared by the
# acceptance tests: a 20k/2k/6k split over 50 skills with a 10% positive rate
# and 5% label noise, trained once with generator-aligned embeddings and once
# with random ones under an otherwise identical budget.
TABLE2_GEN = GenConfig(
    seed=7,
    n_examples=28000,
    n_skills=50,
    pos_rate=0.10,
    label_noise=0.05,
    train_frac=20 / 28,
    valid_frac=2 / 28,
    test_frac=6 / 28,
)
TABLE2_TRAIN = TrainConfig(
    emb_dim=32,
    hidden=32,
    learning_rate=1.0,
    batch_size=100,
    eval_every=250,
    patience=8,
    max_iters=4000,
    seed=42,
)


@dataclass
class Table2Bundle:
    auc_aligned: float
    auc_random: float
    auc_baseline: float
    tag_recall: float
    elapsed_seconds: float
    n_tag_jobs: int


@pytest.fixture(scope="session")
def table2_bundle(tmp_path_factory) -> Table2Bundle:
    started = time.time()
    splits, truths, lexicon = gen_dataset(TABLE2_GEN)
    word_vocab = build_word_vocab((tokenize(p.job_text) for p in splits["train"]), 1)
    skill_vocab = build_skill_vocab((p.profile_skills for p in splits["train"]), 1)
    assert skill_vocab.size == TABLE2_GEN.n_skills

    encoded = {}
    for name in ("train", "valid", "test"):
        encoded[name], _ = encode_pairs(splits[name], word_vocab, skill_vocab)
    test_labels = np.array([float(e.label) for e in encoded["test"]])

    emb_path = tmp_path_factory.mktemp("table2") / "aligned.txt"
    gen_aligned_embeddings(lexicon, TABLE2_TRAIN.emb_dim, SeededRng(8), path=emb_path)
    pretrained, _ = load_embeddings(emb_path, word_vocab, TABLE2_TRAIN.emb_dim,
                                    SeededRng(TABLE2_TRAIN.seed))

    aucs = {}
    models = {}
    for variant, emb in (("aligned", pretrained), ("random", None)):
        params, _ = train(
            TABLE2_TRAIN,
            encoded["train"],
            encoded["valid"],
            n_skills=skill_vocab.size,
            vocab_size=word_vocab.size,
            pretrained=emb,
        )
        models[variant] = params
        aucs[variant] = roc_auc(score_examples(params, encoded["test"]), test_labels)

    stats = build_corpus_stats(tokenize(p.job_text) for p in splits["train"])
    X_train = [(p.job_text, p.profile_skills) for p in splits["train"]]
    X_test = [(p.job_text, p.profile_skills) for p in splits["test"]]
    y_train = np.array([float(p.label) for p in splits["train"]])
    scaler = FeatureScaler.fit(feature_matrix(X_train, stats))
    logreg = train_logreg(scaler.transform(feature_matrix(X_train, stats)), y_train,
                          iters=100, l2_rate=0.1)
    baseline_scores = logreg.decision_function(scaler.transform(feature_matrix(X_test, stats)))
    auc_baseline = roc_auc(baseline_scores, test_labels)

    n_tag_jobs = 200
    recalls = []
    for pair, truth in list(zip(splits["test"], truths["test"]))[:n_tag_jobs]:
        tags = job2skill(models["aligned"], word_vocab, skill_vocab, pair.job_text, 5)
        top = {name for name, _ in tags.positive}
        recalls.append(len(top & set(truth.true_skills)) / len(truth.true_skills))

    return Table2Bundle(
        auc_aligned=float(aucs["aligned"]),
        auc_random=float(aucs["random"]),
        auc_baseline=float(auc_baseline),
        tag_recall=float(np.mean(recalls)),
        elapsed_seconds=time.time() - started,
        n_tag_jobs=n_tag_jobs,
    )
