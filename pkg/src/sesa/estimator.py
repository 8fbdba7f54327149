"""Scikit-learn style estimators wrapping the training and baseline pipelines.

Both estimators take X as a sequence of (job_text, profile_skills) pairs
and y as binary labels, so they compose with sklearn model selection and
metrics utilities. `SesaRanker.transform` maps raw job texts into the
explicit skill space, which is the representation the model is trained to
make comparable with profiles.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .baseline import CorpusStats, FeatureScaler, build_corpus_stats, feature_matrix, train_logreg
from .data import LabeledPair, encode_pairs
from .interpret import job2skill
from .linalg import SeededRng
from .metrics import Metrics, evaluate
from .text import build_skill_vocab, build_word_vocab, load_embeddings, tokenize
from .training import TrainConfig, score_examples, train


def validate_pairs(X, y=None):
    """Check the (job_text, profile_skills) structure; returns (X, labels array)."""
    X = list(X)
    for i, item in enumerate(X):
        if not (isinstance(item, (tuple, list)) and len(item) == 2):
            raise ValueError(f"X[{i}] must be a (job_text, profile_skills) pair")
        text, skills = item
        if not isinstance(text, str):
            raise ValueError(f"X[{i}][0] must be a string job text")
        if not all(isinstance(s, str) for s in skills):
            raise ValueError(f"X[{i}][1] must be a list of skill-name strings")
    if y is None:
        return X, None
    labels = np.asarray(y)
    if labels.shape != (len(X),):
        raise ValueError(f"y has shape {labels.shape}, expected ({len(X)},)")
    if not np.all((labels == 0) | (labels == 1)):
        raise ValueError("y must be binary (0/1)")
    return X, labels.astype(np.int64)


def _as_dataset(X, y):
    return [LabeledPair(text, list(skills), int(label)) for (text, skills), label in zip(X, y)]


class SesaRanker(BaseEstimator):
    """Trainable job-profile relevance scorer with an interpretable skill space.

    Parameters mirror the training configuration; `embeddings_path` points
    at a textual word-vector file used to warm-start the embedding table,
    and `validation_fraction` carves a validation split out of the
    training data when `fit` is not given one explicitly.
    """

    def __init__(
        self,
        emb_dim=200,
        hidden=100,
        learning_rate=0.05,
        l2_rate=1e-7,
        batch_size=1000,
        eval_every=500,
        patience=20,
        max_iters=20000,
        seed=42,
        score_mode="dot",
        clip_norm=5.0,
        max_seq_len=256,
        freeze_embeddings=False,
        neg_subsample=1.0,
        word_min_count=1,
        skill_min_count=1,
        embeddings_path=None,
        validation_fraction=0.05,
    ):
        self.emb_dim = emb_dim
        self.hidden = hidden
        self.learning_rate = learning_rate
        self.l2_rate = l2_rate
        self.batch_size = batch_size
        self.eval_every = eval_every
        self.patience = patience
        self.max_iters = max_iters
        self.seed = seed
        self.score_mode = score_mode
        self.clip_norm = clip_norm
        self.max_seq_len = max_seq_len
        self.freeze_embeddings = freeze_embeddings
        self.neg_subsample = neg_subsample
        self.word_min_count = word_min_count
        self.skill_min_count = skill_min_count
        self.embeddings_path = embeddings_path
        self.validation_fraction = validation_fraction

    def _config(self) -> TrainConfig:
        return TrainConfig(
            emb_dim=self.emb_dim,
            hidden=self.hidden,
            learning_rate=self.learning_rate,
            l2_rate=self.l2_rate,
            batch_size=self.batch_size,
            eval_every=self.eval_every,
            patience=self.patience,
            max_iters=self.max_iters,
            seed=self.seed,
            score_mode=self.score_mode,
            clip_norm=self.clip_norm,
            max_seq_len=self.max_seq_len,
            freeze_embeddings=self.freeze_embeddings,
            neg_subsample=self.neg_subsample,
            word_min_count=self.word_min_count,
            skill_min_count=self.skill_min_count,
        )

    def fit(self, X, y, validation_data=None):
        X, labels = validate_pairs(X, y)
        config = self._config()
        config.validate()
        train_pairs = _as_dataset(X, labels)
        if validation_data is not None:
            Xv, yv = validate_pairs(*validation_data)
            valid_pairs = _as_dataset(Xv, yv)
        else:
            rng = SeededRng(self.seed)
            order = rng.permutation(len(train_pairs))
            n_valid = max(2, int(round(len(train_pairs) * self.validation_fraction)))
            valid_pairs = [train_pairs[i] for i in order[:n_valid]]
            train_pairs = [train_pairs[i] for i in order[n_valid:]]

        self.word_vocab_ = build_word_vocab(
            (tokenize(p.job_text) for p in train_pairs), self.word_min_count
        )
        self.skill_vocab_ = build_skill_vocab(
            (p.profile_skills for p in train_pairs), self.skill_min_count
        )
        train_examples, _ = encode_pairs(train_pairs, self.word_vocab_, self.skill_vocab_, self.max_seq_len)
        valid_examples, _ = encode_pairs(valid_pairs, self.word_vocab_, self.skill_vocab_, self.max_seq_len)

        pretrained = None
        if self.embeddings_path is not None:
            pretrained, self.embedding_coverage_ = load_embeddings(
                self.embeddings_path, self.word_vocab_, self.emb_dim, SeededRng(self.seed)
            )
        self.params_, self.history_ = train(
            config,
            train_examples,
            valid_examples,
            n_skills=self.skill_vocab_.size,
            vocab_size=self.word_vocab_.size,
            pretrained=pretrained,
        )
        return self

    def _check_fitted(self):
        if not hasattr(self, "params_"):
            raise NotFittedError("this SesaRanker instance is not fitted yet")

    def decision_function(self, X) -> np.ndarray:
        """Relevance score for each (job_text, profile_skills) pair."""
        self._check_fitted()
        X, _ = validate_pairs(X)
        pairs = [LabeledPair(text, list(skills), 0) for text, skills in X]
        examples, _ = encode_pairs(pairs, self.word_vocab_, self.skill_vocab_, self.max_seq_len)
        return score_examples(self.params_, examples, self.score_mode)

    def predict(self, X) -> np.ndarray:
        """Binary relevance at the natural 0.5 threshold of the 0/1 targets."""
        return (self.decision_function(X) >= 0.5).astype(np.int64)

    def transform(self, texts) -> np.ndarray:
        """Explicit skill-space representation for each raw job text."""
        self._check_fitted()
        from .model import forward
        from .text import encode_tokens

        rows = []
        for text in texts:
            ids = encode_tokens(self.word_vocab_, tokenize(text), self.max_seq_len)
            _, explicit, _ = forward(self.params_, ids, np.array([], dtype=np.int64), "dot")
            rows.append(explicit)
        return np.stack(rows)

    def tag(self, text: str, k: int = 5):
        """Top-k / bottom-k skill tags for one job text."""
        self._check_fitted()
        return job2skill(self.params_, self.word_vocab_, self.skill_vocab_, text, k, self.max_seq_len)

    def score(self, X, y) -> float:
        """ROC-AUC of the decision function on labeled pairs."""
        from .metrics import roc_auc

        X, labels = validate_pairs(X, y)
        return roc_auc(self.decision_function(X), labels.astype(np.float64))


class SimilarityLogRegBaseline(BaseEstimator):
    """Logistic regression over text/skill-set similarity features."""

    def __init__(self, iters=100, l2_rate=0.1, learning_rate=0.5):
        self.iters = iters
        self.l2_rate = l2_rate
        self.learning_rate = learning_rate

    def fit(self, X, y):
        X, labels = validate_pairs(X, y)
        self.stats_ = build_corpus_stats(tokenize(text) for text, _ in X)
        raw = feature_matrix(X, self.stats_)
        self.scaler_ = FeatureScaler.fit(raw)
        self.model_ = train_logreg(
            self.scaler_.transform(raw), labels.astype(np.float64),
            iters=self.iters, l2_rate=self.l2_rate, learning_rate=self.learning_rate,
        )
        return self

    def _check_fitted(self):
        if not hasattr(self, "model_"):
            raise NotFittedError("this SimilarityLogRegBaseline instance is not fitted yet")

    def decision_function(self, X) -> np.ndarray:
        self._check_fitted()
        X, _ = validate_pairs(X)
        return self.model_.decision_function(self.scaler_.transform(feature_matrix(X, self.stats_)))

    def predict_proba(self, X) -> np.ndarray:
        self._check_fitted()
        X, _ = validate_pairs(X)
        p = self.model_.predict_proba(self.scaler_.transform(feature_matrix(X, self.stats_)))
        return np.column_stack([1.0 - p, p])

    def predict(self, X) -> np.ndarray:
        return (self.decision_function(X) >= 0.0).astype(np.int64)

    def score(self, X, y) -> float:
        from .metrics import roc_auc

        X, labels = validate_pairs(X, y)
        return roc_auc(self.decision_function(X), labels.astype(np.float64))


def evaluate_estimator(estimator, X, y) -> Metrics:
    """Metrics for any fitted estimator exposing decision_function."""
    X, labels = validate_pairs(X, y)
    scores = estimator.decision_function(X)

    class _Scored:
        __slots__ = ("score", "label")

        def __init__(self, s, l):
            self.score = s
            self.label = l

    items = [_Scored(s, l) for s, l in zip(scores, labels)]
    return evaluate(lambda it: it.score, items)
