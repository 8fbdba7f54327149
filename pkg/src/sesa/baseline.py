"""Feature-based baseline: TF-IDF/Jaccard similarity features + logistic regression.

The profile side enters the text features as a pseudo-document made of its
skill names; document-frequency statistics come from the training split's
job texts only.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .text import tokenize


@dataclass
class CorpusStats:
    """Document frequencies over the training jobs."""

    df: dict[str, int]
    n_docs: int


def build_corpus_stats(token_docs) -> CorpusStats:
    df = Counter()
    n_docs = 0
    for tokens in token_docs:
        n_docs += 1
        df.update(set(tokens))
    return CorpusStats(df=dict(df), n_docs=n_docs)


def tfidf_vector(tokens, stats: CorpusStats) -> dict[str, float]:
    """Sparse tf * ln(N/df) weights; terms unseen in the corpus are skipped."""
    weights = {}
    for term, tf in Counter(tokens).items():
        df = stats.df.get(term, 0)
        if df > 0:
            weights[term] = tf * math.log(stats.n_docs / df)
    return weights


def sparse_cosine(u: dict, v: dict) -> float:
    """Cosine of two sparse vectors; 0.0 when either is empty/zero."""
    nu = math.sqrt(sum(x * x for x in u.values()))
    nv = math.sqrt(sum(x * x for x in v.values()))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    if len(u) > len(v):
        u, v = v, u
    num = sum(w * v[t] for t, w in u.items() if t in v)
    return num / (nu * nv)


def jaccard(a, b) -> float:
    """Intersection over union of two sets; 0.0 when both are empty."""
    a, b = set(a), set(b)
    union = len(a | b)
    if union == 0:
        return 0.0
    return len(a & b) / union


@dataclass
class PairFeatures:
    """Similarity features for one job-profile pair."""

    tfidf_cosine: float
    jaccard_skills: float
    skill_overlap_count: int
    job_len: int
    profile_skill_count: int

    NAMES = ("tfidf_cosine", "jaccard_skills", "skill_overlap_count", "job_len", "profile_skill_count")

    def as_array(self) -> np.ndarray:
        return np.array(
            [
                self.tfidf_cosine,
                self.jaccard_skills,
                float(self.skill_overlap_count),
                float(self.job_len),
                float(self.profile_skill_count),
            ]
        )


def pair_features(job_text: str, profile_skills, stats: CorpusStats) -> PairFeatures:
    """Compute the similarity features for one pair.

    The profile pseudo-document is its skill names joined by spaces. A
    profile skill counts as overlapping when any token of its name occurs
    in the job text.
    """
    job_tokens = tokenize(job_text)
    pseudo_doc = tokenize(" ".join(profile_skills))
    job_set = set(job_tokens)
    overlap = sum(1 for s in profile_skills if any(t in job_set for t in tokenize(s)))
    return PairFeatures(
        tfidf_cosine=sparse_cosine(tfidf_vector(job_tokens, stats), tfidf_vector(pseudo_doc, stats)),
        jaccard_skills=jaccard(job_set, set(pseudo_doc)),
        skill_overlap_count=overlap,
        job_len=len(job_tokens),
        profile_skill_count=len(profile_skills),
    )


@dataclass
class FeatureScaler:
    """Standardize features to zero mean and unit variance on the training split."""

    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, features: np.ndarray) -> "FeatureScaler":
        mean = features.mean(axis=0)
        std = features.std(axis=0)
        std[std == 0.0] = 1.0  # constant features pass through unscaled
        return cls(mean=mean, std=std)

    def transform(self, features: np.ndarray) -> np.ndarray:
        return (features - self.mean) / self.std


@dataclass
class LogRegModel:
    """Logistic regression weights plus the iteration count that produced them."""

    weights: np.ndarray
    bias: float
    n_iters: int

    def decision_function(self, features: np.ndarray) -> np.ndarray:
        return features @ self.weights + self.bias

    def predict_proba(self, features: np.ndarray) -> np.ndarray:
        return 1.0 / (1.0 + np.exp(-self.decision_function(features)))


def train_logreg(
    features: np.ndarray,
    labels: np.ndarray,
    iters: int = 100,
    l2_rate: float = 0.1,
    learning_rate: float = 0.5,
) -> LogRegModel:
    """Full-batch gradient descent on L2-regularized logistic loss.

    Runs exactly `iters` iterations from a zero start. The L2 term is
    applied as an implicit (proximal) shrinkage each step, which stays
    stable for arbitrarily large `l2_rate`; the bias is never penalized.
    Features should already be standardized.
    """
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] != labels.shape[0] or features.size == 0:
        raise DimensionError(
            f"features {features.shape} and labels {labels.shape} are inconsistent"
        )
    if labels.min() == labels.max():
        raise ValueError("training labels contain a single class")
    if iters < 1:
        raise ValueError(f"iters must be >= 1, got {iters}")
    n = features.shape[0]
    w = np.zeros(features.shape[1])
    b = 0.0
    shrink = 1.0 / (1.0 + learning_rate * l2_rate)
    for _ in range(iters):
        p = 1.0 / (1.0 + np.exp(-(features @ w + b)))
        err = p - labels
        grad_w = features.T @ err / n
        grad_b = float(err.mean())
        w = (w - learning_rate * grad_w) * shrink
        b = b - learning_rate * grad_b
    return LogRegModel(weights=w, bias=b, n_iters=iters)


def feature_matrix(pairs, stats: CorpusStats) -> np.ndarray:
    """Stack pair_features rows for a list of (job_text, profile_skills) pairs."""
    return np.stack([pair_features(job, skills, stats).as_array() for job, skills in pairs])
