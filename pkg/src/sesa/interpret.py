"""Interpretability readouts of a trained model.

The projection matrix doubles as a table of skill embeddings (row j is
skill j), and a job's explicit representation doubles as a per-skill
relevance tagging of its text: large positive components are the skills
the job calls for, large negative ones the skills the model considers
anti-correlated with it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError
from .linalg import cosine
from .model import ModelParams, forward
from .text import SkillVocab, WordVocab, encode_tokens, tokenize, write_embeddings


@dataclass
class SkillEmbedding:
    name: str
    vector: np.ndarray


def skill_embedding(params: ModelParams, skill_id: int, name: str | None = None) -> SkillEmbedding:
    """Latent-space embedding of one skill: a copy of its projection row."""
    if not 0 <= skill_id < params.dims.n_skills:
        raise IndexError(f"skill id {skill_id} out of range [0, {params.dims.n_skills})")
    return SkillEmbedding(name=name if name is not None else str(skill_id),
                          vector=params.proj[skill_id].copy())


def nearest_skills(params: ModelParams, skill_id: int, k: int) -> list[tuple[int, float]]:
    """Top-k other skills by cosine against the query skill's embedding.

    Ties break toward the lower skill index; candidate rows with zero norm
    are treated as similarity 0.0.
    """
    n = params.dims.n_skills
    if not 0 <= skill_id < n:
        raise IndexError(f"skill id {skill_id} out of range [0, {n})")
    if not 1 <= k < n:
        raise ValueError(f"k must be in [1, {n}), got {k}")
    query = params.proj[skill_id]
    qnorm = np.linalg.norm(query)
    if qnorm == 0.0:
        raise DegenerateInputError(f"skill {skill_id} has a zero embedding")
    norms = np.linalg.norm(params.proj, axis=1)
    sims = np.zeros(n)
    nonzero = norms > 0.0
    sims[nonzero] = (params.proj[nonzero] @ query) / (norms[nonzero] * qnorm)
    candidates = [i for i in range(n) if i != skill_id]
    candidates.sort(key=lambda i: (-sims[i], i))
    return [(i, float(sims[i])) for i in candidates[:k]]


@dataclass
class TagResult:
    """Ranked skill tags for one job text.

    `positive` holds the top-k (skill, score) pairs in descending score
    order, `negative` the bottom-k in ascending order; scores are exactly
    the components of the job's explicit representation.
    """

    positive: list[tuple[str, float]]
    negative: list[tuple[str, float]]


def tag_explicit(explicit: np.ndarray, skill_vocab: SkillVocab, k: int) -> TagResult:
    """Build a TagResult from an explicit-space vector."""
    n = explicit.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    by_top = sorted(range(n), key=lambda j: (-explicit[j], j))
    by_bottom = sorted(range(n), key=lambda j: (explicit[j], j))
    return TagResult(
        positive=[(skill_vocab.names[j], float(explicit[j])) for j in by_top[:k]],
        negative=[(skill_vocab.names[j], float(explicit[j])) for j in by_bottom[:k]],
    )


def job2skill(
    params: ModelParams,
    word_vocab: WordVocab,
    skill_vocab: SkillVocab,
    text: str,
    k: int,
    max_seq_len: int = 256,
) -> TagResult:
    """Tag a job description with its top-k and bottom-k skills."""
    if skill_vocab.size != params.dims.n_skills:
        raise ValueError(
            f"skill vocabulary size {skill_vocab.size} != model n_skills {params.dims.n_skills}"
        )
    ids = encode_tokens(word_vocab, tokenize(text), max_seq_len)
    _, explicit, _ = forward(params, ids, np.array([], dtype=np.int64), "dot")
    return tag_explicit(explicit, skill_vocab, k)


def export_skill_embeddings(path, params: ModelParams, skill_vocab: SkillVocab) -> None:
    """Write projection rows as a textual embedding file keyed by skill name."""
    if skill_vocab.size != params.dims.n_skills:
        raise ValueError(
            f"skill vocabulary size {skill_vocab.size} != model n_skills {params.dims.n_skills}"
        )
    write_embeddings(path, skill_vocab.names, params.proj)
