"""Tokenization, word/skill vocabularies, and embedding file loading.

Token rule: lowercase, split on anything outside [a-z0-9+#]. '+' and '#'
stay inside tokens so names like "c++" and "c#" survive.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, EmptyVocabularyError, ParseError
from .linalg import SeededRng

_TOKEN_RE = re.compile(r"[a-z0-9+#]+")

UNK_TOKEN = "<unk>"
UNK_ID = 0


def tokenize(text: str) -> list[str]:
    """Split text into lowercase tokens over [a-z0-9+#]. Empty input -> []."""
    return _TOKEN_RE.findall(text.lower())


def _ranked(counts: Counter, min_count: int) -> list[str]:
    # Descending frequency, ties broken lexicographically: reproducible indices.
    kept = [(item, n) for item, n in counts.items() if n >= min_count]
    kept.sort(key=lambda kv: (-kv[1], kv[0]))
    return kept


@dataclass
class WordVocab:
    """Token <-> id bijection with index 0 reserved for the unknown token."""

    id_of: dict[str, int]
    tokens: list[str]

    @property
    def size(self) -> int:
        return len(self.tokens)

    def lookup(self, token: str) -> int:
        return self.id_of.get(token, UNK_ID)


def build_word_vocab(corpus, min_count: int = 1) -> WordVocab:
    """Build a word vocabulary from an iterable of token lists.

    Tokens with frequency >= min_count are kept, ordered by descending
    frequency then lexicographically; index 0 is always the unknown token.
    An empty corpus yields the unknown-only vocabulary.
    """
    if min_count < 1:
        raise ValueError(f"min_count must be >= 1, got {min_count}")
    counts = Counter()
    for tokens in corpus:
        counts.update(tokens)
    tokens = [UNK_TOKEN] + [t for t, _ in _ranked(counts, min_count)]
    return WordVocab(id_of={t: i for i, t in enumerate(tokens)}, tokens=tokens)


def normalize_skill(name: str) -> str:
    """Skill names are matched case-insensitively after trimming."""
    return name.strip().lower()


@dataclass
class SkillVocab:
    """Skill name <-> explicit-space dimension index, with corpus counts."""

    id_of: dict[str, int]
    names: list[str]
    counts: list[int] = field(default_factory=list)

    @property
    def size(self) -> int:
        return len(self.names)

    def lookup(self, name: str):
        """Dimension index for a skill name, or None if not in the vocabulary."""
        return self.id_of.get(normalize_skill(name))


def build_skill_vocab(profiles, min_count: int = 1) -> SkillVocab:
    """Build the skill vocabulary from an iterable of per-profile skill lists.

    Skills occurring >= min_count times are kept; dimension indices are
    assigned by descending frequency with lexicographic tie-breaking.
    """
    if min_count < 1:
        raise ValueError(f"min_count must be >= 1, got {min_count}")
    counts = Counter()
    for skills in profiles:
        counts.update(normalize_skill(s) for s in skills)
    ranked = _ranked(counts, min_count)
    if not ranked:
        raise EmptyVocabularyError(f"no skill reached min_count={min_count}")
    names = [s for s, _ in ranked]
    return SkillVocab(
        id_of={s: i for i, s in enumerate(names)},
        names=names,
        counts=[n for _, n in ranked],
    )


def encode_tokens(vocab: WordVocab, tokens, max_len: int = 256) -> np.ndarray:
    """Map tokens to ids, sending OOV to the unknown id and truncating.

    Empty input yields a single unknown id so the encoder always has at
    least one step.
    """
    if max_len < 1:
        raise ValueError(f"max_len must be >= 1, got {max_len}")
    ids = [vocab.lookup(t) for t in tokens[:max_len]]
    if not ids:
        ids = [UNK_ID]
    return np.asarray(ids, dtype=np.int64)


def load_embeddings(path, vocab: WordVocab, d_emb: int, rng: SeededRng):
    """Load pretrained word vectors for a vocabulary from a text file.

    File format: a "<count> <dim>" header line, then one
    "<word> <f1> ... <fdim>" line per word. Vocabulary words found in the
    file get their stored vectors (first occurrence wins); everything else,
    including the unknown token, is initialized uniform in [-0.05, 0.05].

    Returns (matrix of shape (vocab.size, d_emb), coverage count).
    """
    if d_emb < 1:
        raise ValueError(f"d_emb must be >= 1, got {d_emb}")
    rows = {}
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        if header == "":
            declared = 0
        else:
            parts = header.split()
            if len(parts) != 2:
                raise ParseError(f"expected '<count> <dim>' header, got {header!r}", line=1)
            try:
                declared, file_dim = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError(f"non-integer header fields in {header!r}", line=1) from None
            if file_dim != d_emb:
                raise ParseError(f"file dimension {file_dim} != requested d_emb {d_emb}", line=1)
        n_lines = 0
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            n_lines += 1
            parts = line.split()
            if len(parts) != d_emb + 1:
                raise ParseError(
                    f"expected 1 word + {d_emb} values, got {len(parts)} fields", line=lineno
                )
            word = parts[0]
            try:
                vec = np.array([float(x) for x in parts[1:]], dtype=np.float64)
            except ValueError:
                raise ParseError(f"non-numeric embedding value for {word!r}", line=lineno) from None
            if word not in rows:
                rows[word] = vec
        if n_lines != declared:
            raise ParseError(f"header declares {declared} vectors but file has {n_lines}")

    matrix = np.empty((vocab.size, d_emb), dtype=np.float64)
    coverage = 0
    # Fixed iteration order (vocab index) keeps the random fallback deterministic.
    for idx, token in enumerate(vocab.tokens):
        if idx != UNK_ID and token in rows:
            matrix[idx] = rows[token]
            coverage += 1
        else:
            matrix[idx] = rng.uniform(-0.05, 0.05, d_emb)
    return matrix, coverage


def write_embeddings(path, words, matrix) -> None:
    """Write vectors in the textual embedding format understood by load_embeddings."""
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != len(words):
        raise DimensionError(
            f"matrix shape {matrix.shape} does not match {len(words)} words"
        )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(words)} {matrix.shape[1]}\n")
        for word, row in zip(words, matrix):
            fh.write(word + " " + " ".join(repr(float(x)) for x in row) + "\n")


def save_skill_vocab(path, vocab: SkillVocab) -> None:
    """One "<skill>\\t<count>" line per dimension, in index order."""
    counts = vocab.counts if vocab.counts else [0] * vocab.size
    with open(path, "w", encoding="utf-8") as fh:
        for name, count in zip(vocab.names, counts):
            fh.write(f"{name}\t{count}\n")


def load_skill_vocab(path) -> SkillVocab:
    names, counts = [], []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 2:
                raise ParseError("expected '<skill>\\t<count>'", line=lineno)
            try:
                count = int(parts[1])
            except ValueError:
                raise ParseError(f"non-integer count {parts[1]!r}", line=lineno) from None
            names.append(parts[0])
            counts.append(count)
    if not names:
        raise EmptyVocabularyError(f"no skills in {path}")
    return SkillVocab(id_of={s: i for i, s in enumerate(names)}, names=names, counts=counts)
