"""Seeded synthetic job-profile corpus with planted skill ground truth.

Each generated job carries a hidden set of "true" skills; its text mixes
keywords drawn from those skills' keyword pools with filler tokens. A
profile is a set of skills, and the clean label is 1 exactly when the
profile covers at least `overlap_threshold` of the job's true skills; a
small label-noise rate then demotes some of those positives to 0 (matches
who never applied). Because labels derive from skill
overlap, the explicit skill space is the true generative factor and
tagging quality can be measured against the planted skills.

Every skill's keyword pool also contains the skill's three-digit index as
a literal token (e.g. "007" for skill_007), so job texts share tokens with
skill-name pseudo-documents and plain text-similarity features carry
signal on this corpus too.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .data import LabeledPair, write_dataset
from .linalg import SeededRng
from .text import write_embeddings

_CONSONANTS = "bcdfghjklmnpqrstvwz"
_VOWELS = "aeiou"


@dataclass
class GenConfig:
    seed: int = 7
    n_skills: int = 50
    kw_per_skill: int = 8
    noise_vocab_size: int = 500
    skills_per_job: int = 3
    skills_per_profile: int = 6
    tokens_per_job: int = 60
    keyword_fraction: float = 0.4
    pos_rate: float = 0.10
    overlap_threshold: int = 2
    label_noise: float = 0.05
    n_examples: int = 10000
    train_frac: float = 0.65
    valid_frac: float = 0.05
    test_frac: float = 0.30

    def validate(self) -> None:
        counts = (
            "n_skills",
            "kw_per_skill",
            "noise_vocab_size",
            "skills_per_job",
            "skills_per_profile",
            "tokens_per_job",
            "overlap_threshold",
            "n_examples",
        )
        for name in counts:
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("keyword_fraction", "pos_rate", "label_noise"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {getattr(self, name)}")
        if self.overlap_threshold > min(self.skills_per_job, self.skills_per_profile):
            raise ValueError("overlap_threshold exceeds the smaller of job/profile skill counts")
        if self.skills_per_job > self.n_skills or self.skills_per_profile > self.n_skills:
            raise ValueError("per-example skill counts exceed n_skills")
        if self.n_skills > 1000:
            raise ValueError("n_skills > 1000 would collide with 3-digit index keywords")
        total = self.train_frac + self.valid_frac + self.test_frac
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"split fractions must sum to 1, got {total}")

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass
class SkillLexicon:
    """Skill names, per-skill keyword pools (pairwise disjoint), filler vocabulary."""

    skills: list[str]
    keywords: list[list[str]]
    noise_vocab: list[str]

    def keyword_pool(self, skill_indices) -> list[str]:
        pool = []
        for idx in skill_indices:
            pool.extend(self.keywords[idx])
        return pool


@dataclass
class GroundTruth:
    """Per-example planted truth: the job's skill set and the pre-noise label."""

    true_skills: list[str]
    label_clean: int


def _syllable_token(rng: SeededRng, n_syllables: int = 3) -> str:
    cons = rng.integers(0, len(_CONSONANTS), n_syllables)
    vows = rng.integers(0, len(_VOWELS), n_syllables)
    return "".join(_CONSONANTS[c] + _VOWELS[v] for c, v in zip(cons, vows))


def _fresh_token(rng: SeededRng, seen: set) -> str:
    while True:
        token = _syllable_token(rng)
        if token not in seen:
            seen.add(token)
            return token


def gen_lexicon(rng: SeededRng, config: GenConfig) -> SkillLexicon:
    """Deterministic lexicon: skill names "skill_000"..., unique keyword pools.

    Each pool is the skill's 3-digit index token plus pronounceable
    syllable tokens; filler tokens are drawn from the same syllable space,
    disjoint from every keyword.
    """
    config.validate()
    seen = {f"{i:03d}" for i in range(config.n_skills)}
    skills = [f"skill_{i:03d}" for i in range(config.n_skills)]
    keywords = []
    for i in range(config.n_skills):
        pool = [f"{i:03d}"]
        pool.extend(_fresh_token(rng, seen) for _ in range(config.kw_per_skill - 1))
        keywords.append(pool)
    noise_vocab = [_fresh_token(rng, seen) for _ in range(config.noise_vocab_size)]
    return SkillLexicon(skills=skills, keywords=keywords, noise_vocab=noise_vocab)


def gen_example(rng: SeededRng, lexicon: SkillLexicon, config: GenConfig):
    """Generate one labeled pair plus its ground truth.

    The profile's overlap with the job's true skills is sampled so the
    pre-noise positive rate equals `pos_rate` in expectation; the label
    itself is always recomputed from the overlap rule, then flipped with
    probability `label_noise`.
    """
    n = config.n_skills
    true_idx = np.sort(rng.choice(n, size=config.skills_per_job))
    pool = lexicon.keyword_pool(true_idx)

    is_kw = rng.random(config.tokens_per_job) < config.keyword_fraction
    kw_picks = rng.integers(0, len(pool), config.tokens_per_job)
    noise_picks = rng.integers(0, len(lexicon.noise_vocab), config.tokens_per_job)
    tokens = [
        pool[kw_picks[t]] if is_kw[t] else lexicon.noise_vocab[noise_picks[t]]
        for t in range(config.tokens_per_job)
    ]

    want_positive = rng.random() < config.pos_rate
    if want_positive:
        overlap = int(rng.integers(config.overlap_threshold, config.skills_per_job + 1))
    else:
        overlap = int(rng.integers(0, config.overlap_threshold))
    from_true = true_idx[rng.choice(config.skills_per_job, size=overlap)] if overlap else []
    others = np.setdiff1d(np.arange(n), true_idx)
    n_rest = config.skills_per_profile - overlap
    from_rest = others[rng.choice(len(others), size=n_rest)] if n_rest else []
    profile_idx = np.sort(np.concatenate([np.asarray(from_true, dtype=np.int64),
                                          np.asarray(from_rest, dtype=np.int64)]))

    n_common = len(np.intersect1d(profile_idx, true_idx))
    label_clean = 1 if n_common >= config.overlap_threshold else 0
    # Noise demotes true positives only (a matching person who never applied);
    # promoting negatives would swamp the rare positive class. The draw is
    # unconditional so every example consumes the same number of draws.
    flip = bool(rng.random() < config.label_noise)
    label = 0 if (label_clean == 1 and flip) else label_clean

    pair = LabeledPair(
        job_text=" ".join(tokens),
        profile_skills=[lexicon.skills[i] for i in profile_idx],
        label=label,
    )
    truth = GroundTruth(true_skills=[lexicon.skills[i] for i in true_idx], label_clean=label_clean)
    return pair, truth


def split_sizes(n: int, config: GenConfig):
    n_train = round(n * config.train_frac)
    n_valid = round(n * config.valid_frac)
    return n_train, n_valid, n - n_train - n_valid


def gen_dataset(config: GenConfig, out_dir=None):
    """Generate the full corpus, split it, and optionally write all artifacts.

    Returns (splits dict with train/valid/test pair lists, ground-truth
    dict with per-split GroundTruth lists, lexicon). When `out_dir` is
    given, writes train/valid/test .jsonl files, ground_truth.jsonl,
    lexicon.json, and config.json (the resolved config including the seed);
    identical configs produce byte-identical directories.
    """
    config.validate()
    if config.n_examples < 100:
        raise ValueError(f"n_examples must be >= 100, got {config.n_examples}")
    rng = SeededRng(config.seed)
    lexicon = gen_lexicon(rng, config)
    pairs, truths = [], []
    for _ in range(config.n_examples):
        pair, truth = gen_example(rng, lexicon, config)
        pairs.append(pair)
        truths.append(truth)

    order = rng.permutation(config.n_examples)
    n_train, n_valid, n_test = split_sizes(config.n_examples, config)
    bounds = {
        "train": order[:n_train],
        "valid": order[n_train : n_train + n_valid],
        "test": order[n_train + n_valid :],
    }
    splits = {name: [pairs[i] for i in idx] for name, idx in bounds.items()}
    truth_splits = {name: [truths[i] for i in idx] for name, idx in bounds.items()}

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name in ("train", "valid", "test"):
            write_dataset(out / f"{name}.jsonl", splits[name])
        with open(out / "ground_truth.jsonl", "w", encoding="utf-8") as fh:
            for name in ("train", "valid", "test"):
                for index, truth in enumerate(truth_splits[name]):
                    fh.write(
                        json.dumps(
                            {
                                "split": name,
                                "index": index,
                                "true_skills": truth.true_skills,
                                "label_clean": truth.label_clean,
                            }
                        )
                        + "\n"
                    )
        with open(out / "lexicon.json", "w", encoding="utf-8") as fh:
            json.dump(
                {
                    "skills": lexicon.skills,
                    "keywords": lexicon.keywords,
                    "noise_vocab": lexicon.noise_vocab,
                },
                fh,
                indent=2,
            )
            fh.write("\n")
        with open(out / "config.json", "w", encoding="utf-8") as fh:
            json.dump(config.as_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    return splits, truth_splits, lexicon


def gen_aligned_embeddings(lexicon: SkillLexicon, d_emb: int, rng: SeededRng, path=None):
    """Embeddings aligned with the planted skills.

    Every skill gets a random unit anchor; each of its keywords is the
    anchor plus a small perturbation (0.1 times a random unit direction),
    rescaled to unit norm, so same-skill keywords stay tightly clustered
    at any embedding width. Filler words get independent random unit
    vectors. Returns (words, matrix) and writes the textual embedding file
    when `path` is given.
    """
    if d_emb < 8:
        raise ValueError(f"d_emb must be >= 8, got {d_emb}")

    def unit(vec):
        return vec / np.linalg.norm(vec)

    words, rows = [], []
    for idx in range(len(lexicon.skills)):
        anchor = unit(rng.normal(size=d_emb))
        for kw in lexicon.keywords[idx]:
            noisy = anchor + 0.1 * unit(rng.normal(size=d_emb))
            words.append(kw)
            rows.append(unit(noisy))
    for token in lexicon.noise_vocab:
        words.append(token)
        rows.append(unit(rng.normal(size=d_emb)))
    matrix = np.stack(rows)
    if path is not None:
        write_embeddings(path, words, matrix)
    return words, matrix
