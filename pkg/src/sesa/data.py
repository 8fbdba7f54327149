"""Labeled-pair dataset records, JSONL file IO, and encoding against vocabularies.

Dataset file format: one JSON object per line with exactly the fields
job_text (string), profile_skills (list of skill names), label (0 or 1).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ParseError
from .model import Example
from .text import SkillVocab, WordVocab, encode_tokens, tokenize

DATASET_FIELDS = {"job_text", "profile_skills", "label"}


@dataclass
class LabeledPair:
    """One raw job-profile pair before any vocabulary encoding."""

    job_text: str
    profile_skills: list[str]
    label: int


def write_dataset(path, pairs) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(
                json.dumps(
                    {
                        "job_text": pair.job_text,
                        "profile_skills": list(pair.profile_skills),
                        "label": int(pair.label),
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )


def read_dataset(path) -> list[LabeledPair]:
    """Parse a dataset file, aborting with the line number on any malformed record."""
    pairs = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON ({exc.msg})", line=lineno) from None
            if not isinstance(record, dict) or set(record) != DATASET_FIELDS:
                raise ParseError(
                    f"expected exactly the fields {sorted(DATASET_FIELDS)}", line=lineno
                )
            job_text = record["job_text"]
            skills = record["profile_skills"]
            label = record["label"]
            if not isinstance(job_text, str):
                raise ParseError("job_text must be a string", line=lineno)
            if not isinstance(skills, list) or not all(isinstance(s, str) for s in skills):
                raise ParseError("profile_skills must be a list of strings", line=lineno)
            if label not in (0, 1):
                raise ParseError(f"label must be 0 or 1, got {label!r}", line=lineno)
            pairs.append(LabeledPair(job_text, skills, int(label)))
    return pairs


def encode_pairs(
    pairs,
    word_vocab: WordVocab,
    skill_vocab: SkillVocab,
    max_seq_len: int = 256,
):
    """Encode raw pairs against the vocabularies.

    Profile skills missing from the skill vocabulary are dropped; the
    second return value counts how many were dropped in total.
    """
    examples = []
    dropped = 0
    for pair in pairs:
        ids = encode_tokens(word_vocab, tokenize(pair.job_text), max_seq_len)
        skill_ids = []
        for name in pair.profile_skills:
            idx = skill_vocab.lookup(name)
            if idx is None:
                dropped += 1
            else:
                skill_ids.append(idx)
        skill_ids = np.array(sorted(set(skill_ids)), dtype=np.int64)
        examples.append(Example(job_ids=ids, skill_ids=skill_ids, label=int(pair.label)))
    return examples, dropped
