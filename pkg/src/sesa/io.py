"""Model files, run-config files, evaluation reports, and run histories.

The model file is a self-describing JSON container: format version,
dims, both vocabularies, every parameter block, the resolved training
config with its digest, and the seed. Floats are serialized via Python's
shortest round-trip repr, so a save/load cycle reproduces scores bitwise.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import fields

import numpy as np

from .errors import ModelLoadError, ParseError
from .model import Dims, ModelParams
from .synth import GenConfig
from .text import SkillVocab, WordVocab
from .training import EvalRecord, TrainConfig, TrainHistory

MODEL_FORMAT_VERSION = 1

_GATES = ("i", "f", "o", "c")


def config_digest(config: dict) -> str:
    """Hex digest of the canonical JSON encoding of a config mapping."""
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def file_digest(path) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def save_model(path, params: ModelParams, word_vocab: WordVocab, skill_vocab: SkillVocab,
               config: dict, seed: int) -> None:
    """Write the model container; see load_model for the inverse."""
    h = params.dims.hidden
    blocks = {"emb": params.emb, "proj": params.proj}
    for k, gate in enumerate(_GATES):
        blocks[f"w_{gate}"] = params.w_in[k * h : (k + 1) * h]
        blocks[f"u_{gate}"] = params.u_rec[k * h : (k + 1) * h]
        blocks[f"b_{gate}"] = params.b[k * h : (k + 1) * h]
    payload = {
        "format_version": MODEL_FORMAT_VERSION,
        "dims": {
            "emb_dim": params.dims.emb_dim,
            "hidden": params.dims.hidden,
            "n_skills": params.dims.n_skills,
            "vocab_size": params.dims.vocab_size,
        },
        "word_vocab": word_vocab.tokens,
        "skill_vocab": {
            "names": skill_vocab.names,
            "counts": skill_vocab.counts if skill_vocab.counts else [0] * skill_vocab.size,
        },
        "params": {name: arr.tolist() for name, arr in blocks.items()},
        "config": config,
        "config_digest": config_digest(config),
        "seed": int(seed),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def _require(payload: dict, key: str):
    if key not in payload:
        raise ModelLoadError(f"model file is missing field {key!r}")
    return payload[key]


def load_model(path):
    """Read a model container back.

    Returns (params, word_vocab, skill_vocab, meta) where meta holds the
    config, digests, and seed. Any corruption, version mismatch, or shape
    inconsistency raises ModelLoadError naming the offending field.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ModelLoadError(f"model file is not valid JSON: {exc.msg}") from None
    if not isinstance(payload, dict):
        raise ModelLoadError("model file must contain a JSON object")

    version = _require(payload, "format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ModelLoadError(
            f"format_version {version!r} is not supported (expected {MODEL_FORMAT_VERSION})"
        )
    dims_raw = _require(payload, "dims")
    try:
        dims = Dims(
            emb_dim=int(dims_raw["emb_dim"]),
            hidden=int(dims_raw["hidden"]),
            n_skills=int(dims_raw["n_skills"]),
            vocab_size=int(dims_raw["vocab_size"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelLoadError(f"dims: {exc}") from None

    tokens = _require(payload, "word_vocab")
    if not isinstance(tokens, list) or len(tokens) != dims.vocab_size:
        raise ModelLoadError("word_vocab: length does not match dims.vocab_size")
    word_vocab = WordVocab(id_of={t: i for i, t in enumerate(tokens)}, tokens=list(tokens))

    sv = _require(payload, "skill_vocab")
    try:
        names, counts = list(sv["names"]), [int(c) for c in sv["counts"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelLoadError(f"skill_vocab: {exc}") from None
    if len(names) != dims.n_skills or len(counts) != dims.n_skills:
        raise ModelLoadError("skill_vocab: length does not match dims.n_skills")
    skill_vocab = SkillVocab(id_of={s: i for i, s in enumerate(names)}, names=names, counts=counts)

    raw = _require(payload, "params")
    h, d = dims.hidden, dims.emb_dim
    expected_block = {"w": (h, d), "u": (h, h), "b": (h,)}

    def block(name, shape):
        if name not in raw:
            raise ModelLoadError(f"params.{name} is missing")
        arr = np.asarray(raw[name], dtype=np.float64)
        if arr.shape != shape:
            raise ModelLoadError(f"params.{name} has shape {arr.shape}, expected {shape}")
        if not np.all(np.isfinite(arr)):
            raise ModelLoadError(f"params.{name} contains non-finite values")
        return arr

    emb = block("emb", (dims.vocab_size, d))
    proj = block("proj", (dims.n_skills, h))
    w_in = np.concatenate([block(f"w_{g}", expected_block["w"]) for g in _GATES])
    u_rec = np.concatenate([block(f"u_{g}", expected_block["u"]) for g in _GATES])
    b = np.concatenate([block(f"b_{g}", expected_block["b"]) for g in _GATES])
    params = ModelParams(dims, emb, w_in, u_rec, b, proj)

    meta = {
        "config": _require(payload, "config"),
        "config_digest": _require(payload, "config_digest"),
        "seed": _require(payload, "seed"),
    }
    return params, word_vocab, skill_vocab, meta


_RUN_CONFIG_FIELDS = None


def run_config_schema() -> dict:
    """Union of training and generator fields with their defaults."""
    global _RUN_CONFIG_FIELDS
    if _RUN_CONFIG_FIELDS is None:
        schema = {}
        for f in fields(GenConfig):
            schema[f.name] = f.default
        for f in fields(TrainConfig):
            schema[f.name] = f.default  # shared keys (seed) take the training default
        _RUN_CONFIG_FIELDS = schema
    return dict(_RUN_CONFIG_FIELDS)


def load_run_config(path) -> dict:
    """Read a JSON run-config file: unknown keys are rejected, missing keys
    take the documented defaults."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON in config file: {exc.msg}", line=exc.lineno) from None
    if not isinstance(raw, dict):
        raise ParseError("config file must contain a JSON object")
    schema = run_config_schema()
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ParseError(f"unknown config keys: {', '.join(unknown)}")
    schema.update(raw)
    return schema


def train_config_from(mapping: dict) -> TrainConfig:
    names = {f.name for f in fields(TrainConfig)}
    return TrainConfig(**{k: v for k, v in mapping.items() if k in names})


def gen_config_from(mapping: dict) -> GenConfig:
    names = {f.name for f in fields(GenConfig)}
    return GenConfig(**{k: v for k, v in mapping.items() if k in names})


def write_report(path, metrics, config_digest_hex: str, model_digest_hex: str) -> None:
    """Evaluation report: metric fields plus config and model digests."""
    payload = dict(metrics.as_dict())
    payload["config_digest"] = config_digest_hex
    payload["model_digest"] = model_digest_hex
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_history(path, history: TrainHistory) -> None:
    """Run history: one JSON record per evaluation."""
    with open(path, "w", encoding="utf-8") as fh:
        for rec in history.records:
            fh.write(
                json.dumps(
                    {
                        "iteration": rec.iteration,
                        "train_mse": rec.train_mse,
                        "valid_auc": rec.valid_auc,
                        "timestamp": rec.timestamp,
                    }
                )
                + "\n"
            )


def read_history(path) -> TrainHistory:
    history = TrainHistory()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                history.append(
                    EvalRecord(
                        iteration=int(rec["iteration"]),
                        train_mse=float(rec["train_mse"]),
                        valid_auc=float(rec["valid_auc"]),
                        timestamp=float(rec["timestamp"]),
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ParseError(f"bad history record: {exc}", line=lineno) from None
    return history
