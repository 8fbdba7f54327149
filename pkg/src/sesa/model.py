"""Forward path of the ranker.

A job description is a token-id sequence; the model embeds it, runs an
LSTM over the steps, mean-pools the per-step outputs into a latent vector,
and applies a linear projection into the explicit skill space, where every
dimension is one skill from the skill vocabulary. A profile enters that
space directly as a binary indicator over its skills, and relevance is the
dot product (or cosine) of the two explicit vectors.

Gate layout: the four LSTM gates are stored stacked along the first axis
in the order (input, forget, output, candidate), so `w_in` is (4h, d_emb),
`u_rec` is (4h, h) and `b` is (4h,). Per-gate views (`w_i`, `u_f`, ...)
slice into the stacked arrays.

The batched kernel `lstm_forward_batch` requires all sequences in a call
to have equal length; callers group variable-length inputs by length.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConsistencyError, DegenerateInputError, DimensionError
from .linalg import SeededRng, cosine, dot, matvec

SCORE_MODES = ("dot", "cosine")


@dataclass(frozen=True)
class Dims:
    """Model sizes: embedding width, LSTM units, skill count, vocabulary size."""

    emb_dim: int
    hidden: int
    n_skills: int
    vocab_size: int

    def validate(self) -> None:
        for name, value in vars(self).items():
            if int(value) < 1:
                raise DimensionError(f"dims.{name} must be positive, got {value}")


@dataclass
class Example:
    """One labeled job-profile pair, already encoded against the vocabularies."""

    job_ids: np.ndarray
    skill_ids: np.ndarray
    label: int


def _gate_slices(hidden):
    return {
        "i": slice(0, hidden),
        "f": slice(hidden, 2 * hidden),
        "o": slice(2 * hidden, 3 * hidden),
        "c": slice(3 * hidden, 4 * hidden),
    }


class ModelParams:
    """Everything trained: embeddings, LSTM gate blocks, and the projection.

    `proj` has shape (n_skills, hidden); row j is skill j's embedding in
    the latent space, and the explicit representation of a job is
    proj @ latent.
    """

    def __init__(self, dims: Dims, emb, w_in, u_rec, b, proj):
        dims.validate()
        self.dims = dims
        self.emb = np.asarray(emb, dtype=np.float64)
        self.w_in = np.asarray(w_in, dtype=np.float64)
        self.u_rec = np.asarray(u_rec, dtype=np.float64)
        self.b = np.asarray(b, dtype=np.float64)
        self.proj = np.asarray(proj, dtype=np.float64)
        h, d = dims.hidden, dims.emb_dim
        expected = {
            "emb": (dims.vocab_size, d),
            "w_in": (4 * h, d),
            "u_rec": (4 * h, h),
            "b": (4 * h,),
            "proj": (dims.n_skills, h),
        }
        for name, shape in expected.items():
            actual = getattr(self, name).shape
            if actual != shape:
                raise DimensionError(f"params.{name} has shape {actual}, expected {shape}")

    def __getattr__(self, name):
        # Per-gate views like w_i / u_f / b_o slice the stacked arrays.
        if len(name) == 3 and name[1] == "_" and name[0] in "wub" and name[2] in "ifoc":
            sl = _gate_slices(self.dims.hidden)[name[2]]
            base = {"w": "w_in", "u": "u_rec", "b": "b"}[name[0]]
            return getattr(self, base)[sl]
        raise AttributeError(name)

    def copy(self) -> "ModelParams":
        return ModelParams(
            self.dims,
            self.emb.copy(),
            self.w_in.copy(),
            self.u_rec.copy(),
            self.b.copy(),
            self.proj.copy(),
        )

    def arrays(self):
        """Parameter arrays in a fixed order (used by updates and checks)."""
        return (
            ("emb", self.emb),
            ("w_in", self.w_in),
            ("u_rec", self.u_rec),
            ("b", self.b),
            ("proj", self.proj),
        )


def init_params(dims: Dims, rng: SeededRng, pretrained=None) -> ModelParams:
    """Initialize parameters.

    LSTM blocks and the projection use uniform draws in [-s, s] with
    s = sqrt(6 / (fan_in + fan_out)); biases start at zero except the
    forget gate, which starts at 1.0 so early gradients flow through the
    cell state. Embeddings come from `pretrained` when given, otherwise
    uniform in [-0.05, 0.05].
    """
    dims.validate()
    d, h = dims.emb_dim, dims.hidden
    if pretrained is not None:
        pretrained = np.asarray(pretrained, dtype=np.float64)
        if pretrained.shape != (dims.vocab_size, d):
            raise DimensionError(
                f"pretrained embeddings have shape {pretrained.shape}, "
                f"expected {(dims.vocab_size, d)}"
            )
        emb = pretrained.copy()
    else:
        emb = rng.uniform(-0.05, 0.05, (dims.vocab_size, d))
    s_in = np.sqrt(6.0 / (d + h))
    s_rec = np.sqrt(6.0 / (h + h))
    s_proj = np.sqrt(6.0 / (h + dims.n_skills))
    w_in = rng.uniform(-s_in, s_in, (4 * h, d))
    u_rec = rng.uniform(-s_rec, s_rec, (4 * h, h))
    b = np.zeros(4 * h)
    b[h : 2 * h] = 1.0
    proj = rng.uniform(-s_proj, s_proj, (dims.n_skills, h))
    return ModelParams(dims, emb, w_in, u_rec, b, proj)


@dataclass
class ForwardCache:
    """Per-step activations saved by the forward pass for backpropagation.

    All arrays have shape (T, B, hidden) except `ids` (B, T) and `x` (B, T, emb_dim).
    """

    ids: np.ndarray
    x: np.ndarray
    gate_i: np.ndarray
    gate_f: np.ndarray
    gate_o: np.ndarray
    gate_c: np.ndarray
    cell: np.ndarray
    tanh_cell: np.ndarray
    hidden: np.ndarray

    @property
    def n_steps(self) -> int:
        return self.ids.shape[1]

    @property
    def batch_size(self) -> int:
        return self.ids.shape[0]


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


def lstm_forward_batch(params: ModelParams, ids: np.ndarray):
    """Run the LSTM over a (B, T) batch of equal-length id sequences.

    Returns (hidden states of shape (T, B, h), ForwardCache). Initial
    hidden and cell states are zero.
    """
    ids = np.asarray(ids, dtype=np.int64)
    if ids.ndim != 2 or ids.shape[1] == 0:
        raise DimensionError(f"ids must be a non-empty (B, T) matrix, got shape {ids.shape}")
    if ids.min() < 0 or ids.max() >= params.dims.vocab_size:
        raise DimensionError("token id out of range for the embedding table")
    batch, n_steps = ids.shape
    h = params.dims.hidden
    x = params.emb[ids]  # (B, T, d)
    pre_x = x @ params.w_in.T + params.b  # (B, T, 4h): input part hoisted out of the loop
    u_t = params.u_rec.T

    shape = (n_steps, batch, h)
    gi = np.empty(shape)
    gf = np.empty(shape)
    go = np.empty(shape)
    gc = np.empty(shape)
    cell = np.empty(shape)
    tanh_cell = np.empty(shape)
    hid = np.empty(shape)

    h_prev = np.zeros((batch, h))
    c_prev = np.zeros((batch, h))
    for t in range(n_steps):
        pre = pre_x[:, t, :] + h_prev @ u_t
        gi[t] = _sigmoid(pre[:, :h])
        gf[t] = _sigmoid(pre[:, h : 2 * h])
        go[t] = _sigmoid(pre[:, 2 * h : 3 * h])
        gc[t] = np.tanh(pre[:, 3 * h :])
        cell[t] = gf[t] * c_prev + gi[t] * gc[t]
        tanh_cell[t] = np.tanh(cell[t])
        hid[t] = go[t] * tanh_cell[t]
        h_prev = hid[t]
        c_prev = cell[t]

    cache = ForwardCache(ids, x, gi, gf, go, gc, cell, tanh_cell, hid)
    return hid, cache


def lstm_forward(params: ModelParams, ids):
    """Single-sequence LSTM pass: returns (list of per-step hidden vectors, cache)."""
    ids = np.asarray(ids, dtype=np.int64)
    if ids.ndim != 1 or ids.size == 0:
        raise DimensionError("ids must be a non-empty 1-D id sequence")
    hid, cache = lstm_forward_batch(params, ids[None, :])
    return [hid[t, 0] for t in range(ids.size)], cache


def mean_pool(states) -> np.ndarray:
    """Elementwise mean of the per-step hidden states."""
    if len(states) == 0:
        raise DimensionError("mean_pool requires at least one state")
    return np.mean(np.asarray(states, dtype=np.float64), axis=0)


def project(params: ModelParams, latent) -> np.ndarray:
    """Linear map from the latent space into the explicit skill space."""
    return matvec(params.proj, latent)


def encode_profile(skill_ids, n_skills: int) -> np.ndarray:
    """Binary indicator vector over the skill dimensions a profile possesses."""
    vec = np.zeros(n_skills)
    ids = np.asarray(skill_ids, dtype=np.int64)
    if ids.size:
        if ids.min() < 0 or ids.max() >= n_skills:
            raise IndexError(f"skill id out of range [0, {n_skills})")
        vec[ids] = 1.0
    return vec


def score(job_vec, profile_vec, mode: str = "dot") -> float:
    """Similarity of two explicit-space vectors.

    Dot mode permits a zero profile (score 0); cosine mode requires both
    operands to have positive norm.
    """
    if mode == "dot":
        return dot(job_vec, profile_vec)
    if mode == "cosine":
        return cosine(job_vec, profile_vec)
    raise ValueError(f"unknown score mode {mode!r}")


def forward(params: ModelParams, ids, skill_ids, mode: str = "dot"):
    """Full scoring pipeline for one pair.

    Returns (score, explicit job representation, forward cache); exactly
    the composition of lstm_forward, mean_pool, project, encode_profile
    and score.
    """
    states, cache = lstm_forward(params, ids)
    latent = mean_pool(states)
    explicit = project(params, latent)
    profile = encode_profile(skill_ids, params.dims.n_skills)
    return score(explicit, profile, mode), explicit, cache


def profile_matrix(examples, n_skills: int) -> np.ndarray:
    """Stack the indicator vectors of a batch of examples into (B, n_skills)."""
    q = np.zeros((len(examples), n_skills))
    for row, ex in enumerate(examples):
        ids = np.asarray(ex.skill_ids, dtype=np.int64)
        if ids.size:
            if ids.min() < 0 or ids.max() >= n_skills:
                raise IndexError(f"skill id out of range [0, {n_skills})")
            q[row, ids] = 1.0
    return q


def forward_batch(params: ModelParams, ids: np.ndarray, profiles: np.ndarray, mode: str = "dot"):
    """Score a batch of equal-length sequences against their profiles.

    `profiles` is the (B, n_skills) indicator matrix. Returns
    (scores (B,), latent (B, h), explicit (B, n_skills), cache).
    """
    hid, cache = lstm_forward_batch(params, ids)
    latent = hid.mean(axis=0)
    explicit = latent @ params.proj.T
    if mode == "dot":
        scores = np.einsum("bn,bn->b", explicit, profiles)
    elif mode == "cosine":
        job_norm = np.linalg.norm(explicit, axis=1)
        prof_norm = np.linalg.norm(profiles, axis=1)
        if np.any(job_norm == 0.0) or np.any(prof_norm == 0.0):
            raise DegenerateInputError("cosine scoring requires non-zero norms on both sides")
        scores = np.einsum("bn,bn->b", explicit, profiles) / (job_norm * prof_norm)
    else:
        raise ValueError(f"unknown score mode {mode!r}")
    return scores, latent, explicit, cache


def check_cache(params: ModelParams, cache: ForwardCache) -> None:
    """Verify a cache was produced by a model of the same shape."""
    h = params.dims.hidden
    if cache.hidden.shape[2] != h or cache.x.shape[2] != params.dims.emb_dim:
        raise ConsistencyError(
            f"cache shapes {cache.hidden.shape}/{cache.x.shape} do not match model dims {params.dims}"
        )
    if cache.ids.max() >= params.dims.vocab_size:
        raise ConsistencyError("cache token ids exceed the model vocabulary")
