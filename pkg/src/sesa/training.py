"""Training: squared-error objective, backpropagation through time, SGD.

The loop follows an evaluation-based early-stopping protocol: the model is
scored on the validation set every `eval_every` minibatch iterations, an
improvement must beat the best AUC seen so far by more than 1e-6, and the
run halts after `patience` consecutive non-improving evaluations (or at
`max_iters`), returning the best snapshot.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, fields

import numpy as np

from .errors import ConsistencyError, DimensionError, NumericError, UndefinedMetricError
from .linalg import SeededRng
from .metrics import roc_auc
from .model import (
    SCORE_MODES,
    Dims,
    Example,
    ForwardCache,
    ModelParams,
    check_cache,
    forward_batch,
    init_params,
    profile_matrix,
)


@dataclass
class TrainConfig:
    """Run configuration. Defaults reflect the reference setup; anything
    unstated there (learning rate, clipping, sequence cap) is configurable
    with the documented defaults below."""

    emb_dim: int = 200
    hidden: int = 100
    learning_rate: float = 0.05
    l2_rate: float = 1e-7
    batch_size: int = 1000
    eval_every: int = 500
    patience: int = 20
    max_iters: int = 20000
    seed: int = 42
    score_mode: str = "dot"
    clip_norm: float = 5.0
    max_seq_len: int = 256
    freeze_embeddings: bool = False
    neg_subsample: float = 1.0
    word_min_count: int = 1
    skill_min_count: int = 1

    def validate(self) -> None:
        positive = (
            "emb_dim",
            "hidden",
            "learning_rate",
            "batch_size",
            "eval_every",
            "patience",
            "max_iters",
            "clip_norm",
            "max_seq_len",
            "word_min_count",
            "skill_min_count",
        )
        for name in positive:
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if not (np.isfinite(self.l2_rate) and self.l2_rate >= 0):
            raise ValueError(f"l2_rate must be finite and >= 0, got {self.l2_rate}")
        if not 0.0 < self.neg_subsample <= 1.0:
            raise ValueError(f"neg_subsample must be in (0, 1], got {self.neg_subsample}")
        if self.score_mode not in SCORE_MODES:
            raise ValueError(f"score_mode must be one of {SCORE_MODES}, got {self.score_mode!r}")

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


class Gradients:
    """Gradient blocks, shape-matched to ModelParams."""

    __slots__ = ("emb", "w_in", "u_rec", "b", "proj")

    def __init__(self, emb, w_in, u_rec, b, proj):
        self.emb = emb
        self.w_in = w_in
        self.u_rec = u_rec
        self.b = b
        self.proj = proj

    @classmethod
    def zeros_like(cls, params: ModelParams) -> "Gradients":
        return cls(*(np.zeros_like(arr) for _, arr in params.arrays()))

    def arrays(self):
        return (
            ("emb", self.emb),
            ("w_in", self.w_in),
            ("u_rec", self.u_rec),
            ("b", self.b),
            ("proj", self.proj),
        )

    def add_(self, other: "Gradients") -> None:
        for (_, mine), (_, theirs) in zip(self.arrays(), other.arrays()):
            mine += theirs

    def scale_(self, factor: float) -> None:
        for _, arr in self.arrays():
            arr *= factor

    def global_norm(self) -> float:
        total = 0.0
        for _, arr in self.arrays():
            total += float(np.sum(arr * arr))
        return float(np.sqrt(total))


def mse_loss(scores, labels) -> float:
    """Mean of (score - label)^2 over a non-empty batch of binary labels."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if scores.shape != labels.shape or scores.ndim != 1 or scores.size == 0:
        raise DimensionError(
            f"scores and labels must be equal-length non-empty 1-D, got {scores.shape} and {labels.shape}"
        )
    if not np.all((labels == 0.0) | (labels == 1.0)):
        raise ValueError("labels must be binary (0 or 1)")
    diff = scores - labels
    return float(np.mean(diff * diff))


def l2_penalty(params: ModelParams, l2_rate: float, freeze_embeddings: bool = False) -> float:
    """lambda * sum of squared weights over the LSTM blocks, the projection,
    and (unless frozen) the embeddings. Biases are excluded."""
    if l2_rate < 0:
        raise ValueError(f"l2_rate must be >= 0, got {l2_rate}")
    total = float(np.sum(params.w_in**2) + np.sum(params.u_rec**2) + np.sum(params.proj**2))
    if not freeze_embeddings:
        total += float(np.sum(params.emb**2))
    return l2_rate * total


def _explicit_grad(explicit, profiles, scores, labels, mode):
    """d(loss)/d(explicit) per example, for loss = (score - label)^2."""
    dscore = 2.0 * (scores - labels)  # (B,)
    if mode == "dot":
        return dscore[:, None] * profiles
    if mode == "cosine":
        job_norm = np.linalg.norm(explicit, axis=1, keepdims=True)
        prof_norm = np.linalg.norm(profiles, axis=1, keepdims=True)
        unit_prof = profiles / (job_norm * prof_norm)
        return dscore[:, None] * (unit_prof - scores[:, None] * explicit / job_norm**2)
    raise ValueError(f"unknown score mode {mode!r}")


def backward_batch(
    params: ModelParams,
    cache: ForwardCache,
    profiles: np.ndarray,
    scores: np.ndarray,
    labels: np.ndarray,
    mode: str = "dot",
    freeze_embeddings: bool = False,
) -> Gradients:
    """Reverse pass for a batch of equal-length sequences.

    Returns the SUM over the batch of per-example gradients of
    (score - label)^2; divide by the batch size for the mean-loss gradient.
    """
    check_cache(params, cache)
    n_steps, batch, h = cache.hidden.shape
    if profiles.shape[0] != batch:
        raise ConsistencyError(f"profiles batch {profiles.shape[0]} != cache batch {batch}")

    latent = cache.hidden.mean(axis=0)  # (B, h)
    explicit = latent @ params.proj.T  # (B, n)

    d_explicit = _explicit_grad(explicit, profiles, np.asarray(scores), np.asarray(labels), mode)
    d_proj = d_explicit.T @ latent  # (n, h)
    d_latent = d_explicit @ params.proj  # (B, h)
    dh_pool = d_latent / n_steps  # mean pooling spreads the gradient evenly

    d_w = np.zeros_like(params.w_in)
    d_u = np.zeros_like(params.u_rec)
    d_b = np.zeros_like(params.b)
    d_x = None if freeze_embeddings else np.empty_like(cache.x)  # (B, T, d)

    dh_next = np.zeros((batch, h))
    dc_next = np.zeros((batch, h))
    d_pre = np.empty((batch, 4 * h))
    for t in range(n_steps - 1, -1, -1):
        gi, gf, go, gc = cache.gate_i[t], cache.gate_f[t], cache.gate_o[t], cache.gate_c[t]
        tc = cache.tanh_cell[t]
        dh = dh_pool + dh_next
        dc = dc_next + dh * go * (1.0 - tc * tc)
        c_prev = cache.cell[t - 1] if t > 0 else 0.0
        d_pre[:, :h] = (dc * gc) * gi * (1.0 - gi)  # input gate
        d_pre[:, h : 2 * h] = (dc * c_prev) * gf * (1.0 - gf)  # forget gate
        d_pre[:, 2 * h : 3 * h] = (dh * tc) * go * (1.0 - go)  # output gate
        d_pre[:, 3 * h :] = (dc * gi) * (1.0 - gc * gc)  # candidate
        d_w += d_pre.T @ cache.x[:, t, :]
        h_prev = cache.hidden[t - 1] if t > 0 else np.zeros((batch, h))
        d_u += d_pre.T @ h_prev
        d_b += d_pre.sum(axis=0)
        if d_x is not None:
            d_x[:, t, :] = d_pre @ params.w_in
        dh_next = d_pre @ params.u_rec
        dc_next = dc * gf

    d_emb = np.zeros_like(params.emb)
    if d_x is not None:
        np.add.at(d_emb, cache.ids.ravel(), d_x.reshape(batch * n_steps, -1))

    return Gradients(d_emb, d_w, d_u, d_b, d_proj)


def backward(
    params: ModelParams,
    example: Example,
    cache: ForwardCache,
    score: float,
    label: float,
    mode: str = "dot",
    freeze_embeddings: bool = False,
) -> Gradients:
    """Exact gradients of (score - label)^2 for a single example."""
    if cache.batch_size != 1:
        raise ConsistencyError("backward expects a single-example cache; use backward_batch")
    profiles = profile_matrix([example], params.dims.n_skills)
    return backward_batch(
        params,
        cache,
        profiles,
        np.array([score]),
        np.array([label], dtype=np.float64),
        mode,
        freeze_embeddings,
    )


def sgd_step(params: ModelParams, grads: Gradients, config: TrainConfig) -> ModelParams:
    """One SGD update in place: clip the global gradient norm, then
    w <- w - lr * (g + 2*lambda*w) for weights and w <- w - lr * g for
    biases. Frozen embeddings are untouched."""
    gnorm = grads.global_norm()
    if not np.isfinite(gnorm):
        raise NumericError(f"non-finite gradient norm {gnorm}")
    scale = 1.0 if gnorm <= config.clip_norm else config.clip_norm / gnorm
    lr = config.learning_rate
    lam = config.l2_rate
    for name, garr in grads.arrays():
        if name == "emb" and config.freeze_embeddings:
            continue
        g = garr if scale == 1.0 else garr * scale
        if not np.all(np.isfinite(g)):
            raise NumericError(f"non-finite entries in gradient block {name!r} after clipping")
        parr = getattr(params, name)
        if name == "b":
            parr -= lr * g
        else:
            parr -= lr * (g + 2.0 * lam * parr)
    return params


@dataclass
class EvalRecord:
    iteration: int
    train_mse: float
    valid_auc: float
    timestamp: float = 0.0


@dataclass
class TrainHistory:
    """One record per validation evaluation, iterations strictly increasing."""

    records: list[EvalRecord] = field(default_factory=list)

    def append(self, record: EvalRecord) -> None:
        if self.records and record.iteration <= self.records[-1].iteration:
            raise ValueError("history iterations must be strictly increasing")
        self.records.append(record)

    def __len__(self) -> int:
        return len(self.records)


class EarlyStopping:
    """Best-snapshot tracker.

    The first evaluation establishes the baseline snapshot; every later
    evaluation either improves the best metric by more than `min_delta`
    (resetting the counter) or increments it. `update` returns True when
    `patience` consecutive evaluations have failed to improve.
    """

    def __init__(self, patience: int, min_delta: float = 1e-6):
        if patience < 1:
            raise ValueError(f"patience must be >= 1, got {patience}")
        self.patience = patience
        self.min_delta = min_delta
        self.best_metric = None
        self.best_params = None
        self.best_iteration = None
        self.evals_since_improvement = 0

    def update(self, metric: float, params: ModelParams, iteration: int) -> bool:
        if self.best_metric is None or metric > self.best_metric + self.min_delta:
            self.best_metric = metric
            self.best_params = params.copy()
            self.best_iteration = iteration
            self.evals_since_improvement = 0
        else:
            self.evals_since_improvement += 1
        return self.evals_since_improvement >= self.patience


def _group_by_length(examples):
    """Indices of `examples` grouped by sequence length (stable order)."""
    lengths = np.array([len(ex.job_ids) for ex in examples])
    order = np.argsort(lengths, kind="stable")
    groups = []
    start = 0
    while start < len(order):
        end = start
        length = lengths[order[start]]
        while end < len(order) and lengths[order[end]] == length:
            end += 1
        groups.append(order[start:end])
        start = end
    return groups


def score_examples(params: ModelParams, examples, mode: str = "dot", chunk: int = 512) -> np.ndarray:
    """Score a list of examples, batching same-length sequences together."""
    scores = np.empty(len(examples))
    for group in _group_by_length(examples):
        for lo in range(0, len(group), chunk):
            idx = group[lo : lo + chunk]
            ids = np.stack([examples[i].job_ids for i in idx])
            profiles = profile_matrix([examples[i] for i in idx], params.dims.n_skills)
            scores[idx], _, _, _ = forward_batch(params, ids, profiles, mode)
    return scores


def _train_minibatch(params, batch, config):
    """Forward + backward + update for one minibatch; returns its MSE."""
    labels = np.array([ex.label for ex in batch], dtype=np.float64)
    scores = np.empty(len(batch))
    total = Gradients.zeros_like(params)
    for group in _group_by_length(batch):
        ids = np.stack([batch[i].job_ids for i in group])
        profiles = profile_matrix([batch[i] for i in group], params.dims.n_skills)
        group_scores, _, _, cache = forward_batch(params, ids, profiles, config.score_mode)
        scores[group] = group_scores
        grads = backward_batch(
            params,
            cache,
            profiles,
            group_scores,
            labels[group],
            config.score_mode,
            config.freeze_embeddings,
        )
        total.add_(grads)
    total.scale_(1.0 / len(batch))
    sgd_step(params, total, config)
    return mse_loss(scores, labels)


def train(
    config: TrainConfig,
    train_set,
    valid_set,
    *,
    n_skills: int,
    vocab_size: int,
    pretrained=None,
    validation_metric=None,
):
    """Minibatch SGD with periodic validation and early stopping.

    Shuffles the training data each epoch with the run's seeded RNG and
    applies per-epoch negative subsampling when configured. Every
    `eval_every` iterations the model is evaluated on the validation set
    (AUC by default; `validation_metric(params)` when injected) and the
    best snapshot is tracked. Returns (best params, TrainHistory).
    """
    config.validate()
    if not train_set:
        raise ValueError("training set is empty")
    if validation_metric is None:
        valid_labels = np.array([ex.label for ex in valid_set], dtype=np.float64)
        if valid_labels.size == 0 or valid_labels.min() == valid_labels.max():
            raise UndefinedMetricError(
                "validation set needs at least one positive and one negative example"
            )

        def validation_metric(p):
            return roc_auc(score_examples(p, valid_set, config.score_mode), valid_labels)

    rng = SeededRng(config.seed)
    dims = Dims(config.emb_dim, config.hidden, n_skills, vocab_size)
    params = init_params(dims, rng, pretrained)

    stopper = EarlyStopping(config.patience)
    history = TrainHistory()
    labels = np.array([ex.label for ex in train_set], dtype=np.float64)
    iteration = 0
    window = []
    done = False
    while not done:
        keep = np.arange(len(train_set))
        if config.neg_subsample < 1.0:
            drop = (labels == 0.0) & (rng.random(len(train_set)) >= config.neg_subsample)
            keep = keep[~drop]
        order = keep[rng.permutation(len(keep))]
        for lo in range(0, len(order), config.batch_size):
            batch = [train_set[i] for i in order[lo : lo + config.batch_size]]
            iteration += 1
            window.append(_train_minibatch(params, batch, config))
            if iteration % config.eval_every == 0:
                metric = float(validation_metric(params))
                history.append(EvalRecord(iteration, float(np.mean(window)), metric, time.time()))
                window = []
                if stopper.update(metric, params, iteration):
                    done = True
                    break
            if iteration >= config.max_iters:
                done = True
                break
    best = stopper.best_params if stopper.best_params is not None else params.copy()
    return best, history


def example_loss(params: ModelParams, example: Example, mode: str = "dot") -> float:
    """Squared error of one example's score against its label."""
    from .model import forward

    s, _, _ = forward(params, example.job_ids, example.skill_ids, mode)
    return (s - float(example.label)) ** 2


def grad_check(params: ModelParams, example: Example, eps: float = 1e-5, mode: str = "dot") -> float:
    """Compare analytic gradients to central finite differences.

    For every parameter entry theta the relative error is
    |a - f| / max(|a|, |f|, 1e-8) where a is the backpropagated gradient
    and f = (L(theta+eps) - L(theta-eps)) / (2*eps). Returns the maximum
    over all entries.
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    from .model import forward

    s, _, cache = forward(params, example.job_ids, example.skill_ids, mode)
    grads = backward(params, example, cache, s, float(example.label), mode)
    worst = 0.0
    for (_, parr), (_, garr) in zip(params.arrays(), grads.arrays()):
        flat_p = parr.reshape(-1)
        flat_g = garr.reshape(-1)
        for k in range(flat_p.size):
            orig = flat_p[k]
            flat_p[k] = orig + eps
            up = example_loss(params, example, mode)
            flat_p[k] = orig - eps
            down = example_loss(params, example, mode)
            flat_p[k] = orig
            fd = (up - down) / (2.0 * eps)
            a = flat_g[k]
            err = abs(a - fd) / max(abs(a), abs(fd), 1e-8)
            if err > worst:
                worst = err
    return worst
