import numpy as np
import pytest

from sesa.errors import DimensionError, NumericError, UndefinedMetricError
from sesa.linalg import SeededRng
from sesa.model import Dims, Example, forward, init_params
from sesa.training import (
    EarlyStopping,
    TrainConfig,
    TrainHistory,
    EvalRecord,
    backward,
    example_loss,
    grad_check,
    l2_penalty,
    mse_loss,
    score_examples,
    sgd_step,
    train,
)


def small_model(seed=0, emb_dim=8, hidden=8, n_skills=12, vocab=50):
    return init_params(Dims(emb_dim, hidden, n_skills, vocab), SeededRng(seed))


def random_example(rng, n_skills=12, vocab=50, n_tokens=6, n_profile=4):
    ids = rng.integers(0, vocab, n_tokens)
    skills = np.unique(rng.integers(0, n_skills, n_profile))
    return Example(np.asarray(ids), skills, int(rng.random() < 0.5))


class TestMseLoss:
    def test_perfect_fit(self):
        assert mse_loss([1.0, 0.0], [1, 0]) == 0.0

    def test_arithmetic(self):
        assert mse_loss([0.5], [1]) == pytest.approx(0.25)

    def test_matches_naive_loop(self):
        rng = SeededRng(1)
        scores = rng.uniform(-1, 2, 64)
        labels = (rng.random(64) < 0.5).astype(float)
        acc = 0.0
        for s, y in zip(scores, labels):
            acc += (s - y) ** 2
        assert mse_loss(scores, labels) == pytest.approx(acc / 64, abs=1e-12)

    def test_empty_rejected(self):
        with pytest.raises(DimensionError):
            mse_loss([], [])

    def test_nonbinary_rejected(self):
        with pytest.raises(ValueError):
            mse_loss([0.5], [0.5])


class TestL2Penalty:
    def test_zero_rate(self):
        assert l2_penalty(small_model(), 0.0) == 0.0

    def test_zero_weights(self):
        params = small_model()
        for name, arr in params.arrays():
            arr[:] = 0.0
        assert l2_penalty(params, 0.5) == 0.0

    def test_matches_hand_sum(self):
        params = small_model(seed=3, emb_dim=2, hidden=2, n_skills=3, vocab=4)
        expected = 0.0
        for name, arr in params.arrays():
            if name == "b":
                continue
            for x in arr.reshape(-1):
                expected += x * x
        assert l2_penalty(params, 0.5) == pytest.approx(0.5 * expected, rel=1e-12)

    def test_frozen_embeddings_excluded(self):
        params = small_model(seed=4)
        with_emb = l2_penalty(params, 1.0, freeze_embeddings=False)
        without = l2_penalty(params, 1.0, freeze_embeddings=True)
        assert with_emb - without == pytest.approx(float(np.sum(params.emb**2)), rel=1e-12)

    def test_nonnegative_and_zero_iff_zero_weights(self):
        params = small_model(seed=5)
        assert l2_penalty(params, 1e-7) > 0.0


class TestBackward:
    def test_zero_residual_zero_gradients(self):
        params = small_model(seed=6)
        ex = random_example(SeededRng(7))
        s, _, cache = forward(params, ex.job_ids, ex.skill_ids)
        grads = backward(params, ex, cache, s, s)  # label equals score
        for _, arr in grads.arrays():
            np.testing.assert_allclose(arr, 0.0, atol=1e-15)

    def test_empty_profile_dot_projection_gradient_zero(self):
        params = small_model(seed=8)
        ex = Example(np.array([1, 2, 3]), np.array([], dtype=np.int64), 1)
        s, _, cache = forward(params, ex.job_ids, ex.skill_ids)
        grads = backward(params, ex, cache, s, 1.0)
        np.testing.assert_array_equal(grads.proj, 0.0)

    def test_frozen_embeddings_zero_gradient(self):
        params = small_model(seed=9)
        ex = random_example(SeededRng(10))
        s, _, cache = forward(params, ex.job_ids, ex.skill_ids)
        grads = backward(params, ex, cache, s, 0.0, freeze_embeddings=True)
        np.testing.assert_array_equal(grads.emb, 0.0)
        assert np.any(grads.w_in != 0.0)

    def test_embedding_gradient_only_for_present_ids(self):
        params = small_model(seed=11)
        ex = Example(np.array([5, 9, 5]), np.array([0, 1]), 0)
        s, _, cache = forward(params, ex.job_ids, ex.skill_ids)
        grads = backward(params, ex, cache, s, 1.0)
        touched = np.where(np.any(grads.emb != 0.0, axis=1))[0]
        assert set(touched.tolist()) <= {5, 9}


class TestGradCheck:
    def test_matches_finite_differences_dot(self):
        rng = SeededRng(100)
        for seed in range(3):
            params = small_model(seed=seed, emb_dim=4, hidden=4, n_skills=6, vocab=15)
            ex = random_example(rng, n_skills=6, vocab=15, n_tokens=5)
            assert grad_check(params, ex, eps=1e-5) < 1e-4

    def test_matches_finite_differences_cosine(self):
        rng = SeededRng(200)
        params = small_model(seed=21, emb_dim=4, hidden=4, n_skills=6, vocab=15)
        ex = random_example(rng, n_skills=6, vocab=15, n_tokens=4)
        if ex.skill_ids.size == 0:
            ex = Example(ex.job_ids, np.array([0, 3]), ex.label)
        assert grad_check(params, ex, eps=1e-5, mode="cosine") < 1e-4

    def test_zero_residual_near_zero_error(self):
        params = small_model(seed=22, emb_dim=3, hidden=3, n_skills=4, vocab=10)
        ex = Example(np.array([1, 2]), np.array([0]), 0)
        s, _, cache = forward(params, ex.job_ids, ex.skill_ids)
        # Craft a zero-residual example by using the score as the label:
        # both analytic and numeric gradients collapse to ~0.
        loss_now = (s - s) ** 2
        assert loss_now == 0.0
        grads = backward(params, ex, cache, s, s)
        assert grads.global_norm() < 1e-12

    def test_detects_corrupted_gradient(self):
        params = small_model(seed=23, emb_dim=3, hidden=3, n_skills=4, vocab=10)
        ex = Example(np.array([1, 2, 3]), np.array([0, 2]), 1)

        s, _, cache = forward(params, ex.job_ids, ex.skill_ids)
        grads = backward(params, ex, cache, s, 1.0)
        grads.proj *= 2.0  # injected fault
        eps = 1e-5
        worst = 0.0
        flat_p = params.proj.reshape(-1)
        flat_g = grads.proj.reshape(-1)
        for k in range(flat_p.size):
            orig = flat_p[k]
            flat_p[k] = orig + eps
            up = example_loss(params, ex)
            flat_p[k] = orig - eps
            down = example_loss(params, ex)
            flat_p[k] = orig
            fd = (up - down) / (2 * eps)
            worst = max(worst, abs(flat_g[k] - fd) / max(abs(flat_g[k]), abs(fd), 1e-8))
        assert worst > 0.3


class TestSgdStep:
    def _config(self, **kw):
        defaults = dict(emb_dim=8, hidden=8, learning_rate=0.1, l2_rate=0.0, clip_norm=5.0)
        defaults.update(kw)
        return TrainConfig(**defaults)

    def test_zero_gradient_fixed_point(self):
        params = small_model(seed=30)
        before = {name: arr.copy() for name, arr in params.arrays()}
        from sesa.training import Gradients

        sgd_step(params, Gradients.zeros_like(params), self._config())
        for name, arr in params.arrays():
            np.testing.assert_array_equal(arr, before[name])

    def test_scalar_update_arithmetic(self):
        params = small_model(seed=31)
        from sesa.training import Gradients

        grads = Gradients.zeros_like(params)
        params.proj[0, 0] = 1.0
        grads.proj[0, 0] = 0.5
        sgd_step(params, grads, self._config())
        assert params.proj[0, 0] == pytest.approx(0.95)

    def test_clipping_scales_update(self):
        from sesa.training import Gradients

        config = self._config(learning_rate=1.0, clip_norm=5.0)
        base = small_model(seed=32)

        grads = Gradients.zeros_like(base)
        grads.proj[:] = 50.0 / np.sqrt(grads.proj.size)  # global norm 50
        assert grads.global_norm() == pytest.approx(50.0)

        clipped = base.copy()
        sgd_step(clipped, grads, config)
        delta = base.proj - clipped.proj
        expected = config.learning_rate * grads.proj * (5.0 / 50.0)
        np.testing.assert_allclose(delta, expected, rtol=1e-12)

    def test_nonfinite_gradient_aborts(self):
        from sesa.training import Gradients

        params = small_model(seed=33)
        grads = Gradients.zeros_like(params)
        grads.w_in[0, 0] = np.nan
        with pytest.raises(NumericError):
            sgd_step(params, grads, self._config())

    def test_single_step_decreases_example_loss(self):
        rng = SeededRng(40)
        config = self._config(learning_rate=1e-3, clip_norm=1e9)
        for seed in range(8):
            params = small_model(seed=seed, emb_dim=4, hidden=4, n_skills=6, vocab=15)
            ex = random_example(rng, n_skills=6, vocab=15)
            s, _, cache = forward(params, ex.job_ids, ex.skill_ids)
            before = (s - ex.label) ** 2
            grads = backward(params, ex, cache, s, float(ex.label))
            if grads.global_norm() < 1e-12:
                continue
            sgd_step(params, grads, config)
            after = example_loss(params, ex)
            assert after < before


class TestEarlyStopping:
    def test_first_evaluation_sets_baseline(self):
        stopper = EarlyStopping(patience=3)
        params = small_model()
        assert stopper.update(0.7, params, 500) is False
        assert stopper.best_metric == 0.7
        assert stopper.evals_since_improvement == 0

    def test_stops_after_exactly_patience_nonimproving(self):
        stopper = EarlyStopping(patience=3)
        params = small_model()
        stopper.update(0.9, params, 500)
        assert stopper.update(0.8, params, 1000) is False
        assert stopper.update(0.7, params, 1500) is False
        assert stopper.update(0.6, params, 2000) is True
        assert stopper.best_iteration == 500

    def test_improvement_resets_counter(self):
        stopper = EarlyStopping(patience=2)
        params = small_model()
        stopper.update(0.5, params, 1)
        stopper.update(0.4, params, 2)
        assert stopper.update(0.6, params, 3) is False
        assert stopper.evals_since_improvement == 0

    def test_tiny_improvement_below_delta_ignored(self):
        stopper = EarlyStopping(patience=2, min_delta=1e-6)
        params = small_model()
        stopper.update(0.5, params, 1)
        assert stopper.update(0.5 + 1e-9, params, 2) is False
        assert stopper.evals_since_improvement == 1


class TestTrainHistory:
    def test_strictly_increasing(self):
        history = TrainHistory()
        history.append(EvalRecord(100, 0.5, 0.6))
        with pytest.raises(ValueError):
            history.append(EvalRecord(100, 0.4, 0.7))


def tiny_training_data(seed=77, n=400, n_skills=8, vocab=30, n_tokens=8):
    """Learnable toy stream: profiles that share the job's dominant token-skill
    get label 1."""
    rng = SeededRng(seed)
    examples = []
    for _ in range(n):
        skill = int(rng.integers(0, n_skills))
        base = skill * (vocab // n_skills)
        ids = base + rng.integers(0, vocab // n_skills, n_tokens)
        positive = rng.random() < 0.4
        if positive:
            others = np.unique(rng.integers(0, n_skills, 2))
            skills = np.unique(np.concatenate([[skill], others]))
        else:
            choices = np.setdiff1d(np.arange(n_skills), [skill])
            skills = np.unique(choices[rng.choice(len(choices), size=2)])
        examples.append(Example(np.asarray(ids), skills, int(skill in skills)))
    return examples


class TestTrainLoop:
    def _config(self, **kw):
        defaults = dict(
            emb_dim=8,
            hidden=8,
            learning_rate=0.3,
            batch_size=32,
            eval_every=5,
            patience=3,
            max_iters=60,
            seed=5,
        )
        defaults.update(kw)
        return TrainConfig(**defaults)

    def test_loss_decreases_on_tiny_set(self):
        data = tiny_training_data()
        train_set, valid_set = data[:300], data[300:]
        params, history = self._run(train_set, valid_set)
        assert history.records[-1].train_mse < history.records[0].train_mse

    def _run(self, train_set, valid_set, **kw):
        config = self._config(**kw)
        return train(config, train_set, valid_set, n_skills=8, vocab_size=30)

    def test_decreasing_stub_stops_after_patience_and_returns_first_snapshot(self):
        data = tiny_training_data(n=200)
        train_set, valid_set = data[:160], data[160:]
        config = self._config(max_iters=10_000)
        seen = []

        def stub(params):
            seen.append(0.9 - 0.05 * len(seen))  # monotonically decreasing
            return seen[-1]

        params, history = train(
            config, train_set, valid_set, n_skills=8, vocab_size=30, validation_metric=stub
        )
        # baseline evaluation + exactly `patience` non-improving ones
        assert len(history) == config.patience + 1
        assert history.records[-1].iteration == (config.patience + 1) * config.eval_every
        assert history.records[0].valid_auc == max(r.valid_auc for r in history.records)

    def test_deterministic_runs_bitwise_identical(self):
        data = tiny_training_data(n=240)
        train_set, valid_set = data[:200], data[200:]
        p1, h1 = self._run(train_set, valid_set, max_iters=25)
        p2, h2 = self._run(train_set, valid_set, max_iters=25)
        for (_, a), (_, b) in zip(p1.arrays(), p2.arrays()):
            np.testing.assert_array_equal(a, b)
        assert [(r.iteration, r.train_mse, r.valid_auc) for r in h1.records] == [
            (r.iteration, r.train_mse, r.valid_auc) for r in h2.records
        ]

    def test_best_snapshot_is_max_recorded_auc(self):
        data = tiny_training_data(n=300)
        train_set, valid_set = data[:240], data[240:]
        params, history = self._run(train_set, valid_set, max_iters=40)
        best = max(r.valid_auc for r in history.records)
        valid_labels = np.array([float(e.label) for e in valid_set])
        from sesa.metrics import roc_auc

        returned = roc_auc(score_examples(params, valid_set), valid_labels)
        assert returned == pytest.approx(best, abs=1e-12)

    def test_degenerate_validation_rejected(self):
        data = tiny_training_data(n=150)
        all_neg = [Example(e.job_ids, e.skill_ids, 0) for e in data[:20]]
        with pytest.raises(UndefinedMetricError):
            train(self._config(), data[:100], all_neg, n_skills=8, vocab_size=30)

    def test_neg_subsample_still_deterministic(self):
        data = tiny_training_data(n=240)
        train_set, valid_set = data[:200], data[200:]
        p1, _ = self._run(train_set, valid_set, max_iters=15, neg_subsample=0.5)
        p2, _ = self._run(train_set, valid_set, max_iters=15, neg_subsample=0.5)
        for (_, a), (_, b) in zip(p1.arrays(), p2.arrays()):
            np.testing.assert_array_equal(a, b)

    def test_variable_length_sequences_train(self):
        rng = SeededRng(50)
        examples = []
        for k in range(120):
            n_tokens = int(rng.integers(2, 12))
            ids = rng.integers(0, 30, n_tokens)
            skills = np.unique(rng.integers(0, 8, 2))
            examples.append(Example(np.asarray(ids), skills, int(rng.random() < 0.5)))
        params, history = self._run(examples[:100], examples[100:], max_iters=10)
        assert len(history) == 2
