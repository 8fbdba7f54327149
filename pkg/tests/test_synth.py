import json
import math

import numpy as np
import pytest

from sesa.linalg import SeededRng, cosine
from sesa.metrics import roc_auc
from sesa.synth import (
    GenConfig,
    gen_aligned_embeddings,
    gen_dataset,
    gen_example,
    gen_lexicon,
    split_sizes,
)
from sesa.text import tokenize


class TestGenLexicon:
    def test_deterministic(self):
        cfg = GenConfig(seed=7)
        a = gen_lexicon(SeededRng(7), cfg)
        b = gen_lexicon(SeededRng(7), cfg)
        assert a == b

    def test_counts(self):
        cfg = GenConfig(seed=7, n_skills=50, kw_per_skill=8)
        lex = gen_lexicon(SeededRng(7), cfg)
        all_kw = [kw for pool in lex.keywords for kw in pool]
        assert len(all_kw) == 400
        assert len(set(all_kw)) == 400

    def test_pairwise_disjoint_pools(self):
        cfg = GenConfig(seed=3, n_skills=20)
        lex = gen_lexicon(SeededRng(3), cfg)
        for i in range(20):
            for j in range(i + 1, 20):
                assert not set(lex.keywords[i]) & set(lex.keywords[j])

    def test_tokens_survive_tokenizer(self):
        cfg = GenConfig(seed=5, n_skills=10)
        lex = gen_lexicon(SeededRng(5), cfg)
        for token in [kw for pool in lex.keywords for kw in pool] + lex.noise_vocab:
            assert tokenize(token) == [token]

    def test_noise_disjoint_from_keywords(self):
        cfg = GenConfig(seed=9, n_skills=10)
        lex = gen_lexicon(SeededRng(9), cfg)
        kw = {k for pool in lex.keywords for k in pool}
        assert not kw & set(lex.noise_vocab)

    def test_skill_names_format(self):
        cfg = GenConfig(seed=1, n_skills=3, skills_per_job=2, skills_per_profile=3)
        lex = gen_lexicon(SeededRng(1), cfg)
        assert lex.skills == ["skill_000", "skill_001", "skill_002"]


class TestGenExample:
    def test_superset_profile_forced_positive(self):
        cfg = GenConfig(seed=2, label_noise=0.0, skills_per_profile=6, skills_per_job=3)
        rng = SeededRng(2)
        lex = gen_lexicon(rng, cfg)
        found = 0
        for _ in range(400):
            pair, truth = gen_example(rng, lex, cfg)
            if set(truth.true_skills) <= set(pair.profile_skills):
                found += 1
                assert pair.label == 1
        assert found > 0

    def test_disjoint_profile_forced_negative(self):
        cfg = GenConfig(seed=4, label_noise=0.0)
        rng = SeededRng(4)
        lex = gen_lexicon(rng, cfg)
        found = 0
        for _ in range(400):
            pair, truth = gen_example(rng, lex, cfg)
            if not set(truth.true_skills) & set(pair.profile_skills):
                found += 1
                assert pair.label == 0
        assert found > 0

    def test_zero_noise_label_is_pure_overlap_function(self):
        cfg = GenConfig(seed=6, label_noise=0.0)
        rng = SeededRng(6)
        lex = gen_lexicon(rng, cfg)
        for _ in range(300):
            pair, truth = gen_example(rng, lex, cfg)
            overlap = len(set(truth.true_skills) & set(pair.profile_skills))
            assert pair.label == (1 if overlap >= cfg.overlap_threshold else 0)
            assert pair.label == truth.label_clean

    def test_prenoise_positive_rate_within_3_sigma(self):
        cfg = GenConfig(seed=12, pos_rate=0.10)
        rng = SeededRng(12)
        lex = gen_lexicon(rng, cfg)
        n = 100_000
        positives = 0
        for _ in range(n):
            _, truth = gen_example(rng, lex, cfg)
            positives += truth.label_clean
        sigma = math.sqrt(n * 0.10 * 0.90)
        assert abs(positives - n * 0.10) <= 3 * sigma

    def test_job_tokens_come_from_lexicon(self):
        cfg = GenConfig(seed=13)
        rng = SeededRng(13)
        lex = gen_lexicon(rng, cfg)
        legal = {k for pool in lex.keywords for k in pool} | set(lex.noise_vocab)
        for _ in range(100):
            pair, _ = gen_example(rng, lex, cfg)
            assert set(tokenize(pair.job_text)) <= legal


class TestGenDataset:
    def test_split_sizes_exact(self):
        cfg = GenConfig(seed=1, n_examples=1000)
        assert split_sizes(1000, cfg) == (650, 50, 300)

    def test_byte_identical_output(self, tmp_path):
        cfg = GenConfig(seed=21, n_examples=300)
        dir_a, dir_b = tmp_path / "a", tmp_path / "b"
        gen_dataset(cfg, out_dir=dir_a)
        gen_dataset(cfg, out_dir=dir_b)
        for name in ("train.jsonl", "valid.jsonl", "test.jsonl", "ground_truth.jsonl",
                     "lexicon.json", "config.json"):
            assert (dir_a / name).read_bytes() == (dir_b / name).read_bytes()

    def test_written_config_records_seed(self, tmp_path):
        cfg = GenConfig(seed=33, n_examples=120)
        gen_dataset(cfg, out_dir=tmp_path / "d")
        stored = json.loads((tmp_path / "d" / "config.json").read_text())
        assert stored["seed"] == 33 and stored["n_examples"] == 120

    def test_oracle_scorer_reaches_high_auc(self):
        cfg = GenConfig(seed=41, n_examples=5000, label_noise=0.05)
        splits, truths, _ = gen_dataset(cfg)
        scores = np.array(
            [
                float(len(set(p.profile_skills) & set(t.true_skills)))
                for p, t in zip(splits["test"], truths["test"])
            ]
        )
        labels = np.array([float(p.label) for p in splits["test"]])
        assert roc_auc(scores, labels) >= 0.95

    def test_minimum_size_enforced(self):
        with pytest.raises(ValueError):
            gen_dataset(GenConfig(seed=1, n_examples=50))


@pytest.fixture(scope="module")
def emb():
    cfg = GenConfig(seed=51, n_skills=12)
    lex = gen_lexicon(SeededRng(51), cfg)
    words, matrix = gen_aligned_embeddings(lex, 16, SeededRng(52))
    index = {w: i for i, w in enumerate(words)}
    return cfg, lex, matrix, index


class TestAlignedEmbeddings:
    def test_same_skill_keywords_tight(self, emb):
        cfg, lex, matrix, index = emb
        sims = []
        for pool in lex.keywords:
            for i in range(len(pool)):
                for j in range(i + 1, len(pool)):
                    sims.append(cosine(matrix[index[pool[i]]], matrix[index[pool[j]]]))
        assert float(np.mean(sims)) > 0.8

    def test_cross_skill_keywords_near_orthogonal(self, emb):
        cfg, lex, matrix, index = emb
        rng = SeededRng(53)
        sims = []
        for _ in range(500):
            a, b = rng.choice(cfg.n_skills, size=2)
            ka = lex.keywords[a][int(rng.integers(0, cfg.kw_per_skill))]
            kb = lex.keywords[b][int(rng.integers(0, cfg.kw_per_skill))]
            sims.append(cosine(matrix[index[ka]], matrix[index[kb]]))
        assert abs(float(np.mean(sims))) < 0.1

    def test_deterministic(self):
        cfg = GenConfig(seed=61, n_skills=8)
        lex = gen_lexicon(SeededRng(61), cfg)
        _, m1 = gen_aligned_embeddings(lex, 8, SeededRng(62))
        _, m2 = gen_aligned_embeddings(lex, 8, SeededRng(62))
        np.testing.assert_array_equal(m1, m2)

    def test_minimum_dim(self):
        cfg = GenConfig(seed=1, n_skills=8)
        lex = gen_lexicon(SeededRng(1), cfg)
        with pytest.raises(ValueError):
            gen_aligned_embeddings(lex, 4, SeededRng(2))
