"""Acceptance suite: one test per release criterion, at its stated tolerance.

Each criterion prints a PASS/FAIL line (visible with ``pytest -s``). The
exporter criteria drive the companion package through its command line; the
rest exercise this package's public API and CLI.
"""

import random
import subprocess
import sys
import time
from contextlib import contextmanager

import numpy as np
import pytest

from kpqa_eval import (
    ReliabilityMatrix,
    Side,
    bleu,
    bleu1_kpqa,
    filter_ratings,
    krippendorff_alpha,
    lcs_align,
    load_embedding_store,
    load_samples,
    load_weight_store,
    pearson,
    rouge_l,
    rouge_l_kpqa,
    spearman,
    tokenize,
    uniform_weights,
    weighted_bertscore,
)
from kpqa_eval.cli import main as cli_main
from kpqa_eval.embed_metrics import EmbeddingMatrix
from kpqa_eval.scoring import ScoringContext, score_corpus
from kpqa_eval.weights import Provenance, WeightVector

from golden import GOLD_CANDIDATE, GOLD_QUESTION, GOLD_REFERENCE
from synth import build_keyphrase_corpus, write_corpus_files, write_jsonl
from test_meta_eval import alpha_oracle_interval, pearson_oracle, rank_oracle
from test_ngram_metrics import brute_force_lcs


@contextmanager
def criterion(name):
    try:
        yield
    except Exception:
        print(f"ACCEPTANCE FAIL: {name}")
        raise
    print(f"ACCEPTANCE PASS: {name}")


def random_tokens(rng, max_len, vocab, min_len=1):
    n = rng.randrange(min_len, max_len + 1)
    return tokenize(" ".join(f"t{rng.randrange(vocab)}" for _ in range(n)))


def test_golden_example_scores():
    with criterion("golden example: BLEU-1 0.778, ROUGE-L 0.713 at beta 1.2"):
        start = time.monotonic()
        candidate = tokenize(GOLD_CANDIDATE)
        reference = tokenize(GOLD_REFERENCE)
        assert bleu(candidate, [reference], max_n=1) == pytest.approx(0.778, abs=1e-3)
        assert rouge_l(candidate, reference, beta=1.2).f == pytest.approx(0.713,
                                                                          abs=1e-3)
        assert time.monotonic() - start < 1.0


def test_uniform_weight_reduction():
    with criterion("uniform weights reduce weighted metrics to their baselines "
                   "(1,000 pairs, 1e-12)"):
        rng = random.Random(202)
        for _ in range(1000):
            cand = random_tokens(rng, max_len=12, vocab=20)
            ref = random_tokens(rng, max_len=12, vocab=20)
            weighted = rouge_l_kpqa(cand, ref, uniform_weights(cand),
                                    uniform_weights(ref), beta=1.2, mode="symmetric")
            plain = rouge_l(cand, ref, beta=1.2)
            assert abs(weighted.precision - plain.precision) <= 1e-12
            assert abs(weighted.recall - plain.recall) <= 1e-12
            assert abs(weighted.f - plain.f) <= 1e-12

            # candidate without repeated tokens: clipped weighted unigram
            # precision must equal the plain unigram precision
            vocab = [f"t{i}" for i in range(20)]
            cand_norep = tokenize(" ".join(rng.sample(vocab, rng.randrange(1, 13))))
            precision = (sum(1 for t in cand_norep.tokens if t in ref.tokens)
                         / len(cand_norep.tokens))
            clipped = bleu1_kpqa(cand_norep, ref, uniform_weights(cand_norep),
                                 clipped=True)
            assert abs(clipped - precision) <= 1e-12


def test_lcs_brute_force_oracle():
    with criterion("LCS equals exhaustive brute force (10,000 pairs)"):
        rng = random.Random(203)
        for _ in range(10000):
            cand = random_tokens(rng, max_len=8, vocab=4, min_len=0)
            ref = random_tokens(rng, max_len=8, vocab=4, min_len=0)
            assert lcs_align(cand, ref).length == brute_force_lcs(cand.tokens,
                                                                  ref.tokens)


def test_weight_scale_invariance():
    with criterion("weighted metrics invariant under weight scaling "
                   "(1,000 weightings x c in {0.1, 3, 100}, 1e-9)"):
        rng = random.Random(204)
        nprng = np.random.default_rng(204)
        for _ in range(1000):
            cand = random_tokens(rng, max_len=8, vocab=6)
            ref = random_tokens(rng, max_len=8, vocab=6)
            cand_w = WeightVector(tuple(rng.uniform(0.01, 1.0) for _ in cand.tokens),
                                  Provenance.EXTERNAL_KPW)
            ref_w = WeightVector(tuple(rng.uniform(0.01, 1.0) for _ in ref.tokens),
                                 Provenance.EXTERNAL_KPW)
            cand_emb = EmbeddingMatrix.from_rows(
                nprng.standard_normal((len(cand.tokens), 8)).tolist(), 8)
            ref_emb = EmbeddingMatrix.from_rows(
                nprng.standard_normal((len(ref.tokens), 8)).tolist(), 8)
            base_bleu = bleu1_kpqa(cand, ref, cand_w)
            base_rouge = rouge_l_kpqa(cand, ref, cand_w, ref_w)
            base_bert = weighted_bertscore(cand_emb, ref_emb, cand_w, ref_w)
            for c in (0.1, 3.0, 100.0):
                assert abs(bleu1_kpqa(cand, ref, cand_w.scaled(c))
                           - base_bleu) <= 1e-9
                scaled_rouge = rouge_l_kpqa(cand, ref, cand_w.scaled(c),
                                            ref_w.scaled(c))
                assert abs(scaled_rouge.f - base_rouge.f) <= 1e-9
                scaled_bert = weighted_bertscore(cand_emb, ref_emb,
                                                 cand_w.scaled(c), ref_w.scaled(c))
                assert abs(scaled_bert.f - base_bert.f) <= 1e-9


def test_statistics_oracles():
    with criterion("pearson/spearman at 1e-12 and agreement at 1e-9 vs "
                   "brute-force oracles; perfect agreement exactly 1.0"):
        rng = random.Random(205)
        done = 0
        while done < 1000:
            n = rng.randint(3, 40)
            xs = [rng.choice((0.1, 0.25, 0.5, 0.75, 0.9)) if rng.random() < 0.3
                  else rng.uniform(0, 1) for _ in range(n)]
            ys = [rng.choice((0.2, 0.4, 0.6)) if rng.random() < 0.3
                  else rng.uniform(0, 1) for _ in range(n)]
            if len(set(xs)) < 2 or len(set(ys)) < 2:
                continue
            r, _ = pearson(xs, ys)
            assert abs(r - pearson_oracle(xs, ys)) <= 1e-12
            expected_rho = pearson_oracle(rank_oracle(xs), rank_oracle(ys))
            assert abs(spearman(xs, ys) - expected_rho) <= 1e-12
            done += 1

        done = 0
        while done < 250:
            rows = [[rng.randint(1, 5) if rng.random() > 0.2 else None
                     for _ in range(5)] for _ in range(5)]
            usable = [row for row in rows if sum(v is not None for v in row) >= 2]
            if len(usable) < 2:
                continue
            present = {v for row in usable for v in row if v is not None}
            if len(present) < 2:
                continue
            alpha = krippendorff_alpha(ReliabilityMatrix(tuple(map(tuple, rows))))
            assert abs(alpha - alpha_oracle_interval(rows)) <= 1e-9
            done += 1

        perfect = ReliabilityMatrix(((2, 2, 2), (5, 5, 5), (1, 1, 1), (3, 3, 3)))
        assert krippendorff_alpha(perfect) == 1.0


def test_rating_filter_boundaries():
    with criterion("rating filter boundary cases and removal cap"):
        assert filter_ratings([3, 3, 3, 3]) == [3, 3, 3, 3]
        assert filter_ratings([1] * 9 + [5]) == [1] * 9
        assert filter_ratings([1, 5] * 5) == [1, 5] * 5
        # ten ratings, seven beyond |z| = 1: the cap keeps removals at five
        raw = [1, 1, 1, 5, 5, 5, 5, 3, 3, 3]
        kept = filter_ratings(raw, z_max=1.0, max_remove=5)
        assert len(raw) - len(kept) == 5
        assert kept == [5, 5, 3, 3, 3]


def test_weighted_beats_unweighted_direction(tmp_path):
    with criterion("keyphrase-weighted metrics correlate above their "
                   "unweighted baselines (margin 0.05)"):
        corpus = build_keyphrase_corpus(n=300, seed=7, dim=16)
        paths = write_corpus_files(corpus, tmp_path)
        samples = load_samples(paths["samples"])
        weight_store = load_weight_store(paths["weights"], samples)
        embedding_store = load_embedding_store(paths["embeddings"], samples)
        human = corpus["human"]
        ids = sorted(human)
        human_vec = [human[i] for i in ids]

        def score_table(ctx):
            table = {}
            for row in score_corpus(samples, ctx):
                table.setdefault(row.metric, {})[row.sample_id] = row.score
            return table

        baseline = score_table(ScoringContext(
            metrics=("bleu-1", "rouge-l", "bertscore"),
            weight_sources={"bertscore": "uniform"},
            embedding_store=embedding_store))
        weighted = score_table(ScoringContext(
            metrics=("bleu-1-kpqa", "rouge-l-kpqa", "bertscore-kpqa"),
            weight_store=weight_store, embedding_store=embedding_store))

        for plain, kpqa in (("bleu-1", "bleu-1-kpqa"),
                            ("rouge-l", "rouge-l-kpqa"),
                            ("bertscore", "bertscore-kpqa")):
            r_plain, _ = pearson(human_vec, [baseline[plain][i] for i in ids])
            r_kpqa, _ = pearson(human_vec, [weighted[kpqa][i] for i in ids])
            assert r_kpqa > r_plain
            assert r_kpqa - r_plain >= 0.05


def test_scoring_determinism_under_parallelism(tmp_path):
    with criterion("score output byte-identical at --jobs 1 and --jobs 8 "
                   "(1,000 samples, under 10 s)"):
        corpus = build_keyphrase_corpus(n=1000, seed=11, dim=8)
        paths = write_corpus_files(corpus, tmp_path)
        outputs = []
        for jobs in (1, 8):
            out = tmp_path / f"scores-jobs{jobs}.csv"
            start = time.monotonic()
            code = cli_main([
                "score", "--samples", str(paths["samples"]),
                "--weights", str(paths["weights"]),
                "--embeddings", str(paths["embeddings"]),
                "--metrics", ("bleu-1,rouge-l,bertscore,"
                              "bleu-1-kpqa,rouge-l-kpqa,bertscore-kpqa"),
                "--jobs", str(jobs), "--out", str(out)])
            elapsed = time.monotonic() - start
            assert code == 0
            assert elapsed < 10.0
            outputs.append(out.read_bytes())
        assert outputs[0] == outputs[1]
        assert len(outputs[0]) > 0


# --- exporter integration -------------------------------------------------

GOLDEN_EXPORT_TEXTS = [
    ("golden", GOLD_QUESTION, GOLD_REFERENCE, GOLD_CANDIDATE),
    ("accents", "Qu'est-ce que c'est?", "Un café au lait, s'il vous plaît!",
     "Du CAFÉ !!!"),
    ("decomposed", "Same?", "Café con leche.", "Café con leche."),
    ("punct-only", "Anything?", "... !!! ???", ". , ;"),
    ("dashes", "And this?", "Well-known — result", "don't stop-me now"),
    ("empty-candidate", "Empty?", "Something here.", ""),
]


def _run_exporter(args):
    return subprocess.run([sys.executable, "-m", "kpqa_exporter", *args],
                          capture_output=True, text=True)


def test_exporter_mock_round_trip(tmp_path):
    with criterion("exporter mock round-trip: 50-sample corpus loads cleanly, "
                   "self-similarity (1,1,1) within 1e-6"):
        corpus = build_keyphrase_corpus(n=50, seed=13, dim=8)
        samples_path = write_jsonl(tmp_path / "samples.jsonl", corpus["samples"])
        weights_path = tmp_path / "weights.jsonl"
        embeddings_path = tmp_path / "embeddings.jsonl"
        result = _run_exporter(["--samples", str(samples_path), "--mode", "mock",
                                "--weights-out", str(weights_path),
                                "--embeddings-out", str(embeddings_path)])
        assert result.returncode == 0, result.stderr

        samples = load_samples(samples_path)
        weight_store = load_weight_store(weights_path, samples)
        embedding_store = load_embedding_store(embeddings_path, samples)
        assert len(weight_store) == 100
        assert len(embedding_store) == 100

        from kpqa_eval.weights import floor_weights
        for sample in samples:
            for side in (Side.CANDIDATE, Side.REFERENCE):
                emb = embedding_store.get(sample.id, side)
                if len(emb) == 0:
                    continue
                weights, _ = floor_weights(weight_store.get(sample.id, side))
                triple = weighted_bertscore(emb, emb, weights, weights)
                assert triple.precision == pytest.approx(1.0, abs=1e-6)
                assert triple.recall == pytest.approx(1.0, abs=1e-6)
                assert triple.f == pytest.approx(1.0, abs=1e-6)


def test_exporter_tokenization_conformance(tmp_path):
    with criterion("exporter token lists byte-match the package tokenizer on "
                   "punctuation, accents, and empty-after-stripping text"):
        records = [{"id": sample_id, "question": q, "reference": r, "candidate": c}
                   for sample_id, q, r, c in GOLDEN_EXPORT_TEXTS]
        samples_path = write_jsonl(tmp_path / "samples.jsonl", records)
        weights_path = tmp_path / "weights.jsonl"
        result = _run_exporter(["--samples", str(samples_path), "--mode", "mock",
                                "--weights-out", str(weights_path)])
        assert result.returncode == 0, result.stderr

        import json
        by_id = {rec[0]: rec for rec in GOLDEN_EXPORT_TEXTS}
        exported = [json.loads(line) for line in
                    weights_path.read_text(encoding="utf-8").splitlines()]
        assert len(exported) == 2 * len(records)
        for record in exported:
            _, _, reference, candidate = by_id[record["id"]]
            text = candidate if record["side"] == "candidate" else reference
            assert record["tokens"] == list(tokenize(text).tokens)
            assert all(0.0 <= w <= 1.0 for w in record["weights"])
