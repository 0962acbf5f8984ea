"""BLEU / ROUGE-L baselines and their keyphrase-weighted variants.

All functions are pure and embarrassingly parallel across samples. Weighted
scores are ratios of weight sums, so they are invariant under scaling both
weight vectors by any positive constant.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .core import InputError, ScoreTriple, TokenSeq, validate_alignment
from .weights import WeightVector

ROUGE_MODES = ("symmetric", "literal")


@dataclass(frozen=True)
class LcsAlignment:
    """One maximal LCS between candidate and reference, as membership flags.

    The flagged tokens, read in order, form identical subsequences on both
    sides. When several maximal alignments exist, the one matching the
    earliest candidate positions is returned (deterministic backtrace).
    """

    candidate_flags: tuple[int, ...]
    reference_flags: tuple[int, ...]
    length: int


def lcs_align(candidate: TokenSeq, reference: TokenSeq) -> LcsAlignment:
    """Longest common subsequence via the standard O(n*m) dynamic program."""
    cand, ref = candidate.tokens, reference.tokens
    m, n = len(cand), len(ref)
    dp = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(1, m + 1):
        row, prev = dp[i], dp[i - 1]
        token = cand[i - 1]
        for j in range(1, n + 1):
            if token == ref[j - 1]:
                row[j] = prev[j - 1] + 1
            else:
                above, left = prev[j], row[j - 1]
                row[j] = above if above >= left else left
    cand_flags = [0] * m
    ref_flags = [0] * n
    i, j = m, n
    while i > 0 and j > 0:
        if cand[i - 1] == ref[j - 1]:
            cand_flags[i - 1] = 1
            ref_flags[j - 1] = 1
            i -= 1
            j -= 1
        elif dp[i - 1][j] >= dp[i][j - 1]:
            # Ties move up: prefers matches at earlier candidate positions.
            i -= 1
        else:
            j -= 1
    return LcsAlignment(tuple(cand_flags), tuple(ref_flags), dp[m][n])


def _ngrams(tokens: tuple[str, ...], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu(candidate: TokenSeq, references: Sequence[TokenSeq], max_n: int = 4) -> float:
    """Sentence BLEU: clipped n-gram precision, geometric mean over n = 1..max_n.

    Clipping uses the maximum reference count per n-gram; the brevity penalty
    exp(1 - r/c) applies when the candidate is shorter than the closest
    reference (ties broken toward the shorter reference). No smoothing: a
    zero n-gram count for any order yields score 0, which makes BLEU-4
    brittle on short answers by construction.
    """
    if max_n < 1:
        raise InputError(f"max_n must be >= 1, got {max_n}")
    if not references:
        raise InputError("bleu requires at least one reference")
    cand = candidate.tokens
    c = len(cand)
    if c == 0:
        return 0.0
    log_precision_sum = 0.0
    for n in range(1, max_n + 1):
        counts = _ngrams(cand, n)
        total = sum(counts.values())
        if total == 0:
            return 0.0
        max_ref_counts: Counter = Counter()
        for ref in references:
            for gram, count in _ngrams(ref.tokens, n).items():
                if count > max_ref_counts[gram]:
                    max_ref_counts[gram] = count
        clipped = sum(min(count, max_ref_counts[gram]) for gram, count in counts.items())
        if clipped == 0:
            return 0.0
        log_precision_sum += math.log(clipped / total)
    r = min((len(ref.tokens) for ref in references),
            key=lambda length: (abs(length - c), length))
    brevity = 1.0 if c >= r else math.exp(1.0 - r / c)
    return brevity * math.exp(log_precision_sum / max_n)


def _check_weights(seq: TokenSeq, w: WeightVector, what: str) -> None:
    report = validate_alignment(seq, len(w))
    if not report.ok:
        raise InputError(f"{what} weights misaligned: {report.describe()}")


def bleu1_kpqa(candidate: TokenSeq, references: TokenSeq | Sequence[TokenSeq],
               cand_weights: WeightVector, clipped: bool = False) -> float:
    """Weighted unigram precision with candidate-side importance weights.

    For each candidate token, literal mode credits every occurrence of that
    token in the reference, so the score can exceed 1 when the reference
    repeats a matched token. Clipped mode caps each candidate token's credit
    at 1, keeping the score in [0, 1]. With multiple references the maximum
    per-reference score is returned.
    """
    if isinstance(references, TokenSeq):
        references = (references,)
    if not references:
        raise InputError("bleu1_kpqa requires at least one reference")
    _check_weights(candidate, cand_weights, "candidate")
    total = cand_weights.total()
    if total <= 0.0:
        return 0.0
    best = 0.0
    for reference in references:
        ref_counts = Counter(reference.tokens)
        matched = 0.0
        for token, weight in zip(candidate.tokens, cand_weights.weights):
            occurrences = ref_counts[token]
            if clipped and occurrences > 1:
                occurrences = 1
            matched += weight * occurrences
        best = max(best, matched / total)
    return best


def _f_measure(precision: float, recall: float, beta: float) -> float:
    denom = recall + beta * beta * precision
    if denom <= 0.0:
        return 0.0
    return (1.0 + beta * beta) * precision * recall / denom


def rouge_l(candidate: TokenSeq, reference: TokenSeq, beta: float = 1.2) -> ScoreTriple:
    """LCS-based F-measure: P = LCS/|candidate|, R = LCS/|reference|."""
    if beta <= 0:
        raise InputError(f"beta must be > 0, got {beta}")
    if not candidate.tokens and not reference.tokens:
        return ScoreTriple(0.0, 0.0, 0.0, degenerate=True)
    length = lcs_align(candidate, reference).length
    if length == 0:
        return ScoreTriple(0.0, 0.0, 0.0)
    precision = length / len(candidate.tokens)
    recall = length / len(reference.tokens)
    return ScoreTriple(precision, recall, _f_measure(precision, recall, beta))


def rouge_l_kpqa(candidate: TokenSeq, reference: TokenSeq,
                 cand_weights: WeightVector, ref_weights: WeightVector,
                 beta: float = 1.2, mode: str = "symmetric") -> ScoreTriple:
    """Weighted ROUGE-L over one maximal LCS alignment.

    symmetric (default): precision sums candidate-side weights of LCS members
    over the candidate weight total, recall does the same on the reference
    side; both stay in [0, 1]. literal: the candidate-side weighted LCS mass
    is the numerator of *both* precision and recall (recall divides it by the
    reference weight total, so recall may exceed 1 for skewed weightings).
    """
    if beta <= 0:
        raise InputError(f"beta must be > 0, got {beta}")
    if mode not in ROUGE_MODES:
        raise InputError(f"mode must be one of {ROUGE_MODES}, got {mode!r}")
    _check_weights(candidate, cand_weights, "candidate")
    _check_weights(reference, ref_weights, "reference")
    if not candidate.tokens and not reference.tokens:
        return ScoreTriple(0.0, 0.0, 0.0, degenerate=True)
    alignment = lcs_align(candidate, reference)
    cand_total = cand_weights.total()
    ref_total = ref_weights.total()
    cand_lcs_mass = sum(
        flag * weight for flag, weight in zip(alignment.candidate_flags, cand_weights.weights))
    precision = cand_lcs_mass / cand_total if cand_total > 0 else 0.0
    if mode == "symmetric":
        ref_lcs_mass = sum(
            flag * weight for flag, weight in zip(alignment.reference_flags, ref_weights.weights))
        recall = ref_lcs_mass / ref_total if ref_total > 0 else 0.0
    else:
        recall = cand_lcs_mass / ref_total if ref_total > 0 else 0.0
    return ScoreTriple(precision, recall, _f_measure(precision, recall, beta))
