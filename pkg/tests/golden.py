"""Hand-checked worked example shared across test modules.

The candidate shares most surface tokens with the reference but gets the
key fact wrong; it tokenizes to 9 tokens against the reference's 8, with
7 token types in common and an LCS of length 6.
"""

GOLD_QUESTION = "How many steps are involved in a hypothesis test?"
GOLD_REFERENCE = "Four steps are involved in a hypothesis test."
GOLD_CANDIDATE = "There are seven steps involved in a hypothesis test ."

GOLD_CANDIDATE_TOKENS = (
    "there", "are", "seven", "steps", "involved", "in", "a", "hypothesis", "test")
GOLD_REFERENCE_TOKENS = (
    "four", "steps", "are", "involved", "in", "a", "hypothesis", "test")

GOLD_BLEU1 = 7 / 9          # 7 of 9 candidate tokens appear in the reference
GOLD_LCS_LENGTH = 6
GOLD_ROUGE_L = 0.713        # beta = 1.2; P = 6/9, R = 6/8
