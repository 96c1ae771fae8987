import itertools
import math
import random
from fractions import Fraction

import pytest

from corpus_forge.core.errors import AppException, ErrorCode
from corpus_forge.metrics import (
    LengthStats,
    SpanAnnotation,
    bio_to_spans,
    format_score,
    length_stats,
    macro_f1,
    macro_f1_spans,
    micro_f1_spans,
    perplexity,
    select_bucket,
    spans_to_bio,
    summarize_curve,
    unweighted_mean,
)

TAGS = ["O", "B-A", "I-A", "B-B", "I-B"]

# (max, mean, p95) per tokenizer, three rows per benchmark
SMCD_ROWS = [
    (1697, "30.79", 96), (1697, "30.79", 96), (2028, "40.74", 131), (2028, "40.74", 131),
    (2606, "48.82", 158), (2606, "48.82", 158), (1708, "31.83", 99), (1680, "30.47", 95),
    (1631, "30.01", 94), (1577, "28.87", 89),
]
BMC_ROWS = [
    (5, "3.92", 4), (5, "3.92", 4), (4, "3.78", 4), (4, "3.78", 4), (7, "6.50", 7),
    (7, "6.50", 7), (5, "3.85", 4), (5, "3.90", 4), (4, "3.82", 4), (4, "3.46", 4),
]
NEMO_ROWS = [
    (106, "29.02", 53), (106, "29.02", 53), (151, "39.94", 76), (151, "39.94", 76),
    (179, "48.15", 91), (179, "48.15", 91), (110, "28.77", 54), (108, "28.64", 52),
    (102, "27.40", 51), (100, "26.03", 48),
]


def _valid(tags):
    previous = "O"
    for tag in tags:
        if tag.startswith("I-") and previous[2:] != tag[2:]:
            return False
        previous = tag
    return True


def _valid_sequences(length):
    return [list(seq) for seq in itertools.product(TAGS, repeat=length) if _valid(seq)]


def _brute_spans(tags):
    found = set()
    n = len(tags)
    for i in range(n):
        if not tags[i].startswith("B-"):
            continue
        kind = tags[i][2:]
        for j in range(i + 1, n + 1):
            if all(t == f"I-{kind}" for t in tags[i + 1:j]) and (j == n or tags[j] != f"I-{kind}"):
                found.add((i, j, kind))
    return found


def _oracle_f1(gold_sentences, pred_sentences):
    gold = {(k,) + s for k, tags in enumerate(gold_sentences) for s in _brute_spans(tags)}
    pred = {(k,) + s for k, tags in enumerate(pred_sentences) for s in _brute_spans(tags)}
    if not gold and not pred:
        return Fraction(1)
    tp = len(gold & pred)
    p = Fraction(tp, len(pred)) if pred else Fraction(0)
    r = Fraction(tp, len(gold)) if gold else Fraction(0)
    return 2 * p * r / (p + r) if p + r else Fraction(0)


def _stats(rows):
    return [LengthStats(max=m, mean=Fraction(mean), p95=p) for m, mean, p in rows]


def test_bio_to_spans_direct_rule():
    assert bio_to_spans(["B-PER", "I-PER", "O", "B-LOC"]) == {
        SpanAnnotation(0, 0, 2, "PER"),
        SpanAnnotation(0, 3, 4, "LOC"),
    }
    assert bio_to_spans(["O", "O", "O"]) == set()


def test_adjacent_b_tags_start_new_spans():
    assert bio_to_spans(["B-PER", "B-PER", "I-PER"]) == {
        SpanAnnotation(0, 0, 1, "PER"),
        SpanAnnotation(0, 1, 3, "PER"),
    }


@pytest.mark.parametrize("length", range(1, 9))
def test_bio_to_spans_matches_brute_force(length):
    rng = random.Random(length)
    sequences = _valid_sequences(length) if length <= 5 else [None] * 300
    for seq in sequences:
        if seq is None:
            seq = []
            while len(seq) < length:
                candidate = rng.choice(TAGS)
                if _valid(seq + [candidate]):
                    seq.append(candidate)
        got = {(s.start, s.end, s.entity_type) for s in bio_to_spans(seq)}
        assert got == _brute_spans(seq)


def test_spans_to_bio_inverts_bio_to_spans():
    for seq in _valid_sequences(5):
        assert spans_to_bio(bio_to_spans(seq), len(seq)) == seq


def test_malformed_tag_is_rejected():
    with pytest.raises(AppException) as exc:
        bio_to_spans(["PER"])
    assert exc.value.error_code is ErrorCode.BIO_INVALID


def test_micro_f1_perfect_match():
    gold = [["B-PER", "I-PER", "O"], ["B-LOC"]]
    assert micro_f1_spans(gold, gold).f1 == 1


def test_micro_f1_hand_computed_confusion():
    gold = [{SpanAnnotation(0, 0, 1, "PER"), SpanAnnotation(0, 2, 3, "LOC")}]
    predicted = [{SpanAnnotation(0, 0, 1, "PER"), SpanAnnotation(0, 2, 3, "ORG")}]
    score = micro_f1_spans(gold, predicted)
    assert score.precision == Fraction(1, 2)
    assert score.recall == Fraction(1, 2)
    assert score.f1 == Fraction(1, 2)


def test_micro_f1_empty_sets_are_degenerate():
    score = micro_f1_spans([["O", "O"]], [["O", "O"]])
    assert score.f1 == 1
    assert score.degenerate


def test_micro_f1_zero_when_nothing_matches():
    assert micro_f1_spans([["B-A"]], [["O"]]).f1 == 0


def test_micro_f1_misaligned_is_hard_failure():
    with pytest.raises(AppException) as exc:
        micro_f1_spans([["O"], ["O"]], [["O"]])
    assert exc.value.error_code is ErrorCode.METRIC_INPUT_MISALIGNED
    with pytest.raises(AppException):
        micro_f1_spans([["O", "O"]], [["O"]])


@pytest.mark.parametrize("length", range(1, 5))
def test_micro_f1_exhaustive_small_pairs(length):
    sequences = _valid_sequences(length)
    for gold in sequences:
        for pred in sequences:
            score = micro_f1_spans([gold], [pred])
            assert score.f1 == _oracle_f1([gold], [pred])
            assert 0 <= score.f1 <= 1


@pytest.mark.parametrize("length", [5, 6])
def test_micro_f1_sampled_longer_pairs(length):
    rng = random.Random(length)
    sequences = _valid_sequences(length)
    for _ in range(3000):
        gold, pred = rng.choice(sequences), rng.choice(sequences)
        assert micro_f1_spans([gold], [pred]).f1 == _oracle_f1([gold], [pred])


def test_micro_f1_pools_over_sentences():
    rng = random.Random(3)
    sequences = _valid_sequences(4)
    for _ in range(200):
        count = rng.randint(1, 5)
        gold = [rng.choice(sequences) for _ in range(count)]
        pred = [rng.choice(sequences) for _ in range(count)]
        assert micro_f1_spans(gold, pred).f1 == _oracle_f1(gold, pred)


def test_macro_f1_spans_averages_entity_types():
    gold = [["B-A", "O", "B-B"]]
    pred = [["B-A", "O", "O"]]
    score = macro_f1_spans(gold, pred)
    assert score.per_type == {"A": 1, "B": 0}
    assert score.f1 == Fraction(1, 2)


def test_macro_f1_perfect_three_classes():
    assert macro_f1([0, 1, 2, 2], [0, 1, 2, 2], 3).macro_f1 == 1


def test_macro_f1_hand_confusion_matrix():
    # gold rows / predicted columns [[1, 1], [0, 2]]
    gold = [0, 0, 1, 1]
    pred = [0, 1, 1, 1]
    score = macro_f1(gold, pred, 2)
    assert score.per_class == [Fraction(2, 3), Fraction(4, 5)]
    assert score.macro_f1 == Fraction(11, 15)
    assert abs(float(score.macro_f1) - 11 / 15) < 1e-12


def test_macro_f1_single_predicted_class():
    score = macro_f1([0, 1, 2], [0, 0, 0], 3)
    assert score.per_class == [Fraction(1, 2), Fraction(0), Fraction(0)]
    assert score.macro_f1 == Fraction(1, 6)


def test_macro_f1_flags_absent_class():
    score = macro_f1([0, 0, 1], [0, 0, 1], 3)
    assert score.degenerate_classes == [2]
    assert score.macro_f1 == Fraction(2, 3)


def test_macro_f1_misaligned():
    with pytest.raises(AppException) as exc:
        macro_f1([0, 1], [0], 2)
    assert exc.value.error_code is ErrorCode.METRIC_INPUT_MISALIGNED


def test_ner_average_reproduces_two_decimal_headline():
    mean = unweighted_mean([93.33, 87.06])
    assert mean == Fraction(90195, 1000)
    assert format_score(mean) == "90.20"


def test_unweighted_mean_single_and_triple():
    assert unweighted_mean([Fraction(7, 3)]) == Fraction(7, 3)
    assert unweighted_mean([1, 2, 6]) == 3
    with pytest.raises(AppException):
        unweighted_mean([])


def test_format_score_rounds_half_up():
    assert format_score(Fraction(1, 8), 2) == "0.13"
    assert format_score(2.675, 2) == "2.68"
    assert format_score(5, 0) == "5"


def test_perplexity_closed_forms():
    assert perplexity([0.0, 0.0]) == 1
    assert perplexity([math.log(52_000)] * 10) == pytest.approx(52_000, rel=1e-12)
    assert perplexity([math.log(2), math.log(8)]) == pytest.approx(4, rel=1e-12)


def test_perplexity_is_permutation_invariant():
    rng = random.Random(0)
    losses = [rng.uniform(0, 10) for _ in range(500)]
    shuffled = losses[:]
    rng.shuffle(shuffled)
    assert perplexity(losses) == perplexity(shuffled)


def test_perplexity_rejects_empty_and_negative():
    with pytest.raises(AppException) as exc:
        perplexity([])
    assert exc.value.error_code is ErrorCode.METRIC_INPUT_EMPTY
    with pytest.raises(AppException):
        perplexity([-0.5])


def test_summarize_curve_convergence_and_spikes():
    points = [(0, 100.0), (1, 40.0), (2, 20.0), (3, 30.0), (4, 11.0), (5, 10.2), (6, 10.0)]
    summary = summarize_curve(points, tolerance=0.05)
    assert summary.final == 10.0
    assert summary.convergence_step == 5
    assert summary.spikes == [3]
    assert summary.minimum_step == 6


def test_length_stats_uniform_ladder():
    stats = length_stats(range(1, 101))
    assert (stats.max, stats.mean, stats.p95) == (100, Fraction(101, 2), 95)


def test_length_stats_single_value():
    stats = length_stats([7])
    assert stats.max == stats.mean == stats.p95 == 7


def test_length_stats_matches_sort_and_index():
    rng = random.Random(5)
    for _ in range(200):
        values = [rng.randint(1, 50) for _ in range(rng.randint(1, 20))]
        k = math.ceil(0.95 * len(values))
        assert length_stats(values).p95 == sorted(values)[k - 1]


def test_select_bucket_reproduces_sequence_length_table():
    assert select_bucket(_stats(SMCD_ROWS)) == 192
    assert select_bucket(_stats(BMC_ROWS)) == 64
    assert select_bucket(_stats(NEMO_ROWS)) == 192


def test_select_bucket_requires_stats():
    with pytest.raises(AppException) as exc:
        select_bucket([])
    assert exc.value.error_code is ErrorCode.METRIC_INPUT_EMPTY
