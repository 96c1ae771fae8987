import json
import random
from collections import Counter

import pytest

from corpus_forge.core.errors import AppException, ErrorCode
from corpus_forge.corpus import ingest
from corpus_forge.tokenizer import (
    ByteLevelBPETokenizer,
    MergeTable,
    Vocabulary,
    count_pre_tokens,
    decode,
    default_alphabet,
    encode,
    inspect,
    load_tokenizer,
    pre_split,
    save_training_result,
    train,
    train_from_iterator,
)

HEBREW = [chr(c) for c in range(0x5D0, 0x5EB)]
NIQQUD = [chr(c) for c in range(0x5B0, 0x5BD)]
EMOJI = [chr(c) for c in range(0x1F600, 0x1F650)]
LATIN = list("abcdefghijklmnopqrstuvwxyzABCXYZ")
OTHER = list("0123456789.,!?-:;\"'()") + [" ", " ", " ", "\n", "\t", "  "]


def _hebrew_corpus(seed=0, documents=200):
    rng = random.Random(seed)
    lexicon = ["".join(rng.choice(HEBREW) for _ in range(rng.randint(2, 7))) for _ in range(120)]
    weights = [1.0 / (rank + 1) for rank in range(len(lexicon))]
    texts = []
    for _ in range(documents):
        words = rng.choices(lexicon, weights=weights, k=rng.randint(5, 25))
        texts.append(" ".join(words) + rng.choice([".", "!", "?", ""]))
    return texts


def _random_text(rng, length):
    pools = [HEBREW, NIQQUD, EMOJI, LATIN, OTHER]
    return "".join(rng.choice(rng.choice(pools)) for _ in range(length))


def _apply(word, left, right):
    out, i = [], 0
    while i < len(word):
        if i < len(word) - 1 and word[i] == left and word[i + 1] == right:
            out.append(left + right)
            i += 2
        else:
            out.append(word[i])
            i += 1
    return out


def _naive_merges(texts, vocab_size, min_pair_frequency):
    counts = count_pre_tokens(texts)
    words = {w: list(w) for w in counts}
    known = set(default_alphabet().byte_to_symbol) | {"<s>", "<pad>", "</s>", "<unk>", "<mask>"}
    merges = []
    banned = set()
    while len(known) < vocab_size:
        pairs = Counter()
        for w, symbols in words.items():
            for pair in zip(symbols, symbols[1:]):
                if pair not in banned:
                    pairs[pair] += counts[w]
        if not pairs:
            break
        best = min(pairs, key=lambda p: (-pairs[p], p))
        if pairs[best] < min_pair_frequency:
            break
        if best[0] + best[1] in known:
            banned.add(best)
            continue
        merges.append(best)
        known.add(best[0] + best[1])
        words = {w: _apply(symbols, *best) for w, symbols in words.items()}
    return merges


def test_alphabet_is_a_printable_bijection():
    alphabet = default_alphabet()
    assert len(set(alphabet.byte_to_symbol)) == 256
    assert all(not s.isspace() for s in alphabet.byte_to_symbol)
    data = bytes(range(256))
    assert alphabet.decode(alphabet.encode(data)) == data


def test_pre_split_covers_text_and_attaches_leading_space():
    text = "שָׁלוֹם  world 2024, hi!\n\nנו"
    pieces = pre_split(text)
    assert "".join(pieces) == text
    assert " world" in pieces
    assert " 2024" in pieces
    assert "שָׁלוֹם" in pieces


def test_single_dominant_pair_gives_one_merge():
    result = train_from_iterator(["ab"] * 10, vocab_size=256 + 5 + 1)
    assert result.merges.merges == (("a", "b"),)
    assert result.vocab.size == 262


def test_toy_corpus_matches_hand_trace():
    result = train_from_iterator(["aaab aaab ab"], vocab_size=400, min_pair_frequency=2)
    assert result.merges.merges == (("a", "a"), ("a", "b"), ("aa", "ab"))
    assert result.truncated
    seq = result.tokenizer.encode("aaab")
    assert seq.ids == (result.vocab.token_to_id["aaab"],)
    assert seq.offsets == ((0, 4),)


def test_toy_corpus_matches_naive_recount():
    texts = ["aaab aaab ab"]
    result = train_from_iterator(texts, vocab_size=400, min_pair_frequency=2)
    assert list(result.merges.merges) == _naive_merges(texts, 400, 2)


@pytest.mark.parametrize("seed", range(50))
def test_merges_equal_naive_oracle_on_toy_corpora(seed):
    rng = random.Random(seed)
    alphabet = rng.choice(["ab", "abc", "abcd ", "אבג ", "xy z"])
    texts = ["".join(rng.choice(alphabet) for _ in range(rng.randint(1, 60))) for _ in range(rng.randint(1, 40))]
    vocab_size = rng.randint(262, 330)
    min_freq = rng.choice([1, 2, 3])
    result = train_from_iterator(texts, vocab_size=vocab_size, min_pair_frequency=min_freq)
    assert list(result.merges.merges) == _naive_merges(texts, vocab_size, min_freq)


@pytest.mark.parametrize("seed", range(20))
def test_vocab_size_counts_each_merge_once(seed):
    rng = random.Random(seed)
    texts = ["".join(rng.choice("ab") for _ in range(rng.randint(2, 12))) for _ in range(30)]
    result = train_from_iterator(texts, vocab_size=320, min_pair_frequency=1)
    merges = result.merges.merges
    assert result.vocab.size == 5 + 256 + len(merges)
    assert len({left + right for left, right in merges}) == len(merges)


def test_vocab_size_reached_exactly():
    result = train_from_iterator(_hebrew_corpus(), vocab_size=320)
    assert result.vocab.size == 320
    assert not result.truncated


def test_vocab_size_must_exceed_base_alphabet():
    with pytest.raises(AppException) as exc:
        train_from_iterator(["abc"], vocab_size=261)
    assert exc.value.error_code is ErrorCode.VOCAB_SIZE_INVALID


def test_empty_corpus_is_rejected():
    with pytest.raises(AppException) as exc:
        train_from_iterator([], vocab_size=300)
    assert exc.value.error_code is ErrorCode.CORPUS_EMPTY


def test_specials_sit_at_fixed_low_ids():
    vocab = train_from_iterator(_hebrew_corpus(), vocab_size=300).vocab
    assert vocab.id_to_token[:5] == ("<s>", "<pad>", "</s>", "<unk>", "<mask>")
    assert vocab.specials == {"bos": 0, "pad": 1, "eos": 2, "unk": 3, "mask": 4}


def test_special_token_strings_are_never_learned():
    result = train_from_iterator(["<s> <s> <s> <mask> <mask>"] * 20, vocab_size=300, min_pair_frequency=2)
    learned = result.vocab.id_to_token[5 + 256:]
    assert "<s>" not in learned and "<mask>" not in learned
    text = "<s> hello <mask>"
    assert result.tokenizer.decode(result.tokenizer.encode(text).ids) == text


def test_round_trip_randomized_utf8():
    tokenizer = train_from_iterator(_hebrew_corpus(), vocab_size=400).tokenizer
    rng = random.Random(1234)
    for _ in range(10_000):
        text = _random_text(rng, rng.randint(0, 40))
        seq = tokenizer.encode(text)
        assert tokenizer.decode(seq.ids) == text
        assert tokenizer.decode_bytes(seq.ids) == text.encode("utf-8")
        assert all(0 <= i < tokenizer.vocab_size for i in seq.ids)


def test_offsets_are_contiguous_and_match_bytes():
    tokenizer = train_from_iterator(_hebrew_corpus(), vocab_size=400).tokenizer
    text = "שלום world 🙂!"
    data = text.encode("utf-8")
    seq = tokenizer.encode(text)
    assert seq.offsets[0][0] == 0
    assert seq.offsets[-1][1] == len(data)
    for (start, end), (next_start, _) in zip(seq.offsets, seq.offsets[1:]):
        assert start < end == next_start
    for token_id, (start, end) in zip(seq.ids, seq.offsets):
        assert tokenizer.decode_bytes([token_id]) == data[start:end]


def test_encode_without_merges_uses_byte_symbols():
    vocab = Vocabulary.build([])
    seq = encode("אב", MergeTable(()), vocab)
    assert len(seq) == 4
    assert decode(seq, vocab) == "אב"


def test_empty_string_and_empty_ids():
    tokenizer = train_from_iterator(["ab ab ab"], vocab_size=300).tokenizer
    assert len(tokenizer.encode("")) == 0
    assert tokenizer.decode([]) == ""
    assert tokenizer.decode([0, 1, 2, 3, 4]) == ""


def test_invalid_utf8_rejected_at_boundary():
    tokenizer = train_from_iterator(["ab ab ab"], vocab_size=300).tokenizer
    with pytest.raises(AppException) as exc:
        tokenizer.encode(b"\xff\xfe")
    assert exc.value.error_code is ErrorCode.INVALID_UTF8
    with pytest.raises(AppException):
        tokenizer.encode("bad \ud800")


def test_unknown_id_is_hard_failure():
    tokenizer = train_from_iterator(["ab ab ab"], vocab_size=300).tokenizer
    with pytest.raises(AppException) as exc:
        tokenizer.decode([tokenizer.vocab_size])
    assert exc.value.error_code is ErrorCode.TOKEN_ID_UNKNOWN


def test_save_and_load_preserve_encodings(tmp_path):
    result = train_from_iterator(_hebrew_corpus(), vocab_size=380)
    save_training_result(result, tmp_path / "tok")
    loaded = load_tokenizer(tmp_path / "tok")
    assert loaded.vocab.size == result.vocab.size
    for text in _hebrew_corpus(seed=9, documents=1000):
        assert loaded.encode(text).ids == result.tokenizer.encode(text).ids
    merges_lines = (tmp_path / "tok" / "merges.txt").read_text(encoding="utf-8").splitlines()
    assert merges_lines[0] == "#version: 0.2"
    assert len(merges_lines) == len(result.merges) + 1


def test_truncated_merges_file_names_the_line(tmp_path):
    result = train_from_iterator(_hebrew_corpus(), vocab_size=300)
    save_training_result(result, tmp_path / "tok")
    path = tmp_path / "tok" / "merges.txt"
    lines = path.read_text(encoding="utf-8").splitlines()
    cut = lines[:10] + [lines[10].split(" ")[0]]
    path.write_text("\n".join(cut) + "\n", encoding="utf-8")
    with pytest.raises(AppException) as exc:
        load_tokenizer(tmp_path / "tok")
    assert exc.value.error_code is ErrorCode.TOKENIZER_FILE_MALFORMED
    assert exc.value.detail["line"] == 11


def test_missing_trailing_merges_detected(tmp_path):
    result = train_from_iterator(_hebrew_corpus(), vocab_size=300)
    save_training_result(result, tmp_path / "tok")
    path = tmp_path / "tok" / "merges.txt"
    lines = path.read_text(encoding="utf-8").splitlines()
    path.write_text("\n".join(lines[:-3]) + "\n", encoding="utf-8")
    with pytest.raises(AppException) as exc:
        load_tokenizer(tmp_path / "tok")
    assert exc.value.detail["line"] == len(lines) - 2


def test_training_from_manifest_ignores_worker_count(tmp_path):
    texts = _hebrew_corpus(seed=3, documents=300)
    files = []
    for part in range(3):
        path = tmp_path / f"part{part}.jsonl"
        with open(path, "w", encoding="utf-8") as f:
            for text in texts[part::3]:
                f.write(json.dumps({"text": text}, ensure_ascii=False) + "\n")
        files.append(path)
    manifest = ingest(files, "web_corpus", tmp_path / "corpus")
    single = train(manifest, vocab_size=350, min_pair_frequency=2, workers=1)
    parallel = train(manifest, vocab_size=350, min_pair_frequency=2, workers=3)
    assert single.merges == parallel.merges
    assert single.vocab == parallel.vocab
    assert single.corpus_fingerprint == parallel.corpus_fingerprint


def test_tokens_per_byte_non_increasing_with_vocab_size():
    train_texts = _hebrew_corpus(seed=5, documents=400)
    held_out = _hebrew_corpus(seed=6, documents=50)
    ratios = []
    for size in (280, 320, 400, 600):
        tokenizer = train_from_iterator(train_texts, vocab_size=size).tokenizer
        ratios.append(inspect(tokenizer, held_out)["tokens_per_byte"])
    assert ratios == sorted(ratios, reverse=True)


def test_tokenizer_object_matches_module_functions():
    result = train_from_iterator(_hebrew_corpus(), vocab_size=300)
    tokenizer = ByteLevelBPETokenizer(result.merges, result.vocab)
    text = "מה נשמע"
    assert encode(text, result.merges, result.vocab) == tokenizer.encode(text)
    assert tokenizer.encode_ids(text, add_special_tokens=True)[0] == tokenizer.bos_id


def test_inspect_reports_special_tokens():
    tokenizer = train_from_iterator(_hebrew_corpus(), vocab_size=300).tokenizer
    report = inspect(tokenizer, ["שלום עולם"])
    assert report["special_tokens"] == {"bos": "<s>", "pad": "<pad>", "eos": "</s>", "unk": "<unk>", "mask": "<mask>"}
    assert report["documents"] == 1
    assert report["words"] == 2
