import json
import random
from collections import Counter

import pytest

from corpus_forge.core.errors import AppException, ErrorCode
from corpus_forge.corpus import (
    CorpusManifest,
    Source,
    dedup_exact,
    ingest,
    iter_documents,
    merge_manifests,
    sample_bytes,
    shuffle,
)


def _write_jsonl(path, texts, **extra):
    with open(path, "w", encoding="utf-8") as f:
        for text in texts:
            f.write(json.dumps({"text": text, **extra}, ensure_ascii=False) + "\n")
    return path


def _texts(manifest):
    return [d.text.decode("utf-8") for d in iter_documents(manifest)]


def test_ingest_sums_document_bytes(tmp_path):
    src = _write_jsonl(tmp_path / "a.jsonl", ["x" * 10, "y" * 20, "z" * 30])
    manifest = ingest([src], "web_corpus", tmp_path / "out")
    assert manifest.total_bytes == 60
    assert manifest.document_count == 3
    assert sum(d.byte_len for d in iter_documents(manifest)) == 60
    assert manifest.source_bytes == {"web_corpus": 60}


def test_ingest_counts_hebrew_text_in_bytes(tmp_path):
    src = _write_jsonl(tmp_path / "he.jsonl", ["שלום"])
    manifest = ingest([src], Source.WIKIPEDIA, tmp_path / "out")
    assert manifest.total_bytes == len("שלום".encode("utf-8")) == 8


def test_ingest_empty_file(tmp_path):
    src = tmp_path / "empty.jsonl"
    src.write_bytes(b"")
    manifest = ingest([src], "other", tmp_path / "out")
    assert manifest.document_count == 0
    assert manifest.total_bytes == 0
    assert manifest.shards == []


def test_ingest_tallies_rejected_records(tmp_path):
    src = tmp_path / "mixed.jsonl"
    src.write_bytes(
        b'{"text": "good"}\n'
        b'{"text": "bad \xff\xfe"}\n'
        b'not json\n'
        b'{"title": "no text"}\n'
        b'{"text": "lone \\ud800 surrogate"}\n'
    )
    manifest = ingest([src], "web_corpus", tmp_path / "out")
    assert manifest.document_count == 1
    assert manifest.rejects == {"invalid_utf8": 2, "malformed_json": 1, "missing_text": 1}


def test_ingest_plain_text_blank_line_documents(tmp_path):
    src = tmp_path / "wiki.txt"
    src.write_text("first line\nstill first\n\n\nsecond\n\nthird\n", encoding="utf-8")
    manifest = ingest([src], "wikipedia", tmp_path / "out")
    assert _texts(manifest) == ["first line\nstill first", "second", "third"]


def test_ingest_unreadable_path_is_hard_failure(tmp_path):
    with pytest.raises(AppException) as exc:
        ingest([tmp_path / "missing.jsonl"], "web_corpus", tmp_path / "out")
    assert exc.value.error_code is ErrorCode.CORPUS_PATH_UNREADABLE


def test_ingest_ids_are_unique_and_content_independent(tmp_path):
    a = _write_jsonl(tmp_path / "a.jsonl", ["same", "same", "other"])
    manifest = ingest([a], "web_corpus", tmp_path / "out")
    ids = [d.id for d in iter_documents(manifest)]
    assert len(set(ids)) == 3
    (tmp_path / "b").mkdir()
    b = _write_jsonl(tmp_path / "b" / "a.jsonl", ["x", "y", "z"])
    again = ingest([b], "web_corpus", tmp_path / "out2")
    assert [d.id for d in iter_documents(again)] == ids


def test_ingest_rolls_over_shards(tmp_path):
    src = _write_jsonl(tmp_path / "a.jsonl", ["a" * 10] * 5)
    manifest = ingest([src], "web_corpus", tmp_path / "out", shard_bytes=20)
    assert [s.document_count for s in manifest.shards] == [2, 2, 1]
    assert manifest.total_bytes == sum(s.byte_count for s in manifest.shards)


def test_manifest_reloads_from_directory(tmp_path):
    src = _write_jsonl(tmp_path / "a.jsonl", ["one", "two"])
    manifest = ingest([src], "web_corpus", tmp_path / "out")
    reloaded = CorpusManifest.load(tmp_path / "out")
    assert reloaded.model_dump() == manifest.model_dump()
    assert _texts(reloaded) == ["one", "two"]


def test_manifest_rejects_inconsistent_totals():
    with pytest.raises(ValueError):
        CorpusManifest(shards=[{"path": "a", "document_count": 1, "byte_count": 3}], total_bytes=4, document_count=1)


def test_dedup_keeps_first_occurrence(tmp_path):
    src = _write_jsonl(tmp_path / "a.jsonl", ["A", "B", "A"])
    manifest = ingest([src], "web_corpus", tmp_path / "in")
    result = dedup_exact(manifest, tmp_path / "dedup")
    assert _texts(result) == ["A", "B"]
    assert result.dedup_fingerprint_count == 2


def test_dedup_ignores_trailing_whitespace_only(tmp_path):
    src = _write_jsonl(tmp_path / "a.jsonl", ["text", "text  \n", " text"])
    result = dedup_exact(ingest([src], "web_corpus", tmp_path / "in"), tmp_path / "dedup")
    assert _texts(result) == ["text", " text"]


def test_dedup_trims_unicode_trailing_whitespace(tmp_path):
    src = _write_jsonl(tmp_path / "a.jsonl", ["שלום", "שלום\u00a0", "שלום\u3000", " שלום"])
    result = dedup_exact(ingest([src], "web_corpus", tmp_path / "in"), tmp_path / "dedup")
    assert _texts(result) == ["שלום", " שלום"]
    assert result.dedup_fingerprint_count == 2


def test_dedup_planted_duplicates(tmp_path):
    rng = random.Random(7)
    unique = [f"doc-{i}-{rng.random()}" for i in range(900)]
    planted = unique + [rng.choice(unique) for _ in range(100)]
    rng.shuffle(planted)
    src = _write_jsonl(tmp_path / "a.jsonl", planted)
    manifest = ingest([src], "web_corpus", tmp_path / "in", shard_bytes=2000)
    result = dedup_exact(manifest, tmp_path / "dedup")
    assert result.document_count == 900
    assert set(_texts(result)) == set(unique)


def test_dedup_is_idempotent(tmp_path):
    src = _write_jsonl(tmp_path / "a.jsonl", ["A", "B", "A", "C", "B"])
    once = dedup_exact(ingest([src], "web_corpus", tmp_path / "in"), tmp_path / "once")
    twice = dedup_exact(once, tmp_path / "twice")
    assert _texts(once) == _texts(twice)
    assert once.model_dump() == twice.model_dump()


def test_shuffle_is_deterministic_and_preserves_multiset(tmp_path):
    texts = [f"document {i}" for i in range(50)]
    manifest = ingest([_write_jsonl(tmp_path / "a.jsonl", texts)], "web_corpus", tmp_path / "in")
    first = shuffle(manifest, 1, tmp_path / "s1")
    again = shuffle(manifest, 1, tmp_path / "s1b")
    other = shuffle(manifest, 2, tmp_path / "s2")
    assert _texts(first) == _texts(again)
    assert _texts(first) != _texts(other)
    assert Counter(_texts(first)) == Counter(texts)
    assert first.shuffle_seed == 1


def test_shuffle_singleton_unchanged(tmp_path):
    manifest = ingest([_write_jsonl(tmp_path / "a.jsonl", ["only"])], "web_corpus", tmp_path / "in")
    assert _texts(shuffle(manifest, 99, tmp_path / "s")) == ["only"]


def test_shuffle_in_place_directory(tmp_path):
    texts = [f"d{i}" for i in range(20)]
    manifest = ingest([_write_jsonl(tmp_path / "a.jsonl", texts)], "web_corpus", tmp_path / "work")
    first = shuffle(manifest, 5, tmp_path / "work")
    second = shuffle(first, 5, tmp_path / "work")
    assert Counter(_texts(second)) == Counter(texts)


def test_sample_threshold_crossing(tmp_path):
    manifest = ingest([_write_jsonl(tmp_path / "a.jsonl", ["aaaaa", "bbbbb", "ccccc"])], "web_corpus", tmp_path / "in")
    sample = sample_bytes(manifest, 8, seed=3, output_dir=tmp_path / "sample")
    assert sample.document_count == 2
    assert sample.total_bytes == 10
    assert not sample.undersized


def test_sample_saturates_with_undersized_flag(tmp_path):
    manifest = ingest([_write_jsonl(tmp_path / "a.jsonl", ["aa", "bb"])], "web_corpus", tmp_path / "in")
    sample = sample_bytes(manifest, 100, seed=3, output_dir=tmp_path / "sample")
    assert sample.undersized
    assert sample.document_count == 2


def test_sample_target_equal_to_corpus_size_is_not_undersized(tmp_path):
    manifest = ingest([_write_jsonl(tmp_path / "a.jsonl", ["aa", "bbb"])], "web_corpus", tmp_path / "in")
    sample = sample_bytes(manifest, manifest.total_bytes, seed=3, output_dir=tmp_path / "sample")
    assert not sample.undersized
    assert sample.document_count == 2
    assert sample.total_bytes == 5


def test_sample_bounds_and_determinism(tmp_path):
    rng = random.Random(11)
    texts = ["x" * rng.randint(1, 40) for _ in range(300)]
    manifest = ingest([_write_jsonl(tmp_path / "a.jsonl", texts)], "web_corpus", tmp_path / "in")
    target = 2000
    first = sample_bytes(manifest, target, seed=8, output_dir=tmp_path / "s1")
    second = sample_bytes(manifest, target, seed=8, output_dir=tmp_path / "s2")
    assert target <= first.total_bytes < target + manifest.max_document_bytes
    assert first.model_dump() == second.model_dump()


def test_sample_draws_from_both_sources(tmp_path):
    web = ingest([_write_jsonl(tmp_path / "web.jsonl", [f"w{i:03d}" for i in range(200)])], "web_corpus", tmp_path / "web")
    wiki = ingest([_write_jsonl(tmp_path / "wiki.jsonl", [f"k{i:03d}" for i in range(50)])], "wikipedia", tmp_path / "wiki")
    merged = merge_manifests([web, wiki], tmp_path / "all")
    assert merged.total_bytes == web.total_bytes + wiki.total_bytes
    sample = sample_bytes(merged, 400, seed=1, output_dir=tmp_path / "sample")
    assert set(sample.source_documents) == {"web_corpus", "wikipedia"}


def test_sample_rejects_non_positive_target(tmp_path):
    manifest = ingest([_write_jsonl(tmp_path / "a.jsonl", ["a"])], "web_corpus", tmp_path / "in")
    with pytest.raises(AppException) as exc:
        sample_bytes(manifest, 0, seed=1, output_dir=tmp_path / "s")
    assert exc.value.error_code is ErrorCode.SAMPLE_TARGET_INVALID


def test_outputs_do_not_depend_on_worker_count(tmp_path):
    files = [_write_jsonl(tmp_path / f"f{i}.jsonl", [f"{i}-{j}" for j in range(30)] + ["dup"]) for i in range(3)]
    results = []
    for workers in (1, 3):
        root = tmp_path / f"w{workers}"
        manifest = ingest(files, "web_corpus", root / "in", workers=workers, shard_bytes=64)
        deduped = dedup_exact(manifest, root / "dedup", workers=workers)
        shuffled = shuffle(deduped, 42, root / "shuf", workers=workers)
        results.append((manifest.model_dump(), deduped.model_dump(), shuffled.model_dump(), _texts(shuffled)))
    assert results[0] == results[1]
