import json
import math

import numpy as np

from corpus_forge import __version__
from corpus_forge.cli import dispatch
from corpus_forge.metrics import as_percentage, format_score
from corpus_forge.tokenizer import load_tokenizer

LABELS = ["positive", "neutral", "negative"]


def _run(capsys, *argv):
    code = dispatch(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def _write_sentiment(directory, name, count, offset=0):
    directory.mkdir(parents=True, exist_ok=True)
    rows = [f"משפט מספר {offset + i}\t{LABELS[i % 3]}" for i in range(count)]
    (directory / name).write_text("\n".join(rows) + "\n", encoding="utf-8")


def test_no_arguments_prints_usage(capsys):
    code, _, err = _run(capsys)
    assert code == 2
    assert "usage" in err


def test_unknown_flag(capsys):
    code, _, _ = _run(capsys, "--no-such-flag")
    assert code == 2


def test_group_without_command(capsys):
    code, _, err = _run(capsys, "corpus")
    assert code == 2
    assert "usage" in err


def test_version(capsys):
    code, out, _ = _run(capsys, "--version")
    assert code == 0
    assert __version__ in out


def test_missing_required_flag_is_a_usage_error(capsys):
    code, _, err = _run(capsys, "bpe", "decode", "1", "2")
    assert code == 2
    assert json.loads(err.strip().splitlines()[-1])["error_code"] == "E1001"


def test_bpe_train_writes_tokenizer_files(tmp_path, capsys):
    corpus = tmp_path / "corpus.txt"
    corpus.write_text("\n".join(["שלום עולם", "שלום לכולם", "עולם ומלואו"] * 20) + "\n", encoding="utf-8")
    out_dir = tmp_path / "tok"
    code, out, _ = _run(
        capsys, "--workers", "1", "bpe", "train", "--input", str(corpus), "--vocab-size", "300", "--output", str(out_dir)
    )
    assert code == 0
    report = json.loads(out)
    assert report["vocab_size"] <= 300
    for name in ("vocab.json", "merges.txt", "metadata.json"):
        assert (out_dir / name).is_file()

    code, out, _ = _run(capsys, "bpe", "encode", "--tokenizer", str(out_dir), "שלום עולם")
    assert code == 0
    ids = json.loads(out)
    code, out, _ = _run(capsys, "bpe", "decode", "--tokenizer", str(out_dir), *map(str, ids))
    assert code == 0
    assert out == "שלום עולם\n"


def test_params_command(capsys):
    code, out, _ = _run(capsys, "pretrain", "params", "--shape", "base", "--vocab-size", "52000")
    assert code == 0
    assert json.loads(out)["total"] == 125_978_112


def test_config_file_supplies_the_seed(tmp_path, capsys):
    _write_sentiment(tmp_path, "train.tsv", 50)
    config = tmp_path / "forge.json"
    config.write_text(json.dumps({"seed": 5}), encoding="utf-8")
    out_dir = tmp_path / "carved"
    code, out, _ = _run(capsys, "--config", str(config), "data", "carve", str(tmp_path / "train.tsv"), "--output", str(out_dir))
    assert code == 0
    assert json.loads(out) == {"train": 45, "valid": 5, "seed": 5}
    manifest = json.loads((out_dir / "split_manifest.json").read_text(encoding="utf-8"))
    assert manifest["seed"] == 5


def test_tune_run_resumes_from_the_journal(tmp_path, capsys):
    data = tmp_path / "smcd"
    _write_sentiment(data, "train.tsv", 30)
    _write_sentiment(data, "test.tsv", 9, offset=100)
    journal = tmp_path / "journal.jsonl"
    argv = [
        "--workers", "1", "--seed", "7",
        "tune", "run", "--task", "SMCD", "--trainer", "mock",
        "--data", str(data), "--journal", str(journal),
    ]
    code, out, _ = _run(capsys, *argv)
    assert code == 0
    first = json.loads(out)
    assert first["trials"] == 10
    assert first["new_trials"] == 11
    assert first["selected"]["batch_size"] == 16
    assert first["selected"]["learning_rate"] == 2e-5

    code, out, _ = _run(capsys, *argv)
    assert code == 0
    second = json.loads(out)
    assert second["new_trials"] == 0
    assert second["selected"] == first["selected"]

    code, out, _ = _run(capsys, "tune", "report", "--journal", str(journal))
    assert code == 0
    assert "| default | base | 89.50 |" in out

    code, out, _ = _run(capsys, "tune", "walltime", "--journal", str(journal))
    assert code == 0
    assert "| SMCD |" in out and "| Total |" in out


def test_schedule_dump_csv(tmp_path, capsys):
    path = tmp_path / "lr.csv"
    code, out, _ = _run(capsys, "pretrain", "schedule", "--preset", "pretrain_base", "--every", "50000", "--dump-csv", str(path))
    assert code == 0
    assert json.loads(out)["path"] == str(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert [line.split(",")[0] for line in lines[1:]] == ["0", "50000", "100000"]


def test_bucket_rejects_p95_above_max(capsys):
    code, _, err = _run(capsys, "metrics", "bucket", "100:120")
    assert code == 2
    assert json.loads(err.strip().splitlines()[-1])["error_code"] == "E1001"

    code, out, _ = _run(capsys, "metrics", "bucket", "120:100")
    assert code == 0
    assert json.loads(out) == {"bucket": 128}


def test_corpus_to_results_table(tmp_path, capsys):
    texts = [f"משפט לדוגמה מספר {i:03d} על מזג האוויר בעיר" for i in range(40)]
    size = len(texts[0].encode("utf-8"))
    raw = tmp_path / "raw.jsonl"
    raw.write_text("".join(json.dumps({"text": t}, ensure_ascii=False) + "\n" for t in texts + texts[:10]), encoding="utf-8")
    common = ["--workers", "1", "--seed", "3"]

    code, out, _ = _run(capsys, *common, "corpus", "ingest", str(raw), "--output", str(tmp_path / "ingested"))
    assert code == 0
    assert json.loads(out)["documents"] == 50
    code, out, _ = _run(capsys, *common, "corpus", "dedup", str(tmp_path / "ingested"), "--output", str(tmp_path / "dedup"))
    assert code == 0
    assert json.loads(out)["documents"] == 40
    code, out, _ = _run(capsys, *common, "corpus", "shuffle", str(tmp_path / "dedup"), "--output", str(tmp_path / "shuffled"))
    assert code == 0
    shuffled = json.loads(out)
    assert (shuffled["documents"], shuffled["bytes"], shuffled["shuffle_seed"]) == (40, 40 * size, 3)
    code, out, _ = _run(
        capsys, *common, "corpus", "sample", str(tmp_path / "shuffled"),
        "--target-bytes", str(10 * size), "--output", str(tmp_path / "sample"),
    )
    assert code == 0
    sample = json.loads(out)
    assert (sample["documents"], sample["bytes"], sample["undersized"]) == (10, 10 * size, False)
    manifest = json.loads((tmp_path / "sample" / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["total_bytes"] == 10 * size

    tok = tmp_path / "tok"
    code, out, _ = _run(
        capsys, *common, "bpe", "train", "--corpus", str(tmp_path / "shuffled"), "--vocab-size", "300", "--output", str(tok)
    )
    assert code == 0
    trained = json.loads(out)
    tokenizer = load_tokenizer(tok)
    assert tokenizer.vocab_size == trained["vocab_size"] == 5 + 256 + trained["merges"]
    assert tokenizer.decode(tokenizer.encode_ids(texts[7])) == texts[7]

    code, out, _ = _run(
        capsys, *common, "pretrain", "pack", "--tokenizer", str(tok), "--corpus", str(tmp_path / "sample"),
        "--sequence-length", "32", "--output", str(tmp_path / "packed"),
    )
    assert code == 0
    packed = json.loads(out)
    rows = np.load(tmp_path / "packed.npy")
    assert rows.shape == (packed["rows"], 32)
    assert packed["rows"] == math.ceil(packed["tokens"] / 32)
    assert int(np.load(tmp_path / "packed.lengths.npy").sum()) == packed["tokens"]

    masked = tmp_path / "masked.jsonl"
    code, out, _ = _run(
        capsys, *common, "pretrain", "mask", "--tokenizer", str(tok), "--packed", str(tmp_path / "packed.npy"),
        "--epochs", "2", "--batch-size", "4", "--output", str(masked),
    )
    assert code == 0
    assert json.loads(out)["rows"] == 2 * packed["rows"]
    assert len(masked.read_text(encoding="utf-8").splitlines()) == 2 * packed["rows"]

    data = tmp_path / "smcd"
    _write_sentiment(data, "train.tsv", 30)
    _write_sentiment(data, "test.tsv", 9, offset=100)
    journal = tmp_path / "journal.jsonl"
    code, out, _ = _run(
        capsys, *common, "tune", "run", "--task", "SMCD", "--trainer", "probe", "--tokenizer", str(tok),
        "--data", str(data), "--journal", str(journal),
        "--batch-sizes", "16", "--learning-rates", "2e-5", "--max-epochs", "2",
    )
    assert code == 0
    tuned = json.loads(out)
    assert (tuned["trainer"], tuned["trials"], tuned["new_trials"]) == ("probe", 1, 2)
    assert tuned["sequence_length"] == 64

    entries = [json.loads(line) for line in journal.read_text(encoding="utf-8").splitlines()]
    assert [e["role"] for e in entries] == ["grid", "selected"]
    assert entries[1]["config"]["sequence_length"] == 64
    assert entries[1]["trainer"] == "probe"
    test_score = entries[1]["test_score"]
    assert test_score == tuned["selected"]["test_score"]

    code, out, _ = _run(capsys, "tune", "report", "--journal", str(journal))
    assert code == 0
    assert f"| default | base | {format_score(as_percentage(test_score))} |" in out


def test_tune_run_sequence_length_override(tmp_path, capsys):
    data = tmp_path / "smcd"
    _write_sentiment(data, "train.tsv", 30)
    _write_sentiment(data, "test.tsv", 9, offset=100)
    code, out, _ = _run(
        capsys, "--workers", "1", "tune", "run", "--task", "SMCD", "--trainer", "mock", "--data", str(data),
        "--journal", str(tmp_path / "journal.jsonl"), "--batch-sizes", "16", "--learning-rates", "2e-5",
        "--sequence-length", "96",
    )
    assert code == 0
    assert json.loads(out)["sequence_length"] == 96
