import itertools
import random

import pytest

from corpus_forge.benchmarks import LabeledText, TaggedSentence
from corpus_forge.core.errors import AppException, ErrorCode
from corpus_forge.databases import get_trial_journal
from corpus_forge.services.trainers import MockTrainer, ProbeTrainer, TrainerFactory
from corpus_forge.tokenizer import train_from_iterator
from corpus_forge.tuning import (
    StopReason,
    Task,
    TaskData,
    TrialConfig,
    TrialRecord,
    TrialRole,
    build_results_table,
    default_grid,
    emit_report,
    enumerate_grid,
    format_duration,
    format_learning_rate,
    load_task_data,
    render_results,
    run_grid,
    run_trial,
    select_best,
    track_wall_time,
)

DATA = TaskData(Task.SMCD, train=["x"] * 40, valid=["y"] * 5, test=["z"] * 5, labels=("positive", "neutral", "negative"))


def _config(task=Task.SMCD, batch_size=16, learning_rate=2e-5, **values):
    values.setdefault("seed", 1)
    return TrialConfig.for_task(task, batch_size=batch_size, learning_rate=learning_rate, **values)


def _record(best_valid, learning_rate=2e-5, batch_size=16, index=0, **values):
    config = _config(batch_size=batch_size, learning_rate=learning_rate)
    return TrialRecord(
        config=config,
        config_hash=config.config_hash,
        trial_index=index,
        best_valid=best_valid,
        best_epoch=1 if best_valid is not None else 0,
        stop_reason=StopReason.EARLY_STOP if best_valid is not None else StopReason.ERROR,
        **values,
    )


def _selected(model, task, test_score, size_class="base", wall_time_ms=0):
    config = _config(task=task, model=model, size_class=size_class)
    return TrialRecord(
        config=config,
        config_hash=config.config_hash,
        role=TrialRole.SELECTED,
        best_valid=test_score,
        best_epoch=1,
        test_score=test_score,
        stop_reason=StopReason.EARLY_STOP,
        wall_time_ms=wall_time_ms,
    )


# ==================== grid ====================


def test_default_grid_has_ten_configs_in_order():
    configs = default_grid(Task.BMC, seed=3)
    assert len(configs) == 10
    assert [(c.batch_size, c.learning_rate) for c in configs[:5]] == [
        (16, 5e-6), (16, 7e-6), (16, 1e-5), (16, 2e-5), (16, 5e-5)
    ]
    assert {c.batch_size for c in configs[5:]} == {32}
    assert all(c.max_epochs == 30 and c.patience == 3 and c.seed == 3 for c in configs)
    assert configs[0].metric == "micro_f1" and configs[0].sequence_length == 64
    assert len({c.config_hash for c in configs}) == 10


def test_grid_orders_learning_rates_within_batch():
    configs = enumerate_grid([16], [2e-5, 1e-5], Task.SMCD, seed=0)
    assert [c.learning_rate for c in configs] == [1e-5, 2e-5]
    assert len(enumerate_grid([32], [3e-5], Task.SMCD)) == 1


def test_seed_modes_and_replicates():
    shared = enumerate_grid([16, 32], [1e-5], Task.SMCD, seed=9)
    assert {c.seed for c in shared} == {9}
    per_config = enumerate_grid([16, 32], [1e-5], Task.SMCD, seed=9, seed_mode="per_config")
    assert per_config[0].seed != per_config[1].seed
    replicated = enumerate_grid([16], [1e-5], Task.SMCD, seed=9, replicates=3)
    assert [c.replicate for c in replicated] == [0, 1, 2]
    assert replicated[0].seed == 9 and len({c.seed for c in replicated}) == 3


def _write_long_sentiment(directory, name, count, offset=0):
    labels = ["positive", "neutral", "negative"]
    rows = [f"{'א' * 120} {offset + i}\t{labels[i % 3]}" for i in range(count)]
    (directory / name).write_text("\n".join(rows) + "\n", encoding="utf-8")


def test_sequence_length_follows_the_measured_bucket(tmp_path):
    _write_long_sentiment(tmp_path, "train.tsv", 30)
    _write_long_sentiment(tmp_path, "test.tsv", 9, offset=100)
    # one merge, so every Hebrew letter stays two byte-level tokens
    tokenizer = train_from_iterator(["ab"] * 10, vocab_size=262).tokenizer

    data = load_task_data(Task.SMCD, tmp_path, tokenizer=tokenizer)
    assert data.sequence_length == 256
    measured = enumerate_grid([16], [2e-5], Task.SMCD, seed=0, data=data)
    assert measured[0].sequence_length == 256
    forced = enumerate_grid([16], [2e-5], Task.SMCD, seed=0, data=data, sequence_length=128)
    assert forced[0].sequence_length == 128
    assert forced[0].config_hash != measured[0].config_hash

    plain = load_task_data(Task.SMCD, tmp_path)
    assert plain.sequence_length is None
    assert enumerate_grid([16], [2e-5], Task.SMCD, seed=0, data=plain)[0].sequence_length == 192


def test_empty_grid_is_rejected():
    with pytest.raises(AppException) as info:
        enumerate_grid([], [1e-5], Task.SMCD)
    assert info.value.error_code is ErrorCode.GRID_INVALID


# ==================== single trial ====================


def test_early_stop_after_three_stale_epochs():
    trainer = MockTrainer({"curves": {"*": [0.50, 0.60, 0.59, 0.58, 0.57, 0.99]}})
    record = run_trial(_config(), trainer, DATA)
    assert record.stop_reason is StopReason.EARLY_STOP
    assert record.epochs_run == 5
    assert record.best_epoch == 2
    assert record.best_valid == 0.60
    assert record.test_score is None


def test_equal_score_is_not_an_improvement():
    trainer = MockTrainer({"curves": {"*": [0.5, 0.5, 0.5, 0.5]}})
    record = run_trial(_config(), trainer, DATA)
    assert record.epochs_run == 4 and record.best_epoch == 1


def test_monotone_scores_run_to_the_epoch_cap():
    curve = [round(0.5 + 0.01 * i, 6) for i in range(30)]
    record = run_trial(_config(), MockTrainer({"curves": {"*": curve}}), DATA)
    assert record.stop_reason is StopReason.EPOCH_CAP
    assert record.epochs_run == 30
    assert record.best_epoch == 30


def test_default_mock_trace_matches_hand_computation():
    record = run_trial(_config(), MockTrainer(), DATA, evaluate_test=True)
    assert record.per_epoch_valid_scores == [0.87, 0.88, 0.89, 0.9, 0.89, 0.88, 0.87]
    assert record.best_epoch == 4
    assert record.test_score == 0.895
    assert record.wall_time_ms == 7 * 60_000


def test_trainer_failure_becomes_error_record():
    trainer = MockTrainer({"fail": ["16:2e-05"]})
    record = run_trial(_config(), trainer, DATA, evaluate_test=True)
    assert record.stop_reason is StopReason.ERROR
    assert not record.succeeded
    assert record.test_score is None
    assert "RuntimeError" in record.error


# ==================== selection ====================


def test_tie_goes_to_lower_learning_rate():
    records = [
        _record(0.81, learning_rate=1e-5, index=0),
        _record(0.84, learning_rate=5e-5, index=1),
        _record(0.84, learning_rate=2e-5, index=2),
    ]
    assert select_best(records).trial_index == 2


def test_single_record_is_selected():
    record = _record(0.5)
    assert select_best([record]) is record


def test_failures_are_never_selected():
    with pytest.raises(AppException) as info:
        select_best([_record(None, error="boom")])
    assert info.value.error_code is ErrorCode.NO_SUCCESSFUL_TRIAL
    assert select_best([_record(None, index=0), _record(0.1, index=1)]).trial_index == 1


def _oracle(records):
    ok = [r for r in records if r.succeeded]
    top = max(r.best_valid for r in ok)
    ok = [r for r in ok if r.best_valid == top]
    lowest_lr = min(r.config.learning_rate for r in ok)
    ok = [r for r in ok if r.config.learning_rate == lowest_lr]
    lowest_bs = min(r.config.batch_size for r in ok)
    ok = [r for r in ok if r.config.batch_size == lowest_bs]
    return min(ok, key=lambda r: r.trial_index)


@pytest.mark.parametrize("seed", range(25))
def test_selection_matches_brute_force_and_ignores_order(seed):
    rng = random.Random(seed)
    grid = list(itertools.product([16, 32], [5e-6, 1e-5, 2e-5]))
    records = [
        _record(rng.choice([None, 0.7, 0.8, 0.8]), learning_rate=lr, batch_size=bs, index=i)
        for i, (bs, lr) in enumerate(grid)
    ]
    if not any(r.succeeded for r in records):
        records[0] = _record(0.5, learning_rate=grid[0][1], batch_size=grid[0][0], index=0)
    expected = _oracle(records)
    assert select_best(records).trial_index == expected.trial_index
    shuffled = records[:]
    rng.shuffle(shuffled)
    assert select_best(shuffled).trial_index == expected.trial_index


# ==================== grid runs and the journal ====================


def test_grid_run_resumes_without_new_trials(tmp_path):
    path = tmp_path / "journal.jsonl"
    configs = default_grid(Task.SMCD, seed=0)
    first = run_grid(configs, MockTrainer(), DATA, get_trial_journal(path))
    assert first.new_trials == 11
    assert (first.selected.config.batch_size, first.selected.config.learning_rate) == (16, 2e-5)
    assert first.selected.role is TrialRole.SELECTED
    assert first.selected.test_score == 0.895

    second = run_grid(configs, MockTrainer(), DATA, get_trial_journal(path))
    assert second.new_trials == 0
    assert second.selected == first.selected
    assert len(path.read_text(encoding="utf-8").splitlines()) == 11


def test_repeated_runs_write_identical_journals(tmp_path):
    configs = default_grid(Task.SMCD, seed=0)
    contents = []
    for run in range(3):
        path = tmp_path / f"run{run}.jsonl"
        run_grid(configs, MockTrainer(), DATA, get_trial_journal(path))
        contents.append(path.read_bytes())
    assert contents[0] == contents[1] == contents[2]


def test_worker_count_does_not_change_the_journal(tmp_path):
    configs = default_grid(Task.SMCD, seed=0)
    serial, parallel = tmp_path / "serial.jsonl", tmp_path / "parallel.jsonl"
    run_grid(configs, MockTrainer(), DATA, get_trial_journal(serial), workers=1)
    run_grid(configs, MockTrainer(), DATA, get_trial_journal(parallel), workers=3)
    assert serial.read_bytes() == parallel.read_bytes()


def test_grid_by_trainer_name(tmp_path):
    TrainerFactory.clear_cache()
    result = run_grid(
        enumerate_grid([16], [1e-5, 2e-5], Task.SMCD, seed=0),
        "mock",
        DATA,
        get_trial_journal(tmp_path / "j.jsonl"),
        trainer_options={"epoch_ms": 1000},
    )
    assert result.selected.config.learning_rate == 2e-5
    assert [r.trial_index for r in result.records] == [0, 1]


def test_partial_last_line_is_discarded(tmp_path):
    path = tmp_path / "journal.jsonl"
    configs = enumerate_grid([16], [1e-5, 2e-5], Task.SMCD, seed=0)
    run_grid(configs, MockTrainer(), DATA, get_trial_journal(path))
    complete = path.read_bytes()
    with open(path, "ab") as handle:
        handle.write(b'{"config_hash": "abc')
    journal = get_trial_journal(path)
    assert len(journal) == 3
    assert path.read_bytes() == complete
    assert run_grid(configs, MockTrainer(), DATA, journal).new_trials == 0


def test_corrupt_journal_line_is_reported(tmp_path):
    path = tmp_path / "broken.jsonl"
    path.write_text("not json\n", encoding="utf-8")
    with pytest.raises(AppException) as info:
        get_trial_journal(path)
    assert info.value.error_code is ErrorCode.JOURNAL_CORRUPT
    assert info.value.detail["line"] == 1


# ==================== reports ====================


def test_ner_average_is_rounded_half_up():
    records = [_selected("m", Task.BMC, 0.9333), _selected("m", Task.NEMO, 0.8706)]
    table = build_results_table(records)
    assert table.columns == ["BMC", "NEMO", "NER AVG"]
    text = render_results(table)
    assert "| m | base | 93.33 | 87.06 | 90.20 |" in text


def test_overall_average_needs_all_three_tasks():
    records = [
        _selected("m", Task.BMC, 0.9),
        _selected("m", Task.NEMO, 0.8),
        _selected("m", Task.SMCD, 0.7),
    ]
    table = build_results_table(records)
    assert table.columns == ["BMC", "NEMO", "NER AVG", "SMCD", "AVG"]
    assert table.cell("m", "AVG") == 80


def test_single_cell_table():
    table = build_results_table([_selected("solo", Task.SMCD, 0.91)])
    assert table.columns == ["SMCD"]
    assert "| solo | base | 91.00 |" in render_results(table)


def test_grid_trials_never_reach_the_results_table():
    grid_record = _record(0.99, test_score=0.99)
    assert build_results_table([grid_record]).rows == []


def test_best_and_second_best_marks():
    records = [
        _selected("a", Task.SMCD, 0.90),
        _selected("b", Task.SMCD, 0.80),
        _selected("c", Task.SMCD, 0.70),
        _selected("big", Task.SMCD, 0.60, size_class="large"),
    ]
    table = build_results_table(records)
    markdown = render_results(table)
    assert "**90.00**" in markdown and "<u>80.00</u>" in markdown
    assert "| c | base | 70.00 |" in markdown
    assert "| big | large | 60.00 |" in markdown
    latex = render_results(table, "csv")
    assert "\\textbf{90.00}" in latex and "\\underline{80.00}" in latex


def test_hyperparameter_table_formats_learning_rates():
    assert format_learning_rate(2e-5) == "2e-5"
    assert format_learning_rate(5e-6) == "5e-6"
    assert format_learning_rate(1.5e-5) == "1.5e-5"
    text = emit_report([_selected("m", Task.SMCD, 0.9)], kind="hyperparameters")
    assert "| m | 16 | 2e-5 |" in text


def test_wall_time_totals(tmp_path):
    records = [
        _selected("m", Task.BMC, 0.9, wall_time_ms=600_000),
        _selected("n", Task.BMC, 0.9, wall_time_ms=1_200_000),
    ]
    summary = track_wall_time(records)
    assert dict(summary.rows())["BMC"] == "0:30"
    assert dict(summary.rows())["NEMO"] == "0:00"
    assert summary.total_ms == sum(summary.per_task_ms.values()) == 1_800_000
    assert format_duration(0) == "0:00"
    assert format_duration(90 * 60_000 + 30_000) == "1:31"
    out = tmp_path / "walltime.md"
    emit_report(records, kind="walltime", path=out)
    assert "| Total | 0:30 |" in out.read_text(encoding="utf-8")


def test_unknown_report_kind():
    with pytest.raises(AppException):
        emit_report([], kind="pie")


# ==================== probe trainer ====================


def _sentiment_data():
    words = {0: "טוב", 1: "רגיל", 2: "רע"}
    rows = [LabeledText(f"היום {words[i % 3]} מאוד {j}", i % 3) for j in range(12) for i in range(3)]
    return TaskData(Task.SMCD, train=rows[:24], valid=rows[24:30], test=rows[30:], labels=("positive", "neutral", "negative"))


def test_probe_trainer_learns_separable_sentiment():
    data = _sentiment_data()
    config = _config(batch_size=4, learning_rate=5e-5, max_epochs=10)
    trainer = ProbeTrainer({"features": 1024})
    record = run_trial(config, trainer, data, evaluate_test=True)
    assert record.succeeded
    assert record.best_valid > 0.6
    assert 0.0 <= record.test_score <= 1.0
    again = run_trial(config, ProbeTrainer({"features": 1024}), data)
    assert again.per_epoch_valid_scores == record.per_epoch_valid_scores


def test_probe_trainer_tags_tokens():
    sentences = [
        TaggedSentence(("דני", "הלך", "הביתה"), ("B-PER", "O", "O")),
        TaggedSentence(("רינה", "כהן", "שרה"), ("B-PER", "I-PER", "O")),
    ] * 4
    data = TaskData(Task.NEMO, train=sentences[:6], valid=sentences[6:7], test=sentences[7:], labels=("O", "B-PER", "I-PER"))
    config = _config(task=Task.NEMO, batch_size=2, learning_rate=5e-5, max_epochs=3)
    record = run_trial(config, ProbeTrainer({"features": 512}), data, evaluate_test=True)
    assert record.succeeded
    assert 0.0 <= record.best_valid <= 1.0


class _TestSplitFails(MockTrainer):
    def evaluate(self, state, config, data, split):
        if split == "test":
            raise RuntimeError("test split unreadable")
        return super().evaluate(state, config, data, split)


def test_failed_confirmation_run_is_reported(tmp_path):
    configs = enumerate_grid([16], [1e-5, 2e-5], Task.SMCD, seed=0)
    journal = get_trial_journal(tmp_path / "journal.jsonl")
    with pytest.raises(AppException) as exc_info:
        run_grid(configs, _TestSplitFails(), DATA, journal, full_evaluation=False)
    assert exc_info.value.error_code is ErrorCode.TRIAL_FAILED
    assert exc_info.value.message_en == "Failed to confirm the selected trial"
    assert exc_info.value.detail["error"] == "RuntimeError: test split unreadable"
    assert journal.get(configs[1].config_hash, TrialRole.SELECTED.value)["stop_reason"] == "error"
