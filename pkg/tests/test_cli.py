import json

import pytest

from conftest import make_dataset
from khpolarity.cli import main
from khpolarity.corpus import load_dataset, save_dataset
from mock_endpoint import MockEndpoint, completion_payload


def run_cli(*argv):
    try:
        return main(list(argv))
    except SystemExit as exc:  # argparse exits on usage errors
        return exc.code


@pytest.fixture
def corpus_file(tmp_path):
    rows = [
        ("0000", "ម្ហូបឆ្ងាញ់ណាស់", "ឆ្ងាញ់", "positive"),
        ("0001", "សៀវភៅនេះអាក្រក់", None, "negative"),
        ("0002", "ថ្ងៃនេះថ្ងៃអាទិត្យ", None, "neutral"),
        ("0003", "ម្ហូបមិនសូវមានរសជាតិឆ្ងាញ់", None, "negative"),
    ]
    path = tmp_path / "corpus.jsonl"
    save_dataset(make_dataset(rows, name="mini"), path)
    return path


def echo_script(body):
    # answer with the gold-looking completion for anything mentioning ឆ្ងាញ់
    text = body["messages"][0]["content"]
    if "អាក្រក់" in text or "មិនសូវ" in text:
        return (200, "<think>\n\n</think>\nnegative")
    if "ឆ្ងាញ់" in text:
        return (200, "<think> Because the input text contains the following ឆ្ងាញ់ </think>\npositive")
    return (200, "<think>\n\n</think>\nneutral")


def test_usage_error_exits_1(capsys):
    assert run_cli("ingest") == 1  # missing required flags
    assert "error" in capsys.readouterr().err


def test_unknown_subcommand_exits_1():
    assert run_cli("frobnicate") == 1


def test_ingest_writes_output_and_manifest(tmp_path, corpus_file, capsys):
    out = tmp_path / "ingested.jsonl"
    assert run_cli("ingest", "--input", str(corpus_file), "--output", str(out)) == 0
    assert "ingested 4 records" in capsys.readouterr().out
    manifest = json.loads((tmp_path / "ingested.jsonl.manifest.json").read_text(encoding="utf-8"))
    assert manifest["command"] == "ingest"
    assert str(corpus_file) in manifest["inputs"]
    assert str(out) in manifest["outputs"]
    assert len(manifest["config_hash"]) == 64


def test_ingest_missing_file_exits_1(tmp_path, capsys):
    code = run_cli("ingest", "--input", str(tmp_path / "nope.jsonl"),
                   "--output", str(tmp_path / "out.jsonl"))
    assert code == 1
    assert "nope.jsonl" in capsys.readouterr().err


def test_ingest_csv(tmp_path, capsys):
    src = tmp_path / "rows.csv"
    src.write_text("text,reasoning,label\nល្អណាស់,ល្អ,positive\n", encoding="utf-8")
    out = tmp_path / "out.jsonl"
    assert run_cli("ingest", "--input", str(src), "--format", "csv", "--output", str(out)) == 0
    assert load_dataset(out).records[0].label.value == "positive"


def test_clean_normalizes_text(tmp_path, capsys):
    src = tmp_path / "raw.jsonl"
    save_dataset(make_dataset([("a", "SO GOOD!!! ម្ហូប។ 😀", None, None)]), src)
    out = tmp_path / "clean.jsonl"
    assert run_cli("clean", "--input", str(src), "--output", str(out)) == 0
    assert load_dataset(out).records[0].text == "so good ម្ហូប"


def test_autolabel_assigns_provisional_labels(tmp_path, corpus_file, capsys):
    out = tmp_path / "labeled.jsonl"
    assert run_cli("autolabel", "--input", str(corpus_file), "--output", str(out)) == 0
    ds = load_dataset(out)
    assert all(r.provisional_label is not None for r in ds.records)
    assert all(r.needs_review for r in ds.records)
    assert "auto-labeled 4 records" in capsys.readouterr().out


def test_split_counts_and_manifest_seed(tmp_path, capsys):
    src = tmp_path / "big.jsonl"
    save_dataset(make_dataset((str(i), f"t {i}", None, None) for i in range(100)), src)
    out_train, out_test = tmp_path / "train.jsonl", tmp_path / "test.jsonl"
    code = run_cli("split", "--input", str(src), "--output-train", str(out_train),
                   "--output-test", str(out_test), "--test-fraction", "0.1", "--seed", "21")
    assert code == 0
    assert len(load_dataset(out_train).records) == 90
    assert len(load_dataset(out_test).records) == 10
    manifest = json.loads((tmp_path / "train.jsonl.manifest.json").read_text(encoding="utf-8"))
    assert manifest["seed"] == 21
    assert str(out_test) in manifest["outputs"]


def test_export_train_writes_conversations(tmp_path, corpus_file, capsys):
    out = tmp_path / "train.jsonl"
    assert run_cli("export-train", "--input", str(corpus_file), "--output", str(out)) == 0
    assert "1 with reasoning, 3 without" in capsys.readouterr().out
    first = json.loads(out.read_text(encoding="utf-8").splitlines()[0])
    assert [m["role"] for m in first["messages"]] == ["user", "assistant"]
    assert (tmp_path / "train.recipe.json").exists()


def test_export_train_unlabeled_exits_1(tmp_path, capsys):
    src = tmp_path / "unlabeled.jsonl"
    save_dataset(make_dataset([("a", "x", None, None)]), src)
    assert run_cli("export-train", "--input", str(src), "--output", str(tmp_path / "t.jsonl")) == 1


def test_classify_single_text(capsys):
    with MockEndpoint(echo_script) as mock:
        code = run_cli("classify", "--text", "ម្ហូបឆ្ងាញ់", "--endpoint", mock.base_url,
                       "--model", "m")
    assert code == 0
    out = capsys.readouterr().out
    assert "positive" in out and "ឆ្ងាញ់" in out


def test_classify_batch_writes_predictions(tmp_path, corpus_file, capsys):
    out = tmp_path / "preds.jsonl"
    with MockEndpoint(echo_script) as mock:
        code = run_cli("classify", "--input", str(corpus_file), "--output", str(out),
                       "--endpoint", mock.base_url, "--model", "m")
    assert code == 0
    rows = [json.loads(line) for line in out.read_text(encoding="utf-8").splitlines()]
    assert [r["label"] for r in rows] == ["positive", "negative", "neutral", "negative"]
    assert rows[0]["reasoning"] == "ឆ្ងាញ់"


def test_classify_uses_env_endpoint(corpus_file, tmp_path, monkeypatch, capsys):
    out = tmp_path / "preds.jsonl"
    with MockEndpoint(echo_script) as mock:
        monkeypatch.setenv("POLARITY_ENDPOINT", mock.base_url)
        code = run_cli("classify", "--input", str(corpus_file), "--output", str(out), "--model", "m")
    assert code == 0
    assert out.exists()


def test_flag_beats_env(corpus_file, tmp_path, monkeypatch):
    out = tmp_path / "preds.jsonl"
    with MockEndpoint(echo_script) as mock:
        monkeypatch.setenv("POLARITY_ENDPOINT", "http://127.0.0.1:9")  # dead
        code = run_cli("classify", "--input", str(corpus_file), "--output", str(out),
                       "--endpoint", mock.base_url, "--model", "m", "--timeout", "2")
    assert code == 0


def test_env_beats_config_file(corpus_file, tmp_path, monkeypatch):
    out = tmp_path / "preds.jsonl"
    config = tmp_path / "cfg.json"
    config.write_text(json.dumps({"endpoint": "http://127.0.0.1:9", "model": "m"}), encoding="utf-8")
    with MockEndpoint(echo_script) as mock:
        monkeypatch.setenv("POLARITY_ENDPOINT", mock.base_url)
        code = run_cli("classify", "--input", str(corpus_file), "--output", str(out),
                       "--config", str(config))
    assert code == 0


def test_classify_without_endpoint_exits_1(corpus_file, tmp_path, monkeypatch, capsys):
    monkeypatch.delenv("POLARITY_ENDPOINT", raising=False)
    code = run_cli("classify", "--input", str(corpus_file), "--output", str(tmp_path / "p.jsonl"))
    assert code == 1
    assert "no endpoint" in capsys.readouterr().err


def test_classify_dead_endpoint_exits_2(corpus_file, tmp_path, capsys):
    code = run_cli("classify", "--input", str(corpus_file), "--output", str(tmp_path / "p.jsonl"),
                   "--endpoint", "http://127.0.0.1:9", "--model", "m",
                   "--timeout", "0.5", "--retries", "0")
    assert code == 2


def test_classify_single_text_dead_endpoint_exits_2(capsys):
    code = run_cli("classify", "--text", "x", "--endpoint", "http://127.0.0.1:9",
                   "--model", "m", "--timeout", "0.5", "--retries", "0")
    assert code == 2


def test_eval_offline_predictions(tmp_path, corpus_file, capsys):
    preds = tmp_path / "preds.jsonl"
    rows = [
        {"id": "0000", "text": "t", "label": "positive", "reasoning": "ឆ្ងាញ់"},
        {"id": "0001", "text": "t", "label": "positive"},
        {"id": "0002", "text": "t", "label": None, "failed": "parse", "detail": "off-format"},
        {"id": "0003", "text": "t", "label": "negative"},
    ]
    preds.write_text("".join(json.dumps(r, ensure_ascii=False) + "\n" for r in rows), encoding="utf-8")
    report_path = tmp_path / "report.json"
    code = run_cli("eval", "--input", str(corpus_file), "--predictions", str(preds),
                   "--run-id", "offline", "--output", str(report_path))
    assert code == 0
    report = json.loads(report_path.read_text(encoding="utf-8"))
    assert report["n"] == 4
    assert report["accuracy"] == 0.5
    assert report["unparseable_count"] == 1
    out = capsys.readouterr().out
    assert "accuracy = 0.50" in out


def test_eval_against_endpoint(tmp_path, corpus_file, capsys):
    report_path = tmp_path / "report.json"
    with MockEndpoint(echo_script) as mock:
        code = run_cli("eval", "--input", str(corpus_file), "--endpoint", mock.base_url,
                       "--model", "m", "--run-id", "live", "--output", str(report_path))
    assert code == 0
    report = json.loads(report_path.read_text(encoding="utf-8"))
    assert report["accuracy"] == 1.0
    assert report["metadata"]["dataset_name"] == "mini"


def test_eval_predictions_length_mismatch_exits_1(tmp_path, corpus_file, capsys):
    preds = tmp_path / "short.jsonl"
    preds.write_text('{"id": "0000", "label": "positive"}\n', encoding="utf-8")
    code = run_cli("eval", "--input", str(corpus_file), "--predictions", str(preds))
    assert code == 1


def test_compare_reports(tmp_path, corpus_file, capsys):
    paths = []
    with MockEndpoint(echo_script) as mock:
        for run_id, mode in [("think", "thinking"), ("plain", "non-thinking")]:
            path = tmp_path / f"{run_id}.json"
            run_cli("eval", "--input", str(corpus_file), "--endpoint", mock.base_url,
                    "--model", "m", "--mode", mode, "--run-id", run_id, "--output", str(path))
            paths.append(str(path))
    capsys.readouterr()
    assert run_cli("compare", "--reports", *paths) == 0
    out = capsys.readouterr().out
    assert "| Model | Accuracy | Delta |" in out
    assert "**" in out  # highest run is bolded


def test_compare_needs_matching_datasets(tmp_path, capsys):
    a = {"run_id": "a", "mode": "thinking", "n": 1, "accuracy": 1.0, "per_class": {},
         "confusion": {}, "unparseable_count": 0, "metadata": {"dataset_name": "x"}}
    b = dict(a, run_id="b", metadata={"dataset_name": "y"})
    pa, pb = tmp_path / "a.json", tmp_path / "b.json"
    pa.write_text(json.dumps(a), encoding="utf-8")
    pb.write_text(json.dumps(b), encoding="utf-8")
    assert run_cli("compare", "--reports", str(pa), str(pb)) == 1


def test_lora_params_table(capsys):
    assert run_cli("lora-params", "--arch", "qwen3-1.7b") == 0
    out = capsys.readouterr().out
    assert "34,865,152" in out
    assert "match" in out
    assert "q" in out and "down" in out


def test_lora_params_discrepancy_reported(capsys):
    assert run_cli("lora-params", "--arch", "qwen3-8b") == 0
    out = capsys.readouterr().out
    assert "87,293,952" in out
    assert "discrepancy" in out


def test_lora_params_json(capsys):
    assert run_cli("lora-params", "--arch", "qwen3-4b", "--json") == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["computed_total"] == 66_060_288
    assert payload["verdict"] == "match"


def test_lora_params_custom_file_and_rank(tmp_path, capsys):
    path = tmp_path / "arch.json"
    path.write_text(json.dumps({
        "name": "toy", "hidden_size": 4, "num_layers": 2, "num_q_heads": 2,
        "num_kv_heads": 1, "head_dim": 3, "intermediate_size": 5,
    }), encoding="utf-8")
    assert run_cli("lora-params", "--arch", str(path), "--rank", "1", "--json") == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["computed_total"] == 122  # 61 per layer at rank 1, two layers
