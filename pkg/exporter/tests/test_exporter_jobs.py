import pytest

from hf_exporter.jobs import (
    MODEL_NAMES,
    AdapterConfig,
    ExportJob,
    TrainParams,
    validate_jobs,
)


def make_job(**kw):
    defaults = dict(
        model="codebert",
        language="java",
        out_path="out/logits.jsonl",
        cost_gflops_per_sample=1.0,
    )
    defaults.update(kw)
    return ExportJob(**defaults)


def test_model_name_map():
    assert MODEL_NAMES == {
        "unixcoder": "microsoft/unixcoder-base",
        "codebert": "microsoft/codebert-base",
        "graphcodebert": "microsoft/graphcodebert-base",
        "codeberta": "huggingface/CodeBERTa-small-v1",
    }
    assert make_job(model="unixcoder").hub_id == "microsoft/unixcoder-base"


def test_adapter_defaults():
    adapter = AdapterConfig()
    assert (adapter.r, adapter.alpha, adapter.dropout) == (16, 32.0, 0.1)


@pytest.mark.parametrize(
    "kw", [dict(r=0), dict(r=-2), dict(alpha=0.0), dict(dropout=1.0), dict(dropout=-0.1)]
)
def test_adapter_validation(kw):
    with pytest.raises(ValueError):
        AdapterConfig(**kw)


def test_train_defaults():
    cfg = TrainParams()
    assert cfg.gamma == 2.0
    assert cfg.epochs == 20
    assert cfg.batch_size == 16
    assert cfg.learning_rate == 2e-4
    assert cfg.weight_decay == 0.01
    assert cfg.adam_epsilon == 1e-8
    assert cfg.warmup_fraction == 0.10
    assert cfg.patience == 3
    assert cfg.seed == 0


def test_train_zero_epochs_allowed():
    assert TrainParams(epochs=0).epochs == 0


@pytest.mark.parametrize(
    "kw",
    [
        dict(epochs=-1),
        dict(gamma=-0.5),
        dict(warmup_fraction=1.0),
        dict(batch_size=0),
        dict(patience=0),
    ],
)
def test_train_validation(kw):
    with pytest.raises(ValueError):
        TrainParams(**kw)


def test_job_default_name():
    assert make_job().name == "codebert-java"
    assert make_job(name="mine").name == "mine"


@pytest.mark.parametrize(
    "kw,match",
    [
        (dict(model="bert"), "unknown model"),
        (dict(language="ruby"), "unknown language"),
        (dict(cost_gflops_per_sample=-1.0), "cost_gflops_per_sample"),
        (dict(max_length=0), "max_length"),
        (dict(tokenizer="word"), "tokenizer"),
    ],
)
def test_job_validation(kw, match):
    with pytest.raises(ValueError, match=match):
        make_job(**kw)


def test_validate_jobs_rejects_shared_output():
    a = make_job(out_path="x.jsonl")
    b = make_job(model="unixcoder", out_path="x.jsonl")
    with pytest.raises(ValueError, match="duplicate output path"):
        validate_jobs([a, b])


def test_validate_jobs_rejects_repeated_pair():
    a = make_job(out_path="a.jsonl")
    b = make_job(out_path="b.jsonl")
    with pytest.raises(ValueError, match="duplicate job"):
        validate_jobs([a, b])


def test_validate_jobs_accepts_distinct():
    validate_jobs(
        [
            make_job(out_path="a.jsonl"),
            make_job(model="unixcoder", out_path="b.jsonl"),
            make_job(language="python", out_path="c.jsonl"),
        ]
    )
