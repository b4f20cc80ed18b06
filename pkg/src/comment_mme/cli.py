"""Command-line front end and pipeline orchestration.

The `run` subcommand drives the full sequence: load data, preprocess,
collect provider logits (training the built-in baseline or reading logit
files), fit ensemble weights on the validation split, tune thresholds on
the ensemble's validation probabilities, evaluate the test split, and
write six artifacts into the output directory:

    weights.json  thresholds.json  report.csv
    heatmap.svg   heatmap.csv      contribution.csv

Every artifact starts with a comment header recording the artifact
version, the run seed, and a hash of the resolved configuration, and no
artifact embeds a timestamp, so a rerun with the same config produces
byte-identical files.

Exit codes: 0 success, 2 config error, 3 data error, 4 provider error,
5 fitting error. COMMENT_MME_SEED overrides the config seed; an explicit
--seed flag beats both.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import corpus, ensemble, metrics, provider, textprep, thresholds
from .corpus import Dataset, Language, SentenceRecord, Split, taxonomy_for
from .errors import CommentMMEError, ConfigError
from .metrics import EvalReport
from .provider import LogitMatrix, ProviderManifest, TrainConfig

ARTIFACT_VERSION = "comment-mme artifact v1"

DEFAULT_T_MAX_MS = 45.13
DEFAULT_G_MAX = 235759.28

SEED_ENV_VAR = "COMMENT_MME_SEED"

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_PROVIDER = 4
EXIT_FITTING = 5

_STAGE_CODES = {
    "config": EXIT_CONFIG,
    "data": EXIT_DATA,
    "provider": EXIT_PROVIDER,
    "fitting": EXIT_FITTING,
}


class PipelineError(Exception):
    """A stage failure carrying its exit code."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
        self.exit_code = _STAGE_CODES[stage]


@dataclass(frozen=True)
class RunConfig:
    """Resolved configuration for one full pipeline run."""

    dataset: Path
    providers: tuple[ProviderManifest, ...]
    out_dir: Path
    seed: int = 0
    ensemble_method: str = "simplex_grid"
    grid: thresholds.ThresholdGrid = field(default_factory=thresholds.ThresholdGrid)
    t_max_ms: float = DEFAULT_T_MAX_MS
    g_max: float = DEFAULT_G_MAX
    runtime_ms_per_sample: float | None = None
    prep: dict[Language, textprep.PrepConfig] = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.providers:
            raise ConfigError("at least one provider is required")
        names = [m.descriptor.name for m in self.providers]
        if len(set(names)) != len(names):
            raise ConfigError(f"duplicate provider names in {names}")
        if self.ensemble_method not in ("simplex_grid", "gradient"):
            raise ConfigError(f"unknown ensemble method {self.ensemble_method!r}")
        if self.t_max_ms <= 0 or self.g_max <= 0:
            raise ConfigError("t_max_ms and g_max must be positive")
        if not self.dataset.exists():
            raise ConfigError(f"dataset not found: {self.dataset}")

    def config_hash(self) -> str:
        canonical = json.dumps(self.raw, sort_keys=True, default=str)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]

    def header(self) -> list[str]:
        return [ARTIFACT_VERSION, f"seed={self.seed}", f"config={self.config_hash()}"]


_TRAIN_KEYS = {
    "gamma",
    "epochs",
    "batch_size",
    "learning_rate",
    "weight_decay",
    "adam_epsilon",
    "warmup_fraction",
    "patience",
}


def _train_config(manifest: ProviderManifest) -> tuple[TrainConfig, int]:
    """TrainConfig plus feature_dim from a builtin-baseline manifest entry."""
    overrides = dict(manifest.train_overrides)
    feature_dim = int(overrides.pop("feature_dim", provider.DEFAULT_FEATURE_DIM))
    unknown = set(overrides) - _TRAIN_KEYS
    if unknown:
        raise ConfigError(
            f"provider {manifest.descriptor.name!r}: unknown train keys {sorted(unknown)}"
        )
    return TrainConfig(seed=manifest.seed, **overrides), feature_dim


def load_run_config(
    path: str | Path,
    seed_override: int | None = None,
    overrides: dict | None = None,
) -> RunConfig:
    """Read a config JSON file and apply env/flag overrides.

    Precedence for the seed: --seed flag, then COMMENT_MME_SEED, then the
    config file. Other overrides replace config keys wholesale.
    """
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config not found: {p}")
    text = "\n".join(
        l for l in p.read_text(encoding="utf-8").splitlines() if not l.lstrip().startswith("//")
    )
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{p}: invalid JSON: {e.msg}") from e
    if not isinstance(raw, dict):
        raise ConfigError(f"{p}: config must be a JSON object")
    for key, value in (overrides or {}).items():
        if value is not None:
            raw[key] = value
    env_seed = os.environ.get(SEED_ENV_VAR)
    if seed_override is not None:
        raw["seed"] = seed_override
    elif env_seed is not None:
        try:
            raw["seed"] = int(env_seed)
        except ValueError:
            raise ConfigError(f"{SEED_ENV_VAR} must be an integer, got {env_seed!r}")
    return build_run_config(raw, base_dir=p.parent)


def build_run_config(raw: dict, base_dir: Path | None = None) -> RunConfig:
    base = base_dir or Path(".")

    def resolve(raw_path: str) -> Path:
        q = Path(raw_path)
        return q if q.is_absolute() else base / q

    if "dataset" not in raw or "providers" not in raw or "out_dir" not in raw:
        raise ConfigError("config requires dataset, providers, and out_dir")
    try:
        manifests = tuple(
            provider.parse_manifest(entry, base_dir=base) for entry in raw["providers"]
        )
    except CommentMMEError as e:
        raise ConfigError(str(e)) from e

    grid_raw = raw.get("grid", "0.10:0.90:0.02")
    if isinstance(grid_raw, str):
        grid = thresholds.parse_grid(grid_raw)
    else:
        grid = thresholds.ThresholdGrid(
            start=float(grid_raw.get("start", 0.10)),
            end=float(grid_raw.get("end", 0.90)),
            step=float(grid_raw.get("step", 0.02)),
        )

    prep: dict[Language, textprep.PrepConfig] = {}
    for lang_raw, toggles in raw.get("prep", {}).items():
        language = Language(lang_raw)
        prep[language] = textprep.PrepConfig(
            language=language,
            enable_case_split=bool(toggles.get("case_split", True)),
            enable_caret_fix=bool(toggles.get("caret_fix", True)),
            enable_segmentation=bool(toggles.get("segmentation", False)),
        )

    runtime = raw.get("runtime_ms_per_sample")
    return RunConfig(
        dataset=resolve(str(raw["dataset"])),
        providers=manifests,
        out_dir=resolve(str(raw["out_dir"])),
        seed=int(raw.get("seed", 0)),
        ensemble_method=str(raw.get("ensemble_method", "simplex_grid")),
        grid=grid,
        t_max_ms=float(raw.get("t_max_ms", DEFAULT_T_MAX_MS)),
        g_max=float(raw.get("g_max", DEFAULT_G_MAX)),
        runtime_ms_per_sample=None if runtime is None else float(runtime),
        prep=prep,
        raw=raw,
    )


# --- pipeline ----------------------------------------------------------------


def _apply_prep(dataset: Dataset, config: RunConfig) -> Dataset:
    if not config.prep:
        return dataset
    records = []
    for record in dataset.records:
        cfg = config.prep.get(record.language)
        records.append(textprep.preprocess(record, cfg) if cfg else record)
    return Dataset(records=tuple(records))


def _provider_logits(
    manifest: ProviderManifest,
    dataset: Dataset,
    languages: list[Language],
) -> dict[Language, dict[Split, LogitMatrix]]:
    """Valid- and test-split logits for one provider, keyed by language."""
    name = manifest.descriptor.name
    out: dict[Language, dict[Split, LogitMatrix]] = {}
    if manifest.descriptor.source == "builtin_baseline":
        train_config, feature_dim = _train_config(manifest)
        for language in languages:
            model = provider.train_baseline(dataset, language, train_config, feature_dim)
            out[language] = {
                split: provider.predict_logits(model, dataset.subset(language, split), name)
                for split in (Split.VALID, Split.TEST)
            }
        return out
    for language in languages:
        if language not in manifest.logits:
            raise ConfigError(f"provider {name!r}: no logits path for {language.value}")
        path = manifest.logits[language]
        if not path.exists():
            raise ConfigError(f"provider {name!r}: logits file not found: {path}")
        full = provider.load_logits(path, taxonomy_for(language), provider=name)
        out[language] = {
            split: full.select([r.id for r in dataset.subset(language, split)])
            for split in (Split.VALID, Split.TEST)
        }
    return out


def _stage(stage: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except PipelineError:
        raise
    except (CommentMMEError, ValueError, OSError) as e:
        raise PipelineError(stage, str(e)) from e


def run_pipeline(config: RunConfig) -> EvalReport:
    """Execute every stage and write the six artifacts. Returns the report."""
    dataset = _stage("data", corpus.load_dataset, config.dataset)
    dataset = _stage("data", _apply_prep, dataset, config)
    languages = dataset.languages()
    if not languages:
        raise PipelineError("data", "dataset is empty")

    per_provider = [
        _stage("provider", _provider_logits, manifest, dataset, languages)
        for manifest in config.providers
    ]

    def fit_all() -> tuple[ensemble.EnsembleWeights, thresholds.ThresholdTable]:
        weight_parts = []
        threshold_entries: dict = {}
        for language in languages:
            valid_logits = [p[language][Split.VALID] for p in per_provider]
            y_valid = corpus.label_matrix(dataset, language, Split.VALID)
            weight_parts.append(
                ensemble.fit_weights(
                    valid_logits,
                    y_valid,
                    method=config.ensemble_method,
                    seed=config.seed,
                )
            )
            probs = ensemble.combine(valid_logits, weight_parts[-1])
            table = thresholds.tune_thresholds(probs, y_valid, config.grid)
            threshold_entries.update(table.entries)
        return (
            ensemble.merge_weights(weight_parts),
            thresholds.ThresholdTable(grid=config.grid, entries=threshold_entries),
        )

    weights, table = _stage("fitting", fit_all)

    def evaluate() -> EvalReport:
        outcomes: dict[tuple[Language, str], metrics.CategoryOutcome] = {}
        n_test = 0
        test_inputs: dict[Language, list[LogitMatrix]] = {}
        for language in languages:
            test_logits = [p[language][Split.TEST] for p in per_provider]
            test_inputs[language] = test_logits
            y_test = corpus.label_matrix(dataset, language, Split.TEST)
            probs = ensemble.combine(test_logits, weights)
            preds = thresholds.apply_thresholds(probs, table)
            n_test += len(probs.ids)
            for j, category in enumerate(taxonomy_for(language).categories):
                outcomes[(language, category)] = metrics.category_outcome(
                    preds[:, j], y_test[:, j]
                )

        def classify(records: list) -> None:
            for language in languages:
                probs = ensemble.combine(test_inputs[language], weights)
                thresholds.apply_thresholds(probs, table)

        if config.runtime_ms_per_sample is not None:
            runtime = config.runtime_ms_per_sample
        else:
            test_records = [r for l in languages for r in dataset.subset(l, Split.TEST)]
            runtime = metrics.measure_runtime(classify, test_records)
        gflops = metrics.total_gflops(
            [m.descriptor for m in config.providers], n_test
        )
        return metrics.build_report(outcomes, runtime, gflops, config.t_max_ms, config.g_max)

    report = _stage("data", evaluate)
    _stage("data", write_artifacts, config, weights, table, report)
    return report


def write_artifacts(
    config: RunConfig,
    weights: ensemble.EnsembleWeights,
    table: thresholds.ThresholdTable,
    report: EvalReport,
) -> None:
    out = config.out_dir
    out.mkdir(parents=True, exist_ok=True)
    header = config.header()
    ensemble.save_weights(weights, out / "weights.json", header)
    thresholds.save_thresholds(table, out / "thresholds.json", header)
    metrics.write_report_csv(report, out / "report.csv", header)
    emit_heatmap(weights, out / "heatmap.svg", out / "heatmap.csv", header)
    emit_contribution(weights, out / "contribution.csv", header)


# --- figures ------------------------------------------------------------------


_CELL_W = 64
_CELL_H = 24
_LEFT = 150
_TOP = 30


def _weight_rows(weights: ensemble.EnsembleWeights) -> list[tuple[str, np.ndarray]]:
    rows = []
    for language, category in corpus.all_language_categories():
        key = (language, category)
        if key in weights.table:
            rows.append((f"{language.value}/{category}", weights.table[key]))
    return rows


def emit_heatmap(
    weights: ensemble.EnsembleWeights,
    svg_path: str | Path,
    csv_path: str | Path | None = None,
    header: list[str] | None = None,
) -> None:
    """Categories x providers weight grid as a hand-built SVG plus a CSV twin.

    Cell fill is the grayscale value 255*(1-w) (quantized to an integer),
    so weight 1 renders black and weight 0 white; each cell is labeled
    with w at 2 decimals. Output is deterministic for a fixed table.
    """
    rows = _weight_rows(weights)
    if not rows:
        raise ValueError("empty weight table")
    svg_path = Path(svg_path)
    csv_path = Path(csv_path) if csv_path is not None else svg_path.with_suffix(".csv")

    providers = weights.providers
    width = _LEFT + _CELL_W * len(providers) + 10
    height = _TOP + _CELL_H * len(rows) + 10
    lines = [f"<!-- {line} -->" for line in header or []]
    lines.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="monospace" font-size="11">'
    )
    for k, name in enumerate(providers):
        x = _LEFT + k * _CELL_W + _CELL_W / 2
        lines.append(
            f'<text x="{x:.2f}" y="{_TOP - 10:.2f}" text-anchor="middle">{name}</text>'
        )
    for i, (label, w) in enumerate(rows):
        y = _TOP + i * _CELL_H
        lines.append(
            f'<text x="{_LEFT - 6:.2f}" y="{y + _CELL_H / 2 + 4:.2f}" '
            f'text-anchor="end">{label}</text>'
        )
        for k in range(len(providers)):
            value = float(w[k])
            gray = int(round(255 * (1.0 - value)))
            fill = f"rgb({gray},{gray},{gray})"
            text_fill = "#000000" if gray >= 128 else "#ffffff"
            x = _LEFT + k * _CELL_W
            lines.append(
                f'<rect x="{x:.2f}" y="{y:.2f}" width="{_CELL_W}" height="{_CELL_H}" '
                f'fill="{fill}" stroke="#808080"/>'
            )
            lines.append(
                f'<text x="{x + _CELL_W / 2:.2f}" y="{y + _CELL_H / 2 + 4:.2f}" '
                f'text-anchor="middle" fill="{text_fill}">{value:.2f}</text>'
            )
    lines.append("</svg>")
    svg_path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    csv_lines = [f"# {line}" for line in header or []]
    csv_lines.append("category," + ",".join(providers))
    for label, w in rows:
        csv_lines.append(label + "," + ",".join(repr(float(v)) for v in w))
    csv_path.write_text("\n".join(csv_lines) + "\n", encoding="utf-8")


def emit_contribution(
    weights: ensemble.EnsembleWeights,
    path: str | Path,
    header: list[str] | None = None,
) -> None:
    """Mean weight per provider across all categories; the means sum to 1."""
    rows = _weight_rows(weights)
    if not rows:
        raise ValueError("empty weight table")
    stacked = np.stack([w for _, w in rows])
    means = stacked.mean(axis=0)
    lines = [f"# {line}" for line in header or []]
    lines.append("provider,mean_weight")
    for name, value in zip(weights.providers, means):
        lines.append(f"{name},{float(value)!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# --- subcommands --------------------------------------------------------------


def _cmd_ingest(args: argparse.Namespace) -> int:
    dataset = corpus.load_dataset(args.data)
    for language in dataset.languages():
        counts = {
            split.value: len(dataset.subset(language, split)) for split in Split
        }
        print(f"{language.value}: {counts}")
    print(f"total: {len(dataset.records)}")
    return 0


def _check_golden_dir(golden_dir: str) -> int:
    """Run every <lang>__<name>.raw.txt fixture and diff against .expected.txt."""
    root = Path(golden_dir)
    raw_paths = sorted(root.glob("*.raw.txt"))
    if not raw_paths:
        raise ConfigError(f"no *.raw.txt fixtures under {root}")
    failures = 0
    for raw_path in raw_paths:
        name = raw_path.name[: -len(".raw.txt")]
        language = Language(name.split("__", 1)[0])
        raw = raw_path.read_text(encoding="utf-8").rstrip("\n")
        expected_path = root / f"{name}.expected.txt"
        expected = expected_path.read_text(encoding="utf-8").rstrip("\n")
        record = SentenceRecord(
            id=name, language=language, text=raw, context=None,
            split=Split.TRAIN, labels=frozenset(),
        )
        got = textprep.preprocess(record, textprep.PrepConfig(language=language)).text
        if got == expected:
            print(f"ok   {name}")
        else:
            failures += 1
            print(f"FAIL {name}: expected {expected!r}, got {got!r}")
    print(f"{len(raw_paths) - failures}/{len(raw_paths)} fixtures match")
    return 0 if failures == 0 else EXIT_DATA


def _cmd_preprocess(args: argparse.Namespace) -> int:
    if args.golden_dir:
        return _check_golden_dir(args.golden_dir)
    if not args.data or not args.out:
        raise ConfigError("preprocess needs --in and --out (or --golden-dir)")
    dataset = corpus.load_dataset(args.data)
    records: list[SentenceRecord] = []
    for record in dataset.records:
        if args.language and record.language.value != args.language:
            records.append(record)
            continue
        cfg = textprep.PrepConfig(
            language=record.language,
            enable_case_split=not args.no_case_split,
            enable_caret_fix=not args.no_caret_fix,
        )
        prepped = textprep.preprocess(record, cfg)
        if args.segment_pharo and record.language == Language.PHARO:
            segments = textprep.segment_pharo(prepped.text)
            for k, segment in enumerate(segments):
                records.append(
                    SentenceRecord(
                        id=f"{record.id}.s{k}",
                        language=record.language,
                        text=segment,
                        context=record.context,
                        split=record.split,
                        labels=record.labels,
                    )
                )
            continue
        records.append(prepped)
    corpus.save_dataset(Dataset(records=tuple(records)), args.out)
    print(f"wrote {len(records)} records to {args.out}")
    return 0


def _cmd_train_baseline(args: argparse.Namespace) -> int:
    dataset = corpus.load_dataset(args.data)
    language = Language(args.language)
    config = TrainConfig(
        seed=args.seed,
        epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.learning_rate,
        gamma=args.gamma,
    )
    model = provider.train_baseline(dataset, language, config, args.feature_dim)
    splits = [Split(s) for s in args.splits.split(",")]
    records = [r for split in splits for r in dataset.subset(language, split)]
    matrix = provider.predict_logits(model, records, provider=args.name)
    provider.write_logits(matrix, args.out)
    print(f"wrote logits for {len(matrix.ids)} records to {args.out}")
    return 0


def _parse_logit_args(pairs: list[str]) -> list[tuple[str, Path]]:
    out = []
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"--logits expects NAME=PATH, got {pair!r}")
        name, _, path = pair.partition("=")
        out.append((name, Path(path)))
    return out


def _cmd_fit_ensemble(args: argparse.Namespace) -> int:
    dataset = corpus.load_dataset(args.data)
    language = Language(args.language)
    taxonomy = taxonomy_for(language)
    ids = [r.id for r in dataset.subset(language, Split(args.split))]
    matrices = [
        provider.load_logits(path, taxonomy, provider=name).select(ids)
        for name, path in _parse_logit_args(args.logits)
    ]
    labels = corpus.label_matrix(dataset, language, Split(args.split))
    weights = ensemble.fit_weights(matrices, labels, method=args.method, seed=args.seed)
    ensemble.save_weights(weights, args.out)
    print(f"wrote weights for {len(weights.table)} categories to {args.out}")
    return 0


def _detect_language(path: str | Path) -> Language:
    """Infer the matrix language from the first score key of a JSONL file."""
    with Path(path).open("r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("//"):
                continue
            raw = json.loads(line)
            for key in raw.get("scores", {}):
                return Language(key.split("/", 1)[0])
    raise ConfigError(f"{path}: could not infer language from score keys")


def _aligned_labels(dataset: Dataset, ids: tuple[str, ...], language: Language) -> np.ndarray:
    by_id = {r.id: r for r in dataset.subset(language)}
    taxonomy = taxonomy_for(language)
    rows = []
    for rec_id in ids:
        if rec_id not in by_id:
            raise ConfigError(f"no dataset record for id {rec_id!r}")
        labels = by_id[rec_id].labels
        rows.append([1 if c in labels else 0 for c in taxonomy.categories])
    return np.array(rows, dtype=np.int64).reshape(len(ids), len(taxonomy))


def _cmd_tune_thresholds(args: argparse.Namespace) -> int:
    language = _detect_language(args.probs)
    probs = ensemble.load_probabilities(args.probs, taxonomy_for(language))
    dataset = corpus.load_dataset(args.labels)
    labels = _aligned_labels(dataset, probs.ids, language)
    table = thresholds.tune_thresholds(probs, labels, thresholds.parse_grid(args.grid))
    thresholds.save_thresholds(table, args.out)
    print(f"wrote thresholds for {len(table.entries)} categories to {args.out}")
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    language = _detect_language(args.probs)
    probs = ensemble.load_probabilities(args.probs, taxonomy_for(language))
    dataset = corpus.load_dataset(args.data)
    labels = _aligned_labels(dataset, probs.ids, language)
    table = thresholds.load_thresholds(args.thresholds)
    preds = thresholds.apply_thresholds(probs, table)
    outcomes = {
        (language, category): metrics.category_outcome(preds[:, j], labels[:, j])
        for j, category in enumerate(taxonomy_for(language).categories)
    }
    report = metrics.build_report(
        outcomes, args.t_model, args.gflops, args.t_max, args.g_max
    )
    metrics.write_report_csv(report, args.out)
    print(f"macro_f1={report.macro_f1:.4f} weighted_f1={report.weighted_f1:.4f}")
    return 0


def _cmd_score(args: argparse.Namespace) -> int:
    value = metrics.submission_score(
        metrics.ScoreInputs(
            f1_avg=args.f1,
            t_model_ms=args.t_model,
            t_max_ms=args.t_max,
            g_model=args.g_model,
            g_max=args.g_max,
        )
    )
    print(f"{value:.5f}")
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    weights = ensemble.load_weights(args.weights)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    emit_heatmap(weights, out / "heatmap.svg", out / "heatmap.csv")
    emit_contribution(weights, out / "contribution.csv")
    print(f"wrote heatmap.svg, heatmap.csv, contribution.csv to {out}")
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    overrides = {"dataset": args.dataset, "out_dir": args.out_dir}
    try:
        config = load_run_config(args.config, seed_override=args.seed, overrides=overrides)
    except (CommentMMEError, ValueError) as e:
        print(f"error [config] {e}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        report = run_pipeline(config)
    except PipelineError as e:
        print(f"error {e}", file=sys.stderr)
        return e.exit_code
    print(
        f"macro_f1={report.macro_f1:.4f} weighted_f1={report.weighted_f1:.4f} "
        f"score={report.score:.5f} -> {config.out_dir}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="comment-mme",
        description="Multi-provider code-comment classification pipeline.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate a dataset file and print split counts")
    p.add_argument("--data", required=True)
    p.set_defaults(fn=_cmd_ingest)

    p = sub.add_parser("preprocess", help="apply text preprocessing to a dataset")
    p.add_argument("--in", dest="data")
    p.add_argument("--out")
    p.add_argument("--golden-dir", help="check raw/expected fixture pairs instead")
    p.add_argument("--language", choices=[l.value for l in Language])
    p.add_argument("--no-case-split", action="store_true")
    p.add_argument("--no-caret-fix", action="store_true")
    p.add_argument("--segment-pharo", action="store_true")
    p.set_defaults(fn=_cmd_preprocess)

    p = sub.add_parser("train-baseline", help="train the built-in baseline, write logits")
    p.add_argument("--data", required=True)
    p.add_argument("--language", required=True, choices=[l.value for l in Language])
    p.add_argument("--out", required=True)
    p.add_argument("--name", default="baseline")
    p.add_argument("--splits", default="valid,test")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--feature-dim", type=int, default=provider.DEFAULT_FEATURE_DIM)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--learning-rate", type=float, default=2e-4)
    p.add_argument("--gamma", type=float, default=2.0)
    p.set_defaults(fn=_cmd_train_baseline)

    p = sub.add_parser("fit-ensemble", help="fit per-category provider weights")
    p.add_argument("--data", required=True)
    p.add_argument("--language", required=True, choices=[l.value for l in Language])
    p.add_argument("--logits", nargs="+", required=True, metavar="NAME=PATH")
    p.add_argument("--out", required=True)
    p.add_argument("--split", default="valid")
    p.add_argument("--method", default="simplex_grid", choices=["simplex_grid", "gradient"])
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=_cmd_fit_ensemble)

    p = sub.add_parser("tune-thresholds", help="grid-search per-category thresholds")
    p.add_argument("--probs", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--grid", default="0.10:0.90:0.02")
    p.set_defaults(fn=_cmd_tune_thresholds)

    p = sub.add_parser("evaluate", help="score probabilities against labels")
    p.add_argument("--data", required=True)
    p.add_argument("--probs", required=True)
    p.add_argument("--thresholds", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--t-model", type=float, default=0.0)
    p.add_argument("--gflops", type=float, default=0.0)
    p.add_argument("--t-max", type=float, default=DEFAULT_T_MAX_MS)
    p.add_argument("--g-max", type=float, default=DEFAULT_G_MAX)
    p.set_defaults(fn=_cmd_evaluate)

    p = sub.add_parser("score", help="compute the composite submission score")
    p.add_argument("--f1", type=float, required=True)
    p.add_argument("--t-model", type=float, required=True)
    p.add_argument("--t-max", type=float, default=DEFAULT_T_MAX_MS)
    p.add_argument("--g-model", type=float, required=True)
    p.add_argument("--g-max", type=float, default=DEFAULT_G_MAX)
    p.set_defaults(fn=_cmd_score)

    p = sub.add_parser("report", help="emit heatmap and contribution files from weights")
    p.add_argument("--weights", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(fn=_cmd_report)

    p = sub.add_parser("run", help="run the full pipeline from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--dataset")
    p.add_argument("--out-dir")
    p.set_defaults(fn=_cmd_run)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except PipelineError as e:
        print(f"error {e}", file=sys.stderr)
        return e.exit_code
    except ConfigError as e:
        print(f"error [config] {e}", file=sys.stderr)
        return EXIT_CONFIG
    except CommentMMEError as e:
        print(f"error [data] {e}", file=sys.stderr)
        return EXIT_DATA
    except (ValueError, OSError) as e:
        print(f"error {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
