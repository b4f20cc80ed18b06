"""Command line: one fine-tune-and-export job per process."""

from __future__ import annotations

import argparse
import sys

from .errors import DataError, ModelLoadError
from .export import export_logits, write_manifest
from .jobs import MODEL_NAMES, AdapterConfig, ExportJob, TrainParams
from .schema import read_dataset
from .train import train_adapter

EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_MODEL = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hf-export")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("models", help="list supported encoder names")

    p = sub.add_parser("run", help="fine-tune one encoder and export logits")
    p.add_argument("--model", required=True, choices=sorted(MODEL_NAMES))
    p.add_argument("--language", required=True, choices=("java", "python", "pharo"))
    p.add_argument("--data", required=True, help="dataset JSONL")
    p.add_argument("--out", required=True, help="logits JSONL to write")
    p.add_argument("--manifest", help="also write a provider manifest JSON")
    p.add_argument("--cost-gflops", type=float, required=True)
    p.add_argument("--name", default="")
    p.add_argument("--splits", help="comma-separated split filter, default all")
    p.add_argument("--r", type=int, default=16)
    p.add_argument("--alpha", type=float, default=32.0)
    p.add_argument("--dropout", type=float, default=0.1)
    p.add_argument("--gamma", type=float, default=2.0)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--learning-rate", type=float, default=2e-4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-length", type=int, default=256)
    p.add_argument("--use-context", action="store_true")
    p.add_argument("--model-path", help="local config dir for an offline model")
    p.add_argument("--tokenizer", choices=("pretrained", "hashing"), default="pretrained")
    p.add_argument("--device", default="cpu")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.cmd == "models":
        for short, hub_id in sorted(MODEL_NAMES.items()):
            print(f"{short}\t{hub_id}")
        return 0
    try:
        job = ExportJob(
            model=args.model,
            language=args.language,
            out_path=args.out,
            cost_gflops_per_sample=args.cost_gflops,
            adapter=AdapterConfig(r=args.r, alpha=args.alpha, dropout=args.dropout),
            train=TrainParams(
                gamma=args.gamma,
                epochs=args.epochs,
                batch_size=args.batch_size,
                learning_rate=args.learning_rate,
                seed=args.seed,
            ),
            max_length=args.max_length,
            use_context=args.use_context,
            model_path=args.model_path,
            tokenizer=args.tokenizer,
            device=args.device,
            name=args.name,
        )
    except ValueError as e:
        print(f"error [config] {e}", file=sys.stderr)
        return EXIT_USAGE
    try:
        records = read_dataset(args.data)
        checkpoint = train_adapter(job, records)
        splits = tuple(args.splits.split(",")) if args.splits else None
        written = export_logits(checkpoint, records, job.out_path, splits=splits)
        print(f"{job.name}: wrote {written} rows to {job.out_path}")
        if args.manifest:
            write_manifest(job, job.out_path, args.manifest)
            print(f"{job.name}: manifest at {args.manifest}")
    except FileNotFoundError as e:
        print(f"error [data] {e}", file=sys.stderr)
        return EXIT_DATA
    except DataError as e:
        print(f"error [data] {e}", file=sys.stderr)
        return EXIT_DATA
    except ModelLoadError as e:
        print(f"error [model] {e}", file=sys.stderr)
        return EXIT_MODEL
    return 0


if __name__ == "__main__":
    sys.exit(main())
