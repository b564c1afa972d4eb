"""promptsr command line: dataset, training stages, inference, evaluation.

Exit codes: 0 success, 1 usage/config error, 2 runtime/training error.
Machine logs go to <out_dir>/logs/<command>.jsonl; stdout carries a short
human summary.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .errors import ConfigError, PromptSRError, VocabularyError
from .runconfig import RunConfig, parse_config

COMMANDS = ("make-dataset", "train-teacher", "train-vae", "train-base",
            "train-dape", "train-sr", "infer", "evaluate", "ablate")

USAGE_ERRORS = (ConfigError, VocabularyError)


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract says 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> _Parser:
    parser = _Parser(prog="promptsr",
                     description="Semantics-prompted diffusion super-resolution, toy scale.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    subs = {}
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[], help=f"run the {name} stage")
        sp.add_argument("--config", required=True, metavar="PATH",
                        help="run config file (YAML)")
        sp.add_argument("--seed", type=int, default=None,
                        help="override the seed (global; sampling seed for infer)")
        sp.add_argument("--out", default=None, metavar="DIR",
                        help="override the output directory")
        subs[name] = sp
    inf = subs["infer"]
    inf.add_argument("inputs", nargs="*", metavar="IMAGE",
                     help="LR image paths; defaults to the dataset eval split")
    inf.add_argument("--steps", type=int, default=None, help="sampling steps")
    inf.add_argument("--no-lre", action="store_true",
                     help="start from pure noise instead of the LR latent")
    inf.add_argument("--threshold", type=float, default=None,
                     help="tag decode threshold for hard prompts")
    inf.add_argument("--prompt-override", default=None, metavar="TAGS",
                     help="comma-separated tag text replacing the predicted hard prompt")
    abl = subs["ablate"]
    abl.add_argument("--suite", default="full", choices=("full", "dape", "lre"),
                     help="arm subset to run")
    abl.add_argument("--n-images", type=int, default=None,
                     help="images per arm (0 = whole split)")
    return parser


def _load_config(args) -> RunConfig:
    cfg = parse_config(args.config)
    if args.out is not None:
        cfg = replace(cfg, out_dir=args.out)
    if args.seed is not None and args.command != "infer":
        cfg = replace(cfg, seed=args.seed)
    return cfg.validate()


def _fmt(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, float):
        return f"{value:.4f}"
    return str(value)


def _summarize_history(command: str, history: dict):
    parts = [f"{k}={_fmt(v)}" for k, v in sorted(history.get("final", {}).items())]
    print(f"{command}: done ({', '.join(parts)})")


def _run(command: str, args) -> None:
    from . import pipeline

    cfg = _load_config(args)
    if command == "make-dataset":
        manifest = pipeline.run_make_dataset(cfg)
        counts = {s: len(r) for s, r in manifest["splits"].items()}
        print(f"make-dataset: wrote {cfg.dataset_dir} "
              + " ".join(f"{k}={v}" for k, v in counts.items()))
    elif command == "train-teacher":
        _, history = pipeline.run_train_teacher(cfg)
        _summarize_history(command, history)
    elif command == "train-vae":
        _, history = pipeline.run_train_vae(cfg)
        _summarize_history(command, history)
    elif command == "train-base":
        _, history = pipeline.run_train_base(cfg)
        _summarize_history(command, history)
    elif command == "train-dape":
        _, history = pipeline.run_train_dape(cfg)
        _summarize_history(command, history)
    elif command == "train-sr":
        _, history = pipeline.run_train_sr(cfg)
        _summarize_history(command, history)
    elif command == "infer":
        sidecars = pipeline.run_infer(
            cfg, steps=args.steps, seed=args.seed, no_lre=args.no_lre,
            threshold=args.threshold, prompt_override=args.prompt_override,
            inputs=args.inputs or None)
        print(f"infer: wrote {len(sidecars)} images to {cfg.out_dir}/infer")
        for sc in sidecars[:4]:
            print(f"  {sc['output']} tags=[{', '.join(sc['hard_tags'])}] "
                  f"lre={sc['use_lre']} seed={sc['seed']}")
        if len(sidecars) > 4:
            print(f"  ... and {len(sidecars) - 4} more")
    elif command == "evaluate":
        report = pipeline.run_evaluate(cfg)
        aggs = " ".join(f"{k}={_fmt(v)}" for k, v in sorted(report.aggregates.items()))
        tags = " ".join(f"{k}={_fmt(v)}" for k, v in sorted(report.tagging.items())
                        if not isinstance(v, str))
        print(f"evaluate: {len(report.per_image)} images  {aggs}")
        print(f"  tagging: {tags}")
        print(f"  report: {cfg.out_dir}/eval/report.json")
    elif command == "ablate":
        from .evalsuite import run_ablation
        from .evalsuite.report import comparison_table
        reports = run_ablation(args.suite, cfg, n_images=args.n_images)
        print(comparison_table(reports))
        print(f"ablate: {len(reports)} arms; reports under {cfg.out_dir}/ablate")
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError(f"unknown command {command!r}")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        _run(args.command, args)
    except USAGE_ERRORS as e:
        print(f"promptsr {args.command}: config error: {e}", file=sys.stderr)
        return 1
    except FileNotFoundError as e:
        print(f"promptsr {args.command}: {e}", file=sys.stderr)
        return 1
    except (PromptSRError, RuntimeError, ValueError, OSError) as e:
        print(f"promptsr {args.command}: error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
