"""Operator commands: search, eval, oracle, synth, sweep.

Every command prints one JSON document to stdout. Exit codes are a stable
contract: 0 success, 1 I/O failure, 2 validation or configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import core, report, testkit
from .errors import EvoverbError
from .evolution import EvolutionConfig, evolve
from .formats import (
    read_logits,
    read_verbalizer,
    read_vocab,
    write_logits,
    write_verbalizer,
    write_vocab,
)

# CLI flag name -> EvolutionConfig field.
_CONFIG_FLAGS = {
    "population": "population_size",
    "iterations": "max_iterations",
    "crossover_prob": "crossover_prob",
    "mutation_prob": "mutation_prob",
    "candidates": "n_candidates",
    "label_words": "n_label_words",
    "seed": "seed",
    "mutation_strategy": "mutation_strategy",
}


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="flat JSON config file; flags override it")
    parser.add_argument("--seed", type=int, help="master RNG seed (default 0)")
    parser.add_argument("--population", type=int, help="population size M (default 30)")
    parser.add_argument("--iterations", type=int, help="number of generations (default 5)")
    parser.add_argument("--candidates", type=int, help="candidate words per label (default 1000)")
    parser.add_argument("--label-words", type=int, help="label words per label (default 100)")
    parser.add_argument("--crossover-prob", type=float, help="crossover probability (default 0.8)")
    parser.add_argument("--mutation-prob", type=float, help="mutation probability (default 0.1)")
    parser.add_argument(
        "--mutation-strategy",
        choices=["hadamard", "matmul"],
        help="mutation reading: elementwise factors (default) or matrix product",
    )
    parser.add_argument(
        "--threads", type=int, default=1, help="fitness evaluation threads (default 1)"
    )


def _build_config(args: argparse.Namespace) -> EvolutionConfig:
    layered = EvolutionConfig().to_dict()
    if args.config is not None:
        with open(args.config) as fh:
            try:
                file_values = json.load(fh)
            except json.JSONDecodeError as exc:
                raise EvoverbError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(file_values, dict):
            raise EvoverbError("config file must contain a JSON object")
        unknown = set(file_values) - set(layered)
        if unknown:
            raise EvoverbError(f"unknown config keys: {sorted(unknown)}")
        layered.update(file_values)
    for flag, field in _CONFIG_FLAGS.items():
        value = getattr(args, flag, None)
        if value is not None:
            layered[field] = value
    return EvolutionConfig.from_dict(layered)


def _load_inputs(logits_path, vocab_path):
    logits = read_logits(logits_path)
    vocab = read_vocab(vocab_path)
    if len(vocab) != logits.vocab_size:
        raise EvoverbError(
            f"vocabulary has {len(vocab)} tokens but logits declare vocab_size "
            f"{logits.vocab_size}"
        )
    return logits, vocab


def _search_run(logits, vocab, config: EvolutionConfig, n_jobs: int):
    if config.n_candidates > logits.vocab_size:
        raise EvoverbError(
            f"number of candidates exceeds vocabulary size "
            f"({config.n_candidates} > {logits.vocab_size})"
        )
    means = core.label_means(logits)
    candidates = core.encode(means, config.n_candidates)
    return candidates, *evolve(logits, candidates, vocab, config, n_jobs=n_jobs)


def _emit(doc: dict) -> None:
    print(json.dumps(doc, indent=2, sort_keys=True))


def cmd_search(args: argparse.Namespace) -> int:
    config = _build_config(args)
    logits, vocab = _load_inputs(args.logits, args.vocab)
    _, best, verbalizer, history = _search_run(logits, vocab, config, args.threads)
    write_verbalizer(
        verbalizer,
        {"fitness": best.cached_fitness, "config": config.to_dict(), "seed": config.seed},
        args.out,
    )
    doc = {
        "config": config.to_dict(),
        "seed": config.seed,
        "logits": str(args.logits),
        "vocab": str(args.vocab),
        "best_fitness": best.cached_fitness,
        "generations": [g.to_dict() for g in history],
        "verbalizer_path": str(args.out),
    }
    if args.report is not None:
        with open(args.report, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
    if args.plot_dir is not None:
        plot_dir = Path(args.plot_dir)
        plot_dir.mkdir(parents=True, exist_ok=True)
        report.write_history_csv(history, plot_dir / "history.csv")
        report.render_history_figure(
            history, plot_dir / "fitness_history.png", title=f"seed {config.seed}"
        )
    _emit(doc)
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    verbalizer, _ = read_verbalizer(args.verbalizer)
    logits = read_logits(args.logits)
    accuracy = core.fitness(verbalizer, logits)
    # Single-label accuracy equals micro-F1; print with fixed 4-decimal width.
    print(f'{{"micro_f1": {accuracy:.4f}, "num_instances": {logits.num_instances}}}')
    return 0


def cmd_oracle(args: argparse.Namespace) -> int:
    logits, vocab = _load_inputs(args.logits, args.vocab)
    if args.candidates > logits.vocab_size:
        raise EvoverbError(
            f"number of candidates exceeds vocabulary size "
            f"({args.candidates} > {logits.vocab_size})"
        )
    means = core.label_means(logits)
    candidates = core.encode(means, args.candidates)
    best_fitness, verbalizer = testkit.exhaustive_best(
        logits, candidates, vocab, args.label_words, cap=args.cap
    )
    _emit(
        {
            "best_fitness": best_fitness,
            "enumerated": testkit.combination_count(
                logits.num_labels, args.candidates, args.label_words
            ),
            "labels": [
                {
                    "label": i,
                    "words": list(verbalizer.tokens[i]),
                    "vocab_ids": verbalizer.vocab_ids[i].tolist(),
                }
                for i in range(verbalizer.num_labels)
            ],
        }
    )
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    spec = testkit.PlantedSpec(
        num_labels=args.labels,
        vocab_size=args.vocab,
        instances_per_label=args.per_label,
        signal_words_per_label=args.signal_words,
        signal_mass=args.signal_mass,
        noise_seed=args.seed,
        noise_scale=args.noise_scale,
    )
    logits, vocab, answer = testkit.generate_planted(spec)
    write_logits(logits, args.out_logits)
    write_vocab(vocab, args.out_vocab)
    answer_fitness = core.fitness(answer, logits)
    write_verbalizer(
        answer,
        {
            "fitness": answer_fitness,
            "config": {
                "num_labels": spec.num_labels,
                "vocab_size": spec.vocab_size,
                "instances_per_label": spec.instances_per_label,
                "signal_words_per_label": spec.signal_words_per_label,
                "signal_mass": spec.signal_mass,
                "noise_scale": spec.noise_scale,
            },
            "seed": spec.noise_seed,
        },
        args.out_answer,
    )
    _emit(
        {
            "out_logits": str(args.out_logits),
            "out_vocab": str(args.out_vocab),
            "out_answer": str(args.out_answer),
            "num_instances": logits.num_instances,
            "planted_fitness": answer_fitness,
        }
    )
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    try:
        values = [int(v) for v in args.values.split(",") if v.strip()]
    except ValueError as exc:
        raise EvoverbError(f"--values must be a comma-separated integer list: {exc}") from exc
    if not values:
        raise EvoverbError("--values is empty")
    field = {"population": "population_size", "iterations": "max_iterations"}[args.param]
    base = _build_config(args)
    logits, vocab = _load_inputs(args.logits, args.vocab)
    out_dir = None
    if args.out_dir is not None:
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
    runs = []
    for idx, value in enumerate(values):
        config = replace(base, **{field: value, "seed": (base.seed + idx) % 2**64})
        _, best, verbalizer, history = _search_run(logits, vocab, config, args.threads)
        entry = {
            "value": value,
            "seed": config.seed,
            "best_fitness": best.cached_fitness,
            "generations": [g.to_dict() for g in history],
        }
        if out_dir is not None:
            path = out_dir / f"verbalizer_{args.param}_{value}.json"
            write_verbalizer(
                verbalizer,
                {"fitness": best.cached_fitness, "config": config.to_dict(), "seed": config.seed},
                path,
            )
            entry["verbalizer_path"] = str(path)
        runs.append(entry)
    doc = {"param": args.param, "base_seed": base.seed, "runs": runs}
    if args.report is not None:
        with open(args.report, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
    if args.plot_dir is not None:
        plot_dir = Path(args.plot_dir)
        plot_dir.mkdir(parents=True, exist_ok=True)
        report.write_sweep_csv(args.param, runs, plot_dir / "sweep.csv")
        report.render_sweep_figure(args.param, runs, plot_dir / "sweep_best_fitness.png")
    _emit(doc)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evoverb",
        description="Evolve a verbalizer (label-word sets) over cached mask-position distributions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("search", help="run the evolutionary search and write the best verbalizer")
    p.add_argument("--logits", type=Path, required=True, help="EVSL1 dev-set logits file")
    p.add_argument("--vocab", type=Path, required=True, help="vocabulary file, one token per line")
    p.add_argument("--out", type=Path, required=True, help="output verbalizer JSON")
    p.add_argument("--report", type=Path, help="write the run report JSON here")
    p.add_argument("--plot-dir", type=Path, help="also render history CSV + PNG into this directory")
    _add_config_flags(p)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("eval", help="score a verbalizer on a logits file (micro-F1)")
    p.add_argument("--verbalizer", type=Path, required=True)
    p.add_argument("--logits", type=Path, required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("oracle", help="brute-force the best verbalizer (desk-scale only)")
    p.add_argument("--logits", type=Path, required=True)
    p.add_argument("--vocab", type=Path, required=True)
    p.add_argument("--candidates", type=int, required=True)
    p.add_argument("--label-words", type=int, required=True)
    p.add_argument(
        "--cap",
        type=int,
        default=testkit.DEFAULT_ENUMERATION_CAP,
        help="refuse if the joint enumeration exceeds this count",
    )
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("synth", help="generate a planted instance with a known answer")
    p.add_argument("--labels", type=int, required=True)
    p.add_argument("--vocab", type=int, required=True, help="vocabulary size")
    p.add_argument("--per-label", type=int, required=True)
    p.add_argument("--signal-words", type=int, required=True)
    p.add_argument("--signal-mass", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise-scale", type=float, default=1.0)
    p.add_argument("--out-logits", type=Path, required=True)
    p.add_argument("--out-vocab", type=Path, required=True)
    p.add_argument("--out-answer", type=Path, required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("sweep", help="re-run search over a hyperparameter grid")
    p.add_argument("--param", choices=["population", "iterations"], required=True)
    p.add_argument("--values", required=True, help="comma-separated integers")
    p.add_argument("--logits", type=Path, required=True)
    p.add_argument("--vocab", type=Path, required=True)
    p.add_argument("--out-dir", type=Path, help="write one verbalizer JSON per value here")
    p.add_argument("--report", type=Path, help="write the combined report JSON here")
    p.add_argument("--plot-dir", type=Path, help="also render sweep CSV + PNG into this directory")
    _add_config_flags(p)
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EvoverbError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
