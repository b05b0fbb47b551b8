"""Command-line surface: dataset preparation, training, noise sweeps,
selection reports, and a search-amplification demo.

Configuration precedence is defaults < config file < explicit flags. The
config file is flat ``key = value`` text (``#`` starts a comment) whose keys
are the long flag names without the leading dashes. Every artifact-producing
command writes one ``manifest.json`` next to its outputs so runs can be
reproduced byte for byte (timestamps aside).

Exit codes: 0 success, 2 configuration errors (argparse uses the same code),
3 ingestion errors, 4 numerical failures.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .ansatz import ParamVector, qhas
from .data import Dataset, build_dataset, load_cache, parse_idx, save_cache, write_csv
from .errors import (
    CircuitError,
    ConfigError,
    EncodingError,
    IngestError,
    NumericalError,
)
from .gates import grover_marked_probabilities
from .noise import AMPLITUDE_DAMPING, BIT_FLIP, KINDS, NoiseSpec
from .plots import training_curves_svg
from .train import LABEL_MAP, TrainConfig, train

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INGEST = 3
EXIT_NUMERIC = 4

DATA_DIR_ENV = "QHATTN_DATA_DIR"
IMAGES_NAME = "train-images-idx3-ubyte.gz"
LABELS_NAME = "train-labels-idx1-ubyte.gz"
NOISE_SWEEP_PS = (0.1, 0.2, 0.3)


@dataclass(frozen=True)
class RunManifest:
    """Reproducibility record written next to every command's outputs."""

    command: str
    config: dict
    seed: int | None
    code_version: str
    dataset_hash: str | None
    label_map: dict
    noise_policy: dict | None
    outputs: tuple[str, ...]
    created_at: str
    duration_seconds: float
    results: dict | None = None

    def write(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(asdict(self), fh, indent=2)
            fh.write("\n")


def _manifest(command, args, started, outputs, dataset_hash=None, noise=None, results=None):
    config = {
        k: (str(v) if isinstance(v, Path) else v)
        for k, v in vars(args).items()
        if k not in ("func", "config")
    }
    return RunManifest(
        command=command,
        config=config,
        seed=getattr(args, "seed", None),
        code_version=__version__,
        dataset_hash=dataset_hash,
        label_map={str(k): v for k, v in LABEL_MAP.items()},
        noise_policy=(
            {"kind": noise.kind, "p": noise.p, "placement": noise.placement}
            if noise is not None
            else None
        ),
        outputs=tuple(str(o) for o in outputs),
        created_at=datetime.now(timezone.utc).isoformat(),
        duration_seconds=round(time.perf_counter() - started, 3),
        results=results,
    )


def _noise_from_args(args) -> NoiseSpec | None:
    kind = getattr(args, "noise_kind", None)
    p = getattr(args, "noise_p", None)
    if kind is None and p is None:
        return None
    if kind is None or p is None:
        raise ConfigError("noisy runs need both --noise-kind and --noise-p")
    return NoiseSpec(kind, p)


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_prepare_data(args) -> int:
    started = time.perf_counter()
    data_dir = args.data_dir or os.environ.get(DATA_DIR_ENV) or "data"
    images_path = Path(args.images) if args.images else Path(data_dir) / IMAGES_NAME
    labels_path = Path(args.labels) if args.labels else Path(data_dir) / LABELS_NAME
    for path in (images_path, labels_path):
        if not path.exists():
            raise IngestError(f"missing input file: {path}")

    images = parse_idx(images_path)
    labels = parse_idx(labels_path)
    if images.ndim != 3:
        raise IngestError(f"expected a 3-d image tensor, got shape {images.shape}")
    if labels.ndim != 1:
        raise IngestError(f"expected a 1-d label tensor, got shape {labels.shape}")

    train_samples, test_samples, pca = build_dataset(
        images, labels, seed=args.seed, scale_pixels=args.scale_pixels
    )
    dataset = Dataset(tuple(train_samples), tuple(test_samples))

    out = _out_dir(args)
    cache_path = out / "dataset.cache"
    tmp_path = out / "dataset.cache.tmp"
    save_cache(tmp_path, dataset)
    os.replace(tmp_path, cache_path)
    csv_path = out / "dataset.csv"
    write_csv(csv_path, dataset)

    counts = {
        split: {cls: sum(1 for s in samples if s.label == cls) for cls in (0, 1)}
        for split, samples in (("train", dataset.train), ("test", dataset.test))
    }
    ratios = pca.explained_variance_ratio()
    print(f"train={len(dataset.train)} test={len(dataset.test)}")
    for split, by_class in counts.items():
        print(f"  {split}: class0={by_class[0]} class1={by_class[1]}")
    print("explained variance ratios: " + " ".join(f"{r:.4f}" for r in ratios))
    print(f"dataset hash: {dataset.hash()}")

    manifest_path = out / "manifest.json"
    _manifest(
        "prepare-data",
        args,
        started,
        outputs=[cache_path, csv_path],
        dataset_hash=dataset.hash(),
        results={"explained_variance_ratio": [float(r) for r in ratios]},
    ).write(manifest_path)
    return EXIT_OK


def _train_config(args, noise: NoiseSpec | None) -> TrainConfig:
    return TrainConfig(
        learning_rate=args.lr,
        momentum=args.gamma,
        batch_size=args.batch,
        steps=args.steps,
        seed=args.seed,
        gradient_method=args.grad_method,
        noise=noise,
    )


def cmd_train(args) -> int:
    started = time.perf_counter()
    dataset = load_cache(args.dataset)
    noise = _noise_from_args(args)
    config = _train_config(args, noise)
    record = train(dataset, config)

    out = _out_dir(args)
    metrics_path = out / "metrics.csv"
    record.write_metrics_csv(metrics_path)
    params_path = out / "params.json"
    with open(params_path, "w") as fh:
        json.dump(
            {
                "n": record.final_params.n,
                "initial": [float(v) for v in record.initial_params.flat()],
                "final": [float(v) for v in record.final_params.flat()],
            },
            fh,
            indent=2,
        )
        fh.write("\n")
    curves_path = out / "curves.svg"
    rows = record.steps
    training_curves_svg(
        curves_path,
        [m.step for m in rows],
        [m.test_accuracy for m in rows],
        [m.train_accuracy for m in rows],
        [m.train_loss for m in rows],
    )

    final = rows[-1]
    summary = {
        "final_loss": final.train_loss,
        "final_train_accuracy": final.train_accuracy,
        "final_test_accuracy": final.test_accuracy,
        "tail10_test_accuracy": record.mean_tail("test_accuracy"),
        "tail10_train_accuracy": record.mean_tail("train_accuracy"),
        "wall_clock_seconds": round(record.wall_clock_seconds, 3),
        "e_by_class": record.e_by_class,
    }
    print(
        f"step {final.step}: loss={final.train_loss:.4f} "
        f"train_acc={final.train_accuracy:.4f} test_acc={final.test_accuracy:.4f}"
    )
    print(f"mean test accuracy over last 10 steps: {summary['tail10_test_accuracy']:.4f}")

    _manifest(
        "train",
        args,
        started,
        outputs=[metrics_path, params_path, curves_path],
        dataset_hash=dataset.hash(),
        noise=noise,
        results=summary,
    ).write(out / "manifest.json")
    return EXIT_OK


def cmd_noise_sweep(args) -> int:
    started = time.perf_counter()
    dataset = load_cache(args.dataset)
    cells: list[tuple[str | None, float]] = [(None, 0.0)]
    cells += [(kind, p) for kind in (AMPLITUDE_DAMPING, BIT_FLIP) for p in NOISE_SWEEP_PS]

    rows = []
    for kind, p in cells:
        noise = NoiseSpec(kind, p) if kind is not None else None
        record = train(dataset, _train_config(args, noise))
        rows.append(
            {
                "channel": kind or "none",
                "p": p,
                "test_accuracy": record.mean_tail("test_accuracy"),
                "train_accuracy": record.mean_tail("train_accuracy"),
                "final_loss": record.mean_tail("train_loss"),
            }
        )
        print(
            f"{rows[-1]['channel']:<18} p={p:.1f} "
            f"test_acc={rows[-1]['test_accuracy']:.4f} "
            f"train_acc={rows[-1]['train_accuracy']:.4f} "
            f"loss={rows[-1]['final_loss']:.4f}"
        )

    out = _out_dir(args)
    sweep_path = out / "noise_sweep.csv"
    with open(sweep_path, "w") as fh:
        fh.write("channel,p,test_accuracy,train_accuracy,final_loss\n")
        for r in rows:
            fh.write(
                f"{r['channel']},{r['p']:.1f},{r['test_accuracy']:.6f},"
                f"{r['train_accuracy']:.6f},{r['final_loss']:.8f}\n"
            )

    _manifest(
        "noise-sweep",
        args,
        started,
        outputs=[sweep_path],
        dataset_hash=dataset.hash(),
        results={"rows": rows},
    ).write(out / "manifest.json")
    return EXIT_OK


def _load_params_file(path) -> dict:
    try:
        with open(path) as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise IngestError(f"cannot read params file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise IngestError(f"malformed params file {path}: {exc}") from exc
    if not isinstance(payload, dict) or "n" not in payload:
        raise IngestError(f"params file {path} needs an object with an 'n' key")
    return payload


def cmd_qhas(args) -> int:
    started = time.perf_counter()
    payload = _load_params_file(args.params)
    n = int(payload["n"])
    final_values = payload.get("final", payload.get("params"))
    if final_values is None:
        raise IngestError(f"params file {args.params} has neither 'final' nor 'params'")
    report = qhas(ParamVector.from_flat(n, final_values), epsilon=args.epsilon)
    initial_report = None
    if "initial" in payload:
        initial_report = qhas(ParamVector.from_flat(n, payload["initial"]), epsilon=args.epsilon)

    out = _out_dir(args)
    csv_path = out / "qhas.csv"
    report.write_csv(csv_path)
    svg_path = out / "qhas.svg"
    report.write_svg(svg_path, initial=initial_report)

    selected = [e.dp_index for e in report.entries if e.hard_score]
    print(f"selected flips (epsilon={args.epsilon}): {selected if selected else 'none'}")

    _manifest(
        "qhas",
        args,
        started,
        outputs=[csv_path, svg_path],
        results={"selected": selected},
    ).write(out / "manifest.json")
    return EXIT_OK


def cmd_grover_demo(args) -> int:
    probs = grover_marked_probabilities(args.n, args.marked, args.iterations)
    print(f"n={args.n} marked={args.marked} (search space {1 << args.n})")
    print("iteration  P(marked)")
    for i, p in enumerate(probs, 1):
        print(f"{i:>9}  {p:.9f}")
    return EXIT_OK


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(
        prog="qhattn",
        description="Hard-attention quantum circuit experiments",
    )
    parser.add_argument("--config", help="flat key=value config file; flags override it")
    sub = parser.add_subparsers(dest="command", required=True)
    subs: dict[str, argparse.ArgumentParser] = {}

    p = subs["prepare-data"] = sub.add_parser(
        "prepare-data", help="ingest gzipped IDX files and build the 8-feature dataset"
    )
    p.add_argument("--data-dir", help=f"directory with {IMAGES_NAME} and {LABELS_NAME} "
                                      f"(default: ${DATA_DIR_ENV} or ./data)")
    p.add_argument("--images", help="explicit images file path")
    p.add_argument("--labels", help="explicit labels file path")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scale-pixels", action="store_true", help="divide pixels by 255 before PCA")
    p.add_argument("--out-dir", default="runs")
    p.set_defaults(func=cmd_prepare_data)

    def add_train_flags(p):
        p.add_argument("--dataset", default="runs/dataset.cache")
        p.add_argument("--lr", type=float, default=0.09)
        p.add_argument("--gamma", type=float, default=0.9)
        p.add_argument("--batch", type=int, default=30)
        p.add_argument("--steps", type=int, default=120)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--grad-method", default="parameter-shift",
                       choices=["parameter-shift", "finite-difference"])

    p = subs["train"] = sub.add_parser("train", help="train the classifier")
    add_train_flags(p)
    p.add_argument("--noise-kind", choices=list(KINDS))
    p.add_argument("--noise-p", type=float)
    p.add_argument("--out-dir", default="runs/train")
    p.set_defaults(func=cmd_train)

    p = subs["noise-sweep"] = sub.add_parser(
        "noise-sweep", help="train under each channel at p in {0, 0.1, 0.2, 0.3}"
    )
    add_train_flags(p)
    p.add_argument("--out-dir", default="runs/noise_sweep")
    p.set_defaults(func=cmd_noise_sweep)

    p = subs["qhas"] = sub.add_parser("qhas", help="hard-attention selection report")
    p.add_argument("--params", required=True, help="params.json produced by train")
    p.add_argument("--epsilon", type=float, default=0.05)
    p.add_argument("--out-dir", default="runs/qhas")
    p.set_defaults(func=cmd_qhas)

    p = subs["grover-demo"] = sub.add_parser(
        "grover-demo", help="exact-oracle amplitude amplification sanity check"
    )
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--marked", type=int, required=True)
    p.add_argument("--iterations", type=int)
    p.set_defaults(func=cmd_grover_demo)

    return parser, subs


def _read_config(path) -> dict[str, str]:
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    out = {}
    for lineno, line in enumerate(lines, 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = stripped.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _apply_config(ns, overrides: dict[str, str], actions, argv) -> None:
    by_flag = {}
    for action in actions:
        for opt in action.option_strings:
            if opt.startswith("--"):
                by_flag[opt[2:]] = action
    for key, raw in overrides.items():
        action = by_flag.get(key)
        if action is None:
            raise ConfigError(f"unknown config key {key!r}")
        flag = "--" + key
        if any(tok == flag or tok.startswith(flag + "=") for tok in argv):
            continue  # explicit flag wins
        if isinstance(action, argparse._StoreTrueAction):
            value = raw.lower() in ("1", "true", "yes", "on")
        elif action.type is not None:
            value = action.type(raw)
        else:
            value = raw
        setattr(ns, action.dest, value)


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser, subs = build_parser()
    try:
        ns = parser.parse_args(argv)
        if ns.config:
            overrides = _read_config(ns.config)
            actions = list(parser._actions) + list(subs[ns.command]._actions)
            _apply_config(ns, overrides, actions, argv)
        return ns.func(ns)
    except IngestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INGEST
    except (ConfigError, EncodingError, CircuitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
