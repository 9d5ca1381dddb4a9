"""Command-line entry point.

Subcommands: synth-data, train, colorize, eval, compare-stability.
Exit codes: 0 success, 1 usage or input error, 2 runtime failure (such as a
diverged training run). Unknown flags are always errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import inference, metrics, training
from .dataio import (
    DatasetManifest,
    PreparationSpec,
    derive_gray,
    generate_synthetic_dataset,
    load_image,
    load_manifest,
    prepare,
    save_image,
)
from .errors import ChromaCycleError
from .training import (
    BASELINE_REGIMES,
    CYCLE_REGIMES,
    REGIME_WGAN,
    default_config,
    load_checkpoint,
    read_loss_log,
    save_checkpoint,
    write_loss_log,
)

_REGIME_FLAGS = ("wgan", "gan", "cyclegan", "cond-cyclegan")


def _internal_regime(flag: str) -> str:
    return flag.replace("-", "_")


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract here is exit 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="chromacycle", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth-data", help="generate a synthetic shape dataset")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--n", type=int, required=True, help="number of images (>= 1)")
    p.add_argument("--size", type=int, default=64, help="square image side in pixels")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument(
        "--test-fraction",
        type=float,
        default=0.0,
        help="fraction of images assigned to the test split",
    )
    p.set_defaults(func=cmd_synth_data)

    p = sub.add_parser("train", help="train one regime on a dataset manifest")
    p.add_argument("--regime", required=True, choices=_REGIME_FLAGS)
    p.add_argument("--data", required=True, help="path to manifest.json")
    p.add_argument("--out", required=True, help="output directory for losses.csv and final.ckpt")
    p.add_argument("--iters", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--batch", type=int, default=None)
    p.add_argument("--lambda-cyc", type=float, default=None, help="cycle regimes only")
    p.add_argument("--clip", type=float, default=None, help="wgan only: weight clip bound")
    p.add_argument("--n-critic", type=int, default=None, help="wgan only: critic steps per iteration")
    p.add_argument("--image-size", type=int, default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("colorize", help="colorize a grayscale image file or directory")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--in", dest="in_path", required=True, metavar="PATH")
    p.add_argument("--out", required=True, metavar="PATH")
    p.add_argument("--noise-seed", type=int, default=None, help="wgan/gan only")
    p.set_defaults(func=cmd_colorize)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a manifest's test split")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True, help="output JSON path")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("compare-stability", help="final-window loss statistics across runs")
    p.add_argument(
        "--logs",
        required=True,
        nargs="+",
        metavar="[REGIME:]CSV",
        help="loss CSVs; prefix each with its regime name and a colon to compare regimes",
    )
    p.add_argument("--loss", default="cyc", help="loss name to analyze")
    p.add_argument("--window", type=int, default=100)
    p.add_argument("--out", required=True, help="output JSON path (companion CSV written beside it)")
    p.set_defaults(func=cmd_compare_stability)

    return parser


def cmd_synth_data(args) -> int:
    if args.n < 1:
        raise ValueError("--n must be >= 1")
    out = Path(args.out)
    generate_synthetic_dataset(
        out, n=args.n, size=args.size, seed=args.seed, test_fraction=args.test_fraction
    )
    print(f"wrote {args.n} images and manifest.json to {out}")
    return 0


def cmd_train(args) -> int:
    regime = _internal_regime(args.regime)
    if args.clip is not None and regime != REGIME_WGAN:
        raise ValueError("--clip only applies to --regime wgan")
    if args.n_critic is not None and regime != REGIME_WGAN:
        raise ValueError("--n-critic only applies to --regime wgan")
    if args.lambda_cyc is not None and regime not in CYCLE_REGIMES:
        raise ValueError("--lambda-cyc only applies to the cycle regimes")
    overrides = {"iterations": args.iters, "seed": args.seed}
    for key, value in (
        ("learning_rate", args.lr),
        ("batch_size", args.batch),
        ("lambda_cyc", args.lambda_cyc),
        ("clip_value", args.clip),
        ("n_critic", args.n_critic),
        ("image_size", args.image_size),
    ):
        if value is not None:
            overrides[key] = value
    config = default_config(regime, **overrides)
    manifest = load_manifest(args.data)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    checkpoint, log = training.train(config, manifest)
    write_loss_log(log, out / "losses.csv")
    save_checkpoint(checkpoint, out / "final.ckpt")
    print(
        f"trained {regime} for {config.iterations} iterations; "
        f"wrote {out / 'losses.csv'} and {out / 'final.ckpt'}"
    )
    return 0


def cmd_colorize(args) -> int:
    ck = load_checkpoint(args.ckpt)
    in_path, out_path = Path(args.in_path), Path(args.out)
    size = ck.config.image_size
    spec = PreparationSpec(load_size=size, crop_size=size)
    if in_path.is_dir():
        summary = inference.colorize_directory(
            ck, in_path, out_path, spec, noise_seed=args.noise_seed
        )
        print(f"converted {summary.converted} images to {out_path}")
        for name, reason in summary.failures:
            print(f"failed: {name}: {reason}", file=sys.stderr)
        return 0
    gray = derive_gray(prepare(load_image(in_path), spec))
    result = inference.colorize(ck, gray, noise_seed=args.noise_seed)
    if out_path.is_dir():
        out_path = out_path / f"{in_path.stem}.png"
    save_image(result.output, out_path)
    print(f"wrote {out_path}")
    return 0


def cmd_eval(args) -> int:
    ck = load_checkpoint(args.ckpt)
    manifest = load_manifest(args.data)
    result = metrics.evaluate_checkpoint(ck, manifest)
    out = Path(args.out)
    out.write_text(json.dumps(result, indent=2, sort_keys=True) + "\n", encoding="ascii")
    mean = result["psnr_mean_db"]
    line = f"evaluated {result['count']} test images; mean PSNR "
    line += "n/a" if mean is None else f"{mean:.2f} dB"
    if "cycle_reconstruction_error" in result:
        line += f"; cycle reconstruction error {result['cycle_reconstruction_error']:.6f}"
    print(line)
    return 0


def _parse_log_arg(arg: str) -> tuple[str, Path]:
    """Split an optional REGIME: prefix off a log path."""
    head, sep, tail = arg.partition(":")
    if sep and head in _REGIME_FLAGS + tuple(_internal_regime(r) for r in _REGIME_FLAGS):
        return _internal_regime(head), Path(tail)
    return "unspecified", Path(arg)


def cmd_compare_stability(args) -> int:
    logs = []
    for arg in args.logs:
        regime, path = _parse_log_arg(arg)
        logs.append(read_loss_log(path, regime=regime))
    report = metrics.stability_report(logs, loss_name=args.loss, window=args.window)
    metrics.write_stability_report(report, Path(args.out))
    width = max(len(r) for r in report.median_mean)
    print(f"{'regime':<{width}}  {'median mean':>14}  {'median variance':>16}")
    for regime in sorted(report.median_mean):
        print(
            f"{regime:<{width}}  {report.median_mean[regime]:>14.6f}  "
            f"{report.median_variance[regime]:>16.8f}"
        )
    print(f"lower loss:  {report.lower_loss_regime}")
    print(f"more stable: {report.more_stable_regime}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else 0 if code is None else 1
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, NotADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ChromaCycleError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main())
