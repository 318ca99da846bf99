"""Command line entry point for the experiment grid.

Every flag can also be given in a ``--config`` file, one ``key = value`` per
line using the flag name without dashes (``tau-start = 0.5``). Lines starting
with ``#`` are ignored. Flags on the command line override the file.
"""

import argparse
import sys
from pathlib import Path

from ..activations import CATALOG, LEAKY_SLOPE, Activation
from ..model import TrainConfig
from .grid import DataConfig, ExperimentSpec, ModelSpec, run_grid

DEFAULT_ALPHAS = (0.3, 0.0)
BOOL_KEYS = {"straight-through", "plots", "export-data"}
INFO_KEYS = {"catalog"}


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _nonneg_float(text):
    v = float(text)
    if not v >= 0:
        raise argparse.ArgumentTypeError(f"must be >= 0: {text!r}")
    return v


def _pos_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be > 0: {text!r}")
    return v


def _pos_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {text!r}")
    return v


def _csv(text):
    return [t.strip() for t in text.split(",") if t.strip()]


def _alphas(text):
    return [_nonneg_float(t) for t in _csv(text)]


def _seeds(text):
    seeds = []
    for tok in _csv(text):
        lo, sep, hi = tok.partition("-")
        if sep and lo:
            seeds.extend(range(int(lo), int(hi) + 1))
        else:
            seeds.append(int(tok))
    if not seeds:
        raise argparse.ArgumentTypeError("no seeds given")
    return seeds


def _truths(text):
    toks = _csv(text)
    if toks == ["all"]:
        return list(CATALOG)
    try:
        return [Activation.parse(t) for t in toks]
    except ValueError as err:
        raise argparse.ArgumentTypeError(str(err)) from None


def build_parser() -> argparse.ArgumentParser:
    d = TrainConfig()
    p = _Parser(prog="flexact", description="Run the activation-selection experiment grid.")
    p.add_argument("--config", type=Path, help="flat key = value file mirroring these flags")
    p.add_argument("--truth", type=_truths, help="ground-truth activations, comma separated or 'all'")
    p.add_argument("--model", type=_csv,
                   help="flex, flex-a<alpha>, fixed, fixed-<kind>, <kind> or all; comma separated")
    p.add_argument("--alpha", type=_alphas, help=f"KL weights for flex models (default {DEFAULT_ALPHAS})")
    p.add_argument("--lambda", dest="lam", type=_pos_float, help=f"pseudo-label temperature (default {d.lam})")
    p.add_argument("--tau-start", type=_pos_float, help=f"default {d.tau_start}")
    p.add_argument("--tau-end", type=_pos_float, help=f"default {d.tau_end}")
    p.add_argument("--epochs", type=_pos_int, help=f"default {d.epochs}")
    p.add_argument("--batch-size", type=_pos_int, help=f"default {d.batch_size}")
    p.add_argument("--lr", type=_pos_float, help=f"default {d.learning_rate}")
    p.add_argument("--seeds", type=_seeds, help="e.g. 0,1,2 or 0-4 (default 0-4)")
    p.add_argument("--straight-through", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--slope", type=_pos_float, help=f"LeakyReLU slope (default {LEAKY_SLOPE})")
    p.add_argument("--scale", type=float, help="target scale k (default 5)")
    p.add_argument("--n-train", type=_pos_int)
    p.add_argument("--n-test", type=_pos_int)
    p.add_argument("--jobs", type=_pos_int, default=None, help="parallel worker processes")
    p.add_argument("--plots", action=argparse.BooleanOptionalAction, default=None, help="write SVG figures")
    p.add_argument("--export-data", action=argparse.BooleanOptionalAction, default=None,
                   help="write train/test CSV files")
    p.add_argument("--out", type=Path)
    return p


def read_config(path) -> list:
    """Turn a config file into argv tokens."""
    argv = []
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as err:
        raise UsageError(f"cannot read config {path}: {err}") from None
    for n, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("_", "-")
        value = value.strip()
        if not sep or not key:
            raise UsageError(f"{path}:{n}: expected 'key = value', got {raw!r}")
        if key in INFO_KEYS:
            if key == "catalog" and _csv(value) != [a.key for a in CATALOG]:
                raise UsageError(f"{path}:{n}: catalog order {value!r} does not match this build")
            continue
        if key == "config":
            raise UsageError(f"{path}:{n}: nested config files are not supported")
        if key in BOOL_KEYS:
            if value.lower() in ("true", "yes", "1", "on"):
                argv.append(f"--{key}")
            elif value.lower() in ("false", "no", "0", "off"):
                argv.append(f"--no-{key}")
            else:
                raise UsageError(f"{path}:{n}: {key} expects true/false, got {value!r}")
        else:
            argv += [f"--{key}", value]
    return argv


def _models(tokens, alphas):
    if tokens is None:
        tokens = ["all"]
    models = []
    for tok in tokens:
        tok = tok.lower()
        if tok == "all":
            models += [ModelSpec.routed(a) for a in alphas] + [ModelSpec(a) for a in CATALOG]
        elif tok == "flex":
            models += [ModelSpec.routed(a) for a in alphas]
        elif tok == "fixed":
            models += [ModelSpec(a) for a in CATALOG]
        elif tok.startswith("flex-a"):
            try:
                models.append(ModelSpec.routed(_nonneg_float(tok[len("flex-a"):])))
            except (ValueError, argparse.ArgumentTypeError):
                raise UsageError(f"bad flex model {tok!r}") from None
        else:
            name = tok[len("fixed-"):] if tok.startswith("fixed-") else tok
            try:
                models.append(ModelSpec(Activation.parse(name)))
            except ValueError:
                raise UsageError(f"unknown model {tok!r}") from None
    if len(set(models)) != len(models):
        raise UsageError(f"model list {','.join(tokens)!r} repeats a model")
    return models


def parse_cli(args=None) -> ExperimentSpec:
    parser = build_parser()
    args = list(sys.argv[1:] if args is None else args)
    ns = parser.parse_args(args)
    if ns.config is not None:
        ns = parser.parse_args(read_config(ns.config) + args)

    explicit_alpha = ns.alpha is not None
    alphas = ns.alpha if explicit_alpha else list(DEFAULT_ALPHAS)
    if len(set(alphas)) != len(alphas):
        raise UsageError(f"--alpha repeats a value: {alphas}")
    models = _models(ns.model, alphas)
    if explicit_alpha and not any(m.is_routed for m in models):
        raise UsageError("--alpha given but no flex model selected")
    truths = ns.truth or list(CATALOG)
    if len(set(truths)) != len(truths):
        raise UsageError("--truth repeats an activation")
    seeds = ns.seeds if ns.seeds is not None else [0, 1, 2, 3, 4]
    if len(set(seeds)) != len(seeds):
        raise UsageError(f"--seeds repeats a seed: {seeds}")

    base = TrainConfig()
    overrides = {
        "epochs": ns.epochs, "batch_size": ns.batch_size, "learning_rate": ns.lr, "lam": ns.lam,
        "tau_start": ns.tau_start, "tau_end": ns.tau_end, "straight_through": ns.straight_through,
        "slope": ns.slope,
    }
    fields = {k: v for k, v in overrides.items() if v is not None}
    try:
        train_cfg = TrainConfig(**{**base.__dict__, **fields})
    except ValueError as err:
        raise UsageError(str(err)) from None
    data = DataConfig()
    data = DataConfig(
        scale=data.scale if ns.scale is None else ns.scale,
        n_train=ns.n_train or data.n_train,
        n_test=ns.n_test or data.n_test,
    )
    return ExperimentSpec(
        truths=tuple(truths), models=tuple(models), seeds=tuple(seeds), train=train_cfg, data=data,
        out=ns.out or Path("runs"), jobs=ns.jobs or 1,
        plots=True if ns.plots is None else ns.plots,
        export_data=bool(ns.export_data),
    )


def main(argv=None):
    try:
        spec = parse_cli(argv)
    except UsageError as err:
        build_parser().print_usage(sys.stderr)
        print(f"flexact: error: {err}", file=sys.stderr)
        return 2
    n = len(spec.cells())
    print(f"running {n} runs -> {spec.out}", file=sys.stderr)
    summary, records = run_grid(spec, log=lambda msg: print(msg, file=sys.stderr))
    sys.stdout.write(summary.to_csv())
    failed = [r for r in records if not r.ok]
    for r in failed:
        print(f"{r.cell.run_id}: {r.status} at epoch {r.failed_epoch}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
