"""Command-line front end.

Thin dispatcher over the harness; all heavy lifting (and all parallelism,
under the reproducibility contract) lives there. Every run echoes its fully
resolved configuration, defaults and seed included, before any results.

Exit codes: 0 success, 1 configuration/usage error, 2 IO error, 3 when
``--assert`` was passed and a verdict flag came back false.
"""

from __future__ import annotations

import json
import sys

import click

from . import dataio
from .errors import EmptyInputError, FormatError, SegvoteError
from .harness import (
    RuleSpec,
    accuracy_sweep,
    dictionary_size_sweep,
    estimate_misclassification,
    rate_slope,
    theorem_regime_report,
)
from .models import ModelAParams, ModelBParams, ModelCParams

_RULE_NAMES = {"euclid": "euclidean", "coord": "coordinate", "segmented": "segmented"}


class VerdictFailure(click.ClickException):
    exit_code = 3


def _parse_grid(spec: str) -> list[int]:
    """Parse start:stop:step (stop inclusive) into a dimension grid."""
    try:
        start, stop, step = (int(v) for v in spec.split(":"))
    except ValueError:
        raise click.UsageError(f"--d-grid must look like start:stop:step, got {spec!r}")
    if step <= 0 or stop < start:
        raise click.UsageError(f"bad --d-grid {spec!r}")
    return list(range(start, stop + 1, step))


def _parse_ints(spec: str, flag: str) -> list[int]:
    try:
        return [int(v) for v in spec.split(",")]
    except ValueError:
        raise click.UsageError(f"{flag} must be a comma-separated integer list, got {spec!r}")


def _build_model(model: str, *, d, l, p, amp, a, amplitude_law, big_k, rho, m, nu, seed):
    if model == "a":
        return ModelAParams(d=d, rho=rho, M=m, seed=seed)
    if model == "b":
        return ModelBParams(d=d, l=l, p=p, N=amp, K=big_k, M=max(m, nu), nu=nu, seed=seed)
    if model == "c":
        return ModelCParams(d=d, l=l, p=p, a=a, amplitude_law=amplitude_law, M=m, seed=seed)
    raise click.UsageError(f"unknown model {model!r}")


def _rule_from_flags(rule: str, c: int | None, k: int) -> RuleSpec:
    kind = _RULE_NAMES.get(rule)
    if kind is None:
        raise click.UsageError(f"--rule must be one of {sorted(_RULE_NAMES)}, got {rule!r}")
    return RuleSpec(kind, c=c if kind == "segmented" else None, k=k)


def _emit(config: dict, result, out: str | None, fmt: str) -> None:
    """Config echo first, then results (to --out when given, else stdout)."""
    click.echo(json.dumps({"config": config}, indent=2))
    if fmt == "json":
        text = json.dumps({"config": config, "results": dataio.results_to_dict(result)},
                          indent=2) + "\n"
    else:
        text = dataio.render_results(result, fmt)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _model_options(fn):
    opts = [
        click.option("--model", type=click.Choice(["a", "b", "c"]), required=True),
        click.option("--d", type=int, default=10000, show_default=True),
        click.option("--l", type=int, default=10, show_default=True,
                     help="Spike spacing (models b, c)."),
        click.option("--p", type=float, default=0.01, show_default=True,
                     help="Perturbation/support probability (models b, c)."),
        click.option("--amp", type=float, default=10.0, show_default=True,
                     help="Perturbation amplitude (model b)."),
        click.option("--a", type=float, default=10.0, show_default=True,
                     help="Amplitude floor (model c)."),
        click.option("--amplitude-law", type=click.Choice(["uniform", "shifted_exponential"]),
                     default="uniform", show_default=True, help="Model c amplitude law."),
        click.option("--K", "big_k", type=int, default=2, show_default=True,
                     help="Class count (model b)."),
        click.option("--rho", type=float, default=0.1, show_default=True,
                     help="Sign-flip probability (model a)."),
        click.option("--M", "m", type=int, default=1, show_default=True,
                     help="Words per class."),
        click.option("--nu", type=int, default=1, show_default=True,
                     help="Dictionary segments per class (model b)."),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


@click.group()
def cli() -> None:
    """Segmented nearest-neighbor voting workbench."""


@cli.command()
@_model_options
@click.option("--rule", default="segmented", show_default=True,
              help="euclid (c=1), coord (c=d) or segmented.")
@click.option("--c", type=int, default=None, help="Segment count for --rule segmented.")
@click.option("--k", type=int, default=1, show_default=True, help="Neighbors per segment.")
@click.option("--trials", type=int, default=1000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--threads", type=int, default=1, show_default=True)
@click.option("--out", type=click.Path(), default=None)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json",
              show_default=True)
def simulate(model, d, l, p, amp, a, amplitude_law, big_k, rho, m, nu,
             rule, c, k, trials, seed, threads, out, fmt):
    """Monte Carlo misclassification estimate for one model and rule."""
    params = _build_model(model, d=d, l=l, p=p, amp=amp, a=a, amplitude_law=amplitude_law,
                          big_k=big_k, rho=rho, m=m, nu=nu, seed=seed)
    rule_spec = _rule_from_flags(rule, c, k)
    config = {
        "subcommand": "simulate", "model": vars(params) | {"model": type(params).__name__},
        "rule": rule_spec.to_dict(), "trials": trials, "seed": seed, "threads": threads,
    }
    estimate = estimate_misclassification(params, rule_spec, trials, seed, threads=threads)
    _emit(config, estimate, out, fmt)


@cli.command()
@click.option("--model", type=click.Choice(["a"]), default="a", show_default=True)
@click.option("--rho", type=float, required=True)
@click.option("--rule", default="euclid", show_default=True, help="euclid or segmented.")
@click.option("--c", type=int, default=None,
              help="Fixed segment count; default picks the largest divisor <= sqrt(d).")
@click.option("--d-grid", required=True, help="Dimension grid as start:stop:step.")
@click.option("--trials", type=int, default=200000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--threads", type=int, default=1, show_default=True)
@click.option("--out", type=click.Path(), default=None)
def rate(model, rho, rule, c, d_grid, trials, seed, threads, out):
    """Fit the empirical misclassification decay rate over a dimension grid."""
    grid = _parse_grid(d_grid)
    params = ModelAParams(d=grid[0], rho=rho, seed=seed)
    rule_spec = _rule_from_flags(rule, c, 1)
    config = {
        "subcommand": "rate", "rho": rho, "rule": rule_spec.to_dict(), "d_grid": grid,
        "trials": trials, "seed": seed, "threads": threads,
    }
    result = rate_slope(params, rule_spec, grid, trials, seed, threads=threads)
    _emit(config, result, out, "json")


@cli.command()
@_model_options
@click.option("--trials", type=int, default=1000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--threads", type=int, default=1, show_default=True)
@click.option("--near-chance-margin", type=float, default=0.10, show_default=True)
@click.option("--near-zero-threshold", type=float, default=0.05, show_default=True)
@click.option("--assert", "assert_", is_flag=True,
              help="Exit with code 3 unless every verdict holds.")
@click.option("--out", type=click.Path(), default=None)
@click.option("--format", "fmt", type=click.Choice(["json"]), default="json",
              show_default=True)
def regimes(model, d, l, p, amp, a, amplitude_law, big_k, rho, m, nu,
            trials, seed, threads, near_chance_margin, near_zero_threshold,
            assert_, out, fmt):
    """Three-regime report (c=1, c=d, c=d/l) for models b and c."""
    if model not in ("b", "c"):
        raise click.UsageError("--model must be b or c for regimes")
    params = _build_model(model, d=d, l=l, p=p, amp=amp, a=a, amplitude_law=amplitude_law,
                          big_k=big_k, rho=rho, m=m, nu=nu, seed=seed)
    config = {
        "subcommand": "regimes", "model": vars(params) | {"model": type(params).__name__},
        "trials": trials, "seed": seed, "threads": threads,
        "near_chance_margin": near_chance_margin,
        "near_zero_threshold": near_zero_threshold, "assert": assert_,
    }
    report = theorem_regime_report(
        params, trials, seed, threads=threads,
        near_chance_margin=near_chance_margin, near_zero_threshold=near_zero_threshold,
    )
    _emit(config, report, out, fmt)
    if assert_ and not all(report.verdicts.values()):
        failed = sorted(name for name, ok in report.verdicts.items() if not ok)
        raise VerdictFailure(f"verdicts failed: {', '.join(failed)}")


@cli.command("sweep-nu")
@_model_options
@click.option("--nu-grid", default="1,2,4,8", show_default=True)
@click.option("--trials", type=int, default=500, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--threads", type=int, default=1, show_default=True)
@click.option("--out", type=click.Path(), default=None)
def sweep_nu(model, d, l, p, amp, a, amplitude_law, big_k, rho, m, nu,
             nu_grid, trials, seed, threads, out):
    """Misclassification per rule as the dictionary size grows (model b)."""
    if model != "b":
        raise click.UsageError("--model must be b for sweep-nu")
    params = _build_model("b", d=d, l=l, p=p, amp=amp, a=a, amplitude_law=amplitude_law,
                          big_k=big_k, rho=rho, m=m, nu=nu, seed=seed)
    grid = _parse_ints(nu_grid, "--nu-grid")
    rules = {
        "euclidean": RuleSpec("euclidean"),
        "coordinate": RuleSpec("coordinate"),
        "segmented": RuleSpec("segmented", c=params.d // params.l),
    }
    config = {
        "subcommand": "sweep-nu", "model": vars(params) | {"model": type(params).__name__},
        "nu_grid": grid, "trials": trials, "seed": seed, "threads": threads,
    }
    result = dictionary_size_sweep(params, grid, rules, trials, seed, threads=threads)
    _emit(config, result, out, "json")


@cli.command()
@click.option("--train", "train_path", type=click.Path(exists=True), required=True)
@click.option("--test", "test_path", type=click.Path(exists=True), required=True)
@click.option("--segments", default="1", show_default=True,
              help="Comma-separated segment counts.")
@click.option("--k", default="1", show_default=True, help="Comma-separated neighbor counts.")
@click.option("--n", type=int, default=None,
              help="Dictionary segments per class; default uses every training word.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--threads", type=int, default=1, show_default=True)
@click.option("--out", type=click.Path(), default=None)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv",
              show_default=True)
def bench(train_path, test_path, segments, k, n, seed, threads, out, fmt):
    """Accuracy sweep over (c, k) on a feature-vector corpus."""
    train = dataio.load_dataset(train_path)
    test = dataio.load_dataset(test_path)
    c_list = _parse_ints(segments, "--segments")
    k_list = _parse_ints(k, "--k")
    if n is None:
        n = int(train.class_counts().min())
    config = {
        "subcommand": "bench", "train": str(train_path), "test": str(test_path),
        "segments": c_list, "k": k_list, "n": n, "seed": seed, "threads": threads,
    }
    table = accuracy_sweep(train, test, c_list, k_list, n, seed, threads=threads,
                           dataset_id=str(train_path))
    _emit(config, table, out, fmt)


@cli.command()
@click.option("--input", "input_path", type=click.Path(exists=True), required=True)
@click.option("--test-fraction", type=float, default=0.2, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--train-out", type=click.Path(), required=True)
@click.option("--test-out", type=click.Path(), required=True)
@click.option("--format", "fmt", type=click.Choice(["segf", "csv"]), default="segf",
              show_default=True)
def split(input_path, test_fraction, seed, train_out, test_out, fmt):
    """Stratified train/test split of a dataset file."""
    ds = dataio.load_dataset(input_path)
    config = {
        "subcommand": "split", "input": str(input_path), "test_fraction": test_fraction,
        "seed": seed, "train_out": str(train_out), "test_out": str(test_out), "format": fmt,
    }
    click.echo(json.dumps({"config": config}, indent=2))
    train, test = dataio.train_test_split(ds, test_fraction, seed)
    dataio.save_dataset(train, train_out, fmt)
    dataio.save_dataset(test, test_out, fmt)
    click.echo(json.dumps({"results": {"train_count": len(train.labels),
                                       "test_count": len(test.labels)}}, indent=2))


@cli.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service import app

    uvicorn.run(app, host=host, port=port)


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except VerdictFailure as exc:
        exc.show()
        return 3
    except click.UsageError as exc:
        exc.show()
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.exceptions.Abort:
        return 1
    except (FormatError, EmptyInputError, OSError) as exc:
        click.echo(f"io error: {exc}", err=True)
        return 2
    except SegvoteError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
