from __future__ import annotations

import json
import os
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import click
import pandas as pd
from dotenv import load_dotenv

from .config import ModelConfig, SweepConfig, SystemConfig, load_config
from .exceptions import ForcedHeteroclinicError, VerificationFailed
from .logging_utils import setup_logging
from .pipeline.orchestrator import Laboratory
from .system.params import State4
from .utils.files import CSV_FLOAT_FORMAT, write_csv

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_VERIFICATION = 3

WORKERS_ENV = "FORCED_HETEROCLINIC_WORKERS"


def _initialise_laboratory(config_path: str) -> Laboratory:
    config_file = Path(config_path).expanduser().resolve()
    config = load_config(config_file, project_root=config_file.parent.parent)
    setup_logging(config.logging)
    return Laboratory(config)


def _apply_overrides(lab: Laboratory, **values: Optional[float]) -> None:
    """CLI flags win over the config file; ν, μ and ω feed both the system and the model sections."""

    given = {key: value for key, value in values.items() if value is not None}
    if not given:
        return
    system = SystemConfig(**{**lab.config.system.dict(), **given})
    model_updates: Dict[str, Any] = {}
    if "nu" in given:
        model_updates["xi_nu"] = given["nu"]
    if "mu" in given:
        model_updates["xi_mu"] = given["mu"]
    if "omega" in given:
        model_updates["omega"] = given["omega"]
    model = ModelConfig(**{**lab.config.model.dict(), **model_updates})
    lab.config = lab.config.copy(update={"system": system, "model": model})


def parameter_options(include_omega: bool = True) -> Callable:
    def decorator(func: Callable) -> Callable:
        names = ["alpha", "beta", "nu", "mu"] + (["omega"] if include_omega else [])
        for name in reversed(names):
            func = click.option(f"--{name}", type=float, default=None, help=f"Override {name} from the config.")(func)
        return func

    return decorator


def state_options(func: Callable) -> Callable:
    for name in ("theta", "x3", "x2", "x1"):
        func = click.option(f"--{name}", type=float, default=None, help="Initial state component.")(func)
    return func


def _state(lab: Laboratory, x1: Optional[float], x2: Optional[float], x3: Optional[float], theta: Optional[float]) -> State4:
    if x1 is None and x2 is None and x3 is None:
        state = lab.default_state()
        return state if theta is None else State4(state.x1, state.x2, state.x3, theta)
    if None in (x1, x2, x3):
        raise click.UsageError("Give all of --x1, --x2, --x3 or none of them.")
    return State4(x1, x2, x3, theta if theta is not None else lab.config.section.theta_star)


def _emit_frame(frame: pd.DataFrame, output: Optional[str]) -> None:
    if output:
        click.echo(str(write_csv(frame, Path(output))))
    else:
        click.echo(frame.to_csv(index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n"), nl=False)


def _echo_json(data: Any) -> None:
    click.echo(json.dumps(data, indent=2, ensure_ascii=False, default=str))


def _lab(ctx: click.Context) -> Laboratory:
    return ctx.obj["laboratory"]


@click.group()
@click.option(
    "--config",
    "config_path",
    default="config/config.yaml",
    type=click.Path(exists=True, dir_okay=False, readable=True),
    show_default=True,
)
@click.pass_context
def cli(ctx: click.Context, config_path: str) -> None:
    """Numerical laboratory for a periodically forced heteroclinic network."""

    load_dotenv()
    ctx.obj = {
        "config_path": config_path,
        "laboratory": _initialise_laboratory(config_path),
    }


@cli.command()
@parameter_options()
@click.option("--output", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def equilibria(ctx: click.Context, output: Optional[str], **params: Optional[float]) -> None:
    """Equilibria of the spatial field with their eigenvalues."""

    lab = _lab(ctx)
    _apply_overrides(lab, **params)
    _emit_frame(lab.run_equilibria(), output)


@cli.command()
@parameter_options()
@state_options
@click.option("--t-end", type=float, required=True)
@click.option("--samples", type=int, default=1000, show_default=True)
@click.option("--output", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def integrate(
    ctx: click.Context,
    t_end: float,
    samples: int,
    output: Optional[str],
    x1: Optional[float],
    x2: Optional[float],
    x3: Optional[float],
    theta: Optional[float],
    **params: Optional[float],
) -> None:
    """Integrate the forced field and print the sampled trajectory."""

    lab = _lab(ctx)
    _apply_overrides(lab, **params)
    trajectory = lab.run_integrate(_state(lab, x1, x2, x3, theta), t_end, samples)
    _emit_frame(trajectory.to_frame(), output)


@cli.command()
@parameter_options()
@state_options
@click.option("--iterates", type=int, default=100, show_default=True)
@click.option("--transient", type=int, default=0, show_default=True)
@click.option("--output", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def strobe(
    ctx: click.Context,
    iterates: int,
    transient: int,
    output: Optional[str],
    x1: Optional[float],
    x2: Optional[float],
    x3: Optional[float],
    theta: Optional[float],
    **params: Optional[float],
) -> None:
    """Iterates of the stroboscopic map."""

    lab = _lab(ctx)
    _apply_overrides(lab, **params)
    _emit_frame(lab.run_strobe(_state(lab, x1, x2, x3, theta), iterates, transient), output)


@cli.command()
@parameter_options()
@click.option("--seeds", type=int, default=None, help="Number of basin seeds (config: section.seeds).")
@click.option("--figure", type=click.Path(dir_okay=False), default=None, help="SVG scatter of the final iterates.")
@click.option("--output", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def classify(
    ctx: click.Context,
    seeds: Optional[int],
    figure: Optional[str],
    output: Optional[str],
    **params: Optional[float],
) -> None:
    """Classify the attractors reached from sampled seeds."""

    lab = _lab(ctx)
    _apply_overrides(lab, **params)
    _emit_frame(lab.run_classify(seeds, Path(figure) if figure else None), output)


@cli.command()
@parameter_options()
@state_options
@click.option("--iterations", type=int, default=None)
@click.option("--transient", type=int, default=None)
@click.pass_context
def lyapunov(
    ctx: click.Context,
    iterations: Optional[int],
    transient: Optional[int],
    x1: Optional[float],
    x2: Optional[float],
    x3: Optional[float],
    theta: Optional[float],
    **params: Optional[float],
) -> None:
    """Lyapunov spectrum per unit time with standard errors."""

    lab = _lab(ctx)
    _apply_overrides(lab, **params)
    result = lab.run_lyapunov(_state(lab, x1, x2, x3, theta), iterations, transient)
    _echo_json(
        {
            "exponents": list(result.exponents),
            "standard_errors": list(result.standard_errors),
            "iterations": result.iterations,
            "chaotic": result.is_chaotic(),
        }
    )


@cli.command()
@parameter_options()
@state_options
@click.pass_context
def rotation(
    ctx: click.Context,
    x1: Optional[float],
    x2: Optional[float],
    x3: Optional[float],
    theta: Optional[float],
    **params: Optional[float],
) -> None:
    """Rotation number of the stroboscopic orbit."""

    lab = _lab(ctx)
    _apply_overrides(lab, **params)
    _echo_json({"rotation_number": lab.run_rotation(_state(lab, x1, x2, x3, theta))})


@cli.command(name="model-return-map")
@parameter_options()
@click.option("--phi0", type=float, default=0.0, show_default=True)
@click.option("--r0", type=float, default=None, help="Defaults to 1 + eps_v/2.")
@click.option("--iterates", type=int, default=100, show_default=True)
@click.option("--output", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def model_return_map(
    ctx: click.Context,
    phi0: float,
    r0: Optional[float],
    iterates: int,
    output: Optional[str],
    **params: Optional[float],
) -> None:
    """Orbit table of the analytic return map."""

    lab = _lab(ctx)
    _apply_overrides(lab, **params)
    if r0 is None:
        r0 = 1.0 + 0.5 * lab.config.model.eps_v
    _emit_frame(lab.run_model_return_map(phi0, r0, iterates), output)


@cli.command(name="omega0")
@parameter_options(include_omega=False)
@click.pass_context
def omega0_command(ctx: click.Context, **params: Optional[float]) -> None:
    """Frequency threshold and derivative bounds on the horseshoe window."""

    lab = _lab(ctx)
    _apply_overrides(lab, **params)
    _echo_json(lab.run_omega0())


@cli.command(name="horseshoe-verify")
@parameter_options()
@click.option("--output-dir", type=click.Path(file_okay=False), default=None)
@click.option("--skip-itineraries", is_flag=True, default=False, help="Only check the strip conditions.")
@click.option("--timestamp", type=str, default=None)
@click.pass_context
def horseshoe_verify(
    ctx: click.Context,
    output_dir: Optional[str],
    skip_itineraries: bool,
    timestamp: Optional[str],
    **params: Optional[float],
) -> None:
    """Check the Conley-Moser conditions; exit code 3 when any of them fails."""

    lab = _lab(ctx)
    omega = params.get("omega")
    _apply_overrides(lab, **params)
    results = lab.run_horseshoe(omega, Path(output_dir) if output_dir else None, not skip_itineraries, timestamp)
    _echo_json({"summary": results["summary"], "files": [str(p) for p in results["files"]]})
    results["report"].raise_for_failure()


@cli.command()
@parameter_options()
@click.option("--task", type=click.Choice(["classify", "lyapunov", "rotation", "horseshoe"]), default=None)
@click.option("--level", type=click.Choice(["ode", "model"]), default=None)
@click.option(
    "--axis",
    "axes",
    type=(str, float, float, int),
    multiple=True,
    help="NAME LO HI COUNT, repeatable; replaces the configured axes.",
)
@click.option("--seed", type=int, default=None)
@click.option("--workers", type=int, default=None, help=f"Worker processes (env: {WORKERS_ENV}).")
@click.option("--output", type=click.Path(dir_okay=False), default=None)
@click.option("--timestamp", type=str, default=None)
@click.pass_context
def sweep(
    ctx: click.Context,
    task: Optional[str],
    level: Optional[str],
    axes: Sequence[Tuple[str, float, float, int]],
    seed: Optional[int],
    workers: Optional[int],
    output: Optional[str],
    timestamp: Optional[str],
    **params: Optional[float],
) -> None:
    """Run a parameter sweep into a CSV dataset with a JSON manifest."""

    lab = _lab(ctx)
    _apply_overrides(lab, **params)
    updates: Dict[str, Any] = {}
    if task:
        updates["task"] = task
    if level:
        updates["level"] = level
    if axes:
        updates["axes"] = {name: (lo, hi, count) for name, lo, hi, count in axes}
    if seed is not None:
        updates["seed"] = seed
    if workers is None and os.getenv(WORKERS_ENV):
        workers = int(os.getenv(WORKERS_ENV, "1"))
    if workers is not None:
        updates["workers"] = workers
    if updates:
        sweep_config = SweepConfig(**{**lab.config.sweep.dict(), **updates})
        lab.config = lab.config.copy(update={"sweep": sweep_config})
    result = lab.run_sweep(Path(output) if output else None, timestamp=timestamp)
    _echo_json({"csv": str(result.csv_path), "manifest": str(result.manifest_path), "rows": len(result.frame)})


@cli.command(name="route-report")
@parameter_options(include_omega=False)
@click.option("--omega", "omegas", type=float, multiple=True, help="Forcing frequency, repeatable.")
@click.option("--level", type=click.Choice(["model", "ode"]), default=None)
@click.option("--output-dir", type=click.Path(file_okay=False), default=None)
@click.pass_context
def route_report_command(
    ctx: click.Context,
    omegas: Sequence[float],
    level: Optional[str],
    output_dir: Optional[str],
    **params: Optional[float],
) -> None:
    """Fold count of the reference curve's image along an increasing ω list."""

    lab = _lab(ctx)
    _apply_overrides(lab, **params)
    results = lab.run_route(list(omegas) or None, level, Path(output_dir) if output_dir else None)
    report = results["report"]
    _echo_json(
        {
            "onset": list(report.onset) if report.onset else None,
            "folds": [point.folds for point in report.points],
            "files": [str(p) for p in report.files],
            "manifest": str(results["manifest"]),
        }
    )


def main(argv: Optional[List[str]] = None) -> int:
    """Run the CLI and map failures to exit codes."""

    try:
        rv = cli.main(args=argv, prog_name="forced-heteroclinic", standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("Aborted.", err=True)
        return EXIT_VALIDATION
    except click.ClickException as exc:
        exc.show()
        return EXIT_VALIDATION
    except VerificationFailed as exc:
        click.echo(f"Verification failed ({exc.condition}): {exc}", err=True)
        return EXIT_VERIFICATION
    except (ValueError, FileNotFoundError) as exc:
        click.echo(f"Invalid input: {exc}", err=True)
        return EXIT_VALIDATION
    except ForcedHeteroclinicError as exc:
        click.echo(f"Numerical failure ({type(exc).__name__}): {exc}", err=True)
        return EXIT_NUMERICAL
    return rv if isinstance(rv, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
