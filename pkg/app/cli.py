# app/cli.py
import os
import sys
import logging
from typing import Any, Dict, List, Optional, Sequence

import click

from app.config.settings import LOG_LEVEL
from app.schemas.ast import Continuous, Model
from app.schemas.simulation import SimConfig
from app.services.errors import HybridLangError, LagrangianSpecError, LangError, UnknownModel
from app.services.interpreter import evaluate_constant
from app.services.lagrangian import emit_explicit_source, euler_lagrange, format_implicit, parse_lagrangian_spec
from app.services.model_checks import walk_statements
from app.services.model_library import builtin_source, demo_scenario
from app.services.parser import parse_expression, parse_expression_list, parse_model
from app.services.simulation import Trace, simulate

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_LANG = 2
EXIT_RUNTIME = 3


def _read_text(path: str) -> str:
    with click.open_file(path, "r", encoding="utf-8") as handle:
        return handle.read()


def _source_name(path: str) -> str:
    return "<stdin>" if path == "-" else path


def load_model(path: str) -> Model:
    text = _read_text(path)
    try:
        return parse_model(text)
    except LangError as e:
        raise e.with_source(_source_name(path))


def parse_args(values: Sequence[str]) -> List[Any]:
    """Constructor arguments; each option value may hold a comma-separated list."""
    args: List[Any] = []
    for text in values:
        try:
            args += [evaluate_constant(expr) for expr in parse_expression_list(text)]
        except LangError as e:
            raise e.with_source("--args")
    return args


def parse_overrides(values: Sequence[str]) -> Dict[str, Any]:
    overrides: Dict[str, Any] = {}
    for item in values:
        name, sep, expr = item.partition("=")
        if not sep or not name.strip():
            raise click.BadParameter(f"expected NAME=EXPR, got '{item}'", param_hint="--set")
        try:
            overrides[name.strip()] = evaluate_constant(parse_expression(expr))
        except LangError as e:
            raise e.with_source("--set")
    return overrides


def _emit_trace(trace: Trace, fmt: str, out: Optional[str]) -> None:
    text = trace.to_csv() if fmt == "csv" else trace.to_jsonl()
    if out:
        with open(out, "w", encoding="utf-8") as handle:
            handle.write(text)
        logger.info(f"Wrote {len(trace.rows)} rows to {out}")
    else:
        click.echo(text, nl=False)


def _plural(count: int, word: str, plural: Optional[str] = None) -> str:
    return f"{count} {word if count == 1 else (plural or word + 's')}"


@click.group()
@click.option("--log-level", default=LOG_LEVEL, show_default=True, help="Logging level for stderr diagnostics.")
def cli(log_level: str):
    """Hybrid-systems modeling language: parse, simulate and derive equations of motion."""
    logging.basicConfig(level=log_level.upper(), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


@cli.command("parse")
@click.argument("path", type=click.Path(exists=True, dir_okay=False, allow_dash=True))
def parse_command(path: str):
    """Parse and load-check a model file, then print a summary."""
    model = load_model(path)
    params = sum(len(cls.params) for cls in model.classes)
    click.echo(f"{_plural(len(model.classes), 'class', 'classes')}, {_plural(params, 'param')}")
    for cls in model.classes:
        continuous = sum(isinstance(s, Continuous) for s in walk_statements(cls.body))
        click.echo(f"  {cls.name}: {_plural(len(cls.params), 'param')}, "
                   f"{_plural(len(cls.private_inits), 'private init')}, "
                   f"{_plural(continuous, 'continuous assignment')}")


@cli.command("simulate", context_settings={"ignore_unknown_options": True})
@click.argument("path", type=click.Path(exists=True, dir_okay=False, allow_dash=True))
@click.argument("extra_args", nargs=-1)
@click.option("--entry", required=True, help="Class to instantiate as the root object.")
@click.option("--args", "arg_values", multiple=True, help="Constructor arguments: '[0,0,0],0,0,0' or [0,0,0] 0 0 0.")
@click.option("--dt", type=float, default=None, help="Step size in seconds.")
@click.option("--end", "end_time", type=float, default=None, help="Simulated seconds.")
@click.option("--vars", "variables", default=None, help="Comma-separated paths to record.")
@click.option("--format", "fmt", type=click.Choice(["csv", "jsonl"]), default="csv", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False, writable=True), default=None)
@click.option("--set", "assignments", multiple=True, help="Initial value override NAME=EXPR.")
@click.option("--seed", type=int, default=None, help="Reserved.")
def simulate_command(path, extra_args, entry, arg_values, dt, end_time, variables, fmt, out, assignments, seed):
    """Run a model with constant-step Euler and write its trace."""
    unknown = [value for value in extra_args if value.startswith("--")]
    if unknown:
        raise click.UsageError(f"no such option: {unknown[0]}")
    model = load_model(path)
    config = _config(dt, end_time, variables, parse_overrides(assignments))
    trace = simulate(model, entry, parse_args(arg_values + extra_args), config)
    _emit_trace(trace, fmt, out)


def _config(dt, end_time, variables, overrides) -> SimConfig:
    values: Dict[str, Any] = {"overrides": overrides}
    if dt is not None:
        values["dt"] = dt
    if end_time is not None:
        values["end_time"] = end_time
    if variables:
        values["recorded"] = [v.strip() for v in variables.split(",")]
    try:
        return SimConfig(**values)
    except ValueError as e:
        raise click.BadParameter(str(e).splitlines()[-1])


@cli.command("derive")
@click.argument("path", type=click.Path(exists=True, dir_okay=False, allow_dash=True))
@click.option("--emit", is_flag=True, help="Also print explicit model source.")
@click.option("--class-name", default=None, help="Name of the emitted class.")
@click.option("--seed", type=int, default=0, show_default=True, help="Seed for the affinity spot check.")
def derive_command(path: str, emit: bool, class_name: Optional[str], seed: int):
    """Derive Euler-Lagrange equations from a Lagrangian spec file."""
    text = _read_text(path)
    default_name = "system" if path == "-" else os.path.splitext(os.path.basename(path))[0]
    try:
        system = parse_lagrangian_spec(text, default_name=default_name)
    except LagrangianSpecError as e:
        raise e.with_source(_source_name(path))
    eom = euler_lagrange(system, seed=seed)
    # Comment lines keep the whole output valid model source.
    for line in format_implicit(eom).splitlines():
        click.echo(f"// {line}")
    if emit:
        click.echo(emit_explicit_source(system, class_name, eom=eom), nl=False)


@cli.command("demo")
@click.argument("name")
@click.option("--dt", type=float, default=None)
@click.option("--end", "end_time", type=float, default=None)
@click.option("--vars", "variables", default=None)
@click.option("--format", "fmt", type=click.Choice(["csv", "jsonl"]), default="csv", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False, writable=True), default=None)
def demo_command(name, dt, end_time, variables, fmt, out):
    """Run a built-in model with its canned configuration."""
    try:
        scenario = demo_scenario(name)
    except UnknownModel as e:
        raise click.BadParameter(e.message, param_hint="NAME")
    model = parse_model(builtin_source(scenario.model))
    base = scenario.config
    config = _config(base.dt if dt is None else dt, base.end_time if end_time is None else end_time,
                     variables or (",".join(base.recorded) if base.recorded else None), base.overrides)
    trace = simulate(model, scenario.entry, scenario.args, config)
    _emit_trace(trace, fmt, out)


def exit_code_for(error: HybridLangError) -> int:
    # Spec-file errors are input errors even though they derive from SymbolicError.
    if isinstance(error, (LangError, LagrangianSpecError)):
        return EXIT_LANG
    return EXIT_RUNTIME


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point returning the process exit code instead of exiting."""
    try:
        result = cli.main(args=list(argv if argv is not None else sys.argv[1:]),
                          prog_name="hybridlang", standalone_mode=False)
        return result if isinstance(result, int) else EXIT_OK
    except click.ClickException as e:
        e.show()
        return EXIT_USAGE
    except click.Abort:
        click.echo("Aborted.", err=True)
        return EXIT_USAGE
    except HybridLangError as e:
        click.echo(f"error: {e}", err=True)
        return exit_code_for(e)
    except OSError as e:
        click.echo(f"error: {e}", err=True)
        return EXIT_RUNTIME


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
