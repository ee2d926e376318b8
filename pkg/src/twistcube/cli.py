"""
Main CLI interface for twistcube.
"""

import json
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Callable, Dict, Iterator, List, NoReturn, Optional, Sequence

import click
from rich.console import Console
from rich.markup import escape
from rich.table import Table

from . import __version__
from .core import MAX_SEED, CouplingPolicy, TwistedCube, build
from .errors import (
    DiameterCapError,
    EnumerationBudgetError,
    MemoryBudgetError,
)
from .harness import emit, parse_overrides, render, resolve_config, run_sweep
from .metrics import (
    DEFAULT_EXACT_CAP,
    DEFAULT_PAIRS,
    DEFAULT_SOURCES,
    diameter_bounds_sampled,
    exact_report,
)
from .models import CheckReport, DiameterReport, RouterParams
from .routing import default_params, greedy_route, theoretical_length_bound, twist_route, validate_path
from .storage import load_graph, save_graph
from .utils import format_label, parse_label, setup_logging
from .verify import DEFAULT_SAMPLES, SUITES, Report, all_passed, diameter_lower_bound, run_suite

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARTIAL = 2
EXIT_RESOURCE = 3
EXIT_CHECK_FAILED = 4

RESOURCE_ERRORS = (MemoryBudgetError, DiameterCapError, EnumerationBudgetError)

console = Console()
err_console = Console(stderr=True)


class TwistCubeGroup(click.Group):
    """Click group whose usage errors exit with 1 instead of Click's 2."""

    def main(self, *args: Any, standalone_mode: bool = True, **kwargs: Any) -> Any:
        if not standalone_mode:
            return super().main(*args, standalone_mode=False, **kwargs)
        try:
            result = super().main(*args, standalone_mode=False, **kwargs)
        except click.ClickException as e:
            e.show()
            sys.exit(EXIT_USAGE if isinstance(e, click.UsageError) else e.exit_code)
        except click.Abort:
            err_console.print("[red]Aborted![/red]")
            sys.exit(EXIT_USAGE)
        sys.exit(result if isinstance(result, int) else EXIT_OK)


class VertexLabel(click.ParamType):
    """Vertex label in decimal or 0b-prefixed binary."""

    name = 'label'

    def convert(self, value: Any, param: Optional[click.Parameter], ctx: Optional[click.Context]) -> int:
        if isinstance(value, int):
            return value
        try:
            return parse_label(value)
        except ValueError as e:
            self.fail(str(e), param, ctx)


def fail(message: Any, code: int = EXIT_USAGE) -> NoReturn:
    err_console.print(f"[red]Error: {escape(str(message))}[/red]")
    sys.exit(code)


@contextmanager
def cli_errors() -> Iterator[None]:
    """Print library errors and exit with the matching code."""
    try:
        yield
    except RESOURCE_ERRORS as e:
        fail(e, EXIT_RESOURCE)
    except ValueError as e:
        fail(e)


def print_json(data: Any) -> None:
    click.echo(json.dumps(data, indent=2))


policy_option = click.option(
    '--policy',
    type=click.Choice([p.value for p in CouplingPolicy], case_sensitive=False),
    default=CouplingPolicy.INDEPENDENT.value,
    show_default=True,
    help='Coupling policy',
)
seed_option = click.option(
    '--seed', type=click.IntRange(0, MAX_SEED), default=0, show_default=True, help='Master seed'
)
threads_option = click.option(
    '--threads', type=click.IntRange(min=0), default=None, help='Worker threads (default: one per CPU)'
)

GRAPH_OPTIONS = [
    click.option('--n', 'n', type=int, default=None, help='Dimension of a graph to build on the fly'),
    policy_option,
    seed_option,
    click.option('--graph-file', type=click.Path(path_type=Path), default=None, help='TWC1 file written by generate'),
    threads_option,
]


def graph_options(func: Callable) -> Callable:
    """--n/--policy/--seed or --graph-file, plus --threads."""
    for option in reversed(GRAPH_OPTIONS):
        func = option(func)
    return func


def load_source(
    n: Optional[int], policy: str, seed: int, graph_file: Optional[Path], threads: Optional[int]
) -> TwistedCube:
    """Build or load the graph a command works on; exactly one source is allowed."""
    if graph_file is not None:
        if n is not None:
            fail("give exactly one of --n or --graph-file")
        return load_graph(graph_file)
    if n is None:
        fail("give exactly one of --n or --graph-file")
    return build(n, policy.lower(), seed, threads=threads)


@click.group(cls=TwistCubeGroup)
@click.version_option(__version__)
@click.option('--verbose', '-v', is_flag=True, help='Show debug logging on stderr')
def cli(verbose: bool) -> None:
    """twistcube - random twisted hypercubes"""
    setup_logging(verbose, err_console)


@cli.command()
@click.option('--n', 'n', type=int, required=True, help='Dimension')
@policy_option
@seed_option
@click.option('--out', type=click.Path(path_type=Path), required=True, help='Output TWC1 file')
@threads_option
def generate(n: int, policy: str, seed: int, out: Path, threads: Optional[int]) -> None:
    """Build a graph and write it as a TWC1 file."""
    with cli_errors():
        G = build(n, policy.lower(), seed, threads=threads)
        written = save_graph(out, G)

    click.echo(json.dumps({'n': G.n, 'policy': G.policy.value, 'seed': G.seed, 'bytes': written}))


@cli.command()
@graph_options
@click.option('--from', 'source', type=VertexLabel(), required=True, help='Start label (decimal or 0b...)')
@click.option('--to', 'target', type=VertexLabel(), required=True, help='End label (decimal or 0b...)')
@click.option('--algo', type=click.Choice(['greedy', 'twist']), default='twist', show_default=True)
@click.option('--t', 't', type=click.IntRange(min=1), default=None, help='Ball radius (default: schedule for n)')
@click.option('--n0', 'n0', type=click.IntRange(min=1), default=None, help='Greedy switch threshold (default: schedule for n)')
@click.option('--json', 'as_json', is_flag=True, help='Print JSON')
def route(
    n: Optional[int],
    policy: str,
    seed: int,
    graph_file: Optional[Path],
    threads: Optional[int],
    source: int,
    target: int,
    algo: str,
    t: Optional[int],
    n0: Optional[int],
    as_json: bool,
) -> None:
    """Route between two vertices with the greedy or twist router."""
    with cli_errors():
        G = load_source(n, policy, seed, graph_file, threads)
        G.check_vertex(source)
        G.check_vertex(target)

        params: Optional[RouterParams] = None
        if algo == 'greedy':
            path = greedy_route(G, source, target)
        else:
            schedule = default_params(G.n)
            params = RouterParams(t=t or schedule.t, n0=n0 or schedule.n0)
            path = twist_route(G, source, target, params)

    valid = validate_path(G, path, source, target)
    if not valid:
        fail(f"{algo} route from {source} to {target} failed validation", EXIT_CHECK_FAILED)

    result: Dict[str, Any] = {
        'n': G.n,
        'policy': G.policy.value,
        'seed': G.seed,
        'algo': algo,
        'from': format_label(source, G.n),
        'to': format_label(target, G.n),
        'valid': valid,
        **path.to_dict(),
        'vertices_binary': [format_label(x, G.n)['binary'] for x in path.vertices],
    }
    if params is not None:
        result['params'] = params.to_dict()
        result['length_bound'] = theoretical_length_bound(G.n, params)

    if as_json:
        print_json(result)
        return

    console.print(
        f"[bold]{algo} route[/bold] {result['from']['binary']} -> {result['to']['binary']}: "
        f"[cyan]{path.length}[/cyan] edges"
    )
    table = Table(show_header=True, header_style="bold blue")
    table.add_column("Step", style="dim", no_wrap=True)
    table.add_column("Level", no_wrap=True)
    table.add_column("Vertex", style="cyan", no_wrap=True)
    table.add_row("0", "", format_label(path.start, G.n)['binary'])
    for i, (k, v) in enumerate(zip(path.levels, path.vertices[1:]), start=1):
        table.add_row(str(i), str(k), format_label(v, G.n)['binary'])
    console.print(table)
    if params is not None:
        console.print(f"[dim]t = {params.t}, n0 = {params.n0}, phases = {path.phases}, "
                      f"alpha trace = {path.alpha_trace}[/dim]")
    console.print("[green]✓ valid[/green]")


def _diameter_table(report: DiameterReport) -> Table:
    table = Table(show_header=True, header_style="bold blue")
    table.add_column("Field", style="cyan", no_wrap=True)
    table.add_column("Value")
    for key, value in report.to_dict().items():
        table.add_row(key, '' if value is None else str(value))
    return table


@cli.command()
@graph_options
@click.option('--exact/--sampled', 'exact', default=None, help='All-pairs BFS or sampled bounds (default: exact up to the cap)')
@click.option('--cap', type=click.IntRange(1, 30), default=DEFAULT_EXACT_CAP, show_default=True, help='Largest n for all-pairs BFS')
@click.option('--sources', type=click.IntRange(min=1), default=DEFAULT_SOURCES, show_default=True, help='BFS sources for sampled bounds')
@click.option('--pairs', type=click.IntRange(min=0), default=DEFAULT_PAIRS, show_default=True, help='Twist-routed pairs for the sampled upper bound')
@click.option('--sample-seed', type=click.IntRange(0, MAX_SEED), default=None, help='Sampling seed (default: graph seed)')
@click.option('--json', 'as_json', is_flag=True, help='Print JSON')
def diameter(
    n: Optional[int],
    policy: str,
    seed: int,
    graph_file: Optional[Path],
    threads: Optional[int],
    exact: Optional[bool],
    cap: int,
    sources: int,
    pairs: int,
    sample_seed: Optional[int],
    as_json: bool,
) -> None:
    """Exact diameter, or sampled lower/upper bounds."""
    with cli_errors():
        G = load_source(n, policy, seed, graph_file, threads)
        if exact is None:
            exact = G.n <= cap
        if exact:
            report = exact_report(G, cap=cap, threads=threads)
        else:
            report = diameter_bounds_sampled(
                G, sources, pairs, G.seed if sample_seed is None else sample_seed, threads=threads
            )

    result = report.to_dict()
    result['counting_bound'] = diameter_lower_bound(G.n) if G.n >= 2 else None

    if as_json:
        print_json(result)
        return

    console.print(f"[bold]Diameter of n = {G.n} ({G.policy.value}, seed {G.seed})[/bold]\n")
    console.print(_diameter_table(report))
    if report.upper_is_heuristic:
        console.print("[yellow]Upper bound is a route-length statistic, not a certificate[/yellow]")


def _summary_row(report: Report) -> List[str]:
    if isinstance(report, CheckReport):
        status = "[green]pass[/green]" if report.passed else f"[red]FAIL ({report.details.get('failure_count', 0)})[/red]"
        return [report.name, report.scope, str(report.checked), status]
    return [
        'quasirandomness',
        f"k={report.k} t={report.t}",
        str(report.pairs),
        f"miss {report.miss_frequency:.4f} (exact {report.exact_miss_mean:.4f}, bound {report.bound_mean:.4f})",
    ]


@cli.command()
@graph_options
@click.option('--suite', type=click.Choice(list(SUITES)), default='all', show_default=True)
@click.option('--k', 'k', type=click.IntRange(min=1), default=None, help='Level for the quasirandomness estimate (default: n)')
@click.option('--t', 't', type=click.IntRange(min=0), default=None, help='Ball radius (default: 3, capped at n)')
@click.option('--pairs', type=click.IntRange(min=1), default=1000, show_default=True, help='Pairs for the quasirandomness estimate')
@click.option('--samples', type=click.IntRange(min=1), default=DEFAULT_SAMPLES, show_default=True, help='Vertices sampled above the exhaustive cutoff')
@click.option('--sample-seed', type=click.IntRange(0, MAX_SEED), default=None, help='Sampling seed (default: graph seed)')
@click.option('--json', 'as_json', is_flag=True, help='Print JSON')
def verify(
    n: Optional[int],
    policy: str,
    seed: int,
    graph_file: Optional[Path],
    threads: Optional[int],
    suite: str,
    k: Optional[int],
    t: Optional[int],
    pairs: int,
    samples: int,
    sample_seed: Optional[int],
    as_json: bool,
) -> None:
    """Run the deterministic checks (and the quasirandomness estimate)."""
    with cli_errors():
        G = load_source(n, policy, seed, graph_file, threads)
        reports = run_suite(
            G, suite, t=t, k=k, pairs=pairs, samples=samples, seed=sample_seed, threads=threads
        )
    passed = all_passed(reports)

    if as_json:
        print_json({'passed': passed, 'reports': [r.to_dict() for r in reports]})
    else:
        table = Table(show_header=True, header_style="bold blue")
        table.add_column("Check", style="cyan", no_wrap=True)
        table.add_column("Scope")
        table.add_column("Checked", justify="right")
        table.add_column("Result")
        for report in reports:
            table.add_row(*_summary_row(report))
        console.print(table)
        for report in reports:
            if isinstance(report, CheckReport) and report.failures:
                console.print(f"[red]{report.name}: first witness {escape(str(report.failures[0]))}[/red]")

    if not passed:
        sys.exit(EXIT_CHECK_FAILED)


@cli.command()
@click.option('--config', 'config_file', type=click.Path(path_type=Path), default=None, help='Flat key = value sweep file')
@click.option('--set', 'overrides', multiple=True, metavar='KEY=VALUE', help='Override one config key (repeatable)')
@click.option('--threads', type=click.IntRange(min=1), default=None, help='Cells run in parallel')
@click.option('--output', type=click.Path(path_type=Path), default=None, help='Result file (default: stdout)')
@click.option('--format', 'fmt', type=click.Choice(['csv', 'json']), default=None, help='Result format')
@click.option('--json', 'as_json', is_flag=True, help="Print JSON (the records on stdout, or a summary when writing to a file)")
def sweep(
    config_file: Optional[Path],
    overrides: Sequence[str],
    threads: Optional[int],
    output: Optional[Path],
    fmt: Optional[str],
    as_json: bool,
) -> None:
    """
    Run a config-driven experiment sweep.

    Rows carry build and measure times unless timings = false is set; only
    then is the output byte-identical across runs and thread counts.
    """
    with cli_errors():
        values: Dict[str, Any] = parse_overrides(overrides)
        values.update({'threads': threads, 'output': output, 'format': fmt})
        config = resolve_config(config_file, values)
        records = run_sweep(config)
        if config.output is not None:
            emit(records, config.format, config.output)

    skipped = [r for r in records if r.skipped]
    if config.output is None:
        click.echo(render(records, 'json' if as_json else config.format), nl=False)
    elif as_json:
        print_json({'output': str(config.output), 'records': len(records), 'skipped': len(skipped)})
    else:
        console.print(f"[green]✓ Wrote {len(records)} records to {config.output}[/green]")

    if skipped:
        sys.exit(EXIT_PARTIAL)


if __name__ == '__main__':
    cli()
