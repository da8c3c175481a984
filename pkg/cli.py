import csv
import functools
import io
import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional

import click

from constructions import alpha_root, block_word, block_word_bound, existence_bound, random_word
from exact import f_exact, f_naive, verify_tuplet
from extraction import ExtractionParams, extract_ktuplets_regular, extract_twins_regular, greedy_triples, pipeline
from helpers.enums import Construction, ExitCode, OutputFormat
from helpers.errors import PreconditionError
from helpers.helper import atomic_write_text, jsonable, parse_range, parse_rational
from logging_config import configure_logging, verbosity_level
from models.partition import RegularityParams
from models.table import CSV_COLUMNS, TableEntry
from models.tuplet import TupletResult
from models.word import Alphabet, Word
from regularity import irregular_mass, is_regular_partition, regularity_partition
from search_engine import generate_table, resolve_jobs
from setup_config import DEFAULTS, ConfigManager
from word_core import infer_alphabet, parse_word, read_words

logger = logging.getLogger(__name__)


@dataclass
class CliConfig:
    """Global options shared by every subcommand."""

    config: ConfigManager
    fmt: OutputFormat = OutputFormat.JSON
    out: Optional[str] = None
    seed: int = 0
    jobs: int = 1
    verbose: int = 0
    command: str = ""
    details: Dict[str, Any] = field(default_factory=dict)


class RationalType(click.ParamType):
    name = "rational"

    def convert(self, value, param, ctx):
        if isinstance(value, Fraction):
            return value
        try:
            return parse_rational(value)
        except PreconditionError as e:
            self.fail(str(e), param, ctx)


RATIONAL = RationalType()


def _record(cfg: CliConfig, status: str, **details):
    details = {**cfg.details, **details}
    cfg.config.log_operation(cfg.command, status, jsonable(details))


def handles_errors(func):
    """Map precondition failures to exit code 4 with a one-line diagnostic on stderr."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        ctx = click.get_current_context()
        cfg: CliConfig = ctx.obj
        cfg.command = ctx.command_path.split(" ", 1)[-1]
        try:
            result = func(*args, **kwargs)
        except PreconditionError as e:
            logger.debug("Precondition failure in %s", cfg.command, exc_info=True)
            click.echo(f"Error: {e}", err=True)
            _record(cfg, "error", error=str(e))
            raise click.exceptions.Exit(ExitCode.PRECONDITION.value)
        if result == ExitCode.INTERVAL:
            _record(cfg, "interval")
            raise click.exceptions.Exit(ExitCode.INTERVAL.value)
        _record(cfg, "ok")
        return result

    return wrapper


def emit(cfg: CliConfig, text: str) -> None:
    if cfg.out:
        atomic_write_text(cfg.out, text)
        logger.info("Report written to %s", cfg.out)
    else:
        click.echo(text, nl=False)


def _json(data: Any) -> str:
    return json.dumps(jsonable(data), indent=2) + "\n"


def _csv(columns: List[str], rows: Iterable[Dict[str, Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({c: jsonable(row.get(c)) for c in columns})
    return buffer.getvalue()


def _text(data: Dict[str, Any]) -> str:
    return "".join(f"{key}: {value}\n" for key, value in jsonable(data).items())


def render_mapping(cfg: CliConfig, data: Dict[str, Any]) -> str:
    if cfg.fmt is OutputFormat.JSON:
        return _json(data)
    if cfg.fmt is OutputFormat.CSV:
        return _csv(list(data), [data])
    return _text(data)


def render_many(cfg: CliConfig, reports: List[Dict[str, Any]], columns: List[str]) -> str:
    if cfg.fmt is OutputFormat.JSON:
        return _json(reports[0] if len(reports) == 1 else reports)
    if cfg.fmt is OutputFormat.CSV:
        return _csv(columns, reports)
    return "\n".join(_text(r) for r in reports)


def load_words(input_path: Optional[str], word: Optional[str], ell: Optional[int]) -> List[Word]:
    if (input_path is None) == (word is None):
        raise click.UsageError("Give exactly one of --input or --word")
    alphabet = Alphabet(ell) if ell else None
    if input_path is not None:
        words = read_words(input_path, alphabet)
        if not words:
            raise click.UsageError(f"No words in {input_path}")
        return words
    return [parse_word(word, alphabet or infer_alphabet(word))]


def checked(word: Word, result: TupletResult) -> Dict[str, Any]:
    """Re-verify before anything is printed."""
    verdict = verify_tuplet(word, result.supports)
    if not verdict:
        raise click.ClickException(f"Internal error: produced an invalid tuplet ({verdict.reason})")
    return {**result.to_dict(), "host_length": len(word), "verified": True}


def _entry_report(entry: TableEntry, omit_timing: bool) -> Dict[str, Any]:
    data = entry.to_dict(omit_timing)
    if entry.witness is not None and entry.witness_word is not None:
        data["tuplet"] = checked(entry.witness_word, entry.witness)
    return data


def _epsilon(cfg: CliConfig, epsilon: Optional[Fraction]) -> Fraction:
    return epsilon if epsilon is not None else parse_rational(cfg.config.get("epsilon"))


def _extraction_params(cfg: CliConfig, k: int, epsilon: Optional[Fraction], auto: Optional[str],
                       method: Optional[str]) -> ExtractionParams:
    if auto is None:
        return ExtractionParams(epsilon=_epsilon(cfg, epsilon), k=k, method=method)
    c = float(cfg.config.get("auto_epsilon_c")) if auto == "config" else float(auto)
    return ExtractionParams(epsilon=None, k=k, auto_epsilon=True, c=c,
                            epsilon_floor=parse_rational(cfg.config.get("epsilon_floor")),
                            epsilon_cap=parse_rational(cfg.config.get("epsilon_cap")),
                            method=method)


TUPLET_COLUMNS = ["k", "length", "common_word", "supports", "construction", "host_length", "verified"]

word_source = [
    click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False), help="Word file"),
    click.option("--word", type=str, help="A single word"),
    click.option("--ell", type=click.IntRange(min=2), default=None, help="Alphabet size (default: inferred)"),
]

epsilon_source = [
    click.option("--epsilon", type=RATIONAL, default=None, help="Rational p/q or decimal"),
    click.option("--auto-epsilon", "auto", type=str, is_flag=False, flag_value="config", default=None,
                 help="Choose epsilon from n, optionally with constant C"),
]


def output_options(func):
    """Let --format and --out also follow the subcommand; they override the global values."""

    @functools.wraps(func)
    def wrapper(*args, fmt_override=None, out_override=None, **kwargs):
        cfg: CliConfig = click.get_current_context().obj
        if fmt_override:
            cfg.fmt = OutputFormat(fmt_override)
        if out_override:
            cfg.out = out_override
        return func(*args, **kwargs)

    wrapper = click.option("--out", "out_override", type=click.Path(dir_okay=False), default=None,
                           help="Write the report atomically to a file")(wrapper)
    return click.option("--format", "fmt_override", type=click.Choice([f.value for f in OutputFormat]),
                        default=None)(wrapper)


def with_options(options):
    def decorator(func):
        for option in reversed(options):
            func = option(func)
        return func
    return decorator


@click.group()
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
              help="SQLite configuration database (env TWINS_CONFIG_DB)")
@click.option("-v", "--verbose", count=True, help="-v for INFO, -vv for DEBUG on stderr")
@click.option("--format", "fmt", type=click.Choice([f.value for f in OutputFormat]), default=OutputFormat.JSON.value)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write the report atomically to a file")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--jobs", type=click.IntRange(min=0), default=None, help="Worker processes (0 = all CPUs)")
@click.pass_context
def cli(ctx, config_path, verbose, fmt, out, seed, jobs):
    """Twins and k-tuplets in words: regularity partitions, extraction, exact tables and bounds."""
    config = ConfigManager(config_path)
    configure_logging(app_name="twins", level=verbosity_level(verbose, config.get("log_level")))
    ctx.obj = CliConfig(config=config, fmt=OutputFormat(fmt), out=out, seed=seed,
                        jobs=resolve_jobs(config.get("jobs") if jobs is None else jobs), verbose=verbose)


@cli.command()
@output_options
@with_options(word_source)
@click.option("--epsilon", type=RATIONAL, default=None, help="Rational p/q or decimal")
@click.option("--t0", type=click.IntRange(min=1), default=None, help="Initial factor count (default ceil(1/eps))")
@click.pass_obj
@handles_errors
def regularize(cfg: CliConfig, input_path, word, ell, epsilon, t0):
    """Eps-regular partition of every word, with the refinement trace."""
    eps = _epsilon(cfg, epsilon)
    params = RegularityParams(eps, t0) if t0 else RegularityParams.for_epsilon(eps)
    reports = []
    for w in load_words(input_path, word, ell):
        partition, trace = regularity_partition(w, params, jobs=cfg.jobs)
        report = partition.to_dict(eps, trace)
        report["regular_partition"] = is_regular_partition(partition, eps)
        report["irregular_mass"] = irregular_mass(partition)
        reports.append(report)
    cfg.details = {"epsilon": eps, "words": len(reports)}
    if cfg.fmt is OutputFormat.CSV:
        rows = [{"word": i + 1, **f, "densities": " ".join(f["densities"])}
                for i, r in enumerate(reports) for f in r["factors"]]
        emit(cfg, _csv(["word", "start", "end", "regular", "densities"], rows))
    elif cfg.fmt is OutputFormat.TEXT:
        emit(cfg, "\n".join(_text({k: v for k, v in r.items() if k not in ("factors", "trace")})
                            for r in reports))
    else:
        emit(cfg, render_many(cfg, reports, []))


@cli.command()
@output_options
@with_options(word_source + epsilon_source)
@click.option("--method", type=click.Choice(["greedy", "claim1", "pipeline"]), default="pipeline", show_default=True)
@click.pass_obj
@handles_errors
def twins(cfg: CliConfig, input_path, word, ell, epsilon, auto, method):
    """Twins (k = 2) by greedy triples, the regular-word construction or the full pipeline."""
    reports = []
    for w in load_words(input_path, word, ell):
        if method == Construction.GREEDY.value:
            result = greedy_triples(w)
        elif method == Construction.CLAIM1.value:
            result = extract_twins_regular(w, _epsilon(cfg, epsilon))
        else:
            result, _ = pipeline(w, _extraction_params(cfg, 2, epsilon, auto, None), jobs=cfg.jobs)
        reports.append(checked(w, result))
    cfg.details = {"method": method, "words": len(reports)}
    emit(cfg, render_many(cfg, reports, TUPLET_COLUMNS))


@cli.command()
@output_options
@with_options(word_source + epsilon_source)
@click.option("-k", "k", type=click.IntRange(min=2), required=True)
@click.option("--method", type=click.Choice(["thm2", "pipeline"]), default="pipeline", show_default=True)
@click.pass_obj
@handles_errors
def ktuplets(cfg: CliConfig, input_path, word, ell, epsilon, auto, k, method):
    """k pairwise disjoint identical subwords."""
    reports = []
    for w in load_words(input_path, word, ell):
        if method == Construction.THM2.value:
            result = extract_ktuplets_regular(w, _epsilon(cfg, epsilon), k)
        else:
            result, _ = pipeline(w, _extraction_params(cfg, k, epsilon, auto, None), jobs=cfg.jobs)
        reports.append(checked(w, result))
    cfg.details = {"method": method, "k": k, "words": len(reports)}
    emit(cfg, render_many(cfg, reports, TUPLET_COLUMNS))


@cli.command()
@output_options
@click.option("--word", type=str, default=None)
@click.option("--table", is_flag=True, help="Compute f(n,k,ell) over all words")
@click.option("--n", "n_range", type=str, default=None, help="Range A..B for --table")
@click.option("-k", "k", type=click.IntRange(min=2), required=True)
@click.option("--ell", type=click.IntRange(min=2), default=None)
@click.option("--budget", type=click.FloatRange(min=0, min_open=True), default=None, help="Seconds per word or cell")
@click.option("--require-exact", is_flag=True, help="Exit 3 when any value is only an interval")
@click.option("--oracle", is_flag=True, help="Use naive enumeration instead of branch and bound")
@click.option("--omit-timing", is_flag=True, help="Write 0 for elapsed_ms")
@click.pass_obj
@handles_errors
def exact(cfg: CliConfig, word, table, n_range, k, ell, budget, require_exact, oracle, omit_timing):
    """f(S,k) for one word or the table f(n,k,ell)."""
    if budget is None and cfg.config.get("budget_seconds") is not None:
        budget = float(cfg.config.get("budget_seconds"))
    if table == (word is not None):
        raise click.UsageError("Give exactly one of --word or --table")

    if word is not None:
        w = parse_word(word, Alphabet(ell) if ell else infer_alphabet(word))
        if oracle:
            value = f_naive(w, k)
            report = {"word": str(w), "k": k, "lo": value, "hi": value, "exact": True, "provenance": "naive enumeration"}
        else:
            result = f_exact(w, k, budget=budget)
            report = {"word": str(w), "k": k, "lo": result.lo, "hi": result.hi, "exact": result.exact,
                      "provenance": "branch and bound",
                      "tuplet": checked(w, result.witness) if result.witness and result.lo else None}
        cfg.details = {"word": str(w), "k": k, "lo": report["lo"], "hi": report["hi"]}
        emit(cfg, render_mapping(cfg, report))
        return ExitCode.INTERVAL if require_exact and not report["exact"] else ExitCode.OK

    if n_range is None or ell is None:
        raise click.UsageError("--table needs --n A..B and --ell")
    entries: List[TableEntry] = generate_table(parse_range(n_range), k, ell, jobs=cfg.jobs, budget=budget, oracle=oracle)
    cfg.details = {"n": n_range, "k": k, "ell": ell, "values": [[e.lo, e.hi] for e in entries]}
    if cfg.fmt is OutputFormat.CSV:
        emit(cfg, _csv(CSV_COLUMNS, [e.to_row(omit_timing) for e in entries]))
    elif cfg.fmt is OutputFormat.TEXT:
        emit(cfg, "".join(f"f({e.n},{e.k},{e.ell}) = {e.lo if e.exact else f'[{e.lo}, {e.hi}]'}\n" for e in entries))
    else:
        emit(cfg, _json([_entry_report(e, omit_timing) for e in entries]))
    return ExitCode.INTERVAL if require_exact and not all(e.exact for e in entries) else ExitCode.OK


@cli.group()
def construct():
    """Extremal and random words."""


@construct.command()
@output_options
@click.option("--levels", type=click.IntRange(min=0), required=True)
@click.pass_obj
@handles_errors
def block(cfg: CliConfig, levels):
    """Block word S_K ... S_0 with |S_i| = 3^i."""
    w = block_word(levels)
    n, bound = block_word_bound(levels)
    cfg.details = {"levels": levels}
    emit(cfg, render_mapping(cfg, {"word": str(w), "n": n, "levels": levels, "twin_bound": bound, "log_base": "e"}))


@construct.command(name="random")
@output_options
@click.option("--n", "n", type=click.IntRange(min=0), required=True)
@click.option("--ell", type=click.IntRange(min=1), required=True)
@click.pass_obj
@handles_errors
def random_(cfg: CliConfig, n, ell):
    """Uniform random word from numpy's PCG64 seeded with --seed."""
    w = random_word(n, ell, cfg.seed)
    cfg.details = {"n": n, "ell": ell, "seed": cfg.seed}
    emit(cfg, render_mapping(cfg, {"word": str(w), "n": n, "ell": ell, "seed": cfg.seed, "generator": "PCG64"}))


@cli.command()
@output_options
@click.option("-k", "k", type=click.IntRange(min=2), required=True)
@click.option("--ell", type=click.IntRange(min=2), required=True)
@click.option("--tol", type=float, default=None)
@click.pass_obj
@handles_errors
def alpha(cfg: CliConfig, k, ell, tol):
    """Smallest root of the first-moment equation on (0, 1/k)."""
    tol = float(cfg.config.get("alpha_tol")) if tol is None else tol
    solution = alpha_root(k, ell, tol, int(cfg.config.get("alpha_grid_points")))
    cfg.details = solution.to_dict()
    emit(cfg, render_mapping(cfg, solution.to_dict()))


@cli.command()
@output_options
@click.option("--n", "n", type=click.IntRange(min=1), required=True)
@click.option("-k", "k", type=click.IntRange(min=2), required=True)
@click.option("--ell", type=click.IntRange(min=2), required=True)
@click.option("--with-symmetry", is_flag=True, help="Count unordered k-sets (divide by k!)")
@click.pass_obj
@handles_errors
def bound(cfg: CliConfig, n, k, ell, with_symmetry):
    """First-moment upper bound f(n,k,ell) <= m* - 1."""
    certificate = existence_bound(n, k, ell, with_symmetry=with_symmetry)
    cfg.details = certificate.to_dict()
    emit(cfg, render_mapping(cfg, certificate.to_dict()))


@cli.group(name="config")
def config_group():
    """Show and edit stored defaults."""


@config_group.command()
@click.pass_obj
def show(cfg: CliConfig):
    emit(cfg, render_mapping(cfg, cfg.config.all()))


@config_group.command(name="set")
@click.argument("key", type=click.Choice(sorted(DEFAULTS)))
@click.argument("value")
@click.pass_obj
@handles_errors
def set_(cfg: CliConfig, key, value):
    try:
        parsed = json.loads(value)
    except json.JSONDecodeError:
        parsed = value
    cfg.config.set(key, parsed)
    cfg.details = {"key": key, "value": parsed}
    if not cfg.config.persistent:
        click.echo("Warning: no --config database; the value is not kept", err=True)


@config_group.command()
@click.option("--limit", type=click.IntRange(min=1), default=50, show_default=True)
@click.pass_obj
def history(cfg: CliConfig, limit):
    emit(cfg, _json(cfg.config.get_operations(limit)))


@config_group.command()
@click.argument("op_id", type=click.IntRange(min=1))
@click.pass_obj
def forget(cfg: CliConfig, op_id):
    """Remove one run from the history."""
    cfg.config.delete_operation(op_id)


@config_group.command(name="clear-history")
@click.pass_obj
def clear_history(cfg: CliConfig):
    removed = cfg.config.clear_operations()
    click.echo(f"Removed {removed} entries", err=True)


def main():
    cli(prog_name="twins")


if __name__ == "__main__":
    main()
