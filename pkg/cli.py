"""
Command-line front end.

Every subcommand writes one JSON document {query, result, result_kind, timing_ms} to stdout or to
--outfile. Domain errors are reported as {"error", "kind"} with exit code 2; usage errors exit
with code 1.

To use:
bernoulli-series bernoulli --family C --rank 2 --exp "e1=2,e2=1,e1+e2=1,e1-e2=1" --at 1/15,1/30
"""

import functools
import logging
import sys
import time
from fractions import Fraction
from typing import Any, Callable, Dict, Optional, Sequence, Tuple

import click
import simplejson
from colorama import Fore, Style
from pydantic import ValidationError

import config
from errors import BernoulliSeriesError
from exactcore import rational
from oracle import OracleConfig, certify
from rootsys import (
    FAMILIES,
    LATTICES,
    NATURAL_LATTICE,
    ExponentMap,
    RootSystemSpec,
    parse_exponents,
    uniform_exponents,
)
from szenes import BernoulliQuery, bernoulli_eval
from witten import mzv, verlinde_su2, volume, volume_table, zeta_even

logger = logging.getLogger()
logging.basicConfig(stream=sys.stderr)
logger.setLevel(logging.DEBUG if config.local_dev else logging.INFO)

ORDERS = ["canonical"]


class RationalVector(click.ParamType):
    """Comma-separated exact rationals such as 1/15,1/30."""

    name = "rationals"

    def convert(self, value: Any, param, ctx) -> Tuple[Fraction, ...]:
        if isinstance(value, tuple):
            return value
        try:
            return tuple(rational(item) for item in str(value).split(",") if item.strip())
        except (ValueError, ZeroDivisionError):
            self.fail(f"{value!r} is not a comma-separated list of p/q rationals", param, ctx)


RATIONALS = RationalVector()


class BernoulliGroup(click.Group):
    """Runs commands without click's standalone handling so exit codes stay 0, 1 or 2."""

    def main(self, *args, **kwargs):
        kwargs["standalone_mode"] = False
        try:
            rv = super().main(*args, **kwargs)
        except click.ClickException as error:
            error.show()
            sys.exit(1)
        except click.exceptions.Abort:
            sys.exit(1)
        sys.exit(rv if isinstance(rv, int) else 0)


def _emit(document: Dict[str, Any], outfile: Optional[click.File]) -> None:
    if outfile:
        simplejson.dump(document, outfile, indent=2)
        outfile.write("\n")
    else:
        click.echo(simplejson.dumps(document, indent=2))


def reports_errors(command: Callable) -> Callable:
    """Turns domain and validation errors into a JSON error document and exit code 2."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        ctx = click.get_current_context()
        try:
            return command(*args, **kwargs)
        except BernoulliSeriesError as error:
            kind, message = error.kind, str(error)
        except ValidationError as error:
            kind, message = "validation_error", str(error)
        logger.error(Fore.RED + f"{ctx.info_name} failed: {message}" + Style.RESET_ALL)
        _emit({"error": message, "kind": kind}, kwargs.get("outfile"))
        ctx.exit(2)

    return wrapper


def _finish(
    name: str,
    query: Dict[str, Any],
    result: Any,
    result_kind: str,
    started: float,
    outfile: Optional[click.File],
) -> None:
    timing_ms = int((time.perf_counter() - started) * 1000)
    _emit(
        {"query": query, "result": result, "result_kind": result_kind, "timing_ms": timing_ms},
        outfile,
    )
    logger.info(Fore.GREEN + f"{name} finished in {timing_ms} ms" + Style.RESET_ALL)


def _render_vector(vector: Optional[Sequence[Fraction]]) -> Optional[list]:
    return None if vector is None else [str(x) for x in vector]


def _exponents(
    system: RootSystemSpec, exp: Optional[str], all_: Optional[int], order: Optional[str]
) -> ExponentMap:
    if exp and all_ is not None:
        raise click.UsageError("give either --exp or --all, not both")
    if all_ is not None:
        return uniform_exponents(system, all_)
    if not exp:
        raise click.UsageError("exponents are required: use --exp or --all")
    return parse_exponents(system, exp, order)


def system_options(command: Callable) -> Callable:
    options = [
        click.option(
            "--family", type=click.Choice(FAMILIES, case_sensitive=False), required=True
        ),
        click.option("--rank", type=int, required=True),
        click.option(
            "--lattice",
            type=click.Choice(list(LATTICES), case_sensitive=False),
            required=False,
            help="defaults to the coroot lattice of the family",
        ),
        click.option("--exp", "exp", type=str, required=False, help='e.g. "e1-e2=2,e2-e3=1"'),
        click.option("--all", "all_", type=int, required=False, help="one exponent on every root"),
        click.option(
            "--order",
            type=click.Choice(ORDERS, case_sensitive=False),
            required=False,
            help="needed for positional exponent lists",
        ),
        click.option("--outfile", type=click.File(mode="w"), required=False),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def _query(
    mode: str,
    family: str,
    rank: int,
    lattice: Optional[str],
    exp: Optional[str],
    all_: Optional[int],
    order: Optional[str],
    **fields: Any,
) -> BernoulliQuery:
    system = RootSystemSpec(family=family, rank=rank)
    return BernoulliQuery(
        system=system,
        lattice=lattice or NATURAL_LATTICE[system.family],
        exponents=_exponents(system, exp, all_, order),
        mode=mode,
        **fields,
    )


def _describe(query: BernoulliQuery, command: str) -> Dict[str, Any]:
    return {
        "command": command,
        "family": query.system.family,
        "rank": query.system.rank,
        "lattice": query.lattice,
        "exponents": query.exponents.as_dict(),
        "mode": query.mode,
        "point": _render_vector(query.point),
        "direction": _render_vector(query.direction),
        "sample": _render_vector(query.sample),
    }


@click.group(cls=BernoulliGroup)
def cli():
    """Exact multiple Bernoulli series, Witten volumes and zeta values."""


@cli.command()
@system_options
@click.option("--at", "point", type=RATIONALS, required=True, help="point v, e.g. 1/15,1/30")
@click.option("--limit", is_flag=True, default=False, help="one-sided limit instead of value")
@click.option("--direction", type=RATIONALS, required=False, help="limit direction")
@reports_errors
def bernoulli(family, rank, lattice, exp, all_, order, outfile, point, limit, direction):
    """Value (or one-sided limit) of B(Phi, lattice, s) at a point."""
    started = time.perf_counter()
    query = _query(
        "limit" if limit else "value",
        family, rank, lattice, exp, all_, order,
        point=point, direction=direction,
    )
    result = bernoulli_eval(query)
    _finish("bernoulli", _describe(query, "bernoulli"), str(result), "rational", started, outfile)


@cli.command("step-poly")
@system_options
@reports_errors
def step_poly(family, rank, lattice, exp, all_, order, outfile):
    """Closed form of B as a step polynomial."""
    started = time.perf_counter()
    query = _query("step_polynomial", family, rank, lattice, exp, all_, order)
    polynomial = bernoulli_eval(query)
    if polynomial.size > config.step_poly_term_cap and outfile is None:
        raise click.UsageError(
            f"step polynomial has {polynomial.size} terms (cap {config.step_poly_term_cap}); "
            "write it with --outfile"
        )
    _finish(
        "step-poly", _describe(query, "step-poly"), polynomial.to_json(), "step_polynomial",
        started, outfile,
    )


@cli.command("tope-poly")
@system_options
@click.option("--sample", type=RATIONALS, required=True, help="regular point of the tope")
@reports_errors
def tope_poly(family, rank, lattice, exp, all_, order, outfile, sample):
    """Polynomial agreeing with B on the tope of a sample point."""
    started = time.perf_counter()
    query = _query("tope_polynomial", family, rank, lattice, exp, all_, order, sample=sample)
    polynomial = bernoulli_eval(query)
    result = {
        "variables": [str(symbol) for symbol in polynomial.gens],
        "expression": str(polynomial.as_expr()),
        "terms": [
            {"monomial": list(monomial), "coeff": str(coeff)}
            for monomial, coeff in polynomial.terms()
        ],
    }
    _finish("tope-poly", _describe(query, "tope-poly"), result, "polynomial", started, outfile)


@cli.command("witten-volume")
@click.option("--family", type=click.Choice(FAMILIES, case_sensitive=False), required=True)
@click.option("--rank", type=int, required=True)
@click.option("--genus", type=int, required=True)
@click.option("--marking", "markings", type=RATIONALS, multiple=True, help="repeat per marking")
@click.option(
    "--coroot-coords",
    is_flag=True,
    default=False,
    help="markings are simple-coroot coefficients instead of e-coordinates",
)
@click.option("--outfile", type=click.File(mode="w"), required=False)
@reports_errors
def witten_volume(family, rank, genus, markings, coroot_coords, outfile):
    """Symplectic volume of the moduli space for a genus and markings."""
    started = time.perf_counter()
    system = RootSystemSpec(family=family, rank=rank)
    coordinates = "coroot" if coroot_coords else "e"
    result = volume(system, genus, markings, coordinates)
    query = {
        "command": "witten-volume",
        "family": system.family,
        "rank": system.rank,
        "genus": genus,
        "markings": [_render_vector(marking) for marking in markings],
        "coordinates": coordinates,
    }
    _finish("witten-volume", query, str(result), "rational", started, outfile)


@cli.command("witten-table")
@click.option("--family", type=click.Choice(FAMILIES, case_sensitive=False), required=True)
@click.option("--rank", type=int, required=True)
@click.option("--genus", "genera", type=int, multiple=True, required=True)
@click.option("--outfile", type=click.File(mode="w"), required=False)
@reports_errors
def witten_table(family, rank, genera, outfile):
    """Rows (g, c_vol, vol) of unmarked volumes."""
    started = time.perf_counter()
    system = RootSystemSpec(family=family, rank=rank)
    rows = [
        {"genus": row.genus, "c_vol": str(row.c_vol), "volume": str(row.volume)}
        for row in volume_table(system, genera)
    ]
    query = {
        "command": "witten-table",
        "family": system.family,
        "rank": system.rank,
        "genera": list(genera),
    }
    _finish("witten-table", query, rows, "report", started, outfile)


@cli.command()
@click.option("--family", type=click.Choice(FAMILIES, case_sensitive=False), required=True)
@click.option("--rank", type=int, required=True)
@click.option("--exp", "exp", type=str, required=False)
@click.option("--all", "all_", type=int, required=False)
@click.option("--order", type=click.Choice(ORDERS, case_sensitive=False), required=False)
@click.option("--outfile", type=click.File(mode="w"), required=False)
@reports_errors
def zeta(family, rank, exp, all_, order, outfile):
    """Zeta value at v = 0 for even root-length-constant exponents, as coeff * pi^power."""
    started = time.perf_counter()
    system = RootSystemSpec(family=family, rank=rank)
    exponents = _exponents(system, exp, all_, order)
    result = zeta_even(system, exponents)
    query = {
        "command": "zeta",
        "family": system.family,
        "rank": system.rank,
        "exponents": exponents.as_dict(),
    }
    _finish("zeta", query, result.to_json(), "pi_value", started, outfile)


@cli.command("mzv")
@click.option("--depth", type=int, required=True)
@click.option("--weight", type=int, required=True, help="the even exponent 2k")
@click.option("--outfile", type=click.File(mode="w"), required=False)
@reports_errors
def mzv_command(depth, weight, outfile):
    """Multiple zeta value zeta_r(2k, ..., 2k)."""
    started = time.perf_counter()
    result = mzv(depth, weight)
    query = {"command": "mzv", "depth": depth, "weight": weight}
    _finish("mzv", query, result.to_json(), "pi_value", started, outfile)


@cli.command("verlinde-su2")
@click.option("--t", "t", type=str, required=True, help="marking parameter in (0, 1/2)")
@click.option("--level", type=int, required=True)
@click.option("--genus", type=int, required=True)
@click.option("--outfile", type=click.File(mode="w"), required=False)
@reports_errors
def verlinde_command(t, level, genus, outfile):
    """SU(2) Verlinde number with one marking."""
    started = time.perf_counter()
    try:
        value = rational(t)
    except (ValueError, ZeroDivisionError):
        raise click.BadParameter(f"{t!r} is not a p/q rational", param_hint="--t")
    result = verlinde_su2(value, level, genus)
    query = {"command": "verlinde-su2", "t": str(value), "level": level, "genus": genus}
    _finish("verlinde-su2", query, str(result), "rational", started, outfile)


@cli.command("oracle-check")
@system_options
@click.option("--at", "point", type=RATIONALS, required=True)
@click.option("--radius", type=int, default=config.oracle_radius)
@click.option("--precision", type=int, default=config.oracle_precision)
@click.option("--rel-tol", type=float, default=1e-5)
@click.option(
    "--symmetrize / --no-symmetrize",
    default=config.oracle_pair_symmetrize,
    help="pair gamma with -gamma",
)
@reports_errors
def oracle_check(
    family, rank, lattice, exp, all_, order, outfile, point, radius, precision, rel_tol,
    symmetrize,
):
    """Compares the exact value with a brute-force truncated sum."""
    started = time.perf_counter()
    query = _query("value", family, rank, lattice, exp, all_, order, point=point)
    cfg = OracleConfig(radius=radius, precision=precision, pair_symmetrize=symmetrize)
    report = certify(query, cfg, rel_tol)
    _finish(
        "oracle-check", _describe(query, "oracle-check"), report.model_dump(), "report",
        started, outfile,
    )


def main():
    cli(prog_name="bernoulli-series")


if __name__ == "__main__":
    main()
