"""
Brute-force check of the residue engine: the defining series summed over a box of dual-lattice
points in floating point, with chunk sums combined at high precision by mpmath.
"""

import logging
import sys
from fractions import Fraction
from typing import Dict, Optional, Sequence, Tuple

import mpmath
import numpy as np
from colorama import Fore, Style
from pydantic import BaseModel, ConfigDict, Field, field_validator

import config
from errors import OracleNotApplicable
from rootsys import (
    ExponentMap,
    RootSystemSpec,
    dual_lattice_basis,
    positive_coroots,
    primitive_vector,
)
from szenes import BernoulliQuery, bernoulli_eval

logger = logging.getLogger()
logging.basicConfig(stream=sys.stderr)
logger.setLevel(logging.INFO)


class OracleConfig(BaseModel):
    """Box radius M, working precision in bits, and whether gamma and -gamma are paired."""

    model_config = ConfigDict(frozen=True)

    radius: int = Field(default_factory=lambda: config.oracle_radius)
    precision: int = Field(default_factory=lambda: config.oracle_precision)
    pair_symmetrize: bool = Field(default_factory=lambda: config.oracle_pair_symmetrize)
    chunk_rows: int = Field(default_factory=lambda: config.oracle_chunk_rows)

    @field_validator("radius")
    @classmethod
    def _radius(cls, value: int) -> int:
        if value < 10:
            raise ValueError("oracle radius must be at least 10")
        return value

    @field_validator("precision")
    @classmethod
    def _precision(cls, value: int) -> int:
        if value < 53:
            raise ValueError("oracle precision must be at least 53 bits")
        return value

    @field_validator("chunk_rows")
    @classmethod
    def _chunk_rows(cls, value: int) -> int:
        if value < 1:
            raise ValueError("chunk_rows must be positive")
        return value


class OracleReport(BaseModel):
    passed: bool
    engine: str
    oracle: str
    relative_error: Optional[float] = None
    abs_floor: float
    tail_bound: Optional[float] = None
    message: str


def check_convergence(system: RootSystemSpec, exponents: ExponentMap) -> None:
    """Every hyperplane needs total exponent >= 2 for the box sums to make sense."""
    totals: Dict[Tuple[int, ...], int] = {}
    for coroot in positive_coroots(system):
        key = primitive_vector(coroot.form.coeffs)
        totals[key] = totals.get(key, 0) + exponents.exponent(coroot.label)
    weak = [key for key, total in totals.items() if total < 2]
    if weak:
        raise OracleNotApplicable(
            f"{len(weak)} hyperplane(s) of {system.name} carry total exponent below 2; "
            "the series is not absolutely convergent"
        )


def _pairing_matrix(rows: Sequence[Sequence[Fraction]], basis: Sequence[Sequence[Fraction]]):
    return np.array(
        [[float(sum((a * b for a, b in zip(row, gamma)), Fraction(0))) for gamma in basis]
         for row in rows]
    )


def direct_sum(
    system: RootSystemSpec,
    lattice: str,
    exponents: ExponentMap,
    v: Sequence[Fraction],
    cfg: Optional[OracleConfig] = None,
) -> Tuple[mpmath.mpf, mpmath.mpf]:
    """
    Sum over gamma = sum n_i gamma_i with |n_i| <= M and gamma regular of
    e^(2 i pi <v, gamma>) / prod (2 i pi <phi, gamma>)^s_phi.

    Returns the real part and a crude tail estimate rank * |value| / M.
    """
    cfg = cfg or OracleConfig()
    check_convergence(system, exponents)
    coroots = positive_coroots(system)
    basis = dual_lattice_basis(system, lattice)
    r, radius = system.rank, cfg.radius
    forms = _pairing_matrix([c.form.coeffs for c in coroots], basis)
    powers = np.array([exponents.exponent(c.label) for c in coroots])
    phases = _pairing_matrix([tuple(Fraction(x) for x in v)], basis)[0]
    total_power = int(powers.sum())

    axis = np.arange(-radius, radius + 1)
    rest = (
        np.stack(np.meshgrid(*([axis] * (r - 1)), indexing="ij"), axis=-1).reshape(-1, r - 1)
        if r > 1
        else np.zeros((1, 0), dtype=int)
    )
    chunk_sums = []
    for start in range(0, len(axis), cfg.chunk_rows):
        rows = axis[start:start + cfg.chunk_rows]
        first = np.repeat(rows, len(rest))
        points = np.column_stack([first, np.tile(rest, (len(rows), 1))])
        pairings = points @ forms.T
        regular = np.all(np.abs(pairings) > 1e-9, axis=1)
        if cfg.pair_symmetrize:
            leading = np.argmax(points != 0, axis=1)
            regular &= points[np.arange(len(points)), leading] > 0
        pairings = pairings[regular]
        theta = 2 * np.pi * (points[regular] @ phases)
        denominator = np.prod(pairings ** powers, axis=1)
        if cfg.pair_symmetrize:
            numerator = np.exp(1j * theta) + (-1) ** total_power * np.exp(-1j * theta)
        else:
            numerator = np.exp(1j * theta)
        chunk = np.sum(numerator / denominator)
        chunk_sums.append(mpmath.mpc(chunk.real, chunk.imag))

    with mpmath.workprec(cfg.precision):
        total = mpmath.fsum(chunk_sums) / (2j * mpmath.pi) ** total_power
        value = mpmath.re(total)
        tail = r * abs(value) / radius
    logger.debug(f"{system.name} / {lattice}: {len(chunk_sums)} chunks at radius {radius}")
    return value, tail


def compare(
    engine: Fraction, oracle: mpmath.mpf, rel_tol: float, abs_floor: float = 1e-40
) -> OracleReport:
    """Relative comparison, switching to an absolute test when the exact value is tiny."""
    exact = mpmath.mpf(engine.numerator) / engine.denominator
    if abs(exact) < abs_floor:
        passed = abs(oracle) < abs_floor
        message = (
            "engine and oracle both below the absolute floor"
            if passed
            else f"engine value below the absolute floor {abs_floor} but oracle is {oracle}"
        )
        return OracleReport(
            passed=passed,
            engine=str(engine),
            oracle=mpmath.nstr(oracle, 15),
            abs_floor=abs_floor,
            message=message,
        )
    relative = float(abs(oracle - exact) / abs(exact))
    passed = relative <= rel_tol
    return OracleReport(
        passed=passed,
        engine=str(engine),
        oracle=mpmath.nstr(oracle, 15),
        relative_error=relative,
        abs_floor=abs_floor,
        message=(
            f"relative error {relative:.3e} within {rel_tol:.1e}"
            if passed
            else f"relative error {relative:.3e} exceeds {rel_tol:.1e}"
        ),
    )


def certify(
    query: BernoulliQuery, cfg: Optional[OracleConfig] = None, rel_tol: float = 1e-5
) -> OracleReport:
    """Runs the engine and the oracle on one query and logs the verdict."""
    engine = bernoulli_eval(query)
    oracle, tail = direct_sum(query.system, query.lattice, query.exponents, query.point, cfg)
    report = compare(engine, oracle, rel_tol).model_copy(update={"tail_bound": float(tail)})
    if report.passed:
        logger.info(
            Fore.GREEN
            + f"{query.system.name} / {query.lattice}: oracle agrees, {report.message}"
            + Style.RESET_ALL
        )
    else:
        logger.error(
            Fore.RED
            + f"{query.system.name} / {query.lattice}: needs review, {report.message}"
            + Style.RESET_ALL
        )
    return report
