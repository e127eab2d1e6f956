"""
Witten series, symplectic volumes of moduli spaces of flat connections, zeta values at zero,
multiple zeta values and the SU(2) Verlinde closed form, all expressed through the multiple
Bernoulli series evaluated in `szenes`.
"""

import itertools
import logging
import sys
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Any, Dict, List, NamedTuple, Sequence, Tuple

import mpmath
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

import config
from errors import InvalidExponents, InvalidMarking, UnsupportedFamily
from exactcore import bernoulli_value, exp_linear, rational, todd_factor
from rootsys import (
    NATURAL_LATTICE,
    ExponentMap,
    RootSystemSpec,
    Vector,
    bc_system,
    exponent_map,
    from_coroot_coords,
    in_alcove,
    positive_coroots,
    uniform_exponents,
    weyl_group,
)
from szenes import BernoulliQuery, bernoulli_eval, default_direction

logger = logging.getLogger()
logging.basicConfig(stream=sys.stderr)
logger.setLevel(logging.DEBUG if config.local_dev else logging.INFO)

COORDINATES = ("e", "coroot")


class GroupConstants(NamedTuple):
    q: int
    f: int
    p: int
    center: int
    weyl_order: int


def group_constants(system: RootSystemSpec) -> GroupConstants:
    """q, f, p, |Z| and |W| of the simply connected group of the family."""
    r = system.rank
    if system.family == "A":
        return GroupConstants(1, r + 1, 0, r + 1, factorial(r + 1))
    if system.family == "B":
        return GroupConstants(2, 2, r, 2, 2 ** r * factorial(r))
    if system.family == "C":
        return GroupConstants(2 ** (r - 1), 2, r * (r - 1), 2, 2 ** r * factorial(r))
    if system.family == "D":
        return GroupConstants(1, 4, 0, 4, 2 ** (r - 1) * factorial(r))
    raise UnsupportedFamily(f"no volume constants for family {system.family}")


class MarkingSet(BaseModel):
    """Marked points in the fundamental alcove, for a surface of genus `genus`."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    system: RootSystemSpec
    genus: int
    points: Tuple[Tuple[Fraction, ...], ...] = ()
    coordinates: str = "e"

    @field_validator("points", mode="before")
    @classmethod
    def _exact_points(cls, value: Any) -> Tuple[Tuple[Fraction, ...], ...]:
        return tuple(tuple(rational(x) for x in point) for point in value)

    @field_validator("coordinates")
    @classmethod
    def _known_coordinates(cls, value: str) -> str:
        if value not in COORDINATES:
            raise ValueError(f"coordinates must be one of {', '.join(COORDINATES)}")
        return value

    @model_validator(mode="after")
    def _inside_alcove(self) -> "MarkingSet":
        if self.genus < 0:
            raise InvalidMarking("genus must be nonnegative")
        if not self.points and self.genus < 2:
            raise InvalidMarking("a surface without markings needs genus >= 2")
        for point in self.ambient_points:
            if self.system.family == "A" and sum(point):
                raise InvalidMarking("type A markings need coordinate sum zero")
            if not in_alcove(self.system, point):
                raise InvalidMarking(
                    f"({', '.join(str(x) for x in point)}) is not inside the open alcove "
                    f"of {self.system.name}"
                )
        return self

    @property
    def ambient_points(self) -> Tuple[Vector, ...]:
        if self.coordinates == "coroot":
            return tuple(from_coroot_coords(self.system, point) for point in self.points)
        for point in self.points:
            if len(point) != self.system.ambient_dim:
                raise InvalidMarking(
                    f"{self.system.name} markings need {self.system.ambient_dim} coordinates"
                )
        return self.points


class PiValue(BaseModel):
    """coeff * pi ** pi_power, kept exact."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    coeff: Fraction
    pi_power: int

    @field_validator("coeff", mode="before")
    @classmethod
    def _exact(cls, value: Any) -> Fraction:
        return rational(value)

    @field_validator("pi_power")
    @classmethod
    def _nonnegative(cls, value: int) -> int:
        if value < 0:
            raise ValueError("pi_power must be nonnegative")
        return value

    def to_json(self) -> Dict[str, Any]:
        return {"coeff": str(self.coeff), "pi_power": self.pi_power}

    def decimal(self, digits: int = 30) -> str:
        with mpmath.workdps(digits):
            value = mpmath.mpf(self.coeff.numerator) / self.coeff.denominator
            return mpmath.nstr(value * mpmath.pi ** self.pi_power, digits)


def c_vol(system: RootSystemSpec, genus: int, markings: int) -> Fraction:
    """2^(p(2g-2+s)) (fq)^(g-1) |Z| (-1)^((g-1)|Phi|) / |W|"""
    q, f, p, center, weyl_order = group_constants(system)
    roots = len(positive_coroots(system))
    value = Fraction(2) ** (p * (2 * genus - 2 + markings))
    value *= Fraction(f * q) ** (genus - 1)
    value *= center * (-1) ** ((genus - 1) * roots)
    return value / weyl_order


def _bernoulli_limit(
    system: RootSystemSpec, exponents: ExponentMap, point: Sequence[Fraction], direction: Vector
) -> Fraction:
    query = BernoulliQuery(
        system=system,
        lattice=NATURAL_LATTICE[system.family],
        exponents=exponents,
        point=tuple(point),
        mode="limit",
        direction=direction,
    )
    return bernoulli_eval(query)


def witten_series(
    system: RootSystemSpec,
    genus: int,
    points: Sequence[Sequence[Any]] = (),
    coordinates: str = "e",
) -> Fraction:
    """
    W(Phi, P, g, s)(a): without markings the limit at 0 of B(Phi_(2g-2)); with markings the
    signed sum over W^s of B(Phi_(2g-2+s))(w_1 a_1 + ... + w_s a_s). Every translate is evaluated
    as a limit along one shared direction.
    """
    markings = MarkingSet(system=system, genus=genus, points=points, coordinates=coordinates)
    anchors = markings.ambient_points
    direction = default_direction(system, NATURAL_LATTICE[system.family])
    exponents = uniform_exponents(system, 2 * genus - 2 + len(anchors))
    if not anchors:
        return _bernoulli_limit(system, exponents, (Fraction(0),) * system.ambient_dim, direction)
    signs: Dict[Vector, int] = {}
    for elements in itertools.product(weyl_group(system), repeat=len(anchors)):
        point = [Fraction(0)] * system.ambient_dim
        sign = 1
        for element, anchor in zip(elements, anchors):
            sign *= element.sign
            for index, value in enumerate(element.apply(anchor)):
                point[index] += value
        key = tuple(point)
        signs[key] = signs.get(key, 0) + sign
    logger.debug(
        f"{system.name}, g={genus}: {len(signs)} distinct translates for {len(anchors)} markings"
    )
    total = Fraction(0)
    for point, sign in signs.items():
        if sign:
            total += sign * _bernoulli_limit(system, exponents, point, direction)
    return total


def volume(
    system: RootSystemSpec,
    genus: int,
    points: Sequence[Sequence[Any]] = (),
    coordinates: str = "e",
) -> Fraction:
    """Symplectic volume c_vol * W of the moduli space with the given markings."""
    series = witten_series(system, genus, points, coordinates)
    return c_vol(system, genus, len(points)) * series


def volume_one_marking(
    system: RootSystemSpec, genus: int, point: Sequence[Any], coordinates: str = "e"
) -> Fraction:
    """(fq)^(g-1) |Z| 2^(p(2g-1)) (-1)^((g-1)|Phi|) B(Phi_(2g-1))(a)"""
    markings = MarkingSet(system=system, genus=genus, points=(point,), coordinates=coordinates)
    (anchor,) = markings.ambient_points
    q, f, p, center, _ = group_constants(system)
    roots = len(positive_coroots(system))
    prefactor = Fraction(f * q) ** (genus - 1) * center * Fraction(2) ** (p * (2 * genus - 1))
    prefactor *= (-1) ** ((genus - 1) * roots)
    direction = default_direction(system, NATURAL_LATTICE[system.family])
    series = _bernoulli_limit(
        system, uniform_exponents(system, 2 * genus - 1), anchor, direction
    )
    return prefactor * series


class VolumeRow(NamedTuple):
    genus: int
    c_vol: Fraction
    volume: Fraction


def volume_table(system: RootSystemSpec, genera: Sequence[int]) -> List[VolumeRow]:
    """Unmarked volumes for each genus, with the constant c_vol alongside."""
    rows = []
    for genus in genera:
        constant = c_vol(system, genus, 0)
        rows.append(VolumeRow(genus, constant, constant * witten_series(system, genus)))
        logger.debug(f"{system.name}, g={genus}: volume {rows[-1].volume}")
    return rows


def _root_length_classes(system: RootSystemSpec) -> Dict[str, List[str]]:
    labels = [c.label for c in positive_coroots(system)]
    pairs = [label for label in labels if "-" in label or "+" in label]
    singles = [label for label in labels if label not in pairs]
    if system.family == "B":
        return {"long": pairs, "short": singles}
    if system.family == "C":
        return {"long": singles, "short": pairs}
    return {"long": labels}


def zeta_even(system: RootSystemSpec, exponents: ExponentMap) -> PiValue:
    """
    The zeta value at v = 0, sum over dominant regular weights of prod <H_alpha, gamma>^(-s_alpha),
    for even exponents constant on each root length: |W|^(-1) 2^S (-1)^(S/2) B(Phi_s)(0) pi^S.
    """
    values = exponents.as_dict()
    odd = [label for label, value in values.items() if value % 2]
    if odd:
        raise InvalidExponents(f"zeta values at zero need even exponents; odd on {', '.join(odd)}")
    for length, labels in _root_length_classes(system).items():
        if len({values[label] for label in labels}) > 1:
            raise InvalidExponents(f"exponents must be constant on the {length} roots")
    total = exponents.total
    weyl_order = group_constants(system).weyl_order
    direction = default_direction(system, NATURAL_LATTICE[system.family])
    series = _bernoulli_limit(system, exponents, (Fraction(0),) * system.ambient_dim, direction)
    coeff = Fraction(2) ** total * (-1) ** (total // 2) * series / weyl_order
    return PiValue(coeff=coeff, pi_power=total)


def mzv(depth: int, weight: int) -> PiValue:
    """
    zeta_r(2k, ..., 2k) = sum over n_1 > ... > n_r > 0 of prod n_i^(-2k), through the BC
    arrangement with exponent 2k on each coordinate form e^i and 0 on e^i +- e^j.
    """
    if depth < 1 or weight < 2 or weight % 2:
        raise InvalidExponents("mzv needs depth >= 1 and a positive even weight")
    k = weight // 2
    core = bc_system(depth)
    exponents = exponent_map(
        core,
        {
            c.label: (weight if "-" not in c.label and "+" not in c.label else 0)
            for c in positive_coroots(core)
        },
    )
    direction = default_direction(core, "coroot-C")
    series = _bernoulli_limit(core, exponents, (Fraction(0),) * depth, direction)
    coeff = (
        Fraction((-1) ** (k * depth) * 2 ** (2 * k * depth), 2 ** depth * factorial(depth))
        * series
    )
    return PiValue(coeff=coeff, pi_power=weight * depth)


@lru_cache(maxsize=None)
def verlinde_coefficients(genus: int, t: Fraction) -> Tuple[Fraction, ...]:
    """c_(g,t)(n), n = 0..2g-1: Taylor coefficients of e^(x(g-2t)) (x/(e^x-1))^(2g-1)."""
    cap = 2 * genus - 1
    series = exp_linear([Fraction(genus) - 2 * t], cap) * todd_factor(cap) ** (2 * genus - 1)
    return tuple(series.coefficient((n,)) for n in range(cap + 1))


def verlinde_su2(t: Any, level: int, genus: int) -> Fraction:
    """
    Dimension of the SU(2) conformal blocks of level `level` on a genus `genus` surface with one
    marking of weight t * level * alpha.
    """
    t = rational(t)
    if not 0 < t < Fraction(1, 2):
        raise InvalidMarking(f"t must satisfy 0 < t < 1/2, got {t}")
    if level < 1 or (t * level).denominator != 1:
        raise InvalidMarking(f"t * level must be a positive integer, got {t * level}")
    if genus < 1:
        raise InvalidMarking("the one-marking Verlinde formula needs genus >= 1")
    shifted = level + 2
    top = 2 * genus - 1
    total = Fraction(0)
    for n, coefficient in enumerate(verlinde_coefficients(genus, t)):
        degree = top - n
        total += coefficient * shifted ** degree * bernoulli_value(degree, t) / factorial(degree)
    return 2 ** (genus - 1) * Fraction(shifted) ** (genus - 1) * 2 * (-1) ** genus * total
