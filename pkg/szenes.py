"""
Multiple Bernoulli series B(Phi, Lambda, s)(v) through the iterated-residue formula.

For a unimodular diagonal set the series equals a sum over ordered bases sigma of
Res^sigma[g(z) exp(sum {c_i(v)} t_i) prod 1/(1 - e^(t_i))], where c_i(v) are the coefficients of
v in sigma. Types A (coroot lattice) and BC (standard lattice) are evaluated that way directly.
The other lattices are reduced to these cores:

  coweight-A  average of the A core over the r+1 coset shifts j xi / (r+1)
  coroot-B    c2 / 2^(r-1) times the sum of the C core at (v + lambda) / 2 over lambda in F
  coroot-D    the B pipeline on exponents extended by zero on the short roots, plus
              sum_k c_k times the C_(r-1) core at v with coordinate k dropped

Every pipeline is a list of `CoreTerm`s, shared by the value, limit and symbolic modes.
"""

import concurrent.futures
import logging
import sys
from fractions import Fraction
from functools import lru_cache
from math import floor
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple

import sympy
from pydantic import BaseModel, ConfigDict, field_validator, model_validator
from sympy.polys.domains import QQ
from sympy.polys.rings import ring

import config
from errors import GenericityFailure, NonRegularPoint
from exactcore import frac, from_qq, is_symbolic, rational, symbol_ring
from residue import ResidueRequest, build_integrand, iterated_residue, to_sigma_coords
from rootsys import (
    ExponentMap,
    OrderedBasis,
    RootSystemSpec,
    Vector,
    bc_system,
    c_coeffs,
    check_lattice,
    coset_representatives,
    d_decomposition,
    exponent_map,
    find_wall,
    flag_bases,
    positive_coroots,
    to_lattice_coords,
    wall_normals,
)

logger = logging.getLogger()
logging.basicConfig(stream=sys.stderr)
logger.setLevel(logging.DEBUG if config.local_dev else logging.INFO)

MODES = ("value", "limit", "tope_polynomial", "step_polynomial")


def _rational_vector(value: Any) -> Optional[Tuple[Fraction, ...]]:
    if value is None:
        return None
    if isinstance(value, str):
        value = value.split(",")
    return tuple(rational(x) for x in value)


class BernoulliQuery(BaseModel):
    """One evaluation request: system, lattice, exponents, point and mode."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    system: RootSystemSpec
    lattice: str
    exponents: ExponentMap
    point: Tuple[Fraction, ...] = ()
    mode: str = "value"
    direction: Optional[Tuple[Fraction, ...]] = None
    sample: Optional[Tuple[Fraction, ...]] = None

    @field_validator("point", "direction", "sample", mode="before")
    @classmethod
    def _exact_vector(cls, value: Any) -> Optional[Tuple[Fraction, ...]]:
        return _rational_vector(value)

    @field_validator("mode")
    @classmethod
    def _known_mode(cls, value: str) -> str:
        if value not in MODES:
            raise ValueError(f"mode must be one of {', '.join(MODES)}")
        return value

    @model_validator(mode="after")
    def _compatible(self) -> "BernoulliQuery":
        check_lattice(self.system, self.lattice)
        if [label for label, _ in self.exponents.entries] != [
            c.label for c in positive_coroots(self.system)
        ]:
            raise ValueError(f"exponents do not match the roots of {self.system.name}")
        for name in ("point", "direction", "sample"):
            vector = getattr(self, name)
            polynomial_mode = self.mode.endswith("polynomial")
            if vector is None or (name == "point" and not vector and polynomial_mode):
                continue
            if len(vector) != self.system.ambient_dim:
                raise ValueError(
                    f"{name} needs {self.system.ambient_dim} coordinates, got {len(vector)}"
                )
            if self.system.family == "A" and sum(vector):
                raise ValueError(f"{name} must have coordinate sum zero for type A")
        if self.mode == "tope_polynomial" and not (self.sample or self.point):
            raise ValueError("tope_polynomial needs a sample point")
        return self


class CoreTerm(NamedTuple):
    """weight * core(scale * drop(v) + shift) for a core of type A or BC."""

    weight: Fraction
    core: RootSystemSpec
    exponents: ExponentMap
    drop: Optional[int]
    scale: Fraction
    shift: Vector

    def point(self, v: Sequence[Fraction]) -> Vector:
        reduced = _drop(v, self.drop)
        return tuple(self.scale * x + s for x, s in zip(reduced, self.shift))

    def direction(self, delta: Sequence[Fraction]) -> Vector:
        return tuple(self.scale * x for x in _drop(delta, self.drop))


def _drop(v: Sequence[Fraction], index: Optional[int]) -> Vector:
    vector = tuple(Fraction(x) for x in v)
    return vector if index is None else vector[:index] + vector[index + 1:]


def _zero(size: int) -> Vector:
    return (Fraction(0),) * size


def _b_terms(rank: int, exponents: ExponentMap) -> Tuple[CoreTerm, ...]:
    core = bc_system(rank)
    values = exponents.as_dict()
    # short root e_i of B pairs with the long root 2e_i of C
    c_values = {
        (f"2{label}" if "-" not in label and "+" not in label else label): value
        for label, value in values.items()
    }
    long_total = sum(v for label, v in values.items() if "-" in label or "+" in label)
    short_total = exponents.total - long_total
    c2 = Fraction(2) ** long_total
    c1 = Fraction(1, 2 ** short_total)
    assert c1 * 2 ** exponents.total == c2, "inconsistent B-from-C constants"
    weight = c2 / 2 ** (rank - 1)
    c_exponents = exponent_map(core, c_values)
    return tuple(
        CoreTerm(weight, core, c_exponents, None, Fraction(1, 2), tuple(x / 2 for x in shift))
        for shift in coset_representatives("B_over_2C", rank)
    )


@lru_cache(maxsize=None)
def plan_terms(
    system: RootSystemSpec, lattice: str, exponents: ExponentMap
) -> Tuple[CoreTerm, ...]:
    """The core evaluations whose weighted sum is B(Phi, lattice, s)."""
    check_lattice(system, lattice)
    r, n = system.rank, system.ambient_dim
    if lattice in ("coroot-A", "coroot-C"):
        return (CoreTerm(Fraction(1), system, exponents, None, Fraction(1), _zero(n)),)
    if lattice == "coweight-A":
        return tuple(
            CoreTerm(Fraction(1, r + 1), system, exponents, None, Fraction(1), shift)
            for shift in coset_representatives("A_coweight", r)
        )
    if lattice == "coroot-B":
        return _b_terms(r, exponents)
    extended, pieces = d_decomposition(r, exponents)
    reduced = bc_system(r - 1)
    return _b_terms(r, extended) + tuple(
        CoreTerm(Fraction(c_k), reduced, s_k, k - 1, Fraction(1), _zero(r - 1))
        for k, c_k, s_k in pieces
    )


@lru_cache(maxsize=None)
def _g_exponents(core: RootSystemSpec, exponents: ExponentMap, index: int):
    basis = flag_bases(core)[index]
    coroots = [(c.form, exponents.exponent(c.label)) for c in positive_coroots(core)]
    coroots = [(form, power) for form, power in coroots if power]
    forms = to_sigma_coords([form for form, _ in coroots], basis)
    return tuple(zip(forms, (power for _, power in coroots)))


def basis_u_values(
    basis: OrderedBasis, point: Sequence[Fraction], direction: Optional[Sequence[Fraction]]
) -> Tuple[Fraction, ...]:
    """
    u_i = {c_i(point)}; where c_i(point) is an integer the one-sided limit along `direction`
    decides between 0 and 1.
    """
    values = []
    coords = c_coeffs(basis, point)
    steps = c_coeffs(basis, direction) if direction is not None else None
    for index, c in enumerate(coords):
        if c.denominator != 1:
            values.append(frac(c))
            continue
        step = steps[index] if steps is not None else Fraction(0)
        if step == 0:
            raise GenericityFailure(
                f"direction has zero coefficient on {basis.labels[index]} in basis "
                f"[{', '.join(basis.labels)}] at an integral coordinate",
                step,
            )
        values.append(Fraction(0) if step > 0 else Fraction(1))
    return tuple(values)


def _basis_residue(core: RootSystemSpec, exponents: ExponentMap, index: int, u: Tuple) -> Fraction:
    basis = flag_bases(core)[index]
    request = ResidueRequest(basis, _g_exponents(core, exponents, index), u)
    return from_qq(iterated_residue(build_integrand(request)))


def bernoulli_core(
    core: RootSystemSpec, exponents: ExponentMap, u_by_basis: Sequence[Tuple[Fraction, ...]]
) -> Fraction:
    """Sum over the diagonal set of the residues with the given u-values per basis."""
    jobs = list(enumerate(u_by_basis))
    if config.workers > 1 and len(jobs) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=config.workers) as executor:
            futures = [
                executor.submit(_basis_residue, core, exponents, index, u) for index, u in jobs
            ]
            results = [future.result() for future in concurrent.futures.as_completed(futures)]
        return sum(results, Fraction(0))
    return sum((_basis_residue(core, exponents, index, u) for index, u in jobs), Fraction(0))


def _evaluate(
    system: RootSystemSpec,
    lattice: str,
    exponents: ExponentMap,
    point: Sequence[Fraction],
    direction: Optional[Sequence[Fraction]],
) -> Fraction:
    total = Fraction(0)
    terms = plan_terms(system, lattice, exponents)
    for term in terms:
        core_point = term.point(point)
        core_direction = term.direction(direction) if direction is not None else None
        u_by_basis = [
            basis_u_values(basis, core_point, core_direction) for basis in flag_bases(term.core)
        ]
        total += term.weight * bernoulli_core(term.core, term.exponents, u_by_basis)
    logger.debug(f"{system.name} / {lattice}: {len(terms)} core terms summed")
    return total


def _vanishing_normal(
    system: RootSystemSpec, lattice: str, delta: Sequence[Fraction]
) -> Optional[Tuple[int, ...]]:
    coords = to_lattice_coords(system, lattice, delta)
    for normal, _ in wall_normals(system, lattice):
        if not sum((n * y for n, y in zip(normal, coords)), Fraction(0)):
            return normal
    return None


def _center(vector: List[Fraction]) -> List[Fraction]:
    mean = sum(vector, Fraction(0)) / len(vector)
    return [x - mean for x in vector]


@lru_cache(maxsize=None)
def default_direction(system: RootSystemSpec, lattice: str) -> Vector:
    """
    (1/2, 1/3, 1/5, ...) (centered for type A), with coordinates halved in turn until no wall
    normal pairs to zero with it.
    """
    size = system.ambient_dim
    delta = [Fraction(1, int(sympy.prime(index + 1))) for index in range(size)]
    if system.family == "A":
        delta = _center(delta)
    for attempt in range(config.limit_perturb_attempts):
        if _vanishing_normal(system, lattice, delta) is None:
            return tuple(delta)
        delta[attempt % size] /= 2
        if system.family == "A":
            delta = _center(delta)
    normal = _vanishing_normal(system, lattice, delta)
    if normal is None:
        return tuple(delta)
    raise GenericityFailure(f"no generic direction found for {system.name}; wall {list(normal)}")


def _check_regular(query: BernoulliQuery, point: Sequence[Fraction]) -> None:
    wall = find_wall(query.system, query.lattice, point)
    if wall is not None:
        normal, pairing = wall
        raise NonRegularPoint(point, normal, pairing)


def limit_eval(query: BernoulliQuery) -> Fraction:
    """lim_{t -> 0+} B(v + t delta), with the query's direction or the default one."""
    direction = query.direction or default_direction(query.system, query.lattice)
    normal = _vanishing_normal(query.system, query.lattice, direction)
    if normal is not None:
        raise GenericityFailure(
            f"direction {[str(x) for x in direction]} is orthogonal to wall normal {list(normal)}",
            Fraction(0),
        )
    return _evaluate(query.system, query.lattice, query.exponents, query.point, direction)


class StepFactor(NamedTuple):
    """{scale * <form, v> + shift} ** exp"""

    form: Tuple[Fraction, ...]
    shift: Fraction
    scale: Fraction
    exp: int

    def argument(self, v: Sequence[Fraction]) -> Fraction:
        inner = sum((c * Fraction(x) for c, x in zip(self.form, v)), Fraction(0))
        return self.scale * inner + self.shift


class StepTerm(NamedTuple):
    coeff: Fraction
    factors: Tuple[StepFactor, ...]


class StepPolynomial(NamedTuple):
    """A polynomial in fractional parts of rational linear forms of v."""

    terms: Tuple[StepTerm, ...]
    diagonal_set: str

    @property
    def size(self) -> int:
        return len(self.terms)

    def evaluate(self, v: Sequence[Fraction]) -> Fraction:
        """Value at v; exact at regular points where no factor argument is an integer."""
        total = Fraction(0)
        for term in self.terms:
            product = term.coeff
            for factor in term.factors:
                product *= frac(factor.argument(v)) ** factor.exp
            total += product
        return total

    def to_json(self) -> Dict[str, Any]:
        return {
            "diagonal_set": self.diagonal_set,
            "terms": [
                {
                    "coeff": str(term.coeff),
                    "factors": [
                        {
                            "form": [str(c) for c in factor.form],
                            "shift": str(factor.shift),
                            "scale": str(factor.scale),
                            "exp": factor.exp,
                        }
                        for factor in term.factors
                    ],
                }
                for term in self.terms
            ],
        }

    @classmethod
    def from_json(cls, document: Dict[str, Any]) -> "StepPolynomial":
        terms = tuple(
            StepTerm(
                Fraction(term["coeff"]),
                tuple(
                    StepFactor(
                        tuple(Fraction(c) for c in factor["form"]),
                        Fraction(factor["shift"]),
                        Fraction(factor["scale"]),
                        int(factor["exp"]),
                    )
                    for factor in term["factors"]
                ),
            )
            for term in document["terms"]
        )
        return cls(terms, document.get("diagonal_set", ""))


def _lift(row: Sequence[Fraction], term: CoreTerm, size: int) -> Tuple[Fraction, ...]:
    """A core coefficient row as a form on the query's ambient coordinates."""
    form = list(row)
    if term.drop is not None:
        form.insert(term.drop, Fraction(0))
    return tuple(form) + (Fraction(0),) * (size - len(form))


def _symbolic_core(core: RootSystemSpec, exponents: ExponentMap, index: int):
    polynomial_ring, *gens = symbol_ring(core.rank)
    basis = flag_bases(core)[index]
    request = ResidueRequest(basis, _g_exponents(core, exponents, index), tuple(gens))
    value = iterated_residue(build_integrand(request))
    return value if is_symbolic(value) else polynomial_ring(value)


def step_polynomial(query: BernoulliQuery) -> StepPolynomial:
    """The closed form of B as a step polynomial, valid at every regular point."""
    return _step_polynomial(query.system, query.lattice, query.exponents)


@lru_cache(maxsize=None)
def _step_polynomial(
    system: RootSystemSpec, lattice: str, exponents: ExponentMap
) -> StepPolynomial:
    size = system.ambient_dim
    collected: Dict[Tuple[StepFactor, ...], Fraction] = {}
    terms = plan_terms(system, lattice, exponents)
    for term in terms:
        for index, basis in enumerate(flag_bases(term.core)):
            polynomial = _symbolic_core(term.core, term.exponents, index)
            for monomial, coefficient in polynomial.terms():
                factors = []
                for i, power in enumerate(monomial):
                    if not power:
                        continue
                    row = basis.inverse[i]
                    shift = frac(sum((a * b for a, b in zip(row, term.shift)), Fraction(0)))
                    factors.append(StepFactor(_lift(row, term, size), shift, term.scale, power))
                key = tuple(sorted(factors))
                value = term.weight * from_qq(coefficient)
                collected[key] = collected.get(key, Fraction(0)) + value
    cores = sorted({f"{t.core.family}_{t.core.rank}" for t in terms})
    label = (
        f"flag bases of {', '.join(cores)} over {len(terms)} core term(s) "
        f"for {system.name} / {lattice}"
    )
    return StepPolynomial(
        tuple(StepTerm(coeff, factors) for factors, coeff in collected.items() if coeff), label
    )


@lru_cache(maxsize=None)
def _tope_ring(size: int):
    return ring(",".join(f"v{i + 1}" for i in range(size)), QQ)


def tope_polynomial(query: BernoulliQuery) -> sympy.Poly:
    """
    The polynomial agreeing with B on the tope of the sample point: every {x} becomes
    x - floor(x(sample)), the floor taken as a one-sided limit when x(sample) is an integer.
    """
    sample = query.sample or query.point
    _check_regular(query, sample)
    direction = default_direction(query.system, query.lattice)
    size = query.system.ambient_dim
    polynomial_ring, *variables = _tope_ring(size)
    total = polynomial_ring.zero
    for term in step_polynomial(query).terms:
        product = polynomial_ring.one * QQ(term.coeff.numerator, term.coeff.denominator)
        for factor in term.factors:
            at_sample = factor.argument(sample)
            base = floor(at_sample)
            if at_sample == base:
                step = factor.scale * sum(
                    (c * d for c, d in zip(factor.form, direction)), Fraction(0)
                )
                base = base if step > 0 else base - 1
            linear = polynomial_ring.zero
            for coefficient, variable in zip(factor.form, variables):
                if coefficient:
                    linear += QQ(coefficient.numerator, coefficient.denominator) * variable
            offset = factor.shift - base
            linear = (
                QQ(factor.scale.numerator, factor.scale.denominator) * linear
                + QQ(offset.numerator, offset.denominator)
            )
            product *= linear ** factor.exp
        total += product
    symbols = sympy.symbols(" ".join(f"v{i + 1}" for i in range(size)))
    if size == 1:
        symbols = (symbols,)
    return sympy.Poly.from_dict(dict(total), *symbols, domain="QQ")


def bernoulli_eval(query: BernoulliQuery):
    """Dispatches on the query mode; value mode refuses non-regular points."""
    if query.mode == "value":
        _check_regular(query, query.point)
        direction = default_direction(query.system, query.lattice)
        return _evaluate(query.system, query.lattice, query.exponents, query.point, direction)
    if query.mode == "limit":
        return limit_eval(query)
    if query.mode == "step_polynomial":
        return step_polynomial(query)
    return tope_polynomial(query)
