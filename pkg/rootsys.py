"""
Root-system data for the classical families A, B, C and D.

Vectors of V (where evaluation points and coroots live) are tuples of Fractions in standard
e-coordinates; type A uses r+1 ambient coordinates summing to zero. Exponents are always keyed by
root labels such as "e1-e2", "e1+e2", "e1" (short root of B) or "2e1" (long root of C); the
coroot spelling of a label ("2e1" in B, "e1" in C) is accepted on input too.
"""

import itertools
import logging
import sys
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Dict, Iterator, List, Mapping, NamedTuple, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, field_validator, model_validator
from sympy import Matrix
from sympy import Rational as SympyRational

from errors import InvalidExponents, InvalidMarking, UnsupportedFamily
from exactcore import LinearForm

logger = logging.getLogger()
logging.basicConfig(stream=sys.stderr)
logger.setLevel(logging.INFO)

Vector = Tuple[Fraction, ...]

FAMILIES = ("A", "B", "C", "D")
MIN_RANK = {"A": 1, "B": 2, "C": 2, "D": 2}

# lattice name -> family it belongs to
LATTICES = {
    "coroot-A": "A",
    "coweight-A": "A",
    "coroot-B": "B",
    "coroot-C": "C",
    "coroot-D": "D",
}
NATURAL_LATTICE = {"A": "coroot-A", "B": "coroot-B", "C": "coroot-C", "D": "coroot-D"}

CANONICAL_ORDERS = {
    "A": "e_i - e_j in lexicographic order of (i, j)",
    "B": "e_i - e_j lexicographic, then short roots e_i ascending, then e_i + e_j lexicographic",
    "C": "long roots 2e_i ascending, then e_i + e_j lexicographic, then e_i - e_j lexicographic",
    "D": "e_i - e_j lexicographic, then e_i + e_j lexicographic",
}


class RootSystemSpec(BaseModel):
    """
    A classical root system given by its family letter and rank.

    `bc_core` marks the BC arrangement of rank one (the single form e^1), which the MZV and D_2
    pipelines use as a core even though C_1 is not a root system of its own.
    """

    model_config = ConfigDict(frozen=True)

    family: str
    rank: int
    bc_core: bool = False

    @field_validator("family", mode="before")
    @classmethod
    def _known_family(cls, value: str) -> str:
        family = str(value).strip().upper()
        if family not in FAMILIES:
            raise ValueError(f"unknown family {value!r}; expected one of {', '.join(FAMILIES)}")
        return family

    @model_validator(mode="after")
    def _check_rank(self) -> "RootSystemSpec":
        if self.bc_core:
            if (self.family, self.rank) != ("C", 1):
                raise ValueError("bc_core is only meaningful for the rank one C arrangement")
            return self
        if self.rank < MIN_RANK[self.family]:
            raise ValueError(
                f"{self.family} needs rank >= {MIN_RANK[self.family]}, got {self.rank}"
            )
        return self

    @property
    def ambient_dim(self) -> int:
        return self.rank + 1 if self.family == "A" else self.rank

    @property
    def name(self) -> str:
        return f"{self.family}_{self.rank}"


def bc_system(rank: int) -> RootSystemSpec:
    """The BC arrangement of rank `rank` in its C labelling, including rank one (used by D_2)."""
    if rank >= MIN_RANK["C"]:
        return RootSystemSpec(family="C", rank=rank)
    return RootSystemSpec(family="C", rank=rank, bc_core=True)


class Coroot(NamedTuple):
    label: str
    form: LinearForm
    coroot_label: str


class ExponentMap(NamedTuple):
    """Exponents s_alpha keyed by root label, stored in the family's canonical order."""

    entries: Tuple[Tuple[str, int], ...]

    @property
    def total(self) -> int:
        return sum(value for _, value in self.entries)

    def exponent(self, label: str) -> int:
        for key, value in self.entries:
            if key == label:
                return value
        raise InvalidExponents(f"no exponent for root {label}")

    def as_dict(self) -> Dict[str, int]:
        return dict(self.entries)


class OrderedBasis(NamedTuple):
    """
    An ordered basis of coroot forms.

    `inverse` maps the first r standard coordinates of a vector to its coefficients in the basis.
    """

    labels: Tuple[str, ...]
    forms: Tuple[LinearForm, ...]
    inverse: Tuple[Vector, ...]
    unimodular: bool


class WeylElement(NamedTuple):
    """Signed permutation acting by e^i -> signs[i] e^perm[i]."""

    perm: Tuple[int, ...]
    signs: Tuple[int, ...]
    sign: int

    def apply(self, v: Sequence[Fraction]) -> Vector:
        result = [Fraction(0)] * len(v)
        for index, target in enumerate(self.perm):
            result[target] = self.signs[index] * Fraction(v[index])
        return tuple(result)


def _unit(size: int, *entries: Tuple[int, int]) -> LinearForm:
    coeffs = [0] * size
    for index, value in entries:
        coeffs[index] = value
    return LinearForm.of(coeffs)


@lru_cache(maxsize=None)
def positive_coroots(system: RootSystemSpec) -> Tuple[Coroot, ...]:
    """Positive coroots in the family's canonical order (see CANONICAL_ORDERS)."""
    r, n = system.rank, system.ambient_dim
    pairs = list(itertools.combinations(range(n), 2))

    def minus(i: int, j: int) -> Coroot:
        label = f"e{i + 1}-e{j + 1}"
        return Coroot(label, _unit(n, (i, 1), (j, -1)), label)

    def plus(i: int, j: int) -> Coroot:
        label = f"e{i + 1}+e{j + 1}"
        return Coroot(label, _unit(n, (i, 1), (j, 1)), label)

    if system.family == "A":
        return tuple(minus(i, j) for i, j in pairs)
    if system.family == "B":
        short = [Coroot(f"e{i + 1}", _unit(n, (i, 2)), f"2e{i + 1}") for i in range(r)]
        return tuple([minus(i, j) for i, j in pairs] + short + [plus(i, j) for i, j in pairs])
    if system.family == "C":
        long = [Coroot(f"2e{i + 1}", _unit(n, (i, 1)), f"e{i + 1}") for i in range(r)]
        return tuple(long + [plus(i, j) for i, j in pairs] + [minus(i, j) for i, j in pairs])
    return tuple([minus(i, j) for i, j in pairs] + [plus(i, j) for i, j in pairs])


@lru_cache(maxsize=None)
def _label_lookup(system: RootSystemSpec) -> Dict[str, str]:
    lookup = {}
    for coroot in positive_coroots(system):
        lookup[coroot.coroot_label] = coroot.label
        lookup[coroot.label] = coroot.label
    return lookup


def parse_root_label(system: RootSystemSpec, text: str) -> str:
    """Canonical root label for a root or coroot spelling, e.g. "e1" -> "2e1" in type C."""
    label = text.replace(" ", "")
    try:
        return _label_lookup(system)[label]
    except KeyError:
        raise InvalidExponents(f"{text!r} is not a positive root of {system.name}") from None


def canonical_order(system: RootSystemSpec) -> List[str]:
    return [coroot.label for coroot in positive_coroots(system)]


def exponent_map(system: RootSystemSpec, mapping: Mapping[str, int]) -> ExponentMap:
    """Validates a label -> exponent mapping; every positive root needs an entry."""
    values: Dict[str, int] = {}
    for text, value in mapping.items():
        label = parse_root_label(system, text)
        if label in values:
            raise InvalidExponents(f"root {label} given twice")
        if int(value) != value or value < 0:
            raise InvalidExponents(f"exponent for {label} must be a nonnegative integer")
        values[label] = int(value)
    missing = [label for label in canonical_order(system) if label not in values]
    if missing:
        raise InvalidExponents(f"missing exponents for {', '.join(missing)}")
    return ExponentMap(tuple((label, values[label]) for label in canonical_order(system)))


def uniform_exponents(system: RootSystemSpec, value: int) -> ExponentMap:
    return exponent_map(system, {label: value for label in canonical_order(system)})


def parse_exponents(system: RootSystemSpec, text: str, order: Optional[str] = None) -> ExponentMap:
    """
    Parses "label=value,..." or, with ``order="canonical"``, a positional list "2,1,1,1".
    Positional input without an explicit order is refused.
    """
    items = [item for item in text.replace(" ", "").split(",") if item]
    if all("=" in item for item in items):
        mapping = {}
        for item in items:
            label, value = item.split("=", 1)
            mapping[label] = int(value)
        return exponent_map(system, mapping)
    if any("=" in item for item in items):
        raise InvalidExponents("mix of labelled and positional exponents")
    if order != "canonical":
        raise InvalidExponents(
            "positional exponents need an explicit order; the only order is 'canonical': "
            + CANONICAL_ORDERS[system.family]
        )
    labels = canonical_order(system)
    if len(items) != len(labels):
        raise InvalidExponents(f"{system.name} has {len(labels)} positive roots, got {len(items)}")
    return exponent_map(system, dict(zip(labels, (int(item) for item in items))))


def check_lattice(system: RootSystemSpec, lattice: str) -> None:
    if LATTICES.get(lattice) != system.family:
        raise UnsupportedFamily(f"lattice {lattice!r} does not belong to family {system.family}")


def _to_sympy(rows: Sequence[Sequence[Fraction]]) -> Matrix:
    return Matrix([[SympyRational(x.numerator, x.denominator) for x in row] for row in rows])


def _from_sympy(matrix: Matrix) -> Tuple[Vector, ...]:
    return tuple(
        tuple(Fraction(int(matrix[i, j].p), int(matrix[i, j].q)) for j in range(matrix.cols))
        for i in range(matrix.rows)
    )


def _inverse_of_columns(columns: Sequence[Sequence[Fraction]], size: int) -> Tuple[Vector, ...]:
    """Inverse of the size x size matrix whose columns are the first `size` coordinates given."""
    matrix = _to_sympy([[column[i] for column in columns] for i in range(size)])
    return _from_sympy(matrix.inv())


def apply_matrix(matrix: Sequence[Sequence[Fraction]], v: Sequence[Fraction]) -> Vector:
    return tuple(
        sum((a * Fraction(b) for a, b in zip(row, v)), Fraction(0)) for row in matrix
    )


@lru_cache(maxsize=None)
def lattice_basis(system: RootSystemSpec, lattice: str) -> Tuple[Vector, ...]:
    """A Z-basis of the lattice in ambient coordinates."""
    check_lattice(system, lattice)
    r, n = system.rank, system.ambient_dim

    def vector(*entries: Tuple[int, Fraction]) -> Vector:
        return _unit(n, *entries).coeffs

    if lattice == "coroot-A":
        return tuple(vector((i, 1), (i + 1, -1)) for i in range(r))
    if lattice == "coweight-A":
        return tuple(
            tuple(Fraction(int(j <= i)) - Fraction(i + 1, r + 1) for j in range(n))
            for i in range(r)
        )
    if lattice == "coroot-C":
        return tuple(vector((i, 1)) for i in range(r))
    # coroot-B and coroot-D: vectors with even coordinate sum
    return tuple(vector((i, 1), (i + 1, -1)) for i in range(r - 1)) + (
        vector((r - 2, 1), (r - 1, 1)),
    )


@lru_cache(maxsize=None)
def dual_lattice_basis(system: RootSystemSpec, lattice: str) -> Tuple[Vector, ...]:
    """A Z-basis of the dual lattice (fundamental weights for coroot lattices)."""
    check_lattice(system, lattice)
    r, n = system.rank, system.ambient_dim
    half = Fraction(1, 2)
    if lattice == "coroot-A":
        return tuple(
            tuple(Fraction(int(j <= i)) - Fraction(i + 1, r + 1) for j in range(n))
            for i in range(r)
        )
    if lattice == "coweight-A":
        return tuple(_unit(n, (i, 1), (i + 1, -1)).coeffs for i in range(r))
    partial = [tuple(Fraction(int(j <= i)) for j in range(n)) for i in range(r)]
    if lattice == "coroot-C":
        return tuple(partial)
    spinor = tuple(half for _ in range(n))
    if lattice == "coroot-B":
        return tuple(partial[: r - 1]) + (spinor,)
    odd_spinor = tuple(half for _ in range(n - 1)) + (-half,)
    return tuple(partial[: r - 2]) + (odd_spinor, spinor)


@lru_cache(maxsize=None)
def _lattice_inverse(system: RootSystemSpec, lattice: str) -> Tuple[Vector, ...]:
    return _inverse_of_columns(lattice_basis(system, lattice), system.rank)


def to_lattice_coords(system: RootSystemSpec, lattice: str, v: Sequence[Fraction]) -> Vector:
    """Coordinates of v in the lattice basis (integral exactly when v is a lattice vector)."""
    return apply_matrix(_lattice_inverse(system, lattice), v[: system.rank])


def _det(rows: Sequence[Sequence[Fraction]]) -> Fraction:
    value = _to_sympy(rows).det()
    return Fraction(int(value.p), int(value.q))


def primitive_vector(vector: Sequence[Fraction]) -> Tuple[int, ...]:
    """The integral multiple of `vector` with content 1 and positive leading entry."""
    scale = 1
    for x in vector:
        scale = scale * x.denominator // gcd(scale, x.denominator)
    integers = [int(x * scale) for x in vector]
    content = 0
    for x in integers:
        content = gcd(content, abs(x))
    integers = [x // content for x in integers]
    leading = next(x for x in integers if x)
    return tuple(-x for x in integers) if leading < 0 else tuple(integers)


@lru_cache(maxsize=None)
def wall_normals(
    system: RootSystemSpec, lattice: str
) -> Tuple[Tuple[Tuple[int, ...], Tuple[str, ...]], ...]:
    """
    Primitive normals of the admissible walls, in the coordinates dual to the lattice basis,
    each with the labels of coroots spanning the wall. Walls are deduplicated by normal.
    """
    r = system.rank
    coroots = positive_coroots(system)
    if r == 1:
        return (((1,), ()),)
    coords = [list(to_lattice_coords(system, lattice, c.form.coeffs)) for c in coroots]
    normals: Dict[Tuple[int, ...], Tuple[str, ...]] = {}
    for subset in itertools.combinations(range(len(coroots)), r - 1):
        rows = [coords[i] for i in subset]
        null = [
            (-1) ** column * _det([row[:column] + row[column + 1:] for row in rows])
            for column in range(r)
        ]
        if not any(null):
            continue
        normal = primitive_vector(null)
        if normal not in normals:
            normals[normal] = tuple(coroots[i].label for i in subset)
    logger.debug(f"{system.name} / {lattice}: {len(normals)} distinct walls")
    return tuple(normals.items())


def find_wall(
    system: RootSystemSpec, lattice: str, v: Sequence[Fraction]
) -> Optional[Tuple[Tuple[int, ...], Fraction]]:
    """The first wall normal pairing to an integer with v, with that pairing, or None."""
    coords = to_lattice_coords(system, lattice, v)
    for normal, _ in wall_normals(system, lattice):
        pairing = sum((n * y for n, y in zip(normal, coords)), Fraction(0))
        if pairing.denominator == 1:
            return normal, pairing
    return None


def is_regular(system: RootSystemSpec, lattice: str, v: Sequence[Fraction]) -> bool:
    return find_wall(system, lattice, tuple(Fraction(x) for x in v)) is None


@lru_cache(maxsize=None)
def flag_bases(system: RootSystemSpec) -> Tuple[OrderedBasis, ...]:
    """
    The diagonal set of ordered bases: for A the bases
    [e^w(1) - e^w(2), ..., e^w(r) - e^(r+1)] over permutations w of the first r letters,
    for BC the flag bases with i-th element e^i or e^i +- e^j (j < i).
    """
    r, n = system.rank, system.ambient_dim
    if system.family == "A":
        lattice = "coroot-A"
        candidates = []
        for perm in itertools.permutations(range(r)):
            chain = list(perm) + [r]
            candidates.append(
                [
                    (f"e{chain[l] + 1}-e{chain[l + 1] + 1}",
                     _unit(n, (chain[l], 1), (chain[l + 1], -1)))
                    for l in range(r)
                ]
            )
    elif system.family in ("B", "C"):
        lattice = "coroot-C"
        choices = []
        for i in range(r):
            options = [(f"e{i + 1}", _unit(n, (i, 1)))]
            for j in range(i):
                options.append((f"e{i + 1}-e{j + 1}", _unit(n, (i, 1), (j, -1))))
                options.append((f"e{i + 1}+e{j + 1}", _unit(n, (i, 1), (j, 1))))
            choices.append(options)
        candidates = [list(combo) for combo in itertools.product(*choices)]
    else:
        raise UnsupportedFamily(
            "flag bases exist for the A and BC arrangements; D goes through its B/C decomposition"
        )
    core = system if system.family != "B" else bc_system(r)
    bases = []
    for candidate in candidates:
        forms = tuple(form for _, form in candidate)
        in_lattice = [to_lattice_coords(core, lattice, form.coeffs) for form in forms]
        determinant = _det([list(row) for row in zip(*in_lattice)])
        bases.append(
            OrderedBasis(
                labels=tuple(label for label, _ in candidate),
                forms=forms,
                inverse=_inverse_of_columns([form.coeffs for form in forms], r),
                unimodular=abs(determinant) == 1,
            )
        )
    logger.debug(f"{system.name}: {len(bases)} flag bases")
    return tuple(bases)


def c_coeffs(basis: OrderedBasis, v: Sequence[Fraction]) -> Vector:
    """Coefficients c_i with v = sum c_i alpha_i (v in ambient coordinates)."""
    return apply_matrix(basis.inverse, v[: len(basis.inverse)])


def _perm_sign(perm: Sequence[int]) -> int:
    inversions = sum(
        1 for i, j in itertools.combinations(range(len(perm)), 2) if perm[i] > perm[j]
    )
    return -1 if inversions % 2 else 1


@lru_cache(maxsize=None)
def weyl_group(system: RootSystemSpec) -> Tuple[WeylElement, ...]:
    n = system.ambient_dim
    elements = []
    for perm in itertools.permutations(range(n)):
        parity = _perm_sign(perm)
        if system.family == "A":
            elements.append(WeylElement(perm, (1,) * n, parity))
            continue
        for signs in itertools.product((1, -1), repeat=n):
            flips = signs.count(-1)
            if system.family == "D" and flips % 2:
                continue
            elements.append(WeylElement(perm, signs, parity * (-1) ** flips))
    return tuple(elements)


def weyl_elements(system: RootSystemSpec) -> Iterator[WeylElement]:
    return iter(weyl_group(system))


def inversion_count(system: RootSystemSpec, element: WeylElement) -> int:
    """Number of positive coroots sent to negative coroots."""
    positive = {c.form.coeffs for c in positive_coroots(system)}
    return sum(1 for c in positive_coroots(system) if element.apply(c.form.coeffs) not in positive)


def _simple(system: RootSystemSpec, coroots: bool) -> Tuple[Vector, ...]:
    r, n = system.rank, system.ambient_dim
    chain = [_unit(n, (i, 1), (i + 1, -1)) for i in range(r - 1)]
    if system.family == "A":
        last = _unit(n, (r - 1, 1), (r, -1))
    elif system.family == "D":
        last = _unit(n, (r - 2, 1), (r - 1, 1))
    else:
        # B and C swap the short and long last node between roots and coroots
        long_end = (system.family == "B") == coroots
        last = _unit(n, (r - 1, 2 if long_end else 1))
    return tuple(form.coeffs for form in chain + [last])


def simple_coroots(system: RootSystemSpec) -> Tuple[Vector, ...]:
    return _simple(system, coroots=True)


def simple_roots(system: RootSystemSpec) -> Tuple[Vector, ...]:
    """Simple roots as functionals on V in e-coordinates."""
    return _simple(system, coroots=False)


def highest_roots(system: RootSystemSpec) -> Tuple[Vector, ...]:
    """Highest root(s); D_2 is reducible and has one per simple factor."""
    r, n = system.rank, system.ambient_dim
    if system.family == "A":
        return (_unit(n, (0, 1), (r, -1)).coeffs,)
    if system.family == "C":
        return (_unit(n, (0, 2)).coeffs,)
    if system.family == "D" and r == 2:
        return (_unit(n, (0, 1), (1, -1)).coeffs, _unit(n, (0, 1), (1, 1)).coeffs)
    return (_unit(n, (0, 1), (1, 1)).coeffs,)


def in_alcove(system: RootSystemSpec, a: Sequence[Fraction]) -> bool:
    """True when a lies in the open fundamental alcove."""
    point = LinearForm.of(a).coeffs
    return all(LinearForm(alpha).evaluate(point) > 0 for alpha in simple_roots(system)) and all(
        LinearForm(theta).evaluate(point) < 1 for theta in highest_roots(system)
    )


def from_coroot_coords(system: RootSystemSpec, coefficients: Sequence[Fraction]) -> Vector:
    """sum a_i H_(alpha_i) in ambient coordinates."""
    if len(coefficients) != system.rank:
        raise InvalidMarking(f"{system.name} needs {system.rank} simple-coroot coefficients")
    total = [Fraction(0)] * system.ambient_dim
    for weight, coroot in zip(coefficients, simple_coroots(system)):
        for index, value in enumerate(coroot):
            total[index] += Fraction(weight) * value
    return tuple(total)


def coset_representatives(kind: str, rank: int) -> List[Vector]:
    """
    "A_coweight": the r+1 vectors j xi / (r+1) with xi = (1, ..., 1, -r), representatives of
    the coweight lattice modulo the coroot lattice.
    "B_over_2C": the sums of even-size subsets of standard vectors, representatives of the even
    lattice modulo 2Z^r.
    """
    if kind == "A_coweight":
        xi = [Fraction(1)] * rank + [Fraction(-rank)]
        return [tuple(Fraction(j, rank + 1) * x for x in xi) for j in range(rank + 1)]
    if kind == "B_over_2C":
        representatives = []
        for size in range(0, rank + 1, 2):
            for subset in itertools.combinations(range(rank), size):
                representatives.append(tuple(Fraction(int(i in subset)) for i in range(rank)))
        return representatives
    raise ValueError(f"unknown coset kind {kind!r}")


def d_decomposition(
    rank: int, exponents: ExponentMap
) -> Tuple[ExponentMap, List[Tuple[int, int, ExponentMap]]]:
    """
    Splits a D_r exponent map into the B_r map (zero on the short roots) and, for each
    k = 1..r, the sign c_k and the exponents of the BC_(r-1) arrangement obtained by dropping
    coordinate k: e^i (i != k) receives s(e_i + e_k) + s(e_i - e_k).
    """
    values = exponents.as_dict()
    b_system = RootSystemSpec(family="B", rank=rank)
    extended = exponent_map(
        b_system, {label: values.get(label, 0) for label in canonical_order(b_system)}
    )

    def pair(i: int, j: int, sign: str) -> int:
        low, high = sorted((i, j))
        return values[f"e{low}{sign}e{high}"]

    pieces = []
    reduced = bc_system(rank - 1)
    for k in range(1, rank + 1):
        c_k = (-1) ** sum(values[f"e{k}-e{j}"] for j in range(k + 1, rank + 1))
        rest = [i for i in range(1, rank + 1) if i != k]
        mapping = {}
        for new, old in enumerate(rest, 1):
            mapping[f"2e{new}"] = pair(old, k, "+") + pair(old, k, "-")
        for (new_i, old_i), (new_j, old_j) in itertools.combinations(enumerate(rest, 1), 2):
            mapping[f"e{new_i}-e{new_j}"] = pair(old_i, old_j, "-")
            mapping[f"e{new_i}+e{new_j}"] = pair(old_i, old_j, "+")
        pieces.append((k, c_k, exponent_map(reduced, mapping)))
    return extended, pieces
