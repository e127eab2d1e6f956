"""
Exact arithmetic used by every pipeline: Bernoulli numbers and polynomials, fractional
parts, linear forms and total-degree-truncated power series.

Rationals are ``fractions.Fraction`` at the API surface. Series coefficients live in sympy's
``QQ`` domain, or in a polynomial ring ``QQ[u1, ..., ur]`` when step polynomials are built
symbolically; both support the same ``+`` and ``*`` so one residue kernel serves both modes.
"""

from fractions import Fraction
from functools import lru_cache
from math import comb, factorial, floor
from typing import Any, Dict, Iterator, List, NamedTuple, Optional, Sequence, Tuple, Union

from sympy.polys.domains import QQ
from sympy.polys.rings import PolyElement, ring

Rational = Fraction
Exponent = Tuple[int, ...]
Coefficient = Any  # a QQ element or a PolyElement over QQ
Scalar = Union[int, Fraction]


def rational(value: Any) -> Fraction:
    """Parses ints, Fractions and "p/q" strings exactly. Floats are refused."""
    if isinstance(value, float):
        raise TypeError(f"refusing inexact float {value!r}; pass a 'p/q' string instead")
    if isinstance(value, str):
        return Fraction(value.strip())
    return Fraction(value)


def to_qq(value: Any) -> Coefficient:
    if isinstance(value, PolyElement):
        return value
    value = Fraction(value)
    return QQ(value.numerator, value.denominator)


def from_qq(value: Coefficient) -> Fraction:
    return Fraction(int(QQ.numer(value)), int(QQ.denom(value)))


def is_symbolic(value: Any) -> bool:
    return isinstance(value, PolyElement)


@lru_cache(maxsize=None)
def symbol_ring(count: int) -> Tuple[Any, ...]:
    """The ring QQ[u1, ..., u_count] followed by its generators."""
    names = ",".join(f"u{index + 1}" for index in range(count))
    return ring(names, QQ)


@lru_cache(maxsize=None)
def bernoulli_number(n: int) -> Fraction:
    """B_n with B_1 = -1/2, the convention of the z/(e^z - 1) generating function."""
    if n < 0:
        raise ValueError(f"Bernoulli numbers are indexed from 0, got {n}")
    if n == 0:
        return Fraction(1)
    if n > 1 and n % 2:
        return Fraction(0)
    total = sum(comb(n + 1, j) * bernoulli_number(j) for j in range(n))
    return -Fraction(total) / (n + 1)


def bernoulli_value(k: int, t: Scalar) -> Fraction:
    """B(k, t) for k >= 0 (B(0, t) = 1)."""
    t = Fraction(t)
    return sum(
        (comb(k, j) * bernoulli_number(j) * t ** (k - j) for j in range(k + 1)),
        Fraction(0),
    )


def bernoulli_poly(k: int, t: Scalar) -> Fraction:
    if k < 1:
        raise ValueError("bernoulli_poly needs k >= 1; use bernoulli_number for k = 0")
    return bernoulli_value(k, t)


def frac(t: Scalar) -> Fraction:
    """Fractional part t - floor(t), always in [0, 1)."""
    t = Fraction(t)
    return t - floor(t)


def compositions(total: int, parts: int) -> Iterator[Exponent]:
    """All tuples of `parts` nonnegative integers summing to `total`."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


class LinearForm(NamedTuple):
    """
    A rational linear form in fixed coordinates.

    `frame` is "e" for standard coordinates of V and "t" for the coordinates t_i = <alpha_i, z>
    attached to an ordered basis.
    """

    coeffs: Tuple[Fraction, ...]
    frame: str = "e"

    @classmethod
    def of(cls, coeffs: Sequence[Scalar], frame: str = "e") -> "LinearForm":
        return cls(tuple(Fraction(c) for c in coeffs), frame)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def plus(self, other: "LinearForm") -> "LinearForm":
        self._check_frame(other)
        return LinearForm(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)), self.frame)

    def scaled(self, factor: Scalar) -> "LinearForm":
        return LinearForm(tuple(c * factor for c in self.coeffs), self.frame)

    def evaluate(self, point: Sequence[Scalar]) -> Fraction:
        if len(point) != len(self.coeffs):
            raise ValueError(f"form of length {len(self.coeffs)} applied to {len(point)} values")
        return sum((c * Fraction(x) for c, x in zip(self.coeffs, point)), Fraction(0))

    def _check_frame(self, other: "LinearForm") -> None:
        if self.frame != other.frame:
            raise ValueError(f"cannot combine forms in frames {self.frame} and {other.frame}")


class TruncSeries:
    """
    A power series in `nvars` variables keeping only terms of total degree <= `cap`.

    Terms are stored sparsely as exponent tuple -> coefficient. A series built with
    `TruncSeries.outer` keeps its univariate factors instead and computes coefficients on demand,
    which is how residue numerators avoid materializing every monomial.
    """

    __slots__ = ("nvars", "cap", "_terms", "_factors")

    def __init__(
        self,
        nvars: int,
        cap: int,
        terms: Optional[Dict[Exponent, Coefficient]] = None,
        factors: Optional[Sequence[Sequence[Coefficient]]] = None,
    ) -> None:
        self.nvars = nvars
        self.cap = cap
        self._factors: Optional[Tuple[Tuple[Coefficient, ...], ...]] = None
        self._terms: Optional[Dict[Exponent, Coefficient]] = None
        if factors is not None:
            self._factors = tuple(tuple(f[: cap + 1]) for f in factors)
        else:
            self._terms = {
                exps: coeff
                for exps, coeff in (terms or {}).items()
                if coeff and sum(exps) <= cap
            }

    @classmethod
    def outer(cls, factors: Sequence["TruncSeries"], cap: int) -> "TruncSeries":
        """Product f_1(t_1) * ... * f_n(t_n) of univariate series in distinct variables."""
        columns = [[series[(n,)] for n in range(cap + 1)] for series in factors]
        return cls(len(factors), cap, factors=columns)

    @property
    def terms(self) -> Dict[Exponent, Coefficient]:
        if self._terms is None:
            terms: Dict[Exponent, Coefficient] = {}
            for degree in range(self.cap + 1):
                terms.update(self.homogeneous(degree))
            self._terms = terms
        return self._terms

    def __getitem__(self, exps: Exponent) -> Coefficient:
        if sum(exps) > self.cap:
            return QQ.zero
        if self._factors is not None:
            value = QQ.one
            for column, power in zip(self._factors, exps):
                if power >= len(column):
                    return QQ.zero
                value = column[power] * value
            return value
        return self._terms.get(tuple(exps), QQ.zero)

    def coefficient(self, exps: Exponent) -> Union[Fraction, PolyElement]:
        value = self[exps]
        return value if is_symbolic(value) else from_qq(value)

    def homogeneous(self, degree: int) -> Dict[Exponent, Coefficient]:
        """The slice of total degree `degree`."""
        if self._terms is not None:
            return {e: c for e, c in self._terms.items() if sum(e) == degree}
        slice_ = {}
        for exps in compositions(degree, self.nvars):
            value = self[exps]
            if value:
                slice_[exps] = value
        return slice_

    def scaled(self, factor: Any) -> "TruncSeries":
        factor = to_qq(factor)
        if self._factors is not None and self._factors:
            columns = list(self._factors)
            columns[0] = tuple(factor * c for c in columns[0])
            return TruncSeries(self.nvars, self.cap, factors=columns)
        return TruncSeries(
            self.nvars, self.cap, {e: factor * c for e, c in self.terms.items()}
        )

    def __add__(self, other: "TruncSeries") -> "TruncSeries":
        self._check_compatible(other)
        cap = min(self.cap, other.cap)
        total = dict(self.terms)
        for exps, coeff in other.terms.items():
            if exps in total:
                total[exps] = total[exps] + coeff
            else:
                total[exps] = coeff
        return TruncSeries(self.nvars, cap, total)

    def __mul__(self, other: "TruncSeries") -> "TruncSeries":
        self._check_compatible(other)
        cap = min(self.cap, other.cap)
        product: Dict[Exponent, Coefficient] = {}
        for left, a in self.terms.items():
            left_degree = sum(left)
            for right, b in other.terms.items():
                if left_degree + sum(right) > cap:
                    continue
                exps = tuple(x + y for x, y in zip(left, right))
                if exps in product:
                    product[exps] = product[exps] + a * b
                else:
                    product[exps] = a * b
        return TruncSeries(self.nvars, cap, product)

    def __pow__(self, power: int) -> "TruncSeries":
        result = TruncSeries(self.nvars, self.cap, {(0,) * self.nvars: QQ.one})
        for _ in range(power):
            result = result * self
        return result

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TruncSeries):
            return NotImplemented
        return (self.nvars, self.cap) == (other.nvars, other.cap) and self.terms == other.terms

    def __repr__(self) -> str:
        return f"TruncSeries(nvars={self.nvars}, cap={self.cap}, terms={len(self.terms)})"

    def _check_compatible(self, other: "TruncSeries") -> None:
        if self.nvars != other.nvars:
            raise ValueError(f"series in {self.nvars} and {other.nvars} variables")


def todd_factor(order: int) -> TruncSeries:
    """z / (e^z - 1) up to z^order; the coefficient of z^n is B_n / n!."""
    if order < 0:
        raise ValueError("order must be nonnegative")
    return TruncSeries(
        1,
        order,
        {(n,): to_qq(bernoulli_number(n) / factorial(n)) for n in range(order + 1)},
    )


def _power_column(u: Any, cap: int) -> List[Coefficient]:
    """u^n / n! for n = 0..cap, for a rational or a ring element u."""
    if is_symbolic(u):
        powers = [u.ring.one]
        for _ in range(cap):
            powers.append(powers[-1] * u)
        return [QQ(1, factorial(n)) * p for n, p in enumerate(powers)]
    u = Fraction(u)
    return [to_qq(u ** n / factorial(n)) for n in range(cap + 1)]


def exp_linear(u_coeffs: Sequence[Any], cap: int) -> TruncSeries:
    """exp(u_1 t_1 + ... + u_n t_n) truncated at total degree `cap`."""
    columns = [_power_column(u, cap) for u in u_coeffs]
    return TruncSeries(len(columns), cap, factors=columns)


def bernoulli_series(u: Any, cap: int) -> TruncSeries:
    """
    exp(u t) * t / (e^t - 1) in one variable: the coefficient of t^n is B(n, u) / n!.

    Equal to ``exp_linear([u], cap) * todd_factor(cap)``, computed directly.
    """
    if is_symbolic(u):
        powers = [u.ring.one]
        for _ in range(cap):
            powers.append(powers[-1] * u)
        column = []
        for n in range(cap + 1):
            entry = u.ring.zero
            for j in range(n + 1):
                weight = comb(n, j) * bernoulli_number(j) / factorial(n)
                if weight:
                    entry = entry + to_qq(weight) * powers[n - j]
            column.append(entry)
    else:
        column = [to_qq(bernoulli_value(n, u) / factorial(n)) for n in range(cap + 1)]
    return TruncSeries(1, cap, factors=[column])
