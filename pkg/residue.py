"""
Iterated residues Res_{t_1} ... Res_{t_r} of rational functions whose denominators are products
of linear forms, taken in the coordinates t_i = <alpha_i, z> of an ordered basis.

The innermost variable t_r is eliminated first. At every stage the denominator forms are split
into the pure power of the current variable and mixed forms (t + m)^s, each mixed factor is
expanded geometrically in t, and the coefficient of t^-1 is kept. Denominators are stored as
canonical keys: each form is scaled so that its last nonzero coefficient is 1 and equal forms
are merged, so intermediate states stay small.
"""

import logging
import sys
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Dict, NamedTuple, Sequence, Tuple

from sympy.polys.domains import QQ

from errors import ResidueTruncationError
from exactcore import (
    Coefficient,
    Exponent,
    LinearForm,
    TruncSeries,
    bernoulli_series,
    compositions,
    to_qq,
)
from rootsys import OrderedBasis, c_coeffs

logger = logging.getLogger()
logging.basicConfig(stream=sys.stderr)
logger.setLevel(logging.INFO)

Form = Tuple[Fraction, ...]
DenominatorKey = Tuple[Tuple[Form, int], ...]


class FractionExpr(NamedTuple):
    """numerator / prod(form ** power) with a truncated numerator in t_1..t_r."""

    numerator: TruncSeries
    denominator: Tuple[Tuple[LinearForm, int], ...]


class ResidueRequest(NamedTuple):
    basis: OrderedBasis
    g_exponents: Tuple[Tuple[LinearForm, int], ...]
    u: Tuple[object, ...]


def to_sigma_coords(forms: Sequence[LinearForm], basis: OrderedBasis) -> Tuple[LinearForm, ...]:
    """Rewrites each form phi = sum c_j alpha_j as sum c_j t_j."""
    return tuple(LinearForm(c_coeffs(basis, form.coeffs), "t") for form in forms)


def build_integrand(request: ResidueRequest) -> FractionExpr:
    """
    g(z) exp(sum u_i t_i) prod 1/(1 - e^(t_i)) written as
    (-1)^r exp(sum u_i t_i) prod T(t_i) / (prod t_i * g-denominator), T(t) = t/(e^t - 1).
    The numerator keeps total degree up to the sum of the g exponents, which is all the
    residue can see.
    """
    r = len(request.u)
    cap = sum(power for _, power in request.g_exponents)
    numerator = TruncSeries.outer([bernoulli_series(u, cap) for u in request.u], cap)
    if r % 2:
        numerator = numerator.scaled(-1)
    basis_forms = tuple(
        (LinearForm(tuple(Fraction(int(i == j)) for j in range(r)), "t"), 1) for i in range(r)
    )
    return FractionExpr(numerator, basis_forms + tuple(request.g_exponents))


def _normalize_form(form: Form) -> Tuple[Fraction, Form]:
    last = next(c for c in reversed(form) if c)
    return last, tuple(c / last for c in form)


def normalize_denominator(
    denominator: Sequence[Tuple[LinearForm, int]]
) -> Tuple[Fraction, DenominatorKey]:
    """Scalar and canonical key with denominator == key / scalar."""
    scalar = Fraction(1)
    merged: Dict[Form, int] = {}
    for form, power in denominator:
        if power == 0:
            continue
        assert not form.is_zero(), "zero form in a denominator"
        last, normal = _normalize_form(form.coeffs)
        scalar /= last ** power
        merged[normal] = merged.get(normal, 0) + power
    return scalar, tuple(sorted(merged.items()))


@lru_cache(maxsize=1 << 16)
def _stage_expand(
    key: DenominatorKey, nvars: int, k: int
) -> Tuple[Tuple[DenominatorKey, Coefficient], ...]:
    """
    Residue in the last variable t of t^k / key: a combination of keys in the remaining
    variables. Each mixed factor (t + m)^-s contributes binom(-s, n) t^n m^(-s-n).
    """
    pure = 0
    mixed = []
    carried: Dict[Form, int] = {}
    for form, power in key:
        if not form[-1]:
            carried[form[:-1]] = power
        elif any(form[:-1]):
            mixed.append((form[:-1], power))
        else:
            pure += power
    need = pure - 1 - k
    if pure == 0 or need < 0:
        return ()
    expansion: Dict[DenominatorKey, Fraction] = {}
    for parts in compositions(need, len(mixed)):
        scalar = Fraction(1)
        merged = dict(carried)
        for (rest, power), n in zip(mixed, parts):
            last, normal = _normalize_form(rest)
            total = power + n
            scalar *= (-1) ** n * comb(power + n - 1, n)
            scalar /= last ** total
            merged[normal] = merged.get(normal, 0) + total
        new_key = tuple(sorted(merged.items()))
        expansion[new_key] = expansion.get(new_key, Fraction(0)) + scalar
    return tuple((new_key, to_qq(value)) for new_key, value in expansion.items() if value)


@lru_cache(maxsize=1 << 20)
def monomial_residue(key: DenominatorKey, exps: Exponent) -> Coefficient:
    """Res(t^exps / key), eliminating the last variable first."""
    if not exps:
        return QQ.one
    total = QQ.zero
    for new_key, scalar in _stage_expand(key, len(exps), exps[-1]):
        total += scalar * monomial_residue(new_key, exps[:-1])
    return total


def residue_functional(key: DenominatorKey, nvars: int, degree: int) -> Dict[Exponent, Coefficient]:
    """
    The table a -> Res(t^a / key) over all monomials of total degree `degree`, zero entries
    omitted.
    """
    table = {}
    if degree >= 0:
        for exps in compositions(degree, nvars):
            entry = monomial_residue(key, exps)
            if entry:
                table[exps] = entry
    logger.debug(f"residue table: {len(table)} nonzero entries")
    return table


def iterated_residue(expr: FractionExpr) -> Coefficient:
    """Res_{t_1}(... Res_{t_r}(expr)); a QQ element, or a ring element for symbolic numerators."""
    nvars = expr.numerator.nvars
    multiplicity = sum(power for _, power in expr.denominator)
    degree = multiplicity - nvars
    if degree < 0:
        return QQ.zero
    if expr.numerator.cap < degree:
        raise ResidueTruncationError(
            f"numerator truncated at degree {expr.numerator.cap}, residue needs {degree}"
        )
    scalar, key = normalize_denominator(expr.denominator)
    total = QQ.zero
    # only monomials in the numerator's support are ever resolved
    for exps, coefficient in expr.numerator.homogeneous(degree).items():
        entry = monomial_residue(key, exps)
        if entry:
            total = coefficient * entry + total
    return to_qq(scalar) * total
