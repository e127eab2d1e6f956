from fractions import Fraction as F
from math import factorial

import numpy as np
import pytest
import sympy
from pydantic import ValidationError

from errors import GenericityFailure, NonRegularPoint
from exactcore import bernoulli_value, frac
from rootsys import (
    RootSystemSpec,
    exponent_map,
    inversion_count,
    is_regular,
    lattice_basis,
    parse_exponents,
    to_lattice_coords,
    uniform_exponents,
    wall_normals,
    weyl_group,
)
from szenes import (
    BernoulliQuery,
    StepPolynomial,
    bernoulli_eval,
    default_direction,
    plan_terms,
)


def query(family, rank, exponents, point=(), mode="value", lattice=None, **fields):
    spec = RootSystemSpec(family=family, rank=rank)
    if isinstance(exponents, int):
        exponents = uniform_exponents(spec, exponents)
    elif isinstance(exponents, str):
        exponents = parse_exponents(spec, exponents, order="canonical")
    else:
        exponents = exponent_map(spec, exponents)
    return BernoulliQuery(
        system=spec,
        lattice=lattice or f"coroot-{spec.family}",
        exponents=exponents,
        point=point,
        mode=mode,
        **fields,
    )


def a2_weight_formula(v1, v2):
    """B(A_2, coroot lattice, s = 1) at v = (v1, v2, -v1 - v2)."""
    a, b, c = frac(v1), frac(v2), frac(v1 + v2)
    return F(1, 6) * (b - a) * (a * a - 3 * c * a + b * a + 3 * c - 1 - 3 * c * b + b * b)


def c2_closed_form(v1, v2):
    """B(C_2, standard lattice, s = [2, 1, 1, 1]) as a step polynomial."""
    a, b, p, m = frac(v1), frac(v2), frac(v1 + v2), frac(v1 - v2)
    return (
        -F(1, 160) * m ** 5
        - F(1, 48) * a ** 2
        + F(1, 24) * a ** 3
        + F(1, 24) * p ** 3 * b
        - F(1, 48) * p ** 4 * b
        - F(1, 48) * p ** 2 * b
        - F(1, 960) * p
        + F(1, 96) * p ** 2
        - F(1, 96) * p ** 3
        - F(1, 192) * p ** 4
        + F(1, 960) * m
        + F(1, 96) * m ** 2
        - F(1, 32) * m ** 3
        + F(5, 192) * m ** 4
        - F(1, 48) * a ** 4
        + F(1, 24) * a ** 2 * b
        - F(1, 12) * a ** 3 * b
        + F(1, 24) * a ** 4 * b
        + F(1, 160) * p ** 5
        + F(1, 24) * m ** 3 * b
        - F(1, 48) * m ** 4 * b
        - F(1, 48) * m ** 2 * b
    )


def regular_points(family, rank, count, seed, lattice=None):
    spec = RootSystemSpec(family=family, rank=rank)
    lattice = lattice or f"coroot-{spec.family}"
    rng = np.random.default_rng(seed)
    points = []
    while len(points) < count:
        coords = [F(int(rng.integers(-40, 41)), int(rng.integers(2, 60))) for _ in range(rank)]
        if family == "A":
            coords.append(-sum(coords))
        if is_regular(spec, lattice, coords):
            points.append(tuple(coords))
    return points


def evaluate_poly(polynomial, point):
    values = {
        gen: sympy.Rational(x.numerator, x.denominator) for gen, x in zip(polynomial.gens, point)
    }
    return F(str(polynomial.as_expr().subs(values)))


C2_POINTS = [
    (F(1, 15), F(1, 30)),
    (F(2, 7), F(3, 11)),
    (F(-1, 5), F(4, 9)),
    (F(5, 13), F(-7, 17)),
]


class TestQuery:
    def test_point_dimension(self):
        with pytest.raises(ValidationError):
            query("C", 2, 2, (F(1, 3),))

    def test_type_a_points_sum_to_zero(self):
        with pytest.raises(ValidationError):
            query("A", 2, 2, (F(1, 3), F(1, 5), F(0)))

    def test_strings_are_parsed_exactly(self):
        assert query("C", 2, 2, "1/15,1/30").point == (F(1, 15), F(1, 30))

    def test_floats_are_refused(self):
        with pytest.raises((TypeError, ValidationError)):
            query("C", 2, 2, (0.1, 0.2))

    def test_unknown_mode(self):
        with pytest.raises(ValidationError):
            query("C", 2, 2, (F(1, 3), F(1, 5)), mode="numeric")

    def test_tope_needs_sample(self):
        with pytest.raises(ValidationError):
            query("C", 2, 2, mode="tope_polynomial")


class TestRankOne:
    @pytest.mark.parametrize("k", [1, 2, 3, 4, 6])
    @pytest.mark.parametrize("t", [F(1, 3), F(2, 7), F(-5, 11)])
    def test_bernoulli_polynomial(self, k, t):
        value = bernoulli_eval(query("A", 1, k, (t, -t)))
        assert value == -bernoulli_value(k, frac(t)) / factorial(k)

    @pytest.mark.parametrize(
        "direction, expected", [(None, F(1, 2)), ((F(-1), F(1)), F(-1, 2))]
    )
    def test_one_sided_limits(self, direction, expected):
        q = query("A", 1, 1, (F(0), F(0)), mode="limit", direction=direction)
        assert bernoulli_eval(q) == expected

    def test_wall_point_in_value_mode(self):
        with pytest.raises(NonRegularPoint) as error:
            bernoulli_eval(query("A", 1, 2, (F(1), F(-1))))
        assert error.value.pairing == 1


class TestTypeA:
    @pytest.mark.parametrize(
        "v1, v2", [(F(1, 7), F(2, 13)), (F(-3, 11), F(5, 17)), (F(9, 19), F(11, 23))]
    )
    def test_weight_formula(self, v1, v2):
        value = bernoulli_eval(query("A", 2, 1, (v1, v2, -v1 - v2)))
        assert value == a2_weight_formula(v1, v2)

    def test_weight_formula_at_random_points(self):
        for point in regular_points("A", 2, 50, seed=11):
            assert bernoulli_eval(query("A", 2, 1, point)) == a2_weight_formula(*point[:2])

    @pytest.mark.parametrize("v1, v2", [(F(1, 7), F(2, 13)), (F(-3, 11), F(5, 17))])
    def test_coweight_lattice_averages_shifts(self, v1, v2):
        value = bernoulli_eval(query("A", 2, 1, (v1, v2, -v1 - v2), lattice="coweight-A"))
        shifts = [F(j, 3) for j in range(3)]
        expected = sum(a2_weight_formula(v1 + s, v2 + s) for s in shifts) / 3
        assert value == expected

    def test_all_ten_at_zero(self):
        value = bernoulli_eval(query("A", 2, 10, (F(0),) * 3, mode="limit"))
        assert value == F(-27739097, 4174671932121099276691439616000000)

    @pytest.mark.slow
    @pytest.mark.parametrize(
        "exponents, expected",
        [
            (
                "6,6,6,6,4,2,2,2,2,2",
                F(-66581757, 208141653889769830190206956529621401600000000),
            ),
            (
                "4,4,4,4,4,4,4,4,4,4",
                F(
                    3998447009863,
                    19318834119102098604968210835862034086625280000000000,
                ),
            ),
        ],
    )
    def test_a4_at_zero(self, exponents, expected):
        assert bernoulli_eval(query("A", 4, exponents, (F(0),) * 5, mode="limit")) == expected


class TestTypeC:
    @pytest.mark.parametrize(
        "exponents, point, expected",
        [
            ("2,1,1,1", (F(1, 15), F(1, 30)), F(-276037, 5832000000)),
            ("2,2,1,1", (F(1, 5), F(1, 19)), F(810650239, 132316540312500)),
            (
                "2,3,4,5",
                (F(1, 7), F(1, 17)),
                F(
                    47036110438854761301636459941,
                    1529174429579197250943325345977126782238720,
                ),
            ),
        ],
    )
    def test_values(self, exponents, point, expected):
        assert bernoulli_eval(query("C", 2, exponents, point)) == expected

    @pytest.mark.parametrize("point", C2_POINTS)
    def test_closed_form(self, point):
        assert bernoulli_eval(query("C", 2, "2,1,1,1", point)) == c2_closed_form(*point)

    @pytest.mark.parametrize("point", C2_POINTS)
    def test_step_polynomial_matches_values(self, point):
        polynomial = bernoulli_eval(query("C", 2, "2,1,1,1", mode="step_polynomial"))
        assert polynomial.evaluate(point) == c2_closed_form(*point)

    def test_closed_form_at_random_points(self):
        polynomial = bernoulli_eval(query("C", 2, "2,1,1,1", mode="step_polynomial"))
        for point in regular_points("C", 2, 25, seed=12):
            expected = c2_closed_form(*point)
            assert bernoulli_eval(query("C", 2, "2,1,1,1", point)) == expected
            assert polynomial.evaluate(point) == expected

    def test_tope_polynomial(self):
        q = query("C", 2, "2,1,1,1", mode="tope_polynomial", sample=(F(1, 15), F(1, 30)))
        v1, v2 = sympy.symbols("v1 v2")
        R = sympy.Rational
        expected = R(1, 8) * (
            -R(1, 60) * v2
            + R(1, 2) * v1 ** 2 * v2
            - v1 ** 3 * v2
            + R(1, 6) * v2 ** 2
            - v1 * v2 ** 2
            + v1 * v2 ** 3
            + v1 ** 2 * v2 ** 2
            - R(1, 6) * v2 ** 3
            + R(1, 6) * v2 ** 4
            + R(1, 2) * v1 ** 4 * v2
            - v1 ** 2 * v2 ** 3
            - R(7, 30) * v2 ** 5
        )
        assert bernoulli_eval(q) == sympy.Poly(expected, v1, v2, domain="QQ")

    def test_non_regular_point(self):
        with pytest.raises(NonRegularPoint) as error:
            bernoulli_eval(query("C", 2, 2, (F(1, 3), F(1, 3))))
        assert error.value.pairing.denominator == 1

    def test_limit_direction_on_a_wall(self):
        q = query("C", 2, 2, (F(0), F(0)), mode="limit", direction=(F(1), F(0)))
        with pytest.raises(GenericityFailure):
            bernoulli_eval(q)

    @pytest.mark.parametrize("point", [(F(1, 5), F(1, 10)), (F(2, 5), F(1, 3))])
    def test_tope_polynomial_agrees_across_the_tope(self, point):
        q = query("C", 2, "2,1,1,1", mode="tope_polynomial", sample=(F(1, 15), F(1, 30)))
        polynomial = bernoulli_eval(q)
        v1, v2 = polynomial.gens
        at_point = polynomial.as_expr().subs(
            {v1: sympy.Rational(point[0].numerator, point[0].denominator),
             v2: sympy.Rational(point[1].numerator, point[1].denominator)}
        )
        assert F(str(at_point)) == bernoulli_eval(query("C", 2, "2,1,1,1", point))

    def test_limit_into_a_tope_from_its_corner(self):
        q = query("C", 2, "2,1,1,1", (F(0), F(0)), mode="limit", direction=(F(2), F(1)))
        assert bernoulli_eval(q) == 0


class TestTypeB:
    @pytest.mark.parametrize(
        "b_exponents, c_exponents, u",
        [
            (
                {"e1-e2": 2, "e1": 1, "e2": 1, "e1+e2": 1},
                {"2e1": 1, "2e2": 2, "e1+e2": 1, "e1-e2": 1},
                (F(1, 15), F(1, 30)),
            ),
            (
                {"e1-e2": 2, "e1": 2, "e2": 2, "e1+e2": 2},
                {"2e1": 2, "2e2": 2, "e1+e2": 2, "e1-e2": 2},
                (F(1, 7), F(1, 11)),
            ),
            (
                {"e1-e2": 1, "e1": 3, "e2": 2, "e1+e2": 1},
                {"2e1": 1, "2e2": 1, "e1+e2": 3, "e1-e2": 2},
                (F(2, 9), F(-1, 13)),
            ),
        ],
    )
    def test_agrees_with_c2_through_isomorphism(self, b_exponents, c_exponents, u):
        # (x, y) -> (x + y, x - y) carries the C_2 coroots and lattice onto those of B_2
        v = ((u[0] + u[1]) / 2, (u[0] - u[1]) / 2)
        b_value = bernoulli_eval(query("B", 2, b_exponents, u))
        c_value = bernoulli_eval(query("C", 2, c_exponents, v))
        assert b_value == c_value

    def test_coset_formula_value(self):
        exponents = {"e1-e2": 2, "e2": 1, "e1+e2": 1, "e1": 1}
        value = bernoulli_eval(query("B", 2, exponents, (F(1, 15), F(1, 30))))
        assert value == F(69143, 1152000000)

    def test_plan_has_one_term_per_coset(self):
        spec = RootSystemSpec(family="B", rank=3)
        terms = plan_terms(spec, "coroot-B", uniform_exponents(spec, 1))
        assert len(terms) == 4
        assert {term.scale for term in terms} == {F(1, 2)}


class TestTypeD:
    @pytest.mark.parametrize(
        "s_minus, s_plus, v",
        [(2, 3, (F(1, 3), F(1, 7))), (1, 1, (F(2, 5), F(-1, 9))), (4, 2, (F(1, 11), F(3, 4)))],
    )
    def test_d2_factors_into_rank_one_series(self, s_minus, s_plus, v):
        x, y = (v[0] - v[1]) / 2, (v[0] + v[1]) / 2
        expected = (
            bernoulli_value(s_minus, frac(x))
            * bernoulli_value(s_plus, frac(y))
            / (factorial(s_minus) * factorial(s_plus))
        )
        value = bernoulli_eval(query("D", 2, {"e1-e2": s_minus, "e1+e2": s_plus}, v))
        assert value == expected

    def test_d3_matches_a3_at_zero(self):
        d_value = bernoulli_eval(query("D", 3, 2, (F(0),) * 3, mode="limit"))
        a_value = bernoulli_eval(query("A", 3, 2, (F(0),) * 4, mode="limit"))
        assert d_value == a_value


class TestModes:
    @pytest.mark.parametrize(
        "family, rank, exponents",
        [
            ("A", 2, 1),
            ("C", 2, "2,1,1,1"),
            pytest.param("A", 3, 1, marks=pytest.mark.slow),
            pytest.param("C", 3, 1, marks=pytest.mark.slow),
        ],
    )
    def test_value_step_and_tope_agree(self, family, rank, exponents):
        step = bernoulli_eval(query(family, rank, exponents, mode="step_polynomial"))
        for point in regular_points(family, rank, 50, seed=13):
            value = bernoulli_eval(query(family, rank, exponents, point))
            tope = bernoulli_eval(
                query(family, rank, exponents, mode="tope_polynomial", sample=point)
            )
            assert step.evaluate(point) == value
            assert evaluate_poly(tope, point) == value

    @pytest.mark.parametrize(
        "family, rank, exponents", [("A", 2, 2), ("C", 2, "2,3,4,5"), ("B", 2, 1)]
    )
    def test_tope_degree_is_bounded_by_total_exponent(self, family, rank, exponents):
        (point,) = regular_points(family, rank, 1, seed=14)
        q = query(family, rank, exponents, mode="tope_polynomial", sample=point)
        assert bernoulli_eval(q).total_degree() <= q.exponents.total


class TestSymmetries:
    @pytest.mark.parametrize(
        "family, rank, lattice, exponents",
        [
            ("A", 2, "coroot-A", 1),
            ("A", 2, "coweight-A", 1),
            ("B", 2, "coroot-B", 1),
            ("C", 2, "coroot-C", "2,1,1,1"),
            ("D", 3, "coroot-D", 1),
        ],
    )
    def test_lattice_periodicity(self, family, rank, lattice, exponents):
        rng = np.random.default_rng(15)
        basis = lattice_basis(RootSystemSpec(family=family, rank=rank), lattice)
        for point in regular_points(family, rank, 3, seed=16, lattice=lattice):
            steps = [int(n) for n in rng.integers(-3, 4, size=len(basis))]
            shift = tuple(sum(n * b[i] for n, b in zip(steps, basis)) for i in range(len(point)))
            moved = tuple(x + y for x, y in zip(point, shift))
            value = bernoulli_eval(query(family, rank, exponents, point, lattice=lattice))
            assert bernoulli_eval(query(family, rank, exponents, moved, lattice=lattice)) == value

    @pytest.mark.parametrize("family, rank", [("A", 2), ("C", 2)])
    def test_weyl_equivariance(self, family, rank):
        m = 2
        spec = RootSystemSpec(family=family, rank=rank)
        for point in regular_points(family, rank, 3, seed=17):
            value = bernoulli_eval(query(family, rank, m, point))
            for element in weyl_group(spec):
                sign = (-1) ** (m * inversion_count(spec, element))
                moved = element.apply(point)
                assert bernoulli_eval(query(family, rank, m, moved)) == sign * value


class TestStepPolynomial:
    def test_rank_one(self):
        polynomial = bernoulli_eval(query("A", 1, 2, mode="step_polynomial"))
        for t in (F(1, 3), F(-2, 9), F(7, 4)):
            assert polynomial.evaluate((t, -t)) == -bernoulli_value(2, frac(t)) / 2

    def test_json_document(self):
        polynomial = bernoulli_eval(query("C", 2, "2,1,1,1", mode="step_polynomial"))
        document = polynomial.to_json()
        assert document["terms"]
        assert StepPolynomial.from_json(document) == polynomial
        assert polynomial.size == len(document["terms"])


class TestDefaultDirection:
    @pytest.mark.parametrize(
        "family, rank, lattice",
        [("A", 3, "coroot-A"), ("A", 2, "coweight-A"), ("B", 3, "coroot-B"), ("D", 4, "coroot-D")],
    )
    def test_is_generic(self, family, rank, lattice):
        spec = RootSystemSpec(family=family, rank=rank)
        delta = default_direction(spec, lattice)
        coords = to_lattice_coords(spec, lattice, delta)
        for normal, _ in wall_normals(spec, lattice):
            assert sum(n * y for n, y in zip(normal, coords)) != 0
        if family == "A":
            assert sum(delta) == 0
