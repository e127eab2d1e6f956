from fractions import Fraction as F

import mpmath
import pytest
from pydantic import ValidationError

from errors import OracleNotApplicable
from oracle import OracleConfig, certify, check_convergence, compare, direct_sum
from rootsys import RootSystemSpec, exponent_map, uniform_exponents
from szenes import BernoulliQuery


def system(family, rank):
    return RootSystemSpec(family=family, rank=rank)


def value_query(family, rank, exponent, point, lattice=None):
    spec = system(family, rank)
    return BernoulliQuery(
        system=spec,
        lattice=lattice or f"coroot-{spec.family}",
        exponents=uniform_exponents(spec, exponent),
        point=point,
    )


class TestConfig:
    def test_defaults_come_from_environment_config(self):
        cfg = OracleConfig()
        assert cfg.radius >= 10
        assert cfg.precision >= 53

    @pytest.mark.parametrize(
        "field, value", [("radius", 5), ("precision", 32), ("chunk_rows", 0)]
    )
    def test_invalid(self, field, value):
        with pytest.raises(ValidationError):
            OracleConfig(**{field: value})


class TestConvergence:
    def test_weak_hyperplanes_are_refused(self):
        with pytest.raises(OracleNotApplicable):
            check_convergence(system("A", 2), uniform_exponents(system("A", 2), 1))

    def test_single_weak_hyperplane(self):
        spec = system("C", 2)
        exponents = exponent_map(spec, {"2e1": 2, "2e2": 1, "e1+e2": 2, "e1-e2": 2})
        with pytest.raises(OracleNotApplicable):
            check_convergence(spec, exponents)

    def test_convergent(self):
        check_convergence(system("B", 2), uniform_exponents(system("B", 2), 2))


class TestDirectSum:
    @pytest.mark.parametrize("symmetrize", [True, False])
    def test_rank_one(self, symmetrize):
        spec = system("A", 1)
        cfg = OracleConfig(radius=10000, pair_symmetrize=symmetrize)
        value, tail = direct_sum(
            spec, "coroot-A", uniform_exponents(spec, 2), (F(1, 3), F(-1, 3)), cfg
        )
        assert abs(value - mpmath.mpf(1) / 36) < 1e-4
        assert tail > 0

    def test_chunking_does_not_change_the_sum(self):
        spec = system("C", 2)
        exponents = uniform_exponents(spec, 2)
        point = (F(1, 5), F(1, 7))
        one, _ = direct_sum(spec, "coroot-C", exponents, point, OracleConfig(radius=40))
        many, _ = direct_sum(
            spec, "coroot-C", exponents, point, OracleConfig(radius=40, chunk_rows=81)
        )
        assert abs(one - many) < 1e-15


class TestCompare:
    def test_relative(self):
        assert compare(F(1, 3), mpmath.mpf(1) / 3, 1e-10).passed
        report = compare(F(1, 3), mpmath.mpf("0.34"), 1e-3)
        assert not report.passed
        assert report.relative_error > 1e-3

    def test_absolute_floor(self):
        report = compare(F(0), mpmath.mpf("1e-50"), 1e-5)
        assert report.passed
        assert report.relative_error is None


class TestCertify:
    @pytest.mark.parametrize(
        "family, rank, point, lattice, radius",
        [
            ("A", 1, (F(1, 3), F(-1, 3)), None, 10000),
            ("A", 2, (F(1, 5), F(1, 7), F(-12, 35)), None, 200),
            ("A", 2, (F(1, 5), F(1, 7), F(-12, 35)), "coweight-A", 150),
            ("B", 2, (F(1, 5), F(1, 7)), None, 200),
            ("C", 2, (F(1, 5), F(1, 7)), None, 200),
            ("D", 2, (F(1, 3), F(1, 7)), None, 400),
        ],
    )
    def test_engine_agrees_with_direct_sum(self, family, rank, point, lattice, radius):
        report = certify(
            value_query(family, rank, 2, point, lattice), OracleConfig(radius=radius), rel_tol=1e-3
        )
        assert report.passed, report.message
        assert report.tail_bound is not None

    @pytest.mark.slow
    def test_a3(self):
        point = (F(1, 5), F(1, 7), F(1, 11), F(-1, 5) - F(1, 7) - F(1, 11))
        report = certify(value_query("A", 3, 2, point), OracleConfig(radius=40), rel_tol=1e-2)
        assert report.passed, report.message

    def test_disagreement_is_reported(self):
        query = value_query("A", 1, 2, (F(1, 3), F(-1, 3)))
        report = certify(query, OracleConfig(radius=10), rel_tol=1e-12)
        assert not report.passed
        assert "exceeds" in report.message
