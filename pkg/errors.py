"""Exceptions raised by the Bernoulli series pipelines"""

from typing import Any, Optional, Sequence


class BernoulliSeriesError(Exception):
    """Base class for every domain error; the CLI maps these to exit code 2."""

    kind = "domain_error"


class NonRegularPoint(BernoulliSeriesError):
    """The evaluation point lies on an affine wall of the arrangement."""

    kind = "non_regular_point"

    def __init__(self, point: Sequence[Any], normal: Sequence[int], pairing: Any) -> None:
        self.point = tuple(point)
        self.normal = tuple(normal)
        self.pairing = pairing
        super().__init__(
            f"point {_render(point)} is not regular: wall normal {list(self.normal)} "
            f"pairs to the integer {pairing}"
        )


class GenericityFailure(BernoulliSeriesError):
    """A limit direction has a vanishing pairing where a sign is needed."""

    kind = "genericity_failure"

    def __init__(self, message: str, pairing: Optional[Any] = None) -> None:
        self.pairing = pairing
        super().__init__(message)


class OracleNotApplicable(BernoulliSeriesError):
    kind = "oracle_not_applicable"


class ResidueTruncationError(BernoulliSeriesError):
    """A numerator was truncated below the degree the residue needs."""

    kind = "residue_truncation"


class UnsupportedFamily(BernoulliSeriesError):
    kind = "unsupported_family"


class InvalidExponents(BernoulliSeriesError):
    kind = "invalid_exponents"


class InvalidMarking(BernoulliSeriesError):
    kind = "invalid_marking"


def _render(point: Sequence[Any]) -> str:
    return "(" + ", ".join(str(x) for x in point) + ")"
