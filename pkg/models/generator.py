from dataclasses import dataclass, field
from typing import Optional, Tuple

from models.map_expr import format_number
from utils.errors import InvariantViolation
from utils.precision import json_real

GENERATOR_KINDS = ("A", "B", "a", "b", "hConj")


@dataclass(frozen=True)
class GeneratorSpec:
    """
    A named generator: A(t), B(i,s), a(t), b(i,s) or hConj(inner).

    Use the class constructors rather than filling the fields by hand.
    """
    kind: str
    t: Optional[object] = None
    i: Optional[object] = None
    s: Optional[object] = None
    inner: Optional["GeneratorSpec"] = None

    def __post_init__(self):
        if self.kind not in GENERATOR_KINDS:
            raise InvariantViolation(f"unknown generator kind {self.kind!r}")
        if self.kind in ("A", "a") and not (self.t is not None and self.t > 0):
            raise InvariantViolation("t must be > 0")
        if self.kind in ("B", "b"):
            if self.i is None or not self.i >= 1:
                raise InvariantViolation("i must be ≥ 1")
            if self.s is None:
                raise InvariantViolation("s is required")
        if self.kind == "hConj" and self.inner is None:
            raise InvariantViolation("hConj needs an inner generator")

    @classmethod
    def A(cls, t):
        return cls("A", t=t)

    @classmethod
    def B(cls, i, s):
        return cls("B", i=i, s=s)

    @classmethod
    def a(cls, t):
        return cls("a", t=t)

    @classmethod
    def b(cls, i, s):
        return cls("b", i=i, s=s)

    @classmethod
    def h_conj(cls, inner):
        return cls("hConj", inner=inner)

    def to_text(self):
        if self.kind in ("A", "a"):
            return f"{self.kind}({format_number(self.t)})"
        if self.kind in ("B", "b"):
            return f"{self.kind}({format_number(self.i)},{format_number(self.s)})"
        return f"hConj({self.inner.to_text()})"

    def __str__(self):
        return self.to_text()


@dataclass(frozen=True)
class WordSpec:
    """Letters (generator, exponent), outermost first."""
    letters: Tuple[Tuple[GeneratorSpec, int], ...]

    def __post_init__(self):
        letters = tuple((gen, int(n)) for gen, n in self.letters)
        if not letters:
            raise InvariantViolation("a word needs at least one letter")
        for gen, n in letters:
            if n == 0:
                raise InvariantViolation("word exponents must be nonzero")
        object.__setattr__(self, "letters", letters)

    def to_text(self):
        return " * ".join(
            gen.to_text() if n == 1 else f"{gen.to_text()}^{n}" for gen, n in self.letters
        )


@dataclass(frozen=True)
class RelationReport:
    relation: str
    params: Tuple[Tuple[str, object], ...]
    measured_sup: float
    stated_bound: object  # float, or "exact"
    passed: bool

    def to_dict(self):
        return {
            "relation": self.relation,
            "params": {key: float(value) for key, value in self.params},
            "measuredSup": json_real(self.measured_sup),
            "paperBound": self.stated_bound if self.stated_bound == "exact" else float(self.stated_bound),
            "pass": self.passed,
        }


@dataclass(frozen=True)
class IndependenceResult:
    verdict: str  # "Trivial" or "NontrivialExponent"
    exponent: Optional[float]
    bound: float
    sup_displacement: float
    expected_exponent: Optional[float]
    collected: Tuple[Tuple[object, object], ...] = ()
    fit: dict = field(default_factory=dict, compare=False)

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "exponent": self.exponent,
            "expectedExponent": self.expected_exponent,
            "bound": self.bound,
            "supDisplacement": json_real(self.sup_displacement),
            "collected": {format_number(i): float(c) for i, c in self.collected},
            "fit": self.fit,
        }


@dataclass(frozen=True)
class DiffzEscape:
    escaped: bool
    vacuous: bool
    x_star: Optional[float] = None
    constant: Optional[float] = None
    witness_growth: Tuple[float, ...] = ()
    max_relative_error: Optional[float] = None

    def to_dict(self):
        return {
            "escaped": self.escaped,
            "vacuous": self.vacuous,
            "xStar": self.x_star,
            "growthConstant": self.constant,
            "witnessGrowth": list(self.witness_growth),
            "maxRelativeError": self.max_relative_error,
        }
