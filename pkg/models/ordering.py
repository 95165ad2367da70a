from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

from utils.precision import json_real


class Order(Enum):
    LESS = "Less"
    GREATER = "Greater"
    EQUIVALENT = "Equivalent"
    UNRESOLVED = "Unresolved"


@dataclass(frozen=True)
class OrderVerdict:
    kind: Order
    sup_difference: Optional[float] = None
    fit_slope: Optional[float] = None
    evidence: Tuple = field(default=(), compare=False)

    def to_dict(self):
        data = {
            "verdict": self.kind.value,
            "supDifference": json_real(self.sup_difference) if self.sup_difference is not None else None,
            "fitSlope": self.fit_slope,
        }
        if self.evidence:
            data["evidence"] = [json_real(v) for v in self.evidence]
        return data


@dataclass(frozen=True)
class WitnessSequence:
    """Grid points along which |f(x) - x| strictly increases."""
    points: Tuple
    displacements: Tuple

    @property
    def signs(self):
        return tuple(1 if d > 0 else -1 for d in self.displacements)

    @property
    def last_point(self):
        return self.points[-1]

    def to_dict(self):
        return {
            "points": [json_real(x) for x in self.points],
            "displacements": [json_real(d) for d in self.displacements],
            "signs": list(self.signs),
        }


@dataclass(frozen=True)
class Stage:
    """One round of the sign assignment: who was still unsigned, whose witness was used."""
    survivors: Tuple[int, ...]
    chosen: int
    witness: WitnessSequence
    bound_used: float
    assigned: Tuple[Tuple[int, int], ...]

    def to_dict(self):
        return {
            "survivors": list(self.survivors),
            "chosen": self.chosen,
            "witness": self.witness.to_dict(),
            "boundUsed": json_real(self.bound_used),
            "assigned": {str(k): eps for k, eps in self.assigned},
        }


@dataclass(frozen=True)
class SignAssignment:
    epsilons: Tuple[int, ...]
    stages: Tuple[Stage, ...]

    def stage_of(self, indices):
        """Deepest stage whose survivor set contains all ``indices``."""
        deepest = 0
        for t, stage in enumerate(self.stages):
            if set(indices) <= set(stage.survivors):
                deepest = t
        return deepest

    def to_dict(self):
        return {
            "epsilons": list(self.epsilons),
            "stages": [stage.to_dict() for stage in self.stages],
        }


@dataclass(frozen=True)
class WordCheck:
    all_positive: bool
    worst_word: Tuple[int, ...]
    worst_value: float
    words_checked: int

    def to_dict(self):
        return {
            "allPositive": self.all_positive,
            "worstWord": list(self.worst_word),
            "worstValue": json_real(self.worst_value),
            "wordsChecked": self.words_checked,
        }
