import functools
import math
import operator
from abc import ABC, abstractproperty
from enum import Enum
from typing import Optional


class Status(Enum):
    SUCCESS = 1
    FAILURE = 2
    INCONCLUSIVE = 3

    @property
    def icon(self) -> str:
        if self == Status.SUCCESS:
            return ":white_check_mark:"
        elif self == Status.INCONCLUSIVE:
            return ":yellow_circle:"
        else:
            return ":red_circle:"

    @property
    def style(self) -> str:
        if self == Status.SUCCESS:
            return "bold green"
        elif self == Status.INCONCLUSIVE:
            return "bold yellow"
        return "bold red"


class PaperCheck(ABC):
    def __init__(self, group: str = "", suffix: Optional[str] = None):
        self.group = group
        self.suffix = suffix

    @abstractproperty
    def is_valid(self) -> bool:
        raise NotImplementedError()

    @abstractproperty
    def is_applicable(self) -> bool:
        raise NotImplementedError()

    @abstractproperty
    def label(self) -> str:
        raise NotImplementedError()

    @abstractproperty
    def name(self) -> str:
        raise NotImplementedError()

    @property
    def status(self) -> Status:
        if not self.is_applicable:
            return Status.INCONCLUSIVE
        elif self.is_valid:
            return Status.SUCCESS
        else:
            return Status.FAILURE

    def __str__(self) -> str:
        return self.name + (" " + self.suffix if self.suffix is not None else "")

    def to_dict(self) -> dict:
        return {
            "group": self.group,
            "name": str(self),
            "status": self.status.name,
            "label": self.label if self.is_applicable else "not applicable",
        }


class ScoreThresholdCheck(PaperCheck):
    def __init__(self, threshold: float, op, **kwargs):
        self.threshold = threshold
        self.op = op
        super().__init__(**kwargs)

    @abstractproperty
    def score(self) -> float:
        raise NotImplementedError()

    @property
    def is_applicable(self) -> bool:
        return self.score is not None and math.isfinite(self.score)

    @functools.cached_property
    def is_valid(self) -> bool:
        if not self.is_applicable:
            raise RuntimeError(f"{self} not applicable, cannot check if valid")
        return self.op(self.score, self.threshold)

    @property
    def label(self) -> str:
        v = "" if self.is_valid else "! "
        return f"{v}{self.score:.6g} {self._op_label()} {self.threshold:g}"

    def _op_label(self) -> str:
        if self.op is operator.lt:
            return "<"
        elif self.op is operator.le:
            return "<="
        elif self.op is operator.gt:
            return ">"
        elif self.op is operator.ge:
            return ">="

        return f"{self.op}"


class ToleranceCheck(ScoreThresholdCheck):
    """|value - expected| <= tolerance"""

    def __init__(self, name: str, value: Optional[float], expected: float, tolerance: float, **kwargs):
        self._name = name
        self.value = value
        self.expected = expected
        super().__init__(threshold=tolerance, op=operator.le, **kwargs)

    @property
    def score(self) -> Optional[float]:
        if self.value is None:
            return None
        return abs(self.value - self.expected)

    @property
    def label(self) -> str:
        v = "" if self.is_valid else "! "
        return (
            f"{v}{self.value:.6g} vs. {self.expected:.6g}: "
            f"|diff| = {self.score:.3g} {self._op_label()} {self.threshold:g}"
        )

    @property
    def name(self) -> str:
        return self._name

    def to_dict(self) -> dict:
        d = super().to_dict()
        d.update({"value": self.value, "expected": self.expected, "tolerance": self.threshold})
        return d


class PredicateCheck(PaperCheck):
    """A qualitative claim that either holds or does not."""

    def __init__(self, name: str, ok: Optional[bool], description: str, **kwargs):
        self._name = name
        self.ok = ok
        self.description = description
        super().__init__(**kwargs)

    @property
    def is_applicable(self) -> bool:
        return self.ok is not None

    @property
    def is_valid(self) -> bool:
        return bool(self.ok)

    @property
    def label(self) -> str:
        return self.description if self.ok else f"! not: {self.description}"

    @property
    def name(self) -> str:
        return self._name
