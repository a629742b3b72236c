"""Serializable records of inequality checks."""

import json
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

__all__ = ["Assertion", "ExperimentReport", "to_jsonable", "VERSION"]

VERSION = "0.1.0"


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.floating,)):
        obj = float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    return obj


@dataclass
class Assertion:
    """``lhs <= rhs + tolerance``; ``margin = rhs - lhs``."""

    name: str
    lhs: float
    rhs: float
    tolerance: float
    recorded_only: bool = False

    @property
    def margin(self):
        return self.rhs - self.lhs

    @property
    def passed(self):
        return bool(self.lhs <= self.rhs + self.tolerance)

    def to_dict(self):
        d = asdict(self)
        d.update(margin=self.margin, passed=self.passed)
        return d


@dataclass
class ExperimentReport:
    experiment: str
    inputs: dict = field(default_factory=dict)
    quantities: dict = field(default_factory=dict)
    assertions: list = field(default_factory=list)
    wall_time: float = 0.0
    version: str = VERSION
    _t0: float = field(default_factory=time.perf_counter, repr=False)

    def check(self, name, lhs, rhs, tolerance=0.0, *, recorded_only=False):
        a = Assertion(name, float(lhs), float(rhs), float(tolerance), recorded_only)
        self.assertions.append(a)
        return a

    def finish(self):
        self.wall_time = time.perf_counter() - self._t0
        return self

    @property
    def passed(self):
        return all(a.passed for a in self.assertions if not a.recorded_only)

    def __getitem__(self, name):
        for a in self.assertions:
            if a.name == name:
                return a
        raise KeyError(name)

    def to_dict(self):
        return to_jsonable(
            dict(
                experiment=self.experiment,
                inputs=self.inputs,
                quantities=self.quantities,
                assertions=[a.to_dict() for a in self.assertions],
                passed=self.passed,
                wall_time=self.wall_time,
                version=self.version,
            )
        )

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)
