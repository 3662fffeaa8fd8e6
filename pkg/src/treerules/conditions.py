"""Atomic threshold predicates over single features.

A condition is either ``x_j <= t`` (:data:`LE`) or ``x_j > t`` (:data:`GT`).
Conditions are plain tuples so they hash fast, compare bit-exactly on the
threshold, and sort into the canonical order (feature, LE before GT,
threshold) used everywhere for rule identity.
"""

from typing import NamedTuple

LE = 0
GT = 1

_OP_TEXT = {LE: "<=", GT: ">"}
_OP_NAME = {"<=": LE, "le": LE, ">": GT, "gt": GT}


class Condition(NamedTuple):
    feature: int
    op: int
    threshold: float

    def test(self, value: float) -> bool:
        if self.op == LE:
            return value <= self.threshold
        return value > self.threshold

    def complement(self) -> "Condition":
        return Condition(self.feature, GT if self.op == LE else LE, self.threshold)

    def describe(self, feature_names=None) -> str:
        name = feature_names[self.feature] if feature_names else f"x{self.feature}"
        return f"{name} {_OP_TEXT[self.op]} {self.threshold:g}"

    def to_json(self) -> dict:
        return {"feature": self.feature, "op": _OP_TEXT[self.op], "threshold": self.threshold}

    @classmethod
    def from_json(cls, obj: dict) -> "Condition":
        return cls(int(obj["feature"]), _OP_NAME[obj["op"]], float(obj["threshold"]))
