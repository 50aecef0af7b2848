"""Structured pass/fail evidence shared by the verification suites.

A failed certification is a result, not an exception: the artifact's job is
to report falsifications with enough detail to locate them.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class CheckResult:
    check_id: str
    passed: bool
    expected: object = None
    got: object = None
    context: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {
            "id": self.check_id,
            "status": "pass" if self.passed else "fail",
        }
        if self.expected is not None:
            out["expected"] = _plain(self.expected)
        if self.got is not None:
            out["got"] = _plain(self.got)
        if self.context:
            out["context"] = {k: _plain(v) for k, v in sorted(self.context.items())}
        return out

    def __bool__(self) -> bool:
        return self.passed


def _plain(value):
    from fractions import Fraction

    if isinstance(value, Fraction):
        return {"num": str(value.numerator), "den": str(value.denominator)}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    return value


def all_passed(results) -> bool:
    return all(r.passed for r in results)
