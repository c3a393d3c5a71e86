"""Support-size schedules ``k -> f(k)`` for the adaptive thresholding solvers.

A schedule is an immutable value.  ``sched(k)`` returns the number of
indices kept at iteration ``k >= 1``, clipped to the schedule's cap.
Config strings accepted by :func:`parse_schedule`::

    const:7        f(k) = 7
    lin:2          f(k) = 2k
    quad           f(k) = k^2
    custom:1,4,9   f(k) = table[k-1], last entry repeated
"""
from dataclasses import dataclass, replace

__all__ = [
    "Schedule",
    "constant",
    "linear",
    "quadratic",
    "custom",
    "parse_schedule",
]

_KINDS = ("const", "lin", "quad", "custom")


@dataclass(frozen=True)
class Schedule:
    kind: str
    param: int | tuple = None
    cap: int | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.kind in ("const", "lin"):
            if not isinstance(self.param, int) or self.param < 1:
                raise ValueError(f"{self.kind} schedule needs a positive integer, got {self.param!r}")
        if self.kind == "custom":
            table = tuple(int(v) for v in self.param)
            if not table or min(table) < 1:
                raise ValueError("custom schedule needs a non-empty table of positive sizes")
            object.__setattr__(self, "param", table)
        if self.cap is not None and self.cap < 1:
            raise ValueError(f"cap must be >= 1, got {self.cap}")

    def raw(self, k):
        if k < 1:
            raise ValueError(f"iteration counter starts at 1, got {k}")
        if self.kind == "const":
            return self.param
        if self.kind == "lin":
            return self.param * k
        if self.kind == "quad":
            return k * k
        return self.param[min(k, len(self.param)) - 1]

    def __call__(self, k):
        size = self.raw(k)
        return size if self.cap is None else min(size, self.cap)

    def with_cap(self, cap):
        """Copy with the cap tightened to ``min(self.cap, cap)``."""
        if self.cap is not None:
            cap = min(cap, self.cap)
        return replace(self, cap=cap)

    def __str__(self):
        if self.kind == "quad":
            body = "quad"
        elif self.kind == "custom":
            body = "custom:" + ",".join(map(str, self.param))
        else:
            body = f"{self.kind}:{self.param}"
        return body


def constant(s, cap=None):
    return Schedule("const", int(s), cap)


def linear(c, cap=None):
    return Schedule("lin", int(c), cap)


def quadratic(cap=None):
    return Schedule("quad", None, cap)


def custom(table, cap=None):
    return Schedule("custom", tuple(table), cap)


def parse_schedule(text):
    """Parse a CLI/config schedule string such as ``"lin:6"``."""
    text = text.strip().lower()
    head, _, arg = text.partition(":")
    try:
        if head == "quad" and not arg:
            return quadratic()
        if head == "const":
            return constant(int(arg))
        if head == "lin":
            return linear(int(arg))
        if head == "custom":
            return custom(int(v) for v in arg.split(","))
    except ValueError as exc:
        raise ValueError(f"bad schedule {text!r}: {exc}") from None
    raise ValueError(f"bad schedule {text!r}; expected const:s, lin:c, quad or custom:a,b,...")
