"""Time-dependent exponent schedules alpha(t) mapping into (0, 1].

Six parametric families are provided.  Evaluation clamps into
[ALPHA_MIN, 1] so that schedules touching 0 (the exponential ramp at t=0,
splines overshooting between knots) stay inside the admissible range of the
fractional power.  Clamp events can be counted per integration run through
ClampCountingSchedule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ScheduleError

__all__ = [
    "ALPHA_MIN",
    "AlphaSchedule",
    "ConstantSchedule",
    "SineSchedule",
    "ExpSaturatingSchedule",
    "SawtoothSchedule",
    "TriangularSchedule",
    "SplineSchedule",
    "ClampCountingSchedule",
    "evaluate_schedule",
    "parse_schedule",
    "render_schedule",
]

ALPHA_MIN = 1e-6


class AlphaSchedule:
    """Base class: subclasses implement ``raw``; calls are clamped."""

    def raw(self, t: float) -> float:
        raise NotImplementedError

    def __call__(self, t: float) -> float:
        return min(1.0, max(ALPHA_MIN, self.raw(t)))

    def breakpoints(self, t0: float, t1: float) -> tuple[float, ...]:
        """Non-smooth points strictly inside (t0, t1), for quadrature."""
        return ()

    @property
    def period(self) -> float | None:
        return None


def evaluate_schedule(schedule: AlphaSchedule, t: float) -> float:
    """Clamped evaluation of a schedule at time t >= 0."""
    if t < 0:
        raise ValueError(f"schedules are defined for t >= 0, got {t}")
    return schedule(t)


@dataclass(frozen=True)
class ConstantSchedule(AlphaSchedule):
    value: float

    def __post_init__(self):
        if not 0.0 < self.value <= 1.0:
            raise ScheduleError(f"constant alpha must lie in (0, 1], got {self.value}")

    def raw(self, t):
        return self.value


@dataclass(frozen=True)
class SineSchedule(AlphaSchedule):
    """base + amplitude * sin(angular_frequency * t)."""

    base: float
    amplitude: float
    angular_frequency: float

    def __post_init__(self):
        if self.amplitude < 0:
            raise ScheduleError("sine amplitude must be >= 0")
        if self.angular_frequency <= 0:
            raise ScheduleError("sine angular frequency must be > 0")
        if self.base + self.amplitude > 1.0 + 1e-12:
            raise ScheduleError(
                f"sine range exceeds 1: base+amp = {self.base + self.amplitude}")
        if self.base - self.amplitude < 0.0:
            raise ScheduleError(
                f"sine range dips below 0: base-amp = {self.base - self.amplitude}")

    def raw(self, t):
        return self.base + self.amplitude * math.sin(self.angular_frequency * t)

    def breakpoints(self, t0, t1):
        # Quarter-period pieces are monotone, which defeats the aliasing a
        # dyadic-period sine produces on bisection-based quadrature grids.
        return _periodic_interior_points(self.period / 4.0, t0, t1)

    @property
    def period(self):
        return 2.0 * math.pi / self.angular_frequency


@dataclass(frozen=True)
class ExpSaturatingSchedule(AlphaSchedule):
    """1 - exp(-rate * t): starts at 0 (clamped) and saturates at 1."""

    rate: float

    def __post_init__(self):
        if self.rate <= 0:
            raise ScheduleError("saturation rate must be > 0")

    def raw(self, t):
        return 1.0 - math.exp(-self.rate * t)


def _periodic_interior_points(step: float, t0: float, t1: float):
    first = math.floor(t0 / step) + 1
    last = math.ceil(t1 / step) - 1
    return tuple(k * step for k in range(first, last + 1)
                 if t0 < k * step < t1)


@dataclass(frozen=True)
class SawtoothSchedule(AlphaSchedule):
    """Periodic linear ramp lo -> hi with a jump back to lo at each period."""

    lo: float
    hi: float
    period_: float

    def __post_init__(self):
        _check_band(self.lo, self.hi, self.period_, "sawtooth")

    def raw(self, t):
        phase = t / self.period_ - math.floor(t / self.period_)
        return self.lo + (self.hi - self.lo) * phase

    def breakpoints(self, t0, t1):
        return _periodic_interior_points(self.period_, t0, t1)

    @property
    def period(self):
        return self.period_


@dataclass(frozen=True)
class TriangularSchedule(AlphaSchedule):
    """Continuous up-down ramp between lo and hi with the given period."""

    lo: float
    hi: float
    period_: float

    def __post_init__(self):
        _check_band(self.lo, self.hi, self.period_, "triangular")

    def raw(self, t):
        phase = t / self.period_ - math.floor(t / self.period_)
        frac = 2.0 * phase if phase <= 0.5 else 2.0 * (1.0 - phase)
        return self.lo + (self.hi - self.lo) * frac

    def breakpoints(self, t0, t1):
        return _periodic_interior_points(self.period_ / 2.0, t0, t1)

    @property
    def period(self):
        return self.period_


def _check_band(lo, hi, period, name):
    if not 0.0 < lo <= hi <= 1.0:
        raise ScheduleError(f"{name} needs 0 < lo <= hi <= 1, got ({lo}, {hi})")
    if period <= 0:
        raise ScheduleError(f"{name} period must be > 0")


@dataclass(frozen=True)
class SplineSchedule(AlphaSchedule):
    """Not-a-knot cubic through the given knots, clamped into (0, 1]."""

    knot_times: tuple[float, ...]
    knot_values: tuple[float, ...]

    def __post_init__(self):
        if len(self.knot_times) != len(self.knot_values):
            raise ScheduleError("spline needs matching knot times and values")
        if len(self.knot_times) < 2:
            raise ScheduleError("spline needs at least two knots")
        times = np.asarray(self.knot_times, dtype=float)
        if np.any(np.diff(times) <= 0):
            raise ScheduleError("spline knot times must be strictly increasing")
        for t, v in zip(self.knot_times, self.knot_values):
            if not 0.0 < v <= 1.0:
                raise ScheduleError(
                    f"spline knot value {v} at t={t} outside (0, 1]")

    @cached_property
    def _spline(self) -> CubicSpline:
        return CubicSpline(self.knot_times, self.knot_values,
                           bc_type="not-a-knot")

    def raw(self, t):
        return float(self._spline(t))

    def breakpoints(self, t0, t1):
        return tuple(t for t in self.knot_times if t0 < t < t1)


class ClampCountingSchedule:
    """Per-run wrapper that counts clamped evaluations.

    The wrapped schedule stays immutable; each integration run owns one
    counter, which keeps concurrent runs independent.
    """

    def __init__(self, schedule: AlphaSchedule):
        self.schedule = schedule
        self.clamps = 0

    def __call__(self, t: float) -> float:
        raw = self.schedule.raw(t)
        if raw < ALPHA_MIN or raw > 1.0:
            self.clamps += 1
            return min(1.0, max(ALPHA_MIN, raw))
        return raw

    def breakpoints(self, t0, t1):
        return self.schedule.breakpoints(t0, t1)

    @property
    def period(self):
        return self.schedule.period


# ---------------------------------------------------------------------------
# Descriptor grammar
# ---------------------------------------------------------------------------
#   const:<c> | sin:<base>,<amp>,<freq> | expsat:<rate> | saw:<lo>,<hi>,<T>
#   | tri:<lo>,<hi>,<T> | spline:<t0>=<v0>;<t1>=<v1>;...

_PROBE_POINTS = 1000
_MAX_CLAMP_FRACTION = 0.2


def parse_schedule(text: str) -> AlphaSchedule:
    """Parse a schedule descriptor string.

    Parameters are validated per family; the resulting schedule is probed at
    1000 points and rejected if it spends more than 20% of the probe window
    outside (0, 1] (clamping is meant for edge touches, not whole regimes).
    """
    text = text.strip()
    if ":" not in text:
        raise ScheduleError(
            f"bad schedule descriptor {text!r}: expected '<family>:<params>'")
    family, _, body = text.partition(":")
    family = family.strip().lower()
    try:
        schedule = _build_family(family, body)
    except ScheduleError:
        raise
    except ValueError as exc:
        raise ScheduleError(f"bad schedule descriptor {text!r}: {exc}") from exc
    _probe_range(schedule)
    return schedule


def _build_family(family: str, body: str) -> AlphaSchedule:
    if family == "const":
        return ConstantSchedule(float(body))
    if family == "sin":
        base, amp, freq = (float(p) for p in body.split(","))
        return SineSchedule(base, amp, freq)
    if family == "expsat":
        return ExpSaturatingSchedule(float(body))
    if family in ("saw", "tri"):
        lo, hi, period = (float(p) for p in body.split(","))
        cls = SawtoothSchedule if family == "saw" else TriangularSchedule
        return cls(lo, hi, period)
    if family == "spline":
        times, values = [], []
        for piece in body.split(";"):
            if not piece.strip():
                continue
            t_text, _, v_text = piece.partition("=")
            if not v_text:
                raise ScheduleError(
                    f"spline knot {piece!r} must look like '<t>=<v>'")
            times.append(float(t_text))
            values.append(float(v_text))
        return SplineSchedule(tuple(times), tuple(values))
    raise ScheduleError(f"unknown schedule family {family!r}")


def _probe_window(schedule: AlphaSchedule) -> tuple[float, float]:
    if isinstance(schedule, SplineSchedule):
        return schedule.knot_times[0], schedule.knot_times[-1]
    if schedule.period is not None:
        return 0.0, schedule.period
    if isinstance(schedule, ExpSaturatingSchedule):
        return 0.0, 10.0 / schedule.rate
    return 0.0, 1.0


def _probe_range(schedule: AlphaSchedule) -> None:
    lo, hi = _probe_window(schedule)
    if hi <= lo:
        return
    ts = np.linspace(lo, hi, _PROBE_POINTS)
    raws = np.array([schedule.raw(t) for t in ts])
    clamped = np.count_nonzero((raws < ALPHA_MIN) | (raws > 1.0))
    if clamped > _MAX_CLAMP_FRACTION * _PROBE_POINTS:
        raise ScheduleError(
            f"schedule leaves (0, 1] on {clamped} of {_PROBE_POINTS} probe "
            "points; adjust its parameters")


def render_schedule(schedule: AlphaSchedule) -> str:
    """Inverse of parse_schedule; floats use shortest round-trip form."""
    r = repr
    if isinstance(schedule, ConstantSchedule):
        return f"const:{r(schedule.value)}"
    if isinstance(schedule, SineSchedule):
        return (f"sin:{r(schedule.base)},{r(schedule.amplitude)},"
                f"{r(schedule.angular_frequency)}")
    if isinstance(schedule, ExpSaturatingSchedule):
        return f"expsat:{r(schedule.rate)}"
    if isinstance(schedule, SawtoothSchedule):
        return f"saw:{r(schedule.lo)},{r(schedule.hi)},{r(schedule.period_)}"
    if isinstance(schedule, TriangularSchedule):
        return f"tri:{r(schedule.lo)},{r(schedule.hi)},{r(schedule.period_)}"
    if isinstance(schedule, SplineSchedule):
        knots = ";".join(f"{r(t)}={r(v)}" for t, v in
                         zip(schedule.knot_times, schedule.knot_values))
        return f"spline:{knots}"
    raise TypeError(f"cannot render schedule of type {type(schedule).__name__}")
