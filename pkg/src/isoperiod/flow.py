"""Numerical flow machinery: adaptive integration of planar fields, periods
via section return, commutator-flow sections, and level-oval tracing.

Everything here is double precision on top of scipy's embedded Runge-Kutta
5(4) pair with dense output.  Exact fields from :mod:`isoperiod.algebra` are
compiled once into fast float right-hand sides; section crossings are
polished on the dense output by the integrator's event machinery.

The validated region never reaches the outer boundary of a period annulus
(integration stiffens near the polycycle); callers are expected to stay
within the per-system caps exposed by the catalog.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import solve_ivp

from .algebra import PlanarField, compile_field_rhs, compile_rational, wedge
from .catalog import IsochroneSpec

DEFAULT_TOL = 1e-10
DEFAULT_TIME_CAP = 100.0
#: fraction of a leading "blind" leg used so that the departure point itself
#: is never reported as a section crossing
_TRANSVERSALITY_FLOOR = 1e-9

FieldLike = Union[PlanarField, Callable[[float, Sequence[float]], Tuple[float, float]]]


class FlowError(RuntimeError):
    pass


class PoleEncounterError(FlowError):
    """The trajectory ran into a denominator zero of the field."""


class StepUnderflowError(FlowError):
    """The adaptive integrator could not meet the tolerance (stiffness)."""


class NoReturnError(FlowError):
    """No section return was found within the time cap."""


class NonTransversalCrossingError(FlowError):
    """A section crossing was met with (numerically) tangential velocity."""


class BoundaryExitError(FlowError):
    """A transversal-section orbit left the validated region."""


class OpenCurveError(FlowError):
    """A level-curve trace failed to close (level outside the oval range)."""


class GradientDegeneracyError(FlowError):
    """The first-integral gradient vanished along a traced level curve."""


def as_rhs(field: FieldLike) -> Callable:
    if isinstance(field, PlanarField):
        return compile_field_rhs(field)
    return field


@dataclass
class Trajectory:
    """Dense solution of a planar field over one time span."""

    times: np.ndarray
    states: np.ndarray       # shape (n, 2)
    sol: Callable            # dense-output evaluator t -> (2,) array

    def __call__(self, t):
        return self.sol(t)

    def to_csv(self, path: str) -> None:
        data = np.column_stack([self.times, self.states])
        np.savetxt(path, data, delimiter=",", header="t,x,y", comments="")


def integrate(
    field: FieldLike,
    p0: Sequence[float],
    t_span: Tuple[float, float],
    tol: float = DEFAULT_TOL,
    method: str = "RK45",
) -> Trajectory:
    """Adaptive integration with dense output.

    ``tol`` is the relative local-error bound per step; the absolute floor is
    three orders tighter so that small-amplitude orbits are resolved too.
    """
    rhs = as_rhs(field)
    try:
        res = solve_ivp(
            rhs,
            tuple(t_span),
            np.asarray(p0, dtype=float),
            method=method,
            rtol=tol,
            atol=tol * 1e-3,
            dense_output=True,
        )
    except ZeroDivisionError as exc:
        raise PoleEncounterError(f"field pole along trajectory from {p0}") from exc
    if res.status == -1:
        raise StepUnderflowError(res.message)
    return Trajectory(times=res.t, states=res.y.T, sol=res.sol)


def _upward_crossing_event():
    def ev(t, v):
        return v[1]

    ev.direction = 1.0
    ev.terminal = True
    return ev


def period(
    field: FieldLike,
    p0: Sequence[float],
    tol: float = DEFAULT_TOL,
    time_cap: float = DEFAULT_TIME_CAP,
) -> float:
    """Period of the closed orbit through ``p0``.

    Measured as the first-return time to the ray {y = 0, x > 0}, with the
    crossing refined on the dense output.  ``p0`` itself must lie on that
    ray (all section machinery in this package parameterizes orbits by their
    positive x-axis crossing).
    """
    x0, y0 = float(p0[0]), float(p0[1])
    if abs(y0) > 1e-12 or x0 <= 0:
        raise ValueError("period() expects a point on the ray {y = 0, x > 0}")
    rhs = as_rhs(field)

    # blind leg past the departure point so the t = 0 crossing is not seen
    lead = 1.0
    try:
        first = solve_ivp(
            rhs, (0.0, lead), (x0, y0), method="RK45", rtol=tol, atol=tol * 1e-3
        )
        if first.status == -1:
            raise StepUnderflowError(first.message)
        ev = _upward_crossing_event()
        second = solve_ivp(
            rhs,
            (0.0, time_cap - lead),
            first.y[:, -1],
            method="RK45",
            rtol=tol,
            atol=tol * 1e-3,
            events=ev,
            dense_output=False,
        )
    except ZeroDivisionError as exc:
        raise PoleEncounterError(f"field pole along orbit from {p0}") from exc
    if second.status == -1:
        raise StepUnderflowError(second.message)
    if second.status != 1 or len(second.t_events[0]) == 0:
        raise NoReturnError(
            f"orbit from ({x0}, {y0}) did not return within t = {time_cap}"
        )
    t_ev = second.t_events[0][0]
    x_ev, y_ev = second.y_events[0][0]
    if x_ev <= 0:
        raise NoReturnError("first upward crossing occurred at x <= 0")
    dydt = rhs(t_ev, (x_ev, y_ev))[1]
    if abs(dydt) < _TRANSVERSALITY_FLOOR * max(1.0, abs(x_ev)):
        raise NonTransversalCrossingError(
            f"tangential section crossing at x = {x_ev}"
        )
    return lead + float(t_ev)


@dataclass
class SectionParam:
    """Transversal section parameterized by the flow of a second field."""

    s_values: np.ndarray
    points: np.ndarray          # shape (n, 2)
    source: str                 # "commutator-flow" or "x-axis-ray"


def section_points(
    u0: FieldLike,
    q: Sequence[float],
    s_grid: Sequence[float],
    x0_field: Optional[PlanarField] = None,
    tol: float = DEFAULT_TOL,
) -> SectionParam:
    """Points xi(s) of the section traced by the flow of ``u0`` from ``q``.

    When ``x0_field`` is supplied (with ``u0`` a :class:`PlanarField`), the
    transversality of the pair is certified at every returned point.
    """
    s = np.asarray(s_grid, dtype=float)
    if s.ndim != 1 or len(s) == 0:
        raise ValueError("s_grid must be a nonempty 1-d sequence")
    order = np.argsort(s)
    pts = np.empty((len(s), 2))
    rhs = as_rhs(u0)

    def run(span_end, targets, indices):
        if len(targets) == 0:
            return
        try:
            res = solve_ivp(
                rhs,
                (0.0, span_end),
                np.asarray(q, dtype=float),
                method="RK45",
                rtol=tol,
                atol=tol * 1e-3,
                dense_output=True,
            )
        except ZeroDivisionError as exc:
            raise PoleEncounterError("section flow hit a field pole") from exc
        if res.status != 0:
            raise BoundaryExitError(
                f"section flow left the integrable region: {res.message}"
            )
        vals = res.sol(targets)
        pts[indices] = vals.T

    pos = s[order] > 0
    neg = s[order] < 0
    zero = ~pos & ~neg
    pts[order[zero]] = np.asarray(q, dtype=float)
    if pos.any():
        run(float(s[order][pos].max()), s[order][pos], order[pos])
    if neg.any():
        run(float(s[order][neg].min()), s[order][neg], order[neg])

    if x0_field is not None and isinstance(u0, PlanarField):
        w = compile_rational(wedge(x0_field, u0))
        for sx, (px, py) in zip(s, pts):
            wv = w(px, py)
            if not isinstance(wv, float) or abs(wv) < _TRANSVERSALITY_FLOOR:
                raise NonTransversalCrossingError(
                    f"section point at s = {sx} is not transversal (wedge = {wv})"
                )
    return SectionParam(s_values=s, points=pts, source="commutator-flow")


@dataclass
class Oval:
    """Closed level curve of a first integral, traced counterclockwise at
    unit speed and stored with a dense arc-length parameterization."""

    h: float
    spec: IsochroneSpec
    length: float
    points: np.ndarray          # shape (n, 2), uniform in arc length, open
    orientation: int            # +1 counterclockwise, -1 reversed
    _eval: Callable             # sigma -> (2,) point, sigma in [0, length)

    def resample(self, n: int) -> np.ndarray:
        sigma = np.linspace(0.0, self.length, n, endpoint=False)
        if self.orientation < 0:
            sigma = (self.length - sigma) % self.length
        return np.array([self._eval(sg) for sg in sigma])

    def reversed(self) -> "Oval":
        return Oval(
            h=self.h,
            spec=self.spec,
            length=self.length,
            points=self.points[::-1].copy(),
            orientation=-self.orientation,
            _eval=self._eval,
        )

    def to_csv(self, path: str) -> None:
        sigma = np.linspace(0.0, self.length, len(self.points), endpoint=False)
        np.savetxt(
            path,
            np.column_stack([sigma, self.points]),
            delimiter=",",
            header="s,x,y",
            comments="",
        )


def trace_oval(
    h: float,
    spec: IsochroneSpec,
    n_points: int = 512,
    tol: float = 1e-12,
    oval_tol: float = 1e-8,
) -> Oval:
    """Trace the level oval {H = h} of a catalog system.

    Integrates the normalized tangent direction (-dH/dy, dH/dx)/|grad H|
    (unit speed, counterclockwise) from the positive x-axis crossing and
    detects closure with the same upward-crossing event used for periods.
    """
    if spec.first_integral is None:
        raise ValueError(f"{spec.id} has no first integral to trace")
    if not (0.0 < h < spec.h0):
        raise OpenCurveError(
            f"level {h} outside the oval range (0, {spec.h0}) of {spec.id}"
        )
    hx = compile_rational(spec.first_integral.d_dx())
    hy = compile_rational(spec.first_integral.d_dy())

    def rhs(t, v):
        x, y = v
        gx, gy = hx(x, y), hy(x, y)
        if not (isinstance(gx, float) and isinstance(gy, float)):
            raise ZeroDivisionError("first-integral gradient pole")
        nrm = math.hypot(gx, gy)
        if nrm < 1e-14:
            raise GradientDegeneracyError(
                f"grad H = 0 on the level curve h = {h}"
            )
        return (-gy / nrm, gx / nrm)

    x_start = spec.axis_point(h)
    # blind leg strictly shorter than any closed level curve through x_start
    lead = 0.5 * x_start
    leg1 = solve_ivp(
        rhs, (0.0, lead), (x_start, 0.0), method="RK45", rtol=tol,
        atol=1e-14, dense_output=True,
    )
    if leg1.status != 0:
        raise OpenCurveError(f"level-curve trace failed: {leg1.message}")
    ev = _upward_crossing_event()
    max_len = 1e4 * max(x_start, 1.0)
    leg2 = solve_ivp(
        rhs, (0.0, max_len), leg1.y[:, -1], method="RK45", rtol=tol,
        atol=1e-14, events=ev, dense_output=True,
    )
    if leg2.status != 1 or len(leg2.t_events[0]) == 0:
        raise OpenCurveError(f"level curve h = {h} of {spec.id} did not close")
    length = lead + float(leg2.t_events[0][0])

    def evaluate(sigma: float):
        sigma = sigma % length
        if sigma <= lead:
            return leg1.sol(sigma)
        return leg2.sol(sigma - lead)

    pts = np.array(
        [evaluate(sg) for sg in np.linspace(0.0, length, n_points, endpoint=False)]
    )
    h_eval = compile_rational(spec.first_integral)
    resid = max(abs(h_eval(px, py) - h) for px, py in pts)
    if resid > oval_tol * max(1.0, abs(h)):
        raise OpenCurveError(
            f"H-residual {resid:.3e} exceeds oval tolerance on h = {h}"
        )
    gap = np.linalg.norm(evaluate(length - 1e-13) - evaluate(0.0))
    if gap > oval_tol * max(1.0, x_start):
        raise OpenCurveError(f"closure gap {gap:.3e} on h = {h}")
    return Oval(
        h=h,
        spec=spec,
        length=length,
        points=pts,
        orientation=1,
        _eval=evaluate,
    )
