"""Catalog of the eight isochronous planar centers under study.

Four cubic systems with homogeneous nonlinearities (the classical Pleshkan
normal forms ``s1star`` .. ``s3barstar``) and four quadratic ones (the Loud
normal forms ``louds1`` .. ``louds4``).  Each cubic entry carries its exact
commuting transversal field, a rational first integral, the admissible
perturbation template, the isochronous-direction constraints, and the linear
map from perturbation coefficients to the coefficient space of the
first-order period-derivative basis.

Quadratic (Loud) entries deliberately carry no commutator or first-integral
data; everything about them is computed from direct ODE runs, so no external
closed forms need to be trusted.

All identities stated by the catalog (commutation, invariance of the first
integral, kernel/constraint agreement) are certified exactly at load time.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .algebra import (
    BivariatePoly,
    BivariateRational,
    PlanarField,
    lie_bracket,
    poly,
    wedge,
)

F = Fraction

PLESHKAN_IDS = ("s1star", "s2star", "s3star", "s3barstar")
LOUD_IDS = ("louds1", "louds2", "louds3", "louds4")
ALL_IDS = PLESHKAN_IDS + LOUD_IDS

#: energy margin (fraction of the outer level) kept away from the polycycle
VALIDATED_MARGIN = 0.9
#: fallback energy cap when neither the outer level nor the x-projection
#: half-width is finite
DEFAULT_H_CAP = 25.0


class UnknownSystemError(KeyError):
    """Raised for a system id outside the catalog."""


class TemplateError(ValueError):
    """Raised when an operation requires the other perturbation template."""


@dataclass(frozen=True)
class IsochroneSpec:
    """Immutable catalog record for one isochronous center."""

    id: str
    label: str
    x0: PlanarField
    template: str                     # "cubic" (a,b,c,d) or "quadratic" (d,f)
    u0: Optional[PlanarField] = None
    first_integral: Optional[BivariateRational] = None
    ab_split: Optional[Tuple[BivariateRational, BivariateRational]] = None
    x_r: float = float("inf")         # half-width of the x-projection of the annulus
    h0: float = float("inf")          # outer energy level of `first_integral`
    kernel: Tuple[Tuple[Fraction, ...], ...] = ()
    phi: Optional[Tuple[Tuple[Fraction, ...], ...]] = None
    base: Optional[Tuple[Fraction, Fraction]] = None   # quadratic (d0, f0)
    notes: str = ""

    # -- perturbation templates ---------------------------------------------

    def n_coeffs(self) -> int:
        return 4 if self.template == "cubic" else 2

    def perturbation(self, coeffs: Sequence) -> PlanarField:
        """Exact perturbation field for one coefficient tuple.

        Cubic template: (a*x^2*y + b*y^3, c*x^3 + d*x*y^2) for (a, b, c, d).
        Quadratic template: (0, d*x^2 + f*y^2) for (d, f).
        """
        coeffs = [_frac(c) for c in coeffs]
        if len(coeffs) != self.n_coeffs():
            raise ValueError(
                f"{self.id} expects {self.n_coeffs()} coefficients, got {len(coeffs)}"
            )
        if self.template == "cubic":
            a, b, c, d = coeffs
            p = poly({(2, 1): a, (0, 3): b})
            q = poly({(3, 0): c, (1, 2): d})
        else:
            d, f_ = coeffs
            p = poly({})
            q = poly({(2, 0): d, (0, 2): f_})
        return PlanarField.from_polys(p, q)

    def is_loud(self) -> bool:
        return self.template == "quadratic"

    # -- section geometry ----------------------------------------------------

    def energy_on_axis(self, x: float) -> float:
        """First-integral value at (x, 0)."""
        if self.first_integral is None:
            raise ValueError(f"{self.id} carries no first integral")
        v = self.first_integral.eval_float(float(x), 0.0)
        if not isinstance(v, float):
            raise ZeroDivisionError(f"H({x}, 0) hits a pole")
        return v

    def axis_point(self, h: float) -> float:
        """Positive x with H(x, 0) = h (bisection on the monotone section)."""
        if not 0.0 < h < self.h0:
            raise ValueError(f"energy {h} outside (0, {self.h0}) for {self.id}")
        lo, hi = 0.0, min(self.x_r, 1.0) * 0.5
        while self.energy_on_axis(hi) < h:
            lo = hi
            hi = 0.5 * (hi + self.x_r) if self.x_r < float("inf") else 2.0 * hi
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if self.energy_on_axis(mid) < h:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-15 * max(1.0, hi):
                break
        return 0.5 * (lo + hi)

    def validated_h_max(self) -> float:
        """Outer energy cap of the desk-scale validated region.

        Keeps a fixed margin from the outer boundary: a fraction of the outer
        energy when that is finite, else the energy at a fraction of the
        x-projection half-width, else a flat cap.  Loud entries (no first
        integral) report NaN; use :meth:`validated_x_max`.
        """
        if self.first_integral is None:
            return float("nan")
        if self.h0 < float("inf"):
            return VALIDATED_MARGIN * self.h0
        if self.x_r < float("inf"):
            return self.energy_on_axis(VALIDATED_MARGIN * self.x_r)
        return DEFAULT_H_CAP

    def validated_x_max(self) -> float:
        """Abscissa of the outer validated orbit on the positive x-axis."""
        if self.first_integral is None:
            if self.x_r < float("inf"):
                return VALIDATED_MARGIN * self.x_r
            return float("nan")
        return self.axis_point(self.validated_h_max())

    def kernel_basis(self) -> List[Tuple[Fraction, ...]]:
        """Basis of the isochronous-direction subspace (nullspace of the
        constraint rows)."""
        return exact_nullspace(self.kernel)


@dataclass(frozen=True)
class PerturbationSeries:
    """Truncated series of perturbation coefficients, one tuple per order.

    ``orders[k]`` holds the order-k coefficient tuple (k >= 1; the order-0
    coefficients vanish by definition of an unfolding of the unperturbed
    system).
    """

    template: str
    orders: Dict[int, Tuple[Fraction, ...]] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for k, coeffs in self.orders.items():
            if k < 1:
                raise ValueError("perturbation coefficients start at order 1")
            clean[int(k)] = tuple(_frac(c) for c in coeffs)
        object.__setattr__(self, "orders", clean)

    @staticmethod
    def first_order(template: str, coeffs: Sequence) -> "PerturbationSeries":
        return PerturbationSeries(template, {1: tuple(coeffs)})

    def order(self) -> int:
        return max(self.orders, default=0)

    def coefficients(self, k: int) -> Tuple[Fraction, ...]:
        n = 4 if self.template == "cubic" else 2
        return self.orders.get(k, (F(0),) * n)


def perturbed_field(
    spec: IsochroneSpec, series: PerturbationSeries, eps
) -> PlanarField:
    """X0 + sum_k eps^k * Y_k as an exact field (eps coerced to Fraction)."""
    if series.template != spec.template:
        raise TemplateError(
            f"series template {series.template!r} does not match {spec.id}"
        )
    eps = Fraction(eps)
    out = spec.x0
    for k, coeffs in sorted(series.orders.items()):
        out = out + spec.perturbation(coeffs).scale(eps**k)
    return out


# ---------------------------------------------------------------------------
# coefficient maps
# ---------------------------------------------------------------------------

def phi_map(system_id: str, coeffs: Sequence) -> Tuple[Fraction, Fraction, Fraction]:
    """Linear image of cubic perturbation coefficients in the 3-dimensional
    coefficient space of the first-order basis functions."""
    spec = get_spec(system_id)
    if spec.phi is None:
        raise TemplateError(f"{spec.id} is quadratic: no 3x4 coefficient map")
    coeffs = [_frac(c) for c in coeffs]
    if len(coeffs) != 4:
        raise ValueError("cubic coefficient map expects (a, b, c, d)")
    return tuple(
        sum((r * c for r, c in zip(row, coeffs)), F(0)) for row in spec.phi
    )


def kernel_check(system_id: str, coeffs: Sequence) -> bool:
    """True iff the coefficients satisfy every isochronous-direction
    constraint of the system exactly."""
    spec = get_spec(system_id)
    coeffs = [_frac(c) for c in coeffs]
    if len(coeffs) != spec.n_coeffs():
        raise ValueError(
            f"{spec.id} expects {spec.n_coeffs()} coefficients, got {len(coeffs)}"
        )
    return all(
        sum((r * c for r, c in zip(row, coeffs)), F(0)) == 0
        for row in spec.kernel
    )


def complex_coeffs(a, b, c, d) -> Tuple[Fraction, Fraction, Fraction, Fraction]:
    """Coefficients (alpha, beta, gamma, delta) of the cubic perturbation in
    complex form z' += (alpha*z^3 + beta*z^2*zbar + gamma*z*zbar^2
    + delta*zbar^3)/8 under z = x + i*y.

    The alpha component multiplies the holomorphic direction, along which the
    perturbed center stays isochronous; (beta, gamma, delta) agree with
    phi_map("s1star", ...).
    """
    a, b, c, d = (_frac(v) for v in (a, b, c, d))
    alpha = b + c - d - a
    beta = 3 * c + d - a - 3 * b
    gamma = a + 3 * b + 3 * c + d
    delta = a - b + c - d
    return alpha, beta, gamma, delta


def exact_nullspace(
    rows: Sequence[Sequence[Fraction]],
) -> List[Tuple[Fraction, ...]]:
    """Basis of the nullspace of a small rational matrix (exact Gaussian
    elimination)."""
    m = [list(map(_frac, row)) for row in rows]
    if not m:
        return []
    ncols = len(m[0])
    pivots: List[int] = []
    r = 0
    for col in range(ncols):
        pivot = next((i for i in range(r, len(m)) if m[i][col] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        inv = 1 / m[r][col]
        m[r] = [v * inv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][col] != 0:
                f_ = m[i][col]
                m[i] = [v - f_ * w for v, w in zip(m[i], m[r])]
        pivots.append(col)
        r += 1
        if r == len(m):
            break
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        vec = [F(0)] * ncols
        vec[fc] = F(1)
        for prow, pcol in zip(range(r), pivots):
            vec[pcol] = -m[prow][fc]
        basis.append(tuple(vec))
    return basis


def same_subspace(
    basis_a: Sequence[Sequence[Fraction]], basis_b: Sequence[Sequence[Fraction]]
) -> bool:
    """Exact equality of two rational subspaces given by spanning sets."""

    def rank(rows):
        return len(rows[0]) - len(exact_nullspace(rows)) if rows else 0

    a = [list(map(_frac, v)) for v in basis_a]
    b = [list(map(_frac, v)) for v in basis_b]
    if not a or not b:
        return not a and not b
    return rank(a) == rank(b) == rank(a + b)


# ---------------------------------------------------------------------------
# catalog construction
# ---------------------------------------------------------------------------

def _frac(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return F(v)
    if isinstance(v, str):
        return F(v)
    if isinstance(v, float):
        return Fraction(v)
    raise TypeError(f"cannot coerce {type(v).__name__} to Fraction")


def _field(p_terms, q_terms) -> PlanarField:
    return PlanarField.from_polys(poly(p_terms), poly(q_terms))


def _rat(num_terms, den_terms) -> BivariateRational:
    return BivariateRational(poly(num_terms), poly(den_terms))


def _build_catalog() -> Dict[str, IsochroneSpec]:
    specs = {}

    # --- cubic: s1star ------------------------------------------------------
    # x' = -y - 3x^2 y + y^3,  y' = x + x^3 - 3x y^2
    # The customary first integral is an algebraic (square-root) expression;
    # the catalog stores its square, which is rational and shares its level
    # sets: Ht = (x^2+y^2)^2 / ((x^2+y^2+1)^2 - 4 y^2), with sup 1 on the
    # period annulus.
    specs["s1star"] = IsochroneSpec(
        id="s1star",
        label="cubic holomorphic-type isochrone",
        x0=_field(
            {(0, 1): -1, (2, 1): -3, (0, 3): 1},
            {(1, 0): 1, (3, 0): 1, (1, 2): -3},
        ),
        u0=_field(
            {(1, 0): 1, (3, 0): 1, (1, 2): -3},
            {(0, 1): 1, (2, 1): 3, (0, 3): -1},
        ),
        first_integral=_rat(
            {(4, 0): 1, (2, 2): 2, (0, 4): 1},
            {(4, 0): 1, (2, 2): 2, (0, 4): 1, (2, 0): 2, (0, 2): -2, (0, 0): 1},
        ),
        ab_split=None,
        x_r=float("inf"),
        h0=1.0,
        template="cubic",
        kernel=(
            (F(0), F(0), F(3), F(1)),    # d + 3c = 0
            (F(1), F(0), F(3), F(0)),    # a + 3c = 0
            (F(0), F(1), F(-1), F(0)),   # b - c = 0
        ),
        phi=(
            (F(-1), F(-3), F(3), F(1)),
            (F(1), F(3), F(3), F(1)),
            (F(1), F(-1), F(1), F(-1)),
        ),
        notes=(
            "first_integral is the square of the customary algebraic "
            "integral; its levels are h_axis^2/(1+h_axis^2)^2*(...)"
        ),
    )

    # --- cubic: s2star ------------------------------------------------------
    # x' = -y + x^2 y,  y' = x + x y^2;  H = (x^2+y^2)/(1-x^2)
    one_minus_x2 = {(0, 0): 1, (2, 0): -1}
    specs["s2star"] = IsochroneSpec(
        id="s2star",
        label="cubic rational isochrone, elliptic ovals",
        x0=_field({(0, 1): -1, (2, 1): 1}, {(1, 0): 1, (1, 2): 1}),
        u0=_field({(1, 0): 1, (3, 0): -1}, {(0, 1): 1, (2, 1): -1}),
        first_integral=_rat({(2, 0): 1, (0, 2): 1}, one_minus_x2),
        ab_split=(
            _rat({(2, 0): 1}, one_minus_x2),
            _rat({(0, 0): 1}, one_minus_x2),
        ),
        x_r=1.0,
        h0=float("inf"),
        template="cubic",
        kernel=(
            (F(0), F(1), F(0), F(0)),    # b = 0
            (F(0), F(0), F(1), F(0)),    # c = 0
            (F(1), F(0), F(0), F(-1)),   # a - d = 0
        ),
        phi=(
            (F(0), F(1), F(0), F(0)),
            (F(1), F(0), F(0), F(-1)),
            (F(0), F(0), F(-1), F(0)),
        ),
    )

    # --- cubic: s3star ------------------------------------------------------
    # x' = -y + 3x^2 y,  y' = x - 2x^3 + 9x y^2
    # H = ((x-2x^3)^2 + y^2)/(1-3x^2)^3
    den3 = {(0, 0): 1, (2, 0): -9, (4, 0): 27, (6, 0): -27}
    specs["s3star"] = IsochroneSpec(
        id="s3star",
        label="cubic isochrone with sextic first integral",
        x0=_field({(0, 1): -1, (2, 1): 3}, {(1, 0): 1, (3, 0): -2, (1, 2): 9}),
        u0=_field(
            {(1, 0): 1, (3, 0): -5, (5, 0): 6},
            {(0, 1): 1, (2, 1): -9, (4, 1): 18},
        ),
        first_integral=_rat(
            {(2, 0): 1, (4, 0): -4, (6, 0): 4, (0, 2): 1}, den3
        ),
        ab_split=(
            _rat({(2, 0): 1, (4, 0): -4, (6, 0): 4}, den3),
            _rat({(0, 0): 1}, den3),
        ),
        x_r=3 ** -0.5,
        h0=float("inf"),
        template="cubic",
        kernel=(
            (F(0), F(1), F(0), F(0)),    # b = 0
            (F(2), F(0), F(3), F(0)),    # 2a + 3c = 0
            (F(0), F(0), F(9), F(2)),    # 2d + 9c = 0
        ),
        phi=(
            (F(-1), F(-3), F(3), F(1)),
            (F(9), F(9), F(-9), F(-5)),
            (F(6), F(3), F(0), F(-2)),
        ),
    )

    # --- cubic: s3barstar ---------------------------------------------------
    # x' = -y - 3x^2 y,  y' = x + 2x^3 - 9x y^2
    # H = ((x+2x^3)^2 + y^2)/(1+3x^2)^3, sup on the annulus 4/27
    den3b = {(0, 0): 1, (2, 0): 9, (4, 0): 27, (6, 0): 27}
    specs["s3barstar"] = IsochroneSpec(
        id="s3barstar",
        label="cubic isochrone, globally defined ovals",
        x0=_field({(0, 1): -1, (2, 1): -3}, {(1, 0): 1, (3, 0): 2, (1, 2): -9}),
        u0=_field(
            {(1, 0): 1, (3, 0): 5, (5, 0): 6},
            {(0, 1): 1, (2, 1): 9, (4, 1): 18},
        ),
        first_integral=_rat(
            {(2, 0): 1, (4, 0): 4, (6, 0): 4, (0, 2): 1}, den3b
        ),
        ab_split=(
            _rat({(2, 0): 1, (4, 0): 4, (6, 0): 4}, den3b),
            _rat({(0, 0): 1}, den3b),
        ),
        x_r=float("inf"),
        h0=4.0 / 27.0,
        template="cubic",
        kernel=(
            (F(0), F(1), F(0), F(0)),
            (F(2), F(0), F(3), F(0)),
            (F(0), F(0), F(9), F(2)),
        ),
        phi=(
            (F(-1), F(-3), F(3), F(1)),
            (F(9), F(9), F(-9), F(-5)),
            (F(6), F(3), F(0), F(-2)),
        ),
    )

    # --- quadratic (Loud) entries -------------------------------------------
    # x' = -y + xy,  y' = x + d0 x^2 + f0 y^2.  The x-projection of the
    # annulus is not symmetric; x_r records its extent on the positive
    # x-axis, which is where all section machinery lives.  For (0, 1) the
    # center is rigid with orbits r = 1/(C + cos(theta)), C > 1, so the
    # extent is exactly 1/2; for (-1/2, 2) the boundary orbit crosses at
    # 1 - 1/sqrt(2) (determined numerically to 1e-6); the other two reach
    # the invariant line x = 1.
    loud_bases = {
        "louds1": (F(-1, 2), F(1, 2), 1.0),
        "louds2": (F(0), F(1), 0.5),
        "louds3": (F(0), F(1, 4), 1.0),
        "louds4": (F(-1, 2), F(2), 1.0 - 2.0 ** -0.5),
    }
    for lid, (d0, f0, x_right) in loud_bases.items():
        specs[lid] = IsochroneSpec(
            id=lid,
            label=f"quadratic isochrone, base (d0, f0) = ({d0}, {f0})",
            x0=_field(
                {(0, 1): -1, (1, 1): 1},
                {(1, 0): 1, (2, 0): d0, (0, 2): f0},
            ),
            x_r=x_right,
            h0=float("nan"),
            template="quadratic",
            kernel=((F(1), F(0)), (F(0), F(1))),   # only the zero direction
            base=(d0, f0),
            notes=(
                "no commutator or first integral is carried; all quantities "
                "come from direct ODE runs; x_r is the positive-axis extent "
                "of the annulus"
            ),
        )
    return specs


_CATALOG = _build_catalog()
_CERTIFIED = False


def _certify() -> None:
    """Exact load-time checks: commutation, first-integral invariance, and
    agreement of the coefficient-map kernel with the constraint set."""
    global _CERTIFIED
    if _CERTIFIED:
        return
    for sid in PLESHKAN_IDS:
        spec = _CATALOG[sid]
        br = lie_bracket(spec.x0, spec.u0)
        if not br.is_zero():
            raise AssertionError(f"{sid}: transversal field does not commute")
        grad_dot = spec.x0.directional_derivative(spec.first_integral)
        if not grad_dot.is_zero():
            raise AssertionError(f"{sid}: first integral is not invariant")
        if spec.ab_split is not None:
            a_part, b_part = spec.ab_split
            y2 = BivariateRational(poly({(0, 2): 1}))
            if not (a_part + b_part * y2) == spec.first_integral:
                raise AssertionError(f"{sid}: A + B*y^2 does not match H")
            if not (a_part.is_even_in_x() and b_part.is_even_in_x()):
                raise AssertionError(f"{sid}: A or B is not even")
        if spec.phi is not None:
            if not same_subspace(exact_nullspace(spec.phi), spec.kernel_basis()):
                raise AssertionError(f"{sid}: ker(phi) != constraint set")
    _CERTIFIED = True


def get_spec(system_id: str) -> IsochroneSpec:
    """Catalog lookup; ids are case-insensitive ('s2star', 'louds2', ...)."""
    key = system_id.strip().lower().replace("-", "").replace("_", "")
    if key not in _CATALOG:
        raise UnknownSystemError(
            f"unknown system {system_id!r}; valid ids: {', '.join(ALL_IDS)}"
        )
    _certify()
    return _CATALOG[key]


def all_specs() -> List[IsochroneSpec]:
    return [get_spec(sid) for sid in ALL_IDS]


# ---------------------------------------------------------------------------
# JSON dump (exact rationals rendered as "p/q" strings)
# ---------------------------------------------------------------------------

def _frac_str(fr: Fraction) -> str:
    return f"{fr.numerator}/{fr.denominator}" if fr.denominator != 1 else str(
        fr.numerator
    )

def _poly_json(p: BivariatePoly):
    return {f"{i},{j}": _frac_str(c) for (i, j), c in p.terms()}


def _rat_json(r: BivariateRational):
    return {"num": _poly_json(r.num), "den": _poly_json(r.den)}


def _field_json(fld: PlanarField):
    return {"p": _rat_json(fld.p), "q": _rat_json(fld.q)}


def spec_to_json(spec: IsochroneSpec) -> dict:
    doc = {
        "id": spec.id,
        "label": spec.label,
        "template": spec.template,
        "x0": _field_json(spec.x0),
        "x_r": spec.x_r,
        "h0": spec.h0,
        "kernel_constraints": [[_frac_str(c) for c in row] for row in spec.kernel],
        "notes": spec.notes,
    }
    if spec.u0 is not None:
        doc["u0"] = _field_json(spec.u0)
    if spec.first_integral is not None:
        doc["first_integral"] = _rat_json(spec.first_integral)
    if spec.ab_split is not None:
        doc["ab_split"] = {
            "A": _rat_json(spec.ab_split[0]),
            "B": _rat_json(spec.ab_split[1]),
        }
    if spec.phi is not None:
        doc["phi"] = [[_frac_str(c) for c in row] for row in spec.phi]
    if spec.base is not None:
        doc["base"] = [_frac_str(spec.base[0]), _frac_str(spec.base[1])]
    return doc


def catalog_json() -> str:
    """Canonical JSON dump of the whole catalog (stable key order)."""
    return json.dumps(
        {sid: spec_to_json(get_spec(sid)) for sid in ALL_IDS},
        indent=2,
        sort_keys=True,
    )
