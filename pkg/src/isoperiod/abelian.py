"""Abelian integrals over level ovals and the first-order period-derivative
machinery built on them.

Two independent evaluation routes are kept deliberately separate:

* ``oval_integral`` / ``basis`` / ``i_total`` integrate explicit rational
  one-forms f(x) y^p dx over level ovals traced from the first integral
  (geometry route);
* ``r_direct`` integrates the derivative of the perturbation coefficient
  along the commuting field over a time-parameterized orbit of the
  unperturbed system (dynamics route), and ``r_elliptic_s1`` evaluates the
  same quantity from closed-form elliptic expressions for the
  holomorphic-type cubic system.

Their mutual agreement is the main correctness evidence for the catalog
data, so nothing here shares code across routes beyond the exact algebra.

Orientation convention: all contour integrals are counterclockwise; every
emitted value records it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import flow
from .algebra import (
    BivariatePoly,
    BivariateRational,
    PlanarField,
    lambda_mu,
    poly,
)
from .catalog import IsochroneSpec, get_spec, phi_map

DEFAULT_REL_TOL = 1e-9
_N_START = 512
_N_MAX = 1 << 15


class SingularIntegrandError(ValueError):
    """Integrand denominator vanishes on the oval's x-range."""


class AsymmetricOvalError(ValueError):
    """The half-contour shortcut was requested on an unusable oval."""


@dataclass(frozen=True)
class IntegrandFn:
    """One-form f(x) * y^y_power dx with univariate rational f."""

    f: BivariateRational
    y_power: int

    def __post_init__(self):
        if self.f.num.degree_y() > 0 or self.f.den.degree_y() > 0:
            raise ValueError("integrand factor must be univariate in x")


@dataclass(frozen=True)
class AbelianValue:
    """Value of one Abelian integral with its provenance."""

    h: float
    value: float
    method: str                  # "quadrature" | "closed-form"
    orientation: int = 1         # +1 = counterclockwise
    n_samples: int = 0
    est_error: float = 0.0


# ---------------------------------------------------------------------------
# numpy evaluation of exact polynomials / rationals
# ---------------------------------------------------------------------------

def _np_eval_poly(p: BivariatePoly, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x, dtype=float)
    for (i, j), c in p.coeffs.items():
        term = float(c) * np.ones_like(x)
        if i:
            term = term * x**i
        if j:
            term = term * y**j
        out += term
    return out


def _np_eval_rat(r: BivariateRational, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    num = _np_eval_poly(r.num, x, y)
    if r.is_polynomial():
        return num
    den = _np_eval_poly(r.den, x, y)
    return num / den


# ---------------------------------------------------------------------------
# oval cache
# ---------------------------------------------------------------------------

_OVAL_CACHE: Dict[Tuple[str, float, float], flow.Oval] = {}


def oval_for(spec: IsochroneSpec, h: float, tol: float = 1e-12) -> flow.Oval:
    """Traced level oval, cached by (system, level, tolerance)."""
    key = (spec.id, float(h), float(tol))
    ov = _OVAL_CACHE.get(key)
    if ov is None:
        ov = flow.trace_oval(h, spec, n_points=_N_START, tol=tol)
        _OVAL_CACHE[key] = ov
    return ov


def _oval_samples(oval: flow.Oval, n: int):
    """Points plus unit-tangent x-component on a uniform arc grid."""
    pts = oval.resample(n)
    x, y = pts[:, 0], pts[:, 1]
    hgrad_x = _np_eval_rat(oval.spec.first_integral.d_dx(), x, y)
    hgrad_y = _np_eval_rat(oval.spec.first_integral.d_dy(), x, y)
    norm = np.hypot(hgrad_x, hgrad_y)
    tx = -hgrad_y / norm * oval.orientation
    return x, y, tx, norm


def _check_integrand_regular(integrand: IntegrandFn, oval: flow.Oval) -> None:
    x = oval.points[:, 0]
    den = np.abs(_np_eval_poly(integrand.f.den, x, np.zeros_like(x)))
    scale = np.abs(_np_eval_poly(integrand.f.den, np.zeros_like(x[:1]), np.zeros_like(x[:1])))
    if den.min() < 1e-12 * max(1.0, float(scale[0])):
        raise SingularIntegrandError(
            "integrand denominator vanishes on the oval's x-range"
        )


def oval_integral(
    integrand: IntegrandFn,
    oval: flow.Oval,
    rel_tol: float = DEFAULT_REL_TOL,
    method: str = "auto",
) -> AbelianValue:
    """Contour integral of f(x) * y^p dx over a traced oval.

    For p >= 0 this is the periodic trapezoid sum on the uniform arc-length
    parameterization, refined by doubling until the relative change drops
    below ``rel_tol`` (spectral accuracy for the analytic integrands used
    here).  For p = -1 the parameterized integrand is regular despite the
    division by y: along the contour dx = -2B(x) y / |grad H| ds, so the
    y factors cancel analytically and the implementation divides them out
    before sampling (requires the A + B y^2 split).  ``method="half"``
    instead integrates the upper half with the midpoint rule and doubles it
    using the oval's y-symmetry (kept as an independent cross-check).
    """
    if integrand.y_power < -1:
        raise SingularIntegrandError(
            f"y-power {integrand.y_power} below -1 is not integrable here"
        )
    _check_integrand_regular(integrand, oval)
    if method == "half":
        return _oval_integral_half(integrand, oval, rel_tol)
    if method != "auto":
        raise ValueError(f"unknown method {method!r}")
    if integrand.y_power < 0 and oval.spec.ab_split is None:
        raise AsymmetricOvalError(
            f"{oval.spec.id}: negative y-powers need the A + B*y^2 split"
        )

    p = integrand.y_power
    prev = None
    n = _N_START
    while True:
        x, y, tx, norm = _oval_samples(oval, n)
        fx = _np_eval_rat(integrand.f, x, np.zeros_like(x))
        if p >= 0:
            vals = fx * y**p * tx
        else:
            # f * y^(-1) * tx == f * (-2 B(x)) / |grad H|, regular everywhere
            b_vals = _np_eval_rat(oval.spec.ab_split[1], x, np.zeros_like(x))
            vals = fx * (-2.0 * b_vals) / norm * oval.orientation
        total = float(np.mean(vals) * oval.length)
        scale = float(np.max(np.abs(vals)) * oval.length)
        if prev is not None:
            err = abs(total - prev)
            if err <= max(rel_tol * abs(total), 1e-13 * max(scale, 1e-300)):
                return AbelianValue(
                    h=oval.h,
                    value=total,
                    method="quadrature",
                    orientation=oval.orientation,
                    n_samples=n,
                    est_error=err,
                )
        prev = total
        n *= 2
        if n > _N_MAX:
            return AbelianValue(
                h=oval.h, value=total, method="quadrature",
                orientation=oval.orientation, n_samples=n // 2,
                est_error=abs(total - prev),
            )


def _oval_integral_half(
    integrand: IntegrandFn, oval: flow.Oval, rel_tol: float
) -> AbelianValue:
    """Upper-half midpoint rule doubled by y-symmetry, with one Richardson
    extrapolation level; used as the independent route for negative powers."""
    if not oval.spec.first_integral.flip_y() == oval.spec.first_integral:
        raise AsymmetricOvalError(f"{oval.spec.id}: oval is not y-symmetric")
    p = integrand.y_power
    half = 0.5 * oval.length

    def midpoint(n: int) -> float:
        sigma = (np.arange(n) + 0.5) * (half / n)
        pts = np.array([oval._eval(sg) for sg in sigma])
        x, y = pts[:, 0], pts[:, 1]
        hg_x = _np_eval_rat(oval.spec.first_integral.d_dx(), x, y)
        hg_y = _np_eval_rat(oval.spec.first_integral.d_dy(), x, y)
        tx = -hg_y / np.hypot(hg_x, hg_y)
        fx = _np_eval_rat(integrand.f, x, np.zeros_like(x))
        vals = fx * y**p * tx
        return 2.0 * float(np.sum(vals) * (half / n))

    prev_m = prev_r = None
    n = _N_START
    while True:
        m = midpoint(n)
        if prev_m is not None:
            rich = (4.0 * m - prev_m) / 3.0
            if prev_r is not None:
                err = abs(rich - prev_r)
                if err <= max(rel_tol * abs(rich), 1e-13):
                    return AbelianValue(
                        h=oval.h, value=rich * oval.orientation,
                        method="quadrature", orientation=oval.orientation,
                        n_samples=n, est_error=err,
                    )
            prev_r = rich
        prev_m = m
        n *= 2
        if n > _N_MAX:
            return AbelianValue(
                h=oval.h, value=(prev_r if prev_r is not None else m) * oval.orientation,
                method="quadrature", orientation=oval.orientation,
                n_samples=n // 2, est_error=float("nan"),
            )


# ---------------------------------------------------------------------------
# integrand rewriting: lower a y-power by two
# ---------------------------------------------------------------------------

def rewrite_integrand(
    F: BivariateRational,
    A: BivariateRational,
    B: BivariateRational,
    k: int,
) -> BivariateRational:
    """G with contour-integral identity  oint F y^(k-2) dx = oint G y^k dx
    on any oval of {A(x) + B(x) y^2 = h}:

        G = (2/k) * (B F / A')' - B' F / A'.

    Requires F/A' analytic at x = 0 (A' vanishes there since A is even);
    checked symbolically after exact GCD reduction.
    """
    if k < 1:
        raise ValueError("k must be a positive integer")
    a_prime = A.d_dx()
    ratio = (F / a_prime).reduced()
    den_at_0 = ratio.den.eval(0, 0)
    if den_at_0 == 0:
        raise ValueError("F / A' is not analytic at x = 0")
    bf = (B * F / a_prime).reduced()
    g = bf.d_dx() * Fraction(2, k) - (B.d_dx() * F / a_prime)
    return g.reduced()


# ---------------------------------------------------------------------------
# per-system bases and total combination
# ---------------------------------------------------------------------------

def _urat(num_terms, den_terms) -> BivariateRational:
    return BivariateRational(poly(num_terms), poly(den_terms))


def basis_integrands(system_id: str) -> List[IntegrandFn]:
    """The three y^3-integrands whose oval integrals span the first-order
    period-derivative space of the oval-based cubic systems."""
    sid = get_spec(system_id).id
    if sid == "s2star":
        one_minus = {(0, 0): 1, (2, 0): -1}
        return [
            IntegrandFn(_urat({(0, 0): 1}, one_minus), 3),
            IntegrandFn(
                _urat({(0, 0): Fraction(1, 3), (2, 0): Fraction(-4, 3)}, one_minus), 3
            ),
            IntegrandFn(_urat({(4, 0): 8, (2, 0): -8, (0, 0): 1}, one_minus), 3),
        ]
    if sid == "s3star":
        den = {(0, 0): 1, (2, 0): -9, (4, 0): 27, (6, 0): -27}
        return [IntegrandFn(_urat({(2 * i, 0): 1}, den), 3) for i in range(3)]
    if sid == "s3barstar":
        den = {(0, 0): 1, (2, 0): 9, (4, 0): 27, (6, 0): 27}
        return [IntegrandFn(_urat({(2 * i, 0): 1}, den), 3) for i in range(3)]
    raise ValueError(f"{sid} has no oval-integral basis (use the direct route)")


#: weights applied to the coefficient-map image when combining the basis
_COMBINATION = {
    "s2star": (Fraction(2), (Fraction(1), Fraction(1), Fraction(1))),
    "s3star": (Fraction(2, 3), (Fraction(1), Fraction(6), Fraction(-48))),
    "s3barstar": (Fraction(2, 3), (Fraction(1), Fraction(-6), Fraction(-48))),
}


def basis(
    system_id: str, h: float, rel_tol: float = DEFAULT_REL_TOL
) -> Tuple[AbelianValue, AbelianValue, AbelianValue]:
    """Quadrature values (I0, I1, I2) on a shared oval trace."""
    spec = get_spec(system_id)
    hmax = spec.validated_h_max()
    if not 0.0 < h <= hmax:
        raise ValueError(
            f"level {h} outside the validated range (0, {hmax:.6g}] of {spec.id}"
        )
    ov = oval_for(spec, h)
    return tuple(
        oval_integral(ig, ov, rel_tol=rel_tol) for ig in basis_integrands(spec.id)
    )


def i_total(
    system_id: str, coeffs, h: float, rel_tol: float = DEFAULT_REL_TOL
) -> AbelianValue:
    """First-order period-derivative combination at energy h, via the oval
    route: prefactor * sum_i w_i * phi_i(coeffs) * I_i(h)."""
    spec = get_spec(system_id)
    pref, weights = _COMBINATION[spec.id]
    image = phi_map(spec.id, coeffs)
    vals = basis(spec.id, h, rel_tol=rel_tol)
    total = float(pref) / h * math.fsum(
        float(w) * float(im) * v.value for w, im, v in zip(weights, image, vals)
    )
    return AbelianValue(
        h=h, value=total, method="quadrature", orientation=1,
        n_samples=max(v.n_samples for v in vals),
        est_error=math.fsum(
            abs(float(w) * float(im)) * v.est_error for w, im, v in zip(weights, image, vals)
        ) * float(pref) / h,
    )


# ---------------------------------------------------------------------------
# direct (dynamics) route
# ---------------------------------------------------------------------------

def s1star_orbit(x0: float, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Closed-form unit-period orbit of the holomorphic-type cubic system
    through (x0, 0), sampled at n uniform times on [0, 2*pi)."""
    t = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
    e_it = np.exp(1j * t)
    h2 = x0 * x0
    z = x0 * e_it / np.sqrt(1.0 + h2 - np.exp(2j * t) * h2)
    return z.real, z.imag


def directional_coefficient_derivative(
    spec: IsochroneSpec, coeffs
) -> BivariateRational:
    """U0 applied to the X0-coefficient of the perturbation: the integrand
    of the first-order period derivative (exact rational function)."""
    if spec.u0 is None:
        raise ValueError(f"{spec.id} carries no commuting field")
    y_field = spec.perturbation(coeffs)
    lam, _ = lambda_mu(y_field, spec.x0, spec.u0)
    return spec.u0.directional_derivative(lam).reduced()


def r_direct(
    system_id: str,
    coeffs,
    x0: float,
    rel_tol: float = DEFAULT_REL_TOL,
    orbit_tol: float = 1e-12,
) -> AbelianValue:
    """Time-domain quadrature of the first-order period-derivative density
    along the unperturbed orbit through (x0, 0).

    For the holomorphic-type system the closed-form orbit is used; the other
    cubic systems integrate the orbit numerically.  The value equals the
    oval-route combination at the matched energy H(x0, 0).
    """
    spec = get_spec(system_id)
    if spec.u0 is None:
        raise ValueError(f"{spec.id}: direct route needs the commuting field")
    integrand = directional_coefficient_derivative(spec, coeffs)

    if spec.id == "s1star":
        def sample(n):
            return s1star_orbit(x0, n)
    else:
        traj = flow.integrate(spec.x0, (x0, 0.0), (0.0, 2.0 * math.pi), tol=orbit_tol)

        def sample(n):
            t = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
            pts = traj.sol(t)
            return pts[0], pts[1]

    prev = None
    n = _N_START
    while True:
        x, y = sample(n)
        vals = _np_eval_rat(integrand, x, y)
        total = float(np.mean(vals) * 2.0 * math.pi)
        if prev is not None:
            err = abs(total - prev)
            scale = float(np.max(np.abs(vals))) * 2.0 * math.pi
            if err <= max(rel_tol * abs(total), 1e-13 * max(scale, 1e-300)):
                return AbelianValue(
                    h=spec.energy_on_axis(x0) if spec.first_integral else float("nan"),
                    value=total, method="quadrature", orientation=1,
                    n_samples=n, est_error=err,
                )
        prev = total
        n *= 2
        if n > _N_MAX:
            return AbelianValue(
                h=spec.energy_on_axis(x0) if spec.first_integral else float("nan"),
                value=total, method="quadrature", orientation=1,
                n_samples=n // 2, est_error=float("nan"),
            )


def r_elliptic_s1(h: float, coeffs) -> AbelianValue:
    """Closed-form first-order period-derivative combination for the
    holomorphic-type cubic system at axis abscissa h:

        R(h) = -4 h^4 / (1 + h^2)^2 * (beta*Ibar2 + gamma*pi + delta*Ibar0),

    with (beta, gamma, delta) the non-holomorphic complex-form coefficients
    of the perturbation.  The holomorphic component alpha does not enter
    (it preserves isochronicity).
    """
    from . import elliptic
    from .catalog import complex_coeffs

    h = float(h)
    if h <= 0:
        raise ValueError("abscissa must be positive")
    _, beta, gamma, delta = complex_coeffs(*coeffs)
    i2, i0 = elliptic.ibar_pair(h)
    combo = float(beta) * i2 + float(gamma) * math.pi + float(delta) * i0
    value = -4.0 * h**4 / (1.0 + h * h) ** 2 * combo
    return AbelianValue(h=h, value=value, method="closed-form", orientation=1)
