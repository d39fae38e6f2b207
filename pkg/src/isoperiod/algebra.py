"""Exact arithmetic for bivariate polynomials, rational functions and planar
vector fields over the rationals.

Polynomials are sparse dictionaries mapping exponent pairs ``(i, j)`` (degree
in x, degree in y) to :class:`fractions.Fraction` coefficients.  All algebra
(sums, products, partial derivatives, evaluation at rational points) is exact,
so identity tests such as "this Lie bracket vanishes" are unconditional, not
floating-point verdicts.

On top of the polynomial layer live :class:`BivariateRational` (quotients with
cross-multiplicative equality) and :class:`PlanarField` (a pair of rational
components), together with the vector-field calculus used throughout the
package: Lie brackets, wedge products, and the decomposition of a perturbation
against a transversal commuting pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Iterable, Mapping, Tuple, Union

Exponent = Tuple[int, int]
Coeffs = Dict[Exponent, Fraction]
Scalar = Union[int, Fraction]

#: total-degree threshold above which rational-function results are reduced
#: by a GCD pass to keep intermediate expression swell bounded
REDUCE_DEGREE_THRESHOLD = 40


class DegeneratePairError(ValueError):
    """Raised when a field pair with identically zero wedge is decomposed."""


class Pole:
    """Tagged value returned when a rational function is evaluated on a zero
    of its denominator.  Quadrature drivers test for it and subdivide instead
    of catching exceptions."""

    __slots__ = ()

    def __repr__(self) -> str:  # pragma: no cover
        return "POLE"

    def __bool__(self) -> bool:
        return False


POLE = Pole()


def _coerce(value: Scalar) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    raise TypeError(f"expected int or Fraction, got {type(value).__name__}")


# ---------------------------------------------------------------------------
# polynomials
# ---------------------------------------------------------------------------

class BivariatePoly:
    """Sparse bivariate polynomial with exact rational coefficients.

    The coefficient map never stores zeros; the zero polynomial is the empty
    map.  Instances are immutable and hashable on their term set.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Mapping[Exponent, Scalar] | None = None):
        clean: Coeffs = {}
        if coeffs:
            for (i, j), c in coeffs.items():
                c = _coerce(c)
                if c != 0:
                    clean[(int(i), int(j))] = c
        object.__setattr__(self, "coeffs", clean)

    def __setattr__(self, name, value):  # immutability guard
        raise AttributeError("BivariatePoly is immutable")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero() -> "BivariatePoly":
        return BivariatePoly()

    @staticmethod
    def const(c: Scalar) -> "BivariatePoly":
        return BivariatePoly({(0, 0): _coerce(c)})

    @staticmethod
    def monomial(i: int, j: int, c: Scalar = 1) -> "BivariatePoly":
        return BivariatePoly({(i, j): _coerce(c)})

    # -- basic queries -----------------------------------------------------

    def is_zero(self) -> bool:
        return not self.coeffs

    def total_degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        if not self.coeffs:
            return -1
        return max(i + j for i, j in self.coeffs)

    def degree_x(self) -> int:
        return max((i for i, _ in self.coeffs), default=-1)

    def degree_y(self) -> int:
        return max((j for _, j in self.coeffs), default=-1)

    def __eq__(self, other) -> bool:
        if isinstance(other, BivariatePoly):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self == BivariatePoly.const(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(frozenset(self.coeffs.items()))

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other) -> "BivariatePoly":
        other = _as_poly(other)
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            s = out.get(e, Fraction(0)) + c
            if s == 0:
                out.pop(e, None)
            else:
                out[e] = s
        return _raw_poly(out)

    __radd__ = __add__

    def __neg__(self) -> "BivariatePoly":
        return _raw_poly({e: -c for e, c in self.coeffs.items()})

    def __sub__(self, other) -> "BivariatePoly":
        return self + (-_as_poly(other))

    def __rsub__(self, other) -> "BivariatePoly":
        return _as_poly(other) - self

    def __mul__(self, other) -> "BivariatePoly":
        if isinstance(other, (int, Fraction)):
            c = _coerce(other)
            if c == 0:
                return BivariatePoly.zero()
            return _raw_poly({e: k * c for e, k in self.coeffs.items()})
        other = _as_poly(other)
        out: Coeffs = {}
        for (i1, j1), c1 in self.coeffs.items():
            for (i2, j2), c2 in other.coeffs.items():
                e = (i1 + i2, j1 + j2)
                s = out.get(e, Fraction(0)) + c1 * c2
                if s == 0:
                    out.pop(e, None)
                else:
                    out[e] = s
        return _raw_poly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "BivariatePoly":
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = BivariatePoly.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- calculus ----------------------------------------------------------

    def dx(self) -> "BivariatePoly":
        return _raw_poly(
            {(i - 1, j): c * i for (i, j), c in self.coeffs.items() if i > 0}
        )

    def dy(self) -> "BivariatePoly":
        return _raw_poly(
            {(i, j - 1): c * j for (i, j), c in self.coeffs.items() if j > 0}
        )

    # -- symmetries --------------------------------------------------------

    def flip_x(self) -> "BivariatePoly":
        """Substitute x -> -x."""
        return _raw_poly(
            {(i, j): (-c if i % 2 else c) for (i, j), c in self.coeffs.items()}
        )

    def flip_y(self) -> "BivariatePoly":
        """Substitute y -> -y."""
        return _raw_poly(
            {(i, j): (-c if j % 2 else c) for (i, j), c in self.coeffs.items()}
        )

    # -- evaluation --------------------------------------------------------

    def eval(self, x: Scalar, y: Scalar) -> Fraction:
        """Exact evaluation at a rational point."""
        x = _coerce(x)
        y = _coerce(y)
        total = Fraction(0)
        for (i, j), c in self.coeffs.items():
            total += c * x**i * y**j
        return total

    def eval_float(self, x: float, y: float) -> float:
        """Evaluation at a float point with compensated accumulation."""
        return math.fsum(
            float(c) * x**i * y**j for (i, j), c in self.coeffs.items()
        )

    # -- misc --------------------------------------------------------------

    def terms(self) -> Iterable[Tuple[Exponent, Fraction]]:
        return sorted(self.coeffs.items())

    def x_order(self) -> int:
        """Lowest power of x dividing the polynomial; -1 for zero."""
        if not self.coeffs:
            return -1
        return min(i for i, _ in self.coeffs)

    def __repr__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for (i, j), c in self.terms():
            mono = "".join(
                f"{v}^{e}" if e > 1 else (v if e == 1 else "")
                for v, e in (("x", i), ("y", j))
            )
            parts.append(f"{c}{'*' + mono if mono else ''}")
        return " + ".join(parts)


def _raw_poly(coeffs: Coeffs) -> BivariatePoly:
    """Build a polynomial from an already-clean coefficient map (no copy)."""
    p = BivariatePoly.__new__(BivariatePoly)
    object.__setattr__(p, "coeffs", coeffs)
    return p


def _as_poly(value) -> BivariatePoly:
    if isinstance(value, BivariatePoly):
        return value
    if isinstance(value, (int, Fraction)):
        return BivariatePoly.const(value)
    raise TypeError(f"cannot interpret {type(value).__name__} as polynomial")


def poly(spec: Mapping[Exponent, Scalar] | Scalar) -> BivariatePoly:
    """Convenience constructor: ``poly({(2, 1): 3, (0, 0): -1})`` or ``poly(5)``."""
    if isinstance(spec, (int, Fraction)):
        return BivariatePoly.const(spec)
    return BivariatePoly(spec)


X = BivariatePoly.monomial(1, 0)
Y = BivariatePoly.monomial(0, 1)
ONE = BivariatePoly.const(1)


# ---------------------------------------------------------------------------
# polynomial GCD (used only to bound expression swell; equality and zero
# tests never rely on it)
# ---------------------------------------------------------------------------

def _univar_coeffs(p: BivariatePoly) -> Dict[int, Fraction]:
    """View a y-free polynomial as {x-degree: coeff}."""
    out = {}
    for (i, j), c in p.coeffs.items():
        if j != 0:
            raise ValueError("polynomial is not univariate in x")
        out[i] = c
    return out


def _univar_gcd(a: Dict[int, Fraction], b: Dict[int, Fraction]) -> Dict[int, Fraction]:
    """Monic GCD in Q[x] on raw {degree: coeff} maps."""

    def degree(p):
        return max(p, default=-1)

    def rem(num, den):
        num = dict(num)
        dd, dl = degree(den), den[max(den)]
        while num and degree(num) >= dd:
            nd = degree(num)
            q = num[nd] / dl
            for e, c in den.items():
                k = e + nd - dd
                s = num.get(k, Fraction(0)) - q * c
                if s == 0:
                    num.pop(k, None)
                else:
                    num[k] = s
        return num

    while b:
        a, b = b, rem(a, b)
    if not a:
        return {}
    lead = a[degree(a)]
    return {e: c / lead for e, c in a.items()}


def _y_coeff_list(p: BivariatePoly) -> Dict[int, Dict[int, Fraction]]:
    """View p as a polynomial in y with coefficients in Q[x]."""
    out: Dict[int, Dict[int, Fraction]] = {}
    for (i, j), c in p.coeffs.items():
        out.setdefault(j, {})[i] = c
    return out


def _from_y_coeffs(coeffs: Dict[int, Dict[int, Fraction]]) -> BivariatePoly:
    flat: Coeffs = {}
    for j, cx in coeffs.items():
        for i, c in cx.items():
            if c != 0:
                flat[(i, j)] = c
    return _raw_poly(flat)


def _univar_mul(a: Dict[int, Fraction], b: Dict[int, Fraction]) -> Dict[int, Fraction]:
    out: Dict[int, Fraction] = {}
    for i, c in a.items():
        for k, d in b.items():
            e = i + k
            s = out.get(e, Fraction(0)) + c * d
            if s == 0:
                out.pop(e, None)
            else:
                out[e] = s
    return out


def _univar_divexact(a: Dict[int, Fraction], b: Dict[int, Fraction]) -> Dict[int, Fraction]:
    """Exact division in Q[x]; raises if the remainder is nonzero."""
    if not b:
        raise ZeroDivisionError("division by zero polynomial")
    num = dict(a)
    quot: Dict[int, Fraction] = {}
    db, lb = max(b), b[max(b)]
    while num:
        dn = max(num)
        if dn < db:
            raise ArithmeticError("inexact polynomial division")
        q = num[dn] / lb
        quot[dn - db] = q
        for e, c in b.items():
            k = e + dn - db
            s = num.get(k, Fraction(0)) - q * c
            if s == 0:
                num.pop(k, None)
            else:
                num[k] = s
    return quot


def poly_gcd(p: BivariatePoly, q: BivariatePoly) -> BivariatePoly:
    """GCD of two bivariate polynomials (primitive PRS in (Q[x])[y]).

    The result is normalized so its leading term (in graded order) has
    coefficient 1.  Only correctness of divisibility matters for callers;
    the unit normalization is cosmetic.
    """
    if p.is_zero():
        return _normalize_lead(q)
    if q.is_zero():
        return _normalize_lead(p)

    pa, pb = _y_coeff_list(p), _y_coeff_list(q)

    def content(c: Dict[int, Dict[int, Fraction]]) -> Dict[int, Fraction]:
        g: Dict[int, Fraction] = {}
        for cx in c.values():
            g = _univar_gcd(g, cx) if g else dict(cx)
            if max(g, default=-1) == 0:
                break
        lead = g[max(g)]
        return {e: c_ / lead for e, c_ in g.items()}

    def primitive(c):
        cont = content(c)
        return {j: _univar_divexact(cx, cont) for j, cx in c.items()}, cont

    pa, ca = primitive(pa)
    pb, cb = primitive(pb)
    cont_gcd = _univar_gcd(ca, cb)

    def ydeg(c):
        return max(c, default=-1)

    # primitive PRS on the y-variable
    a, b = (pa, pb) if ydeg(pa) >= ydeg(pb) else (pb, pa)
    while b:
        # pseudo-remainder of a by b in (Q[x])[y]
        r = {j: dict(cx) for j, cx in a.items()}
        lb = b[ydeg(b)]
        while r and ydeg(r) >= ydeg(b):
            dr, db = ydeg(r), ydeg(b)
            lr = r[dr]
            # r <- lb * r - lr * y^(dr-db) * b
            new_r: Dict[int, Dict[int, Fraction]] = {}
            for j, cx in r.items():
                new_r[j] = _univar_mul(cx, lb)
            for j, cx in b.items():
                k = j + dr - db
                prod = _univar_mul(cx, lr)
                tgt = new_r.setdefault(k, {})
                for e, c_ in prod.items():
                    s = tgt.get(e, Fraction(0)) - c_
                    if s == 0:
                        tgt.pop(e, None)
                    else:
                        tgt[e] = s
            r = {j: cx for j, cx in new_r.items() if cx}
        if r:
            r, _ = primitive(r)
        a, b = b, r

    result: Dict[int, Dict[int, Fraction]] = {
        j: _univar_mul(cx, cont_gcd) for j, cx in a.items()
    }
    return _normalize_lead(_from_y_coeffs(result))


def _normalize_lead(p: BivariatePoly) -> BivariatePoly:
    if p.is_zero():
        return p
    lead = max(p.coeffs, key=lambda e: (e[0] + e[1], e))
    c = p.coeffs[lead]
    return p * (1 / c)


def poly_divexact(p: BivariatePoly, d: BivariatePoly) -> BivariatePoly:
    """Exact division of bivariate polynomials; raises on nonzero remainder."""
    if d.is_zero():
        raise ZeroDivisionError("division by zero polynomial")
    if p.is_zero():
        return p
    num = _y_coeff_list(p)
    den = _y_coeff_list(d)
    dd = max(den)
    lead_den = den[dd]
    quot: Dict[int, Dict[int, Fraction]] = {}

    def ydeg(c):
        return max(c, default=-1)

    while num:
        dn = ydeg(num)
        if dn < dd:
            raise ArithmeticError("inexact polynomial division")
        qx = _univar_divexact(num[dn], lead_den)
        quot[dn - dd] = qx
        for j, cx in den.items():
            k = j + dn - dd
            prod = _univar_mul(cx, qx)
            tgt = num.setdefault(k, {})
            for e, c_ in prod.items():
                s = tgt.get(e, Fraction(0)) - c_
                if s == 0:
                    tgt.pop(e, None)
                else:
                    tgt[e] = s
            if not tgt:
                num.pop(k, None)
        if ydeg(num) == dn:  # leading term failed to cancel
            raise ArithmeticError("inexact polynomial division")
    return _from_y_coeffs(quot)


# ---------------------------------------------------------------------------
# rational functions
# ---------------------------------------------------------------------------

class BivariateRational:
    """Quotient of two bivariate polynomials.

    Equality is cross-multiplicative, so no canonical form is required.  A
    GCD reduction runs automatically when the combined degree of an
    arithmetic result exceeds :data:`REDUCE_DEGREE_THRESHOLD`.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        num = _as_poly(num)
        den = ONE if den is None else _as_poly(den)
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if num.is_zero():
            den = ONE
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __setattr__(self, name, value):
        raise AttributeError("BivariateRational is immutable")

    # -- queries -----------------------------------------------------------

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_polynomial(self) -> bool:
        return self.den == ONE

    def total_degree(self) -> int:
        return max(self.num.total_degree(), self.den.total_degree())

    def __eq__(self, other) -> bool:
        other = as_rational(other)
        return self.num * other.den == other.num * self.den

    def __hash__(self) -> int:
        r = self.reduced()
        return hash((r.num, r.den))

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other) -> "BivariateRational":
        other = as_rational(other)
        if self.den == other.den:
            return _maybe_reduce(BivariateRational(self.num + other.num, self.den))
        return _maybe_reduce(
            BivariateRational(
                self.num * other.den + other.num * self.den, self.den * other.den
            )
        )

    __radd__ = __add__

    def __neg__(self) -> "BivariateRational":
        return BivariateRational(-self.num, self.den)

    def __sub__(self, other) -> "BivariateRational":
        return self + (-as_rational(other))

    def __rsub__(self, other) -> "BivariateRational":
        return as_rational(other) - self

    def __mul__(self, other) -> "BivariateRational":
        other = as_rational(other)
        return _maybe_reduce(
            BivariateRational(self.num * other.num, self.den * other.den)
        )

    __rmul__ = __mul__

    def __truediv__(self, other) -> "BivariateRational":
        other = as_rational(other)
        if other.is_zero():
            raise ZeroDivisionError("division by zero rational function")
        return _maybe_reduce(
            BivariateRational(self.num * other.den, self.den * other.num)
        )

    def __rtruediv__(self, other) -> "BivariateRational":
        return as_rational(other) / self

    # -- calculus ----------------------------------------------------------

    def d_dx(self) -> "BivariateRational":
        return _maybe_reduce(
            BivariateRational(
                self.num.dx() * self.den - self.num * self.den.dx(),
                self.den * self.den,
            )
        )

    def d_dy(self) -> "BivariateRational":
        return _maybe_reduce(
            BivariateRational(
                self.num.dy() * self.den - self.num * self.den.dy(),
                self.den * self.den,
            )
        )

    # -- symmetry ----------------------------------------------------------

    def flip_x(self) -> "BivariateRational":
        return BivariateRational(self.num.flip_x(), self.den.flip_x())

    def flip_y(self) -> "BivariateRational":
        return BivariateRational(self.num.flip_y(), self.den.flip_y())

    def is_even_in_x(self) -> bool:
        return self.flip_x() == self

    # -- evaluation --------------------------------------------------------

    def eval(self, x: Scalar, y: Scalar):
        """Exact evaluation; returns :data:`POLE` on a denominator zero."""
        d = self.den.eval(x, y)
        if d == 0:
            return POLE
        return self.num.eval(x, y) / d

    def eval_float(self, x: float, y: float):
        d = self.den.eval_float(x, y)
        if d == 0.0:
            return POLE
        return self.num.eval_float(x, y) / d

    # -- normalization -----------------------------------------------------

    def reduced(self) -> "BivariateRational":
        """Cancel the polynomial GCD of numerator and denominator."""
        if self.num.is_zero() or self.den == ONE:
            return self
        g = poly_gcd(self.num, self.den)
        if g.total_degree() <= 0:
            return self
        return BivariateRational(
            poly_divexact(self.num, g), poly_divexact(self.den, g)
        )

    def __repr__(self) -> str:
        if self.den == ONE:
            return repr(self.num)
        return f"({self.num!r}) / ({self.den!r})"


def _maybe_reduce(r: BivariateRational) -> BivariateRational:
    if r.total_degree() > REDUCE_DEGREE_THRESHOLD:
        return r.reduced()
    return r


def as_rational(value) -> BivariateRational:
    if isinstance(value, BivariateRational):
        return value
    if isinstance(value, (BivariatePoly, int, Fraction)):
        return BivariateRational(_as_poly(value))
    raise TypeError(f"cannot interpret {type(value).__name__} as rational function")


RAT_ZERO = BivariateRational(BivariatePoly.zero())
RAT_ONE = BivariateRational(ONE)


# ---------------------------------------------------------------------------
# planar vector fields
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PlanarField:
    """Planar vector field with rational-function components (p, q) for
    (dx/dt, dy/dt)."""

    p: BivariateRational
    q: BivariateRational

    @staticmethod
    def from_polys(p, q) -> "PlanarField":
        return PlanarField(as_rational(p), as_rational(q))

    def is_zero(self) -> bool:
        return self.p.is_zero() and self.q.is_zero()

    def is_polynomial(self) -> bool:
        return self.p.is_polynomial() and self.q.is_polynomial()

    def __add__(self, other: "PlanarField") -> "PlanarField":
        return PlanarField(self.p + other.p, self.q + other.q)

    def __sub__(self, other: "PlanarField") -> "PlanarField":
        return PlanarField(self.p - other.p, self.q - other.q)

    def scale(self, c) -> "PlanarField":
        c = as_rational(c)
        return PlanarField(self.p * c, self.q * c)

    def eval(self, x: Scalar, y: Scalar):
        return (self.p.eval(x, y), self.q.eval(x, y))

    def eval_float(self, x: float, y: float):
        return (self.p.eval_float(x, y), self.q.eval_float(x, y))

    def directional_derivative(self, f: BivariateRational) -> BivariateRational:
        """Derivative of the scalar f along this field: p*df/dx + q*df/dy."""
        return self.p * f.d_dx() + self.q * f.d_dy()


ZERO_FIELD = PlanarField(RAT_ZERO, RAT_ZERO)


def lie_bracket(x_field: PlanarField, u_field: PlanarField) -> PlanarField:
    """Lie bracket [X, U] = DU.X - DX.U, componentwise exact."""
    xp, xq = x_field.p, x_field.q
    up, uq = u_field.p, u_field.q
    bp = up.d_dx() * xp + up.d_dy() * xq - (xp.d_dx() * up + xp.d_dy() * uq)
    bq = uq.d_dx() * xp + uq.d_dy() * xq - (xq.d_dx() * up + xq.d_dy() * uq)
    return PlanarField(bp, bq)


def wedge(x_field: PlanarField, y_field: PlanarField) -> BivariateRational:
    """Wedge (cross) product p1*q2 - q1*p2 of two planar fields."""
    return x_field.p * y_field.q - x_field.q * y_field.p


def bracket_decompose(
    x_field: PlanarField, u_field: PlanarField
) -> Tuple[BivariateRational, BivariateRational]:
    """Split [X, U] over the (X, U) frame: [X, U] = alpha*X + beta*U.

    Requires the pair to be transversal somewhere (wedge not identically
    zero); raises :class:`DegeneratePairError` otherwise.
    """
    w = wedge(x_field, u_field)
    if w.is_zero():
        raise DegeneratePairError("fields are everywhere parallel (X ^ U = 0)")
    br = lie_bracket(x_field, u_field)
    alpha = wedge(br, u_field) / w
    beta = wedge(x_field, br) / w
    return alpha, beta


def lambda_mu(
    y_field: PlanarField, x0: PlanarField, u0: PlanarField
) -> Tuple[BivariateRational, BivariateRational]:
    """Coefficients of Y over the transversal frame (X0, U0).

    Returns exact rational functions (lam, mu) with Y = lam*X0 + mu*U0.
    """
    w = wedge(x0, u0)
    if w.is_zero():
        raise DegeneratePairError("frame fields are everywhere parallel")
    lam = wedge(y_field, u0) / w
    mu = wedge(x0, y_field) / w
    return lam, mu


# ---------------------------------------------------------------------------
# fast numeric evaluation
# ---------------------------------------------------------------------------

def compile_poly(p: BivariatePoly) -> Callable[[float, float], float]:
    """Compile a polynomial into a fast float evaluator.

    Generates straight-line Python with cached monomial powers; for the small
    polynomials used here this is within a small factor of handwritten code.
    """
    if p.is_zero():
        return lambda x, y: 0.0
    lines = ["def _f(x, y):"]
    max_x = max((i for i, _ in p.coeffs), default=0)
    max_y = max((j for _, j in p.coeffs), default=0)
    for i in range(2, max_x + 1):
        prev = "x" if i == 2 else f"x{i - 1}"
        lines.append(f"    x{i} = {prev} * x")
    for j in range(2, max_y + 1):
        prev = "y" if j == 2 else f"y{j - 1}"
        lines.append(f"    y{j} = {prev} * y")

    def mono(i: int, j: int) -> str:
        fx = "" if i == 0 else ("x" if i == 1 else f"x{i}")
        fy = "" if j == 0 else ("y" if j == 1 else f"y{j}")
        return "*".join(s for s in (fx, fy) if s) or "1.0"

    terms = [f"{float(c)!r}*{mono(i, j)}" for (i, j), c in p.terms()]
    lines.append("    return " + " + ".join(terms))
    ns: dict = {}
    exec("\n".join(lines), ns)  # noqa: S102 - generated from exact coefficients
    return ns["_f"]


def compile_rational(r: BivariateRational) -> Callable[[float, float], float]:
    """Compile a rational function into a float evaluator returning
    :data:`POLE` exactly on denominator zeros."""
    fnum = compile_poly(r.num)
    if r.den == ONE:
        return fnum
    fden = compile_poly(r.den)

    def _eval(x: float, y: float):
        d = fden(x, y)
        if d == 0.0:
            return POLE
        return fnum(x, y) / d

    return _eval


def compile_field_rhs(field: PlanarField) -> Callable[[float, object], tuple]:
    """Compile a planar field into an ODE right-hand side f(t, (x, y)).

    Polynomial components are compiled to straight-line code; rational ones
    fall back to the generic evaluator (poles raise ZeroDivisionError inside
    the integrator, surfacing as a step failure).
    """
    if field.is_polynomial():
        fp = compile_poly(field.p.num)
        fq = compile_poly(field.q.num)

        def rhs(t, v):
            x, y = v
            return (fp(x, y), fq(x, y))

        return rhs

    fp_num = compile_poly(field.p.num)
    fp_den = compile_poly(field.p.den)
    fq_num = compile_poly(field.q.num)
    fq_den = compile_poly(field.q.den)

    def rhs(t, v):
        x, y = v
        return (fp_num(x, y) / fp_den(x, y), fq_num(x, y) / fq_den(x, y))

    return rhs
