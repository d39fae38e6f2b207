"""Complete elliptic integrals and the closed-form special functions used by
the first-order analysis of the cubic holomorphic-type isochrone.

The two kernels K (first kind) and E (second kind) are computed by two
independent routes: an arithmetic-geometric-mean iteration (the production
path, accurate to ~1e-15 relative) and a truncated double-factorial power
series (the verification twin, used for |u| <= 0.95).  Tests pin their
agreement at 1e-12.

On top of them sit the derived quantities for the holomorphic-type system:
the modulus map mu(h), the pair (Ibar2, Ibar0) entering the closed-form
first-order period derivative, the factor roots L+-(h) of the factorized
third-order Wronskian, and the cancellation-safe combination
scriptL(u) = E(u) + (u^2 - 2 - sqrt(16 - 16u^2 + u^4))/6 * K(u), which
vanishes to eighth order at u = 0 and is therefore evaluated in extended
precision for small u.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, Tuple

import mpmath

#: below this modulus scriptL is evaluated in extended precision: the two
#: O(1) terms cancel to O(u^8), which double precision cannot resolve
SCRIPT_L_SMALL_U = 0.1
#: the power-series route for K and E is trusted only up to here
SERIES_MAX_U = 0.95
_SERIES_EPS = 1e-16


class ModulusRangeError(ValueError):
    """Modulus outside (-1, 1)."""


@dataclass(frozen=True)
class EllipticPair:
    """Values of the complete elliptic integrals at one modulus."""

    u: float
    k_val: float
    e_val: float


def _check_modulus(u: float) -> float:
    u = float(u)
    if not -1.0 < u < 1.0:
        raise ModulusRangeError(f"modulus {u} outside (-1, 1)")
    return u


def ellip(u: float) -> EllipticPair:
    """K(u) and E(u) by the arithmetic-geometric mean, iterated to fixed
    point (machine accuracy)."""
    u = _check_modulus(u)
    a, b = 1.0, math.sqrt(1.0 - u * u)
    c = abs(u)
    csum = 0.5 * c * c          # sum of 2^(n-1) c_n^2, n = 0 term
    pow2 = 1.0
    # stop once c reaches rounding level: beyond that the doubling weight
    # 2^n only amplifies stale one-ulp noise in (a - b)/2
    for _ in range(64):
        if abs(c) < 4e-16 * a:
            break
        a, b, c = 0.5 * (a + b), math.sqrt(a * b), 0.5 * (a - b)
        pow2 *= 2.0
        csum += 0.5 * pow2 * c * c
    k = math.pi / (2.0 * a)
    e = k * (1.0 - csum)
    return EllipticPair(u=u, k_val=k, e_val=e)


def ellip_series(u: float) -> EllipticPair:
    """K(u) and E(u) from the double-factorial Taylor series at u = 0.

    Independent of :func:`ellip`; truncation at relative term size 1e-16.
    Only valid away from u = 1 (enforced at |u| <= 0.95 where convergence
    is still fast).
    """
    u = _check_modulus(u)
    if abs(u) > SERIES_MAX_U:
        raise ModulusRangeError(
            f"series route disabled for |u| > {SERIES_MAX_U}"
        )
    u2 = u * u
    coef = 1.0          # ((2i-1)!!/(2i)!!)^2 u^(2i), i = 0
    k_sum = 1.0
    e_sum = -1.0        # i = 0 term of the E series carries 1/(2i-1) = -1
    i = 0
    while True:
        i += 1
        coef *= ((2 * i - 1) / (2 * i)) ** 2 * u2
        k_sum += coef
        e_sum += coef / (2 * i - 1)
        if coef < _SERIES_EPS * k_sum:
            break
        if i > 10_000:  # pragma: no cover - unreachable for |u| <= 0.95
            raise RuntimeError("elliptic series failed to converge")
    return EllipticPair(u=u, k_val=0.5 * math.pi * k_sum,
                        e_val=-0.5 * math.pi * e_sum)


def ellip_derivatives(u: float) -> Tuple[float, float]:
    """(dK/du, dE/du) from the first-order linear system satisfied by the
    pair: K' = -(K + E/(u^2-1))/u, E' = (E - K)/u."""
    u = _check_modulus(u)
    if u == 0.0:
        return 0.0, 0.0
    p = ellip(u)
    kp = -(p.k_val + p.e_val / (u * u - 1.0)) / u
    ep = (p.e_val - p.k_val) / u
    return kp, ep


# ---------------------------------------------------------------------------
# derived quantities for the holomorphic-type cubic isochrone
# ---------------------------------------------------------------------------

def mu_of_h(h: float) -> float:
    """Modulus map mu(h) = 2h*sqrt(1+h^2)/(1+2h^2); increases from 0 to 1
    as the axis abscissa h runs over (0, inf)."""
    h = float(h)
    if h <= 0.0:
        raise ValueError(f"abscissa must be positive, got {h}")
    h2 = h * h
    return 2.0 * h * math.sqrt(1.0 + h2) / (1.0 + 2.0 * h2)


def ibar_pair(h: float) -> Tuple[float, float]:
    """The pair (Ibar2(h), Ibar0(h)) of elliptic combinations that span,
    together with the constant pi, the first-order period-derivative space
    of the holomorphic-type system."""
    h = float(h)
    if h <= 0.0:
        raise ValueError(f"abscissa must be positive, got {h}")
    h2 = h * h
    p = ellip(mu_of_h(h))
    k, e = p.k_val, p.e_val
    ibar2 = 2.0 * h2 / (1.0 + 2.0 * h2) * k - (2.0 + 4.0 * h2) / h2 * e
    ibar0 = (
        (1.0 + 2.0 * h2) * (1.0 + 2.0 * h2 + 2.0 * h2 * h2) / h2**3 * e
        - (1.0 + h2 + h2 * h2) * (1.0 + 3.0 * h2 + 3.0 * h2 * h2)
        / (h2**3 * (1.0 + 2.0 * h2)) * k
    )
    return ibar2, ibar0


def ibar2_prime(h: float) -> float:
    """Closed-form derivative of Ibar2; strictly positive for h > 0."""
    h = float(h)
    if h <= 0.0:
        raise ValueError(f"abscissa must be positive, got {h}")
    h2 = h * h
    p = ellip(mu_of_h(h))
    return (2.0 + 2.0 * h2) / h**3 * (p.e_val + p.k_val / (1.0 + 2.0 * h2))


def l_pm(h: float) -> Tuple[float, float]:
    """The two factor roots (L+, L-) of the factorized 3x3 Wronskian;
    L+ > 0 > L- pointwise."""
    h = float(h)
    h2 = h * h
    disc = 1.0 + 4.0 * h2 + 5.0 * h2**2 + 2.0 * h2**3 + h2**4
    root = 2.0 * math.sqrt(disc)
    base = -1.0 - 2.0 * h2 - 2.0 * h2 * h2
    den = 3.0 * (1.0 + 2.0 * h2) ** 2
    return (base + root) / den, (base - root) / den


def _bracket_stable(u: float) -> float:
    """(u^2 - 2 - sqrt(16 - 16u^2 + u^4)) without subtractive cancellation,
    via the conjugate form 12(u^2-1)/(u^2 - 2 + sqrt(...))."""
    u2 = u * u
    s = math.sqrt(16.0 - 16.0 * u2 + u2 * u2)
    return 12.0 * (u2 - 1.0) / (u2 - 2.0 + s)


def script_l(u: float) -> float:
    """scriptL(u) = E(u) + (u^2 - 2 - sqrt(16 - 16u^2 + u^4))/6 * K(u).

    The combination vanishes like u^8 at the origin while both terms are
    O(1); below ``SCRIPT_L_SMALL_U`` it is therefore evaluated with mpmath
    at 40 significant digits (the result still fits a float exactly enough).
    """
    u = _check_modulus(u)
    if not 0.0 < u < 1.0:
        raise ValueError(f"scriptL is defined on (0, 1), got {u}")
    if u < SCRIPT_L_SMALL_U:
        with mpmath.workdps(40):
            mu2 = mpmath.mpf(u) ** 2
            e = mpmath.ellipe(mu2)
            k = mpmath.ellipk(mu2)
            bracket = mu2 - 2 - mpmath.sqrt(16 - 16 * mu2 + mu2**2)
            return float(e + bracket / 6 * k)
    p = ellip(u)
    return p.e_val + _bracket_stable(u) / 6.0 * p.k_val


def g0(u: float) -> float:
    """Zeroth-order coefficient of the second-order ODE satisfied by
    scriptL; strictly positive on (0, 1)."""
    u = _check_modulus(u)
    u2 = u * u
    s = math.sqrt(16.0 - 16.0 * u2 + u2 * u2)
    return (16.0 - 12.0 * u2 + (8.0 - u2) * s) / (
        (1.0 - u2) * (16.0 - 16.0 * u2 + u2 * u2)
    )


def g1(u: float) -> float:
    """First-order coefficient of the ODE satisfied by scriptL."""
    u = _check_modulus(u)
    u2 = u * u
    poly16 = 16.0 - 16.0 * u2 + u2 * u2
    s = math.sqrt(poly16)
    return (48.0 - 64.0 * u2 + 17.0 * u2 * u2) / (
        u * (1.0 - u2) * poly16
    ) + s / (u * (1.0 - u2))


def wronskian_factors(h: float) -> Tuple[float, float]:
    """(E + L+*K, E + L-*K) at modulus mu(h).

    The second factor cancels to eighth order in mu(h) and is computed as
    scriptL(mu(h)); the identity L-(h) = bracket(mu(h))/6 makes the two
    expressions equal, and tests pin it numerically.
    """
    p = ellip(mu_of_h(h))
    lp, _ = l_pm(h)
    return p.e_val + lp * p.k_val, script_l(mu_of_h(h))


def wronskians_closed(h: float) -> Tuple[float, float]:
    """Closed-form Wronskians (W2, W3) of (pi, Ibar2) and (pi, Ibar2, Ibar0).

    W2 = pi * Ibar2'(h) and W3 follows the factorized product form; both are
    nonvanishing for h > 0 (W2 > 0, W3 < 0).
    """
    h = float(h)
    if h <= 0.0:
        raise ValueError(f"abscissa must be positive, got {h}")
    w2 = math.pi * ibar2_prime(h)
    fac_plus, fac_minus = wronskian_factors(h)
    h2 = h * h
    w3 = 72.0 * (1.0 + h2) ** 3 / h**11 * fac_plus * fac_minus
    return w2, w3


# ---------------------------------------------------------------------------
# tabulation registry (CLI support)
# ---------------------------------------------------------------------------

FUNCTIONS: Dict[str, Callable[[float], float]] = {
    "K": lambda u: ellip(u).k_val,
    "E": lambda u: ellip(u).e_val,
    "K_series": lambda u: ellip_series(u).k_val,
    "E_series": lambda u: ellip_series(u).e_val,
    "mu": mu_of_h,
    "Ibar2": lambda h: ibar_pair(h)[0],
    "Ibar0": lambda h: ibar_pair(h)[1],
    "Ibar2prime": ibar2_prime,
    "Lplus": lambda h: l_pm(h)[0],
    "Lminus": lambda h: l_pm(h)[1],
    "scriptL": script_l,
    "g0": g0,
    "g1": g1,
    "W2": lambda h: wronskians_closed(h)[0],
    "W3": lambda h: wronskians_closed(h)[1],
}
