"""Uniform semiclassical (Airy-type) approximation of the rotation matrix.

For large spin the matrix elements obey a second-order ODE in the angle
with discriminant

    R(mu, nu, beta) = sin^2(beta) - mu^2 - nu^2 + 2 mu nu cos(beta),

where mu = m/J, nu = n/J and J = j + 1/2.  R > 0 marks the classically
allowed (oscillatory) region between the turning points beta_+ < beta_-,
R < 0 the exponentially decaying forbidden region.  A closed-form action
S anchored at one turning point feeds the Airy argument

    zeta = -(3 J S / 2)^(2/3)   (allowed,  S >= 0)
         = +(-3 J S / 2)^(2/3)  (forbidden, S <= 0)

and the uniform element is

    d = (-1)^max(0, n-m) * sqrt(2/J) * Ai(zeta) * (-zeta / R)^(1/4).

Anchor bookkeeping: the branch anchored at beta_+ covers (0, beta_-), the
one at beta_- covers (beta_+, pi); inside the allowed region the nearer
anchor is used (ties toward beta_+).  The printed forms of the action in
the literature are sign-ambiguous; here the signs are fixed by the
requirements S(anchor) = 0, S >= 0 on the allowed side and S <= 0 on the
forbidden side, and are pinned in the test suite against adaptive
quadrature of dS/dbeta = +-sqrt(|R|)/sin(beta).
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass

import numpy as np

from .temporal import Schedule
from .wigner import Spin

__all__ = [
    "RegionTag",
    "WkbElement",
    "reduced_indices",
    "discriminant",
    "discriminant_scaled",
    "turning_points",
    "action",
    "zeta",
    "airy_ai",
    "d_wkb",
    "entropy_asymptotic",
    "classify_region",
    "radial_distance",
    "pair_mi_asymptote",
    "cond_entropy_asymptote",
]


class RegionTag(enum.Enum):
    ALLOWED = "allowed"
    FORBIDDEN = "forbidden"
    BOUNDARY = "boundary"


@dataclass(frozen=True)
class WkbElement:
    """One semiclassically approximated element with its diagnostics."""

    value: float
    zeta: float
    action: float
    region: RegionTag
    branch: str  # "+" (anchored at beta_+) or "-" (anchored at beta_-)
    reliable: bool  # False near a degenerate double turning point


def reduced_indices(spin: Spin, twice_m: int, twice_n: int) -> tuple[float, float]:
    """(mu, nu) = (m/J, n/J); both lie strictly inside (-1, 1)."""
    spin.check_magnetic(twice_m)
    spin.check_magnetic(twice_n)
    return twice_m / (spin.twice_j + 1), twice_n / (spin.twice_j + 1)


def discriminant(mu: float, nu: float, beta: float) -> float:
    """Normalized discriminant; positive in the classically allowed region."""
    return math.sin(beta) ** 2 - mu * mu - nu * nu + 2 * mu * nu * math.cos(beta)


def discriminant_scaled(spin: Spin, twice_m: int, twice_n: int, beta: float) -> float:
    """J^2-scaled variant R = J^2 sin^2(beta) - m^2 - n^2 + 2 m n cos(beta)."""
    mu, nu = reduced_indices(spin, twice_m, twice_n)
    return spin.big_j**2 * discriminant(mu, nu, beta)


def turning_points(mu: float, nu: float) -> tuple[float, float]:
    """(beta_plus, beta_minus) with R > 0 exactly on the open interval between."""
    if not (abs(mu) < 1 and abs(nu) < 1):
        raise ValueError("turning points need |mu|, |nu| < 1")
    w = math.sqrt((1 - mu * mu) * (1 - nu * nu))
    c_hi = min(1.0, mu * nu + w)
    c_lo = max(-1.0, mu * nu - w)
    return math.acos(c_hi), math.acos(c_lo)


def _arcoth(x: float) -> float:
    # mathematically |x| > 1 in the open forbidden region; rounding can push
    # the argument onto 1, where the true action diverges logarithmically
    u = 1.0 / x
    if abs(u) >= 1.0:
        u = math.copysign(1.0 - 1e-16, u)
    return math.atanh(u)


def _allowed_combo(mu: float, nu: float, beta: float) -> float:
    """F with F' = -sqrt(R)/sin(beta) and F(beta_+-) = +-F_plus."""
    r = discriminant(mu, nu, beta)
    sr = math.sqrt(r)
    c = math.cos(beta)
    w2 = (1 - mu * mu) * (1 - nu * nu)
    total = math.atan2(c - mu * nu, sr)
    if mu + nu != 0.0:
        total -= 0.5 * (mu + nu) * math.atan(((c - mu * nu) * (1 + mu * nu) + w2) / ((mu + nu) * sr))
    if mu - nu != 0.0:
        total += 0.5 * (mu - nu) * math.atan(((mu * nu - c) * (1 - mu * nu) + w2) / ((mu - nu) * sr))
    return total


def _allowed_const(mu: float, nu: float) -> float:
    """F at beta_+; also half the total action across the allowed region."""
    return math.pi / 2 - (abs(mu + nu) + abs(mu - nu)) * math.pi / 4


def _forbidden_combo(mu: float, nu: float, beta: float) -> float:
    """G with G' = -sqrt(-R)/sin(beta) and G = 0 at both turning points."""
    q = -discriminant(mu, nu, beta)
    sq = math.sqrt(q)
    c = math.cos(beta)
    w2 = (1 - mu * mu) * (1 - nu * nu)
    total = -_arcoth((c - mu * nu) / sq)
    if mu + nu != 0.0:
        total += 0.5 * (mu + nu) * _arcoth(((c - mu * nu) * (1 + mu * nu) + w2) / ((mu + nu) * sq))
    if mu - nu != 0.0:
        total -= 0.5 * (mu - nu) * _arcoth(((mu * nu - c) * (1 - mu * nu) + w2) / ((mu - nu) * sq))
    return total


def action(mu: float, nu: float, beta: float, branch: str = "+") -> float:
    """Closed-form action anchored at one turning point.

    Vanishes at the anchor, grows positive into the allowed region and
    negative into the adjacent forbidden region, with
    dS/dbeta = +sqrt(|R|)/sin(beta) on the "+" branch and the opposite
    sign on the "-" branch.
    """
    if branch not in ("+", "-"):
        raise ValueError(f"branch must be '+' or '-', got {branch!r}")
    if not 0.0 < beta < math.pi:
        raise ValueError(f"action needs beta in (0, pi), got {beta}")
    bp, bm = turning_points(mu, nu)
    r = discriminant(mu, nu, beta)
    if r > 0:
        f_plus = _allowed_const(mu, nu)
        f = _allowed_combo(mu, nu, beta)
        return (f_plus - f) if branch == "+" else (f + f_plus)
    anchor = bp if branch == "+" else bm
    far = bm if branch == "+" else bp
    if abs(beta - anchor) < 1e-12 or r == 0.0:
        if abs(beta - anchor) <= abs(beta - far):
            return 0.0
        return 2.0 * _allowed_const(mu, nu)
    if branch == "+" and beta > bm:
        raise ValueError("branch '+' covers (0, beta_minus)")
    if branch == "-" and beta < bp:
        raise ValueError("branch '-' covers (beta_plus, pi)")
    g = _forbidden_combo(mu, nu, beta)
    return -g if branch == "+" else g


def zeta(spin: Spin, mu: float, nu: float, beta: float, branch: str = "+") -> float:
    """Airy argument; negative in the allowed region, positive in the forbidden."""
    s = action(mu, nu, beta, branch)
    mag = (1.5 * spin.big_j * abs(s)) ** (2.0 / 3.0)
    return -mag if discriminant(mu, nu, beta) > 0 else mag


# ---------------------------------------------------------------------------
# Airy function
#
# Three regimes: Maclaurin series (float64) for |x| <= 3.2, the large-|x|
# asymptotic expansions for |x| >= 8.5, and Chebyshev fits of the scaled
# function in between (built once from the same Maclaurin series evaluated
# in extended precision; plain float64 summation loses too much to
# cancellation there).  Seam agreement is pinned by tests.

_SERIES_CUT = 3.2
_ASYM_CUT = 8.5

_AI0 = 0.3550280538878172392600631860041831763980
_AIP0 = -0.2588194037928067984051835601892039634793
_BI0 = 0.6149266274460007351509223690936135535960
_BIP0 = 0.4482883573538263579148237103988283908668


def _ai_bi_series(x: float) -> tuple[float, float]:
    f = term = 1.0
    k = 1
    while True:
        term *= x**3 / ((3 * k) * (3 * k - 1))
        f += term
        if abs(term) < 1e-18 * abs(f) + 1e-300:
            break
        k += 1
    g = term = x
    k = 1
    while True:
        term *= x**3 / ((3 * k + 1) * (3 * k))
        g += term
        if abs(term) < 1e-18 * abs(g) + 1e-300:
            break
        k += 1
    return _AI0 * f + _AIP0 * g, _BI0 * f + _BIP0 * g


def _ai_asymptotic(x: float) -> float:
    if x > 0:
        xi = (2.0 / 3.0) * x**1.5
        total = 1.0
        term = 1.0
        prev = math.inf
        k = 1
        while True:
            term *= -(6 * k - 5) * (6 * k - 3) * (6 * k - 1) / (216.0 * k * (2 * k - 1) * xi)
            if abs(term) >= prev:  # truncate at the smallest term
                break
            total += term
            prev = abs(term)
            if prev < 1e-18:
                break
            k += 1
        return math.exp(-xi) * total / (2.0 * math.sqrt(math.pi) * x**0.25)
    y = -x
    xi = (2.0 / 3.0) * y**1.5
    # even/odd splits of the same coefficient sequence
    even = 1.0
    odd = 0.0
    term = 1.0
    prev = math.inf
    k = 1
    while True:
        term *= (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / (216.0 * k * (2 * k - 1) * xi)
        if term >= prev:
            break
        sign = -1.0 if (k // 2) % 2 else 1.0
        if k % 2:
            odd += sign * term
        else:
            even += sign * term
        prev = term
        if prev < 1e-18:
            break
        k += 1
    phase = xi - math.pi / 4
    return (math.cos(phase) * even + math.sin(phase) * odd) / (math.sqrt(math.pi) * y**0.25)


def _mp_ai_bi(x_val, dps: int = 60):
    import mpmath as mp

    with mp.workdps(dps):
        x = mp.mpf(x_val)
        f = term = mp.mpf(1)
        k = 1
        while True:
            term *= x**3 / ((3 * k) * (3 * k - 1))
            f += term
            if abs(term) < mp.mpf(10) ** (-dps) * (abs(f) + 1):
                break
            k += 1
        g = term = x
        k = 1
        while True:
            term *= x**3 / ((3 * k + 1) * (3 * k))
            g += term
            if abs(term) < mp.mpf(10) ** (-dps) * (abs(g) + 1):
                break
            k += 1
        ai0 = 1 / (mp.power(3, mp.mpf(2) / 3) * mp.gamma(mp.mpf(2) / 3))
        aip0 = -1 / (mp.power(3, mp.mpf(1) / 3) * mp.gamma(mp.mpf(1) / 3))
        bi0 = 1 / (mp.power(3, mp.mpf(1) / 6) * mp.gamma(mp.mpf(2) / 3))
        bip0 = mp.power(3, mp.mpf(1) / 6) / mp.gamma(mp.mpf(1) / 3)
        return float(ai0 * f + aip0 * g), float(bi0 * f + bip0 * g)


@functools.cache
def _band_coeffs() -> dict:
    """Chebyshev fits of scaled Ai over +-[series cut, asym cut]."""
    lo, hi = _SERIES_CUT - 0.05, _ASYM_CUT + 0.05
    n_nodes = 56
    k = np.arange(n_nodes)
    tnodes = np.cos(np.pi * (2 * k + 1) / (2 * n_nodes))  # mapped to [-1, 1]
    nodes = 0.5 * (lo + hi) + 0.5 * (hi - lo) * tnodes

    pos_vals = []
    neg_p, neg_q = [], []
    for x in nodes:
        ai, _ = _mp_ai_bi(x)
        xi = (2.0 / 3.0) * x**1.5
        pos_vals.append(ai * 2.0 * math.sqrt(math.pi) * x**0.25 * math.exp(xi))
        ai_m, bi_m = _mp_ai_bi(-x)
        phase = xi + math.pi / 4
        root = math.sqrt(math.pi) * x**0.25
        neg_p.append(root * (ai_m * math.sin(phase) + bi_m * math.cos(phase)))
        neg_q.append(root * (ai_m * math.cos(phase) - bi_m * math.sin(phase)))
    deg = n_nodes - 1
    return {
        "domain": (lo, hi),
        "pos": np.polynomial.chebyshev.chebfit(tnodes, pos_vals, deg),
        "neg_p": np.polynomial.chebyshev.chebfit(tnodes, neg_p, deg),
        "neg_q": np.polynomial.chebyshev.chebfit(tnodes, neg_q, deg),
    }


def airy_ai(x: float) -> float:
    """Airy function Ai on the real line.

    Maclaurin series for |x| <= 3.2, asymptotic expansions for |x| >= 8.5,
    Chebyshev fits of the exponentially/oscillatory-scaled function in
    between; the branches agree to better than 1e-10 at both seams.
    """
    x = float(x)
    ax = abs(x)
    if ax <= _SERIES_CUT:
        return _ai_bi_series(x)[0]
    if ax >= _ASYM_CUT:
        return _ai_asymptotic(x)
    bands = _band_coeffs()
    lo, hi = bands["domain"]
    t = (2.0 * ax - (lo + hi)) / (hi - lo)
    xi = (2.0 / 3.0) * ax**1.5
    if x > 0:
        scaled = float(np.polynomial.chebyshev.chebval(t, bands["pos"]))
        return scaled * math.exp(-xi) / (2.0 * math.sqrt(math.pi) * x**0.25)
    p = float(np.polynomial.chebyshev.chebval(t, bands["neg_p"]))
    q = float(np.polynomial.chebyshev.chebval(t, bands["neg_q"]))
    phase = xi + math.pi / 4
    return (p * math.sin(phase) + q * math.cos(phase)) / (math.sqrt(math.pi) * ax**0.25)


# ---------------------------------------------------------------------------


def radial_distance(spin: Spin, twice_m: int, twice_n: int, beta: float) -> float:
    """Signed distance r - sin(beta) in the decoupled radial coordinate.

    The boundary R = 0 maps to the circle r = sin(beta) under
    x = (mu+nu) sin(beta/2), y = (mu-nu) cos(beta/2); negative values are
    allowed-side, positive forbidden-side.
    """
    mu, nu = reduced_indices(spin, twice_m, twice_n)
    x = (mu + nu) * math.sin(beta / 2)
    y = (mu - nu) * math.cos(beta / 2)
    return math.hypot(x, y) - abs(math.sin(beta))


def default_boundary_eps(spin: Spin) -> float:
    """Default boundary half-width in the radial coordinate, of order J^(-2/3)."""
    return spin.big_j ** (-2.0 / 3.0)


def classify_region(
    spin: Spin, twice_m: int, twice_n: int, beta: float, eps: float | None = None
) -> RegionTag:
    """Allowed/forbidden/boundary tag by discriminant sign and radial window."""
    if eps is None:
        eps = default_boundary_eps(spin)
    if eps < 0:
        raise ValueError("eps must be non-negative")
    dist = radial_distance(spin, twice_m, twice_n, beta)
    if eps > 0 and abs(dist) < eps:
        return RegionTag.BOUNDARY
    mu, nu = reduced_indices(spin, twice_m, twice_n)
    return RegionTag.ALLOWED if discriminant(mu, nu, beta) > 0 else RegionTag.FORBIDDEN


#: degeneracy guard: sqrt((1-mu^2)(1-nu^2)) below this marks a collapsing
#: allowed interval where the single-turning-point form cannot be trusted
_DEGENERATE_W = 1e-3


def d_wkb(spin: Spin, twice_m: int, twice_n: int, beta: float) -> WkbElement:
    """Uniform Airy approximation of one matrix element (ket m, bra n)."""
    if not 0.0 < beta < math.pi:
        raise ValueError(f"the approximation needs beta in (0, pi), got {beta}")
    mu, nu = reduced_indices(spin, twice_m, twice_n)
    big_j = spin.big_j
    bp, bm = turning_points(mu, nu)
    branch = "+" if abs(beta - bp) <= abs(beta - bm) else "-"
    anchor = bp if branch == "+" else bm
    s = action(mu, nu, beta, branch)
    r = discriminant(mu, nu, beta)
    z = -((1.5 * big_j * abs(s)) ** (2.0 / 3.0)) if r > 0 else (1.5 * big_j * abs(s)) ** (2.0 / 3.0)

    w = math.sqrt((1 - mu * mu) * (1 - nu * nu))
    reliable = w > _DEGENERATE_W and math.sin(anchor) > 1e-12
    if abs(beta - anchor) < 1e-4 or r == 0.0 or z == 0.0:
        # (-zeta/R)^(1/4) -> (J / (sin(b0) |R'(b0)|))^(1/6) at the anchor
        rprime = 2.0 * w * math.sin(anchor)
        amp = (big_j / (math.sin(anchor) * rprime)) ** (1.0 / 6.0) if rprime > 0 else 0.0
        if rprime <= 0:
            reliable = False
    else:
        amp = (-z / r) ** 0.25
    sign = -1.0 if (twice_n - twice_m) > 0 and ((twice_n - twice_m) // 2) % 2 else 1.0
    value = sign * math.sqrt(2.0 / big_j) * airy_ai(z) * amp
    return WkbElement(
        value=value,
        zeta=z,
        action=s,
        region=classify_region(spin, twice_m, twice_n, beta),
        branch=branch,
        reliable=reliable,
    )


def entropy_asymptotic(spin: Spin, beta: float) -> float:
    """Large-spin limit of the matrix entropy: ln((2j+1) pi) + ln|sin b| - 5/2.

    Diverges to -inf as beta approaches a multiple of pi, where the
    approximation breaks down; callers are responsible for exclusion
    windows.
    """
    s = abs(math.sin(beta))
    if s == 0.0:
        return -math.inf
    return math.log(spin.dim * math.pi) + math.log(s) - 2.5


def _sin_or_raise(beta: float, what: str) -> float:
    s = abs(math.sin(beta))
    if s < 1e-12:
        raise ValueError(f"{what} sits at a multiple of pi, inside the breakdown window")
    return s


def pair_mi_asymptote(schedule: Schedule, i: int, spin: Spin | None = None) -> float:
    """Large-spin limit of the adjacent-pair conditional-MI value D(i, i+1).

    Spin-independent for every scenario: the entropy constants cancel in
    the telescoped combinations (including the two-time case).  Raises if
    any involved angle sits at a multiple of pi.
    """
    n = schedule.n
    if not 1 <= i <= n - 1:
        raise ValueError(f"need 1 <= i <= {n - 1}, got {i}")
    if n == 2:
        return 2.5 - math.log(math.pi * _sin_or_raise(schedule.beta(1, 2), "beta(1,2)"))
    if i == 1:
        return math.log(
            _sin_or_raise(schedule.beta(1, 3), "beta(1,3)")
            / _sin_or_raise(schedule.beta(1, 2), "beta(1,2)")
        )
    if i == n - 1:
        return math.log(
            _sin_or_raise(schedule.beta(n - 2, n), "beta(n-2,n)")
            / _sin_or_raise(schedule.beta(n - 1, n), "beta(n-1,n)")
        )
    return math.log(
        _sin_or_raise(schedule.beta(i - 1, i + 1), "beta(i-1,i+1)")
        * _sin_or_raise(schedule.beta(i, i + 2), "beta(i,i+2)")
        / (
            _sin_or_raise(schedule.beta(i - 1, i + 2), "beta(i-1,i+2)")
            * _sin_or_raise(schedule.beta(i, i + 1), "beta(i,i+1)")
        )
    )


def cond_entropy_asymptote(spin: Spin, schedule: Schedule, i: int) -> float:
    """Large-spin limit of the conditional-entropy value D(i); grows like ln j."""
    n = schedule.n
    if not 1 <= i <= n:
        raise ValueError(f"need 1 <= i <= {n}, got {i}")
    if i == 1:
        return entropy_asymptotic(spin, schedule.beta(1, 2))
    if i == n:
        return entropy_asymptotic(spin, schedule.beta(n - 1, n))
    a = _sin_or_raise(schedule.beta(i - 1, i), "beta(i-1,i)")
    b = _sin_or_raise(schedule.beta(i, i + 1), "beta(i,i+1)")
    ab = _sin_or_raise(schedule.beta(i - 1, i + 1), "beta(i-1,i+1)")
    return math.log(spin.dim * math.pi) - 2.5 + math.log(a * b / ab)
