"""Wigner d-matrices for rotations about the y-axis.

Conventions used throughout the package:

* Angular momenta are stored losslessly as ``twice_j`` / ``twice_m``
  integers, so half-integer spins never touch floating point.
* A matrix element ``d[m -> n](beta)`` is the amplitude
  ``<j, n| exp(-i beta Jy) |j, m>``; ``m`` labels the ket and ``n`` the
  bra.  Matrices are laid out with the bra index ``n`` on rows and the
  ket index ``m`` on columns, both descending from ``+j`` to ``-j``.
* The sign convention is pinned by the spin-1/2 block::

      d(beta) = [[cos(beta/2), -sin(beta/2)],
                 [sin(beta/2),  cos(beta/2)]]

Full matrices are built by coupling up half a unit of spin at a time
(2j Clebsch-Gordan steps starting from the trivial matrix).  Every
coupling coefficient is non-negative, so no catastrophic cancellation
occurs and orthogonality survives to large ``j``; the alternating sum
:func:`d_element_series` is kept as an independently testable reference
for small and moderate spins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

__all__ = [
    "Spin",
    "DMatrix",
    "d_element_series",
    "d_matrix",
    "d_matrices",
    "apply_symmetry",
    "small_beta_leading",
]

TWO_PI = 2.0 * math.pi

#: orthogonality-defect gate guaranteed up to twice_j = 400
ORTHOGONALITY_GATE = 1e-10
ORTHOGONALITY_GATE_MAX_TWICE_J = 400


@dataclass(frozen=True)
class Spin:
    """Total angular momentum ``j`` stored as the integer ``2j``."""

    twice_j: int

    def __post_init__(self) -> None:
        if not isinstance(self.twice_j, int) or self.twice_j < 0:
            raise ValueError(f"twice_j must be a non-negative integer, got {self.twice_j!r}")

    @classmethod
    def from_j(cls, j) -> "Spin":
        """Build from ``j`` given as int, float, Fraction or a string like '1/2'."""
        if isinstance(j, str):
            j = Fraction(j)
        frac = Fraction(j).limit_denominator(2)
        if frac.denominator not in (1, 2) or Fraction(j) != frac or frac < 0:
            raise ValueError(f"j must be a non-negative half-integer, got {j!r}")
        return cls(int(frac * 2))

    @property
    def j(self) -> float:
        return self.twice_j / 2.0

    @property
    def dim(self) -> int:
        return self.twice_j + 1

    @property
    def big_j(self) -> float:
        """The shifted momentum j + 1/2."""
        return (self.twice_j + 1) / 2.0

    def twice_m_values(self) -> np.ndarray:
        """All magnetic quantum numbers (doubled), descending from +2j to -2j."""
        return np.arange(self.twice_j, -self.twice_j - 1, -2)

    def index_of(self, twice_m: int) -> int:
        """Row/column index of magnetic number ``twice_m`` in the descending layout."""
        self.check_magnetic(twice_m)
        return (self.twice_j - twice_m) // 2

    def check_magnetic(self, twice_m: int) -> None:
        if not isinstance(twice_m, (int, np.integer)):
            raise ValueError(f"twice_m must be an integer, got {twice_m!r}")
        if abs(twice_m) > self.twice_j:
            raise ValueError(f"|m| exceeds j: twice_m={twice_m}, twice_j={self.twice_j}")
        if (twice_m - self.twice_j) % 2 != 0:
            raise ValueError(
                f"m and j must differ by an integer: twice_m={twice_m}, twice_j={self.twice_j}"
            )

    def __str__(self) -> str:
        if self.twice_j % 2 == 0:
            return str(self.twice_j // 2)
        return f"{self.twice_j}/2"


@dataclass(frozen=True)
class DMatrix:
    """Dense rotation matrix ``d(beta)`` tagged with its spin and angle.

    ``elems[row, col]`` holds the amplitude from ket ``m`` (column) to bra
    ``n`` (row), with both indices descending from ``+j``.
    """

    spin: Spin
    beta: float
    elems: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        dim = self.spin.dim
        if self.elems.shape != (dim, dim):
            raise ValueError(f"expected shape {(dim, dim)}, got {self.elems.shape}")
        self.elems.setflags(write=False)

    def element(self, twice_m: int, twice_n: int) -> float:
        """Single amplitude for ket ``m``, bra ``n``."""
        return float(self.elems[self.spin.index_of(twice_n), self.spin.index_of(twice_m)])

    def orthogonality_defect(self) -> float:
        """max |d d^T - I|; the build guarantees <= 1e-10 for 2j <= 400."""
        dim = self.spin.dim
        return float(np.max(np.abs(self.elems @ self.elems.T - np.eye(dim))))

    def prob_matrix(self) -> np.ndarray:
        """Transition probabilities |d|^2 (rows: final n, columns: initial m)."""
        return self.elems * self.elems


def _log_factorial(n: int) -> float:
    return math.lgamma(n + 1)


def d_element_series(spin: Spin, twice_m: int, twice_n: int, beta: float) -> float:
    """Alternating-series reference evaluation of one matrix element.

    The series is a homogeneous polynomial of degree 2j in cos(beta/2) and
    sin(beta/2).  Both trig values are dyadic rationals once rounded to
    float, so the alternating sum is carried out exactly over rationals
    and rounded once at the end; the only residual error is the O(j * ulp)
    sensitivity to rounding beta/2 itself.  Intended as the reference
    oracle for small and moderate spins (absolute error well below 1e-10
    for 2j <= 60; beyond that the exactly summed cancellation makes the
    big-integer arithmetic increasingly expensive and the coupling
    recurrence of :func:`d_matrix` is the right tool).  Requires beta in
    [0, pi]; reduce other angles with :func:`apply_symmetry` first.
    """
    spin.check_magnetic(twice_m)
    spin.check_magnetic(twice_n)
    if not 0.0 <= beta <= math.pi:
        raise ValueError(f"series evaluation needs beta in [0, pi], got {beta}")

    tj, tm, tn = spin.twice_j, twice_m, twice_n
    jpm = (tj + tm) // 2
    jmm = (tj - tm) // 2
    jpn = (tj + tn) // 2
    jmn = (tj - tn) // 2
    nm = (tn - tm) // 2  # n - m, an integer

    half = 0.5 * beta
    c = Fraction(math.cos(half))
    s = Fraction(math.sin(half))
    pref = (
        math.factorial(jpm) * math.factorial(jmm) * math.factorial(jpn) * math.factorial(jmn)
    )

    total = Fraction(0)
    for k in range(max(0, -nm), min(jpm, jmn) + 1):
        pow_cos = (2 * tj + tm - tn) // 2 - 2 * k  # 2j + m - n - 2s
        pow_sin = nm + 2 * k  # n - m + 2s
        if (c == 0 and pow_cos > 0) or (s == 0 and pow_sin > 0):
            continue
        den = (
            math.factorial(jpm - k)
            * math.factorial(k)
            * math.factorial(nm + k)
            * math.factorial(jmn - k)
        )
        term = Fraction(1, den) * c**pow_cos * s**pow_sin
        total += -term if (nm + k) % 2 else term
    if total == 0:
        return 0.0
    value = math.sqrt(float(pref * total * total))
    return -value if total < 0 else value


def apply_symmetry(spin: Spin, twice_m: int, twice_n: int, beta: float):
    """Reduce (m, n, beta) to canonical indices and angle in [0, pi].

    Returns ``(twice_m', twice_n', beta', sign)`` with
    ``d[m -> n](beta) = sign * d[m' -> n'](beta')``, using 2pi-periodicity
    (a factor (-1)^(2j) per full turn), the transpose relation
    ``d[m -> n](-beta) = d[n -> m](beta)``, and their composition for
    angles in (pi, 2pi).
    """
    spin.check_magnetic(twice_m)
    spin.check_magnetic(twice_n)
    sign = 1
    turn_sign = -1 if spin.twice_j % 2 else 1

    turns = math.floor(beta / TWO_PI)
    reduced = beta - TWO_PI * turns
    if reduced >= TWO_PI:  # guard against rounding at the seam
        reduced -= TWO_PI
        turns += 1
    if turns % 2:
        sign *= turn_sign

    if reduced > math.pi:
        # d(beta0) = (-1)^(2j) d(beta0 - 2pi) = (-1)^(2j) d[n -> m](2pi - beta0)
        reduced = TWO_PI - reduced
        twice_m, twice_n = twice_n, twice_m
        sign *= turn_sign
    return twice_m, twice_n, reduced, sign


def small_beta_leading(spin: Spin, twice_m: int, twice_n: int, beta: float) -> float:
    """Leading small-angle term of a matrix element.

    With a = max(m, n) and b = min(m, n) this is

        sqrt[(j+a)!(j-b)! / ((j+b)!(j-a)!)] * (-1)^(a-b)/(a-b)! * (beta/2)^(a-b),

    evaluated with log-domain factorials.  The prefactor sign matches the
    exact element for n >= m; for m > n only the magnitude is meaningful
    (the exact element carries no alternating sign there).
    """
    spin.check_magnetic(twice_m)
    spin.check_magnetic(twice_n)
    ta, tb = max(twice_m, twice_n), min(twice_m, twice_n)
    tj = spin.twice_j
    k = (ta - tb) // 2  # a - b, an integer >= 0
    if k == 0:
        return 1.0
    log_mag = 0.5 * (
        _log_factorial((tj + ta) // 2)
        + _log_factorial((tj - tb) // 2)
        - _log_factorial((tj + tb) // 2)
        - _log_factorial((tj - ta) // 2)
    ) - _log_factorial(k)
    if beta == 0.0:
        return 0.0
    log_mag += k * math.log(abs(beta) / 2.0)
    return (-1.0) ** (k % 2) * math.exp(log_mag)


def _couple_up(block: np.ndarray, cos_h: np.ndarray, sin_h: np.ndarray) -> np.ndarray:
    """One half-spin coupling step on a batch of matrices.

    ``block`` has shape (B, K, K) holding d-matrices of dimension K for B
    angles; the result has shape (B, K+1, K+1).  ``cos_h``/``sin_h`` are
    cos(beta/2), sin(beta/2) per batch entry.
    """
    nb, k, _ = block.shape
    a = np.sqrt(np.arange(k, 0, -1) / k)  # a[r] = sqrt((K - r)/K), r = 0..K-1
    b = np.sqrt(np.arange(1, k + 1) / k)  # b[r+1] = sqrt((r+1)/K)
    out = np.zeros((nb, k + 1, k + 1))
    ch = cos_h[:, None, None]
    sh = sin_h[:, None, None]
    aa = np.outer(a, a)[None, :, :]
    ab = np.outer(a, b)[None, :, :]
    ba = np.outer(b, a)[None, :, :]
    bb = np.outer(b, b)[None, :, :]
    out[:, :k, :k] += ch * aa * block
    out[:, :k, 1:] += -sh * ab * block
    out[:, 1:, :k] += sh * ba * block
    out[:, 1:, 1:] += ch * bb * block
    return out


def _chain_numpy(twice_j: int, cos_h: np.ndarray, sin_h: np.ndarray) -> np.ndarray:
    block = np.ones((cos_h.size, 1, 1))
    for _ in range(twice_j):
        block = _couple_up(block, cos_h, sin_h)
    return block


try:  # fused kernel; the numpy chain above stays as the fallback
    import numba

    @numba.njit(cache=True)
    def _chain_single(twice_j: int, ch: float, sh: float) -> np.ndarray:  # pragma: no cover
        dim = twice_j + 1
        cur = np.zeros((dim, dim))
        nxt = np.zeros((dim, dim))
        cur[0, 0] = 1.0
        a = np.empty(dim)
        b = np.empty(dim)
        for k in range(1, twice_j + 1):
            kk = float(k)
            for r in range(k + 1):
                a[r] = math.sqrt((k - r) / kk)
                b[r] = math.sqrt(r / kk)
            for r in range(k + 1):
                ca = ch * a[r]
                cb = ch * b[r]
                sa = sh * a[r]
                sb = sh * b[r]
                for col in range(k + 1):
                    v = 0.0
                    if r < k and col < k:
                        v += ca * a[col] * cur[r, col]
                    if r < k and col > 0:
                        v -= sa * b[col] * cur[r, col - 1]
                    if r > 0 and col < k:
                        v += sb * a[col] * cur[r - 1, col]
                    if r > 0 and col > 0:
                        v += cb * b[col] * cur[r - 1, col - 1]
                    nxt[r, col] = v
            cur, nxt = nxt, cur
        return cur

    def _chain(twice_j: int, cos_h: np.ndarray, sin_h: np.ndarray) -> np.ndarray:
        out = np.empty((cos_h.size, twice_j + 1, twice_j + 1))
        for i in range(cos_h.size):
            out[i] = _chain_single(twice_j, float(cos_h[i]), float(sin_h[i]))
        return out

except ImportError:  # pragma: no cover
    _chain = _chain_numpy


def d_matrices(spin: Spin, betas) -> np.ndarray:
    """Full d-matrices for a batch of angles; shape (len(betas), dim, dim).

    Valid for any real angle: the coupling recurrence realizes the exact
    group element, including the (-1)^(2j) sign per full turn for
    half-integer spins.
    """
    betas = np.atleast_1d(np.asarray(betas, dtype=float))
    half = 0.5 * betas
    return _chain(spin.twice_j, np.cos(half), np.sin(half))


def d_matrix(spin: Spin, beta: float) -> DMatrix:
    """Full rotation matrix for one angle."""
    elems = d_matrices(spin, [beta])[0]
    return DMatrix(spin=spin, beta=float(beta), elems=elems)
