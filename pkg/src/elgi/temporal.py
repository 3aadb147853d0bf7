"""Sequential-measurement statistics for a driven spin.

A measurement schedule fixes accumulated rotation angles ``beta_1 < ... <
beta_n``; measuring the z-projection at a subset of those times yields a
joint outcome distribution whose Shannon entropies (in nats) are the raw
material for the entropic inequalities in :mod:`elgi.cone`.

For the maximally mixed initial state every joint entropy collapses to
``ln(2j+1)`` plus a sum of Wigner-matrix entropies ``H_j`` over adjacent
measured pairs, which :func:`mixed_entropy_vector` exploits to sidestep
the exponentially large outcome arrays.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .wigner import Spin, d_matrices, d_matrix

__all__ = [
    "Schedule",
    "InitialState",
    "JointDistribution",
    "EntropyVector",
    "mask_from_indices",
    "indices_from_mask",
    "all_subsets",
    "subsets_of_order",
    "joint_distribution",
    "shannon_entropy",
    "wigner_entropy",
    "wigner_entropy_grid",
    "entropy_vector",
    "mixed_entropy_vector",
    "entropy_vector_from_global",
]

#: probabilities below this are treated as exact zeros before taking logs
PROB_FLOOR = 1e-300

#: refuse joint distributions with more outcome tuples than this
MAX_OUTCOMES = 10**8


# ---------------------------------------------------------------------------
# subset masks: bit (i - 1) set <=> time index i measured (1-based times)


def mask_from_indices(indices: Iterable[int]) -> int:
    mask = 0
    for i in indices:
        if i < 1:
            raise ValueError(f"time indices are 1-based, got {i}")
        mask |= 1 << (i - 1)
    return mask


def indices_from_mask(mask: int) -> tuple[int, ...]:
    """Measured time indices in ascending order."""
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def all_subsets(n: int) -> list[int]:
    """All nonempty subset masks of {1..n}, ascending as integers."""
    return list(range(1, 1 << n))


def subsets_of_order(n: int, order: int) -> list[int]:
    return [m for m in all_subsets(n) if bin(m).count("1") == order]


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Schedule:
    """Accumulated rotation angles of the n potential measurement times.

    Angles must be strictly increasing unless ``allow_equal`` is set
    (equal times are legitimate but collapse intervals to zero rotation,
    so they must be requested explicitly).
    """

    angles: tuple[float, ...]
    allow_equal: bool = False

    def __post_init__(self) -> None:
        if len(self.angles) < 2:
            raise ValueError("a schedule needs at least 2 times")
        object.__setattr__(self, "angles", tuple(float(a) for a in self.angles))
        diffs = np.diff(self.angles)
        if self.allow_equal:
            bad = diffs < 0
        else:
            bad = diffs <= 0
        if np.any(bad):
            raise ValueError(f"angles must be strictly increasing, got {self.angles}")

    @classmethod
    def from_times(cls, omega: float, times: Sequence[float], allow_equal: bool = False) -> "Schedule":
        return cls(tuple(omega * t for t in times), allow_equal=allow_equal)

    @classmethod
    def equally_spaced(cls, n: int, step: float) -> "Schedule":
        return cls(tuple(i * step for i in range(n)), allow_equal=(step == 0.0))

    @property
    def n(self) -> int:
        return len(self.angles)

    def beta(self, i: int, k: int) -> float:
        """Pairwise rotation angle between times i < k (1-based)."""
        if not 1 <= i < k <= self.n:
            raise ValueError(f"need 1 <= i < k <= {self.n}, got i={i}, k={k}")
        return self.angles[k - 1] - self.angles[i - 1]


@dataclass(frozen=True)
class InitialState:
    """Diagonal of the initial density operator in the z-basis.

    Only the diagonal enters the joint probabilities, so states are stored
    as probability vectors over m = +j ... -j.
    """

    spin: Spin
    diag: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        diag = np.asarray(self.diag, dtype=float)
        if diag.shape != (self.spin.dim,):
            raise ValueError(f"diag must have shape ({self.spin.dim},), got {diag.shape}")
        if np.any(diag < 0):
            raise ValueError("probabilities must be non-negative")
        if abs(diag.sum() - 1.0) > 1e-12:
            raise ValueError(f"diagonal must sum to 1 within 1e-12, got {diag.sum()!r}")
        object.__setattr__(self, "diag", diag)
        diag.setflags(write=False)

    @classmethod
    def maximally_mixed(cls, spin: Spin) -> "InitialState":
        return cls(spin, np.full(spin.dim, 1.0 / spin.dim))

    @classmethod
    def from_weights(cls, spin: Spin, weights: Sequence[float]) -> "InitialState":
        w = np.asarray(weights, dtype=float)
        total = w.sum()
        if total <= 0:
            raise ValueError("weights must have a positive sum")
        return cls(spin, w / total)

    @classmethod
    def from_density(cls, spin: Spin, rho: np.ndarray) -> "InitialState":
        """Accepts a density matrix; off-diagonal content is discarded."""
        rho = np.asarray(rho)
        if rho.shape != (spin.dim, spin.dim):
            raise ValueError(f"density matrix must be {spin.dim}x{spin.dim}")
        off = rho - np.diag(np.diag(rho))
        if np.max(np.abs(off)) > 1e-12:
            warnings.warn(
                "off-diagonal density-matrix entries do not affect sequential "
                "z-measurements and were dropped",
                stacklevel=2,
            )
        return cls(spin, np.real(np.diag(rho)).astype(float))

    @property
    def is_maximally_mixed(self) -> bool:
        return bool(np.allclose(self.diag, 1.0 / self.spin.dim, atol=1e-14))


@dataclass(frozen=True)
class JointDistribution:
    """Outcome distribution of one multi-time experiment.

    ``probs`` has one axis per measured time (ascending time order); index
    0 along each axis is m = +j, descending.
    """

    spin: Spin
    subset: int
    probs: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        total = float(self.probs.sum())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"joint distribution sums to {total!r}, expected 1 within 1e-9")
        self.probs.setflags(write=False)


def joint_distribution(state: InitialState, schedule: Schedule, subset: int) -> JointDistribution:
    """Joint outcome probabilities for measuring at the times in ``subset``.

    p(m_1, ..., m_k) = p(m_1) * prod |d[m_i -> m_{i+1}](beta between
    consecutive measured times)|^2; unmeasured intermediate times leave the
    system undisturbed and contribute nothing.
    """
    times = indices_from_mask(subset)
    if not times:
        raise ValueError("subset of measured times must be nonempty")
    if times[-1] > schedule.n:
        raise ValueError(f"subset {times} exceeds schedule length {schedule.n}")
    dim = state.spin.dim
    if dim ** len(times) > MAX_OUTCOMES:
        raise ValueError(
            f"{dim}^{len(times)} outcome tuples exceed the {MAX_OUTCOMES:.0e} limit; "
            "use mixed_entropy_vector for large systems"
        )
    probs = state.diag
    for prev, cur in zip(times, times[1:]):
        w = d_matrix(state.spin, schedule.beta(prev, cur)).prob_matrix()
        # w[next, prev]: append the new outcome axis on the right
        probs = probs[..., None] * w.T[(None,) * (probs.ndim - 1)]
    return JointDistribution(spin=state.spin, subset=subset, probs=probs)


def _entropy_from_probs(probs: np.ndarray) -> float:
    p = np.asarray(probs, dtype=float).ravel()
    p = p[p > PROB_FLOOR]
    # rounding can leave a point mass at 1 + 1ulp; entropy is never negative
    return max(0.0, float(-np.dot(p, np.log(p))))


def shannon_entropy(dist) -> float:
    """Shannon entropy in nats, with 0 ln 0 = 0."""
    if isinstance(dist, JointDistribution):
        return _entropy_from_probs(dist.probs)
    return _entropy_from_probs(dist)


def _fold_angle(beta: float) -> float:
    """Reduce to [0, pi/2] using the period-pi, even symmetry of H_j."""
    x = math.fmod(abs(beta), math.pi)
    return min(x, math.pi - x)


@functools.lru_cache(maxsize=4096)
def _wigner_entropy_cached(twice_j: int, folded_beta: float) -> float:
    w = d_matrices(Spin(twice_j), [folded_beta])[0]
    return _entropy_from_probs(w * w) / (twice_j + 1)


def wigner_entropy(spin: Spin, beta: float) -> float:
    """Average row entropy H_j of the transition matrix |d(beta)|^2.

    Satisfies 0 <= H_j <= ln(2j+1), H_j(0) = H_j(pi) = 0, and the
    symmetries H_j(beta) = H_j(-beta) = H_j(beta + pi), which are used to
    fold the angle before the (cached) evaluation.
    """
    return _wigner_entropy_cached(spin.twice_j, _fold_angle(beta))


def wigner_entropy_grid(spin: Spin, betas) -> np.ndarray:
    """H_j over a grid of angles, deduplicating folded angles via the cache."""
    betas = np.asarray(betas, dtype=float)
    out = np.array(
        [_wigner_entropy_cached(spin.twice_j, _fold_angle(float(b))) for b in betas.ravel()]
    )
    return out.reshape(betas.shape)


@dataclass(frozen=True)
class EntropyVector:
    """Joint entropies (nats) indexed by subset mask."""

    n: int
    values: dict[int, float]

    def get(self, subset: int) -> float:
        try:
            return self.values[subset]
        except KeyError:
            raise KeyError(
                f"no entropy recorded for subset {{{','.join(map(str, indices_from_mask(subset)))}}}"
            ) from None

    def masks(self) -> list[int]:
        return sorted(self.values)


def entropy_vector(
    state: InitialState, schedule: Schedule, subsets: Iterable[int]
) -> EntropyVector:
    """Joint entropies by explicit construction of each outcome array."""
    values = {
        s: shannon_entropy(joint_distribution(state, schedule, s)) for s in subsets
    }
    return EntropyVector(n=schedule.n, values=values)


def mixed_entropy_vector(spin: Spin, schedule: Schedule, subsets: Iterable[int]) -> EntropyVector:
    """Joint entropies of the maximally mixed state via the H_j shortcut.

    h(S) = ln(2j+1) + sum over consecutive measured pairs (s, s') in S of
    H_j(beta_{s,s'}); exact for the maximally mixed state and free of the
    exponential outcome blowup.
    """
    log_dim = math.log(spin.dim)
    values: dict[int, float] = {}
    for subset in subsets:
        times = indices_from_mask(subset)
        if not times:
            raise ValueError("subset of measured times must be nonempty")
        if times[-1] > schedule.n:
            raise ValueError(f"subset {times} exceeds schedule length {schedule.n}")
        h = log_dim
        for prev, cur in zip(times, times[1:]):
            h += wigner_entropy(spin, schedule.beta(prev, cur))
        values[subset] = h
    return EntropyVector(n=schedule.n, values=values)


def entropy_vector_from_global(joint: np.ndarray) -> EntropyVector:
    """Entropy vector of a single global distribution over n variables.

    This is the macrorealist reference construction: all subset entropies
    are marginals of one joint distribution, so the resulting vector lies
    in the Shannon cone by construction.
    """
    joint = np.asarray(joint, dtype=float)
    n = joint.ndim
    values: dict[int, float] = {}
    for subset in all_subsets(n):
        keep = [i - 1 for i in indices_from_mask(subset)]
        drop = tuple(ax for ax in range(n) if ax not in keep)
        values[subset] = _entropy_from_probs(joint.sum(axis=drop) if drop else joint)
    return EntropyVector(n=n, values=values)
