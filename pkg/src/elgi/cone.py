"""Shannon-type entropic inequalities over measurement-time subsets.

Inequalities are linear functionals ``sum_S c_S H(S) >= 0`` over nonempty
subsets of the n potential measurement times, with exact rational
coefficients throughout (floating point enters only at evaluation time).
The elemental set (conditional-entropy and conditional-mutual-information
non-negativity) generates the full cone; lower-order families are obtained
by exact Fourier-Motzkin elimination of the high-cardinality coordinates
followed by removal of members implied by the rest.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Optional, Sequence

from .rational_lp import nonneg_combination
from .temporal import EntropyVector, Schedule, indices_from_mask, mask_from_indices, wigner_entropy
from .wigner import Spin

__all__ = [
    "Inequality",
    "InequalityFamily",
    "ViolationReport",
    "FamilySizeLimitError",
    "elemental_inequalities",
    "project_to_order",
    "remove_redundant",
    "evaluate",
    "evaluate_family",
    "cond_entropy_inequality",
    "cond_mi_inequality",
    "second_order_chain",
    "mixed_cond_entropy_value",
    "mixed_cond_mi_value",
    "family_to_text",
    "family_from_text",
]

DEFAULT_TOLERANCE = 1e-9

MAX_VARIABLES = 8


class FamilySizeLimitError(RuntimeError):
    """Raised when Fourier-Motzkin elimination exceeds its member cap."""


def _subset_label(mask: int) -> str:
    return ",".join(str(i) for i in indices_from_mask(mask))


@dataclass(frozen=True)
class Inequality:
    """One inequality sum_S coeffs[S] * H(S) >= 0 with rational coefficients."""

    n: int
    coeffs: tuple[tuple[int, Fraction], ...]  # (mask, coefficient), mask-ascending
    label: str

    @classmethod
    def from_mapping(cls, n: int, coeffs: Mapping[int, Fraction | int], label: str) -> "Inequality":
        cleaned = []
        for mask, c in coeffs.items():
            c = Fraction(c)
            if c == 0:
                continue
            if not 1 <= mask < (1 << n):
                raise ValueError(f"subset mask {mask} out of range for n={n}")
            cleaned.append((mask, c))
        if not cleaned:
            raise ValueError("inequality must have at least one nonzero coefficient")
        cleaned.sort()
        return cls(n=n, coeffs=tuple(cleaned), label=label)

    def coeff_dict(self) -> dict[int, Fraction]:
        return dict(self.coeffs)

    @property
    def order(self) -> int:
        return max(bin(mask).count("1") for mask, _ in self.coeffs)

    def canonical_key(self) -> tuple[tuple[int, int], ...]:
        """Scale-invariant identity: coprime integer coefficients, mask-ascending.

        Only positive rescaling is allowed (a sign flip would reverse the
        inequality), so the key is unique per genuinely distinct member.
        """
        denom_lcm = 1
        for _, c in self.coeffs:
            denom_lcm = denom_lcm * c.denominator // math.gcd(denom_lcm, c.denominator)
        ints = [(mask, int(c * denom_lcm)) for mask, c in self.coeffs]
        g = 0
        for _, v in ints:
            g = math.gcd(g, abs(v))
        return tuple((mask, v // g) for mask, v in ints)

    def canonical(self, label: Optional[str] = None) -> "Inequality":
        key = self.canonical_key()
        return Inequality(
            n=self.n,
            coeffs=tuple((mask, Fraction(v)) for mask, v in key),
            label=self.label if label is None else label,
        )

    def vector(self, masks: Sequence[int]) -> list[Fraction]:
        """Coefficients as a dense vector over the given mask ordering."""
        d = self.coeff_dict()
        return [d.get(mask, Fraction(0)) for mask in masks]

    def __str__(self) -> str:
        return f"{self.label} : {_terms_text(self.coeffs)} >= 0"


@dataclass(frozen=True)
class InequalityFamily:
    """A deduplicated set of inequalities over the same n, sorted canonically."""

    n: int
    order: int
    members: tuple[Inequality, ...]

    @classmethod
    def from_members(cls, n: int, order: int, members: Iterable[Inequality]) -> "InequalityFamily":
        seen: dict[tuple, Inequality] = {}
        for m in members:
            if m.n != n:
                raise ValueError("family members must share the variable count")
            seen.setdefault(m.canonical_key(), m.canonical())
        ordered = tuple(seen[k] for k in sorted(seen))
        return cls(n=n, order=order, members=ordered)

    def __len__(self) -> int:
        return len(self.members)

    def keys(self) -> set[tuple]:
        return {m.canonical_key() for m in self.members}

    def find(self, other: Inequality) -> Optional[Inequality]:
        key = other.canonical_key()
        for m in self.members:
            if m.canonical_key() == key:
                return m
        return None

    def relabeled(self, prefix: str) -> "InequalityFamily":
        members = tuple(
            m.canonical(label=f"{prefix}_{i:03d}") for i, m in enumerate(self.members)
        )
        return InequalityFamily(n=self.n, order=self.order, members=members)


@dataclass(frozen=True)
class ViolationReport:
    label: str
    value: float
    violated: bool
    tolerance: float


def elemental_inequalities(n: int) -> InequalityFamily:
    """Minimal generating set of the Shannon cone on n variables.

    n members H(Q_i | rest) >= 0 plus C(n,2) * 2^(n-2) members
    I(Q_i; Q_j | Q_K) >= 0 over all conditioning sets K.
    """
    if not 2 <= n <= MAX_VARIABLES:
        raise ValueError(f"variable count must be in [2, {MAX_VARIABLES}], got {n}")
    full = (1 << n) - 1
    members = []
    for i in range(1, n + 1):
        bit = 1 << (i - 1)
        members.append(
            Inequality.from_mapping(
                n, {full: 1, full ^ bit: -1}, label=f"h({i}|{_subset_label(full ^ bit)})"
            )
        )
    for i, j in combinations(range(1, n + 1), 2):
        bi, bj = 1 << (i - 1), 1 << (j - 1)
        others = [k for k in range(1, n + 1) if k not in (i, j)]
        for r in range(len(others) + 1):
            for ks in combinations(others, r):
                km = mask_from_indices(ks)
                coeffs = {bi | km: Fraction(1), bj | km: Fraction(1)}
                coeffs[bi | bj | km] = coeffs.get(bi | bj | km, Fraction(0)) - 1
                if km:
                    coeffs[km] = coeffs.get(km, Fraction(0)) - 1
                cond = f"|{_subset_label(km)}" if km else ""
                members.append(
                    Inequality.from_mapping(n, coeffs, label=f"i({i};{j}{cond})")
                )
    return InequalityFamily.from_members(n, order=n, members=members)


def _elimination_order(n: int, keep_order: int) -> list[int]:
    """Masks to eliminate: highest cardinality first, lexicographic subsets within."""
    masks = [m for m in range(1, 1 << n) if bin(m).count("1") > keep_order]
    masks.sort(key=lambda m: (-bin(m).count("1"), indices_from_mask(m)))
    return masks


def project_to_order(
    family: InequalityFamily, order: int, max_members: int = 10**6
) -> InequalityFamily:
    """Project the cone onto coordinates of cardinality <= order.

    Exact Fourier-Motzkin elimination of every higher-cardinality
    coordinate, one at a time, followed by :func:`remove_redundant`.
    Raises :class:`FamilySizeLimitError` if an intermediate system grows
    past ``max_members``.
    """
    if not 1 <= order <= family.order:
        raise ValueError(f"target order must be in [1, {family.order}], got {order}")
    # each row carries its ancestor set and the eliminated coordinates used in
    # its derivation; Imbert's criterion (|ancestors| > 1 + |used coordinates|
    # implies redundancy) keeps the intermediate systems from exploding
    rows = [
        (m.coeff_dict(), frozenset([i]), frozenset())
        for i, m in enumerate(family.members)
    ]
    for mask in _elimination_order(family.n, order):
        zero_rows, pos_rows, neg_rows = [], [], []
        for row in rows:
            c = row[0].get(mask, Fraction(0))
            if c > 0:
                pos_rows.append(row)
            elif c < 0:
                neg_rows.append(row)
            else:
                zero_rows.append(row)
        if len(zero_rows) + len(pos_rows) * len(neg_rows) > max_members:
            raise FamilySizeLimitError(
                f"eliminating H{{{_subset_label(mask)}}} would exceed {max_members} members"
            )
        new_rows = zero_rows
        seen: set[tuple] = {_row_key(row[0]) for row in new_rows}
        for p, p_anc, p_used in pos_rows:
            cp = p[mask]
            for q, q_anc, q_used in neg_rows:
                anc = p_anc | q_anc
                used = p_used | q_used | {mask}
                if len(anc) > 1 + len(used):
                    continue
                cq = -q[mask]
                combined: dict[int, Fraction] = {}
                for r, scale in ((p, cq), (q, cp)):
                    for mk, c in r.items():
                        combined[mk] = combined.get(mk, Fraction(0)) + scale * c
                combined = {mk: c for mk, c in combined.items() if c != 0}
                if not combined or mask in combined:
                    continue
                key = _row_key(combined)
                if key not in seen:
                    seen.add(key)
                    new_rows.append((combined, anc, used))
        rows = new_rows
    members = [
        Inequality.from_mapping(family.n, row[0], label=f"fm_{i:04d}")
        for i, row in enumerate(rows)
    ]
    projected = InequalityFamily.from_members(family.n, order=order, members=members)
    pruned = remove_redundant(projected)
    return pruned.relabeled(f"n{family.n}o{order}")


def _row_key(row: dict[int, Fraction]) -> tuple:
    denom_lcm = 1
    for c in row.values():
        denom_lcm = denom_lcm * c.denominator // math.gcd(denom_lcm, c.denominator)
    ints = sorted((mask, int(c * denom_lcm)) for mask, c in row.items())
    g = 0
    for _, v in ints:
        g = math.gcd(g, abs(v))
    return tuple((mask, v // g) for mask, v in ints)


def remove_redundant(family: InequalityFamily) -> InequalityFamily:
    """Drop members that are non-negative rational combinations of the rest.

    Members are tested in canonical order with an exact phase-I simplex,
    so the surviving set is deterministic; for a full-dimensional cone it
    is the unique facet description.  Idempotent.
    """
    if not family.members:
        raise ValueError("family must be nonempty")
    masks = sorted({mask for m in family.members for mask, _ in m.coeffs})
    survivors = list(family.members)
    i = 0
    while i < len(survivors):
        candidate = survivors[i]
        others = survivors[:i] + survivors[i + 1 :]
        if others and nonneg_combination(
            [o.vector(masks) for o in others], candidate.vector(masks)
        ) is not None:
            survivors.pop(i)
        else:
            i += 1
    return InequalityFamily.from_members(family.n, order=family.order, members=survivors)


def evaluate(ineq: Inequality, h: EntropyVector, tol: float = DEFAULT_TOLERANCE) -> ViolationReport:
    """Evaluate one inequality on an entropy vector (nats)."""
    value = 0.0
    for mask, c in ineq.coeffs:
        value += float(c) * h.get(mask)
    return ViolationReport(label=ineq.label, value=value, violated=value < -tol, tolerance=tol)


def evaluate_family(
    family: InequalityFamily, h: EntropyVector, tol: float = DEFAULT_TOLERANCE
) -> list[ViolationReport]:
    return [evaluate(m, h, tol) for m in family.members]


def family_masks(family: InequalityFamily) -> list[int]:
    """All subset coordinates any member touches (for building entropy vectors)."""
    return sorted({mask for m in family.members for mask, _ in m.coeffs})


# ---------------------------------------------------------------------------
# named forms


def cond_entropy_inequality(n: int, i: int) -> Inequality:
    """H(Q_All) - H(Q_All minus {i}) >= 0, the conditional-entropy member."""
    if not 1 <= i <= n:
        raise ValueError(f"need 1 <= i <= {n}, got {i}")
    full = (1 << n) - 1
    rest = full ^ (1 << (i - 1))
    return Inequality.from_mapping(n, {full: 1, rest: -1}, label=f"h({i}|{_subset_label(rest)})")


def cond_mi_inequality(n: int, i: int, k: int) -> Inequality:
    """I(Q_i; Q_k | everything else) >= 0, the conditional-MI member."""
    if not (1 <= i <= n and 1 <= k <= n) or i == k:
        raise ValueError(f"need distinct indices in 1..{n}, got {i}, {k}")
    full = (1 << n) - 1
    bi, bk = 1 << (i - 1), 1 << (k - 1)
    rest = full ^ bi ^ bk
    coeffs = {full ^ bi: Fraction(1), full ^ bk: Fraction(1), full: Fraction(-1)}
    if rest:
        coeffs[rest] = Fraction(-1)
    cond = f"|{_subset_label(rest)}" if rest else ""
    return Inequality.from_mapping(n, coeffs, label=f"i({i};{k}{cond})")


def second_order_chain(n: int, i: int, mid: int, k: int) -> Inequality:
    """H(Q_i,Q_mid) + H(Q_mid,Q_k) - H(Q_mid) - H(Q_i,Q_k) >= 0.

    The second-order form singled out by Devi et al. for three times; a
    facet of the projected cone for every ordered triple.
    """
    if len({i, mid, k}) != 3:
        raise ValueError("indices must be distinct")
    bi, bm, bk = (1 << (i - 1), 1 << (mid - 1), 1 << (k - 1))
    return Inequality.from_mapping(
        n,
        {bi | bm: 1, bm | bk: 1, bm: -1, bi | bk: -1},
        label=f"chain({i};{k}|{mid})",
    )


# ---------------------------------------------------------------------------
# maximally mixed closed forms


def mixed_cond_entropy_value(spin: Spin, schedule: Schedule, i: int) -> float:
    """Closed-form value of the conditional-entropy member for the mixed state.

    Interior: H_j(beta_{i-1,i}) + H_j(beta_{i,i+1}) - H_j(beta_{i-1,i+1});
    at the ends only the single adjacent interval survives.
    """
    n = schedule.n
    if not 1 <= i <= n:
        raise ValueError(f"need 1 <= i <= {n}, got {i}")
    if i == 1:
        return wigner_entropy(spin, schedule.beta(1, 2))
    if i == n:
        return wigner_entropy(spin, schedule.beta(n - 1, n))
    return (
        wigner_entropy(spin, schedule.beta(i - 1, i))
        + wigner_entropy(spin, schedule.beta(i, i + 1))
        - wigner_entropy(spin, schedule.beta(i - 1, i + 1))
    )


def mixed_cond_mi_value(spin: Spin, schedule: Schedule, i: int, k: int) -> float:
    """Closed-form value of the conditional-MI member for the mixed state.

    Zero whenever the two times are not adjacent.  For adjacent pairs the
    value telescopes to a four-term (interior) or two-term (boundary)
    combination of H_j; the two-time scenario keeps its ln(2j+1) constant,
    which the definitional evaluation requires.
    """
    n = schedule.n
    if not (1 <= i <= n and 1 <= k <= n) or i == k:
        raise ValueError(f"need distinct indices in 1..{n}, got {i}, {k}")
    if i > k:
        i, k = k, i
    if k > i + 1:
        return 0.0
    hj = lambda a, b: wigner_entropy(spin, schedule.beta(a, b))
    if n == 2:
        return math.log(spin.dim) - hj(1, 2)
    if i == 1:
        return hj(1, 3) - hj(1, 2)
    if k == n:
        return hj(n - 2, n) - hj(n - 1, n)
    return hj(i, i + 2) + hj(i - 1, i + 1) - hj(i, i + 1) - hj(i - 1, i + 2)


# ---------------------------------------------------------------------------
# line-oriented text format: "<label> : c*H{1,2} + c*H{2} - ... >= 0"


def _frac_text(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _terms_text(coeffs: tuple[tuple[int, Fraction], ...]) -> str:
    parts = []
    for idx, (mask, c) in enumerate(coeffs):
        sign = "-" if c < 0 else "+"
        mag = _frac_text(abs(c))
        term = f"{mag}*H{{{_subset_label(mask)}}}"
        if idx == 0:
            parts.append(term if c > 0 else f"-{term}")
        else:
            parts.append(f"{sign} {term}")
    return " ".join(parts)


_TERM_RE = re.compile(r"([+-])?\s*(\d+(?:/\d+)?)\*H\{([\d,]+)\}")
_HEADER_RE = re.compile(r"#\s*vars=(\d+)\s+order=(\d+)")


def family_to_text(family: InequalityFamily) -> str:
    lines = [f"# vars={family.n} order={family.order}"]
    lines.extend(str(m) for m in family.members)
    return "\n".join(lines) + "\n"


def family_from_text(text: str) -> InequalityFamily:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty family text")
    header = _HEADER_RE.match(lines[0].strip())
    if not header:
        raise ValueError("missing '# vars=<n> order=<k>' header line")
    n, order = int(header.group(1)), int(header.group(2))
    members = []
    for ln in lines[1:]:
        label, _, rest = ln.partition(" : ")
        body, sep, tail = rest.rpartition(" >= ")
        if not sep or tail.strip() != "0":
            raise ValueError(f"malformed inequality line: {ln!r}")
        coeffs: dict[int, Fraction] = {}
        pos = 0
        for match in _TERM_RE.finditer(body):
            sign, mag, subset = match.groups()
            c = Fraction(mag)
            if sign == "-":
                c = -c
            mask = mask_from_indices(int(s) for s in subset.split(","))
            coeffs[mask] = coeffs.get(mask, Fraction(0)) + c
            pos += 1
        if not pos:
            raise ValueError(f"no terms parsed from line: {ln!r}")
        members.append(Inequality.from_mapping(n, coeffs, label=label.strip()))
    fam = InequalityFamily(n=n, order=order, members=tuple(members))
    return fam
