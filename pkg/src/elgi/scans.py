"""Reproducible experiment drivers.

Every scan returns a :class:`ScanResult`: a self-describing table (ordered
columns, one row per grid point or probe) plus the metadata needed to
regenerate it from the command line.  Serializations are deterministic:
identical inputs give byte-identical CSV/JSON output (timestamps are only
included on request).
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .cone import (
    elemental_inequalities,
    evaluate_family,
    project_to_order,
    remove_redundant,
    second_order_chain,
)
from .semiclassics import (
    RegionTag,
    d_wkb,
    discriminant,
    entropy_asymptotic,
    radial_distance,
    reduced_indices,
)
from .temporal import (
    InitialState,
    Schedule,
    all_subsets,
    entropy_vector,
    mixed_entropy_vector,
    wigner_entropy,
)
from .wigner import Spin, d_matrix

__all__ = [
    "GridSpec",
    "ScanResult",
    "breakdown_half_width",
    "breakdown_windows",
    "scan_order_violations",
    "scan_asymptote_convergence",
    "asymptote_convergence_sweep",
    "scan_region_map",
    "scan_singular_growth",
    "scan_wkb_error",
    "envelope_probe",
    "forbidden_margin_probe",
    "allowed_fraction",
]

#: breakdown windows are this many J^(-2/3) wide (at least 0.1 rad); the
#: boundary-layer corrections to the entropy asymptote still exceed 0.1 nats
#: at 5 J^(-2/3) from a multiple of pi, so a wider default is used
WINDOW_COEFF = 10.0


@dataclass(frozen=True)
class GridSpec:
    """Uniform parameter grid with exclusion windows."""

    name: str
    start: float
    stop: float
    points: int
    exclusions: tuple[tuple[float, float], ...] = ()  # (center, half_width)

    def __post_init__(self) -> None:
        if not self.start < self.stop:
            raise ValueError("grid start must be below stop")
        if self.points < 2:
            raise ValueError("grid needs at least 2 points")

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.points)

    def excluded(self, value: float) -> bool:
        return any(abs(value - c) < w for c, w in self.exclusions)


@dataclass
class ScanResult:
    """Self-describing scan output: metadata, column names, rows."""

    meta: dict
    columns: list[str]
    rows: list[list] = field(default_factory=list)

    def add(self, *values) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"expected {len(self.columns)} values, got {len(values)}")
        self.rows.append(list(values))

    def column(self, name: str) -> list:
        idx = self.columns.index(name)
        return [row[idx] for row in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        for key, val in sorted(self.meta.items()):
            writer.writerow([f"# {key}", _cell(val)])
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_cell(v) for v in row])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(
            {"meta": self.meta, "columns": self.columns, "rows": self.rows},
            separators=(",", ": "),
            indent=1,
        )

    @classmethod
    def from_json(cls, text: str) -> "ScanResult":
        payload = json.loads(text)
        return cls(meta=payload["meta"], columns=payload["columns"], rows=payload["rows"])

    def write(self, path: str, fmt: str = "csv") -> None:
        with open(path, "w") as fh:
            fh.write(self.to_csv() if fmt == "csv" else self.to_json())


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _meta(scan: str, **kwargs) -> dict:
    meta = {"scan": scan, "version": __version__}
    meta.update(kwargs)
    return meta


def _pmap(fn, items, threads: int = 1) -> list:
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# breakdown windows


def breakdown_half_width(spin: Spin, coeff: float = WINDOW_COEFF) -> float:
    """Half-width of the exclusion window around multiples of pi."""
    return max(0.1, coeff * spin.big_j ** (-2.0 / 3.0))


def breakdown_windows(
    spin: Spin, angle_coeffs, lo: float, hi: float, coeff: float = WINDOW_COEFF
) -> tuple[tuple[float, float], ...]:
    """Exclusion windows in grid space for composite angles c * beta.

    A grid value beta is excluded when any involved angle c * beta lies
    within the breakdown half-width of a multiple of pi.
    """
    w = breakdown_half_width(spin, coeff)
    out = []
    for c in angle_coeffs:
        k = 0
        while k * math.pi / c <= hi + w / c:
            center = k * math.pi / c
            if center >= lo - w / c:
                out.append((center, w / c))
            k += 1
    return tuple(sorted(set(out)))


# ---------------------------------------------------------------------------
# order-resolved violation landscape (equally spaced schedules)


def scan_order_violations(
    spin: Spin,
    n: int,
    dt_grid: GridSpec | None = None,
    state: InitialState | None = None,
    threads: int = 1,
) -> ScanResult:
    """Evaluate every order-k family (k = 2..n) on equally spaced schedules.

    One row per grid value of the inter-measurement angle; emits each
    member's value plus the per-order family minima.  The default grid has
    512 points on (0, pi); the default state is maximally mixed.
    """
    if n not in (3, 4):
        raise ValueError(f"the landscape scan supports n in {{3, 4}}, got {n}")
    if dt_grid is None:
        dt_grid = GridSpec("dt", 0.02, math.pi, 512)
    families = {}
    elem = elemental_inequalities(n)
    for order in range(2, n + 1):
        fam = project_to_order(elem, order) if order < n else remove_redundant(elem).relabeled(f"n{n}o{n}")
        families[order] = fam
    subsets = all_subsets(n)
    mixed = state is None or state.is_maximally_mixed

    columns = ["dt"]
    for order in sorted(families):
        columns.append(f"min_order{order}")
    member_cols = []
    for order in sorted(families):
        for m in families[order].members:
            member_cols.append((order, m))
            columns.append(f"o{order}:{m.label}")

    def row_for(dt: float):
        sched = Schedule.equally_spaced(n, dt)
        if mixed:
            h = mixed_entropy_vector(spin, sched, subsets)
        else:
            h = entropy_vector(state, sched, subsets)
        values = {}
        minima = {}
        for order, fam in families.items():
            reports = evaluate_family(fam, h)
            for rep in reports:
                values[(order, rep.label)] = rep.value
            minima[order] = min(rep.value for rep in reports)
        row = [dt]
        for order in sorted(families):
            row.append(minima[order])
        for order, m in member_cols:
            row.append(values[(order, m.label)])
        return row

    result = ScanResult(
        meta=_meta(
            "order-violations",
            twice_j=spin.twice_j,
            n=n,
            state="mixed" if mixed else "diagonal",
            grid=f"{dt_grid.start}:{dt_grid.stop}:{dt_grid.points}",
            family_sizes={k: len(v) for k, v in families.items()},
        ),
        columns=columns,
    )
    for row in _pmap(row_for, [float(x) for x in dt_grid.values()], threads):
        result.rows.append(row)
    devi = families[2].find(second_order_chain(n, 1, 2, 3))
    result.meta["devi_label"] = devi.label if devi else None
    return result


# ---------------------------------------------------------------------------
# asymptote convergence for the three-time adjacent-pair value


def scan_asymptote_convergence(
    spin: Spin,
    grid: GridSpec | None = None,
    window_coeff: float = WINDOW_COEFF,
    threads: int = 1,
) -> ScanResult:
    """Exact adjacent-pair value vs its large-spin limit on a beta grid.

    Three times with angles (0, 2 beta, 3 beta): the exact maximally mixed
    value is H_j(3 beta) - H_j(beta) and the limit is ln|sin(3 beta) /
    sin(beta)| (one row also carries the opposite-sign variant; see the
    package notes on the sign conventions found in the literature).  Grid
    points whose composite angles fall in a breakdown window are flagged
    and their deviation column is withheld.
    """
    if grid is None:
        grid = GridSpec(
            "beta", 0.0, math.pi, 512,
            exclusions=breakdown_windows(spin, (1, 3), 0.0, math.pi, window_coeff),
        )

    def row_for(beta: float):
        if grid.excluded(beta):
            return [beta, True, None, None, None, None]
        d23 = wigner_entropy(spin, 3 * beta) - wigner_entropy(spin, beta)
        asym = math.log(abs(math.sin(3 * beta) / math.sin(beta)))
        return [beta, False, d23, asym, -asym, abs(d23 - asym)]

    result = ScanResult(
        meta=_meta(
            "asymptote-convergence",
            twice_j=spin.twice_j,
            grid=f"{grid.start}:{grid.stop}:{grid.points}",
            window_coeff=window_coeff,
        ),
        columns=["beta", "excluded", "d23", "asymptote", "asymptote_flipped", "deviation"],
    )
    for row in _pmap(row_for, [float(x) for x in grid.values()], threads):
        result.rows.append(row)
    return result


def asymptote_convergence_sweep(
    spins, points: int = 512, window_coeff: float = WINDOW_COEFF, threads: int = 1
) -> ScanResult:
    """Max deviation per spin on a shared grid (windows of the largest spin).

    Sharing one exclusion set makes the maxima comparable, so convergence
    shows up as a monotonically decreasing column.
    """
    spins = sorted(spins, key=lambda s: s.twice_j)
    widest = spins[-1]
    grid = GridSpec(
        "beta", 0.0, math.pi, points,
        exclusions=breakdown_windows(widest, (1, 3), 0.0, math.pi, window_coeff),
    )
    result = ScanResult(
        meta=_meta("asymptote-convergence-sweep", points=points, window_coeff=window_coeff),
        columns=["twice_j", "max_deviation", "kept_points"],
    )
    for spin in spins:
        sub = scan_asymptote_convergence(spin, grid, window_coeff, threads)
        devs = [row[5] for row in sub.rows if not row[1]]
        result.add(spin.twice_j, max(devs), len(devs))
    return result


# ---------------------------------------------------------------------------
# allowed/forbidden region map


def allowed_fraction(spin: Spin, beta: float) -> float:
    """Fraction of (m, n) grid points with positive discriminant."""
    mus = spin.twice_m_values() / (spin.twice_j + 1)
    grid_mu, grid_nu = np.meshgrid(mus, mus, indexing="ij")
    r = np.sin(beta) ** 2 - grid_mu**2 - grid_nu**2 + 2 * grid_mu * grid_nu * np.cos(beta)
    return float(np.mean(r > 0))


def scan_region_map(spin: Spin, betas, eps: float | None = None) -> ScanResult:
    """|d|^2 over the full (m, n) grid with region tags, one block per angle."""
    betas = [float(b) for b in betas]
    result = ScanResult(
        meta=_meta(
            "region-map",
            twice_j=spin.twice_j,
            betas=betas,
            allowed_fraction={repr(b): allowed_fraction(spin, b) for b in betas},
            target_fraction={repr(b): math.pi * abs(math.sin(b)) / 4 for b in betas},
        ),
        columns=["beta", "twice_m", "twice_n", "dsq", "radial_dist", "region"],
    )
    tvals = [int(t) for t in spin.twice_m_values()]
    for beta in betas:
        w = d_matrix(spin, beta).prob_matrix()
        for i_n, tn in enumerate(tvals):
            for i_m, tm in enumerate(tvals):
                region = classify_str(spin, tm, tn, beta, eps)
                result.add(
                    beta, tm, tn, float(w[i_n, i_m]),
                    radial_distance(spin, tm, tn, beta), region,
                )
    return result


def classify_str(spin: Spin, tm: int, tn: int, beta: float, eps: float | None = None) -> str:
    from .semiclassics import classify_region

    return classify_region(spin, tm, tn, beta, eps).value


# ---------------------------------------------------------------------------
# singular-regime growth


def scan_singular_growth(spins, beta23: float = 1.0) -> ScanResult:
    """Adjacent-pair violation when the outer angle hits pi exactly.

    With angles (0, pi - beta23, pi) the maximally mixed value collapses
    to -H_j(beta23); the ratio column divides by ln(2j+1), the entropy of
    the state.  Companion rows displace the outer angle by delta in
    {1/J, J^(-2/3), 0.1} on both sides to expose the width of the window
    in which the collapse happens.
    """
    if not 0.0 < beta23 < math.pi:
        raise ValueError("beta23 must lie in (0, pi)")
    result = ScanResult(
        meta=_meta("singular-growth", beta23=beta23),
        columns=["twice_j", "case", "beta13", "d23", "ratio"],
    )
    for spin in sorted(spins, key=lambda s: s.twice_j):
        log_dim = math.log(spin.dim)
        big_j = spin.big_j

        def d23_at(beta13: float) -> float:
            return wigner_entropy(spin, beta13) - wigner_entropy(spin, beta23)

        val = d23_at(math.pi)
        result.add(spin.twice_j, "pi", math.pi, val, val / log_dim)
        for label, delta in (("1/J", 1.0 / big_j), ("J^-2/3", big_j ** (-2.0 / 3.0)), ("0.1", 0.1)):
            for sign in (+1.0, -1.0):
                b13 = math.pi + sign * delta
                if not b13 > beta23:
                    continue
                val = d23_at(b13)
                result.add(
                    spin.twice_j, f"pi{'+' if sign > 0 else '-'}{label}", b13, val, val / log_dim
                )
    return result


# ---------------------------------------------------------------------------
# semiclassical validation harness


def envelope_probe(
    spin: Spin,
    beta: float,
    n_windows: int = 20,
    half_width: int = 16,
    zeta_min: float = 2.0,
    phase_aware: bool = True,
    step_margin: float = 0.3,
    seed: int = 0,
    prob_matrix: np.ndarray | None = None,
) -> list[float]:
    """Relative errors of windowed |d|^2 averages against the WKB form.

    Windows of 2*half_width+1 consecutive ket indices are drawn inside the
    allowed region (all points with zeta <= -zeta_min); the exact average
    is compared against the oscillatory form
    2 sin^2(J S + pi/4)/(pi J sqrt(R)) (phase_aware) or against its phase
    average 1/(pi J sqrt(R)).  Windows whose phase increment per site is
    too close to 0 or pi are skipped: there the window does not cover an
    oscillation and a local average is not defined.
    """
    rng = np.random.default_rng(seed)
    w = d_matrix(spin, beta).prob_matrix() if prob_matrix is None else prob_matrix
    tvals = spin.twice_m_values()
    big_j = spin.big_j
    errs: list[float] = []
    tries = 0
    while len(errs) < n_windows and tries < 500 * n_windows:
        tries += 1
        tm = int(rng.choice(tvals))
        tn = int(rng.choice(tvals))
        i_m = spin.index_of(tm)
        if i_m - half_width < 0 or i_m + half_width >= spin.dim:
            continue
        center = d_wkb(spin, tm, tn, beta)
        if center.region is not RegionTag.ALLOWED or center.zeta > -zeta_min or not center.reliable:
            continue
        model, exact, actions = [], [], []
        usable = True
        for di in range(-half_width, half_width + 1):
            tm2 = tm - 2 * di
            el = d_wkb(spin, tm2, tn, beta)
            if el.region is not RegionTag.ALLOWED or el.zeta > -zeta_min:
                usable = False
                break
            mu2, nu2 = reduced_indices(spin, tm2, tn)
            env = 1.0 / (math.pi * big_j * math.sqrt(discriminant(mu2, nu2, beta)))
            if phase_aware:
                env *= 2.0 * math.sin(big_j * el.action + math.pi / 4) ** 2
            model.append(env)
            exact.append(float(w[spin.index_of(tn), spin.index_of(tm2)]))
            actions.append(el.action)
        if not usable:
            continue
        steps = np.abs(np.diff(actions)) * big_j
        folded = np.mod(steps, math.pi)
        folded = np.minimum(folded, math.pi - folded)
        if folded.min() < step_margin:
            continue
        errs.append(abs(float(np.mean(exact)) / float(np.mean(model)) - 1.0))
    return errs


def forbidden_margin_probe(
    spin: Spin,
    beta: float,
    n_points: int = 60,
    zeta_min: float = 2.0,
    seed: int = 0,
    prob_matrix: np.ndarray | None = None,
) -> list[float]:
    """Ratios |d|^2 / [exp(2JS) / (2 pi J sqrt(-R))] at forbidden samples.

    Near 1 when the decay law holds; evaluated in log space so that deeply
    decayed (underflowed) elements simply contribute 0.
    """
    rng = np.random.default_rng(seed)
    w = d_matrix(spin, beta).prob_matrix() if prob_matrix is None else prob_matrix
    tvals = spin.twice_m_values()
    big_j = spin.big_j
    out: list[float] = []
    tries = 0
    while len(out) < n_points and tries < 500 * n_points:
        tries += 1
        tm = int(rng.choice(tvals))
        tn = int(rng.choice(tvals))
        el = d_wkb(spin, tm, tn, beta)
        if el.region is not RegionTag.FORBIDDEN or el.zeta < zeta_min or not el.reliable:
            continue
        wexact = float(w[spin.index_of(tn), spin.index_of(tm)])
        mu, nu = reduced_indices(spin, tm, tn)
        r = discriminant(mu, nu, beta)
        if wexact <= 0.0:
            out.append(0.0)
            continue
        log_margin = (
            math.log(wexact)
            + math.log(2.0 * math.pi * big_j * math.sqrt(-r))
            - 2.0 * big_j * el.action
        )
        out.append(math.exp(log_margin) if log_margin < 700 else math.inf)
    return out


def scan_wkb_error(
    spin: Spin,
    grid: GridSpec | None = None,
    n_windows: int = 12,
    seed: int = 0,
    window_coeff: float = WINDOW_COEFF,
    threads: int = 1,
) -> ScanResult:
    """Semiclassical error budget per angle.

    Columns: windowed-envelope error (max/median over sampled windows),
    worst forbidden-region margin, and the deviation of the exact entropy
    from its printed large-spin expression (withheld inside breakdown
    windows; note that expression carries a constant offset of about 1/2,
    see :func:`elgi.semiclassics.entropy_asymptotic`).
    """
    if grid is None:
        grid = GridSpec(
            "beta", 0.0, math.pi, 512,
            exclusions=breakdown_windows(spin, (1,), 0.0, math.pi, window_coeff),
        )

    def row_for(beta: float):
        if grid.excluded(beta):
            return [beta, True, None, None, None, None]
        w = d_matrix(spin, beta).prob_matrix()
        env = envelope_probe(spin, beta, n_windows=n_windows, seed=seed, prob_matrix=w)
        forb = forbidden_margin_probe(spin, beta, n_points=n_windows * 3, seed=seed, prob_matrix=w)
        p = w[w > 1e-300]
        exact_h = max(0.0, float(-np.dot(p, np.log(p)))) / spin.dim
        dev = abs(exact_h - entropy_asymptotic(spin, beta))
        return [
            beta,
            False,
            max(env) if env else None,
            float(np.median(env)) if env else None,
            max(forb) if forb else None,
            dev,
        ]

    result = ScanResult(
        meta=_meta(
            "wkb-error",
            twice_j=spin.twice_j,
            grid=f"{grid.start}:{grid.stop}:{grid.points}",
            n_windows=n_windows,
            seed=seed,
        ),
        columns=["beta", "excluded", "env_err_max", "env_err_median", "forbidden_margin_max", "entropy_dev"],
    )
    for row in _pmap(row_for, [float(x) for x in grid.values()], threads):
        result.rows.append(row)
    return result
