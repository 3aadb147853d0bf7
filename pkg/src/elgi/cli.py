"""Command-line interface.

Subcommands expose the d-matrix kernel (``dmat``), matrix entropies
(``entropy``), inequality families (``ineq list`` / ``ineq eval``) and the
scan drivers (``scan fig2|fig3|fig4|singularity|wkb-error``).  Output is
CSV (default) or a JSON envelope {meta, columns, rows}; scans can render a
figure next to the delimited output.

Exit codes: 0 success, 1 numeric-guarantee failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import math
import os
import re
import sys
from datetime import datetime, timezone
from fractions import Fraction

from .cone import (
    DEFAULT_TOLERANCE,
    elemental_inequalities,
    evaluate_family,
    family_to_text,
    project_to_order,
    remove_redundant,
)
from .scans import (
    GridSpec,
    ScanResult,
    breakdown_windows,
    scan_asymptote_convergence,
    scan_order_violations,
    scan_region_map,
    scan_singular_growth,
    scan_wkb_error,
    _meta,
)
from .semiclassics import entropy_asymptotic
from .temporal import InitialState, Schedule, all_subsets, entropy_vector, mixed_entropy_vector, wigner_entropy
from .wigner import ORTHOGONALITY_GATE, ORTHOGONALITY_GATE_MAX_TWICE_J, Spin, d_matrix

_PI_RE = re.compile(r"^([+-]?)(\d+(?:\.\d+)?|\d+/\d+)?\s*\*?\s*pi(?:\s*/\s*(\d+))?$")


def parse_angle(text: str) -> float:
    """Angles as decimals or pi-expressions like 'pi/3', '2pi/5', '-pi'."""
    s = text.strip().lower()
    match = _PI_RE.match(s)
    if match:
        sign, coeff, denom = match.groups()
        value = Fraction(coeff) if coeff else Fraction(1)
        if denom:
            value /= int(denom)
        if sign == "-":
            value = -value
        return float(value) * math.pi
    try:
        return float(s)
    except ValueError:
        raise ValueError(f"cannot parse angle {text!r} (use a decimal or e.g. 'pi/3')") from None


def parse_spin(text: str) -> Spin:
    """Spins as 'p/2' fractions, decimals, or integers."""
    try:
        return Spin.from_j(text.strip())
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"cannot parse spin {text!r} (use e.g. '2', '1/2' or '0.5')") from None


def parse_state(text: str, spin: Spin) -> InitialState:
    if text.strip().lower() == "mixed":
        return InitialState.maximally_mixed(spin)
    weights = [float(x) for x in text.split(",")]
    return InitialState.from_weights(spin, weights)


def _angles_list(text: str) -> list[float]:
    return [parse_angle(tok) for tok in text.split(",") if tok.strip()]


def _emit(result: ScanResult, args) -> None:
    if getattr(args, "timestamp", False):
        result.meta["timestamp"] = datetime.now(timezone.utc).isoformat()
    text = result.to_csv() if args.format == "csv" else result.to_json()
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    figure = getattr(args, "figure", None)
    if getattr(args, "plot", False) and not figure:
        if not args.output:
            raise ValueError("--plot needs --output (or pass --figure PATH)")
        base, _, _ = args.output.rpartition(".")
        figure = (base or args.output) + ".png"
    if figure:
        from .plots import render

        render(result, figure)


# ---------------------------------------------------------------------------


def cmd_dmat(args) -> int:
    spin = parse_spin(args.j)
    beta = parse_angle(args.beta)
    mat = d_matrix(spin, beta)
    defect = mat.orthogonality_defect()
    meta = _meta("dmat", twice_j=spin.twice_j, beta=beta, orthogonality_defect=defect)
    if args.element:
        tm = _twice_index(args.element[0], spin)
        tn = _twice_index(args.element[1], spin)
        result = ScanResult(meta=meta, columns=["twice_m", "twice_n", "value"])
        result.add(tm, tn, mat.element(tm, tn))
    else:
        labels = [
            f"m={t // 2}" if t % 2 == 0 else f"m={t}/2" for t in spin.twice_m_values()
        ]
        result = ScanResult(meta=meta, columns=["twice_n"] + labels)
        for tn, row in zip(spin.twice_m_values(), mat.elems):
            result.add(int(tn), *[float(v) for v in row])
    _emit(result, args)
    if args.check_orthogonality:
        within_gate = spin.twice_j > ORTHOGONALITY_GATE_MAX_TWICE_J or defect <= ORTHOGONALITY_GATE
        print(f"orthogonality defect: {defect:.3e}", file=sys.stderr)
        if not within_gate:
            return 1
    return 0


def _twice_index(text: str, spin: Spin) -> int:
    value = Fraction(text.strip())
    twice = value * 2
    if twice.denominator != 1:
        raise ValueError(f"magnetic index {text!r} must be a half-integer")
    tm = int(twice)
    spin.check_magnetic(tm)
    return tm


def cmd_entropy(args) -> int:
    spin = parse_spin(args.j)
    beta = parse_angle(args.beta)
    h = wigner_entropy(spin, beta)
    meta = _meta("entropy", twice_j=spin.twice_j, beta=beta)
    if args.with_asymptote:
        asym = entropy_asymptotic(spin, beta)
        result = ScanResult(meta=meta, columns=["beta", "entropy", "asymptote", "deviation"])
        result.add(beta, h, asym, abs(h - asym))
    else:
        result = ScanResult(meta=meta, columns=["beta", "entropy"])
        result.add(beta, h)
    _emit(result, args)
    return 0


def _family_for(n: int, order: int):
    elem = elemental_inequalities(n)
    if order >= n:
        return remove_redundant(elem).relabeled(f"n{n}o{n}")
    return project_to_order(elem, order)


def cmd_ineq(args) -> int:
    if args.ineq_cmd == "list":
        fam = _family_for(args.n, args.order if args.order else args.n)
        if args.format == "json":
            result = ScanResult(
                meta=_meta("ineq-list", n=fam.n, order=fam.order),
                columns=["label", "terms"],
            )
            for m in fam.members:
                result.add(m.label, str(m).split(" : ", 1)[1])
            _emit(result, args)
        else:
            text = family_to_text(fam)
            if args.output:
                with open(args.output, "w") as fh:
                    fh.write(text)
            else:
                sys.stdout.write(text)
        return 0

    # eval
    spin = parse_spin(args.j)
    angles = _angles_list(args.angles)
    sched = Schedule(tuple(angles))
    if sched.n != args.n:
        raise ValueError(f"--angles lists {sched.n} times but --n is {args.n}")
    state = parse_state(args.state, spin)
    fam = _family_for(args.n, args.order if args.order else args.n)
    subsets = all_subsets(args.n)
    if state.is_maximally_mixed:
        h = mixed_entropy_vector(spin, sched, subsets)
    else:
        h = entropy_vector(state, sched, subsets)
    reports = evaluate_family(fam, h, tol=args.tol)
    result = ScanResult(
        meta=_meta(
            "ineq-eval",
            n=args.n,
            order=fam.order,
            twice_j=spin.twice_j,
            angles=angles,
            state=args.state,
            tolerance=args.tol,
        ),
        columns=["label", "value", "violated"],
    )
    for rep in reports:
        result.add(rep.label, rep.value, rep.violated)
    _emit(result, args)
    return 0


def cmd_scan(args) -> int:
    threads = args.threads
    if args.scan_cmd == "fig2":
        spin = parse_spin(args.j)
        grid = GridSpec("dt", args.dt_min, args.dt_max, args.points)
        state = parse_state(args.state, spin)
        result = scan_order_violations(spin, args.n, grid, state, threads=threads)
    elif args.scan_cmd == "fig3":
        spin = parse_spin(args.j)
        grid = GridSpec(
            "beta", 0.0, math.pi, args.points,
            exclusions=breakdown_windows(spin, (1, 3), 0.0, math.pi),
        )
        result = scan_asymptote_convergence(spin, grid, threads=threads)
    elif args.scan_cmd == "fig4":
        spin = parse_spin(args.j)
        betas = _angles_list(args.betas)
        result = scan_region_map(spin, betas)
    elif args.scan_cmd == "singularity":
        spins = [parse_spin(tok) for tok in args.j_list.split(",") if tok.strip()]
        if not spins:
            raise ValueError("--j-list must name at least one spin")
        result = scan_singular_growth(spins, parse_angle(args.beta23))
    elif args.scan_cmd == "wkb-error":
        spin = parse_spin(args.j)
        grid = GridSpec(
            "beta", 0.0, math.pi, args.points,
            exclusions=breakdown_windows(spin, (1,), 0.0, math.pi),
        )
        result = scan_wkb_error(spin, grid, n_windows=args.windows, seed=args.seed, threads=threads)
    else:  # pragma: no cover
        raise ValueError(f"unknown scan {args.scan_cmd!r}")
    _emit(result, args)
    return 0


# ---------------------------------------------------------------------------


def _add_output_options(p, plot: bool = False) -> None:
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", help="write to this path instead of stdout")
    p.add_argument("--timestamp", action="store_true", help="stamp the metadata (breaks byte-determinism)")
    if plot:
        p.add_argument("--plot", action="store_true", help="render a figure next to the output")
        p.add_argument("--figure", help="explicit figure path (implies rendering)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="elgi",
        description="Entropic Leggett-Garg inequalities for driven spin-j systems",
    )
    default_threads = int(os.environ.get("ELGI_THREADS", "1"))
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dmat", help="rotation-matrix elements and orthogonality check")
    p.add_argument("--j", required=True, help="spin, e.g. 2, 1/2, 200")
    p.add_argument("--beta", required=True, help="angle (decimal or pi-expression)")
    p.add_argument("--element", nargs=2, metavar=("M", "N"), help="single element for ket m, bra n")
    p.add_argument("--check-orthogonality", action="store_true")
    _add_output_options(p)
    p.set_defaults(func=cmd_dmat)

    p = sub.add_parser("entropy", help="Wigner-matrix entropy H_j(beta)")
    p.add_argument("--j", required=True)
    p.add_argument("--beta", required=True)
    p.add_argument("--with-asymptote", action="store_true")
    _add_output_options(p)
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("ineq", help="inequality families: list or evaluate")
    ineq_sub = p.add_subparsers(dest="ineq_cmd", required=True)
    pl = ineq_sub.add_parser("list", help="generate, project and prune a family")
    pl.add_argument("--n", type=int, required=True, help="number of measurement times (2..8)")
    pl.add_argument("--order", type=int, default=0, help="target order (default: n)")
    _add_output_options(pl)
    pl.set_defaults(func=cmd_ineq)
    pe = ineq_sub.add_parser("eval", help="evaluate a family on a schedule")
    pe.add_argument("--n", type=int, required=True)
    pe.add_argument("--order", type=int, default=0)
    pe.add_argument("--angles", required=True, help="comma-separated accumulated angles")
    pe.add_argument("--j", required=True)
    pe.add_argument("--state", default="mixed", help="'mixed' or comma-separated diagonal weights")
    pe.add_argument("--tol", type=float, default=DEFAULT_TOLERANCE)
    _add_output_options(pe)
    pe.set_defaults(func=cmd_ineq)

    p = sub.add_parser("scan", help="reproducible parameter sweeps")
    p.add_argument("--threads", type=int, default=default_threads)
    scan_sub = p.add_subparsers(dest="scan_cmd", required=True)

    ps = scan_sub.add_parser("fig2", help="order-resolved violation landscape")
    ps.add_argument("--j", default="2")
    ps.add_argument("--n", type=int, choices=(3, 4), default=3)
    ps.add_argument("--dt-min", type=float, default=0.02)
    ps.add_argument("--dt-max", type=float, default=math.pi)
    ps.add_argument("--points", type=int, default=512)
    ps.add_argument("--state", default="mixed")
    _add_output_options(ps, plot=True)

    ps = scan_sub.add_parser("fig3", help="asymptote convergence for three times")
    ps.add_argument("--j", default="100")
    ps.add_argument("--points", type=int, default=512)
    _add_output_options(ps, plot=True)

    ps = scan_sub.add_parser("fig4", help="allowed/forbidden region map of |d|^2")
    ps.add_argument("--j", default="200")
    ps.add_argument("--betas", default="pi/12,pi/6,pi/3,pi/2")
    _add_output_options(ps, plot=True)

    ps = scan_sub.add_parser("singularity", help="growth of the violation at beta13 = pi")
    ps.add_argument("--beta23", default="1.0")
    ps.add_argument("--j-list", default="10,20,40,80,160")
    _add_output_options(ps, plot=True)

    ps = scan_sub.add_parser("wkb-error", help="semiclassical error budget per angle")
    ps.add_argument("--j", default="200")
    ps.add_argument("--points", type=int, default=512)
    ps.add_argument("--windows", type=int, default=12)
    ps.add_argument("--seed", type=int, default=0)
    _add_output_options(ps, plot=True)

    p.set_defaults(func=cmd_scan)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
