"""Figure rendering for scan results.

Each renderer consumes a :class:`~elgi.scans.ScanResult` produced by the
matching scan and writes one figure file next to the delimited output.
The scans themselves stay data-only; this module is the only place that
touches matplotlib.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .scans import ScanResult

__all__ = ["render", "RENDERERS"]

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _figure(width: float = 6.4):
    fig, ax = plt.subplots(figsize=(width, width * GOLDEN))
    ax.grid(True, alpha=0.3)
    return fig, ax


def _finish(fig, path: str) -> None:
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def render_order_violations(result: ScanResult, path: str) -> None:
    fig, ax = _figure()
    dt = result.column("dt")
    for col in result.columns:
        if col.startswith("min_order"):
            ax.plot(dt, result.column(col), label=col.replace("min_order", "order "))
    ax.axhline(0.0, color="k", lw=0.8)
    ax.set_xlabel(r"inter-measurement angle $\omega\,\Delta t$")
    ax.set_ylabel("family minimum (nats)")
    ax.set_title(f"violation landscape, n={result.meta.get('n')}, 2j={result.meta.get('twice_j')}")
    ax.legend()
    _finish(fig, path)


def render_asymptote_convergence(result: ScanResult, path: str) -> None:
    fig, ax = _figure()
    rows = [r for r in result.rows if not r[1]]
    beta = [r[0] for r in rows]
    ax.plot(beta, [r[2] for r in rows], ".", ms=2.5, label="exact")
    ax.plot(beta, [r[3] for r in rows], lw=1.0, label="large-spin limit")
    ax.set_xlabel(r"$\beta$")
    ax.set_ylabel("adjacent-pair value (nats)")
    ax.set_title(f"asymptote convergence, 2j={result.meta.get('twice_j')}")
    ax.legend()
    _finish(fig, path)


def render_region_map(result: ScanResult, path: str) -> None:
    betas = sorted({r[0] for r in result.rows})
    fig, axes = plt.subplots(
        1, len(betas), figsize=(3.2 * len(betas), 3.4), constrained_layout=True
    )
    if len(betas) == 1:
        axes = [axes]
    tj = int(result.meta.get("twice_j"))
    dim = tj + 1
    for ax, beta in zip(axes, betas):
        block = np.full((dim, dim), np.nan)
        for r in result.rows:
            if r[0] != beta:
                continue
            row = (tj - r[2]) // 2  # bra index
            col = (tj - r[1]) // 2  # ket index
            block[row, col] = r[3]
        with np.errstate(divide="ignore"):
            img = np.log10(np.maximum(block, 1e-60))
        extent = [tj / 2, -tj / 2, -tj / 2, tj / 2]
        pc = ax.imshow(img, extent=extent, vmin=-30, vmax=0, cmap="viridis")
        ax.set_title(rf"$\beta$ = {beta:.4f}")
        ax.set_xlabel("m")
        ax.set_ylabel("n")
    fig.colorbar(pc, ax=axes, label=r"$\log_{10} |d|^2$", shrink=0.85)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def render_singular_growth(result: ScanResult, path: str) -> None:
    fig, ax = _figure()
    cases = sorted({r[1] for r in result.rows})
    for case in cases:
        rows = [r for r in result.rows if r[1] == case]
        js = [r[0] / 2 for r in rows]
        ax.plot(js, [r[4] for r in rows], "o-", ms=3, label=case)
    ax.axhline(-1.0, color="k", lw=0.8, ls="--")
    ax.set_xscale("log")
    ax.set_xlabel("spin j")
    ax.set_ylabel("pair value / ln(2j+1)")
    ax.set_title(f"singular-regime growth, beta23={result.meta.get('beta23')}")
    ax.legend(fontsize=7)
    _finish(fig, path)


def render_wkb_error(result: ScanResult, path: str) -> None:
    fig, ax = _figure()
    rows = [r for r in result.rows if not r[1]]
    beta = [r[0] for r in rows]
    ax.plot(beta, [r[2] for r in rows], label="envelope error (max)")
    ax.plot(beta, [r[5] for r in rows], label="entropy deviation")
    ax.set_xlabel(r"$\beta$")
    ax.set_ylabel("error")
    ax.set_yscale("log")
    ax.set_title(f"semiclassical error budget, 2j={result.meta.get('twice_j')}")
    ax.legend()
    _finish(fig, path)


RENDERERS = {
    "order-violations": render_order_violations,
    "asymptote-convergence": render_asymptote_convergence,
    "region-map": render_region_map,
    "singular-growth": render_singular_growth,
    "wkb-error": render_wkb_error,
}


def render(result: ScanResult, path: str) -> None:
    """Dispatch on the scan kind recorded in the metadata."""
    kind = result.meta.get("scan")
    try:
        renderer = RENDERERS[kind]
    except KeyError:
        raise ValueError(f"no renderer for scan kind {kind!r}") from None
    renderer(result, path)
