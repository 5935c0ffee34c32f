"""Text, PGM and matplotlib renderings of local-solution fields and sweeps.

The ASCII alphabet is a compatibility contract::

    '#' +4   '+' +2   '.' 0   '-' -2   '=' -4   '?' anything else

Rows are printed top (``b = N``) to bottom so the picture matches the
usual orientation of the lattice.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .grid import BoundaryConfig, make_grid
from .messages import LocalSolutionField, Trace, estimates

ALPHABET = {4: "#", 2: "+", 0: ".", -2: "-", -4: "="}


def field_char(v) -> str:
    return ALPHABET.get(v, "?")


def render_ascii(field: LocalSolutionField, N: int, boundary: BoundaryConfig | None = None) -> str:
    """One character per interior site; with ``boundary``, the ring is drawn too."""
    lines = []
    if boundary is None:
        for b in range(N, 0, -1):
            lines.append("".join(field_char(field[(a, b)]) for a in range(1, N + 1)))
        return "\n".join(lines) + "\n"
    bd = boundary.as_dict()
    for b in range(N + 1, -1, -1):
        row = []
        for a in range(N + 2):
            if 1 <= a <= N and 1 <= b <= N:
                row.append(field_char(field[(a, b)]))
            else:
                row.append("P" if bd[(a, b)] > 0 else "M")
        lines.append("".join(row))
    return "\n".join(lines) + "\n"


def pgm_value(v: int) -> int:
    return int(math.floor((v + 4) * 255 / 8 + 0.5))


def render_pgm(field: LocalSolutionField, N: int) -> str:
    """Plain (P2) graymap, one pixel per interior site, top row first."""
    rows = [" ".join(str(pgm_value(field[(a, b)])) for a in range(1, N + 1))
            for b in range(N, 0, -1)]
    return f"P2\n{N} {N}\n255\n" + "\n".join(rows) + "\n"


# --------------------------------------------------------------------------
# Figures


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def plot_field(field: LocalSolutionField, boundary: BoundaryConfig, path, title: str = "") -> Path:
    """Local-solution map with the boundary ring drawn around it."""
    plt = _pyplot()
    N = boundary.N
    img = np.full((N + 2, N + 2), np.nan)
    for (a, b), s in boundary.as_dict().items():
        img[b, a] = 4 * s
    for (a, b), v in field.items():
        img[b, a] = v
    fig, ax = plt.subplots(figsize=(3 + 0.3 * N, 3 + 0.3 * N))
    im = ax.imshow(img, origin="lower", cmap="RdBu_r", vmin=-4, vmax=4)
    for (a, b), v in field.items():
        ax.text(a, b, f"{v:+d}" if v else "0", ha="center", va="center", fontsize=8)
    ax.add_patch(_pyplot_rect(0.5, 0.5, N, N))
    ax.set_xticks(range(N + 2))
    ax.set_yticks(range(N + 2))
    ax.set_xlabel("a")
    ax.set_ylabel("b")
    ax.set_title(title or boundary.to_string(), fontsize=9)
    fig.colorbar(im, ax=ax, ticks=[-4, -2, 0, 2, 4], shrink=0.8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def _pyplot_rect(x, y, w, h):
    from matplotlib.patches import Rectangle

    return Rectangle((x, y), w, h, fill=False, lw=1.5, ec="k")


def convergence_curve(trace: Trace, oracle: LocalSolutionField | None = None) -> dict[str, list[int]]:
    """Per iteration: messages changed since the previous one, and sites off the oracle."""
    h = trace.history
    changed = [0] + [int((h[n] != h[n - 1]).sum()) for n in range(1, len(h))]
    out = {"n": list(range(len(h))), "changed": changed}
    if oracle is not None:
        out["mismatched"] = [len(estimates(trace.state(n)).mismatches(oracle)) for n in range(len(h))]
    return out


def plot_convergence(trace: Trace, path, oracle: LocalSolutionField | None = None) -> Path:
    plt = _pyplot()
    curve = convergence_curve(trace, oracle)
    fig, ax = plt.subplots(figsize=(5, 3))
    ax.step(curve["n"], curve["changed"], where="mid", label="messages changed")
    if "mismatched" in curve:
        ax.step(curve["n"], curve["mismatched"], where="mid", label="sites off oracle")
    grid = trace.graph.grid
    if grid is not None:
        ax.axvline(2 * grid.N, color="0.5", ls="--", lw=1, label="2N")
    ax.set_xlabel("iteration n")
    ax.set_ylabel("count")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_stable_histogram(histograms: dict[int, dict], path) -> Path:
    """Bar chart of first-stable iterations, one group per ``N``, with the 2N bound."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5.5, 3.2))
    Ns = sorted(histograms)
    width = 0.8 / max(1, len(Ns))
    for k, N in enumerate(Ns):
        hist = {int(i): c for i, c in histograms[N].items() if i is not None and i != "None"}
        xs = np.array(sorted(hist), dtype=float)
        ax.bar(xs + k * width, [hist[int(i)] for i in xs], width=width, label=f"N={N}")
        ax.axvline(2 * N + k * width, color=f"C{k}", ls=":", lw=1)
    ax.set_xlabel("first stable iteration (dotted: 2N)")
    ax.set_ylabel("boundaries")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_regions(decomp, path) -> Path:
    """Region classes of a decomposition, coloured by their local-solution value."""
    from .regions import CLASS_VALUES

    g = make_grid(decomp.N)
    vals = {c: CLASS_VALUES[decomp.class_of(c)] for c in g.interior}
    return plot_field(LocalSolutionField(vals), decomp.boundary, path,
                      title=f"regions {decomp.boundary.to_string()}")
