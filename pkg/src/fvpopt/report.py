"""Experiment outputs: delimited trajectories, summary document, figures.

The CSV and summary files are the deterministic interchange contract (two
identical invocations produce identical bytes); the rendered figures are a
convenience companion for eyeballing the convergence curves.
"""

import json

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

__all__ = ["write_csv", "write_summary", "render_figures"]

CSV_HEADER = "realization,n,error,residual"


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def write_csv(path, records) -> None:
    """One row per (realization, recorded index), sorted, 17 significant
    digits."""
    rows = []
    for rec in records:
        errs = rec.errors if rec.errors else [float("nan")] * len(rec.recorded_indices)
        for n, err, res in zip(rec.recorded_indices, errs, rec.residuals):
            rows.append((rec.realization_id, n, err, res))
    rows.sort(key=lambda r: (r[0], r[1]))
    with open(path, "w", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        for r, n, err, res in rows:
            fh.write(f"{r},{n},{_fmt(err)},{_fmt(res)}\n")


def write_summary(path, summary: dict) -> None:
    """Deterministic JSON summary document."""
    with open(path, "w", newline="\n") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


def render_figures(outdir, ensemble_summary, records=None,
                   prefix: str = "") -> list:
    """Render the MSE and almost-sure-proxy curves (and residuals, when
    records are given) as PNG files next to the CSV output."""
    outdir = str(outdir)
    paths = []

    ns = [n for n, _ in ensemble_summary.mse_curve]
    mse = [v for _, v in ensemble_summary.mse_curve]
    fig, ax = plt.subplots(figsize=(6, 4))
    positive = [(n, v) for n, v in zip(ns, mse) if n > 0 and v > 0]
    if positive:
        ax.loglog([n for n, _ in positive], [v for _, v in positive],
                  marker=".", lw=1)
    ax.set_xlabel("iteration n")
    ax.set_ylabel("mean squared error")
    ax.set_title("Mean-square convergence")
    ax.grid(True, which="both", alpha=0.3)
    p = f"{outdir}/{prefix}mse_curve.png"
    fig.savefig(p, dpi=120, bbox_inches="tight")
    plt.close(fig)
    paths.append(p)

    ns = [n for n, _ in ensemble_summary.as_proxy_curve]
    frac = [v for _, v in ensemble_summary.as_proxy_curve]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogx([max(n, 1) for n in ns], frac, marker=".", lw=1)
    ax.set_xlabel("iteration n")
    ax.set_ylabel(f"fraction with tail error <= {ensemble_summary.tol:g}")
    ax.set_ylim(-0.05, 1.05)
    ax.set_title("Almost-sure convergence proxy")
    ax.grid(True, which="both", alpha=0.3)
    p = f"{outdir}/{prefix}as_proxy_curve.png"
    fig.savefig(p, dpi=120, bbox_inches="tight")
    plt.close(fig)
    paths.append(p)

    if records:
        fig, ax = plt.subplots(figsize=(6, 4))
        for rec in records[:20]:
            pts = [(n, r) for n, r in zip(rec.recorded_indices, rec.residuals)
                   if n > 0 and r > 0]
            if pts:
                ax.loglog([n for n, _ in pts], [r for _, r in pts],
                          lw=0.8, alpha=0.5)
        ax.set_xlabel("iteration n")
        ax.set_ylabel("fixed-point residual")
        ax.set_title("Per-realization residuals")
        ax.grid(True, which="both", alpha=0.3)
        p = f"{outdir}/{prefix}residuals.png"
        fig.savefig(p, dpi=120, bbox_inches="tight")
        plt.close(fig)
        paths.append(p)

    return paths
