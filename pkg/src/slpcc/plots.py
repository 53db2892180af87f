"""Figure rendering for solve traces, outer-method traces and suite results.

All functions write a file and return its path; they are only imported by
the CLI when a plot is requested, keeping matplotlib out of solver paths.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def render_solve_trace(records, path, title=""):
    """Objective and stationarity over the outer iterations."""
    its = [r.k for r in records]
    fs = [r.f for r in records]
    chis = [max(r.chi, 1e-300) for r in records]
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6, 6), sharex=True)
    ax1.plot(its, fs, marker="o", color="tab:blue")
    ax1.set_ylabel("objective")
    if title:
        ax1.set_title(title)
    ax2.semilogy(its, chis, marker="o", color="tab:red")
    ax2.set_ylabel("stationarity")
    ax2.set_xlabel("outer iteration")
    for ax in (ax1, ax2):
        ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_auglag_trace(records, path, title=""):
    """Violation, stationarity and penalty over the outer iterations."""
    its = [r.iteration for r in records]
    viol = [max(r.violation, 1e-300) for r in records]
    stat = [max(r.stationarity, 1e-300) for r in records]
    rho = [r.rho for r in records]
    fig, axes = plt.subplots(1, 3, figsize=(11, 3.2))
    axes[0].semilogy(its, viol, marker="o", color="tab:blue")
    axes[0].set_title("constraint violation")
    axes[1].semilogy(its, stat, marker="o", color="tab:red")
    axes[1].set_title("stationarity")
    axes[2].step(its, rho, where="post", color="tab:green", marker="o")
    axes[2].set_yscale("log")
    axes[2].set_title("penalty parameter")
    for ax in axes:
        ax.set_xlabel("iteration")
        ax.grid(True, alpha=0.3)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_bench_summary(rows, path, title=""):
    """Distribution of iteration counts per variant over a suite.

    ``rows`` are dicts with keys variant, outer_iters, inner_iters.
    """
    variants = sorted({r["variant"] for r in rows})
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
    for ax, key, label in ((ax1, "outer_iters", "outer iterations"),
                           (ax2, "inner_iters", "total inner iterations")):
        data = [[r[key] for r in rows if r["variant"] == v] for v in variants]
        if any(len(d) for d in data):
            ax.boxplot(data, tick_labels=variants, showmeans=True)
        ax.set_title(label)
        ax.grid(True, alpha=0.3)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
