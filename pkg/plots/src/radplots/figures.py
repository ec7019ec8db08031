"""The figure renderers.

Every renderer takes loaded data and an output path and writes a
deterministic image: fixed dpi, fixed metadata, no timestamps, inputs sorted
before drawing.  Reference-curve constants are fitted by least squares in log
space and printed on the panels.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .schema import log_fit_constant, sigma_np1

_SAVE_KW = {"dpi": 120, "metadata": {"Software": "radplots"}}


def _save(fig, out_path) -> Path:
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, **_SAVE_KW)
    plt.close(fig)
    return out_path


def render_regimes(summaries: list[tuple[str, dict]], out_path) -> Path:
    """Log-log panels of mean radius vs n with fitted reference curves.

    ``summaries`` is a list of (label, summary-doc) pairs; each panel shows
    the measured means plus c1 * sigma_(n+1) and c2 * sigma_(n+1) sqrt(log(n+1))
    with the fitted constants in the legend.
    """
    if not summaries:
        raise ValueError("no summaries to draw")
    summaries = sorted(summaries, key=lambda pair: pair[0])
    fig, axes = plt.subplots(1, len(summaries),
                             figsize=(4.2 * len(summaries), 3.6), squeeze=False)
    for ax, (label, doc) in zip(axes[0], summaries):
        cells = doc["cells"]
        ns = np.array([c["n"] for c in cells], dtype=float)
        means = np.array([c["mean_radius"] for c in cells], dtype=float)
        opt = np.array([sigma_np1(doc["sequence"], int(n)) for n in ns])
        logref = opt * np.sqrt(np.log(ns + 1.0))
        ax.loglog(ns, means, "o-", color="C0", label="mean radius")
        c1 = log_fit_constant(means, opt)
        if math.isfinite(c1):
            ax.loglog(ns, c1 * opt, "--", color="C1",
                      label=f"{c1:.2f} * sigma(n+1)")
        c2 = log_fit_constant(means, logref)
        if math.isfinite(c2):
            ax.loglog(ns, c2 * logref, ":", color="C2",
                      label=f"{c2:.2f} * sigma(n+1) sqrt(ln(n+1))")
        ax.set_title(label, fontsize=10)
        ax.set_xlabel("n")
        ax.set_ylabel("radius")
        ax.legend(fontsize=7)
    fig.tight_layout()
    return _save(fig, out_path)


def render_dichotomy(doc: dict, out_path) -> Path:
    """Frequency of a useless realization (radius near sigma_1) against m."""
    rows = sorted(doc["rows"], key=lambda r: r["m"])
    ms = [r["m"] for r in rows]
    freqs = [r["frequency"] for r in rows]
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.semilogx(ms, freqs, "o-", color="C0")
    ax.axhline(1.0, color="gray", lw=0.8, ls="--")
    ax.set_xlabel("truncation m")
    ax.set_ylabel("frequency")
    ax.set_ylim(-0.02, 1.05)
    title = f"alpha={doc.get('alpha')}, n={doc.get('n')}, eps={doc.get('eps')}"
    ax.set_title(f"radius >= (1-eps) sigma_1 ({title})", fontsize=10)
    fig.tight_layout()
    return _save(fig, out_path)


def render_bounds_scatter(sweeps: list[tuple[str, dict]], out_path) -> Path:
    """Realized radius against the analytic bound values, per record."""
    if not sweeps:
        raise ValueError("no sweep data to draw")
    sweeps = sorted(sweeps, key=lambda pair: pair[0])
    fig, ax = plt.subplots(figsize=(5.2, 4.2))
    lo, hi = math.inf, 0.0
    for idx, (label, cols) in enumerate(sweeps):
        radius = cols["radius"]
        ub = cols["ub_main"]
        mask = np.isfinite(radius) & np.isfinite(ub)
        ax.scatter(radius[mask], ub[mask], s=8, alpha=0.5,
                   color=f"C{idx % 10}", label=f"{label} upper")
        lb = cols["lb_main"]
        lbmask = mask & np.isfinite(lb) & (lb > 0)
        if np.any(lbmask):
            ax.scatter(radius[lbmask], lb[lbmask], s=8, alpha=0.5, marker="x",
                       color=f"C{idx % 10}", label=f"{label} lower")
        vals = np.concatenate([radius[mask], ub[mask]])
        if vals.size:
            lo = min(lo, float(vals[vals > 0].min()))
            hi = max(hi, float(vals.max()))
    if not math.isfinite(lo) or hi <= 0:
        raise ValueError("no positive data for the scatter")
    diag = np.array([lo, hi])
    ax.plot(diag, diag, color="gray", lw=0.8)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("realized radius")
    ax.set_ylabel("bound value")
    ax.legend(fontsize=7)
    fig.tight_layout()
    return _save(fig, out_path)


def render_concentration(checks: list[dict], out_path) -> Path:
    """Empirical tail frequencies with confidence caps against claimed bounds."""
    if not checks:
        raise ValueError("no checks to draw")
    checks = sorted(checks, key=lambda c: c["name"])
    names = [c["name"] for c in checks]
    x = np.arange(len(checks))
    freq = [c["empirical_freq"] for c in checks]
    upper = [c["upper_conf_95"] for c in checks]
    claimed = [min(1.0, c["claimed_bound"]) for c in checks]
    fig, ax = plt.subplots(figsize=(max(5.0, 1.1 * len(checks)), 3.8))
    ax.bar(x - 0.2, freq, width=0.4, color="C0", label="empirical")
    ax.bar(x + 0.2, claimed, width=0.4, color="C3", alpha=0.7, label="claimed bound")
    ax.errorbar(x - 0.2, freq, yerr=[np.zeros(len(x)),
                                     np.maximum(0, np.array(upper) - np.array(freq))],
                fmt="none", ecolor="black", capsize=3, lw=0.8)
    ax.set_xticks(x)
    ax.set_xticklabels(names, rotation=30, ha="right", fontsize=7)
    ax.set_ylabel("probability")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, out_path)
