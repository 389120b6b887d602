"""Matplotlib figures for sweeps and degree audits (Agg backend, files only)."""

from __future__ import annotations

from collections import Counter
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .degree import DegreeAuditReport  # noqa: E402
from .lambda_family import SWEEP_COLUMNS  # noqa: E402

_CHECKS = SWEEP_COLUMNS[4:]


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    # no version stamp, so the bytes do not depend on the matplotlib build
    fig.savefig(path, dpi=110, metadata={"Software": None})
    plt.close(fig)
    return path


def sweep_plot(rows: list[dict], path: str | Path) -> Path:
    """psi, r_lambda and alpha_lambda against lambda, with failing rows marked."""
    lam = [r["lambda"] for r in rows]
    fig, (ax0, ax1) = plt.subplots(2, 1, figsize=(6.4, 6.0), sharex=True)
    ax0.plot(lam, [r["psi"] for r in rows], "o-", ms=3, color="tab:blue")
    ax0.set_ylabel(r"$\psi(\lambda)$")
    ax1.plot(lam, [r["r_lambda"] for r in rows], "o-", ms=3, label=r"$r_\lambda$")
    ax1.plot(lam, [r["alpha_lambda"] for r in rows], "s-", ms=3, label=r"$\alpha_\lambda$")
    bad = [r["lambda"] for r in rows if not all(r[c] for c in _CHECKS)]
    for x in bad:
        for ax in (ax0, ax1):
            ax.axvline(x, color="red", lw=0.8)
    ax1.set_xlabel(r"$\lambda$")
    ax1.legend(loc="best")
    ax0.set_title(f"lemma-bound sweep: {len(rows) - len(bad)}/{len(rows)} rows pass")
    fig.tight_layout()
    return _save(fig, path)


def degree_audit_figure(report: DegreeAuditReport, path: str | Path) -> Path:
    """Predicted against actual reduced degree; point size counts polynomials."""
    pairs = Counter((e.breakdown.predicted, e.breakdown.actual) for e in report.entries if e.breakdown is not None)
    fig, ax = plt.subplots(figsize=(5.6, 5.0))
    if pairs:
        xs, ys = zip(*pairs)
        sizes = [20 + 8 * pairs[k] for k in pairs]
        colours = ["tab:green" if x == y else "tab:red" for x, y in pairs]
        ax.scatter(xs, ys, s=sizes, c=colours, alpha=0.7)
        lo, hi = min(xs + ys) - 1, max(xs + ys) + 1
        ax.plot([lo, hi], [lo, hi], "k--", lw=0.8)
    ax.set_xlabel("predicted degree")
    ax.set_ylabel("actual reduced degree")
    s = report.summary()
    ax.set_title(f"{s['count']} polynomials, {s['disagreements']} disagreements, {s['ambiguous']} ambiguous")
    fig.tight_layout()
    return _save(fig, path)
