"""CSV tables and matplotlib figures written next to the JSON output."""

from __future__ import annotations

import csv
import math
import os
from typing import Dict, List, Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

LN2 = math.log(2)

_STYLE = {
    "figure.figsize": (6.0, 4.0),
    "figure.dpi": 100,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "font.size": 10,
    "legend.frameon": False,
}


def write_csv(path: str, rows: Sequence[dict], columns: Optional[List[str]] = None) -> str:
    columns = columns or (list(rows[0]) if rows else [])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore")
        w.writeheader()
        for r in rows:
            w.writerow(r)
    return path


def line_figure(path: str, x: Sequence[float], series: Dict[str, Sequence[float]], xlabel: str,
                ylabel: str, title: str = "", logx: bool = False, hline: Optional[float] = None) -> str:
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        for label, ys in series.items():
            ax.plot(x, ys, marker="o" if len(x) <= 30 else None, ms=3, label=label)
        if hline is not None:
            ax.axhline(hline, color="k", ls="--", lw=1, label="claimed")
        if logx:
            ax.set_xscale("log")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        ax.legend()
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return path


def bar_figure(path: str, labels: Sequence[str], values: Sequence[float], ylabel: str, title: str = "",
               hline: Optional[float] = None, errors: Optional[Sequence[float]] = None) -> str:
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        ax.bar(range(len(values)), values, yerr=errors, color="C0", capsize=3)
        ax.set_xticks(range(len(values)))
        ax.set_xticklabels(labels, rotation=45 if len(labels) > 6 else 0, ha="right" if len(labels) > 6 else "center")
        if hline is not None:
            ax.axhline(hline, color="C3", ls="--", lw=1, label="claimed")
            ax.legend()
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return path


def _finite(v):
    return v if v is not None and math.isfinite(v) else float("nan")


# -- per-command reports ----------------------------------------------------------------------


def foldg_sweep(out_dir: str, sigma: float, delta1: float, delta2: float, K_max: int) -> List[str]:
    from .accountant import compare_foldg

    Ks = sorted({k for k in (1, 2, 3, 5, 10, 20, 50, 100, 200, 500, 1000) if k <= K_max} | {K_max})
    rows = []
    for K in Ks:
        r = compare_foldg(K, sigma, delta1, delta2)
        rows.append({"K": K, "eps_zcdp": r["zcdp"]["epsilon"], "eps_zcdp_matched": r["zcdp_matched"]["epsilon"],
                     "eps_advanced": r["advanced"]["epsilon"]})
    csv_path = write_csv(os.path.join(out_dir, "compare_foldg.csv"), rows)
    png = line_figure(os.path.join(out_dir, "compare_foldg.png"), Ks,
                      {"zCDP route (delta2)": [r["eps_zcdp"] for r in rows],
                       "zCDP route (K delta1 + delta2)": [r["eps_zcdp_matched"] for r in rows],
                       "advanced composition": [r["eps_advanced"] for r in rows]},
                      "K (number of queries)", "epsilon (nats)",
                      f"sigma={sigma:g}, delta1={delta1:g}, delta2={delta2:g}", logx=True)
    return [csv_path, png]


def divergence_curve(out_dir: str, mu1, mu2, family: str, param: float) -> List[str]:
    """Renyi curve alpha -> D^alpha with the member function the spec family bounds."""
    import numpy as np

    from .divergences import dp_divergence, renyi_divergence

    if family == "DP":
        eps = np.linspace(0.0, 3.0, 61)
        rows = [{"epsilon": float(e), "delta": dp_divergence(float(e), mu1, mu2)} for e in eps]
        csv_path = write_csv(os.path.join(out_dir, "divergence.csv"), rows)
        png = line_figure(os.path.join(out_dir, "divergence.png"), list(eps), {"DP divergence": [r["delta"] for r in rows]},
                          "epsilon", "delta")
        return [csv_path, png]
    top = param if family == "TCDP" else 100.0
    alphas = 1 + np.geomspace(1e-2, top - 1, 60) if top > 1.01 else np.array([top])
    rows = []
    for a in alphas:
        d = renyi_divergence(float(a), mu1, mu2)
        member = (d - param) / a if family == "ZCDP" else d / a
        rows.append({"alpha": float(a), "renyi": d, "member": member})
    csv_path = write_csv(os.path.join(out_dir, "divergence.csv"), rows)
    series = {"D^alpha": [_finite(r["renyi"]) for r in rows]}
    if family in ("ZCDP", "TCDP"):
        series["objective"] = [_finite(r["member"]) for r in rows]
    png = line_figure(os.path.join(out_dir, "divergence.png"), [r["alpha"] for r in rows], series,
                      "alpha", "nats", logx=True)
    return [csv_path, png]


def oracle_report(out_dir: str, result: dict) -> List[str]:
    rows = [{"index": r["index"], "observed": r["observed"], "slack": r["slack"], "claimed": result["claimed"]}
            for r in result["inputs"]]
    csv_path = write_csv(os.path.join(out_dir, "oracle.csv"), rows, ["index", "observed", "slack", "claimed"])
    png = bar_figure(os.path.join(out_dir, "oracle.png"), [str(r["index"]) for r in rows],
                     [_finite(r["observed"]) for r in rows], "observed divergence (nats)",
                     f"{result['flavor']['kind']} oracle", hline=result["claimed"])
    return [csv_path, png]


def check_report(out_dir: str, derivation) -> List[str]:
    rows = []
    counts: Dict[str, int] = {}
    for path, node, _parent in derivation.nodes():
        f = node.conclusion.flavor
        rows.append({"path": path, "rule": node.rule, "flavor": str(f)})
        counts[node.rule] = counts.get(node.rule, 0) + 1
    csv_path = write_csv(os.path.join(out_dir, "check_nodes.csv"), rows, ["path", "rule", "flavor"])
    names = sorted(counts, key=lambda k: (-counts[k], k))
    png = bar_figure(os.path.join(out_dir, "check_rules.png"), names, [counts[n] for n in names], "nodes",
                     "rule usage")
    return [csv_path, png]


def account_report(out_dir: str, rep: dict, budget=None) -> List[str]:
    flat = {"route": rep["route"], "epsilon": rep["epsilon"], "delta": rep["delta"]}
    paths = [write_csv(os.path.join(out_dir, "account.csv"), [flat])]
    if budget is not None and budget.kind in ("zCDP", "RDP", "tCDP"):
        import numpy as np

        from .accountant import convert

        deltas = np.geomspace(1e-12, 1e-1, 45)
        eps = [convert(budget, "DP", delta=float(d)).epsilon for d in deltas]
        write_csv(os.path.join(out_dir, "account_curve.csv"),
                  [{"delta": float(d), "epsilon": e} for d, e in zip(deltas, eps)])
        paths.append(os.path.join(out_dir, "account_curve.csv"))
        paths.append(line_figure(os.path.join(out_dir, "account_curve.png"), list(deltas), {str(budget): eps},
                                 "delta", "epsilon (nats)", "conversion to DP", logx=True))
    return paths
