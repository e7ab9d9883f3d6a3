"""Fixed-width rendering of an experiment report."""

from __future__ import annotations

import math

from .experiment import BEST_SINGLE, ExperimentReport

SIGNIFICANCE = 0.05

_GROUPS = (
    ("Baselines", lambda n: n in ("most_frequent", "tfidf")),
    ("Single modality", lambda n: n.startswith("single:")),
    ("Bimodal fusion", lambda n: ":" in n and n.count("+") == 1),
    ("Trimodal fusion", lambda n: n.count("+") == 2),
)


def _resolved(name: str) -> str:
    # t-test labels look like "best_single=single:text"
    return name.split("=", 1)[1] if name.startswith(BEST_SINGLE + "=") else name


def significant_variants(report: ExperimentReport, alpha: float = SIGNIFICANCE) -> set[str]:
    """Variants taking part in at least one comparison with p < alpha."""
    out = set()
    for t in report.ttests:
        if t.result is not None and t.result.p < alpha:
            out.update((_resolved(t.a), _resolved(t.b)))
    return out


def _fmt(x: float) -> str:
    return "-" if math.isnan(x) else f"{x:.2f}"


def render_table(report: ExperimentReport) -> str:
    """Model | Val-WF | Test-WF, grouped like the results table; '*' marks significant comparisons."""
    stars = significant_variants(report)
    names = list(report.variants)
    width = max([len("Model")] + [len(n) + 1 for n in names])
    rule = "-" * (width + 20)
    lines = [f"{'Model':<{width}} {'Val-WF':>8} {'Test-WF':>9}", rule]
    seen = set()
    groups = [(title, [n for n in names if pred(n) and not report.variants[n].external]) for title, pred in _GROUPS]
    groups.append(("External", [n for n in names if report.variants[n].external]))
    for title, members in groups:
        members = [n for n in members if n not in seen]
        if not members:
            continue
        lines.append(f"[{title}]")
        for n in members:
            seen.add(n)
            v = report.variants[n]
            if v.error:
                lines.append(f"{n:<{width}} {'error':>8} {'':>9}  {v.error}")
                continue
            test = _fmt(v.mean_test_wf1) + ("*" if n in stars else " ")
            lines.append(f"{n:<{width}} {_fmt(v.mean_val_wf1):>8} {test:>9}")
    lines.append(rule)
    if report.ttests:
        lines.append("Paired t-tests on per-fold test WF:")
        for t in report.ttests:
            if t.result is None:
                lines.append(f"  {t.a} vs {t.b}: {t.note}")
                continue
            r = t.result
            flag = " (degenerate)" if r.degenerate else ""
            lines.append(f"  {t.a} vs {t.b}: t={r.t:.3f} p={r.p:.4f} df={r.df}{flag}")
    return "\n".join(lines) + "\n"
