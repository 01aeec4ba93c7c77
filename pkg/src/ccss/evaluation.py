"""Retrieval evaluation: rank-frequency reporting over a query set."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .database import ModelDatabase
from .matching import MatchParams

REPORT_POSITIONS = 6


@dataclass
class EvalReport:
    """Per-query ranks of the ground-truth model plus timing.

    The frequency table counts how often the correct model landed in each
    of the first REPORT_POSITIONS rank positions (plus 'other'), with
    cumulative counts and fractions.
    """

    ranks: list[int] = field(default_factory=list)
    query_ids: list[str] = field(default_factory=list)
    missing: list[str] = field(default_factory=list)
    mean_latency: float = 0.0

    @property
    def n_queries(self) -> int:
        return len(self.ranks)

    def frequency_table(self) -> dict:
        counts = [0] * REPORT_POSITIONS
        other = 0
        for r in self.ranks:
            if r <= REPORT_POSITIONS:
                counts[r - 1] += 1
            else:
                other += 1
        cumulative = list(np.cumsum(counts))
        n = max(self.n_queries, 1)
        return {
            "positions": list(range(1, REPORT_POSITIONS + 1)) + ["other"],
            "frequency": counts + [other],
            "cumulative_frequency": [int(c) for c in cumulative] + [self.n_queries],
            "relative_frequency": [c / n for c in counts] + [other / n],
            "relative_cumulative_frequency": [int(c) / n for c in cumulative] + [1.0 if self.n_queries else 0.0],
        }

    def rank_fraction(self, within: int) -> float:
        if not self.ranks:
            return 0.0
        return sum(r <= within for r in self.ranks) / len(self.ranks)

    def to_dict(self) -> dict:
        return {
            "queries": self.n_queries,
            "missing_truth_ids": self.missing,
            "ranks": self.ranks,
            "query_ids": self.query_ids,
            "mean_latency_seconds": self.mean_latency,
            "table": self.frequency_table(),
        }


def run_eval(
    db: ModelDatabase,
    queries: list[tuple[str, np.ndarray, str]],
    params: MatchParams | None = None,
    tau: float | None = None,
) -> EvalReport:
    """Run (query_id, mask, truth_id) triples against the database.

    Queries whose truth id is not in the database are reported in
    `missing` and excluded from the rank statistics.
    """
    params = params or MatchParams()
    report = EvalReport()
    latencies = []
    for qid, mask, truth in queries:
        if truth not in db.records:
            report.missing.append(qid)
            continue
        t0 = time.perf_counter()
        ranked = db.query(mask, params, tau)
        latencies.append(time.perf_counter() - t0)
        rank = next(i for i, r in enumerate(ranked, 1) if r.model_id == truth)
        report.ranks.append(rank)
        report.query_ids.append(qid)
    report.mean_latency = float(np.mean(latencies)) if latencies else 0.0
    return report


def format_table(report: EvalReport) -> str:
    """Fixed-width text rendering of the rank-frequency table."""
    t = report.frequency_table()
    head = "".join(f"{str(p):>8}" for p in t["positions"])
    rows = [
        ("frequency", t["frequency"], "{:>8d}"),
        ("cumulative", t["cumulative_frequency"], "{:>8d}"),
        ("rel. freq", t["relative_frequency"], "{:>8.2f}"),
        ("rel. cum.", t["relative_cumulative_frequency"], "{:>8.2f}"),
    ]
    lines = [f"{'position':>12}{head}"]
    for name, vals, fmt in rows:
        lines.append(f"{name:>12}" + "".join(fmt.format(v) for v in vals))
    lines.append(f"queries: {report.n_queries}   mean latency: {report.mean_latency:.3f}s")
    if report.missing:
        lines.append(f"excluded (truth id not in database): {', '.join(report.missing)}")
    return "\n".join(lines)
