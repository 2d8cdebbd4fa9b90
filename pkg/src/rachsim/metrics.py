"""Evaluation products: access-delay ECDFs, success-versus-time series,
summary statistics, and their CSV/JSON file formats.

File schemas (fixed column order, explicit headers):
  access_records.csv  run_id, ue_id, start_ms, end_ms, delay_ms,
                      preamble_attempts, msg3_attempts (end/delay empty for
                      devices that never finished)
  ecdf_N<k>.csv       delay_s, F_mean, F_run_0 ... F_run_{R-1}
  timeseries_N<k>.csv bin_start_s, successes_mean, successes_run_0 ...
  summary.json        per-population statistics + effective configuration
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class AccessRecord:
    """Outcome of one device's access procedure."""

    ue_id: int
    start_ms: int
    end_ms: int | None
    preamble_attempts: int
    msg3_attempts: int
    failed: bool = False

    @property
    def delay_ms(self) -> int | None:
        if self.end_ms is None:
            return None
        return self.end_ms - self.start_ms


@dataclass(frozen=True)
class SummaryStats:
    """Access-delay statistics over the devices that finished."""

    n: int
    mean_s: float | None
    std_s: float | None
    mean_over_std: float | None
    success_fraction: float


def delays_s(records) -> np.ndarray:
    """Completed access delays in seconds, in record order."""
    return np.array([r.delay_ms / 1000.0 for r in records if r.end_ms is not None])


def ecdf(delays) -> list[tuple[float, float]]:
    """Empirical CDF step points: (x, fraction of samples <= x)."""
    values = np.sort(np.asarray(delays, dtype=float))
    if values.size == 0:
        return []
    xs, counts = np.unique(values, return_counts=True)
    fractions = np.cumsum(counts) / values.size
    return list(zip(xs.tolist(), fractions.tolist()))


def eval_ecdf(curve, xs) -> np.ndarray:
    """Right-continuous evaluation of an ECDF at the given abscissae."""
    if not curve:
        return np.zeros(len(xs))
    steps = np.array([x for x, _ in curve])
    values = np.array([f for _, f in curve])
    pos = np.searchsorted(steps, xs, side="right") - 1
    out = np.where(pos >= 0, values[np.clip(pos, 0, values.size - 1)], 0.0)
    return out


def mean_ecdf(curves) -> list[tuple[float, float]]:
    """Pointwise average of several ECDFs over the union of their steps."""
    if not curves:
        raise ValueError("need at least one ECDF")
    xs = sorted({x for c in curves for x, _ in c})
    if not xs:
        return []
    stack = np.stack([eval_ecdf(c, xs) for c in curves])
    return list(zip(xs, stack.mean(axis=0).tolist()))


def success_time_series(records, bin_s: float, duration_s: float | None = None
                        ) -> list[tuple[float, int]]:
    """Completions per time bin: (bin start, count).  ``duration_s`` extends
    the series to the simulation horizon even when the tail is empty."""
    if bin_s <= 0:
        raise ValueError(f"bin width must be > 0 (got {bin_s})")
    ends = np.array([r.end_ms / 1000.0 for r in records if r.end_ms is not None])
    if duration_s is None:
        if ends.size == 0:
            return []
        n_bins = int(ends.max() / bin_s) + 1
    else:
        n_bins = max(1, int(np.ceil(duration_s / bin_s)))
    counts = np.zeros(n_bins, dtype=np.int64)
    if ends.size:
        idx = np.minimum((ends / bin_s).astype(np.int64), n_bins - 1)
        np.add.at(counts, idx, 1)
    return [(i * bin_s, int(c)) for i, c in enumerate(counts)]


def summary_stats(records) -> SummaryStats:
    """Sample mean and deviation (n-1 divisor) of the successful delays plus
    the fraction of devices that finished."""
    d = delays_s(records)
    total = len(records)
    success_fraction = d.size / total if total else 0.0
    mean_s = float(d.mean()) if d.size else None
    std_s = float(d.std(ddof=1)) if d.size >= 2 else None
    ratio = None
    if mean_s is not None and std_s is not None and std_s > 0:
        ratio = mean_s / std_s
    return SummaryStats(n=int(d.size), mean_s=mean_s, std_s=std_s,
                        mean_over_std=ratio, success_fraction=success_fraction)


def outcome_fractions(records) -> dict[str, float]:
    """success + unfinished + failed partition of the record set."""
    total = len(records)
    if total == 0:
        return {"success": 0.0, "unfinished": 0.0, "failed": 0.0}
    success = sum(1 for r in records if r.end_ms is not None)
    failed = sum(1 for r in records if r.failed)
    return {
        "success": success / total,
        "unfinished": (total - success - failed) / total,
        "failed": failed / total,
    }


# ---------------------------------------------------------------------------
# File writers.  All numeric fields go through repr() so identical results
# serialize to identical bytes.


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_access_records_csv(path, results) -> None:
    """One row per device per run (results: iterable of RunResult)."""
    with open(path, "w") as fh:
        fh.write("run_id,ue_id,start_ms,end_ms,delay_ms,preamble_attempts,msg3_attempts\n")
        for res in results:
            for r in res.records:
                fh.write(",".join([
                    str(res.run_index), str(r.ue_id), str(r.start_ms),
                    _fmt(r.end_ms), _fmt(r.delay_ms),
                    str(r.preamble_attempts), str(r.msg3_attempts),
                ]) + "\n")


def write_ecdf_csv(path, results) -> None:
    """Per-run access-delay ECDFs and their mean on a common grid."""
    curves = [ecdf(delays_s(res.records)) for res in results]
    xs = sorted({x for c in curves for x, _ in c})
    per_run = np.stack([eval_ecdf(c, xs) for c in curves]) if xs else \
        np.zeros((len(curves), 0))
    header = ["delay_s", "F_mean"] + [f"F_run_{i}" for i in range(len(curves))]
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for j, x in enumerate(xs):
            row = [repr(float(x)), repr(float(per_run[:, j].mean()))]
            row += [repr(float(per_run[i, j])) for i in range(len(curves))]
            fh.write(",".join(row) + "\n")


def write_timeseries_csv(path, results, bin_s: float = 1.0,
                         duration_s: float | None = None) -> None:
    """Successes per time bin, per run and averaged."""
    if duration_s is None:
        duration_s = max((res.metadata["sim_duration_s"] for res in results),
                         default=0.0)
    series = [success_time_series(res.records, bin_s, duration_s) for res in results]
    n_bins = max((len(s) for s in series), default=0)
    counts = np.zeros((len(series), n_bins), dtype=np.int64)
    for i, s in enumerate(series):
        for j, (_, c) in enumerate(s):
            counts[i, j] = c
    header = ["bin_start_s", "successes_mean"] + \
        [f"successes_run_{i}" for i in range(len(series))]
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for j in range(n_bins):
            row = [repr(j * bin_s), repr(float(counts[:, j].mean()))]
            row += [str(int(counts[i, j])) for i in range(len(series))]
            fh.write(",".join(row) + "\n")


def summary_entry(results) -> dict:
    """Aggregated statistics for one population size over all its runs."""
    all_records = [r for res in results for r in res.records]
    stats = summary_stats(all_records)
    fractions = outcome_fractions(all_records)
    per_run = []
    for res in results:
        s = summary_stats(res.records)
        per_run.append({"run_index": res.run_index, "n_success": s.n,
                        "mean_delay_s": s.mean_s, "std_delay_s": s.std_s,
                        "success_fraction": s.success_fraction})
    return {
        "n_success": stats.n,
        "records_total": len(all_records),
        "mean_delay_s": stats.mean_s,
        "std_delay_s": stats.std_s,
        "mean_over_std": stats.mean_over_std,
        "success_fraction": stats.success_fraction,
        "unfinished_fraction": fractions["unfinished"],
        "failed_fraction": fractions["failed"],
        "sim_duration_s": results[0].metadata["sim_duration_s"] if results else None,
        "per_run": per_run,
    }


def write_summary_json(path, entries: dict, common_metadata: dict) -> None:
    """entries: population size -> summary_entry() output."""
    doc = {
        "schema_version": 1,
        "experiment": common_metadata,
        "per_n": {str(k): v for k, v in sorted(entries.items())},
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
