"""The idealized baseline against the full model, same scenario.

The baseline treats every preamble as delivered and resolves collisions at
the first step, so access always completes within a few milliseconds; the
full model pays for contention, detection failures and shared-grant
collisions.
"""

import dataclasses

import numpy as np

from rachsim import RachConfig, RunConfig, ScenarioConfig, run_monte_carlo
from rachsim.metrics import outcome_fractions, summary_stats

for n in (100, 300):
    scenario = ScenarioConfig(num_mtds=n, sim_duration_s=120.0)
    print(f"\nN = {n}:")
    for mode in ("ideal", "realistic"):
        cfg = RunConfig(seed=11, num_runs=3, mode=mode)
        results = run_monte_carlo(scenario, RachConfig(), cfg)
        records = [r for res in results for r in res.records]
        stats = summary_stats(records)
        unfinished = outcome_fractions(records)["unfinished"]
        print(f"  {mode:>9}: mean delay {stats.mean_s:8.3f} s, "
              f"p_max {max(r.delay_ms for r in records if r.end_ms) / 1000:7.3f} s, "
              f"unfinished {unfinished:.1%}")
