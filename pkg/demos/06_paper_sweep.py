"""The full evaluation campaign: every population size, 10 runs each.

Writes ecdf_N*.csv, timeseries_N*.csv, access records and summary.json under
demos/sweep_results/, ready for the rachplots figure pipeline. Expect a few
minutes of wall time; trim --sweep or --runs for a quick look.
"""

import subprocess
import sys
from pathlib import Path

out = Path(__file__).with_name("sweep_results")
cmd = [sys.executable, "-m", "rachsim",
       "--sweep", "50,100,150,200,300,400,500,600",
       "--runs", "10", "--seed", "42", "--mode", "realistic",
       "--jobs", "2", "--out-dir", str(out)]
print(" ".join(cmd))
raise SystemExit(subprocess.call(cmd))
