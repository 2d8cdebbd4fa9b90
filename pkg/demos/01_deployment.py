"""Generate the smart-city deployment and look at its geometry.

96 buildings on a regular grid, three co-located 65-degree sectors at the
center, every device placed indoors. Writes deployment.csv next to this
script for plotting.
"""

import collections
from pathlib import Path

import numpy as np

from rachsim import ScenarioConfig, generate_deployment
from rachsim.scenario import deployment_area, write_deployment_csv

scenario = ScenarioConfig(num_mtds=300)
deployment, links = generate_deployment(scenario, np.random.default_rng(1))

ax, ay = deployment_area(scenario)
print(f"deployment area: {ax:.0f} m x {ay:.0f} m, "
      f"{len(deployment.buildings)} buildings, site at {deployment.site.position}")

floors = collections.Counter(m.floor for m in deployment.mtds)
print("devices per floor:", dict(sorted(floors.items())))

sectors = collections.Counter(deployment.serving_sector.values())
print("devices per serving sector:", dict(sorted(sectors.items())))

d = links.distance_m
print(f"site distance: min {d.min():.0f} m, median {np.median(d):.0f} m, "
      f"max {d.max():.0f} m")

out = Path(__file__).with_name("deployment.csv")
write_deployment_csv(deployment, out)
print(f"wrote {out}")
