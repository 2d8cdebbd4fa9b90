"""The three preamble-reception mechanisms, in isolation.

1. Power ramping: the transmit-power rule over consecutive attempts.
2. Collision visibility: the 138.8 m distance-spread rule.
3. Lone-transmitter statistics: simulated detections against the closed form
   M (1 - 1/K)^(M-1).
"""

import numpy as np

from rachsim import (DetectionCurve, OutcomeKind, PreambleTransmission,
                     RachConfig, collision_distinguishable, detect_preambles,
                     preamble_tx_power)

rach = RachConfig()
print("power ramping at 120 dB estimated pathloss (cap 23 dBm):")
for attempt in (1, 2, 3, 10, 30):
    p = preamble_tx_power(rach, 120.0, attempt, 23.0)
    print(f"  attempt {attempt:>2}: {p:+.0f} dBm")

print("\ncollision visibility by distance spread:")
for d_far, d_near in ((500.0, 300.0), (400.0, 300.0), (1438.8, 1300.0)):
    seen = collision_distinguishable(d_far, d_near)
    print(f"  {d_far - d_near:6.1f} m spread -> {'collision seen' if seen else 'hidden'}")

print("\nlone transmitters among M=100 devices on K=54 preambles:")
always = DetectionCurve.step(-1e9)
rng = np.random.default_rng(0)
m, k, trials = 100, 54, 2000
total = 0
for _ in range(trials):
    idx = rng.integers(0, k, size=m)
    txs = [PreambleTransmission(u, int(idx[u]), 1, 0.0, 0.0, 200.0 + 150 * u)
           for u in range(m)]
    total += detect_preambles(txs, always, rng).count(OutcomeKind.DETECTED_SINGLE)
print(f"  simulated mean {total / trials:.2f} vs closed form "
      f"{m * (1 - 1 / k) ** (m - 1):.2f}")
