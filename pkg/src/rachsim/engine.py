"""Deterministic discrete-event core at 1 ms subframe granularity.

Each run owns an event heap ordered by (time, insertion sequence), its own
random streams derived from (master seed, run index), and one RaMac.  Runs
are independent, so the Monte Carlo driver may execute them in any order or
in parallel without changing a single byte of the results.
"""

from __future__ import annotations

import heapq
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from . import __version__
from .config import (RachConfig, RunConfig, ScenarioConfig, config_to_dict,
                     default_duration_for)
from .mac import IDEAL_ACCESS_LATENCY_MS, MSG4_DELAY_MS, Phase, RaMac
from .metrics import AccessRecord
from .phy import resolve_detection_curve, prach_opportunities
from .propagation import noise_floor_dbm
from .scenario import generate_deployment


class EventKind(IntEnum):
    UE_ACTIVATION = 0
    PRACH_OPPORTUNITY = 1
    RAR_DELIVERY = 2
    MSG3_TX = 3
    MSG4_DELIVERY = 4
    TIMER_EXPIRY = 5


class TimerKind(IntEnum):
    RAR_WINDOW = 0
    CONTENTION_RESOLUTION = 1


@dataclass(frozen=True)
class Event:
    time: int
    sequence: int
    kind: EventKind
    payload: object = None


@dataclass(frozen=True, eq=False)
class RunResult:
    """Outcome of one run: a record per started device plus everything
    needed to reproduce the run bit-exactly."""

    run_index: int
    records: tuple[AccessRecord, ...]
    metadata: dict


class _EventQueue:
    """Heap of events processed in (time, sequence) order; refuses to
    schedule into the past."""

    def __init__(self):
        self._heap: list[tuple[int, int, EventKind, object]] = []
        self._seq = 0
        self.now = 0

    def push(self, time: int, kind: EventKind, payload=None) -> None:
        if time < self.now:
            raise RuntimeError(f"event {kind.name} scheduled at {time} "
                               f"before current time {self.now}")
        heapq.heappush(self._heap, (int(time), self._seq, kind, payload))
        self._seq += 1

    def pop(self):
        time, seq, kind, payload = heapq.heappop(self._heap)
        self.now = time
        return Event(time, seq, kind, payload)

    def __bool__(self):
        return bool(self._heap)


def resolve_duration_s(scenario: ScenarioConfig) -> float:
    if scenario.sim_duration_s is not None:
        return scenario.sim_duration_s
    return default_duration_for(scenario.num_mtds)


def run_streams(master_seed: int, run_index: int):
    """Independent child generators (geometry+shadowing, MAC) for one run.

    Derived from the master seed and the run index alone, so results do not
    depend on how many runs execute or in which order.
    """
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(run_index,))
    geo, mac = ss.spawn(2)
    return np.random.default_rng(geo), np.random.default_rng(mac)


def run_simulation(scenario: ScenarioConfig, rach: RachConfig, run_cfg: RunConfig,
                   run_index: int, trace=None) -> RunResult:
    """One complete run: build the deployment, activate every device, process
    events until the simulation horizon."""
    duration_s = resolve_duration_s(scenario)
    horizon = int(round(duration_s * 1000.0))
    geo_rng, mac_rng = run_streams(run_cfg.seed, run_index)

    deployment, links = generate_deployment(scenario, geo_rng)
    schedule = prach_opportunities(rach.prach_config_index, horizon)
    curve = resolve_detection_curve(run_cfg.detection_curve)
    floor = noise_floor_dbm(scenario.prach_bandwidth_hz, scenario.enb_noise_figure_db)
    ideal = run_cfg.mode == "ideal"

    mac = RaMac(
        n=scenario.num_mtds, rach=rach, p_ue_max_dbm=scenario.mtd_max_tx_power_dbm,
        pathloss_estimate_db=links.serving_loss_dl_db,
        ul_loss_db=links.serving_loss_ul_db,
        distance_m=links.distance_m, noise_floor_dbm=floor,
        prach_subframes=schedule.times, rng=mac_rng, trace=trace,
    )

    queue = _EventQueue()
    if run_cfg.activation_window_ms > 0:
        starts = mac_rng.integers(0, run_cfg.activation_window_ms + 1,
                                  size=scenario.num_mtds)
    else:
        starts = np.zeros(scenario.num_mtds, dtype=np.int64)
    for t in np.unique(starts):
        queue.push(int(t), EventKind.UE_ACTIVATION,
                   tuple(int(u) for u in np.flatnonzero(starts == t)))
    for t in schedule.times:
        queue.push(int(t), EventKind.PRACH_OPPORTUNITY)

    while queue:
        ev = queue.pop()
        if ev.time >= horizon:
            break
        if ev.kind == EventKind.UE_ACTIVATION:
            for ue in ev.payload:
                mac.start_ra(ue, ev.time)
        elif ev.kind == EventKind.PRACH_OPPORTUNITY:
            if ideal:
                due = mac.ideal_on_opportunity(ev.time)
                if due is not None:
                    queue.push(ev.time + IDEAL_ACCESS_LATENCY_MS,
                               EventKind.MSG4_DELIVERY, tuple(int(u) for u in due))
                continue
            batch = mac.on_opportunity(ev.time)
            if batch is None:
                continue
            grants = mac.detect_and_grant(batch, curve, ev.time,
                                          scenario.prach_bandwidth_hz)
            for grant in grants:
                queue.push(ev.time + rach.rar_processing_delay_ms,
                           EventKind.RAR_DELIVERY, (grant, ev.time))
            queue.push(ev.time + rach.rar_window_ms, EventKind.TIMER_EXPIRY,
                       (TimerKind.RAR_WINDOW, None))
        elif ev.kind == EventKind.RAR_DELIVERY:
            grant, op_time = ev.payload
            mac.on_rar(grant, op_time, ev.time)
            queue.push(grant.ul_grant_subframe, EventKind.MSG3_TX,
                       (grant.ul_grant_subframe, grant.ue_ids))
        elif ev.kind == EventKind.MSG3_TX:
            grant_sf, ues = ev.payload
            res = mac.on_msg3(grant_sf, ues, ev.time)
            if res is None:
                continue
            if res[0] == "success":
                ue = res[1]
                queue.push(ev.time + MSG4_DELAY_MS, EventKind.MSG4_DELIVERY, (ue,))
                queue.push(ev.time + rach.contention_resolution_timer_ms,
                           EventKind.TIMER_EXPIRY,
                           (TimerKind.CONTENTION_RESOLUTION, ue))
            elif res[0] == "harq":
                _, active, next_sf = res
                queue.push(next_sf, EventKind.MSG3_TX,
                           (next_sf, tuple(int(u) for u in active)))
        elif ev.kind == EventKind.MSG4_DELIVERY:
            for ue in ev.payload:
                mac.on_msg4(int(ue), ev.time)
        elif ev.kind == EventKind.TIMER_EXPIRY:
            timer, arg = ev.payload
            if timer == TimerKind.RAR_WINDOW:
                mac.on_rar_deadline(ev.time)
            else:
                mac.on_contention_timer(arg, ev.time)

    records = tuple(
        AccessRecord(
            ue_id=ue,
            start_ms=int(mac.ra_start[ue]),
            end_ms=int(mac.end_time[ue]) if mac.end_time[ue] >= 0 else None,
            preamble_attempts=int(mac.preamble_tx_counter[ue]),
            msg3_attempts=int(mac.msg3_attempts[ue]),
            failed=bool(mac.phase[ue] == Phase.FAILED),
        )
        for ue in range(scenario.num_mtds)
    )
    metadata = {
        "simulator_version": __version__,
        "config": config_to_dict(scenario, rach, run_cfg),
        "run_index": run_index,
        "master_seed": run_cfg.seed,
        "mode": run_cfg.mode,
        "sim_duration_s": duration_s,
        "detection_curve_sha256": curve.sha256(),
        "detection_curve_label": curve.label,
        "num_mtds": scenario.num_mtds,
        "deployment_redrawn_per_run": True,
        "serving_sector_counts": np.bincount(
            links.serving_sector, minlength=scenario.sectors_per_site).tolist(),
    }
    return RunResult(run_index=run_index, records=records, metadata=metadata)


def _run_one(args) -> RunResult:
    scenario, rach, run_cfg, run_index = args
    return run_simulation(scenario, rach, run_cfg, run_index)


def run_monte_carlo(scenario: ScenarioConfig, rach: RachConfig, run_cfg: RunConfig,
                    jobs: int = 1) -> list[RunResult]:
    """All runs of one experiment, ordered by run index.  ``jobs`` > 1 farms
    runs out to worker processes; results are identical either way."""
    work = [(scenario, rach, run_cfg, i) for i in range(run_cfg.num_runs)]
    if jobs <= 1 or run_cfg.num_runs == 1:
        results = [_run_one(w) for w in work]
    else:
        with ProcessPoolExecutor(max_workers=min(jobs, run_cfg.num_runs)) as pool:
            results = list(pool.map(_run_one, work))
    return sorted(results, key=lambda r: r.run_index)
