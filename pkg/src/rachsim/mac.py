"""Random-access state machines for the devices and the base station.

Realistic mode walks the full four-message handshake: preamble with power
ramping, response window and backoff, shared uplink grants after undetected
collisions, connection-request HARQ with deterministic re-collision (no
capture), the contention-resolution timer, and attempt exhaustion.  Ideal
mode reproduces the propagation-free baseline in which every preamble is
delivered and collisions are resolved at the first step, so each device
completes after a fixed latency.

State is kept in per-device arrays so a whole PRACH opportunity is one
vectorized pass; ``snapshot()`` exposes the conventional per-device view.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .config import RachConfig
from .phy import (OpportunityOutcome, OutcomeKind, PreambleTransmission,
                  _detect_groups, preamble_tx_power)

# Delivery latencies the configuration tables leave open (subframes = ms).
MSG4_DELAY_MS = 4          # successful connection request -> connection setup
MSG3_HARQ_INTERVAL_MS = 8  # retransmission round trip
IDEAL_ACCESS_LATENCY_MS = 6  # opportunity -> connected, ideal baseline
MSG3_GRANTS_PER_SUBFRAME = 14  # (50 - 6 PRACH RBs) // 3 RBs per grant


class Phase(IntEnum):
    INACTIVE = 0
    AWAITING_OPPORTUNITY = 1
    PREAMBLE_SENT = 2
    MSG3_PENDING = 3
    AWAITING_CONTENTION_RESOLUTION = 4
    CONNECTED = 5
    FAILED = 6


IN_PROGRESS_PHASES = (
    Phase.AWAITING_OPPORTUNITY,
    Phase.PREAMBLE_SENT,
    Phase.MSG3_PENDING,
    Phase.AWAITING_CONTENTION_RESOLUTION,
)


class DoubleStartError(RuntimeError):
    """start_ra() on a device whose procedure already started."""


@dataclass(frozen=True)
class UeRaState:
    """Snapshot of one device's machine."""

    ue_id: int
    phase: Phase
    preamble_tx_counter: int
    earliest_subframe: int
    pending_preamble_index: int
    pending_opportunity: int
    rar_deadline: int
    msg3_grant_subframe: int
    msg3_harq_count: int
    contention_deadline: int
    ra_start_time: int
    end_time: int  # -1 while not connected
    msg3_attempts: int


@dataclass(frozen=True)
class RarGrant:
    """Response to one detected preamble index."""

    preamble_index: int
    temp_rnti: int
    ul_grant_subframe: int
    ue_ids: tuple[int, ...]


class RaMac:
    """Owns every device machine of one run plus the base-station grant logic.

    ``serving`` carries the per-device link numbers the MAC needs:
    pathloss_estimate_db (downlink total loss), ul_loss_db, distance_m.
    """

    def __init__(self, n: int, rach: RachConfig, p_ue_max_dbm: float,
                 pathloss_estimate_db, ul_loss_db, distance_m,
                 noise_floor_dbm: float, prach_subframes, rng, trace=None):
        self.n = n
        self.rach = rach
        self.p_ue_max_dbm = p_ue_max_dbm
        self.p_lc_db = np.asarray(pathloss_estimate_db, dtype=float)
        self.ul_loss_db = np.asarray(ul_loss_db, dtype=float)
        self.distance_m = np.asarray(distance_m, dtype=float)
        self.noise_floor_dbm = noise_floor_dbm
        self.prach_subframes = set(int(t) for t in prach_subframes)
        self.rng = rng
        self.trace = trace

        self.phase = np.full(n, Phase.INACTIVE, dtype=np.int8)
        self.preamble_tx_counter = np.zeros(n, dtype=np.int64)
        self.earliest = np.zeros(n, dtype=np.int64)
        self.pending_idx = np.full(n, -1, dtype=np.int64)
        self.pending_op = np.full(n, -1, dtype=np.int64)
        self.rar_deadline = np.full(n, -1, dtype=np.int64)
        self.msg3_grant = np.full(n, -1, dtype=np.int64)
        self.msg3_harq = np.zeros(n, dtype=np.int64)
        self.cr_deadline = np.full(n, -1, dtype=np.int64)
        self.ra_start = np.full(n, -1, dtype=np.int64)
        self.end_time = np.full(n, -1, dtype=np.int64)
        self.msg3_attempts = np.zeros(n, dtype=np.int64)
        self._next_rnti = 0

    # -- plumbing -----------------------------------------------------------

    def _transition(self, ues, new_phase: Phase, t: int, event: str) -> None:
        ues = np.atleast_1d(ues)
        if self.trace is not None:
            for u in ues:
                self.trace(t, int(u), event, Phase(int(self.phase[u])), new_phase)
        self.phase[ues] = new_phase

    def next_non_prach(self, t: int) -> int:
        """First subframe at or after ``t`` that carries no PRACH.  Dense
        configurations (PRACH in every subframe) fall back to sharing the
        subframe's spare resource blocks after a bounded search."""
        for _ in range(10):
            if t not in self.prach_subframes:
                return t
            t += 1
        return t

    def _backoff_restart(self, ues, t: int, event: str) -> None:
        """Uniform backoff in [0, BI] ms, then wait for an opportunity.
        The preamble counter keeps counting across these restarts."""
        ues = np.atleast_1d(ues)
        backoff = self.rng.integers(0, self.rach.backoff_indicator_ms + 1,
                                    size=ues.shape[0])
        self.earliest[ues] = t + backoff
        self._transition(ues, Phase.AWAITING_OPPORTUNITY, t, event)

    # -- device side --------------------------------------------------------

    def start_ra(self, ue: int, t: int) -> None:
        """Activate one device; records the start time once."""
        if self.phase[ue] != Phase.INACTIVE:
            raise DoubleStartError(f"device {ue} already started its procedure")
        if self.ra_start[ue] < 0:
            self.ra_start[ue] = t
        self.preamble_tx_counter[ue] = 0
        self.earliest[ue] = t
        self._transition(np.array([ue]), Phase.AWAITING_OPPORTUNITY, t, "ue_activation")

    def on_opportunity(self, t: int):
        """Transmit a preamble for every eligible device.

        Returns (ue_ids, preamble_idx, tx_power_dbm, snr_db) arrays; devices
        that would exceed the attempt budget fail instead of transmitting.
        """
        due = np.flatnonzero((self.phase == Phase.AWAITING_OPPORTUNITY)
                             & (self.earliest <= t))
        if due.size == 0:
            return None
        if self.rach.preamble_trans_max is not None:
            exhausted = due[self.preamble_tx_counter[due] >= self.rach.preamble_trans_max]
            if exhausted.size:
                # Attempt budget spent: report the problem upward, stop trying.
                self._transition(exhausted, Phase.FAILED, t, "preamble_budget_exhausted")
                due = due[self.preamble_tx_counter[due] < self.rach.preamble_trans_max]
            if due.size == 0:
                return None
        self.preamble_tx_counter[due] += 1
        idx = self.rng.integers(0, self.rach.num_contention_preambles, size=due.size)
        power = preamble_tx_power(self.rach, self.p_lc_db[due],
                                  self.preamble_tx_counter[due], self.p_ue_max_dbm)
        snr = power - self.ul_loss_db[due] - self.noise_floor_dbm
        self.pending_idx[due] = idx
        self.pending_op[due] = t
        self.rar_deadline[due] = t + self.rach.rar_window_ms
        self._transition(due, Phase.PREAMBLE_SENT, t, "preamble_tx")
        return due, idx, np.atleast_1d(power), np.atleast_1d(snr)

    def transmissions(self, batch) -> list[PreambleTransmission]:
        """Batch from on_opportunity() as PreambleTransmission records."""
        ues, idx, power, snr = batch
        return [PreambleTransmission(
            ue_id=int(u), preamble_index=int(i),
            tx_counter=int(self.preamble_tx_counter[u]),
            tx_power_dbm=float(p), snr_at_enb_db=float(s),
            distance_m=float(self.distance_m[u]),
        ) for u, i, p, s in zip(ues, idx, power, snr)]

    def on_rar_deadline(self, t: int) -> None:
        """Backoff every device whose response window just expired."""
        expired = np.flatnonzero((self.phase == Phase.PREAMBLE_SENT)
                                 & (self.rar_deadline == t))
        if expired.size:
            self._backoff_restart(expired, t, "rar_window_expired")

    def on_rar(self, grant: RarGrant, op_time: int, t: int) -> None:
        """Deliver a response: matching devices move to the granted uplink."""
        for ue in grant.ue_ids:
            if (self.phase[ue] == Phase.PREAMBLE_SENT
                    and self.pending_idx[ue] == grant.preamble_index
                    and self.pending_op[ue] == op_time):
                self.msg3_grant[ue] = grant.ul_grant_subframe
                self.msg3_harq[ue] = 0
                self._transition(np.array([ue]), Phase.MSG3_PENDING, t, "rar_rx")

    def on_msg3(self, grant_subframe: int, ues, t: int):
        """Connection requests on one grant.

        A lone sender succeeds; two or more always collide (no capture) and
        retransmit on a re-granted subframe until the HARQ budget is spent,
        after which they back off and start over.  Returns
        ("success", ue) | ("harq", ues, next_subframe) | ("exhausted",) | None.
        """
        active = np.array([u for u in ues
                           if self.phase[u] == Phase.MSG3_PENDING
                           and self.msg3_grant[u] == grant_subframe], dtype=np.int64)
        if active.size == 0:
            return None
        self.msg3_attempts[active] += 1
        if active.size == 1:
            ue = int(active[0])
            self.cr_deadline[ue] = t + self.rach.contention_resolution_timer_ms
            self._transition(active, Phase.AWAITING_CONTENTION_RESOLUTION, t, "msg3_tx")
            return ("success", ue)
        self.msg3_harq[active] += 1
        if int(self.msg3_harq[active[0]]) >= self.rach.msg3_harq_max:
            self._backoff_restart(active, t, "msg3_harq_exhausted")
            return ("exhausted",)
        next_sf = self.next_non_prach(t + MSG3_HARQ_INTERVAL_MS)
        self.msg3_grant[active] = next_sf
        return ("harq", active, next_sf)

    def on_msg4(self, ue: int, t: int) -> None:
        """Connection setup: completes the procedure.  Duplicate or stray
        deliveries are ignored."""
        if self.phase[ue] != Phase.AWAITING_CONTENTION_RESOLUTION:
            return
        self.end_time[ue] = t
        self._transition(np.array([ue]), Phase.CONNECTED, t, "msg4_rx")

    def on_contention_timer(self, ue: int, t: int) -> None:
        """Timer ran out without a setup message: start over after backoff."""
        if (self.phase[ue] == Phase.AWAITING_CONTENTION_RESOLUTION
                and self.cr_deadline[ue] == t):
            self._backoff_restart(np.array([ue]), t, "contention_timer_expired")

    # -- base-station side --------------------------------------------------

    def enb_on_opportunity(self, detections, t: int) -> list[RarGrant]:
        """Grants for this opportunity's verdicts.

        Detected singles and unnoticed collisions each get one grant (the
        latter shared by every sender of the index); visible collisions and
        missed preambles get nothing.  Grant subframes pack round-robin onto
        subframes after the response delivery, skipping PRACH subframes.
        Accepts either the engine's detection list or an OpportunityOutcome.
        """
        if isinstance(detections, OpportunityOutcome):
            detections = [(idx, kind, np.asarray(ues))
                          for idx, (kind, ues) in sorted(detections.by_index.items())]
        granted = [(idx, ues) for idx, kind, ues in detections
                   if kind in (OutcomeKind.DETECTED_SINGLE,
                               OutcomeKind.UNDETECTED_COLLISION)]
        if self.rach.max_grants_per_rar is not None:
            granted = granted[: self.rach.max_grants_per_rar]
        grants = []
        sf = self.next_non_prach(t + self.rach.rar_processing_delay_ms + 1)
        used = 0
        for idx, ues in granted:
            if used == MSG3_GRANTS_PER_SUBFRAME:
                sf = self.next_non_prach(sf + 1)
                used = 0
            grants.append(RarGrant(preamble_index=int(idx), temp_rnti=self._next_rnti,
                                   ul_grant_subframe=sf, ue_ids=tuple(int(u) for u in ues)))
            self._next_rnti += 1
            used += 1
        return grants

    def detect_and_grant(self, batch, curve, t: int, bandwidth_hz: float):
        """Receiver pass plus grant allocation for one opportunity."""
        ues, idx, _power, snr = batch
        groups = _detect_groups(idx, snr, self.distance_m[ues], curve, self.rng,
                                bandwidth_hz)
        detections = [(pidx, kind, ues[g]) for pidx, kind, g in groups]
        return self.enb_on_opportunity(detections, t)

    # -- ideal baseline -----------------------------------------------------

    def ideal_on_opportunity(self, t: int):
        """Baseline without propagation: every preamble is delivered and
        collisions are resolved at the first step, so each transmitting
        device completes after the fixed access latency."""
        due = np.flatnonzero((self.phase == Phase.AWAITING_OPPORTUNITY)
                             & (self.earliest <= t))
        if due.size == 0:
            return None
        self.preamble_tx_counter[due] += 1
        self.pending_idx[due] = self.rng.integers(
            0, self.rach.num_contention_preambles, size=due.size)
        self.pending_op[due] = t
        self._transition(due, Phase.AWAITING_CONTENTION_RESOLUTION, t, "ideal_access")
        return due

    # -- views ---------------------------------------------------------------

    def snapshot(self, ue: int) -> UeRaState:
        return UeRaState(
            ue_id=ue, phase=Phase(int(self.phase[ue])),
            preamble_tx_counter=int(self.preamble_tx_counter[ue]),
            earliest_subframe=int(self.earliest[ue]),
            pending_preamble_index=int(self.pending_idx[ue]),
            pending_opportunity=int(self.pending_op[ue]),
            rar_deadline=int(self.rar_deadline[ue]),
            msg3_grant_subframe=int(self.msg3_grant[ue]),
            msg3_harq_count=int(self.msg3_harq[ue]),
            contention_deadline=int(self.cr_deadline[ue]),
            ra_start_time=int(self.ra_start[ue]),
            end_time=int(self.end_time[ue]),
            msg3_attempts=int(self.msg3_attempts[ue]),
        )

    def phase_counts(self) -> dict[Phase, int]:
        counts = np.bincount(self.phase, minlength=len(Phase))
        return {p: int(counts[p]) for p in Phase}
