"""Urban radio propagation: pathloss, walls, shadowing, antenna pattern, SNR.

The link budget is COST-231-Hata urban pathloss (large-city variant) plus an
external-wall penetration term per wall type, 5 dB per estimated internal
wall crossing, and log-normal shadowing drawn once per (device, sector) pair
and frozen for the run (devices do not move).  All constants are
ScenarioConfig fields; docs/models.md lists the defaults.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import ScenarioConfig

THERMAL_NOISE_DBM_HZ = -174.0
FRONT_TO_BACK_DB = 20.0  # antenna pattern floor below max gain


class PropagationDomainError(ValueError):
    """Raised for physically meaningless inputs (e.g. distance <= 0)."""


def pathloss_db(distance_m, frequency_mhz, h_base_m: float = 30.0,
                h_mobile_m: float = 1.5):
    """COST-231-Hata urban pathloss in dB (large-city correction).

    Scalar or ndarray ``distance_m``; raises for any distance <= 0.
    """
    d = np.asarray(distance_m, dtype=float)
    if np.any(d <= 0.0):
        raise PropagationDomainError(f"distance must be > 0 m (got {distance_m})")
    f = float(frequency_mhz)
    a_hm = 3.2 * math.log10(11.75 * h_mobile_m) ** 2 - 4.97
    c_m = 3.0  # dense urban
    pl = (46.3 + 33.9 * math.log10(f) - 13.82 * math.log10(h_base_m) - a_hm
          + (44.9 - 6.55 * math.log10(h_base_m)) * np.log10(d / 1000.0) + c_m)
    return pl if pl.ndim else float(pl)


def noise_floor_dbm(bandwidth_hz: float, noise_figure_db: float) -> float:
    """Receiver noise floor: -174 dBm/Hz + 10 log10(B) + NF."""
    if bandwidth_hz <= 0:
        raise PropagationDomainError(f"bandwidth must be > 0 Hz (got {bandwidth_hz})")
    return THERMAL_NOISE_DBM_HZ + 10.0 * math.log10(bandwidth_hz) + noise_figure_db


def antenna_gain_db(azimuth_deg: float, beamwidth_deg: float, max_gain_dbi: float,
                    bearing_deg):
    """3GPP-style parabolic sector pattern with a 20 dB front-to-back limit."""
    delta = (np.asarray(bearing_deg, dtype=float) - azimuth_deg + 180.0) % 360.0 - 180.0
    g = max_gain_dbi - np.minimum(12.0 * (delta / beamwidth_deg) ** 2, FRONT_TO_BACK_DB)
    return g if g.ndim else float(g)


def internal_wall_crossings(mtd_xy, building, site_xy, apartments_grid,
                            cap: int) -> int:
    """Apartment-boundary crossings of the ray from the device towards the
    site, up to where it exits the building footprint; capped."""
    nax, nay = apartments_grid
    cell_x = (building.x1 - building.x0) / nax
    cell_y = (building.y1 - building.y0) / nay
    x, y = mtd_xy
    dx, dy = site_xy[0] - x, site_xy[1] - y
    # Parameter t where the ray leaves the footprint.
    t_exit = math.inf
    if dx > 0:
        t_exit = min(t_exit, (building.x1 - x) / dx)
    elif dx < 0:
        t_exit = min(t_exit, (building.x0 - x) / dx)
    if dy > 0:
        t_exit = min(t_exit, (building.y1 - y) / dy)
    elif dy < 0:
        t_exit = min(t_exit, (building.y0 - y) / dy)
    if not math.isfinite(t_exit):  # site directly above: exits through the roof
        return 0
    ex, ey = x + t_exit * dx, y + t_exit * dy
    cell = lambda px, py: (
        min(int((px - building.x0) / cell_x), nax - 1),
        min(int((py - building.y0) / cell_y), nay - 1),
    )
    cx0, cy0 = cell(x, y)
    cx1, cy1 = cell(ex, ey)
    return min(abs(cx1 - cx0) + abs(cy1 - cy0), cap)


def wall_loss_db(mtd, building, site_xy, scenario: ScenarioConfig) -> float:
    """External wall loss by wall type plus per-internal-wall loss; 0 for an
    outdoor device."""
    if not mtd.indoor or building is None:
        return 0.0
    from .scenario import _apartment_grid  # local import avoids a cycle at module load

    ewl = scenario.external_wall_loss_db[building.external_wall_type]
    crossings = internal_wall_crossings(
        mtd.position[:2], building, site_xy,
        _apartment_grid(scenario.apartments_per_floor), scenario.max_internal_walls)
    return ewl + crossings * scenario.internal_wall_loss_db


class ShadowingTable:
    """Zero-mean log-normal shadowing, memoized per (device, sector)."""

    def __init__(self, n_mtds: int, n_sectors: int, sigma_db: float, rng):
        if sigma_db < 0:
            raise PropagationDomainError(f"sigma must be >= 0 (got {sigma_db})")
        if sigma_db == 0.0:
            self.values = np.zeros((n_mtds, n_sectors))
        else:
            self.values = rng.normal(0.0, sigma_db, size=(n_mtds, n_sectors))

    def get(self, mtd: int, sector: int) -> float:
        return float(self.values[mtd, sector])


def shadowing_db(mtd: int, sector: int, table: ShadowingTable) -> float:
    """Lookup into the per-run shadowing table (same pair, same value)."""
    return table.get(mtd, sector)


@dataclass(frozen=True)
class LinkState:
    """One device/sector link budget, all in dB (distance in meters)."""

    mtd_id: int
    sector: int
    distance_m: float
    pathloss_db: float
    shadowing_db: float
    antenna_gain_db: float
    wall_loss_db: float

    @property
    def total_loss_db(self) -> float:
        return (self.pathloss_db + self.wall_loss_db + self.shadowing_db
                - self.antenna_gain_db)


def uplink_snr_db(tx_power_dbm, link: LinkState, bandwidth_hz: float,
                  noise_figure_db: float):
    """SNR at the base station for a transmission over ``link``."""
    floor = noise_floor_dbm(bandwidth_hz, noise_figure_db)
    return tx_power_dbm - link.total_loss_db - floor


class LinkModel:
    """Per-run link budgets between every device and the three sectors.

    Pathloss, wall loss and shadowing are computed once at construction;
    everything afterwards is a table lookup, safe to share read-only.
    """

    def __init__(self, scenario: ScenarioConfig, buildings, mtds, site, rng):
        self.scenario = scenario
        self.site = site
        n = len(mtds)
        n_sec = len(site.sectors)
        sx, sy, sz = site.position
        pos = np.array([m.position for m in mtds], dtype=float).reshape(n, 3)
        self.distance_m = np.sqrt(((pos - [sx, sy, sz]) ** 2).sum(axis=1))
        self.bearing_deg = np.degrees(np.arctan2(pos[:, 1] - sy, pos[:, 0] - sx))
        self.pathloss_dl_db = pathloss_db(self.distance_m, scenario.dl_carrier_freq_mhz,
                                          sz, scenario.mtd_height_above_floor_m)
        self.pathloss_ul_db = pathloss_db(self.distance_m, scenario.ul_carrier_freq_mhz,
                                          sz, scenario.mtd_height_above_floor_m)
        by_id = {b.id: b for b in buildings}
        self.wall_db = np.array([
            wall_loss_db(m, by_id.get(m.building_id), (sx, sy), scenario) for m in mtds
        ])
        self.shadowing = ShadowingTable(n, n_sec, scenario.shadowing_sigma_db, rng)
        self.gain_db = np.stack([
            antenna_gain_db(s.azimuth_deg, s.beamwidth_deg, s.max_gain_dbi,
                            self.bearing_deg)
            for s in site.sectors
        ], axis=1)  # (n, n_sec)
        self._serving: np.ndarray | None = None

    def total_loss_db(self, mtd: int, sector: int, direction: str = "ul") -> float:
        pl = self.pathloss_ul_db if direction == "ul" else self.pathloss_dl_db
        return float(pl[mtd] + self.wall_db[mtd] + self.shadowing.values[mtd, sector]
                     - self.gain_db[mtd, sector])

    def dl_rx_power_dbm(self, mtd: int, sector: int) -> float:
        return self.scenario.enb_tx_power_dbm - self.total_loss_db(mtd, sector, "dl")

    def link_state(self, mtd: int, sector: int, direction: str = "ul") -> LinkState:
        pl = self.pathloss_ul_db if direction == "ul" else self.pathloss_dl_db
        return LinkState(
            mtd_id=mtd, sector=sector, distance_m=float(self.distance_m[mtd]),
            pathloss_db=float(pl[mtd]),
            shadowing_db=self.shadowing.values[mtd, sector],
            antenna_gain_db=float(self.gain_db[mtd, sector]),
            wall_loss_db=float(self.wall_db[mtd]),
        )

    def set_serving(self, serving: dict[int, int]) -> None:
        n = len(self.distance_m)
        sec = np.array([serving[m] for m in range(n)], dtype=np.int64)
        self._serving = sec
        rows = np.arange(n)
        shade = self.shadowing.values[rows, sec]
        gain = self.gain_db[rows, sec]
        # Serving-link totals used by the MAC: the device's pathloss estimate
        # comes from downlink measurements, preambles travel uplink.
        self.serving_loss_dl_db = self.pathloss_dl_db + self.wall_db + shade - gain
        self.serving_loss_ul_db = self.pathloss_ul_db + self.wall_db + shade - gain

    @property
    def serving_sector(self) -> np.ndarray:
        if self._serving is None:
            raise RuntimeError("set_serving() has not been called")
        return self._serving
