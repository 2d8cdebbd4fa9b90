"""Smart-city deployment geometry.

A regular grid of identical buildings, every device placed indoors
(uniformly over building, floor, apartment and position within the
apartment), and a single site at the center whose three sectors cover the
area.  Generation is a pure function of (ScenarioConfig, rng stream).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import ScenarioConfig


class GeometryError(ValueError):
    """Raised when the building grid does not fit the configured area."""


@dataclass(frozen=True)
class Building:
    id: int
    x0: float
    y0: float
    x1: float
    y1: float
    floors: int
    apartments_per_floor: int
    external_wall_type: str

    def contains_xy(self, x: float, y: float) -> bool:
        return self.x0 <= x <= self.x1 and self.y0 <= y <= self.y1


@dataclass(frozen=True)
class DevicePlacement:
    id: int
    position: tuple[float, float, float]
    indoor: bool
    building_id: int | None
    floor: int | None


@dataclass(frozen=True)
class Sector:
    azimuth_deg: float
    beamwidth_deg: float
    max_gain_dbi: float


@dataclass(frozen=True)
class Site:
    position: tuple[float, float, float]
    sectors: tuple[Sector, ...]


@dataclass(frozen=True)
class Deployment:
    buildings: tuple[Building, ...]
    mtds: tuple[DevicePlacement, ...]
    site: Site
    serving_sector: dict[int, int]


def distance_3d(a, b) -> float:
    """Euclidean distance between two (x, y, z) points in meters."""
    return math.dist(a, b)


def grid_extent(scenario: ScenarioConfig) -> tuple[float, float]:
    """Bounding box of the building grid (meters)."""
    fx, fy = scenario.building_footprint_m
    px, py = scenario.grid_pitch_m
    return ((scenario.grid_columns - 1) * px + fx,
            (scenario.grid_rows - 1) * py + fy)


def deployment_area(scenario: ScenarioConfig) -> tuple[float, float]:
    """Configured deployment area; defaults to the grid bounding box."""
    ex, ey = grid_extent(scenario)
    if scenario.deployment_area_m is None:
        return ex, ey
    ax, ay = scenario.deployment_area_m
    if ax < ex or ay < ey:
        raise GeometryError(
            f"deployment_area_m {scenario.deployment_area_m} cannot contain the "
            f"building grid extent ({ex:.1f}, {ey:.1f})")
    return ax, ay


def _apartment_grid(apartments_per_floor: int) -> tuple[int, int]:
    """Split a floor into ax*ay apartment cells (ay the largest divisor
    not exceeding the square root)."""
    ay = int(math.isqrt(apartments_per_floor))
    while apartments_per_floor % ay:
        ay -= 1
    return apartments_per_floor // ay, ay


def _make_buildings(scenario: ScenarioConfig, ax: float, ay: float) -> tuple[Building, ...]:
    fx, fy = scenario.building_footprint_m
    px, py = scenario.grid_pitch_m
    ex, ey = grid_extent(scenario)
    ox, oy = (ax - ex) / 2.0, (ay - ey) / 2.0  # center the grid in the area
    buildings = []
    for row in range(scenario.grid_rows):
        for col in range(scenario.grid_columns):
            x0 = ox + col * px
            y0 = oy + row * py
            buildings.append(Building(
                id=len(buildings), x0=x0, y0=y0, x1=x0 + fx, y1=y0 + fy,
                floors=scenario.floors_per_building,
                apartments_per_floor=scenario.apartments_per_floor,
                external_wall_type=scenario.external_wall_type,
            ))
    return tuple(buildings)


def _place_mtds(scenario: ScenarioConfig, buildings, rng) -> tuple[DevicePlacement, ...]:
    n = scenario.num_mtds
    fx, fy = scenario.building_footprint_m
    nax, nay = _apartment_grid(scenario.apartments_per_floor)
    cell_x, cell_y = fx / nax, fy / nay
    b_idx = rng.integers(0, len(buildings), size=n)
    floor = rng.integers(0, scenario.floors_per_building, size=n)
    apartment = rng.integers(0, scenario.apartments_per_floor, size=n)
    off = rng.random(size=(n, 2))
    z = floor * scenario.floor_height_m + scenario.mtd_height_above_floor_m
    mtds = []
    for i in range(n):
        b = buildings[b_idx[i]]
        cx, cy = int(apartment[i]) % nax, int(apartment[i]) // nax
        x = b.x0 + (cx + off[i, 0]) * cell_x
        y = b.y0 + (cy + off[i, 1]) * cell_y
        mtds.append(DevicePlacement(
            id=i, position=(float(x), float(y), float(z[i])), indoor=True,
            building_id=b.id, floor=int(floor[i]),
        ))
    return tuple(mtds)


def select_serving_sector(mtd: DevicePlacement, site: Site, prop) -> int:
    """Sector with the strongest downlink at the device; ties break to the
    lowest index.  ``prop`` must expose dl_rx_power_dbm(mtd_id, sector)."""
    powers = [prop.dl_rx_power_dbm(mtd.id, s) for s in range(len(site.sectors))]
    return int(np.argmax(powers))


def generate_deployment(scenario: ScenarioConfig, rng):
    """Build the full deployment plus its link model.

    Returns (Deployment, LinkModel).  Geometry draws come first on the
    stream, shadowing draws second, so results are reproducible from the
    rng state alone.
    """
    from .propagation import LinkModel  # deferred: propagation imports config only

    area = deployment_area(scenario)
    buildings = _make_buildings(scenario, *area)
    mtds = _place_mtds(scenario, buildings, rng)
    site = Site(
        position=(area[0] / 2.0, area[1] / 2.0, scenario.site_height_m),
        sectors=tuple(Sector(a, scenario.sector_beamwidth_deg, scenario.sector_max_gain_dbi)
                      for a in scenario.sector_azimuths_deg),
    )
    links = LinkModel(scenario, buildings, mtds, site, rng)
    serving = {m.id: select_serving_sector(m, site, links) for m in mtds}
    links.set_serving(serving)
    deployment = Deployment(buildings=buildings, mtds=mtds, site=site,
                            serving_sector=serving)
    return deployment, links


def deployment_rows(deployment: Deployment):
    """Rows (id, x, y, z, building_id, floor, serving_sector) for a CSV dump."""
    for m in deployment.mtds:
        yield (m.id, m.position[0], m.position[1], m.position[2],
               m.building_id, m.floor, deployment.serving_sector[m.id])


def write_deployment_csv(deployment: Deployment, path) -> None:
    with open(path, "w") as fh:
        fh.write("id,x,y,z,building_id,floor,serving_sector\n")
        for row in deployment_rows(deployment):
            fh.write(f"{row[0]},{row[1]!r},{row[2]!r},{row[3]!r},{row[4]},{row[5]},{row[6]}\n")
