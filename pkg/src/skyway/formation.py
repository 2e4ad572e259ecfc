"""Swarm formations, wind schedules, and the per-drone power model.

Formation offsets live in a leader-centered frame: the along axis points
with the heading (negative is behind the leader), the cross axis points
left. The power model is multiplicative; every factor comes from an
:class:`EnergyModelConfig`, normally loaded from JSON.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

MAX_SWARM_SIZE = 9

_SQRT_HALF = math.sqrt(0.5)

# Cross-axis ranks for line-abreast slots: leader, then alternating sides.
_FRONT_RANKS = (0, 1, -1, 2, -2, 3, -3, 4, -4)

# Leader-centered ring: four cardinal positions, then the four corners.
_DIAMOND_UNITS = (
    (0.0, 0.0),
    (1.0, 0.0),
    (0.0, 1.0),
    (-1.0, 0.0),
    (0.0, -1.0),
    (1.0, 1.0),
    (-1.0, 1.0),
    (-1.0, -1.0),
    (1.0, -1.0),
)


class FormationPattern(enum.IntEnum):
    """The five supported formations, in tie-break order."""

    COLUMN = 0
    FRONT = 1
    ECHELON = 2
    VEE = 3
    DIAMOND = 4

    @property
    def label(self) -> str:
        return self.name.capitalize()

    @classmethod
    def parse(cls, name: str) -> "FormationPattern":
        try:
            return cls[name.upper()]
        except KeyError:
            raise ValueError(f"unknown formation pattern: {name!r}") from None


class EnergyConfigError(ValueError):
    """A required energy-model table entry is missing or invalid."""


@dataclass(frozen=True)
class DroneSpec:
    """Per-drone payload and battery description."""

    id: str
    payload: float
    battery_capacity: float
    reserve_fraction: float = 0.1

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("drone id must be non-empty")
        if self.payload < 0:
            raise ValueError(f"drone {self.id}: payload must be non-negative")
        if not (self.battery_capacity > 0):
            raise ValueError(f"drone {self.id}: battery capacity must be positive")
        if not (0 <= self.reserve_fraction < 1):
            raise ValueError(f"drone {self.id}: reserve fraction must be in [0, 1)")

    @property
    def reserve(self) -> float:
        return self.reserve_fraction * self.battery_capacity


@dataclass(frozen=True)
class SwarmSpec:
    """Drone roster plus the shared spacing and cruise speed."""

    drones: tuple[DroneSpec, ...]
    spacing: float
    cruise_speed: float

    def __post_init__(self) -> None:
        drones = tuple(self.drones)
        object.__setattr__(self, "drones", drones)
        if not (1 <= len(drones) <= MAX_SWARM_SIZE):
            raise ValueError(f"swarm size must be in [1, {MAX_SWARM_SIZE}], got {len(drones)}")
        ids = [d.id for d in drones]
        if len(set(ids)) != len(ids):
            raise ValueError("drone ids must be unique")
        if not (self.spacing > 0):
            raise ValueError("spacing must be positive")
        if not (self.cruise_speed > 0):
            raise ValueError("cruise speed must be positive")

    @property
    def size(self) -> int:
        return len(self.drones)


@dataclass(frozen=True)
class WindSchedule:
    """Piecewise-constant wind vector over time.

    Entries are (start_time, (wx, wy)) with strictly increasing start
    times beginning at t=0; the final entry holds forever.
    """

    entries: tuple[tuple[float, tuple[float, float]], ...]

    def __post_init__(self) -> None:
        entries = tuple((float(t), (float(w[0]), float(w[1]))) for t, w in self.entries)
        object.__setattr__(self, "entries", entries)
        if not entries:
            raise ValueError("wind schedule needs at least one entry")
        if entries[0][0] != 0.0:
            raise ValueError("wind schedule must start at t=0")
        for (t0, _), (t1, _) in zip(entries, entries[1:]):
            if not (t1 > t0):
                raise ValueError("wind schedule start times must be strictly increasing")

    def wind_at(self, t: float) -> tuple[float, float]:
        current = self.entries[0][1]
        for start, vector in self.entries:
            if start <= t:
                current = vector
            else:
                break
        return current

    def slices(self, t0: float, t1: float) -> list[tuple[float, float, tuple[float, float]]]:
        """Constant-wind slices covering [t0, t1], as (start, end, wind)."""
        if t1 < t0:
            raise ValueError("slice interval must not be reversed")
        if t1 == t0:
            return []
        out: list[tuple[float, float, tuple[float, float]]] = []
        starts = [t for t, _ in self.entries]
        for i, (start, vector) in enumerate(self.entries):
            end = starts[i + 1] if i + 1 < len(starts) else math.inf
            lo = max(start, t0)
            hi = min(end, t1)
            if hi > lo:
                out.append((lo, hi, vector))
        return out


@dataclass(frozen=True)
class EnergyModelConfig:
    """Multiplicative power-model tables.

    ``position_factors[pattern]`` is a slot-indexed tuple covering every
    slot up to :data:`MAX_SWARM_SIZE`. ``wind_response[pattern]`` is a
    list of (relative angle in degrees, factor per m/s) bins spanning
    [0, 180]; 0 degrees means headwind.
    """

    base_power: float
    payload_coeff: float
    position_factors: Mapping[FormationPattern, tuple[float, ...]]
    wind_response: Mapping[FormationPattern, tuple[tuple[float, float], ...]]

    def __post_init__(self) -> None:
        if not (self.base_power > 0):
            raise EnergyConfigError("base_power must be positive")
        if self.payload_coeff < 0:
            raise EnergyConfigError("payload_coeff must be non-negative")
        for pattern in FormationPattern:
            factors = self.position_factors.get(pattern)
            if factors is None or len(factors) < MAX_SWARM_SIZE:
                raise EnergyConfigError(
                    f"position_factors missing slots for {pattern.label}"
                )
            if any(not (f > 0) for f in factors):
                raise EnergyConfigError(f"position factors for {pattern.label} must be positive")
            bins = self.wind_response.get(pattern)
            if not bins:
                raise EnergyConfigError(f"wind_response missing for {pattern.label}")
            angles = [a for a, _ in bins]
            if angles[0] != 0.0 or angles[-1] != 180.0:
                raise EnergyConfigError(
                    f"wind_response bins for {pattern.label} must span [0, 180] degrees"
                )
            if any(not (b > a) for a, b in zip(angles, angles[1:])):
                raise EnergyConfigError(
                    f"wind_response angles for {pattern.label} must be strictly increasing"
                )
            if any(not (f > 0) for _, f in bins):
                raise EnergyConfigError(f"wind factors for {pattern.label} must be positive")

    def position_factor(self, pattern: FormationPattern, slot: int) -> float:
        factors = self.position_factors[pattern]
        if not (0 <= slot < len(factors)):
            raise EnergyConfigError(f"no position factor for {pattern.label} slot {slot}")
        return factors[slot]

    def wind_factor(self, pattern: FormationPattern, angle_deg: float) -> float:
        bins = self.wind_response[pattern]
        angle = min(180.0, max(0.0, angle_deg))
        for (a0, f0), (a1, f1) in zip(bins, bins[1:]):
            if angle <= a1:
                return f0 + (f1 - f0) * (angle - a0) / (a1 - a0)
        return bins[-1][1]


def slot_offsets(pattern: FormationPattern, n: int, spacing: float) -> list[tuple[float, float]]:
    """Relative (along, cross) offsets for ``n`` slots, leader first at (0, 0)."""
    if not (1 <= n <= MAX_SWARM_SIZE):
        raise ValueError(f"swarm size must be in [1, {MAX_SWARM_SIZE}], got {n}")
    if not (spacing > 0):
        raise ValueError("spacing must be positive")
    out: list[tuple[float, float]] = []
    for i in range(n):
        if pattern is FormationPattern.COLUMN:
            out.append((-i * spacing, 0.0))
        elif pattern is FormationPattern.FRONT:
            out.append((0.0, _FRONT_RANKS[i] * spacing))
        elif pattern is FormationPattern.ECHELON:
            out.append((-i * spacing, i * spacing))
        elif pattern is FormationPattern.VEE:
            if i == 0:
                out.append((0.0, 0.0))
            else:
                k = (i + 1) // 2
                side = 1.0 if i % 2 == 1 else -1.0
                d = k * spacing * _SQRT_HALF
                out.append((-d, side * d))
        else:
            ua, uc = _DIAMOND_UNITS[i]
            out.append((ua * spacing, uc * spacing))
    return out


def formation_width(pattern: FormationPattern, n: int, spacing: float) -> float:
    """Lateral extent of the formation plus one spacing of margin per side."""
    offsets = slot_offsets(pattern, n, spacing)
    cross = [c for _, c in offsets]
    return (max(cross) - min(cross)) + 2.0 * spacing


def max_formation_width(n: int, spacing: float) -> float:
    """Corridor width that accommodates every pattern at this swarm size."""
    return max(formation_width(p, n, spacing) for p in FormationPattern)


def relative_wind_angle(wind: tuple[float, float], heading: tuple[float, float]) -> float:
    """Angle in degrees between the heading and the wind source direction.

    0 degrees is a pure headwind, 180 a pure tailwind. Calm wind maps
    to 0 by convention (the factor is multiplied by zero speed anyway).
    """
    speed = math.hypot(wind[0], wind[1])
    if speed <= 0.0:
        return 0.0
    h_norm = math.hypot(heading[0], heading[1])
    if h_norm <= 0.0:
        raise ValueError("heading must be a non-zero vector")
    # Source direction is the direction the wind blows from.
    cos_a = (heading[0] * -wind[0] + heading[1] * -wind[1]) / (h_norm * speed)
    cos_a = min(1.0, max(-1.0, cos_a))
    return math.degrees(math.acos(cos_a))


def drone_power(
    drone: DroneSpec,
    slot: int,
    pattern: FormationPattern,
    wind: tuple[float, float],
    heading: tuple[float, float],
    cfg: EnergyModelConfig,
) -> float:
    """Instantaneous electrical power draw for one drone, in watts."""
    position = cfg.position_factor(pattern, slot)
    speed = math.hypot(wind[0], wind[1])
    angle = relative_wind_angle(wind, heading)
    wind_term = 1.0 + cfg.wind_factor(pattern, angle) * speed
    payload_term = 1.0 + cfg.payload_coeff * drone.payload
    return cfg.base_power * payload_term * position * wind_term


def best_formation(
    swarm: SwarmSpec,
    wind: tuple[float, float],
    heading: tuple[float, float],
    cfg: EnergyModelConfig,
) -> FormationPattern:
    """Pattern minimizing the worst per-drone power draw.

    The earliest-depleted drone grounds the whole swarm, so the swarm
    balances by minimizing the maximum draw; ties resolve in enum order.
    """
    best: FormationPattern | None = None
    best_worst = math.inf
    for pattern in FormationPattern:
        worst = max(
            drone_power(drone, slot, pattern, wind, heading, cfg)
            for slot, drone in enumerate(swarm.drones)
        )
        if worst < best_worst:
            best_worst = worst
            best = pattern
    assert best is not None
    return best


def segment_energy(
    swarm: SwarmSpec,
    length: float,
    pattern: FormationPattern,
    wind_schedule: WindSchedule,
    depart_time: float,
    heading: tuple[float, float],
    cfg: EnergyModelConfig,
) -> list[float]:
    """Per-drone energy to fly ``length`` meters in a fixed pattern.

    Integrates the piecewise-constant power over the wind intervals
    covering the traversal window.
    """
    if not (length > 0):
        raise ValueError("segment length must be positive")
    duration = length / swarm.cruise_speed
    energies = [0.0] * swarm.size
    for start, end, wind in wind_schedule.slices(depart_time, depart_time + duration):
        dt = end - start
        for slot, drone in enumerate(swarm.drones):
            energies[slot] += drone_power(drone, slot, pattern, wind, heading, cfg) * dt
    return energies


def energy_config_from_json(text: str) -> EnergyModelConfig:
    """Parse the energy-model JSON document."""
    doc = json.loads(text)
    try:
        base_power = float(doc["base_power"])
        payload_coeff = float(doc["payload_coeff"])
        raw_pos = doc["position_factors"]
        raw_wind = doc["wind_response"]
    except KeyError as exc:
        raise EnergyConfigError(f"energy config missing key: {exc}") from None
    position_factors: dict[FormationPattern, tuple[float, ...]] = {}
    for name, slots in raw_pos.items():
        pattern = FormationPattern.parse(name)
        by_index = {int(k): float(v) for k, v in slots.items()}
        if sorted(by_index) != list(range(len(by_index))):
            raise EnergyConfigError(f"position factor slots for {name} must be contiguous from 0")
        position_factors[pattern] = tuple(by_index[i] for i in range(len(by_index)))
    wind_response: dict[FormationPattern, tuple[tuple[float, float], ...]] = {}
    for name, bins in raw_wind.items():
        pattern = FormationPattern.parse(name)
        wind_response[pattern] = tuple((float(a), float(f)) for a, f in bins)
    return EnergyModelConfig(
        base_power=base_power,
        payload_coeff=payload_coeff,
        position_factors=position_factors,
        wind_response=wind_response,
    )


def swarm_from_json(text: str) -> tuple[SwarmSpec, WindSchedule]:
    """Parse the swarm + wind JSON document."""
    doc = json.loads(text)
    try:
        drones = tuple(
            DroneSpec(
                id=str(d["id"]),
                payload=float(d["payload"]),
                battery_capacity=float(d["battery_capacity"]),
                reserve_fraction=float(d.get("reserve_fraction", 0.1)),
            )
            for d in doc["drones"]
        )
        swarm = SwarmSpec(
            drones=drones,
            spacing=float(doc["spacing"]),
            cruise_speed=float(doc["cruise_speed"]),
        )
        wind_entries = tuple((float(row[0]), (float(row[1]), float(row[2]))) for row in doc["wind"])
    except KeyError as exc:
        raise ValueError(f"swarm config missing key: {exc}") from None
    return swarm, WindSchedule(entries=wind_entries)
