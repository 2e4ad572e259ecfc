"""Minimum-time swarm routing over a skyway network.

The search runs A* over (node, per-drone battery) states. Traversing an
edge picks the best formation for each wind interval it crosses and is
feasible only when every drone arrives with its reserve intact;
recharging brings the whole swarm back to full capacity in batches no
larger than the node's pad count. The returned plan is deterministic
for identical inputs.
"""

from __future__ import annotations

import heapq
import itertools
import json
import math
from dataclasses import dataclass, field

from .formation import (
    EnergyModelConfig,
    FormationPattern,
    SwarmSpec,
    WindSchedule,
    best_formation,
    drone_power,
)
from .network import SkywayNetwork, node_distance_3d

# Absolute slack, as a fraction of capacity, for reserve comparisons.
_FEAS_RTOL = 1e-9


class InfeasibleActionError(ValueError):
    """A recharge was requested at a node without any pads."""


class NoRouteError(Exception):
    """No feasible plan exists; carries a summary of the explored frontier."""

    def __init__(self, src: str, dst: str, expanded: int, best_node: str, best_h: float):
        self.src = src
        self.dst = dst
        self.expanded = expanded
        self.best_node = best_node
        self.best_h = best_h
        super().__init__(
            f"no feasible route from {src!r} to {dst!r}: expanded {expanded} states, "
            f"closest reachable node {best_node!r} ({best_h:.1f} s from destination)"
        )


@dataclass(frozen=True)
class PlannerState:
    """Search state: where the swarm is, with how much charge, and when."""

    node: str
    battery: tuple[float, ...]
    elapsed: float


@dataclass(frozen=True)
class RechargeBatch:
    drone_ids: tuple[str, ...]
    start: float
    end: float


@dataclass(frozen=True)
class Stop:
    """What happens at an intermediate node: fly over, or recharge in batches."""

    kind: str
    batches: tuple[RechargeBatch, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in ("Flyover", "Recharge"):
            raise ValueError(f"unknown stop kind: {self.kind!r}")
        if self.kind == "Flyover" and self.batches:
            raise ValueError("flyover stops carry no batches")


@dataclass(frozen=True)
class RouteLeg:
    """One edge traversal with its formation timeline and energy bill."""

    from_id: str
    to_id: str
    formation_plan: tuple[tuple[float, FormationPattern], ...]
    depart: float
    arrive: float
    energy: tuple[float, ...]


@dataclass(frozen=True)
class RoutePlan:
    legs: tuple[RouteLeg, ...]
    stops: dict[str, Stop]
    total_time: float


def heuristic(node: str, dst: str, net: SkywayNetwork, cruise_speed: float) -> float:
    """Straight-line flight time lower bound, in seconds."""
    return node_distance_3d(net.node(node), net.node(dst)) / cruise_speed


def recharge_schedule(
    swarm: SwarmSpec,
    deficits: list[float],
    pads: int,
    charge_rate: float,
) -> tuple[list[RechargeBatch], float]:
    """Batch the swarm onto the available pads, neediest drones first.

    Drones with a positive deficit are sorted by descending deficit and
    grouped into consecutive batches of at most ``pads`` drones; each
    batch runs for its largest deficit divided by the charge rate, and
    batches run back to back. Batch times are relative to the start of
    the recharge. Drones already full stay off the pads.
    """
    if pads < 1:
        raise InfeasibleActionError("recharge requested at a node with no pads")
    if not (charge_rate > 0):
        raise ValueError("charge rate must be positive")
    if len(deficits) != swarm.size:
        raise ValueError("one deficit per drone required")
    if any(d < 0 for d in deficits):
        raise ValueError("deficits must be non-negative")
    needy = [(deficit, i) for i, deficit in enumerate(deficits) if deficit > 0.0]
    needy.sort(key=lambda pair: (-pair[0], pair[1]))
    batches: list[RechargeBatch] = []
    clock = 0.0
    for chunk_start in range(0, len(needy), pads):
        chunk = needy[chunk_start : chunk_start + pads]
        duration = chunk[0][0] / charge_rate
        batches.append(
            RechargeBatch(
                drone_ids=tuple(swarm.drones[i].id for _, i in chunk),
                start=clock,
                end=clock + duration,
            )
        )
        clock += duration
    return batches, clock


def _leg_profile(
    swarm: SwarmSpec,
    length: float,
    wind: WindSchedule,
    depart: float,
    heading: tuple[float, float],
    cfg: EnergyModelConfig,
) -> tuple[tuple[tuple[float, FormationPattern], ...], tuple[float, ...], float]:
    """Formation timeline and per-drone energy for one edge traversal."""
    duration = length / swarm.cruise_speed
    plan: list[tuple[float, FormationPattern]] = []
    energies = [0.0] * swarm.size
    for start, end, vector in wind.slices(depart, depart + duration):
        pattern = best_formation(swarm, vector, heading, cfg)
        if not plan or plan[-1][1] is not pattern:
            plan.append((start, pattern))
        dt = end - start
        for slot, drone in enumerate(swarm.drones):
            energies[slot] += drone_power(drone, slot, pattern, vector, heading, cfg) * dt
    return tuple(plan), tuple(energies), duration


def _edge_heading(net: SkywayNetwork, u: str, v: str) -> tuple[float, float]:
    pa, pb = net.node(u).position, net.node(v).position
    dx, dy = pb.x - pa.x, pb.y - pa.y
    norm = math.hypot(dx, dy)
    if norm <= 0.0:
        # Vertically stacked rooftops: heading is arbitrary for the
        # wind-angle computation, so pick a fixed one.
        return (1.0, 0.0)
    return (dx / norm, dy / norm)


def _quantize(battery: tuple[float, ...], capacities: tuple[float, ...], q: int) -> tuple[int, ...]:
    return tuple(
        min(q, int((b / cap) * q + 1e-9)) for b, cap in zip(battery, capacities)
    )


@dataclass
class _Label:
    state: PlannerState
    parent: "_Label | None"
    # None for the root; ("leg", RouteLeg) or ("recharge", batches, duration).
    action: tuple | None
    seq: int = field(default=0)


def plan_route(
    net: SkywayNetwork,
    swarm: SwarmSpec,
    wind: WindSchedule,
    cfg: EnergyModelConfig,
    charge_rate: float,
    src: str,
    dst: str,
    quantization: int = 20,
) -> RoutePlan:
    """Find the minimum-total-time plan from ``src`` to ``dst``.

    The swarm departs fully charged at t=0. State successors are edge
    traversals (feasible only if every drone keeps its reserve at
    arrival) and recharge-to-full actions at nodes with pads. States are
    keyed for the closed set by quantized battery levels; dominance
    pruning on exact values discards any state that is no better in
    every battery component and no earlier in time than a retained state
    at the same node. Raises NoRouteError when the frontier empties.
    """
    net.node(src)
    net.node(dst)
    if not (charge_rate > 0):
        raise ValueError("charge rate must be positive")
    if quantization < 1:
        raise ValueError("quantization must be at least 1")
    capacities = tuple(d.battery_capacity for d in swarm.drones)
    reserves = tuple(d.reserve for d in swarm.drones)
    slack = tuple(cap * _FEAS_RTOL for cap in capacities)

    if src == dst:
        return RoutePlan(legs=(), stops={}, total_time=0.0)

    root = _Label(state=PlannerState(node=src, battery=capacities, elapsed=0.0), parent=None, action=None)
    counter = itertools.count()
    start_h = heuristic(src, dst, net, swarm.cruise_speed)
    frontier: list[tuple[float, float, str, int, _Label]] = [
        (start_h, start_h, src, next(counter), root)
    ]
    closed: set[tuple] = set()
    retained: dict[str, list[PlannerState]] = {src: [root.state]}
    expanded = 0
    best_node, best_h = src, start_h

    def dominated(state: PlannerState) -> bool:
        for other in retained.get(state.node, ()):
            if other.elapsed <= state.elapsed and all(
                ob >= sb for ob, sb in zip(other.battery, state.battery)
            ):
                return True
        return False

    def retain(state: PlannerState) -> None:
        kept = retained.setdefault(state.node, [])
        kept[:] = [
            other
            for other in kept
            if not (
                state.elapsed <= other.elapsed
                and all(sb >= ob for sb, ob in zip(state.battery, other.battery))
            )
        ]
        kept.append(state)

    while frontier:
        _, _, _, _, label = heapq.heappop(frontier)
        state = label.state
        key = (state.node, _quantize(state.battery, capacities, quantization))
        if key in closed:
            continue
        closed.add(key)
        expanded += 1
        node_h = heuristic(state.node, dst, net, swarm.cruise_speed)
        if node_h < best_h:
            best_h, best_node = node_h, state.node
        if state.node == dst:
            return _assemble_plan(label)

        # Edge traversals, neighbors in id order.
        for nbr, length in net.neighbors(state.node):
            heading = _edge_heading(net, state.node, nbr)
            plan, energies, duration = _leg_profile(
                swarm, length, wind, state.elapsed, heading, cfg
            )
            battery = tuple(b - e for b, e in zip(state.battery, energies))
            if any(b < r - s for b, r, s in zip(battery, reserves, slack)):
                continue
            arrive = state.elapsed + duration
            leg = RouteLeg(
                from_id=state.node,
                to_id=nbr,
                formation_plan=plan,
                depart=state.elapsed,
                arrive=arrive,
                energy=energies,
            )
            succ = PlannerState(node=nbr, battery=battery, elapsed=arrive)
            if dominated(succ):
                continue
            retain(succ)
            h = heuristic(nbr, dst, net, swarm.cruise_speed)
            heapq.heappush(
                frontier,
                (arrive + h, h, nbr, next(counter), _Label(succ, label, ("leg", leg))),
            )

        # Recharge to full, when pads exist and someone actually needs it.
        pads = net.node(state.node).recharge_pads
        deficits = [max(0.0, cap - b) for cap, b in zip(capacities, state.battery)]
        if pads >= 1 and any(d > s for d, s in zip(deficits, slack)):
            batches, duration = recharge_schedule(swarm, deficits, pads, charge_rate)
            shifted = tuple(
                RechargeBatch(b.drone_ids, b.start + state.elapsed, b.end + state.elapsed)
                for b in batches
            )
            succ = PlannerState(
                node=state.node, battery=capacities, elapsed=state.elapsed + duration
            )
            if not dominated(succ):
                retain(succ)
                h = node_h
                heapq.heappush(
                    frontier,
                    (
                        succ.elapsed + h,
                        h,
                        state.node,
                        next(counter),
                        _Label(succ, label, ("recharge", shifted, duration)),
                    ),
                )

    raise NoRouteError(src, dst, expanded, best_node, best_h)


def _assemble_plan(label: _Label) -> RoutePlan:
    actions = []
    cursor: _Label | None = label
    while cursor is not None and cursor.action is not None:
        actions.append(cursor.action)
        cursor = cursor.parent
    actions.reverse()
    legs: list[RouteLeg] = []
    recharged: dict[str, tuple[RechargeBatch, ...]] = {}
    for action in actions:
        if action[0] == "leg":
            legs.append(action[1])
        else:
            node = legs[-1].to_id if legs else action[1][0].drone_ids and legs
            # A recharge before the first leg cannot happen (the swarm
            # starts full), so the node is always the last arrival.
            recharged[legs[-1].to_id] = action[1]
    stops: dict[str, Stop] = {}
    for leg in legs[1:]:
        node = leg.from_id
        if node in recharged:
            stops[node] = Stop(kind="Recharge", batches=recharged[node])
        else:
            stops[node] = Stop(kind="Flyover")
    total_time = legs[-1].arrive if legs else 0.0
    return RoutePlan(legs=tuple(legs), stops=stops, total_time=total_time)


def plan_to_json(plan: RoutePlan, extra: dict | None = None) -> str:
    """Serialize a plan; ``extra`` adds top-level keys (input hashes etc.)."""
    doc = {
        "legs": [
            {
                "from": leg.from_id,
                "to": leg.to_id,
                "depart": leg.depart,
                "arrive": leg.arrive,
                "formations": [[t, p.label] for t, p in leg.formation_plan],
                "energy": list(leg.energy),
            }
            for leg in plan.legs
        ],
        "stops": {
            node: (
                {"kind": stop.kind}
                if stop.kind == "Flyover"
                else {
                    "kind": stop.kind,
                    "batches": [[list(b.drone_ids), b.start, b.end] for b in stop.batches],
                }
            )
            for node, stop in sorted(plan.stops.items())
        },
        "total_time": plan.total_time,
    }
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def plan_from_json(text: str) -> RoutePlan:
    doc = json.loads(text)
    legs = tuple(
        RouteLeg(
            from_id=str(raw["from"]),
            to_id=str(raw["to"]),
            formation_plan=tuple(
                (float(t), FormationPattern.parse(name)) for t, name in raw["formations"]
            ),
            depart=float(raw["depart"]),
            arrive=float(raw["arrive"]),
            energy=tuple(float(e) for e in raw["energy"]),
        )
        for raw in doc["legs"]
    )
    stops = {}
    for node, raw in doc["stops"].items():
        if raw["kind"] == "Flyover":
            stops[node] = Stop(kind="Flyover")
        else:
            stops[node] = Stop(
                kind="Recharge",
                batches=tuple(
                    RechargeBatch(tuple(str(d) for d in ids), float(s), float(e))
                    for ids, s, e in raw["batches"]
                ),
            )
    return RoutePlan(legs=legs, stops=stops, total_time=float(doc["total_time"]))
