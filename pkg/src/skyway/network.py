"""Skyway network construction from a building scene, with GeoJSON export.

A network is an undirected graph: one node per building rooftop, one
edge per unobstructed line-of-sight corridor. Networks are immutable
once built and safe to share across threads.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .geometry import Building, NoFlyZone, Point2, Polygon2, line_of_sight


class InvalidSceneError(ValueError):
    """The scene description violates a structural requirement."""


@dataclass(frozen=True)
class SkywayNode:
    """Rooftop node mirroring one building."""

    id: str
    position: Point2
    height: float
    recharge_pads: int


@dataclass(frozen=True)
class SkywayEdge:
    """Undirected line-of-sight segment, stored with ``a`` < ``b``."""

    a: str
    b: str
    length: float

    def __post_init__(self) -> None:
        if self.a == self.b:
            raise ValueError("self-loop edges are not allowed")
        if self.a > self.b:
            raise ValueError("edge endpoints must be in lexicographic order")
        if not (self.length > 0):
            raise ValueError("edge length must be positive")


class SkywayNetwork:
    """Immutable rooftop graph with deterministic iteration order."""

    def __init__(self, nodes: Iterable[SkywayNode], edges: Iterable[SkywayEdge]):
        node_list = sorted(nodes, key=lambda n: n.id)
        ids = [n.id for n in node_list]
        if len(set(ids)) != len(ids):
            raise InvalidSceneError("duplicate node ids")
        self.nodes: dict[str, SkywayNode] = {n.id: n for n in node_list}
        seen: set[tuple[str, str]] = set()
        edge_list = []
        for e in edges:
            if e.a not in self.nodes or e.b not in self.nodes:
                raise InvalidSceneError(f"edge {e.a}-{e.b} references an unknown node")
            if (e.a, e.b) in seen:
                raise InvalidSceneError(f"duplicate edge {e.a}-{e.b}")
            seen.add((e.a, e.b))
            edge_list.append(e)
        self.edges: tuple[SkywayEdge, ...] = tuple(sorted(edge_list, key=lambda e: (e.a, e.b)))
        adjacency: dict[str, list[tuple[str, float]]] = {nid: [] for nid in self.nodes}
        for e in self.edges:
            adjacency[e.a].append((e.b, e.length))
            adjacency[e.b].append((e.a, e.length))
        self._adjacency = {nid: sorted(nbrs) for nid, nbrs in adjacency.items()}

    def neighbors(self, node_id: str) -> list[tuple[str, float]]:
        """Incident edges as (neighbor id, length), sorted by neighbor id."""
        if node_id not in self._adjacency:
            raise KeyError(f"unknown node: {node_id!r}")
        return list(self._adjacency[node_id])

    def node(self, node_id: str) -> SkywayNode:
        if node_id not in self.nodes:
            raise KeyError(f"unknown node: {node_id!r}")
        return self.nodes[node_id]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SkywayNetwork):
            return NotImplemented
        return self.nodes == other.nodes and self.edges == other.edges


def node_distance_3d(a: SkywayNode, b: SkywayNode) -> float:
    """Straight-line distance between two rooftop points."""
    planar = math.hypot(b.position.x - a.position.x, b.position.y - a.position.y)
    return math.hypot(planar, b.height - a.height)


def build_network(
    scene: Sequence[Building],
    nfzs: Sequence[NoFlyZone],
    swarm_width: float,
) -> SkywayNetwork:
    """Connect every building pair that has line of sight at this width."""
    if not scene:
        raise InvalidSceneError("scene must contain at least one building")
    ids = [b.id for b in scene]
    if len(set(ids)) != len(ids):
        raise InvalidSceneError("building ids must be unique")
    if not (swarm_width > 0):
        raise InvalidSceneError("swarm width must be positive")
    buildings = sorted(scene, key=lambda b: b.id)
    nodes = [
        SkywayNode(id=b.id, position=b.center, height=b.height, recharge_pads=b.recharge_pads)
        for b in buildings
    ]
    by_id = {n.id: n for n in nodes}
    edges = []
    for i, first in enumerate(buildings):
        for second in buildings[i + 1 :]:
            if line_of_sight(first, second, buildings, nfzs, swarm_width):
                length = node_distance_3d(by_id[first.id], by_id[second.id])
                edges.append(SkywayEdge(a=first.id, b=second.id, length=length))
    return SkywayNetwork(nodes, edges)


def load_scene(text: str) -> tuple[list[Building], list[NoFlyZone]]:
    """Parse a scene JSON document into buildings and no-fly zones.

    No-fly-zone vertex rings are accepted in either orientation and
    normalized to counter-clockwise.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidSceneError(f"scene is not valid JSON: {exc}") from None
    try:
        buildings = [
            Building(
                id=str(b["id"]),
                center=Point2(float(b["x"]), float(b["y"])),
                radius=float(b["radius"]),
                height=float(b["height"]),
                recharge_pads=int(b["recharge_pads"]),
            )
            for b in doc["buildings"]
        ]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidSceneError(f"bad building entry: {exc}") from None
    ids = [b.id for b in buildings]
    if len(set(ids)) != len(ids):
        raise InvalidSceneError("building ids must be unique")
    zones: list[NoFlyZone] = []
    for z in doc.get("no_fly_zones", []):
        try:
            points = [Point2(float(x), float(y)) for x, y in z["vertices"]]
            if _ring_signed_area(points) < 0:
                points.reverse()
            zones.append(NoFlyZone(id=str(z["id"]), shape=Polygon2(tuple(points))))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidSceneError(f"bad no-fly zone entry: {exc}") from None
    return buildings, zones


def _ring_signed_area(points: Sequence[Point2]) -> float:
    total = 0.0
    for i in range(len(points)):
        a, b = points[i], points[(i + 1) % len(points)]
        total += a.x * b.y - b.x * a.y
    return 0.5 * total


def export_geojson(net: SkywayNetwork) -> str:
    """Serialize the network as a byte-stable GeoJSON FeatureCollection.

    Node features come first sorted by id, then edge features sorted by
    endpoint pair, so identical networks export identically.
    """
    features = []
    for node_id in sorted(net.nodes):
        node = net.nodes[node_id]
        features.append(
            {
                "type": "Feature",
                "geometry": {
                    "type": "Point",
                    "coordinates": [node.position.x, node.position.y],
                },
                "properties": {
                    "id": node.id,
                    "height": node.height,
                    "recharge_pads": node.recharge_pads,
                },
            }
        )
    for edge in net.edges:
        na, nb = net.nodes[edge.a], net.nodes[edge.b]
        features.append(
            {
                "type": "Feature",
                "geometry": {
                    "type": "LineString",
                    "coordinates": [
                        [na.position.x, na.position.y],
                        [nb.position.x, nb.position.y],
                    ],
                },
                "properties": {"from": edge.a, "to": edge.b, "length": edge.length},
            }
        )
    doc = {"type": "FeatureCollection", "features": features}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def network_from_geojson(text: str) -> SkywayNetwork:
    """Rebuild a network from its GeoJSON export."""
    doc = json.loads(text)
    nodes = []
    edges = []
    for feature in doc["features"]:
        geometry = feature["geometry"]
        props = feature["properties"]
        if geometry["type"] == "Point":
            x, y = geometry["coordinates"]
            nodes.append(
                SkywayNode(
                    id=str(props["id"]),
                    position=Point2(float(x), float(y)),
                    height=float(props["height"]),
                    recharge_pads=int(props["recharge_pads"]),
                )
            )
        elif geometry["type"] == "LineString":
            edges.append(
                SkywayEdge(a=str(props["from"]), b=str(props["to"]), length=float(props["length"]))
            )
    return SkywayNetwork(nodes, edges)
