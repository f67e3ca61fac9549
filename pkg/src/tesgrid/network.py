"""Topology index for the radial feeder.

Built once after validation: rooted tree over the electrical nodes, the
edge (line / transformer / zero-impedance parent link) feeding each node,
and the point of attachment for every load-bearing object (houses,
appliances, solar).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import EDGE_CLASSES, LINE_CLASSES, NODE_CLASSES, ScenarioModel

DEFAULT_NOMINAL_VOLTS = 7200.0


@dataclass(frozen=True)
class NetworkEdge:
    name: str
    cls: str  # line class, "transformer", or "parent"
    parent: str
    child: str
    impedance: complex
    ratio: float  # primary/secondary turns ratio; 1.0 for lines
    switchable: bool


@dataclass
class NetworkIndex:
    source: str
    order: list[str]  # topological, source first
    parent_of: dict[str, str]
    children: dict[str, list[str]]
    feed_edge: dict[str, NetworkEdge]  # node -> edge from its parent
    edges_by_name: dict[str, NetworkEdge]
    depth: dict[str, int]  # 1-based level, source = 1
    nominal_volts: dict[str, float]
    attachments: dict[str, list[str]] = field(default_factory=dict)
    attach_node: dict[str, str] = field(default_factory=dict)  # object -> node


def _electrical_node_for(model_names, obj) -> str | None:
    """Walk parent references until an electrical node is reached."""
    current = obj
    for _ in range(32):  # attachment chains are short; bound defends cycles
        if current.cls in NODE_CLASSES:
            return current.name
        parent_name = current.ref("parent")
        if parent_name is None:
            return None
        current = model_names.get(parent_name)
        if current is None:
            return None
    return None


def build_network_index(model: ScenarioModel) -> NetworkIndex:
    """Precondition: validate(model) reported no errors."""
    names = model.by_name()
    source = next(
        o.name
        for o in model.of_class("node")
        if "bustype" in o.properties and str(o.properties["bustype"].value) == "SWING"
    )

    adjacency: dict[str, list[NetworkEdge]] = {
        o.name: [] for o in model.objects if o.cls in NODE_CLASSES
    }
    for obj in model.objects:
        if obj.cls in EDGE_CLASSES:
            z = obj.get("impedance", 0j)
            edge = NetworkEdge(
                name=obj.name,
                cls=obj.cls if obj.cls == "transformer" else obj.cls,
                parent=obj.ref("from"),
                child=obj.ref("to"),
                impedance=complex(z),
                ratio=float(obj.get("ratio", 1.0)) if obj.cls == "transformer" else 1.0,
                switchable=obj.cls in LINE_CLASSES,
            )
            adjacency[edge.parent].append(edge)
            adjacency[edge.child].append(edge)
        elif obj.cls in NODE_CLASSES:
            parent = obj.ref("parent")
            if parent is not None:
                edge = NetworkEdge(
                    name=f"parent:{obj.name}",
                    cls="parent",
                    parent=parent,
                    child=obj.name,
                    impedance=0j,
                    ratio=1.0,
                    switchable=False,
                )
                adjacency[parent].append(edge)
                adjacency[obj.name].append(edge)

    order = [source]
    parent_of: dict[str, str] = {}
    children: dict[str, list[str]] = {n: [] for n in adjacency}
    feed_edge: dict[str, NetworkEdge] = {}
    depth = {source: 1}
    nominal = {source: float(names[source].get("nominal_voltage", DEFAULT_NOMINAL_VOLTS))}
    edges_by_name: dict[str, NetworkEdge] = {}
    frontier = [source]
    while frontier:
        nxt = []
        for node in frontier:
            for edge in adjacency[node]:
                other = edge.child if edge.parent == node else edge.parent
                if other in depth:
                    continue
                # orient the edge away from the source
                if edge.parent != node:
                    edge = NetworkEdge(
                        edge.name, edge.cls, node, other, edge.impedance, edge.ratio, edge.switchable
                    )
                parent_of[other] = node
                children[node].append(other)
                feed_edge[other] = edge
                edges_by_name[edge.name] = edge
                depth[other] = depth[node] + 1
                explicit = names[other].get("nominal_voltage")
                nominal[other] = float(explicit) if explicit is not None else nominal[node] / edge.ratio
                order.append(other)
                nxt.append(other)
        frontier = nxt

    index = NetworkIndex(
        source=source,
        order=order,
        parent_of=parent_of,
        children=children,
        feed_edge=feed_edge,
        edges_by_name=edges_by_name,
        depth=depth,
        nominal_volts=nominal,
        attachments={n: [] for n in order},
    )
    for obj in model.objects:
        if obj.cls in ("house", "zipload", "waterheater", "solar", "inverter"):
            node = _electrical_node_for(names, obj)
            if node is not None:
                index.attachments[node].append(obj.name)
                index.attach_node[obj.name] = node
    return index


def compute_islands(index: NetworkIndex, statuses: dict[str, str]) -> dict[str, bool]:
    """Energized labeling: a node is live iff every edge on its path to the
    source is CLOSED.  Non-switchable edges are always closed."""
    energized = {n: False for n in index.order}
    energized[index.source] = True
    for node in index.order[1:]:
        edge = index.feed_edge[node]
        closed = statuses.get(edge.name, "CLOSED") == "CLOSED"
        energized[node] = closed and energized[edge.parent]
    return energized


def deenergized_objects(model: ScenarioModel, index: NetworkIndex, energized: dict[str, bool]) -> set[str]:
    """Model objects whose every electrical attachment is de-energized.

    Edge objects count when both endpoints are dead; an OPEN boundary edge
    with a live parent therefore does not count.
    """
    dead: set[str] = set()
    for node, live in energized.items():
        if not live:
            dead.add(node)
            dead.update(index.attachments[node])
    for edge in index.edges_by_name.values():
        if edge.cls != "parent" and not energized[edge.parent] and not energized[edge.child]:
            dead.add(edge.name)
    return dead
