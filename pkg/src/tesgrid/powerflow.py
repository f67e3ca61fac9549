"""Steady-state radial power flow by repeated backward/forward sweeps.

Backward pass accumulates branch currents from constant-power load
injections; forward pass propagates voltage drops from the source.
Transformers are an ideal turns ratio in series with an impedance on the
secondary side, so for an edge with ratio n the child-side current I maps
to I/n on the parent side and V_child = V_parent / n - Z * I.

De-energized subtrees (OPEN edge upstream) carry zero voltage, current,
and load.  Results are steady-state only; switching transients are out of
scope.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import NotSwitchable, SolverDivergence
from .network import NetworkIndex, compute_islands

VOLTAGE_TOLERANCE_PU = 1e-6  # contract: converged when max step change is below this
_INTERNAL_TOLERANCE_PU = 1e-10  # iterate tighter so power balance holds at 1e-6 pu
MAX_ITERATIONS = 50
SYSTEM_BASE_VA = 100e3  # per-unit base for power-balance accounting


@dataclass(frozen=True)
class LoadInjection:
    node: str
    power_va: complex  # positive consumption, negative injection (solar)


@dataclass
class NetworkState:
    voltages: dict[str, complex]
    currents: dict[str, complex]  # edge name -> child-side current
    statuses: dict[str, str]
    energized: dict[str, bool]
    iterations: int
    source_power_va: complex = 0j
    load_power_va: complex = 0j
    loss_power_va: complex = 0j

    def power_mismatch_pu(self) -> float:
        return abs(self.source_power_va - self.load_power_va - self.loss_power_va) / SYSTEM_BASE_VA


class LineStatusBoard:
    """Mutable OPEN/CLOSED board over the switchable edges of one network."""

    def __init__(self, index: NetworkIndex, initial: dict[str, str] | None = None):
        self._index = index
        self.statuses: dict[str, str] = {}
        for edge in index.edges_by_name.values():
            if edge.switchable:
                self.statuses[edge.name] = "CLOSED"
        if initial:
            for name, status in initial.items():
                self.set(name, status)
        self._energized: dict[str, bool] | None = None

    def set(self, line_name: str, status: str) -> None:
        edge = self._index.edges_by_name.get(line_name)
        if edge is None or not edge.switchable:
            raise NotSwitchable(f"'{line_name}' is not a line, switch, or fuse")
        if status not in ("OPEN", "CLOSED"):
            raise ValueError(f"bad status '{status}'")
        if self.statuses[line_name] != status:
            self.statuses[line_name] = status
            self._energized = None  # islands recomputed lazily before next solve

    def get(self, line_name: str) -> str:
        edge = self._index.edges_by_name.get(line_name)
        if edge is None or not edge.switchable:
            raise NotSwitchable(f"'{line_name}' is not a line, switch, or fuse")
        return self.statuses[line_name]

    def energized(self) -> dict[str, bool]:
        if self._energized is None:
            self._energized = compute_islands(self._index, self.statuses)
        return self._energized


def solve_powerflow(
    index: NetworkIndex,
    loads: list[LoadInjection],
    statuses: dict[str, str] | None = None,
    tolerance_pu: float = _INTERNAL_TOLERANCE_PU,
    max_iterations: int = MAX_ITERATIONS,
) -> NetworkState:
    """Sweep until the largest per-node voltage change is below tolerance.

    Raises SolverDivergence with the worst residual after `max_iterations`.
    """
    statuses = dict(statuses or {})
    energized = compute_islands(index, statuses)

    demand: dict[str, complex] = {n: 0j for n in index.order}
    for load in loads:
        if energized.get(load.node, False):
            demand[load.node] += load.power_va

    # flat start at nominal magnitude, zero angle
    voltages = {
        n: complex(index.nominal_volts[n]) if energized[n] else 0j for n in index.order
    }
    currents: dict[str, complex] = {e: 0j for e in index.edges_by_name}
    reverse_order = list(reversed(index.order))

    worst = float("inf")
    for iteration in range(1, max_iterations + 1):
        # backward: child-side branch currents from the leaves up
        into_node: dict[str, complex] = {}
        for node in reverse_order:
            if energized[node] and voltages[node] != 0:
                total = (demand[node] / voltages[node]).conjugate()
            else:
                total = 0j
            for child in index.children[node]:
                edge = index.feed_edge[child]
                total += currents[edge.name] / edge.ratio
            into_node[node] = total
            if node != index.source:
                edge = index.feed_edge[node]
                currents[edge.name] = total if energized[node] else 0j

        # forward: voltage drops from the source down
        worst = 0.0
        for node in index.order[1:]:
            edge = index.feed_edge[node]
            if not energized[node]:
                new_v = 0j
            else:
                new_v = voltages[edge.parent] / edge.ratio - edge.impedance * currents[edge.name]
            worst = max(worst, abs(new_v - voltages[node]) / index.nominal_volts[node])
            voltages[node] = new_v
        if worst < tolerance_pu:
            break
    else:
        raise SolverDivergence(
            f"power flow did not converge in {max_iterations} iterations", worst
        )

    source_current = 0j
    for child in index.children[index.source]:
        edge = index.feed_edge[child]
        source_current += currents[edge.name] / edge.ratio
    source_power = voltages[index.source] * source_current.conjugate()
    losses = 0j
    for edge in index.edges_by_name.values():
        i = currents[edge.name]
        losses += edge.impedance * (abs(i) ** 2)
    served = sum(
        (demand[n] for n in index.order if energized[n]),
        0j,
    )
    return NetworkState(
        voltages=voltages,
        currents=currents,
        statuses=statuses,
        energized=energized,
        iterations=iteration,
        source_power_va=source_power,
        load_power_va=served,
        loss_power_va=losses,
    )
