"""Frustrated-loop planted Ising instances with known ground energy.

An instance is built from `n_c = round(alpha * n)` clauses. Each clause is a
graph cycle found by a non-backtracking random walk. All couplings along the
loop are set to agree with a randomly drawn planted state except one, which
is flipped, frustrating the loop. The planted state then satisfies exactly
the k - 1 unflipped edges of every clause, which is the best any state can
do on a frustrated loop, so its energy -sum_c (k_c - 2) / Z is the exact
ground energy of the summed Hamiltonian (Z normalizes max |J| to 1).

Raw coupling accumulation is integer-exact; floating point enters only at
the final division by Z.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .model import IsingProblem


class AttemptBudgetExceeded(RuntimeError):
    """Loop search gave up; graph too small or sparse for the requested lengths."""


@dataclass(frozen=True)
class Clause:
    """An ordered cycle of nodes with one frustrated (flipped) edge.

    Edge e of the clause joins nodes[e] and nodes[(e + 1) % k]; flip_index
    selects which of the k edges carries the sign-flipped coupling.
    """

    nodes: tuple[int, ...]
    flip_index: int

    def __post_init__(self):
        k = len(self.nodes)
        if k < 3:
            raise ValueError("a clause needs at least 3 nodes")
        if len(set(self.nodes)) != k:
            raise ValueError("clause nodes must be distinct")
        if not 0 <= self.flip_index < k:
            raise ValueError(f"flip_index {self.flip_index} outside [0, {k})")

    def __len__(self) -> int:
        return len(self.nodes)

    def edges(self) -> list[tuple[int, int]]:
        """Loop edges in walk order, including the closing edge."""
        k = len(self.nodes)
        return [(self.nodes[i], self.nodes[(i + 1) % k]) for i in range(k)]

    def increments(self, plant: np.ndarray) -> list[tuple[int, int, int]]:
        """Directed raw coupling increments (u, v, +-s_u*s_v) for this clause."""
        out = []
        for e, (u, v) in enumerate(self.edges()):
            sgn = -1 if e == self.flip_index else 1
            out.append((u, v, sgn * int(plant[u]) * int(plant[v])))
        return out


@dataclass
class PlantedInstance:
    """Planted instance: graph, couplings, clauses, plant, and ground energy.

    `raw_couplings` holds the integer couplings after folding both walk
    directions onto undirected edges (keys (i, j), i < j); the sampling
    weights are raw / z.
    """

    graph: object
    plant: np.ndarray
    clauses: tuple[Clause, ...]
    raw_couplings: dict[tuple[int, int], int]
    z: int
    e_ground: float
    alpha: float
    l_min: int
    l_max: int
    seed: int | None = None

    @cached_property
    def problem(self) -> IsingProblem:
        n = self.graph.num_nodes
        weights = {k: v / self.z for k, v in self.raw_couplings.items() if v != 0}
        return IsingProblem(num_spins=n, couplings=weights, h=np.zeros(n),
                            e_ground=self.e_ground)

    @property
    def num_spins(self) -> int:
        return self.graph.num_nodes


def random_loop(g, l_min: int, l_max: int, rng: np.random.Generator,
                max_attempts: int = 10**6) -> Clause:
    """Find a cycle of length in [l_min, l_max] by non-backtracking random walk.

    Each attempt starts at a uniform random node and walks at most l_max
    steps, never immediately backtracking. Landing on any visited node closes
    a loop running from that node's first occurrence to the current position;
    the loop is accepted if its length is within bounds, otherwise a fresh
    attempt starts. The flipped edge is chosen uniformly among the loop's
    k edges.

    Raises AttemptBudgetExceeded after max_attempts failed walks.
    """
    if not 3 <= l_min <= l_max:
        raise ValueError(f"need 3 <= l_min <= l_max, got [{l_min}, {l_max}]")
    n = g.num_nodes
    if n == 0:
        raise ValueError("empty graph")

    for _ in range(max_attempts):
        start = int(rng.integers(n))
        visited = [start]
        pos = {start: 0}
        prev = -1
        for _ in range(l_max):
            here = visited[-1]
            nbrs = g.neighbors(here)
            if prev >= 0:
                nbrs = [v for v in nbrs if v != prev]
            if not nbrs:
                break  # dead end, walk cannot continue
            nxt = nbrs[int(rng.integers(len(nbrs)))]
            idx = pos.get(nxt)
            if idx is not None:
                k = len(visited) - idx
                if l_min <= k <= l_max:
                    flip = int(rng.integers(k))
                    return Clause(nodes=tuple(visited[idx:]), flip_index=flip)
                break  # loop closed but out of bounds
            pos[nxt] = len(visited)
            visited.append(nxt)
            prev = here
    raise AttemptBudgetExceeded(
        f"no loop with length in [{l_min}, {l_max}] after {max_attempts} attempts")


def generate_instance(g, alpha: float, l_min: int, l_max: int,
                      rng: np.random.Generator, seed: int | None = None,
                      max_attempts: int = 10**6) -> PlantedInstance:
    """Generate a planted instance with clause density alpha on graph g."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    n = g.num_nodes
    n_clauses = int(round(alpha * n))
    if n_clauses == 0:
        raise ValueError(f"alpha {alpha} yields zero clauses on {n} nodes")

    plant = (rng.integers(0, 2, size=n) * 2 - 1).astype(np.int8)
    clauses = tuple(random_loop(g, l_min, l_max, rng, max_attempts)
                    for _ in range(n_clauses))

    directed: dict[tuple[int, int], int] = {}
    for clause in clauses:
        for u, v, inc in clause.increments(plant):
            directed[(u, v)] = directed.get((u, v), 0) + inc

    folded: dict[tuple[int, int], int] = {}
    for (u, v), val in directed.items():
        key = (u, v) if u < v else (v, u)
        folded[key] = folded.get(key, 0) + val

    z = max(abs(v) for v in folded.values())
    if z == 0:
        raise ValueError("all couplings cancelled; degenerate instance")
    e_ground = -sum(len(c) - 2 for c in clauses) / z

    plant.setflags(write=False)
    return PlantedInstance(graph=g, plant=plant, clauses=clauses,
                           raw_couplings=folded, z=z, e_ground=e_ground,
                           alpha=alpha, l_min=l_min, l_max=l_max, seed=seed)


@dataclass(frozen=True)
class PlantReport:
    """verify_plant outcome; all-good means frustration_ok and energy_match."""

    clause_energies: tuple[float, ...]
    frustration_ok: bool
    energy_match: bool
    failures: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return self.frustration_ok and self.energy_match


def verify_plant(inst: PlantedInstance, tol: float = 1e-12) -> PlantReport:
    """Re-check the planted construction.

    Per clause: the product of the raw increment signs must be negative
    (frustration) and the plant must violate exactly the flipped edge of the
    clause's own contribution. Globally: the plant's energy under the stored
    couplings must equal the recorded ground energy to `tol`.
    """
    plant = inst.plant
    failures: list[str] = []
    clause_energies: list[float] = []
    frustration_ok = True

    for ci, clause in enumerate(inst.clauses):
        sign_product = 1
        clause_energy = 0
        for e, (u, v, inc) in enumerate(clause.increments(plant)):
            sign_product *= 1 if inc > 0 else -1
            satisfied = inc * int(plant[u]) * int(plant[v]) > 0
            clause_energy -= inc * int(plant[u]) * int(plant[v])
            if satisfied == (e == clause.flip_index):
                frustration_ok = False
                failures.append(f"clause {ci}: edge {e} satisfaction inconsistent with flip")
        if sign_product >= 0:
            frustration_ok = False
            failures.append(f"clause {ci}: increment sign product not negative")
        clause_energies.append(float(clause_energy))

    # plant energy from the stored couplings, integer-exact before dividing
    raw_sum = 0
    for (i, j), w in inst.raw_couplings.items():
        raw_sum += w * int(plant[i]) * int(plant[j])
    plant_energy = -raw_sum / inst.z
    energy_match = abs(plant_energy - inst.e_ground) <= tol
    if not energy_match:
        failures.append(f"plant energy {plant_energy} != recorded {inst.e_ground}")

    return PlantReport(clause_energies=tuple(clause_energies),
                       frustration_ok=frustration_ok,
                       energy_match=energy_match,
                       failures=tuple(failures))
