"""Minimum refresh time patrolling on tree roadmaps.

A closed depth-first tour of a tree walks every edge exactly twice, so its
length is twice the total edge weight and it is a shortest tour through all
vertices.  The planner searches over *subtree collections*: remove a set of
edges, patrol each resulting component with one or more robots equally
spaced along its tour, and judge the plan by the worst per-component tour
length divided by its robot count.  At desk scale the search is exhaustive
over removable edge subsets and robot allocations, which is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

from .partition import InfeasibleError
from .roadmap import TreeRoadmap


@dataclass(frozen=True)
class Tour:
    """Closed depth-first walk: vertex ids with exact cumulative positions."""

    vertices: tuple[str, ...]
    cum: tuple[Fraction, ...]

    @property
    def length(self) -> Fraction:
        return self.cum[-1]

    def vertex_positions(self) -> dict[str, list[Fraction]]:
        occ: dict[str, list[Fraction]] = {}
        for vid, p in zip(self.vertices[:-1], self.cum[:-1]):
            occ.setdefault(vid, []).append(p)
        return occ


def _adjacency(vertices, edges):
    index = {v: i for i, v in enumerate(vertices)}
    adj: dict[str, list[tuple[str, Fraction]]] = {v: [] for v in vertices}
    for u, v, w in edges:
        adj[u].append((v, Fraction(w)))
        adj[v].append((u, Fraction(w)))
    for v in adj:
        adj[v].sort(key=lambda e: index[e[0]])
    return adj


def _euler_tour(vertices, edges, root) -> Tour:
    adj = _adjacency(vertices, edges)
    walk = [root]
    cum = [Fraction(0)]

    def visit(v, parent, base):
        for u, w in adj[v]:
            if u == parent:
                continue
            walk.append(u)
            cum.append(cum[-1] + w)
            visit(u, v, cum[-1])
            walk.append(v)
            cum.append(cum[-1] + w)

    visit(root, None, Fraction(0))
    return Tour(vertices=tuple(walk), cum=tuple(cum))


def depth_first_tour(tree: TreeRoadmap) -> Tour:
    """Closed depth-first tour rooted at the lowest-index vertex.

    Children are visited in vertex-index order for determinism; the tour
    length equals twice the summed edge weights exactly.
    """
    tour = _euler_tour(tree.ids, tree.edges, tree.ids[0])
    total = sum((Fraction(w) for _, _, w in tree.edges), Fraction(0))
    assert tour.length == 2 * total
    return tour


@dataclass(frozen=True)
class SubtreeCollection:
    """Vertex-disjoint subtrees covering the tree plus a robot allocation."""

    tree: TreeRoadmap
    removed_edges: tuple[tuple[str, str], ...]
    subtrees: tuple[tuple[str, ...], ...]
    allocation: tuple[int, ...]

    def __post_init__(self):
        if len(self.subtrees) != len(self.allocation):
            raise ValueError("one robot count per subtree is required")
        if any(mj < 1 for mj in self.allocation):
            raise InfeasibleError(
                "every subtree needs at least one robot for a finite refresh time"
            )
        covered = [v for sub in self.subtrees for v in sub]
        if sorted(covered) != sorted(self.tree.ids):
            raise ValueError("subtrees must partition the vertex set")

    @property
    def m(self) -> int:
        return sum(self.allocation)

    def subtree_edges(self, j: int):
        vs = set(self.subtrees[j])
        removed = {frozenset(e) for e in self.removed_edges}
        return [
            (u, v, w)
            for u, v, w in self.tree.edges
            if u in vs and v in vs and frozenset((u, v)) not in removed
        ]

    def tour_lengths(self) -> tuple[Fraction, ...]:
        return tuple(
            2 * sum((Fraction(w) for _, _, w in self.subtree_edges(j)), Fraction(0))
            for j in range(len(self.subtrees))
        )

    @property
    def objective_exact(self) -> Fraction:
        return max(
            dft / mj for dft, mj in zip(self.tour_lengths(), self.allocation)
        )

    @property
    def objective(self) -> float:
        return float(self.objective_exact)

    def to_document(self) -> dict:
        tours = []
        for j, sub in enumerate(self.subtrees):
            if len(sub) == 1:
                tours.append({"vertices": list(sub), "length": 0.0})
            else:
                tour = _euler_tour(sub, self.subtree_edges(j), sub[0])
                tours.append(
                    {"vertices": list(tour.vertices), "length": float(tour.length)}
                )
        return {
            "removed_edges": [list(e) for e in self.removed_edges],
            "subtrees": [list(s) for s in self.subtrees],
            "allocation": list(self.allocation),
            "objective": self.objective,
            "tours": tours,
        }


def _components(vertices, kept_edges):
    index = {v: i for i, v in enumerate(vertices)}
    parent = list(range(len(vertices)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for u, v, _ in kept_edges:
        ra, rb = find(index[u]), find(index[v])
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    comps: dict[int, list[str]] = {}
    for v in vertices:
        comps.setdefault(find(index[v]), []).append(v)
    return [tuple(comps[k]) for k in sorted(comps)]


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def optimal_subtree_collection(
    tree: TreeRoadmap, m: int, max_n: int = 15, max_m: int = 6
) -> SubtreeCollection:
    """Exhaustively optimal subtree collection for m robots.

    Enumerates all removable edge subsets yielding at most m components and
    all positive robot allocations onto them, minimizing the worst tour
    length per robot.  Ties break toward fewer removed edges, then toward
    the lexicographically first edge subset and allocation.
    """
    if m < 1:
        raise InfeasibleError("need at least one robot")
    if tree.n > max_n or m > max_m:
        raise InfeasibleError(
            f"exhaustive search is limited to n <= {max_n}, m <= {max_m}; "
            "use the chain or path-cover approximations for larger instances"
        )
    edges = list(tree.edges)
    best: tuple | None = None
    for r in range(0, min(m, len(edges) + 1)):
        for removed_idx in combinations(range(len(edges)), r):
            removed = {frozenset((edges[i][0], edges[i][1])) for i in removed_idx}
            kept = [e for e in edges if frozenset((e[0], e[1])) not in removed]
            comps = _components(tree.ids, kept)
            k = len(comps)
            if k > m:
                continue
            weights = []
            for comp in comps:
                vs = set(comp)
                weights.append(
                    sum(
                        (Fraction(w) for u, v, w in kept if u in vs and v in vs),
                        Fraction(0),
                    )
                )
            for alloc in _compositions(m, k):
                obj = max(2 * wj / mj for wj, mj in zip(weights, alloc))
                key = (obj, r, removed_idx, alloc)
                if best is None or key < best:
                    best = key
    assert best is not None
    _, r, removed_idx, alloc = best
    removed = tuple((edges[i][0], edges[i][1]) for i in removed_idx)
    kept = [
        e
        for e in edges
        if frozenset((e[0], e[1])) not in {frozenset(e) for e in removed}
    ]
    comps = tuple(_components(tree.ids, kept))
    return SubtreeCollection(
        tree=tree, removed_edges=removed, subtrees=comps, allocation=tuple(alloc)
    )


@dataclass(frozen=True)
class TourTeamTrajectory:
    """Robots riding depth-first tours at unit speed, equally spaced.

    Each robot's position is its arc coordinate on its own tour; all robots
    of one subtree share the tour and differ by phase offsets of one
    tour-length fraction.
    """

    tours: tuple[Tour, ...]
    stationary: tuple[str | None, ...]  # singleton subtrees have no tour
    robots: tuple[tuple[int, Fraction], ...]  # (subtree index, phase offset)
    horizon: Fraction

    @property
    def m(self) -> int:
        return len(self.robots)

    def refresh_time(self, warmup=0) -> float:
        """Largest revisit gap over all vertices (exact, steady state)."""
        warmup = Fraction(warmup)
        worst = Fraction(0)
        by_tree: dict[int, list[Fraction]] = {}
        for j, off in self.robots:
            by_tree.setdefault(j, []).append(off)
        for j, offsets in by_tree.items():
            if self.stationary[j] is not None:
                continue
            tour = self.tours[j]
            L = tour.length
            for positions in tour.vertex_positions().values():
                phases = sorted({(p - off) % L for off in offsets for p in positions})
                gaps = [b - a for a, b in zip(phases, phases[1:])]
                gaps.append(phases[0] + L - phases[-1])
                worst = max(worst, max(gaps))
        return float(worst)

    def sample(self, dt: float):
        h = float(self.horizon)
        k = int(np.floor(h / dt + 1e-9))
        times = np.arange(k + 1) * dt
        pos = np.empty((k + 1, self.m))
        for i, (j, off) in enumerate(self.robots):
            if self.stationary[j] is not None:
                pos[:, i] = 0.0
            else:
                L = float(self.tours[j].length)
                pos[:, i] = (float(off) + times) % L
        return times, pos

    def sampled_visit_times(self, dt: float) -> dict[str, list[float]]:
        """Vertex visit times recovered from the sampled trace.

        Arc positions are unwrapped (motion is uniformly forward), then
        visit times come from linear interpolation of the occurrence
        positions between samples.
        """
        times, pos = self.sample(dt)
        visits: dict[str, list[float]] = {}
        for j, stat in enumerate(self.stationary):
            if stat is not None:
                visits.setdefault(stat, []).extend(times.tolist())
        for i, (j, off) in enumerate(self.robots):
            if self.stationary[j] is not None:
                continue
            tour = self.tours[j]
            L = float(tour.length)
            wrapped = pos[:, i]
            # forward motion only, so unwrap by accumulating modular steps
            steps = np.mod(np.diff(wrapped), L)
            unwrapped = wrapped[0] + np.concatenate(([0.0], np.cumsum(steps)))
            for vid, occs in tour.vertex_positions().items():
                for p in occs:
                    pf = float(p)
                    target = pf + math.ceil((unwrapped[0] - pf) / L) * L
                    while target <= unwrapped[-1]:
                        idx = int(np.searchsorted(unwrapped, target))
                        if idx == 0:
                            t = times[0]
                        else:
                            t0, t1 = times[idx - 1], times[idx]
                            x0, x1 = unwrapped[idx - 1], unwrapped[idx]
                            t = t0 if x1 == x0 else t0 + (target - x0) / (x1 - x0) * (t1 - t0)
                        visits.setdefault(vid, []).append(float(t))
                        target += L
        return {vid: sorted(ts) for vid, ts in visits.items()}


def efficient_trajectory(coll: SubtreeCollection, horizon) -> TourTeamTrajectory:
    """Equally space each subtree's robots along its depth-first tour.

    All robots move forward at unit speed with phase gaps of one m_j-th of
    the tour, so every vertex is revisited within DFT(T_j)/m_j.
    """
    horizon = Fraction(horizon)
    tours: list[Tour] = []
    stationary: list[str | None] = []
    robots: list[tuple[int, Fraction]] = []
    for j, sub in enumerate(coll.subtrees):
        mj = coll.allocation[j]
        if len(sub) == 1:
            tours.append(Tour(vertices=(sub[0],), cum=(Fraction(0),)))
            stationary.append(sub[0])
            robots.extend((j, Fraction(0)) for _ in range(mj))
            continue
        tour = _euler_tour(sub, coll.subtree_edges(j), sub[0])
        tours.append(tour)
        stationary.append(None)
        robots.extend((j, k * tour.length / mj) for k in range(mj))
    traj = TourTeamTrajectory(
        tours=tuple(tours),
        stationary=tuple(stationary),
        robots=tuple(robots),
        horizon=horizon,
    )
    analytic = max(
        (dft / mj for dft, mj in zip(coll.tour_lengths(), coll.allocation)),
        default=Fraction(0),
    )
    assert traj.refresh_time() == float(analytic)
    return traj
