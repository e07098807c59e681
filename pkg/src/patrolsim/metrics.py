"""Refresh time and latency evaluation for team trajectories.

Two evaluation paths exist side by side.  The analytic path works on the
exact piecewise-linear trajectories and produces rationally exact results,
which the closed-form identities are asserted against with equality.  The
sampled path works on fixed-step traces (synthesized or simulated), detects
viewpoint visits by interpolation between samples, and is accurate to one
or two steps.

Refresh time is the longest interval during which some viewpoint goes
unvisited.  Latency is evaluated by message propagation over the per-pair
communication instants: a message injected at a meeting of the first robot
pair must relay through meetings of every subsequent pair in time order,
and the horizon end substitutes when no chain completes.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .partition import Partition
from .roadmap import ChainRoadmap
from .trajectories import TeamTrajectory, aggregate_clusters, _merge_intervals

Interval = tuple[Fraction, Fraction]


@dataclass(frozen=True)
class VisitLog:
    """Merged occupancy episodes per viewpoint over [0, horizon]."""

    episodes: tuple[tuple[Interval, ...], ...]
    horizon: Fraction
    eta: float = 0.0


@dataclass(frozen=True)
class CommLog:
    """Sorted communication instants per adjacent relay pair.

    ``phis[q]`` holds the instants at which relay robots q and q+1 occupy
    chain-adjacent viewpoints, each dwell interval collapsed to its start,
    with 0 always present.
    """

    phis: tuple[tuple[Fraction, ...], ...]
    horizon: Fraction


@dataclass(frozen=True)
class LatencyResult:
    up: float
    down: float
    overall: float


def visit_log(traj: TeamTrajectory, chain: ChainRoadmap | None = None) -> VisitLog:
    chain = chain or traj.chain
    if chain is None:
        raise ValueError("a chain roadmap is required to locate viewpoints")
    episodes = []
    ranges = [p.value_range() for p in traj.robots]
    for c in chain.coords_exact:
        eps: list[Interval] = []
        for path, (lo, hi) in zip(traj.robots, ranges):
            if lo <= c <= hi:
                eps.extend(path.occupancy(c))
        episodes.append(tuple(_merge_intervals(eps)))
    return VisitLog(episodes=tuple(episodes), horizon=traj.horizon)


def _max_gap(
    eps: tuple[Interval, ...],
    t0: Fraction,
    t1: Fraction,
    cap: Fraction | None,
    strict: bool,
) -> Fraction | float:
    inside = [(max(s, t0), min(e, t1)) for s, e in eps if e >= t0 and s <= t1]
    if not inside:
        return math.inf
    gaps = [b[0] - a[1] for a, b in zip(inside, inside[1:])]
    head = inside[0][0] - t0
    tail = t1 - inside[-1][1]
    if strict:
        gaps += [head, tail]
    elif cap is not None:
        gaps += [min(head, cap), min(tail, cap)]
    # else: steady evaluation on an aperiodic path, boundary gaps dropped
    return max(gaps) if gaps else Fraction(0)


def refresh_time(
    traj: TeamTrajectory,
    chain: ChainRoadmap | None = None,
    warmup=0,
    strict: bool = False,
) -> float:
    """Longest unvisited interval over any viewpoint within [warmup, T_f].

    By default boundary gaps (warmup to first visit, last visit to horizon)
    are capped at the declared team period, which evaluates a periodic
    trajectory by its steady state; ``strict=True`` reproduces the raw
    definition including uncapped boundary gaps.  Returns ``inf`` when some
    viewpoint is never visited.
    """
    log = visit_log(traj, chain)
    t0, t1 = Fraction(warmup), traj.horizon
    cap = traj.max_robot_period()
    if cap is not None and not strict:
        if t1 - t0 < 2 * cap:
            raise ValueError("evaluation window shorter than two team periods")
    worst: Fraction | float = Fraction(0)
    for eps in log.episodes:
        g = _max_gap(eps, t0, t1, cap, strict)
        if g == math.inf:
            return math.inf
        if g > worst:
            worst = g
    return float(worst)


def communication_instants(
    traj: TeamTrajectory, chain: ChainRoadmap | None = None, eta: float = 0.0
) -> CommLog:
    """Exact meeting instants for each adjacent relay pair.

    Robots communicate while simultaneously occupying viewpoints adjacent
    in the chain; each such joint dwell is collapsed to its start instant.
    ``eta`` is accepted for interface parity and ignored on exact paths.
    """
    chain = chain or traj.chain
    if chain is None:
        raise ValueError("a chain roadmap is required to locate viewpoints")
    coords = chain.coords_exact
    relay = traj.relay
    ranges = [traj.robots[i].value_range() for i in relay]
    phis: list[tuple[Fraction, ...]] = []
    for q in range(len(relay) - 1):
        a, b = traj.robots[relay[q]], traj.robots[relay[q + 1]]
        (alo, ahi), (blo, bhi) = ranges[q], ranges[q + 1]
        joint: list[Interval] = []
        for k in range(len(coords) - 1):
            u, v = coords[k], coords[k + 1]
            for pa, pb in ((u, v), (v, u)):
                if not (alo <= pa <= ahi and blo <= pb <= bhi):
                    continue
                ea = a.occupancy(pa)
                if not ea:
                    continue
                eb = b.occupancy(pb)
                for s1, e1 in ea:
                    for s2, e2 in eb:
                        s, e = max(s1, s2), min(e1, e2)
                        if s <= e:
                            joint.append((s, e))
        merged = _merge_intervals(joint)
        instants = sorted({Fraction(0)} | {s for s, _ in merged})
        phis.append(tuple(instants))
    return CommLog(phis=tuple(phis), horizon=traj.horizon)


def propagate_latency(phis, horizon) -> tuple:
    """Worst-case relay times over the given per-pair instant lists.

    Works on any sorted numeric sequences (exact or float).  Returns
    (up, down) in the input arithmetic.
    """
    zero = horizon - horizon

    def chain_time(sources, hops):
        worst = zero
        for t_src in sources:
            t = t_src
            for hop in hops:
                i = bisect_left(hop, t)
                if i < len(hop):
                    t = hop[i]
                else:
                    t = horizon
                    break
            if t - t_src > worst:
                worst = t - t_src
        return worst

    up = chain_time(phis[0], phis[1:])
    down = chain_time(phis[-1], list(reversed(phis[:-1])))
    return up, down


def latency(
    traj: TeamTrajectory, chain: ChainRoadmap | None = None, eta: float = 0.0
) -> LatencyResult:
    """Up/down/overall latency of a chain trajectory by message propagation."""
    m = len(traj.relay)
    if m < 2:
        raise ValueError("latency is defined for at least two robots")
    if m == 2:
        return LatencyResult(0.0, 0.0, 0.0)
    comm = communication_instants(traj, chain, eta)
    up, down = propagate_latency(comm.phis, traj.horizon)
    return LatencyResult(up=float(up), down=float(down), overall=float(max(up, down)))


def latency_lower_bounds(partition: Partition) -> tuple[float, float]:
    """(up_lb, periodic_lb): the travel bound on one-way latency and the
    aggregated-cluster bound on the latency of any d_max-periodic sweep."""
    active = partition.active
    if len(active) < 2:
        raise ValueError("latency bounds are defined for at least two clusters")
    d = [partition.length_exact(i) for i in active]
    up_lb = sum(d[1:-1], Fraction(0))
    if partition.dimension_exact == 0:
        return 0.0, 0.0
    agg = aggregate_clusters(partition)
    periodic = (
        (agg.count - 2) * agg.d_max
        + (agg.lengths[0] - d[0])
        + (agg.lengths[-1] - d[-1])
    )
    periodic = max(Fraction(0), periodic)
    return float(up_lb), float(periodic)


def metrics_report(rt: float, lat: LatencyResult | None, bounds=None) -> dict:
    doc: dict = {"refresh_time": "inf" if math.isinf(rt) else rt}
    if lat is not None:
        doc["latency"] = {"up": lat.up, "down": lat.down, "overall": lat.overall}
    if bounds is not None:
        doc["bounds"] = {"up_lb": bounds[0], "periodic_lb": bounds[1]}
    return doc


# ---------------------------------------------------------------------------
# sampled-trace evaluation


def _visit_episodes_sampled(times, xs, value, eta):
    """Visit episodes of one robot at one coordinate from samples.

    Dwells are detected by |x - value| <= eta, pass-throughs by sign change
    with linear interpolation for the crossing time.
    """
    eps = []
    near = np.abs(xs - value) <= eta
    if near.any():
        idx = np.flatnonzero(near)
        splits = np.flatnonzero(np.diff(idx) > 1)
        starts = np.concatenate(([0], splits + 1))
        ends = np.concatenate((splits, [len(idx) - 1]))
        for s, e in zip(starts, ends):
            eps.append((times[idx[s]], times[idx[e]]))
    d = xs - value
    cross = np.flatnonzero(d[:-1] * d[1:] < 0)
    for k in cross:
        t = times[k] + (times[k + 1] - times[k]) * d[k] / (d[k] - d[k + 1])
        eps.append((t, t))
    eps.sort()
    merged = []
    for s, e in eps:
        if merged and s <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], e))
        else:
            merged.append((s, e))
    return merged


def refresh_time_from_trace(
    times: np.ndarray,
    positions: np.ndarray,
    coords,
    eta: float = 1e-6,
    warmup: float = 0.0,
    cap: float | None = None,
    strict: bool = False,
) -> float:
    """Refresh time from a sampled trace (rows: times, cols: robots)."""
    t0, t1 = warmup, float(times[-1])
    worst = 0.0
    for v in coords:
        eps = []
        for i in range(positions.shape[1]):
            xs = positions[:, i]
            if xs.min() - eta <= v <= xs.max() + eta:
                eps.extend(_visit_episodes_sampled(times, xs, v, eta))
        eps.sort()
        merged = []
        for s, e in eps:
            if merged and s <= merged[-1][1]:
                merged[-1] = (merged[-1][0], max(merged[-1][1], e))
            else:
                merged.append((s, e))
        inside = [(max(s, t0), min(e, t1)) for s, e in merged if e >= t0 and s <= t1]
        if not inside:
            return math.inf
        gaps = [b[0] - a[1] for a, b in zip(inside, inside[1:])]
        head, tail = inside[0][0] - t0, t1 - inside[-1][1]
        if strict:
            gaps += [head, tail]
        elif cap is not None:
            gaps += [min(head, cap), min(tail, cap)]
        if gaps:
            worst = max(worst, max(gaps))
    return worst


def comm_instants_from_trace(
    times: np.ndarray,
    positions: np.ndarray,
    chain: ChainRoadmap,
    relay=None,
    eta: float = 1e-6,
) -> list[list[float]]:
    """Pairwise communication instants detected from a sampled trace.

    A pair communicates while both robots sit within eta of chain-adjacent
    viewpoints; each such run of samples collapses to its first time.
    """
    coords = np.asarray(chain.coordinates)
    m = positions.shape[1]
    relay = list(relay) if relay is not None else list(range(m))
    phis = []
    for q in range(len(relay) - 1):
        xa = positions[:, relay[q]]
        xb = positions[:, relay[q + 1]]
        co = np.zeros(len(times), dtype=bool)
        for k in range(len(coords) - 1):
            u, v = coords[k], coords[k + 1]
            co |= (np.abs(xa - u) <= eta) & (np.abs(xb - v) <= eta)
            co |= (np.abs(xa - v) <= eta) & (np.abs(xb - u) <= eta)
        starts = np.flatnonzero(co & ~np.concatenate(([False], co[:-1])))
        phis.append(sorted({0.0} | {float(times[s]) for s in starts}))
    return phis


def latency_from_phis(phis, horizon: float) -> LatencyResult:
    if len(phis) < 1:
        return LatencyResult(0.0, 0.0, 0.0)
    if len(phis) == 1:
        return LatencyResult(0.0, 0.0, 0.0)
    up, down = propagate_latency(phis, horizon)
    return LatencyResult(up=float(up), down=float(down), overall=float(max(up, down)))
