"""Discrete-time simulation of the distributed sweep-synchronization law.

Each robot runs the same feedback rule on its own cluster of an optimal
partition: reverse at the outer chain ends, hold at a cluster boundary
until the neighbor shows up at the adjacent viewpoint, and on a meeting
either hand the motion token to the neighbor (robots inside one aggregated
group alternate single-mover turns) or arm a phase timer (robots at group
extremes wait out the slack so inter-group meetings settle into a fixed
cadence).  The team provably synchronizes onto the optimal sweep pattern
after a finite transient.

The stepper is a flat-array kernel (numba-jitted when available) so that
multi-thousand-run noise sweeps stay cheap.  Integration is fixed-step
with exact event correction: a robot that would overrun a cluster boundary
within a step is placed exactly on it, which keeps meetings grid-exact in
the noiseless case.  Robots holding position station-keep toward their
boundary viewpoint so actuation noise cannot let them drift away.

Failures: a failed robot freezes in place and stops communicating.
Permanent failures are detected by per-pair communication timeouts, after
which the survivors repartition the chain among themselves and resume.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .metrics import latency_from_phis, refresh_time_from_trace
from .partition import InfeasibleError, Partition, optimal_partition_bisect
from .roadmap import ChainRoadmap
from .trajectories import aggregate_clusters

try:  # pragma: no cover - exercised implicitly by every simulation
    from numba import njit
except ImportError:  # pragma: no cover
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


@dataclass(frozen=True)
class FailureWindow:
    """Robot ``robot`` stops during [start, end); end=inf is permanent."""

    robot: int
    start: float
    end: float = math.inf


@dataclass(frozen=True)
class SimConfig:
    dt: float
    horizon: float
    seed: int
    sigma2: float = 0.0
    failures: tuple[FailureWindow, ...] = ()
    detection_theta: float | None = None
    detection_arm_time: float = 0.0
    repartition_eps: float = 1e-9
    eta: float = 1e-6

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.sigma2 < 0:
            raise ValueError("noise variance must be nonnegative")
        steps = self.horizon / self.dt
        if abs(steps - round(steps)) > 1e-9:
            raise ValueError("horizon must be an integer number of steps")
        for fw in self.failures:
            if not 0 <= fw.start <= self.horizon:
                raise ValueError("failure window outside horizon")

    @property
    def steps(self) -> int:
        return int(round(self.horizon / self.dt))


@dataclass
class Trace:
    """Sampled record of one simulation run (bit-exact for a given config)."""

    times: np.ndarray
    positions: np.ndarray
    dirs: np.ndarray
    events: list[tuple[float, str, int, int]]
    chain: ChainRoadmap
    partition: Partition
    config: SimConfig
    detect_time: float | None = None
    new_partition: Partition | None = None
    repartition_time: float | None = None
    final_relay: tuple[int, ...] = ()

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    def comm_phis(self, relay: list[int], t_min: float = 0.0, t_max: float | None = None):
        """Per-pair communication instant lists from logged events."""
        t_max = self.horizon if t_max is None else t_max
        pairs = {(relay[q], relay[q + 1]): q for q in range(len(relay) - 1)}
        phis: list[list[float]] = [[] for _ in range(len(relay) - 1)]
        for t, kind, i, j in self.events:
            if kind != "comm" or not t_min <= t <= t_max:
                continue
            q = pairs.get((i, j))
            if q is not None:
                phis[q].append(t)
        return [sorted(p) for p in phis]

    def convergence_time(self, period: float, tol: float = 1e-9) -> float | None:
        """Earliest time after which the trace is ``period``-periodic."""
        pk = period / self.config.dt
        if abs(pk - round(pk)) > 1e-9:
            raise ValueError("period must be an integer number of steps")
        pk = int(round(pk))
        pos = self.positions
        if len(pos) <= pk:
            return None
        diff = np.abs(pos[:-pk] - pos[pk:]).max(axis=1)
        ok = diff <= tol
        if not ok[-1]:
            return None
        bad = np.flatnonzero(~ok)
        k0 = 0 if len(bad) == 0 else int(bad[-1]) + 1
        if len(pos) - 1 - k0 < 2 * pk:  # need two steady periods to call it
            return None
        return k0 * self.config.dt

    def write_csv(self, path) -> None:
        import csv as _csv

        ev_by_step: dict[tuple[int, int], str] = {}
        for t, kind, i, j in self.events:
            k = int(round(t / self.config.dt))
            tag = f"{kind}:{j}" if kind == "comm" else kind
            key = (k, i)
            ev_by_step[key] = (ev_by_step.get(key, "") + "|" + tag).lstrip("|")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = _csv.writer(fh)
            w.writerow(["time", "robot", "position", "dir", "event"])
            for k, t in enumerate(self.times):
                for i in range(self.positions.shape[1]):
                    w.writerow(
                        [
                            repr(float(t)),
                            i,
                            repr(float(self.positions[k, i])),
                            int(self.dirs[k, i]),
                            ev_by_step.get((k, i), ""),
                        ]
                    )


@njit(cache=True)
def _step_kernel(
    pos,
    dirv,
    hold,
    timer,
    pend,
    a_time,
    nmeet,
    latch,
    last_comm,
    l,
    r,
    left_ext,
    right_ext,
    delta,
    failed,
    k0,
    nsteps,
    dt,
    eta,
    noise,
    out_pos,
    out_dir,
    ev_step,
    ev_pair,
    ev_count,
    theta,
    detect_from,
):
    ma = pos.shape[0]
    for k in range(nsteps):
        t = (k0 + k) * dt
        # pair meetings: latch once per joint dwell at the shared boundary
        for p in range(ma - 1):
            i = p
            j = p + 1
            co = (
                (not failed[i])
                and (not failed[j])
                and abs(pos[i] - r[i]) <= eta
                and abs(pos[j] - l[j]) <= eta
            )
            if co and latch[p] == 0:
                latch[p] = 1
                c = nmeet[p]
                nmeet[p] = c + 1
                last_comm[p] = t
                n = ev_count[0]
                if n < ev_step.shape[0]:
                    ev_step[n] = k0 + k
                    ev_pair[n] = p
                    ev_count[0] = n + 1
                tau = a_time[i] + delta[i] - t
                if tau < 0.0:
                    tau = 0.0
                if right_ext[i]:
                    if timer[i] < 0.0:
                        timer[i] = delta[i] + tau
                        pend[i] = -1
                        dirv[i] = 0
                        hold[i] = r[i]
                else:
                    if c % 2 == 1:
                        dirv[i] = -1
                        hold[i] = np.nan
                    else:
                        dirv[i] = 0
                        hold[i] = r[i]
                if left_ext[j]:
                    if timer[j] < 0.0:
                        timer[j] = tau
                        pend[j] = 1
                        dirv[j] = 0
                        hold[j] = l[j]
                else:
                    if c % 2 == 0:
                        dirv[j] = 1
                        hold[j] = np.nan
                    else:
                        dirv[j] = 0
                        hold[j] = l[j]
            elif not co:
                latch[p] = 0
        # timers fire before integration so zero-length waits cost nothing
        for i in range(ma):
            if failed[i]:
                continue
            if timer[i] >= 0.0:
                if timer[i] <= 1e-12:
                    timer[i] = -1.0
                    dirv[i] = pend[i]
                    hold[i] = np.nan
                else:
                    timer[i] -= dt
        # boundary rules: chain ends reverse, others hold for their neighbor
        for i in range(ma):
            if failed[i] or timer[i] >= 0.0:
                continue
            if pos[i] < l[i] - eta:
                dirv[i] = 1
                hold[i] = np.nan
            elif pos[i] > r[i] + eta:
                dirv[i] = -1
                hold[i] = np.nan
            elif abs(pos[i] - l[i]) <= eta and dirv[i] <= 0:
                if i == 0:
                    dirv[i] = 1
                    hold[i] = np.nan
                elif not (not failed[i - 1] and abs(pos[i - 1] - r[i - 1]) <= eta):
                    dirv[i] = 0
                    hold[i] = l[i]
            elif abs(pos[i] - r[i]) <= eta and dirv[i] >= 0:
                if i == ma - 1:
                    dirv[i] = -1
                    hold[i] = np.nan
                elif not (not failed[i + 1] and abs(pos[i + 1] - l[i + 1]) <= eta):
                    dirv[i] = 0
                    hold[i] = r[i]
        # integrate with event correction at cluster boundaries
        for i in range(ma):
            if failed[i]:
                out_pos[k0 + k + 1, i] = pos[i]
                out_dir[k0 + k + 1, i] = 0
                continue
            if dirv[i] != 0:
                u = float(dirv[i])
            elif not np.isnan(hold[i]):
                u = (hold[i] - pos[i]) / dt
                if u > 1.0:
                    u = 1.0
                elif u < -1.0:
                    u = -1.0
            else:
                u = 0.0
            v = u + noise[k0 + k, i]
            newpos = pos[i] + v * dt
            if l[i] - eta <= pos[i] <= r[i] + eta:
                if newpos >= r[i]:
                    if dirv[i] > 0 and pos[i] < r[i]:
                        a_time[i] = t + dt
                    newpos = r[i]
                elif newpos <= l[i]:
                    newpos = l[i]
            else:
                # relocating into a freshly assigned cluster
                if pos[i] < l[i] and newpos >= l[i]:
                    newpos = l[i]
                elif pos[i] > r[i] and newpos <= r[i]:
                    newpos = r[i]
                    a_time[i] = t + dt
            pos[i] = newpos
            out_pos[k0 + k + 1, i] = newpos
            out_dir[k0 + k + 1, i] = dirv[i]
        # communication-timeout failure detection
        if theta > 0.0:
            for p in range(ma - 1):
                base = last_comm[p]
                if base < detect_from:
                    base = detect_from
                if (t + dt) - base > theta:
                    return k + 1, p
    return nsteps, -1


class _TeamState:
    """Kernel arrays for the currently active robots (original ids kept)."""

    def __init__(self, chain: ChainRoadmap, partition: Partition, robot_ids, rng, eta):
        active = partition.active
        self.robot_ids = list(robot_ids[: len(active)])
        self.parked_ids = list(robot_ids[len(active) :])
        self.park = partition.parking_coordinate()
        bounds = [(partition.left(i), partition.right(i)) for i in active]
        lengths = [r - l for l, r in bounds]
        if any(d <= 0 for d in lengths):
            raise InfeasibleError(
                "zero-length clusters are not simulable: a stationary robot "
                "permanently co-located with its neighbor deadlocks the "
                "meeting latch; use the open-loop trajectories instead"
            )
        agg = aggregate_clusters(partition)
        ma = len(active)
        self.l = np.array([b[0] for b in bounds])
        self.r = np.array([b[1] for b in bounds])
        self.left_ext = np.zeros(ma, dtype=np.bool_)
        self.right_ext = np.zeros(ma, dtype=np.bool_)
        self.delta = np.zeros(ma)
        for g, total in zip(agg.groups, agg.lengths):
            self.left_ext[g[0]] = True
            self.right_ext[g[-1]] = True
            for i in g:
                self.delta[i] = float(agg.d_max - total) / 2.0
        if rng is not None:
            self.pos = rng.uniform(self.l, self.r)
            self.dir = (rng.integers(0, 2, ma) * 2 - 1).astype(np.int8)
        else:
            self.pos = None
            self.dir = None
        self.hold = np.full(ma, np.nan)
        self.timer = np.full(ma, -1.0)
        self.pend = np.zeros(ma, dtype=np.int8)
        self.a_time = np.zeros(ma)
        self.nmeet = np.zeros(ma - 1 if ma > 1 else 0, dtype=np.int64)
        self.latch = np.zeros(ma - 1 if ma > 1 else 0, dtype=np.int8)
        self.last_comm = np.zeros(ma - 1 if ma > 1 else 0)
        self.failed = np.zeros(ma, dtype=np.bool_)
        self.eta = eta


def _validate(chain: ChainRoadmap, partition: Partition, cfg: SimConfig) -> None:
    lengths = [partition.length(i) for i in partition.active]
    positive = [d for d in lengths if d > 0]
    if positive and cfg.dt >= min(positive) / 4.0:
        raise ValueError(
            f"dt={cfg.dt} too coarse: must be below min cluster length / 4 "
            f"= {min(positive) / 4.0}"
        )


def simulate(chain: ChainRoadmap, partition: Partition, cfg: SimConfig) -> Trace:
    """Run the synchronization law and return the sampled trace.

    Robots start at seeded uniform positions inside their clusters with
    seeded directions.  The trace (positions, directions, communication
    events) is a deterministic function of (chain, partition, config).
    """
    _validate(chain, partition, cfg)
    rng = np.random.default_rng(cfg.seed)
    m = partition.m
    steps = cfg.steps
    state = _TeamState(chain, partition, list(range(m)), rng, cfg.eta)

    # noise rows are indexed by global step, columns by original robot id,
    # so segmentation and repartition never change which draw a robot sees
    if cfg.sigma2 > 0.0:
        noise = rng.normal(0.0, math.sqrt(cfg.sigma2), size=(steps, m))
    else:
        noise = np.zeros((steps, m))

    out_pos = np.empty((steps + 1, m))
    out_dir = np.zeros((steps + 1, m), dtype=np.int8)
    out_pos[0, state.robot_ids] = state.pos
    out_dir[0, state.robot_ids] = state.dir
    for pid in state.parked_ids:
        out_pos[:, pid] = state.park

    min_len = min(partition.length(i) for i in partition.active)
    max_events = 64 + 8 * (m + 1) * (steps // max(1, int(min_len / cfg.dt)) + 2)
    ev_step = np.zeros(max_events, dtype=np.int64)
    ev_pair = np.zeros(max_events, dtype=np.int64)
    ev_count = np.zeros(1, dtype=np.int64)

    events: list[tuple[float, str, int, int]] = []
    detect_time: float | None = None
    new_partition: Partition | None = None
    repartition_time: float | None = None

    toggles = sorted(
        {steps}
        | {int(round(fw.start / cfg.dt)) for fw in cfg.failures}
        | {
            int(round(fw.end / cfg.dt))
            for fw in cfg.failures
            if math.isfinite(fw.end) and fw.end <= cfg.horizon
        }
    )

    theta = cfg.detection_theta if cfg.detection_theta is not None else -1.0
    detect_from = cfg.detection_arm_time

    def run_segment(st: _TeamState, k0: int, k1: int) -> tuple[int, int]:
        cols = st.robot_ids
        sub_noise = np.ascontiguousarray(noise[:, cols])
        sub_pos = out_pos[:, cols].copy()
        sub_dir = out_dir[:, cols].copy()
        done, pair = _step_kernel(
            st.pos, st.dir, st.hold, st.timer, st.pend, st.a_time,
            st.nmeet, st.latch, st.last_comm,
            st.l, st.r, st.left_ext, st.right_ext, st.delta, st.failed,
            k0, k1 - k0, cfg.dt, st.eta, sub_noise,
            sub_pos, sub_dir, ev_step, ev_pair, ev_count,
            theta, detect_from,
        )
        out_pos[k0 : k0 + done + 1, cols] = sub_pos[k0 : k0 + done + 1]
        out_dir[k0 : k0 + done + 1, cols] = sub_dir[k0 : k0 + done + 1]
        return done, pair

    def flush_comm_events(upto: int, cols) -> int:
        for n in range(flush_comm_events.mark, upto):
            t = ev_step[n] * cfg.dt
            p = int(ev_pair[n])
            events.append((t, "comm", cols[p], cols[p + 1]))
        flush_comm_events.mark = upto
        return upto

    flush_comm_events.mark = 0

    k = 0
    while k < steps:
        k_next = steps
        for tg in toggles:
            if tg > k:
                k_next = tg
                break
        t_now = k * cfg.dt
        mask = np.zeros(len(state.robot_ids), dtype=np.bool_)
        for fw in cfg.failures:
            if int(round(fw.start / cfg.dt)) == k and fw.robot in state.robot_ids:
                events.append((t_now, "fail", fw.robot, -1))
            if (
                math.isfinite(fw.end)
                and int(round(fw.end / cfg.dt)) == k
                and fw.robot in state.robot_ids
            ):
                events.append((t_now, "resume", fw.robot, -1))
            if fw.start <= t_now < fw.end and fw.robot in state.robot_ids:
                mask[state.robot_ids.index(fw.robot)] = True
        state.failed = mask
        done, pair = run_segment(state, k, k_next)
        flush_comm_events(int(ev_count[0]), state.robot_ids)
        k += done
        if pair >= 0:
            # a neighbor timed out: declare the failure, repartition among
            # the survivors (previously parked robots rejoin at the tail),
            # and resume the law on the new clusters
            detect_time = k * cfg.dt
            cols = state.robot_ids
            events.append((detect_time, "detect", cols[pair], cols[pair + 1]))
            alive = lambda rid: not any(
                fw.robot == rid and fw.start <= detect_time < fw.end
                for fw in cfg.failures
            )
            survivors = [rid for rid in cols if alive(rid)]
            survivors += [rid for rid in state.parked_ids if alive(rid)]
            if not survivors:
                raise InfeasibleError("no survivors left to repartition")
            dead = [rid for rid in cols if not alive(rid)]
            old_pos = {rid: state.pos[cols.index(rid)] for rid in cols}
            old_dir = {rid: int(state.dir[cols.index(rid)]) for rid in cols}
            for rid in state.parked_ids:
                old_pos[rid] = state.park
                old_dir[rid] = 1
            new_partition, _ = optimal_partition_bisect(
                chain, len(survivors), cfg.repartition_eps
            )
            repartition_time = detect_time
            events.append((detect_time, "repartition", -1, -1))
            state = _TeamState(chain, new_partition, survivors, None, cfg.eta)
            state.pos = np.array([old_pos[rid] for rid in state.robot_ids])
            state.dir = np.array(
                [old_dir[rid] or 1 for rid in state.robot_ids], dtype=np.int8
            )
            state.a_time = np.full(len(state.robot_ids), detect_time)
            state.last_comm = np.full(max(0, len(state.robot_ids) - 1), detect_time)
            for rid in dead:
                out_pos[k:, rid] = old_pos[rid]
                out_dir[k:, rid] = 0
            for rid in state.parked_ids:
                start = old_pos[rid]
                step_moves = np.sign(state.park - start) * np.arange(steps - k + 1) * cfg.dt
                out_pos[k:, rid] = np.clip(
                    start + step_moves, min(start, state.park), max(start, state.park)
                )
                out_dir[k:, rid] = np.int8(np.sign(state.park - start))
            theta = -1.0  # one detection per run

    events.sort(key=lambda e: (e[0], e[1], e[2]))
    times = np.arange(steps + 1) * cfg.dt
    return Trace(
        times=times,
        positions=out_pos,
        dirs=out_dir,
        events=events,
        chain=chain,
        partition=partition,
        config=cfg,
        detect_time=detect_time,
        new_partition=new_partition,
        repartition_time=repartition_time,
        final_relay=tuple(state.robot_ids),
    )


# ---------------------------------------------------------------------------
# trace evaluation and scripted scenarios


@dataclass(frozen=True)
class TraceMetrics:
    refresh: float
    latency_up: float
    latency_down: float
    latency: float
    warmup: float
    converged: bool


def evaluate_trace(
    trace: Trace,
    warmup: float | None = None,
    relay: list[int] | None = None,
    partition: Partition | None = None,
) -> TraceMetrics:
    """Refresh time and latency of a trace over its steady window.

    When no warmup is given, the detected convergence time is used and the
    run is marked converged; if the trace never settles (noisy runs), the
    second half of the horizon is evaluated instead.
    """
    part = partition or trace.partition
    dmax = part.dimension
    period = 2.0 * dmax
    converged = False
    if warmup is None:
        t_conv = trace.convergence_time(period, tol=trace.config.eta)
        if t_conv is not None:
            warmup, converged = t_conv, True
        else:
            warmup = trace.horizon / 2.0
    if relay is None:
        if part is trace.new_partition:
            relay = list(trace.final_relay)
        else:
            relay = list(range(part.cardinality))
    rt = refresh_time_from_trace(
        trace.times,
        trace.positions,
        trace.chain.coordinates,
        eta=trace.config.eta,
        warmup=warmup,
        cap=period,
    )
    phis = trace.comm_phis(relay, t_min=warmup)
    if any(not p for p in phis):
        lat = latency_from_phis([[0.0]] * 2, trace.horizon)
        lat_up = lat_down = lat_all = math.inf
    else:
        res = latency_from_phis(phis, trace.horizon)
        lat_up, lat_down, lat_all = res.up, res.down, res.overall
    return TraceMetrics(
        refresh=rt,
        latency_up=lat_up,
        latency_down=lat_down,
        latency=lat_all,
        warmup=warmup,
        converged=converged,
    )


@dataclass(frozen=True)
class SweepRow:
    sigma2: float
    rt_mean: float
    rt_min: float
    rt_max: float
    lt_mean: float
    lt_min: float
    lt_max: float


def run_seed(master_seed: int, index: int) -> int:
    """Independent child seed for run ``index`` of a batch."""
    return int(np.random.SeedSequence([master_seed, index]).generate_state(1)[0])


def _sweep_run(args) -> TraceMetrics:
    chain, partition, cfg = args
    return evaluate_trace(simulate(chain, partition, cfg))


def noise_sweep(
    chain: ChainRoadmap,
    partition: Partition,
    variances,
    runs: int,
    master_seed: int,
    dt: float,
    horizon: float,
    detail: bool = False,
    workers: int = 1,
):
    """Seeded batch of simulations per noise variance with RT/LT statistics.

    Every run owns an independent RNG stream derived from (master seed,
    run index), so results do not depend on execution order and ``workers``
    may fan the batch out over processes.  Metrics are evaluated on the
    post-convergence window (or the trailing half of the horizon when noise
    prevents convergence).
    """
    jobs = []
    idx = 0
    for sigma2 in variances:
        for _ in range(runs):
            cfg = SimConfig(
                dt=dt, horizon=horizon, seed=run_seed(master_seed, idx), sigma2=sigma2
            )
            jobs.append((chain, partition, cfg))
            idx += 1
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_run, jobs, chunksize=runs))
    else:
        results = [_sweep_run(job) for job in jobs]

    rows: list[SweepRow] = []
    per_run: dict[float, list[TraceMetrics]] = {}
    for k, sigma2 in enumerate(variances):
        metrics = results[k * runs : (k + 1) * runs]
        rts = [mt.refresh for mt in metrics]
        lts = [mt.latency for mt in metrics]
        rows.append(
            SweepRow(
                sigma2=float(sigma2),
                rt_mean=float(np.mean(rts)),
                rt_min=float(np.min(rts)),
                rt_max=float(np.max(rts)),
                lt_mean=float(np.mean(lts)),
                lt_min=float(np.min(lts)),
                lt_max=float(np.max(lts)),
            )
        )
        per_run[float(sigma2)] = metrics
    return (rows, per_run) if detail else rows


def write_sweep_csv(rows, path) -> None:
    import csv as _csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = _csv.writer(fh)
        w.writerow(["sigma2", "rt_mean", "rt_min", "rt_max", "lt_mean", "lt_min", "lt_max"])
        for row in rows:
            w.writerow(
                [
                    repr(row.sigma2),
                    repr(row.rt_mean),
                    repr(row.rt_min),
                    repr(row.rt_max),
                    repr(row.lt_mean),
                    repr(row.lt_min),
                    repr(row.lt_max),
                ]
            )


def run_permanent_failure_scenario(
    chain: ChainRoadmap,
    partition: Partition,
    cfg: SimConfig,
    failed_robot: int,
    fail_time: float,
    theta: float | None = None,
    arm_time: float | None = None,
) -> tuple[Partition, Trace]:
    """Kill one robot for good, detect, repartition, and keep patrolling.

    ``theta`` defaults to twice the team period (a healthy pair always
    meets within one period, so the timeout is unambiguous); detection is
    armed at ``arm_time`` to skip the initial synchronization transient.
    Returns the survivors' partition together with the full trace.
    """
    if theta is None:
        theta = 2.0 * (2.0 * partition.dimension)
    if arm_time is None:
        arm_time = fail_time / 2.0
    cfg = replace(
        cfg,
        failures=tuple(cfg.failures) + (FailureWindow(failed_robot, fail_time),),
        detection_theta=theta,
        detection_arm_time=arm_time,
    )
    trace = simulate(chain, partition, cfg)
    if trace.new_partition is None:
        raise InfeasibleError(
            "failure was never detected within the horizon (theta too large)"
        )
    return trace.new_partition, trace


def case_study_chain(n: int = 30, spacing: float = 1.0) -> ChainRoadmap:
    """Uniformly spaced chain used by the case-study scenarios.

    With 10 robots its optimal partition splits into equal clusters, for
    which the synchronized sweep attains both performance optima exactly.
    """
    return ChainRoadmap([i * spacing for i in range(n)])


def bootstrap_partition(
    chain: ChainRoadmap, positions, eps: float = 1e-9
) -> tuple[Partition, float]:
    """Scripted distributed start-up: gather, count, let a leader partition.

    All robots drive to the leftmost viewpoint (the rendezvous fixes the
    team cardinality and the lowest-index robot becomes leader), then the
    leader computes the optimal partition every robot adopts.  Returns the
    partition and the gathering time.
    """
    positions = [float(p) for p in positions]
    if not positions:
        raise InfeasibleError("no robots to bootstrap")
    gather_time = max(positions)  # unit speed toward coordinate 0
    part, _ = optimal_partition_bisect(chain, len(positions), eps)
    return part, gather_time
