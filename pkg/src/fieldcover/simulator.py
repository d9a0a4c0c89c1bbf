"""Mission simulation with tank refills at the field entrance.

A plan is executed step by step.  Working meters drain the tank; when it runs
empty (or, in threshold mode, when returning now is cheaper than returning
later) the vehicle takes the shortest admissible route back to the entrance,
refills instantly and resumes at the interruption point with its heading.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .errors import InvalidParams, Stranded, Unreachable
from .graph import LANE, Position, TransitionGraph, establish_traces, shortest_path

_EPS = 1e-9


@dataclass
class TankState:
    capacity_working_m: float
    used_m: float = 0.0

    def __post_init__(self):
        if not self.capacity_working_m > 0:
            raise InvalidParams("capacity must be > 0 working meters")

    @property
    def fill(self) -> float:
        if math.isinf(self.capacity_working_m):
            return 1.0
        return max(0.0, 1.0 - self.used_m / self.capacity_working_m)

    @property
    def remaining_m(self) -> float:
        return self.capacity_working_m - self.used_m

    def refill(self):
        self.used_m = 0.0


@dataclass
class VehicleState:
    position: Position
    distance_m: float = 0.0


@dataclass(frozen=True)
class RunRecord:
    run_index: int
    working_m: float
    nonworking_m: float
    return_m: float
    resume_m: float
    cumulative_m: float


CSV_FIELDS = ("run_index", "working_m", "nonworking_m", "return_m", "resume_m", "cumulative_m")


@dataclass
class MissionLog:
    pattern: str
    capacity: float
    plan_length: float
    plan_working: float
    runs: List[RunRecord] = field(default_factory=list)
    interruptions: List[Position] = field(default_factory=list)

    @property
    def n_runs(self) -> int:
        return len(self.runs)

    @property
    def return_total(self) -> float:
        return sum(r.return_m for r in self.runs)

    @property
    def resume_total(self) -> float:
        return sum(r.resume_m for r in self.runs)

    @property
    def working_total(self) -> float:
        return sum(r.working_m for r in self.runs)

    @property
    def total_length(self) -> float:
        return self.plan_length + self.return_total + self.resume_total

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            self.write_rows(fh)

    def write_rows(self, fh):
        w = csv.writer(fh)
        w.writerow(CSV_FIELDS)
        for r in self.runs:
            w.writerow([r.run_index] + [repr(float(getattr(r, k))) for k in CSV_FIELDS[1:]])


def _position_in_step(g: TransitionGraph, edge: int, direction: int, x: float) -> Position:
    """Network position after ``x`` meters along a plan step."""
    e = g.edges[edge]
    if e.kind == LANE:
        r = g.turning_radius
        frac = (x + r) / e.arc_length
        return Position(edge, frac if direction > 0 else 1.0 - frac, direction)
    return Position(edge, x if direction > 0 else e.weight - x, direction)


def plan_return(g: TransitionGraph, pos: Position, target: int = 0):
    try:
        return shortest_path(g, pos, target)
    except Unreachable as exc:
        raise Stranded(f"no admissible route back to the depot from {pos}") from exc


def plan_resume(g: TransitionGraph, pos: Position, source: int = 0):
    try:
        return shortest_path(g, source, pos)
    except Unreachable as exc:
        raise Stranded(f"no admissible route from the depot to {pos}") from exc


def trigger_return(f: float, threshold: float, p_now: float, p_predicted: float) -> bool:
    """Return now if the tank is empty, or if it is low and returning is cheaper now."""
    if f <= 0.0:
        return True
    return f < threshold and p_now < p_predicted


def simulate(g: TransitionGraph, plan, capacity: float, threshold: Optional[float] = None,
             step_m: float = 10.0, depot: int = 0) -> MissionLog:
    """Execute ``plan`` with a tank of ``capacity`` working meters.

    Without ``threshold`` the vehicle returns exactly when the tank runs dry.
    With a threshold, the trigger rule is evaluated every ``step_m`` working
    meters using the predicted empty point on the remaining plan.
    """
    if threshold is not None and not 0.0 <= threshold <= 1.0:
        raise InvalidParams("threshold must lie in [0, 1]")
    if not step_m > 0:
        raise InvalidParams("step_m must be > 0")
    traced = establish_traces(g, plan)
    tank = TankState(float(capacity))
    log = MissionLog(plan.pattern, float(capacity), plan.length, plan.working_length)
    steps = plan.steps
    # remaining working meters after each step, used to skip pointless returns
    tail = np.cumsum([s.cost if s.working else 0.0 for s in steps][::-1])[::-1]
    tail = list(tail[1:]) + [0.0]

    run_work = run_idle = 0.0
    resume_m = 0.0
    cumulative = 0.0
    run_index = 1

    def close_run(ret):
        nonlocal run_work, run_idle, resume_m, cumulative, run_index
        cumulative += run_work + run_idle + ret + resume_m
        log.runs.append(RunRecord(run_index, run_work, run_idle, ret, resume_m, cumulative))
        run_index += 1
        run_work = run_idle = 0.0

    for k, st in enumerate(steps):
        if not st.working:
            run_idle += st.cost
            continue
        done = 0.0
        while done < st.cost:
            left = st.cost - done
            cut = _next_cut(tank, left, threshold, step_m)
            done += cut
            run_work += cut
            tank.used_m += cut
            remaining = (st.cost - done) + tail[k]
            if remaining <= _EPS:
                break
            if not _should_return(traced, plan, tank, threshold, st, done, k, depot):
                continue
            pos = _position_in_step(traced, st.edge, st.direction, done)
            ret = plan_return(traced, pos, depot).length
            close_run(ret)
            log.interruptions.append(pos)
            target = pos if done < st.cost else _next_start(traced, steps, k)
            resume_m = plan_resume(traced, target, depot).length
            tank.refill()
    close_run(0.0)
    return log


def _next_cut(tank: TankState, left: float, threshold, step_m: float) -> float:
    cut = min(left, tank.remaining_m)
    if threshold is not None:
        cut = min(cut, step_m)
    return cut


def _next_start(g: TransitionGraph, steps, k: int) -> Position:
    nxt = steps[k + 1]
    return _position_in_step(g, nxt.edge, nxt.direction, 0.0)


def _should_return(g, plan, tank, threshold, st, done, k, depot) -> bool:
    if tank.remaining_m <= _EPS:
        return True
    if threshold is None or tank.fill >= threshold:
        return False
    pos = _position_in_step(g, st.edge, st.direction, done)
    p_now = plan_return(g, pos, depot).length
    z_hat = locate_working(g, plan, k, done, tank.remaining_m)
    if z_hat is None:
        return False
    p_hat = plan_return(g, z_hat, depot).length
    return trigger_return(tank.fill, threshold, p_now, p_hat)


def locate_working(g: TransitionGraph, plan, k: int, done: float, ahead: float) -> Optional[Position]:
    """Position reached after ``ahead`` further working meters, or None past the end."""
    steps = plan.steps
    left = ahead
    x0 = done
    for j in range(k, len(steps)):
        st = steps[j]
        if not st.working:
            x0 = 0.0
            continue
        avail = st.cost - x0
        if left <= avail + _EPS:
            return _position_in_step(g, st.edge, st.direction, x0 + min(left, avail))
        left -= avail
        x0 = 0.0
    return None


class RatePredictor:
    """Linear Kalman filter over fill level and emptying rate.

    State ``[f, a]`` with ``f(t + dt) = f(t) - a dt`` and a random-walk rate.
    With noiseless fill measurements and a diffuse prior the rate is
    identified exactly from two consecutive readings.
    """

    def __init__(self, q_rate: float = 1e-5, r_fill: float = 0.0, prior_var: float = 1e6):
        self.q_rate = q_rate
        self.r_fill = r_fill
        self.x = np.array([1.0, 0.0])
        self.P = np.diag([prior_var, prior_var])
        self.n_updates = 0

    @property
    def fill(self) -> float:
        return float(self.x[0])

    @property
    def rate(self) -> float:
        return float(self.x[1])

    def predict(self, dt: float):
        F = np.array([[1.0, -dt], [0.0, 1.0]])
        Q = np.diag([0.0, self.q_rate * dt])
        self.x = F @ self.x
        self.P = F @ self.P @ F.T + Q

    def update(self, f_measured: float):
        H = np.array([1.0, 0.0])
        s = H @ self.P @ H + self.r_fill
        K = self.P @ H / s
        self.x = self.x + K * (f_measured - self.x[0])
        I_KH = np.eye(2) - np.outer(K, H)
        self.P = I_KH @ self.P @ I_KH.T + np.outer(K, K) * self.r_fill
        self.n_updates += 1


def update_predictor(pred: RatePredictor, dt: float, f_measured: float) -> RatePredictor:
    """One predict/update cycle; the first reading only initialises the state."""
    if pred.n_updates > 0:
        pred.predict(dt)
    pred.update(f_measured)
    return pred


def predicted_empty_distance(pred: RatePredictor, speed: float) -> float:
    """Working meters until the tank is predicted to run dry."""
    if pred.rate <= 0:
        return math.inf
    return max(pred.fill, 0.0) * speed / pred.rate


def predict_empty_point(g: TransitionGraph, plan, k: int, done: float,
                        pred: RatePredictor, speed: float) -> Optional[Position]:
    """Predicted empty point on the remaining plan from step ``k``, offset ``done``."""
    return locate_working(g, plan, k, done, predicted_empty_distance(pred, speed))
