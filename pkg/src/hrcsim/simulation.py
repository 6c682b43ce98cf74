"""Two-phase simulation: optimal trajectory generation, then closed-loop tracking.

Phase 1 solves the fixed-endpoint LQ problem on the unified human-robot
model and rolls out the optimal Cartesian trajectory. The Cartesian plan is
converted into a joint-space reference by branch-continuous inverse
kinematics. Phase 2 integrates the arm under the neuro-adaptive PID torque,
with the planned human force replayed open-loop through the Jacobian
transpose. Runs are fully deterministic for a given configuration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import manipulator as mnp
from . import tracking as trk
from .config import ScenarioConfig
from .errors import NumericalDivergenceError, UnreachableTargetError
from .integrate import grid_size, interp_sample, rk4_path, rk4_step
from .interaction import evaluate_schedule, unified_matrices
from .riccati import (LQProblem, OptimalTrajectory, rollout,
                      solve_riccati_backward)

__all__ = [
    "Phase1Result", "ReferenceTrajectory", "TrackingRecord", "SimulationReport",
    "rk4_step", "phase1_optimize", "cartesian_to_joint_reference",
    "phase2_track", "run_scenario",
]


@dataclass(frozen=True)
class Phase1Result:
    """Optimal unified-state trajectory split into its physical series."""

    trajectory: OptimalTrajectory
    x_imp: np.ndarray    # (N+1, 2) planned Cartesian position
    xd_imp: np.ndarray   # (N+1, 2) planned Cartesian velocity
    f_h: np.ndarray      # (N+1, 2) planned human force


@dataclass(frozen=True)
class ReferenceTrajectory:
    """Joint-space reference derived from the Cartesian plan."""

    grid: np.ndarray
    x_imp: np.ndarray
    xd_imp: np.ndarray
    f_h: np.ndarray
    q_d: np.ndarray      # (N+1, 2)
    qd_d: np.ndarray     # (N+1, 2) joint velocity reference


@dataclass(frozen=True)
class TrackingRecord:
    """Closed-loop series recorded on the shared grid."""

    grid: np.ndarray
    q: np.ndarray
    qdot: np.ndarray
    q_d: np.ndarray
    e: np.ndarray
    e_int: np.ndarray
    e_c: np.ndarray
    tau: np.ndarray
    k_R: np.ndarray
    theta_hat: np.ndarray   # (N+1, nodes)
    theta_norm: np.ndarray


@dataclass(frozen=True)
class SimulationReport:
    """Everything one run produced, plus summary metrics."""

    config: ScenarioConfig
    phase1: Phase1Result
    reference: ReferenceTrajectory
    tracking: TrackingRecord
    metrics: dict


def _cost_schedule(schedule):
    if schedule.kind == "constant":
        return schedule.base
    return lambda t: evaluate_schedule(schedule, t)


def build_lq_problem(config: ScenarioConfig) -> LQProblem:
    """Unified-model LQ problem for the configured scenario.

    Constant schedules are assembled once; time-varying ones are evaluated
    per call.
    """
    imp, hum = config.impedance, config.human
    interaction_constant = all(s.kind == "constant" for s in
                               (imp.M, imp.B, imp.K, hum.K_d, hum.K_p, hum.k_e))
    if interaction_constant:
        A, B = unified_matrices(imp, hum, config.t0)
    else:
        A = lambda t: unified_matrices(imp, hum, t)[0]
        B = lambda t: unified_matrices(imp, hum, t)[1]

    problem = LQProblem(
        A=A, B=B,
        Q=_cost_schedule(config.cost_Q),
        R=_cost_schedule(config.cost_R),
        S=_cost_schedule(config.cost_S),
        t0=config.t0, tf=config.tf, X0=config.X0, Xf=config.Xf,
    )
    problem.validate_weights()
    return problem


def phase1_optimize(config: ScenarioConfig) -> Phase1Result:
    """Solve the backward Riccati system and roll the optimal state forward."""
    problem = build_lq_problem(config)
    sol = solve_riccati_backward(problem, config.h)
    traj = rollout(problem, sol)
    return Phase1Result(
        trajectory=traj,
        x_imp=traj.X[:, 0:2].copy(),
        xd_imp=traj.X[:, 2:4].copy(),
        f_h=traj.X[:, 4:6].copy(),
    )


def cartesian_to_joint_reference(config: ScenarioConfig,
                                 phase1: Phase1Result) -> ReferenceTrajectory:
    """Branch-continuous inverse kinematics of the planned Cartesian path.

    q_d is unwrapped so consecutive samples never jump by 2 pi; the joint
    velocity reference solves J(q_d) qd_d = xd_imp, falling back to central
    differences of q_d inside the singularity guard.
    """
    params = config.manipulator
    grid = phase1.trajectory.grid
    n = len(grid)
    q_d = np.empty((n, 2))
    qd_d = np.empty((n, 2))
    singular = []
    for k in range(n):
        try:
            qk = mnp.inverse_kinematics(params, phase1.x_imp[k], config.ik_branch)
        except UnreachableTargetError as exc:
            raise UnreachableTargetError(
                f"planned path leaves the workspace at t={grid[k]:.6g}: {exc}"
            ) from exc
        if k > 0:
            qk = qk + 2.0 * np.pi * np.round((q_d[k - 1] - qk) / (2.0 * np.pi))
        q_d[k] = qk
        J = mnp.jacobian(params, qk)
        det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
        if abs(det) <= mnp.SINGULARITY_THRESHOLD:
            singular.append(k)
            qd_d[k] = 0.0
        else:
            qd_d[k] = np.linalg.solve(J, phase1.xd_imp[k])
    h = grid[1] - grid[0] if n > 1 else 1.0
    for k in singular:
        lo, hi = max(k - 1, 0), min(k + 1, n - 1)
        qd_d[k] = (q_d[hi] - q_d[lo]) / ((hi - lo) * h)
    return ReferenceTrajectory(grid, phase1.x_imp, phase1.xd_imp, phase1.f_h,
                               q_d, qd_d)


def phase2_track(config: ScenarioConfig,
                 reference: ReferenceTrajectory) -> TrackingRecord:
    """Integrate the arm under the adaptive PID torque along the reference.

    The coupled state (q, qdot, int e, theta_hat) advances with one RK4 step
    per grid interval; the reference and the planned human force are linearly
    interpolated at stage times.
    """
    params = config.manipulator
    gains = config.gains
    net = trk.make_rbf_network(config.rbf_nodes, config.rbf_seed,
                               config.rbf_width, config.rbf_scales)
    grid = reference.grid
    t0 = grid[0]
    h = grid[1] - grid[0]
    n_steps = len(grid) - 1
    nodes = net.nodes

    def pieces(t, y):
        q = y[0:2]
        qdot = y[2:4]
        e_int = y[4:6]
        theta = y[6:]
        q_ref = interp_sample(t0, h, reference.q_d, t)
        qd_ref = interp_sample(t0, h, reference.qd_d, t)
        f_h = interp_sample(t0, h, reference.f_h, t)
        e = q_ref - q
        e_dot = qd_ref - qdot
        e_c = trk.commutative_error(e, e_dot, e_int, gains.zeta)
        z = trk.controller_input(e, e_dot, e_c)
        k_R = trk.gain(net, z, gains.alpha, theta)
        tau = trk.control_torque(e_c, gains.k_rc, k_R)
        return q, qdot, e_int, theta, e, e_c, z, k_R, tau, f_h

    def f(t, y):
        q, qdot, e_int, theta, e, e_c, z, k_R, tau, f_h = pieces(t, y)
        qddot = mnp.forward_dynamics(params, mnp.JointState(q, qdot), tau, f_h)
        theta_dot = trk.adapt(net, e_c, z, gains, theta)
        return np.concatenate([qdot, qddot, e, theta_dot])

    q0 = reference.q_d[0] + config.q0_offset
    y0 = np.concatenate([q0, reference.qd_d[0], np.zeros(2), net.theta_hat])
    Y = rk4_path(f, t0, y0, h, n_steps)

    rec_q = Y[:, 0:2]
    rec_qdot = Y[:, 2:4]
    rec_e_int = Y[:, 4:6]
    rec_theta = Y[:, 6:]
    rec_e = reference.q_d - rec_q
    e_dot = reference.qd_d - rec_qdot
    rec_e_c = np.empty_like(rec_e)
    rec_tau = np.empty_like(rec_e)
    rec_kR = np.empty(n_steps + 1)
    for k in range(n_steps + 1):
        e_c = trk.commutative_error(rec_e[k], e_dot[k], rec_e_int[k], gains.zeta)
        z = trk.controller_input(rec_e[k], e_dot[k], e_c)
        k_R = trk.gain(net, z, gains.alpha, rec_theta[k])
        rec_e_c[k] = e_c
        rec_kR[k] = k_R
        rec_tau[k] = trk.control_torque(e_c, gains.k_rc, k_R)
    return TrackingRecord(
        grid=grid, q=rec_q, qdot=rec_qdot, q_d=reference.q_d, e=rec_e,
        e_int=rec_e_int, e_c=rec_e_c, tau=rec_tau, k_R=rec_kR,
        theta_hat=rec_theta, theta_norm=np.linalg.norm(rec_theta, axis=1),
    )


def run_scenario(config: ScenarioConfig) -> SimulationReport:
    """Full pipeline: optimize, convert to joint space, track, summarize."""
    phase1 = phase1_optimize(config)
    reference = cartesian_to_joint_reference(config, phase1)
    record = phase2_track(config, reference)

    settled = record.grid > config.t0 + config.settle_time
    e_norm = np.linalg.norm(record.e, axis=1)
    terminal_error = float(np.linalg.norm(phase1.trajectory.X[-1] - config.Xf))
    metrics = {
        "phase1_cost": phase1.trajectory.cost,
        "phase1_terminal_error": terminal_error,
        "tracking_max_error_settled": float(e_norm[settled].max()) if settled.any() else 0.0,
        "tracking_final_error": float(e_norm[-1]),
        "sup_theta_norm": float(record.theta_norm.max()),
        "h": config.h,
        "tf": config.tf,
        "rbf_seed": float(config.rbf_seed),
        "settle_time": config.settle_time,
    }
    for value in metrics.values():
        if not np.isfinite(value):
            raise NumericalDivergenceError("simulation produced non-finite metrics")
    return SimulationReport(config, phase1, reference, record, metrics)
