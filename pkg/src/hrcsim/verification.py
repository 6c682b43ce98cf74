"""Randomized property suites exposed through the command line.

Each check returns (name, passed, detail) so the CLI can print one line per
check; independent random cases use a seeded generator for reproducibility.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import expm

from . import manipulator as mnp
from . import riccati as ric
from . import tracking as trk
from .integrate import rk4_step


def _check(name: str, passed: bool, detail: str):
    return (name, bool(passed), detail)


# ---------------------------------------------------------------- manipulator

def _random_joint_state(rng, v_max=3.0, q2_margin=0.05):
    q1 = rng.uniform(-np.pi, np.pi)
    q2 = rng.uniform(q2_margin, np.pi - q2_margin) * rng.choice([-1.0, 1.0])
    return mnp.JointState(np.array([q1, q2]), rng.uniform(-v_max, v_max, 2))


def suite_manipulator(cases: int = 1000, seed: int = 0):
    params = mnp.ManipulatorParams.uniform_rods(5.0, 5.0, 1.0, 1.0)
    rng = np.random.default_rng(seed)
    results = []

    worst = 0.0
    for _ in range(cases):
        state = _random_joint_state(rng)
        lam = rng.normal(size=2)
        terms = mnp.joint_dynamics_terms(params, state)
        Mdot = mnp.mass_matrix_dot(params, state.q, state.qdot)
        worst = max(worst, abs(lam @ (Mdot - 2.0 * terms.C) @ lam))
    results.append(_check("joint skew-symmetry", worst <= 1e-10,
                          f"max |l'(Mdot-2C)l| = {worst:.2e}"))

    worst = 0.0
    delta = 1e-5
    for _ in range(cases // 4):
        state = _random_joint_state(rng, q2_margin=0.2)
        lam = rng.normal(size=2)
        lam /= np.linalg.norm(lam)
        terms = mnp.cartesian_dynamics_terms(params, state)
        q_plus = mnp.JointState(state.q + delta * state.qdot, state.qdot)
        q_minus = mnp.JointState(state.q - delta * state.qdot, state.qdot)
        Mdot_fd = (mnp.cartesian_dynamics_terms(params, q_plus).M
                   - mnp.cartesian_dynamics_terms(params, q_minus).M) / (2.0 * delta)
        worst = max(worst, abs(lam @ (Mdot_fd - 2.0 * terms.C) @ lam))
    results.append(_check("cartesian skew-symmetry", worst <= 1e-6,
                          f"max |l'(Mdot-2C)l| = {worst:.2e}"))

    worst = 0.0
    for _ in range(cases):
        r = rng.uniform(0.05, params.L1 + params.L2 - 1e-6)
        ang = rng.uniform(-np.pi, np.pi)
        p = r * np.array([np.cos(ang), np.sin(ang)])
        branch = mnp.ELBOW_DOWN if rng.uniform() < 0.5 else mnp.ELBOW_UP
        q = mnp.inverse_kinematics(params, p, branch)
        worst = max(worst, np.linalg.norm(mnp.forward_kinematics(params, q) - p))
    results.append(_check("fk/ik round-trip", worst <= 1e-9,
                          f"max position error = {worst:.2e}"))

    worst = 0.0
    eps = 1e-6
    for _ in range(cases // 4):
        q = rng.uniform(-np.pi, np.pi, 2)
        J = mnp.jacobian(params, q)
        J_fd = np.empty((2, 2))
        for j in range(2):
            dq = np.zeros(2)
            dq[j] = eps
            J_fd[:, j] = (mnp.forward_kinematics(params, q + dq)
                          - mnp.forward_kinematics(params, q - dq)) / (2.0 * eps)
        worst = max(worst, np.abs(J - J_fd).max())
    results.append(_check("jacobian finite differences", worst <= 1e-6,
                          f"max entry error = {worst:.2e}"))

    bounds = mnp.estimate_dynamics_bounds(params, n_samples=cases, seed=seed + 1)
    ok = True
    for _ in range(cases // 2):
        state = _random_joint_state(rng)
        terms = mnp.cartesian_dynamics_terms(params, state)
        mc = np.linalg.norm(terms.M, 2)
        ok &= bounds.alpha_m <= mc <= bounds.alpha_M
        ok &= np.linalg.norm(terms.C, 2) <= bounds.eta * np.linalg.norm(state.qdot)
        ok &= np.linalg.norm(terms.G) <= bounds.delta
    results.append(_check(
        "dynamics bound estimates", ok,
        f"alpha=[{bounds.alpha_m:.3g},{bounds.alpha_M:.3g}] "
        f"eta={bounds.eta:.3g} delta={bounds.delta:.3g} F={bounds.F:.3g}"))
    return results


# -------------------------------------------------------------------- riccati

def controllability_gramian_min_eig(A: np.ndarray, B: np.ndarray, T: float,
                                    n_points: int = 60) -> float:
    """Smallest eigenvalue of int_0^T e^{At} B B' e^{A't} dt by quadrature."""
    ts = np.linspace(0.0, T, n_points)
    samples = np.empty((n_points, A.shape[0], A.shape[0]))
    for i, t in enumerate(ts):
        E = expm(A * t) @ B
        samples[i] = E @ E.T
    W = np.trapezoid(samples, ts, axis=0)
    return float(np.linalg.eigvalsh(W)[0])


def random_lq_problem(rng, horizon: float = 1.0,
                      min_gramian_eig: float = 5e-2) -> ric.LQProblem:
    """Small random constant-coefficient problem, rejected until the
    controllability Gramian over the horizon is comfortably nonsingular."""
    while True:
        n = int(rng.integers(2, 5))
        m = int(rng.integers(1, 3))
        A = rng.normal(size=(n, n))
        A *= 1.0 / max(1.0, np.abs(np.linalg.eigvals(A)).max())
        B = rng.normal(size=(n, m))
        if controllability_gramian_min_eig(A, B, horizon) < min_gramian_eig:
            continue
        L = rng.normal(size=(n, n))
        Q = L @ L.T / n
        Lr = rng.normal(size=(m, m))
        R = Lr @ Lr.T / m + 0.5 * np.eye(m)
        return ric.LQProblem(A=A, B=B, Q=Q, R=R, S=np.zeros((n, m)),
                             t0=0.0, tf=horizon,
                             X0=rng.normal(scale=0.7, size=n),
                             Xf=rng.normal(scale=0.7, size=n))


def double_integrator_problem() -> ric.LQProblem:
    """Rest-to-rest minimum-energy transfer with the analytic solution
    X(t) = (3t^2 - 2t^3, 6t - 6t^2), u(t) = 6 - 12t, cost 6."""
    return ric.LQProblem(
        A=np.array([[0.0, 1.0], [0.0, 0.0]]), B=np.array([[0.0], [1.0]]),
        Q=np.zeros((2, 2)), R=np.eye(1), S=np.zeros((2, 1)),
        t0=0.0, tf=1.0, X0=np.zeros(2), Xf=np.array([1.0, 0.0]))


def suite_riccati(cases: int = 20, seed: int = 0):
    results = []

    scalar = ric.LQProblem(A=np.zeros((1, 1)), B=np.eye(1), Q=np.zeros((1, 1)),
                           R=np.eye(1), S=np.zeros((1, 1)), t0=0.0, tf=1.0,
                           X0=np.zeros(1), Xf=np.zeros(1))
    sol = ric.solve_riccati_backward(scalar, 1e-3)
    err = np.abs(sol.P[:, 0, 0] - (1.0 - sol.grid)).max()
    results.append(_check("scalar analytic P(t) = tf - t", err <= 1e-12,
                          f"max error = {err:.2e}"))

    problem = double_integrator_problem()
    sol = ric.solve_riccati_backward(problem, 1e-3)
    traj = ric.rollout(problem, sol)
    cost_err = abs(traj.cost - 6.0) / 6.0
    t = traj.grid
    analytic = np.stack([3 * t ** 2 - 2 * t ** 3, 6 * t - 6 * t ** 2], axis=1)
    rms = float(np.sqrt(np.mean((traj.X - analytic) ** 2)))
    results.append(_check("double integrator rollout",
                          cost_err <= 0.01 and rms <= 1e-2,
                          f"cost rel err = {cost_err:.2e}, traj RMS = {rms:.2e}"))

    asym = max(np.abs(P - P.T).max() for P in sol.P)
    results.append(_check("P symmetry", asym <= 1e-8, f"max asymmetry = {asym:.2e}"))

    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(cases):
        p = random_lq_problem(rng)
        psol = ric.solve_riccati_backward(p, 1e-3)
        c_roll = ric.rollout(p, psol).cost
        c_oracle, _ = ric.transcription_oracle(p, 150)
        worst = max(worst, abs(c_roll - c_oracle) / max(1.0, abs(c_oracle)))
    results.append(_check(f"rollout vs transcription ({cases} random problems)",
                          worst <= 0.01, f"worst relative gap = {worst:.2e}"))
    return results


# ----------------------------------------------------------------- controller

def suite_controller(cases: int = 1000, seed: int = 0):
    results = []
    rng = np.random.default_rng(seed)
    net = trk.make_rbf_network(nodes=20, seed=seed)

    ok = True
    for _ in range(cases):
        phi = trk.rbf_features(net, rng.normal(scale=2.0, size=6))
        ok &= np.all(phi > 0.0) and np.all(phi <= 1.0)
    results.append(_check("rbf features in (0, 1]", ok, f"{cases} random inputs"))

    gains = trk.ControllerGains(zeta=0.1, k_rc=50.0, alpha=10.0, sigma=0.1,
                                Gamma=np.eye(20))
    theta0 = rng.normal(size=20)
    h = 1e-3
    T = 1.0
    theta = theta0.copy()
    zero = np.zeros(2)
    z = trk.controller_input(zero, zero, zero)

    def leak(t, th):
        return trk.adapt(net, zero, z, gains, th)

    steps = int(round(T / h))
    for k in range(steps):
        theta = rk4_step(leak, k * h, theta, h)
    expected = expm(-gains.Gamma * gains.sigma * T) @ theta0
    err = np.abs(theta - expected).max()
    results.append(_check("leakage-only decay matches exp(-Gamma sigma t)",
                          err <= 1e-6, f"max error = {err:.2e}"))

    ok = True
    for _ in range(cases // 10):
        e = rng.normal(size=2)
        e_dot = rng.normal(size=2)
        e_int = rng.normal(size=2)
        a = rng.normal()
        lhs = trk.commutative_error(a * e, a * e_dot, a * e_int, gains.zeta)
        rhs = a * trk.commutative_error(e, e_dot, e_int, gains.zeta)
        ok &= np.allclose(lhs, rhs, atol=1e-12)
    results.append(_check("commutative error linearity", ok, "scalar scaling"))
    return results


SUITES = {
    "manipulator": suite_manipulator,
    "riccati": suite_riccati,
    "controller": suite_controller,
}


def run_suites(names, cases: int | None = None, seed: int = 0):
    """Run the requested suites; returns the flat list of check results."""
    results = []
    for name in names:
        suite = SUITES[name]
        kwargs = {"seed": seed}
        if cases is not None:
            kwargs["cases"] = cases
        results.extend(suite(**kwargs))
    return results
