"""Fixed-endpoint finite-horizon linear-quadratic trajectory optimization.

The sweep variable P(t) here is the inverse of the usual Riccati cost-to-go
matrix, which lets the hard terminal constraint X(tf) = Xf be imposed through
the regular terminal condition P(tf) = 0, V(tf) = Xf. P and V are integrated
backward on a uniform grid; the optimal control is evaluated as feedback and
rolled out forward. A direct-transcription quadratic program provides an
independent check of both the cost and the trajectory.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import NumericalDivergenceError, SingularKKTError
from .integrate import grid_size, interp_sample, rk4_step

# the control is frozen this many grid steps before tf, where P -> 0 makes
# the feedback gain singular
TERMINAL_GUARD_STEPS = 10

# relative singular-value cutoff for the least-squares solve of P y = V - X
LSTSQ_RCOND = 1e-8


def _as_schedule(M) -> Callable[[float], np.ndarray]:
    if callable(M):
        return M
    arr = np.asarray(M, dtype=float)
    return lambda t: arr


@dataclass
class LQProblem:
    """min (1/2) int X'QX + 2X'Su + u'Ru dt subject to Xdot = AX + Bu and
    fixed boundary states X(t0) = X0, X(tf) = Xf.

    A, B, Q, R, S may be constant matrices or callables of time.
    """

    A: Callable[[float], np.ndarray]
    B: Callable[[float], np.ndarray]
    Q: Callable[[float], np.ndarray]
    R: Callable[[float], np.ndarray]
    S: Callable[[float], np.ndarray]
    t0: float
    tf: float
    X0: np.ndarray
    Xf: np.ndarray
    n: int = field(init=False)
    m: int = field(init=False)

    def __post_init__(self):
        self.A = _as_schedule(self.A)
        self.B = _as_schedule(self.B)
        self.Q = _as_schedule(self.Q)
        self.R = _as_schedule(self.R)
        self.S = _as_schedule(self.S)
        self.X0 = np.asarray(self.X0, dtype=float)
        self.Xf = np.asarray(self.Xf, dtype=float)
        if self.tf <= self.t0:
            raise ValueError(f"horizon must satisfy tf > t0, got [{self.t0}, {self.tf}]")
        B0 = self.B(self.t0)
        self.n, self.m = B0.shape
        if self.X0.shape != (self.n,) or self.Xf.shape != (self.n,):
            raise ValueError("boundary states must match the state dimension")

    def validate_weights(self, n_samples: int = 20) -> None:
        """Check R > 0 symmetric and Q >= 0 symmetric on a sampled grid."""
        for t in np.linspace(self.t0, self.tf, n_samples):
            R = self.R(float(t))
            if not np.allclose(R, R.T, atol=1e-10):
                raise ValueError(f"R(t) is not symmetric at t={t:.6g}")
            if np.linalg.eigvalsh(R)[0] <= 0.0:
                raise ValueError(f"R(t) is not positive definite at t={t:.6g}")
            Q = self.Q(float(t))
            if not np.allclose(Q, Q.T, atol=1e-10):
                raise ValueError(f"Q(t) is not symmetric at t={t:.6g}")
            if np.linalg.eigvalsh(Q)[0] < -1e-10:
                raise ValueError(f"Q(t) is not positive semidefinite at t={t:.6g}")


@dataclass(frozen=True)
class RiccatiSolution:
    """P and V samples on the uniform grid t0..tf, linearly interpolated."""

    grid: np.ndarray
    P: np.ndarray  # (N+1, n, n)
    V: np.ndarray  # (N+1, n)
    h: float

    @property
    def guard(self) -> float:
        return TERMINAL_GUARD_STEPS * self.h

    def interpolate(self, t: float):
        return (interp_sample(self.grid[0], self.h, self.P, t),
                interp_sample(self.grid[0], self.h, self.V, t))


@dataclass(frozen=True)
class OptimalTrajectory:
    """State and control samples of one optimized run plus its cost."""

    grid: np.ndarray
    X: np.ndarray  # (N+1, n)
    u: np.ndarray  # (N+1, m)
    cost: float


def riccati_rhs(problem: LQProblem, t: float, P: np.ndarray) -> np.ndarray:
    """Pdot = A P + P A' + P Q P - (P S + B) R^-1 (S' P + B')."""
    A = problem.A(t)
    B = problem.B(t)
    PS_B = P @ problem.S(t) + B
    return (A @ P + P @ A.T + P @ problem.Q(t) @ P
            - PS_B @ np.linalg.solve(problem.R(t), PS_B.T))


def v_rhs(problem: LQProblem, t: float, P: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Vdot = (A - B R^-1 S' + P Q - P S R^-1 S') V."""
    A = problem.A(t)
    B = problem.B(t)
    S = problem.S(t)
    Rinv_St = np.linalg.solve(problem.R(t), S.T)
    return (A - B @ Rinv_St + P @ problem.Q(t) - P @ S @ Rinv_St) @ V


def solve_riccati_backward(problem: LQProblem, h: float) -> RiccatiSolution:
    """Integrate P and V backward from P(tf) = 0, V(tf) = Xf with RK4.

    Raises NumericalDivergenceError if any sample stops being finite, which
    signals an ill-posed problem or horizon.
    """
    n = problem.n
    N = grid_size(problem.t0, problem.tf, h)
    grid = problem.t0 + np.arange(N + 1) * h
    P = np.zeros((N + 1, n, n))
    V = np.zeros((N + 1, n))
    V[N] = problem.Xf

    def rhs(t, y):
        Pm = y[: n * n].reshape(n, n)
        Vv = y[n * n:]
        return np.concatenate([riccati_rhs(problem, t, Pm).ravel(),
                               v_rhs(problem, t, Pm, Vv)])

    y = np.concatenate([P[N].ravel(), V[N]])
    for k in range(N, 0, -1):
        y = rk4_step(rhs, grid[k], y, -h)
        if not np.all(np.isfinite(y)):
            raise NumericalDivergenceError(
                f"Riccati solution diverged at t={grid[k - 1]:.6g}"
            )
        P[k - 1] = y[: n * n].reshape(n, n)
        V[k - 1] = y[n * n:]
    return RiccatiSolution(grid, P, V, h)


def optimal_control(problem: LQProblem, sol: RiccatiSolution, t: float,
                    X: np.ndarray) -> np.ndarray:
    """Feedback control u* = -R^-1 S' X + R^-1 B' y with P y = V - X.

    The linear solve uses truncated least squares, which agrees with the
    P^-1 (V - X) form wherever P is invertible and stays bounded as P -> 0
    at the terminal boundary. Inside the guard window [tf - guard, tf] the
    evaluation time is clamped to tf - guard.
    """
    te = min(max(t, problem.t0), problem.tf - sol.guard)
    P, V = sol.interpolate(te)
    y = np.linalg.lstsq(P, V - X, rcond=LSTSQ_RCOND)[0]
    S = problem.S(te)
    B = problem.B(te)
    return np.linalg.solve(problem.R(te), B.T @ y - S.T @ X)


def rollout(problem: LQProblem, sol: RiccatiSolution, h: float | None = None
            ) -> OptimalTrajectory:
    """Integrate Xdot = A X + B u*(t, X) forward from X0 with RK4.

    Once inside the terminal guard window the control is held at the value
    computed on entry, removing the singular feedback gain from the final
    steps. The step must equal the solution step or refine it integrally.
    """
    if h is None:
        h = sol.h
    ratio = sol.h / h
    if h <= 0 or abs(ratio - round(ratio)) > 1e-9:
        raise ValueError(f"rollout step {h} must integrally refine solver step {sol.h}")
    n, m = problem.n, problem.m
    N = grid_size(problem.t0, problem.tf, h)
    grid = problem.t0 + np.arange(N + 1) * h
    guard_start = problem.tf - sol.guard

    X = np.empty((N + 1, n))
    u = np.empty((N + 1, m))
    X[0] = problem.X0
    x = problem.X0.copy()
    u_hold = None
    for k in range(N):
        t = grid[k]
        if t >= guard_start - 1e-12:
            if u_hold is None:
                u_hold = optimal_control(problem, sol, t, x)
            uk = u_hold
            f = lambda tt, xx: problem.A(tt) @ xx + problem.B(tt) @ u_hold
        else:
            uk = optimal_control(problem, sol, t, x)
            f = lambda tt, xx: (problem.A(tt) @ xx
                                + problem.B(tt) @ optimal_control(problem, sol, tt, xx))
        u[k] = uk
        x = rk4_step(f, t, x, h)
        if not np.all(np.isfinite(x)):
            raise NumericalDivergenceError(f"rollout diverged at t={grid[k + 1]:.6g}")
        X[k + 1] = x
    u[N] = u_hold if u_hold is not None else optimal_control(problem, sol, grid[N], x)
    traj = OptimalTrajectory(grid, X, u, 0.0)
    return OptimalTrajectory(grid, X, u, cost(problem, traj))


def cost(problem: LQProblem, trajectory: OptimalTrajectory) -> float:
    """Trapezoidal quadrature of (1/2)(X'QX + 2X'Su + u'Ru) on the trajectory grid."""
    grid = trajectory.grid
    integrand = np.empty(len(grid))
    for k, t in enumerate(grid):
        Xk = trajectory.X[k]
        uk = trajectory.u[k]
        integrand[k] = (Xk @ problem.Q(t) @ Xk
                        + 2.0 * Xk @ problem.S(t) @ uk
                        + uk @ problem.R(t) @ uk)
    return float(0.5 * np.trapezoid(integrand, grid))


def transcription_oracle(problem: LQProblem, N: int):
    """Independent direct-transcription solve of the same problem.

    Trapezoidal collocation turns the dynamics into equality constraints,
    the quadrature into a quadratic cost, and the resulting KKT system is
    solved by one dense factorization. Returns (cost, OptimalTrajectory).
    Intended for modest sizes (n*N up to ~1e4).
    """
    if N < 2:
        raise ValueError("transcription needs at least 2 intervals")
    n, m = problem.n, problem.m
    hh = (problem.tf - problem.t0) / N
    grid = np.linspace(problem.t0, problem.tf, N + 1)
    nz = (N + 1) * (n + m)

    def xi(k):
        return k * n

    def ui(k):
        return (N + 1) * n + k * m

    H = np.zeros((nz, nz))
    for k in range(N + 1):
        t = grid[k]
        w = 0.5 * hh if k in (0, N) else hh
        H[xi(k): xi(k) + n, xi(k): xi(k) + n] += w * problem.Q(t)
        Sk = w * problem.S(t)
        H[xi(k): xi(k) + n, ui(k): ui(k) + m] += Sk
        H[ui(k): ui(k) + m, xi(k): xi(k) + n] += Sk.T
        H[ui(k): ui(k) + m, ui(k): ui(k) + m] += w * problem.R(t)

    nc = N * n + 2 * n
    E = np.zeros((nc, nz))
    d = np.zeros(nc)
    for k in range(N):
        r = k * n
        Ak, Ak1 = problem.A(grid[k]), problem.A(grid[k + 1])
        Bk, Bk1 = problem.B(grid[k]), problem.B(grid[k + 1])
        E[r: r + n, xi(k): xi(k) + n] = -np.eye(n) - 0.5 * hh * Ak
        E[r: r + n, xi(k + 1): xi(k + 1) + n] = np.eye(n) - 0.5 * hh * Ak1
        E[r: r + n, ui(k): ui(k) + m] = -0.5 * hh * Bk
        E[r: r + n, ui(k + 1): ui(k + 1) + m] = -0.5 * hh * Bk1
    E[N * n: N * n + n, xi(0): xi(0) + n] = np.eye(n)
    d[N * n: N * n + n] = problem.X0
    E[N * n + n:, xi(N): xi(N) + n] = np.eye(n)
    d[N * n + n:] = problem.Xf

    KKT = np.block([[H, E.T], [E, np.zeros((nc, nc))]])
    rhs = np.concatenate([np.zeros(nz), d])
    try:
        sol = np.linalg.solve(KKT, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularKKTError(f"KKT system is singular: {exc}") from exc
    residual = np.linalg.norm(KKT @ sol - rhs)
    if not np.isfinite(residual) or residual > 1e-6 * max(1.0, np.linalg.norm(rhs)):
        raise SingularKKTError(f"KKT solve residual {residual:.3g} is too large")

    z = sol[:nz]
    X = z[: (N + 1) * n].reshape(N + 1, n)
    u = z[(N + 1) * n:].reshape(N + 1, m)
    c = float(0.5 * z @ H @ z)
    return c, OptimalTrajectory(grid, X, u, c)
