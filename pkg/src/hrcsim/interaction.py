"""Time-varying state-space model of the coupled human-robot interaction.

The prescribed impedance model and the first-order human force model are
assembled into one linear system Xdot = A(t) X + B(t) u with stacked state
X = [x_imp, xdot_imp, f_h]. Parameter schedules are immutable after
construction and safe for concurrent evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ScheduleRangeError

CONSTANT = "constant"
SINUSOIDAL = "sinusoidal"
TABULATED = "tabulated"

# |det| below this counts as singular when validating M_imp / K_d schedules
SCHEDULE_DET_THRESHOLD = 1e-9


@dataclass(frozen=True)
class MatrixSchedule:
    """A matrix-valued function of time.

    kinds: constant (base), sinusoidal (base + amplitude*sin(omega*t),
    elementwise), tabulated (linear interpolation between sample matrices).
    """

    kind: str
    base: np.ndarray | None = None
    amplitude: np.ndarray | None = None
    omega: float = 0.0
    times: np.ndarray | None = None
    values: np.ndarray | None = None

    @classmethod
    def constant(cls, base) -> "MatrixSchedule":
        return cls(CONSTANT, base=np.asarray(base, dtype=float))

    @classmethod
    def sinusoidal(cls, base, amplitude, omega: float) -> "MatrixSchedule":
        return cls(SINUSOIDAL, base=np.asarray(base, dtype=float),
                   amplitude=np.asarray(amplitude, dtype=float), omega=float(omega))

    @classmethod
    def tabulated(cls, times, values) -> "MatrixSchedule":
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        if times.ndim != 1 or len(times) < 2 or np.any(np.diff(times) <= 0):
            raise ValueError("tabulated schedule needs at least 2 strictly increasing times")
        if values.shape[0] != times.shape[0]:
            raise ValueError("one sample matrix per tabulated time is required")
        return cls(TABULATED, times=times, values=values)

    @property
    def shape(self) -> tuple:
        if self.kind == TABULATED:
            return self.values.shape[1:]
        return self.base.shape


def evaluate_schedule(s: MatrixSchedule, t: float) -> np.ndarray:
    """Evaluate the schedule at time t.

    Tabulated schedules raise ScheduleRangeError outside their time table;
    the other kinds are defined for all t.
    """
    if s.kind == CONSTANT:
        return s.base
    if s.kind == SINUSOIDAL:
        return s.base + s.amplitude * np.sin(s.omega * t)
    if s.kind == TABULATED:
        if t < s.times[0] - 1e-12 or t > s.times[-1] + 1e-12:
            raise ScheduleRangeError(
                f"t={t:.6g} outside tabulated range [{s.times[0]:.6g}, {s.times[-1]:.6g}]"
            )
        i = int(np.clip(np.searchsorted(s.times, t, side="right") - 1, 0,
                        len(s.times) - 2))
        a = (t - s.times[i]) / (s.times[i + 1] - s.times[i])
        return (1.0 - a) * s.values[i] + a * s.values[i + 1]
    raise ValueError(f"unknown schedule kind {s.kind!r}")


@dataclass(frozen=True)
class ImpedanceParams:
    """Prescribed impedance model M xddot + B xdot + K x = f_h, as 2x2 schedules."""

    M: MatrixSchedule
    B: MatrixSchedule
    K: MatrixSchedule


@dataclass(frozen=True)
class HumanParams:
    """Human force model K_d fdot + K_p f = k_e x_d, as 2x2 schedules."""

    K_d: MatrixSchedule
    K_p: MatrixSchedule
    k_e: MatrixSchedule


@dataclass(frozen=True)
class UnifiedState:
    """Impedance state xi = [x_imp, xdot_imp] stacked with the human force."""

    xi: np.ndarray
    f_h: np.ndarray

    @property
    def stacked(self) -> np.ndarray:
        return np.concatenate([self.xi, self.f_h])

    @classmethod
    def from_stacked(cls, X: np.ndarray) -> "UnifiedState":
        X = np.asarray(X, dtype=float)
        return cls(X[:4].copy(), X[4:6].copy())


def impedance_state_matrices(imp: ImpedanceParams, t: float):
    """State-space blocks of the impedance model for xi = [x_imp, xdot_imp]:

    A_xi = [[0, I], [-M^-1 K, -M^-1 B]],  B_xi = [[0], [I]].
    """
    M = evaluate_schedule(imp.M, t)
    if abs(np.linalg.det(M)) <= SCHEDULE_DET_THRESHOLD:
        raise ConfigError(f"impedance mass matrix is singular at t={t:.6g}")
    Minv_K = np.linalg.solve(M, evaluate_schedule(imp.K, t))
    Minv_B = np.linalg.solve(M, evaluate_schedule(imp.B, t))
    A_xi = np.block([
        [np.zeros((2, 2)), np.eye(2)],
        [-Minv_K, -Minv_B],
    ])
    B_xi = np.vstack([np.zeros((2, 2)), np.eye(2)])
    return A_xi, B_xi


def human_force_matrices(h: HumanParams, t: float):
    """Force-model blocks: fdot = A_h xi + B_h f with

    A_h = k_e [K_d^-1, 0]  (2x4),  B_h = -K_d^-1 K_p.
    """
    K_d = evaluate_schedule(h.K_d, t)
    if abs(np.linalg.det(K_d)) <= SCHEDULE_DET_THRESHOLD:
        raise ConfigError(f"human damping gain K_d is singular at t={t:.6g}")
    K_d_inv = np.linalg.inv(K_d)
    K_d1 = np.hstack([K_d_inv, np.zeros((2, 2))])
    A_h = evaluate_schedule(h.k_e, t) @ K_d1
    B_h = -K_d_inv @ evaluate_schedule(h.K_p, t)
    return A_h, B_h


def unified_matrices(imp: ImpedanceParams, h: HumanParams, t: float):
    """Assemble the 6x6 / 6x2 coupled system matrices.

    A = [[A_xi, 0], [A_h, B_h]], B = [[B_xi], [0]]: the human force is a
    state driven by the impedance reference, never directly by u.
    """
    A_xi, B_xi = impedance_state_matrices(imp, t)
    A_h, B_h = human_force_matrices(h, t)
    A = np.block([
        [A_xi, np.zeros((4, 2))],
        [A_h, B_h],
    ])
    B = np.vstack([B_xi, np.zeros((2, 2))])
    return A, B


def validate_interaction_schedules(imp: ImpedanceParams, h: HumanParams,
                                   t0: float, tf: float,
                                   n_samples: int = 100) -> None:
    """Fail fast if M_imp or K_d loses invertibility anywhere on the horizon."""
    for t in np.linspace(t0, tf, n_samples):
        unified_matrices(imp, h, float(t))
