"""Kinematics and rigid-body dynamics of a 2-link planar arm in the vertical plane.

Links are uniform rods (center of mass at mid-length, inertia m*L^2/12 about
the center). Joint angle q1 is measured from the +x axis, q2 relative to
link 1; gravity acts along -y. All operations are pure functions of their
inputs and the value types are safe to share between threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularConfigurationError, UnreachableTargetError

ELBOW_DOWN = "elbow-down"
ELBOW_UP = "elbow-up"

# |det J| below this is treated as a kinematic singularity
SINGULARITY_THRESHOLD = 1e-6

# slack on the workspace boundary test in inverse_kinematics (m)
REACH_TOLERANCE = 1e-9


@dataclass(frozen=True)
class ManipulatorParams:
    """Physical parameters: masses (kg), lengths (m), rotational inertias
    (kg m^2, about the link center), gravitational acceleration (m/s^2)."""

    m1: float
    m2: float
    L1: float
    L2: float
    I1: float
    I2: float
    g: float = 9.81

    def __post_init__(self):
        if min(self.m1, self.m2, self.L1, self.L2) <= 0.0:
            raise ValueError("link masses and lengths must be strictly positive")
        if self.I1 < 0.0 or self.I2 < 0.0:
            raise ValueError("rotational inertias must be non-negative")
        if self.g < 0.0:
            raise ValueError("gravitational acceleration must be non-negative")

    @classmethod
    def uniform_rods(cls, m1: float, m2: float, L1: float, L2: float,
                     g: float = 9.81) -> "ManipulatorParams":
        """Build parameters with the standard uniform-rod inertia I = m L^2 / 12."""
        return cls(m1, m2, L1, L2, m1 * L1 ** 2 / 12.0, m2 * L2 ** 2 / 12.0, g)

    @property
    def lc1(self) -> float:
        return 0.5 * self.L1

    @property
    def lc2(self) -> float:
        return 0.5 * self.L2


@dataclass(frozen=True)
class JointState:
    """Joint angles q (rad) and velocities qdot (rad/s), each length 2."""

    q: np.ndarray
    qdot: np.ndarray


@dataclass(frozen=True)
class CartesianState:
    """End-effector position x (m) and velocity xdot (m/s), each length 2."""

    x: np.ndarray
    xdot: np.ndarray


@dataclass(frozen=True)
class JointDynamicsTerms:
    """Joint-space terms: M qddot + C qdot + G = tau + J^T f_h.

    C is in Christoffel form, so Mdot - 2C is exactly skew-symmetric.
    """

    M: np.ndarray
    C: np.ndarray
    G: np.ndarray


@dataclass(frozen=True)
class CartesianDynamicsTerms:
    """Task-space terms: M xddot + C xdot + G = u + f_h."""

    M: np.ndarray
    C: np.ndarray
    G: np.ndarray


@dataclass(frozen=True)
class DynamicsBoundEstimates:
    """Sampled bounds: alpha_m <= ||M_c|| <= alpha_M, ||C_c|| <= eta ||qdot||,
    ||G_c|| <= delta, ||J^T f|| <= F for ||f|| <= the sampled force magnitude."""

    alpha_m: float
    alpha_M: float
    eta: float
    delta: float
    F: float


def forward_kinematics(params: ManipulatorParams, q: np.ndarray) -> np.ndarray:
    """End-effector position (L1 cos q1 + L2 cos(q1+q2), L1 sin q1 + L2 sin(q1+q2))."""
    q1, q2 = q[0], q[1]
    return np.array([
        params.L1 * np.cos(q1) + params.L2 * np.cos(q1 + q2),
        params.L1 * np.sin(q1) + params.L2 * np.sin(q1 + q2),
    ])


def inverse_kinematics(params: ManipulatorParams, p: np.ndarray,
                       branch: str = ELBOW_DOWN) -> np.ndarray:
    """Joint angles reaching Cartesian point p.

    branch selects the sign of q2: "elbow-down" gives q2 <= 0, "elbow-up"
    gives q2 >= 0. Raises UnreachableTargetError outside the annulus
    |L1 - L2| <= ||p|| <= L1 + L2 (with a small boundary tolerance).
    """
    if branch not in (ELBOW_DOWN, ELBOW_UP):
        raise ValueError(f"unknown elbow branch {branch!r}")
    L1, L2 = params.L1, params.L2
    r = float(np.hypot(p[0], p[1]))
    if r > L1 + L2 + REACH_TOLERANCE or r < abs(L1 - L2) - REACH_TOLERANCE:
        raise UnreachableTargetError(
            f"target ({p[0]:.6g}, {p[1]:.6g}) at radius {r:.6g} is outside "
            f"the workspace [{abs(L1 - L2):.6g}, {L1 + L2:.6g}]"
        )
    c2 = np.clip((r * r - L1 * L1 - L2 * L2) / (2.0 * L1 * L2), -1.0, 1.0)
    q2 = np.arccos(c2)
    if branch == ELBOW_DOWN:
        q2 = -q2
    q1 = np.arctan2(p[1], p[0]) - np.arctan2(L2 * np.sin(q2), L1 + L2 * np.cos(q2))
    return np.array([q1, q2])


def jacobian(params: ManipulatorParams, q: np.ndarray) -> np.ndarray:
    """Analytic Jacobian of forward_kinematics: xdot = J(q) qdot."""
    s1, c1 = np.sin(q[0]), np.cos(q[0])
    s12, c12 = np.sin(q[0] + q[1]), np.cos(q[0] + q[1])
    L1, L2 = params.L1, params.L2
    return np.array([
        [-L1 * s1 - L2 * s12, -L2 * s12],
        [L1 * c1 + L2 * c12, L2 * c12],
    ])


def jacobian_dot(params: ManipulatorParams, q: np.ndarray,
                 qdot: np.ndarray) -> np.ndarray:
    """Time derivative of the Jacobian along (q, qdot)."""
    s1, c1 = np.sin(q[0]), np.cos(q[0])
    s12, c12 = np.sin(q[0] + q[1]), np.cos(q[0] + q[1])
    L1, L2 = params.L1, params.L2
    d1 = qdot[0]
    d12 = qdot[0] + qdot[1]
    return np.array([
        [-L1 * c1 * d1 - L2 * c12 * d12, -L2 * c12 * d12],
        [-L1 * s1 * d1 - L2 * s12 * d12, -L2 * s12 * d12],
    ])


def joint_dynamics_terms(params: ManipulatorParams,
                         state: JointState) -> JointDynamicsTerms:
    """Mass matrix, Christoffel Coriolis matrix, and gravity vector."""
    m1, m2 = params.m1, params.m2
    L1 = params.L1
    lc1, lc2 = params.lc1, params.lc2
    c2 = np.cos(state.q[1])
    s2 = np.sin(state.q[1])
    d1, d2 = state.qdot[0], state.qdot[1]

    a = params.I1 + params.I2 + m1 * lc1 ** 2 + m2 * (L1 ** 2 + lc2 ** 2)
    b = m2 * L1 * lc2
    d = params.I2 + m2 * lc2 ** 2
    M = np.array([
        [a + 2.0 * b * c2, d + b * c2],
        [d + b * c2, d],
    ])

    hh = -b * s2  # Christoffel factor from dM/dq2
    C = np.array([
        [hh * d2, hh * (d1 + d2)],
        [-hh * d1, 0.0],
    ])

    g = params.g
    c1 = np.cos(state.q[0])
    c12 = np.cos(state.q[0] + state.q[1])
    G = np.array([
        (m1 * lc1 + m2 * L1) * g * c1 + m2 * lc2 * g * c12,
        m2 * lc2 * g * c12,
    ])
    return JointDynamicsTerms(M, C, G)


def mass_matrix_dot(params: ManipulatorParams, q: np.ndarray,
                    qdot: np.ndarray) -> np.ndarray:
    """Analytic d/dt of the joint mass matrix (depends on q2 only)."""
    b = params.m2 * params.L1 * params.lc2
    s2 = np.sin(q[1])
    d2 = qdot[1]
    return np.array([
        [-2.0 * b * s2 * d2, -b * s2 * d2],
        [-b * s2 * d2, 0.0],
    ])


def cartesian_dynamics_terms(params: ManipulatorParams, state: JointState,
                             det_threshold: float = SINGULARITY_THRESHOLD
                             ) -> CartesianDynamicsTerms:
    """Congruence transform of the joint-space terms into task space.

    M_c = J^-T M J^-1, C_c = J^-T (C - M J^-1 Jdot) J^-1, G_c = J^-T G.
    Raises SingularConfigurationError when |det J| <= det_threshold.
    """
    J = jacobian(params, state.q)
    det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
    if abs(det) <= det_threshold:
        raise SingularConfigurationError(
            f"|det J| = {abs(det):.3g} at q = ({state.q[0]:.4g}, {state.q[1]:.4g})"
        )
    Jinv = np.linalg.inv(J)
    Jdot = jacobian_dot(params, state.q, state.qdot)
    terms = joint_dynamics_terms(params, state)
    Mc = Jinv.T @ terms.M @ Jinv
    Cc = Jinv.T @ (terms.C - terms.M @ Jinv @ Jdot) @ Jinv
    Gc = Jinv.T @ terms.G
    return CartesianDynamicsTerms(Mc, Cc, Gc)


def forward_dynamics(params: ManipulatorParams, state: JointState,
                     tau: np.ndarray, f_h: np.ndarray) -> np.ndarray:
    """Joint accelerations: qddot = M^-1 (tau + J^T f_h - C qdot - G)."""
    terms = joint_dynamics_terms(params, state)
    J = jacobian(params, state.q)
    rhs = tau + J.T @ f_h - terms.C @ state.qdot - terms.G
    return np.linalg.solve(terms.M, rhs)


def total_energy(params: ManipulatorParams, state: JointState) -> float:
    """Kinetic plus gravitational potential energy (J); invariant for the
    passive arm (tau = 0, f_h = 0)."""
    terms = joint_dynamics_terms(params, state)
    kinetic = 0.5 * state.qdot @ terms.M @ state.qdot
    s1 = np.sin(state.q[0])
    s12 = np.sin(state.q[0] + state.q[1])
    potential = params.g * (params.m1 * params.lc1 * s1
                            + params.m2 * (params.L1 * s1 + params.lc2 * s12))
    return float(kinetic + potential)


def estimate_dynamics_bounds(params: ManipulatorParams, n_samples: int = 2000,
                             seed: int = 0, v_max: float = 3.0,
                             f_max: float = 1.0, q2_margin: float = 0.1,
                             safety: float = 1.25) -> DynamicsBoundEstimates:
    """Monte-Carlo estimates of the task-space bound constants.

    Samples q with q2 kept q2_margin away from the straight/folded
    singularities and ||qdot|| <= v_max. The safety factor widens the raw
    sample extrema so fresh draws from the same region stay inside.
    """
    rng = np.random.default_rng(seed)
    alpha_m, alpha_M, eta, delta, F = np.inf, 0.0, 0.0, 0.0, 0.0
    for _ in range(n_samples):
        q1 = rng.uniform(-np.pi, np.pi)
        q2 = rng.uniform(q2_margin, np.pi - q2_margin) * rng.choice([-1.0, 1.0])
        qdot = rng.normal(size=2)
        qdot *= rng.uniform(0.05, 1.0) * v_max / np.linalg.norm(qdot)
        state = JointState(np.array([q1, q2]), qdot)
        terms = cartesian_dynamics_terms(params, state)
        mc_norm = np.linalg.norm(terms.M, 2)
        alpha_m = min(alpha_m, mc_norm)
        alpha_M = max(alpha_M, mc_norm)
        eta = max(eta, np.linalg.norm(terms.C, 2) / np.linalg.norm(qdot))
        delta = max(delta, np.linalg.norm(terms.G))
        F = max(F, np.linalg.norm(jacobian(params, state.q).T, 2) * f_max)
    return DynamicsBoundEstimates(alpha_m / safety, alpha_M * safety,
                                  eta * safety, delta * safety, F * safety)
