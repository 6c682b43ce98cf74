import numpy as np
import pytest
import sympy as sp

from hrcsim import manipulator as mnp
from hrcsim.errors import SingularConfigurationError, UnreachableTargetError

PARAMS = mnp.ManipulatorParams.uniform_rods(5.0, 5.0, 1.0, 1.0)


def random_state(rng, q2_margin=0.05, v_max=3.0):
    q1 = rng.uniform(-np.pi, np.pi)
    q2 = rng.uniform(q2_margin, np.pi - q2_margin) * rng.choice([-1.0, 1.0])
    return mnp.JointState(np.array([q1, q2]), rng.uniform(-v_max, v_max, 2))


class TestParams:
    def test_uniform_rod_inertia(self):
        assert PARAMS.I1 == pytest.approx(5.0 / 12.0)
        assert PARAMS.I2 == pytest.approx(5.0 / 12.0)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            mnp.ManipulatorParams(0.0, 5.0, 1.0, 1.0, 0.1, 0.1)
        with pytest.raises(ValueError):
            mnp.ManipulatorParams(5.0, 5.0, 1.0, 1.0, -0.1, 0.1)
        with pytest.raises(ValueError):
            mnp.ManipulatorParams(5.0, 5.0, 1.0, 1.0, 0.1, 0.1, g=-1.0)


class TestKinematics:
    def test_fk_stretched(self):
        np.testing.assert_allclose(
            mnp.forward_kinematics(PARAMS, np.array([0.0, 0.0])), [2.0, 0.0],
            atol=1e-15)
        np.testing.assert_allclose(
            mnp.forward_kinematics(PARAMS, np.array([np.pi / 2, 0.0])), [0.0, 2.0],
            atol=1e-15)

    def test_fk_frozen_value(self):
        # independent trig evaluation of cos/sin(0.5), cos/sin(1.5)
        p = mnp.forward_kinematics(PARAMS, np.array([0.5, 1.0]))
        np.testing.assert_allclose(
            p, [0.9483197635580756, 1.4769205252082574], atol=1e-15)

    def test_ik_boundary(self):
        np.testing.assert_allclose(
            mnp.inverse_kinematics(PARAMS, np.array([2.0, 0.0])), [0.0, 0.0],
            atol=1e-9)
        np.testing.assert_allclose(
            mnp.inverse_kinematics(PARAMS, np.array([0.0, 2.0])), [np.pi / 2, 0.0],
            atol=1e-9)

    def test_ik_elbow_down_frozen(self):
        # cos q2 = (0.25 + 1 - 2) / 2 = -0.375 exactly
        q = mnp.inverse_kinematics(PARAMS, np.array([-0.5, 1.0]), mnp.ELBOW_DOWN)
        assert q[1] == pytest.approx(-np.arccos(-0.375), abs=1e-12)
        assert q[1] == pytest.approx(-1.9551931012905357, abs=1e-12)
        assert q[0] == pytest.approx(3.0120404864409706, abs=1e-12)
        np.testing.assert_allclose(
            mnp.forward_kinematics(PARAMS, q), [-0.5, 1.0], atol=1e-9)

    def test_ik_branches(self):
        p = np.array([-0.5, 1.0])
        down = mnp.inverse_kinematics(PARAMS, p, mnp.ELBOW_DOWN)
        up = mnp.inverse_kinematics(PARAMS, p, mnp.ELBOW_UP)
        assert down[1] < 0 < up[1]
        for q in (down, up):
            np.testing.assert_allclose(mnp.forward_kinematics(PARAMS, q), p,
                                       atol=1e-9)

    def test_ik_unreachable(self):
        with pytest.raises(UnreachableTargetError):
            mnp.inverse_kinematics(PARAMS, np.array([2.5, 0.0]))
        # inner boundary of an arm with unequal links
        uneven = mnp.ManipulatorParams.uniform_rods(1.0, 1.0, 1.0, 0.5)
        with pytest.raises(UnreachableTargetError):
            mnp.inverse_kinematics(uneven, np.array([0.2, 0.0]))

    def test_fk_ik_round_trip(self):
        rng = np.random.default_rng(3)
        worst = 0.0
        for _ in range(1000):
            r = rng.uniform(0.05, 2.0 - 1e-9)
            ang = rng.uniform(-np.pi, np.pi)
            p = r * np.array([np.cos(ang), np.sin(ang)])
            for branch in (mnp.ELBOW_DOWN, mnp.ELBOW_UP):
                q = mnp.inverse_kinematics(PARAMS, p, branch)
                worst = max(worst, np.linalg.norm(
                    mnp.forward_kinematics(PARAMS, q) - p))
        assert worst <= 1e-9

    def test_jacobian_stretched(self):
        np.testing.assert_allclose(
            mnp.jacobian(PARAMS, np.array([0.0, 0.0])), [[0, 0], [2, 1]],
            atol=1e-15)
        np.testing.assert_allclose(
            mnp.jacobian(PARAMS, np.array([np.pi / 2, 0.0])), [[-2, -1], [0, 0]],
            atol=1e-15)

    def test_jacobian_finite_differences(self):
        rng = np.random.default_rng(4)
        eps = 1e-6
        for _ in range(200):
            q = rng.uniform(-np.pi, np.pi, 2)
            J = mnp.jacobian(PARAMS, q)
            for j in range(2):
                dq = np.zeros(2)
                dq[j] = eps
                col = (mnp.forward_kinematics(PARAMS, q + dq)
                       - mnp.forward_kinematics(PARAMS, q - dq)) / (2 * eps)
                np.testing.assert_allclose(J[:, j], col, atol=1e-6)

    def test_jacobian_dot_finite_differences(self):
        rng = np.random.default_rng(5)
        delta = 1e-6
        for _ in range(50):
            q = rng.uniform(-np.pi, np.pi, 2)
            qdot = rng.uniform(-2, 2, 2)
            Jdot = mnp.jacobian_dot(PARAMS, q, qdot)
            Jdot_fd = (mnp.jacobian(PARAMS, q + delta * qdot)
                       - mnp.jacobian(PARAMS, q - delta * qdot)) / (2 * delta)
            np.testing.assert_allclose(Jdot, Jdot_fd, atol=1e-7)


@pytest.fixture(scope="module")
def lagrangian_oracle():
    """Symbolic rod-arm dynamics derived independently from the Lagrangian."""
    q1, q2, d1, d2 = sp.symbols("q1 q2 d1 d2", real=True)
    m1, m2, L1, L2, I1, I2, g = (PARAMS.m1, PARAMS.m2, PARAMS.L1, PARAMS.L2,
                                 PARAMS.I1, PARAMS.I2, PARAMS.g)
    lc1, lc2 = L1 / 2, L2 / 2
    c1 = sp.Matrix([lc1 * sp.cos(q1), lc1 * sp.sin(q1)])
    c2 = sp.Matrix([L1 * sp.cos(q1) + lc2 * sp.cos(q1 + q2),
                    L1 * sp.sin(q1) + lc2 * sp.sin(q1 + q2)])
    qs = sp.Matrix([q1, q2])
    ds = sp.Matrix([d1, d2])
    v1 = c1.jacobian(qs) * ds
    v2 = c2.jacobian(qs) * ds
    T = (m1 * v1.dot(v1) / 2 + I1 * d1 ** 2 / 2
         + m2 * v2.dot(v2) / 2 + I2 * (d1 + d2) ** 2 / 2)
    U = m1 * g * c1[1] + m2 * g * c2[1]
    M = sp.hessian(T, ds)
    G = sp.Matrix([U]).jacobian(qs).T
    # Christoffel symbols of M
    C = sp.zeros(2, 2)
    for i in range(2):
        for j in range(2):
            C[i, j] = sum(
                sp.Rational(1, 2) * (sp.diff(M[i, j], qs[k]) + sp.diff(M[i, k], qs[j])
                                     - sp.diff(M[j, k], qs[i])) * ds[k]
                for k in range(2))
    args = (q1, q2, d1, d2)
    return (sp.lambdify(args, M, "numpy"), sp.lambdify(args, C, "numpy"),
            sp.lambdify(args, G, "numpy"))


class TestJointDynamics:
    def test_gravity_free(self):
        params = mnp.ManipulatorParams.uniform_rods(5.0, 5.0, 1.0, 1.0, g=0.0)
        rng = np.random.default_rng(6)
        for _ in range(20):
            state = random_state(rng)
            terms = mnp.joint_dynamics_terms(params, state)
            np.testing.assert_allclose(terms.G, 0.0, atol=1e-15)

    def test_no_velocity_forces_at_rest(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            state = mnp.JointState(rng.uniform(-np.pi, np.pi, 2), np.zeros(2))
            terms = mnp.joint_dynamics_terms(params=PARAMS, state=state)
            np.testing.assert_allclose(terms.C @ state.qdot, 0.0, atol=1e-15)

    def test_mass_matrix_straight_arm_frozen(self):
        # symbolic Lagrangian evaluation at q2 = 0: [[40/3, 25/6], [25/6, 5/3]]
        terms = mnp.joint_dynamics_terms(
            PARAMS, mnp.JointState(np.array([0.3, 0.0]), np.zeros(2)))
        np.testing.assert_allclose(
            terms.M, [[40.0 / 3.0, 25.0 / 6.0], [25.0 / 6.0, 5.0 / 3.0]],
            atol=1e-12)

    def test_matches_lagrangian_oracle(self, lagrangian_oracle):
        M_fn, C_fn, G_fn = lagrangian_oracle
        rng = np.random.default_rng(8)
        for _ in range(25):
            state = random_state(rng)
            args = (*state.q, *state.qdot)
            terms = mnp.joint_dynamics_terms(PARAMS, state)
            np.testing.assert_allclose(terms.M, M_fn(*args), atol=1e-10)
            np.testing.assert_allclose(terms.C, C_fn(*args), atol=1e-10)
            np.testing.assert_allclose(terms.G, np.asarray(G_fn(*args)).ravel(),
                                       atol=1e-10)

    def test_joint_skew_symmetry(self):
        rng = np.random.default_rng(9)
        worst = 0.0
        for _ in range(1000):
            state = random_state(rng)
            lam = rng.normal(size=2)
            terms = mnp.joint_dynamics_terms(PARAMS, state)
            Mdot = mnp.mass_matrix_dot(PARAMS, state.q, state.qdot)
            worst = max(worst, abs(lam @ (Mdot - 2 * terms.C) @ lam))
        assert worst <= 1e-10

    def test_mass_matrix_positive_definite(self):
        rng = np.random.default_rng(10)
        for _ in range(200):
            state = random_state(rng)
            terms = mnp.joint_dynamics_terms(PARAMS, state)
            np.testing.assert_allclose(terms.M, terms.M.T, atol=1e-15)
            assert np.linalg.eigvalsh(terms.M)[0] > 0


class TestCartesianDynamics:
    def test_symmetry(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            state = random_state(rng, q2_margin=0.2)
            terms = mnp.cartesian_dynamics_terms(PARAMS, state)
            assert np.abs(terms.M - terms.M.T).max() <= 1e-10
            assert np.linalg.eigvalsh(terms.M)[0] > 0

    def test_skew_symmetry_finite_difference(self):
        # Mdot_c from Richardson-extrapolated central differences along the flow
        rng = np.random.default_rng(12)
        delta = 1e-4
        worst = 0.0

        def mc_at(q, qdot):
            return mnp.cartesian_dynamics_terms(PARAMS, mnp.JointState(q, qdot)).M

        for _ in range(200):
            state = random_state(rng, q2_margin=0.4, v_max=2.0)
            lam = rng.normal(size=2)
            lam /= np.linalg.norm(lam)
            terms = mnp.cartesian_dynamics_terms(PARAMS, state)

            def central(d):
                return (mc_at(state.q + d * state.qdot, state.qdot)
                        - mc_at(state.q - d * state.qdot, state.qdot)) / (2 * d)

            Mdot = (4 * central(delta) - central(2 * delta)) / 3.0
            worst = max(worst, abs(lam @ (Mdot - 2 * terms.C) @ lam))
        assert worst <= 1e-9

    def test_singular_configuration(self):
        for q2 in (0.0, np.pi, 1e-8):
            state = mnp.JointState(np.array([0.4, q2]), np.zeros(2))
            with pytest.raises(SingularConfigurationError):
                mnp.cartesian_dynamics_terms(PARAMS, state)

    def test_bound_estimates_hold_on_fresh_samples(self):
        bounds = mnp.estimate_dynamics_bounds(PARAMS, n_samples=2000, seed=1)
        rng = np.random.default_rng(2)
        for _ in range(500):
            state = random_state(rng, q2_margin=0.1, v_max=3.0)
            terms = mnp.cartesian_dynamics_terms(PARAMS, state)
            mc = np.linalg.norm(terms.M, 2)
            assert bounds.alpha_m <= mc <= bounds.alpha_M
            assert np.linalg.norm(terms.C, 2) <= bounds.eta * np.linalg.norm(state.qdot)
            assert np.linalg.norm(terms.G) <= bounds.delta
            assert np.linalg.norm(mnp.jacobian(PARAMS, state.q).T @ np.array([1.0, 0.0])) <= bounds.F


class TestForwardDynamics:
    def test_force_balance(self):
        rng = np.random.default_rng(13)
        for _ in range(50):
            state = random_state(rng)
            f_h = rng.normal(size=2)
            terms = mnp.joint_dynamics_terms(PARAMS, state)
            J = mnp.jacobian(PARAMS, state.q)
            tau = terms.C @ state.qdot + terms.G - J.T @ f_h
            np.testing.assert_allclose(
                mnp.forward_dynamics(PARAMS, state, tau, f_h), 0.0, atol=1e-12)

    def test_rest_without_forces(self):
        params = mnp.ManipulatorParams.uniform_rods(5.0, 5.0, 1.0, 1.0, g=0.0)
        state = mnp.JointState(np.array([0.7, -1.1]), np.zeros(2))
        qddot = mnp.forward_dynamics(params, state, np.zeros(2), np.zeros(2))
        np.testing.assert_allclose(qddot, 0.0, atol=1e-15)

    def test_residual_substitution(self):
        rng = np.random.default_rng(14)
        worst = 0.0
        for _ in range(200):
            state = random_state(rng)
            tau = rng.normal(size=2) * 10
            f_h = rng.normal(size=2)
            qddot = mnp.forward_dynamics(PARAMS, state, tau, f_h)
            terms = mnp.joint_dynamics_terms(PARAMS, state)
            J = mnp.jacobian(PARAMS, state.q)
            residual = terms.M @ qddot + terms.C @ state.qdot + terms.G \
                - tau - J.T @ f_h
            worst = max(worst, np.abs(residual).max())
        assert worst <= 1e-10
