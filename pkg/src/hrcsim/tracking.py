"""Neuro-adaptive PID joint-space tracking controller.

A single time-varying gain k_R, produced by a small Gaussian RBF network,
augments a constant gain on the PID-structured error e_c. The network
weights follow a sigma-modification adaptive law, so they stay bounded
without persistent excitation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ControllerGains:
    """zeta mixes the PID error, k_rc is the constant gain, alpha scales the
    adaptive gain, sigma is the leakage rate, Gamma the adaptation gain matrix."""

    zeta: float
    k_rc: float
    alpha: float
    sigma: float
    Gamma: np.ndarray

    def __post_init__(self):
        if min(self.zeta, self.k_rc, self.alpha, self.sigma) <= 0.0:
            raise ValueError("zeta, k_rc, alpha and sigma must be strictly positive")
        G = np.asarray(self.Gamma, dtype=float)
        if not np.allclose(G, G.T, atol=1e-12) or np.linalg.eigvalsh(G)[0] <= 0.0:
            raise ValueError("Gamma must be symmetric positive definite")


@dataclass(frozen=True)
class RbfNetwork:
    """Gaussian features over the normalized controller input z = [e, edot, e_c].

    scales holds one normalization divisor per input block (position error,
    error rate, mixed error); theta_hat is the initial weight vector.
    """

    centers: np.ndarray        # (nodes, 6)
    widths: np.ndarray         # (nodes,)
    scales: np.ndarray         # (3,)
    theta_hat: np.ndarray      # (nodes,)

    def __post_init__(self):
        if self.centers.ndim != 2 or self.centers.shape[1] != 6:
            raise ValueError("centers must have shape (nodes, 6)")
        if self.centers.shape[0] < 1:
            raise ValueError("at least one RBF node is required")
        if np.any(self.widths <= 0.0) or np.any(self.scales <= 0.0):
            raise ValueError("widths and scales must be strictly positive")

    @property
    def nodes(self) -> int:
        return self.centers.shape[0]


def make_rbf_network(nodes: int = 20, seed: int = 0, width: float = 1.0,
                     scales=(1.0, 1.0, 1.0)) -> RbfNetwork:
    """Centers drawn once from the uniform box [-1, 1]^6 (seeded), equal
    widths, zero-initialized weights."""
    rng = np.random.default_rng(seed)
    centers = rng.uniform(-1.0, 1.0, size=(nodes, 6))
    return RbfNetwork(centers, np.full(nodes, float(width)),
                      np.asarray(scales, dtype=float), np.zeros(nodes))


def commutative_error(e: np.ndarray, e_dot: np.ndarray, e_int: np.ndarray,
                      zeta: float) -> np.ndarray:
    """PID-structured error e_c = 2 zeta e + zeta^2 int(e) + edot,
    i.e. (d/dt + zeta)^2 applied to int(e)."""
    return 2.0 * zeta * e + zeta ** 2 * e_int + e_dot


def controller_input(e: np.ndarray, e_dot: np.ndarray,
                     e_c: np.ndarray) -> np.ndarray:
    """Stacked network input z = [e, edot, e_c] (length 6)."""
    return np.concatenate([e, e_dot, e_c])


def rbf_features(net: RbfNetwork, z: np.ndarray) -> np.ndarray:
    """phi_i = exp(-||z_n - c_i||^2 / w_i^2) with z_n the block-normalized input."""
    z_n = z / np.repeat(net.scales, 2)
    d2 = np.sum((z_n - net.centers) ** 2, axis=1)
    return np.exp(-d2 / net.widths ** 2)


def gain(net: RbfNetwork, z: np.ndarray, alpha: float,
         theta_hat: np.ndarray | None = None) -> float:
    """Adaptive scalar gain k_R = alpha * theta_hat . phi(z)."""
    th = net.theta_hat if theta_hat is None else theta_hat
    return float(alpha * (th @ rbf_features(net, z)))


def control_torque(e_c: np.ndarray, k_rc: float, k_R: float) -> np.ndarray:
    """tau = (k_rc + k_R) e_c."""
    return (k_rc + k_R) * e_c


def adapt(net: RbfNetwork, e_c: np.ndarray, z: np.ndarray,
          gains: ControllerGains,
          theta_hat: np.ndarray | None = None) -> np.ndarray:
    """Weight derivative Gamma (alpha ||e_c||^2 phi(z) - sigma theta_hat).

    The -sigma theta_hat leakage keeps the weights bounded when the error
    stops exciting the features.
    """
    th = net.theta_hat if theta_hat is None else theta_hat
    phi = rbf_features(net, z)
    return gains.Gamma @ (gains.alpha * float(e_c @ e_c) * phi - gains.sigma * th)
