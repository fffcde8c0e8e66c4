"""Rigid-body models for the planar two-link arm and the single-link rotary arm.

Both arms move in a horizontal plane (or about a vertical axis), so the gravity
vector is identically zero. The two-link inertia and Coriolis terms are read off
the explicit joint-torque equations of the arm:

    tau1 = m2 l2^2 (qdd1 + qdd2) + m2 l1 l2 c2 (2 qdd1 + qdd2) + (m1 + m2) l1^2 qdd1
           - m2 l1 l2 s2 qd2^2 - 2 m2 l1 l2 s2 qd1 qd2 - tau_e1
    tau2 = m2 l2^2 (qdd1 + qdd2) + m2 l1 l2 c2 qdd1 + m2 l1 l2 s2 qd1^2 - tau_e2
"""
from dataclasses import dataclass

import numpy as np

from .errors import SingularInertia

SINGULAR_DET = 1e-8
DLS_DAMPING = 1e-4


@dataclass(frozen=True)
class TwoLinkModel:
    m1: float = 1.5
    m2: float = 1.0
    l1: float = 0.3
    l2: float = 0.3

    def __post_init__(self):
        for name in ("m1", "m2", "l1", "l2"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")

    @property
    def n(self):
        return 2

    def inertia(self, q):
        q = np.asarray(q, dtype=float)
        c2 = np.cos(q[1])
        a = self.m2 * self.l2**2
        b = self.m2 * self.l1 * self.l2 * c2
        m11 = a + 2.0 * b + (self.m1 + self.m2) * self.l1**2
        m12 = a + b
        return np.array([[m11, m12], [m12, a]])

    def coriolis(self, q, qdot):
        """Coriolis matrix C(q, qdot) with Mdot - 2C skew-symmetric."""
        q = np.asarray(q, dtype=float)
        qd1, qd2 = qdot
        k = self.m2 * self.l1 * self.l2 * np.sin(q[1])
        return k * np.array([[-qd2, -(qd1 + qd2)], [qd1, 0.0]])

    def kinetic_energy(self, q, qdot):
        qdot = np.asarray(qdot, dtype=float)
        return 0.5 * qdot @ self.inertia(q) @ qdot


@dataclass(frozen=True)
class SingleLinkModel:
    """Voltage-driven rotary link: J_eq*omega_dot + B_eq*omega = A_m*V_m + tau_ext."""

    J_eq: float = 0.0023
    B_eq: float = 0.0844
    A_m: float = 0.129
    l: float = 0.1525

    def __post_init__(self):
        if not (self.J_eq > 0 and self.B_eq >= 0 and self.A_m > 0 and self.l > 0):
            raise ValueError("require J_eq > 0, B_eq >= 0, A_m > 0, l > 0")

    @property
    def n(self):
        return 1


@dataclass
class JointState:
    q: np.ndarray
    qdot: np.ndarray

    def __post_init__(self):
        self.q = np.atleast_1d(np.asarray(self.q, dtype=float))
        self.qdot = np.atleast_1d(np.asarray(self.qdot, dtype=float))
        if self.q.shape != self.qdot.shape:
            raise ValueError("q and qdot must have the same length")

    def check(self, model):
        if self.q.shape[0] != model.n:
            raise ValueError(f"state dimension {self.q.shape[0]} does not match model (n={model.n})")
        return self


def forward_kinematics(model: TwoLinkModel, q):
    q = np.asarray(q, dtype=float)
    q12 = q[0] + q[1]
    return np.array([
        model.l1 * np.cos(q[0]) + model.l2 * np.cos(q12),
        model.l1 * np.sin(q[0]) + model.l2 * np.sin(q12),
    ])


def inverse_kinematics(model: TwoLinkModel, xi, elbow=1):
    """Joint angles reaching the planar point ``xi``; ``elbow`` picks the sign of q2."""
    x, y = np.asarray(xi, dtype=float)
    c2 = (x * x + y * y - model.l1**2 - model.l2**2) / (2.0 * model.l1 * model.l2)
    if abs(c2) > 1.0:
        raise ValueError(f"point {xi} is outside the workspace")
    q2 = elbow * np.arccos(c2)
    q1 = np.arctan2(y, x) - np.arctan2(model.l2 * np.sin(q2), model.l1 + model.l2 * np.cos(q2))
    return np.array([q1, q2])


def jacobian(model: TwoLinkModel, q):
    q = np.asarray(q, dtype=float)
    s1, c1 = np.sin(q[0]), np.cos(q[0])
    s12, c12 = np.sin(q[0] + q[1]), np.cos(q[0] + q[1])
    return np.array([
        [-model.l1 * s1 - model.l2 * s12, -model.l2 * s12],
        [model.l1 * c1 + model.l2 * c12, model.l2 * c12],
    ])


def jacobian_dot(model: TwoLinkModel, q, qdot):
    q = np.asarray(q, dtype=float)
    qd1, qd2 = qdot
    s1, c1 = np.sin(q[0]), np.cos(q[0])
    s12, c12 = np.sin(q[0] + q[1]), np.cos(q[0] + q[1])
    w12 = qd1 + qd2
    return np.array([
        [-model.l1 * c1 * qd1 - model.l2 * c12 * w12, -model.l2 * c12 * w12],
        [-model.l1 * s1 * qd1 - model.l2 * s12 * w12, -model.l2 * s12 * w12],
    ])


def is_singular(J):
    return abs(np.linalg.det(J)) < SINGULAR_DET


def pseudo_inverse(J):
    """Return (J_dagger, damped). Damped least squares engages when |det J| < 1e-8."""
    if is_singular(J):
        m = J.shape[0]
        return J.T @ np.linalg.inv(J @ J.T + DLS_DAMPING * np.eye(m)), True
    return np.linalg.inv(J), False


def forward_dynamics(model: TwoLinkModel, state: JointState, tau, tau_e):
    """Joint accelerations from applied torques ``tau`` and external joint torques ``tau_e``."""
    M = model.inertia(state.q)
    rhs = np.asarray(tau, dtype=float) + np.asarray(tau_e, dtype=float) \
        - model.coriolis(state.q, state.qdot) @ state.qdot
    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    if abs(det) < 1e-14:
        raise SingularInertia(f"inertia matrix is singular at q={state.q}")
    return np.linalg.solve(M, rhs)


def computed_torque(model: TwoLinkModel, state: JointState, v, f_ext):
    """Feedback-linearising torque; closing the loop gives qdd = v."""
    M = model.inertia(state.q)
    C = model.coriolis(state.q, state.qdot)
    J = jacobian(model, state.q)
    return M @ np.asarray(v, dtype=float) + C @ state.qdot - J.T @ np.asarray(f_ext, dtype=float)


def task_space_command(model: TwoLinkModel, state: JointState, u):
    """Joint acceleration ``v`` rendering xi_ddot = u, and whether DLS damping was active."""
    J = jacobian(model, state.q)
    Jdot = jacobian_dot(model, state.q, state.qdot)
    Jinv, damped = pseudo_inverse(J)
    return Jinv @ (np.asarray(u, dtype=float) - Jdot @ state.qdot), damped


def single_link_dynamics(model: SingleLinkModel, omega, V_m, tau_ext):
    return (model.A_m * V_m + tau_ext - model.B_eq * omega) / model.J_eq


def single_link_voltage(model: SingleLinkModel, omega, u, tau_ext_est):
    """Voltage making omega_dot = u given the estimated external torque."""
    return (model.J_eq * u + model.B_eq * omega - tau_ext_est) / model.A_m
