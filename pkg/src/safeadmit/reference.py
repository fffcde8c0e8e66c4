"""Switched piecewise-affine reference model  E_r' = A_p E_r + B_a f_ext."""
from dataclasses import dataclass

import numpy as np

from .errors import NotHurwitz


def companion_matrix(stiffness, damping):
    """[[0, I], [-diag(k), -diag(d)]] from positive per-axis magnitudes.

    The lower blocks are negated so that positive stiffness/damping entries give
    a Hurwitz matrix, matching the structure of the admittance realisation.
    """
    k = np.atleast_1d(np.asarray(stiffness, dtype=float))
    d = np.atleast_1d(np.asarray(damping, dtype=float))
    if k.shape != d.shape:
        raise ValueError("stiffness and damping must have the same length")
    m = k.shape[0]
    A = np.zeros((2 * m, 2 * m))
    A[:m, m:] = np.eye(m)
    A[m:, :m] = -np.diag(k)
    A[m:, m:] = -np.diag(d)
    # per-axis char. polynomial s^2 + d s + k is Hurwitz iff k > 0 and d > 0
    if np.any(k <= 0) or np.any(d <= 0) or np.max(np.linalg.eigvals(A).real) >= 0.0:
        raise NotHurwitz(f"subsystem with stiffness {k} and damping {d} is not Hurwitz")
    return A


def subsystem_matrix(stiffness=(10.0, 10.0), damping=(15.0, 15.0)):
    """Compliant subsystem A_1."""
    return companion_matrix(stiffness, damping)


def safety_matrix(stiffness=(40.0, 40.0), damping=(50.0, 50.0)):
    """Stiff safety subsystem A_2."""
    return companion_matrix(stiffness, damping)


def axis_coefficients(A, axis):
    """Signed lower-block entries (k_i, d_i) of A for one axis."""
    m = A.shape[0] // 2
    return float(A[m + axis, axis]), float(A[m + axis, m + axis])


@dataclass
class ReferenceModelSet:
    A1: np.ndarray
    A2: np.ndarray
    B_a: np.ndarray

    def __post_init__(self):
        self.A1 = np.asarray(self.A1, dtype=float)
        self.A2 = np.asarray(self.A2, dtype=float)
        self.B_a = np.asarray(self.B_a, dtype=float)
        m = self.m
        for name in ("A1", "A2"):
            A = getattr(self, name)
            if A.shape != (2 * m, 2 * m):
                raise ValueError(f"{name} has shape {A.shape}, expected {(2 * m, 2 * m)}")
            if not (np.array_equal(A[:m, :m], np.zeros((m, m))) and np.array_equal(A[:m, m:], np.eye(m))):
                raise ValueError(f"{name} upper blocks must be exactly [0, I]")
            for blk in (A[m:, :m], A[m:, m:]):
                if np.count_nonzero(blk - np.diag(np.diag(blk))):
                    raise ValueError(f"{name} lower blocks must be diagonal")
            if np.max(np.linalg.eigvals(A).real) >= 0.0:
                raise NotHurwitz(f"{name} is not Hurwitz")

    @property
    def m(self):
        return self.B_a.shape[1]

    def matrix(self, p):
        if p == 1:
            return self.A1
        if p == 2:
            return self.A2
        raise ValueError(f"unknown subsystem index {p}")


@dataclass
class ReferenceState:
    E_r: np.ndarray
    p: int = 1

    def pose(self, desired):
        """Reference pose xi_r = e_r + xi_d."""
        m = self.E_r.shape[0] // 2
        return self.E_r[:m] + np.asarray(desired, dtype=float)


def reference_step(state: ReferenceState, force, p, dt, models: ReferenceModelSet, t=0.0):
    """Advance the reference by one RK4 step with subsystem ``p`` held.

    ``force`` is either a constant force vector or a callable ``force(t)``
    evaluated at each RK4 stage.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    A = models.matrix(p)
    B = models.B_a
    f = force if callable(force) else (lambda _t, _f=np.atleast_1d(force): _f)

    def rhs(tt, x):
        return A @ x + B @ f(tt)

    x = state.E_r
    k1 = rhs(t, x)
    k2 = rhs(t + 0.5 * dt, x + 0.5 * dt * k1)
    k3 = rhs(t + 0.5 * dt, x + 0.5 * dt * k2)
    k4 = rhs(t + dt, x + dt * k3)
    return ReferenceState(x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), p)
