"""Admittance relation, error-space control law and its state-space realisation."""
from dataclasses import dataclass

import numpy as np

from .errors import NonInvertibleMass


def _is_spd(A):
    A = np.asarray(A, dtype=float)
    return np.allclose(A, A.T) and np.linalg.eigvalsh(0.5 * (A + A.T)).min() > 0


@dataclass(frozen=True)
class AdmittanceParams:
    """Virtual mass, damping and stiffness (m x m, symmetric positive definite)."""

    M_a: np.ndarray
    D_a: np.ndarray
    K_a: np.ndarray

    def __post_init__(self):
        for name in ("M_a", "D_a", "K_a"):
            mat = np.atleast_2d(np.asarray(getattr(self, name), dtype=float))
            if mat.shape[0] != mat.shape[1]:
                raise ValueError(f"{name} must be square")
            if not _is_spd(mat):
                raise ValueError(f"{name} must be symmetric positive definite")
            object.__setattr__(self, name, mat)
        if not (self.M_a.shape == self.D_a.shape == self.K_a.shape):
            raise ValueError("M_a, D_a, K_a must share a shape")

    @classmethod
    def diagonal(cls, mass, damping, stiffness):
        return cls(np.diag(np.atleast_1d(mass).astype(float)),
                   np.diag(np.atleast_1d(damping).astype(float)),
                   np.diag(np.atleast_1d(stiffness).astype(float)))

    @property
    def m(self):
        return self.M_a.shape[0]

    def mass_inverse(self):
        try:
            return np.linalg.inv(self.M_a)
        except np.linalg.LinAlgError as exc:
            raise NonInvertibleMass(str(exc)) from exc


@dataclass
class ErrorState:
    e: np.ndarray
    edot: np.ndarray

    def stacked(self):
        return np.concatenate([np.atleast_1d(self.e), np.atleast_1d(self.edot)])

    @classmethod
    def from_stacked(cls, E):
        E = np.asarray(E, dtype=float)
        m = E.shape[0] // 2
        return cls(E[:m].copy(), E[m:].copy())


def build_state_space(params: AdmittanceParams):
    """A_a = [[0, I], [-M^-1 K, -M^-1 D]], B_a = [[0], [M^-1]]."""
    m = params.m
    Minv = params.mass_inverse()
    A = np.zeros((2 * m, 2 * m))
    A[:m, m:] = np.eye(m)
    A[m:, :m] = -Minv @ params.K_a
    A[m:, m:] = -Minv @ params.D_a
    B = np.zeros((2 * m, m))
    B[m:, :] = Minv
    return A, B


def admittance_control(E, xi_dd_d, u_c, params: AdmittanceParams):
    """Task acceleration u = xi_dd_d - M^-1 (D edot + K e - u_c)."""
    if isinstance(E, ErrorState):
        e, edot = E.e, E.edot
    else:
        E = np.asarray(E, dtype=float)
        m = E.shape[0] // 2
        e, edot = E[:m], E[m:]
    rhs = params.D_a @ edot + params.K_a @ e - np.asarray(u_c, dtype=float)
    return np.asarray(xi_dd_d, dtype=float) - np.linalg.solve(params.M_a, rhs)
