"""Adaptive tracking layer: matching gains, gain adaptation and the common Lyapunov matrix."""
from dataclasses import dataclass

import numpy as np

from .errors import NoCommonP, NotHurwitz, StructureMismatch

ALPHA_GRID = 1001


def matching_gains(A_a, B_a, A_p):
    """Nominal gain K_p* with A_a + B_a K_p* = A_p.

    Requires B_a = [0; M_a^-1], so K_p* = M_a (lower rows of A_p - A_a).
    """
    A_a = np.asarray(A_a, dtype=float)
    B_a = np.asarray(B_a, dtype=float)
    A_p = np.asarray(A_p, dtype=float)
    m = B_a.shape[1]
    if np.any(B_a[:m] != 0.0):
        raise StructureMismatch("B_a must have a zero upper block")
    diff = A_p - A_a
    if np.any(diff[:m] != 0.0):
        raise StructureMismatch("A_p and A_a differ in their upper block rows")
    return np.linalg.solve(B_a[m:], diff[m:])


def control_uc(K_p, E, f_ext):
    """Auxiliary input u_c = K_p E + f_ext."""
    return np.asarray(K_p) @ np.asarray(E, dtype=float) + np.asarray(f_ext, dtype=float)


def gain_rate(Gamma, B_a, P, e_a, E):
    """K_dot = -Gamma B_a^T P e_a E^T (m x 2m)."""
    return -np.asarray(Gamma) @ np.asarray(B_a).T @ np.asarray(P) @ np.outer(e_a, E)


def gain_update_step(K_p, Gamma, B_a, P, e_a, E, dt):
    """One explicit step of the adaptation law with e_a and E held over the step."""
    return np.asarray(K_p, dtype=float) + dt * gain_rate(Gamma, B_a, P, e_a, E)


def solve_lyapunov(A, Q=None):
    """Solve A^T P + P A = -Q for a 2x2 Hurwitz A via its three symmetric unknowns.

    Unknowns (p11, p12, p22); with A = [[a, b], [c, d]]:
        2a p11 + 2c p12              = -q11
        b p11 + (a + d) p12 + c p22  = -q12
        2b p12 + 2d p22              = -q22
    """
    A = np.asarray(A, dtype=float)
    Q = np.eye(2) if Q is None else np.asarray(Q, dtype=float)
    if A.shape != (2, 2):
        raise ValueError("solve_lyapunov expects a 2x2 block")
    if np.max(np.linalg.eigvals(A).real) >= 0.0:
        raise NotHurwitz(f"matrix {A.tolist()} is not Hurwitz")
    (a, b), (c, d) = A
    lhs = np.array([
        [2 * a, 2 * c, 0.0],
        [b, a + d, c],
        [0.0, 2 * b, 2 * d],
    ])
    rhs = -np.array([Q[0, 0], 0.5 * (Q[0, 1] + Q[1, 0]), Q[1, 1]])
    try:
        p11, p12, p22 = np.linalg.solve(lhs, rhs)
    except np.linalg.LinAlgError as exc:
        raise NotHurwitz("Lyapunov system is singular") from exc
    P = np.array([[p11, p12], [p12, p22]])
    if np.linalg.eigvalsh(P).min() <= 0:
        raise NotHurwitz("Lyapunov solution is not positive definite")
    return P


def lyapunov_residual(A, P, Q):
    return float(np.max(np.abs(A.T @ P + P @ A + Q)))


def _axis_block(A, i):
    m = A.shape[0] // 2
    idx = [i, m + i]
    return A[np.ix_(idx, idx)]


def _check_block_structure(A):
    m = A.shape[0] // 2
    mask = np.zeros_like(A, dtype=bool)
    for i in range(m):
        for r in (i, m + i):
            for c in (i, m + i):
                mask[r, c] = True
    if np.any(A[~mask] != 0.0):
        raise StructureMismatch("subsystem matrix does not decouple per axis")


def lyapunov_margin(P, A_list):
    """Worst-case c with A_p^T P + P A_p <= -c I over the given subsystems."""
    return min(float(np.linalg.eigvalsh(-(A.T @ P + P @ A)).min()) for A in A_list)


def find_common_P(A1, A2, Q=None, grid=ALPHA_GRID):
    """Common quadratic Lyapunov matrix for two per-axis decoupled subsystems.

    For each axis, P(alpha) = alpha P_1 + (1 - alpha) P_2 is scanned on a uniform
    alpha grid, keeping the P that maximises min_p lambda_min(-(A_p^T P + P A_p)).
    Returns the block-assembled P and the verified margin c.
    """
    A1 = np.asarray(A1, dtype=float)
    A2 = np.asarray(A2, dtype=float)
    Q = np.eye(2) if Q is None else Q
    _check_block_structure(A1)
    _check_block_structure(A2)
    m = A1.shape[0] // 2
    P = np.zeros_like(A1)
    for i in range(m):
        B1, B2 = _axis_block(A1, i), _axis_block(A2, i)
        try:
            P1 = solve_lyapunov(B1, Q)
            P2 = solve_lyapunov(B2, Q)
        except NotHurwitz as exc:
            raise NoCommonP(f"axis {i + 1}: {exc}", best_margin=-np.inf) from exc
        best_c, best_P = -np.inf, None
        for alpha in np.linspace(0.0, 1.0, grid):
            Pa = alpha * P1 + (1.0 - alpha) * P2
            c = lyapunov_margin(Pa, (B1, B2))
            if c > best_c:
                best_c, best_P = c, Pa
        if best_c <= 0:
            raise NoCommonP(f"axis {i + 1}: best margin {best_c:.6g}", best_margin=best_c)
        idx = [i, m + i]
        P[np.ix_(idx, idx)] = best_P
    c = lyapunov_margin(P, (A1, A2))
    if c <= 0:
        raise NoCommonP(f"assembled P has margin {c:.6g}", best_margin=c)
    return P, c


def lyapunov_value(e_a, Ktil1, Ktil2, P, Gamma1, Gamma2):
    """V = 1/2 e_a^T P e_a + 1/2 sum_p tr(Ktil_p^T Gamma_p^-1 Ktil_p)."""
    e_a = np.asarray(e_a, dtype=float)
    V = 0.5 * e_a @ np.asarray(P) @ e_a
    for Kt, G in ((Ktil1, Gamma1), (Ktil2, Gamma2)):
        Kt = np.asarray(Kt, dtype=float)
        V += 0.5 * np.trace(Kt.T @ np.linalg.solve(np.asarray(G, dtype=float), Kt))
    return float(V)


@dataclass
class AdaptiveGainSet:
    K1: np.ndarray
    K2: np.ndarray
    Gamma1: np.ndarray
    Gamma2: np.ndarray
    P: np.ndarray
    K1_star: np.ndarray
    K2_star: np.ndarray
    margin: float = float("nan")

    def __post_init__(self):
        for name in ("Gamma1", "Gamma2"):
            G = np.asarray(getattr(self, name), dtype=float)
            if np.count_nonzero(G - np.diag(np.diag(G))) or np.any(np.diag(G) <= 0):
                raise ValueError(f"{name} must be diagonal with positive entries")
            setattr(self, name, G)
        if np.linalg.eigvalsh(0.5 * (self.P + self.P.T)).min() <= 0:
            raise ValueError("P must be positive definite")

    @classmethod
    def build(cls, A_a, B_a, A1, A2, gamma, offset=None):
        """Matching gains, common P and gains initialised at K* + offset."""
        K1s = matching_gains(A_a, B_a, A1)
        K2s = matching_gains(A_a, B_a, A2)
        P, c = find_common_P(A1, A2)
        G = np.diag(np.atleast_1d(np.asarray(gamma, dtype=float)))
        off = np.zeros_like(K1s) if offset is None else np.asarray(offset, dtype=float)
        return cls(K1s + off, K2s + off, G, G.copy(), P, K1s, K2s, c)

    def gain(self, p):
        return self.K1 if p == 1 else self.K2

    def set_gain(self, p, K):
        if p == 1:
            self.K1 = K
        else:
            self.K2 = K

    def gamma(self, p):
        return self.Gamma1 if p == 1 else self.Gamma2

    def value(self, e_a):
        return lyapunov_value(e_a, self.K1 - self.K1_star, self.K2 - self.K2_star,
                              self.P, self.Gamma1, self.Gamma2)


@dataclass
class LyapunovRecord:
    t: float
    V: float
    Vdot_observed: float = float("nan")

    def __post_init__(self):
        if self.V < 0:
            raise ValueError("Lyapunov value must be nonnegative")
